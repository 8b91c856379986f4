"""Wallet address extraction for Bitcoin, Ethereum, Monero and Zcash."""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass

from Crypto.Hash import keccak

CHAINS = ("bitcoin", "ethereum", "monero", "zcash")
VALIDATIONS = ("checksum_valid", "format_valid", "invalid")

B58_ALPHABET = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz"
_B58_INDEX = {c: i for i, c in enumerate(B58_ALPHABET)}
_B58_RE = re.compile(f"^[{B58_ALPHABET}]+$")

BECH32_CHARSET = "qpzry9x8gf2tvdw0s3jn54khce6mua7l"
_BECH32_INDEX = {c: i for i, c in enumerate(BECH32_CHARSET)}
BECH32_CONST = 1
BECH32M_CONST = 0x2BC830A3

_TOKEN_RE = re.compile(r"[0-9A-Za-z]+")
_HEX40_RE = re.compile(r"^0x[0-9a-fA-F]{40}$")

BITCOIN_VERSIONS = {0x00, 0x05}
ZCASH_PREFIXES = {b"\x1c\xb8", b"\x1c\xbd"}


@dataclass(frozen=True)
class BlockchainAddress:
    chain: str
    address: str
    validation: str


def b58decode(s: str) -> bytes:
    """Big-endian base58 decode; leading ``1`` characters become zero bytes."""
    n = 0
    for c in s:
        n = n * 58 + _B58_INDEX[c]
    body = n.to_bytes((n.bit_length() + 7) // 8, "big") if n else b""
    pad = len(s) - len(s.lstrip("1"))
    return b"\x00" * pad + body


def b58check_payload(s: str) -> bytes | None:
    """Payload of a base58check string, or None when the checksum fails."""
    if not s or not _B58_RE.match(s):
        return None
    raw = b58decode(s)
    if len(raw) < 5:
        return None
    payload, check = raw[:-4], raw[-4:]
    if hashlib.sha256(hashlib.sha256(payload).digest()).digest()[:4] != check:
        return None
    return payload


def bech32_polymod(values) -> int:
    gen = (0x3B6A57B2, 0x26508E6D, 0x1EA119FA, 0x3D4233DD, 0x2A1462B3)
    chk = 1
    for v in values:
        top = chk >> 25
        chk = (chk & 0x1FFFFFF) << 5 ^ v
        for i in range(5):
            if (top >> i) & 1:
                chk ^= gen[i]
    return chk


def _hrp_expand(hrp: str) -> list[int]:
    return [ord(c) >> 5 for c in hrp] + [0] + [ord(c) & 31 for c in hrp]


def _convertbits(data, frombits: int, tobits: int) -> list[int] | None:
    acc = bits = 0
    out = []
    maxv = (1 << tobits) - 1
    for v in data:
        acc = (acc << frombits) | v
        bits += frombits
        while bits >= tobits:
            bits -= tobits
            out.append((acc >> bits) & maxv)
    if bits >= frombits or ((acc << (tobits - bits)) & maxv):
        return None
    return out


def segwit_decode(addr: str, hrp: str = "bc") -> tuple[int, bytes] | None:
    """(witness version, program) for a valid BIP-173/BIP-350 address, else None."""
    if addr.lower() != addr and addr.upper() != addr:
        return None
    addr = addr.lower()
    pos = addr.rfind("1")
    if pos < 1 or pos + 7 > len(addr) or len(addr) > 90 or addr[:pos] != hrp:
        return None
    try:
        data = [_BECH32_INDEX[c] for c in addr[pos + 1:]]
    except KeyError:
        return None
    const = bech32_polymod(_hrp_expand(hrp) + data)
    if const not in (BECH32_CONST, BECH32M_CONST):
        return None
    version = data[0]
    prog = _convertbits(data[1:-6], 5, 8)
    if prog is None or version > 16 or not 2 <= len(prog) <= 40:
        return None
    if version == 0 and (const != BECH32_CONST or len(prog) not in (20, 32)):
        return None
    if version > 0 and const != BECH32M_CONST:
        return None
    return version, bytes(prog)


def eip55_checksum(address: str) -> str:
    """Mixed-case checksummed form of a ``0x`` + 40 hex address."""
    hexpart = address[2:].lower()
    digest = keccak.new(digest_bits=256, data=hexpart.encode("ascii")).hexdigest()
    return "0x" + "".join(c.upper() if int(h, 16) >= 8 else c for c, h in zip(hexpart, digest))


def classify_token(tok: str) -> BlockchainAddress | None:
    """Validate one alphanumeric token as a wallet address."""
    if tok[:2] == "0x" and _HEX40_RE.match(tok):
        body = tok[2:]
        if body == body.lower() or body == body.upper():
            return BlockchainAddress("ethereum", tok, "format_valid")
        if eip55_checksum(tok) == tok:
            return BlockchainAddress("ethereum", tok, "checksum_valid")
        return None
    if tok[:3].lower() == "bc1":
        if segwit_decode(tok) is not None:
            return BlockchainAddress("bitcoin", tok, "checksum_valid")
        return None
    if tok[:2] in ("t1", "t3") and len(tok) == 35:
        payload = b58check_payload(tok)
        if payload is not None and len(payload) == 22 and payload[:2] in ZCASH_PREFIXES:
            return BlockchainAddress("zcash", tok, "checksum_valid")
        return None
    if tok[0] in "13" and 25 <= len(tok) <= 34:
        payload = b58check_payload(tok)
        if payload is not None and len(payload) == 21 and payload[0] in BITCOIN_VERSIONS:
            return BlockchainAddress("bitcoin", tok, "checksum_valid")
        return None
    if tok[0] in "48" and len(tok) == 95 and _B58_RE.match(tok):
        return BlockchainAddress("monero", tok, "format_valid")
    return None


def extract_blockchain_addresses(text: str) -> list[BlockchainAddress]:
    """Valid addresses in ``text`` in order of first appearance, without repeats."""
    out, seen = [], set()
    for m in _TOKEN_RE.finditer(text or ""):
        tok = m.group()
        if len(tok) < 25:
            continue
        addr = classify_token(tok)
        if addr is not None and addr.address not in seen:
            seen.add(addr.address)
            out.append(addr)
    return out
