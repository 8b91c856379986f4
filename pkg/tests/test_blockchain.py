import json

import base58
import bech32m
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conspigraph.monetization import extract_blockchain_addresses
from conspigraph.monetization.blockchain import classify_token, eip55_checksum
from oracles import eip55, keccak256, monero_checksum_ok

CHAINS = ("bitcoin", "ethereum", "monero", "zcash")


@pytest.fixture(scope="module")
def addresses(fixtures_dir):
    return json.loads((fixtures_dir / "addresses.json").read_text(encoding="utf-8"))


def _reference_accepts(chain: str, addr: str) -> bool:
    """Independent validity check with third-party codecs and the test oracles."""
    if chain == "bitcoin":
        if addr.lower().startswith("bc1"):
            try:
                bech32m.decode("bc", addr)
            except (bech32m.DecodeError, ValueError, TypeError):
                return False
            return True
        try:
            payload = base58.b58decode_check(addr)
        except ValueError:
            return False
        return len(payload) == 21 and payload[0] in (0x00, 0x05)
    if chain == "zcash":
        try:
            payload = base58.b58decode_check(addr)
        except ValueError:
            return False
        return len(payload) == 22 and payload[:2] in (b"\x1c\xb8", b"\x1c\xbd")
    if chain == "ethereum":
        body = addr[2:]
        if len(body) != 40 or not addr.startswith("0x") or any(c not in "0123456789abcdefABCDEF" for c in body):
            return False
        return body in (body.lower(), body.upper()) or eip55(body) == addr
    if chain == "monero":
        return monero_checksum_ok(addr)
    raise ValueError(chain)


def test_oracle_vectors():
    # BIP-173 and BIP-350 test vectors
    assert _reference_accepts("bitcoin", "BC1QW508D6QEJXTDG4Y5R3ZARVARY0C5XW7KV8F3T4")
    assert _reference_accepts("bitcoin", "bc1p0xlxvlhemja6c4dqv22uapctqupfhlxm9h8z3k2e72q4k9hcz7vqzk5jj0")
    assert not _reference_accepts("bitcoin", "bc1p0xlxvlhemja6c4dqv22uapctqupfhlxm9h8z3k2e72q4k9hcz7vqh2y7hd")
    assert keccak256(b"").hex() == "c5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470"
    vec = "0x5aAeb6053F3E94C9b9A09f33669435E7Ef1BeAed"
    assert eip55(vec[2:].lower()) == vec == eip55_checksum(vec.lower())


@pytest.mark.parametrize("chain", CHAINS)
def test_valid_set_verified_by_reference(addresses, chain):
    valid = addresses[chain]["valid"]
    assert len(valid) == 10
    assert all(_reference_accepts(chain, v["address"]) for v in valid)


@pytest.mark.parametrize("chain", CHAINS)
def test_valid_addresses_accepted_with_grade(addresses, chain):
    for v in addresses[chain]["valid"]:
        got = classify_token(v["address"])
        assert got is not None, v
        assert (got.chain, got.validation) == (chain, v["validation"])


@pytest.mark.parametrize("chain", CHAINS)
def test_corrupted_addresses_rejected(addresses, chain):
    corrupt = addresses[chain]["corrupt"]
    assert len(corrupt) == 10
    assert [c for c in corrupt if classify_token(c) is not None] == []
    if chain != "monero":  # corrupted Monero entries break the format, not only the checksum
        assert not any(_reference_accepts(chain, c) for c in corrupt)


def test_monero_grade_is_format_only(addresses):
    assert {v["validation"] for v in addresses["monero"]["valid"]} == {"format_valid"}


def test_extraction_from_text(addresses):
    btc = addresses["bitcoin"]["valid"][0]["address"]
    eth = addresses["ethereum"]["valid"][0]["address"]
    text = f"Send BTC to {btc}, ETH: {eth}. Again {btc}! bogus 1A1zP1eP5QGefi2DMPTfTL5SLmv7Divfxx"
    found = extract_blockchain_addresses(text)
    assert [(a.chain, a.address) for a in found] == [("bitcoin", btc), ("ethereum", eth)]


@settings(max_examples=200, deadline=None)
@given(st.text(st.sampled_from("123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz0x "), max_size=120))
def test_extraction_never_returns_invalid(text):
    for a in extract_blockchain_addresses(text):
        assert _reference_accepts(a.chain, a.address) or a.validation == "format_valid"
        assert a.address in text
