"""Reference implementations used only as test oracles.

Each is written from the textbook definition and shares no code with the
package, so agreement between the two is meaningful.
"""

from __future__ import annotations

import numpy as np

# --- Keccak-256 (original padding, as used by Ethereum) ---------------------------

_RC = [
    0x0000000000000001, 0x0000000000008082, 0x800000000000808A, 0x8000000080008000,
    0x000000000000808B, 0x0000000080000001, 0x8000000080008081, 0x8000000000008009,
    0x000000000000008A, 0x0000000000000088, 0x0000000080008009, 0x000000008000000A,
    0x000000008000808B, 0x800000000000008B, 0x8000000000008089, 0x8000000000008003,
    0x8000000000008002, 0x8000000000000080, 0x000000000000800A, 0x800000008000000A,
    0x8000000080008081, 0x8000000000008080, 0x0000000080000001, 0x8000000080008008,
]
_ROT = [
    [0, 36, 3, 41, 18], [1, 44, 10, 45, 2], [62, 6, 43, 15, 61],
    [28, 55, 25, 21, 56], [27, 20, 39, 8, 14],
]
_MASK = (1 << 64) - 1


def _rol(x: int, n: int) -> int:
    n %= 64
    return ((x << n) | (x >> (64 - n))) & _MASK


def _keccak_f(a):
    for rc in _RC:
        c = [a[x][0] ^ a[x][1] ^ a[x][2] ^ a[x][3] ^ a[x][4] for x in range(5)]
        d = [c[(x - 1) % 5] ^ _rol(c[(x + 1) % 5], 1) for x in range(5)]
        a = [[a[x][y] ^ d[x] for y in range(5)] for x in range(5)]
        b = [[0] * 5 for _ in range(5)]
        for x in range(5):
            for y in range(5):
                b[y][(2 * x + 3 * y) % 5] = _rol(a[x][y], _ROT[x][y])
        a = [[b[x][y] ^ (~b[(x + 1) % 5][y] & b[(x + 2) % 5][y]) for y in range(5)] for x in range(5)]
        a[0][0] ^= rc
    return a


def keccak256(data: bytes) -> bytes:
    rate = 136
    msg = bytearray(data) + b"\x01"
    while len(msg) % rate:
        msg.append(0)
    msg[-1] |= 0x80
    a = [[0] * 5 for _ in range(5)]
    for off in range(0, len(msg), rate):
        block = msg[off:off + rate]
        for i in range(rate // 8):
            x, y = i % 5, i // 5
            a[x][y] ^= int.from_bytes(block[8 * i:8 * i + 8], "little")
        a = _keccak_f(a)
    out = b""
    for i in range(4):
        out += a[i % 5][i // 5].to_bytes(8, "little")
    return out


def eip55(hex40: str) -> str:
    """EIP-55 mixed-case encoding of a 40-hex-digit address body."""
    body = hex40.lower()
    h = keccak256(body.encode()).hex()
    return "0x" + "".join(c.upper() if int(d, 16) >= 8 else c for c, d in zip(body, h))


# --- Monero base58 (8-byte blocks) --------------------------------------------------

_B58 = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz"
_XMR_BLOCK = {0: 0, 1: 2, 2: 3, 3: 5, 4: 6, 5: 7, 6: 9, 7: 10, 8: 11}


def monero_b58encode(data: bytes) -> str:
    out = []
    for off in range(0, len(data), 8):
        block = data[off:off + 8]
        n = int.from_bytes(block, "big")
        width = _XMR_BLOCK[len(block)]
        chars = []
        for _ in range(width):
            n, r = divmod(n, 58)
            chars.append(_B58[r])
        out.append("".join(reversed(chars)))
    return "".join(out)


def monero_b58decode(s: str) -> bytes | None:
    """Inverse of ``monero_b58encode``; ``None`` for malformed input."""
    widths = {w: n for n, w in _XMR_BLOCK.items() if n}
    out = b""
    for off in range(0, len(s), 11):
        chunk = s[off:off + 11]
        size = widths.get(len(chunk))
        if size is None or any(c not in _B58 for c in chunk):
            return None
        n = 0
        for c in chunk:
            n = n * 58 + _B58.index(c)
        if n >= 1 << (8 * size):
            return None
        out += n.to_bytes(size, "big")
    return out


def monero_checksum_ok(address: str) -> bool:
    raw = monero_b58decode(address)
    return raw is not None and len(raw) == 69 and keccak256(raw[:65])[:4] == raw[65:]


def monero_address(spend: bytes, view: bytes, netbyte: int = 0x12) -> str:
    body = bytes([netbyte]) + spend + view
    return monero_b58encode(body + keccak256(body)[:4])


# --- modularity -----------------------------------------------------------------------

def newman_modularity(w: np.ndarray, labels, gamma: float = 1.0) -> float:
    """Q of an undirected weighted graph given by symmetric matrix ``w``, by the double sum."""
    k = w.sum(axis=1)
    two_m = w.sum()
    if two_m == 0:
        return 0.0
    labels = np.asarray(labels)
    delta = labels[:, None] == labels[None, :]
    return float(((w - gamma * np.outer(k, k) / two_m) * delta).sum() / two_m)


def newman_modularity_loops(w: np.ndarray, labels, gamma: float = 1.0) -> float:
    """Same quantity with explicit loops, used to cross-check the vectorized form."""
    n = w.shape[0]
    k = w.sum(axis=1)
    two_m = w.sum()
    if two_m == 0:
        return 0.0
    q = 0.0
    for i in range(n):
        for j in range(n):
            if labels[i] == labels[j]:
                q += w[i, j] - gamma * k[i] * k[j] / two_m
    return q / two_m


def set_partitions(n: int):
    """All partitions of range(n) as restricted-growth label lists."""
    if n == 0:
        yield []
        return

    def rec(prefix, m):
        if len(prefix) == n:
            yield list(prefix)
            return
        for c in range(m + 1):
            yield from rec(prefix + [c], max(m, c + 1))

    yield from rec([0], 1)


def best_partition_bruteforce(w: np.ndarray, gamma: float = 1.0):
    best, best_q = None, -np.inf
    for labels in set_partitions(w.shape[0]):
        q = newman_modularity(w, labels, gamma)
        if q > best_q + 1e-12:
            best, best_q = labels, q
    return best, best_q


# --- HITS -------------------------------------------------------------------------------

def hits_eig(w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Dominant eigenvectors of W^T W (authority) and W W^T (hub), unit L2 norm, non-negative."""
    out = []
    for m in (w.T @ w, w @ w.T):
        vals, vecs = np.linalg.eigh(m)
        v = vecs[:, np.argmax(vals)]
        v = v if v.sum() >= 0 else -v
        out.append(v / np.linalg.norm(v))
    return out[0], out[1]


def brute_partition_count(n: int) -> int:
    """Bell number, to sanity-check ``set_partitions``."""
    return sum(1 for _ in set_partitions(n))
