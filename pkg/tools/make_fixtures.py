"""Regenerate the frozen test fixtures under tests/fixtures.

    python3 tools/make_fixtures.py

url_labels.jsonl: 200 messages built from hand-written URL templates.  Each
template lists the URL as it appears in text, its expected extraction and
its expected normalized form, so labels are known by construction.

addresses.json: per chain, ten valid addresses encoded with independent
reference libraries (base58, bech32m, a pure-Python Keccak) and ten corrupted
variants that those references reject.

synthetic_table1.csv: the resources table expected for the default synthetic
corpus, written from the generator's planted ground truth alone.
"""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

import base58
import bech32m

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))
import oracles  # noqa: E402

OUT = ROOT / "tests" / "fixtures"

# (text in message, expected raw extraction, expected normalized, shortened)
URL_TEMPLATES = [
    ("https://bit.ly/abc123", "https://bit.ly/abc123", "https://bit.ly/abc123", True),
    ("http://t.co/XyZ9", "http://t.co/XyZ9", "http://t.co/XyZ9", True),
    ("https://tinyurl.com/y7k2m3", "https://tinyurl.com/y7k2m3", "https://tinyurl.com/y7k2m3", True),
    ("https://goo.gl/maps/q1", "https://goo.gl/maps/q1", "https://goo.gl/maps/q1", True),
    ("https://ow.ly/Zk1", "https://ow.ly/Zk1", "https://ow.ly/Zk1", True),
    ("https://youtu.be/dQw4w9WgXcQ", "https://youtu.be/dQw4w9WgXcQ", "https://youtu.be/dQw4w9WgXcQ", False),
    ("HTTPS://Amazon.com/dp/X?tag=a#frag", "HTTPS://Amazon.com/dp/X?tag=a#frag", "https://amazon.com/dp/X?tag=a", False),
    ("www.example.com/a", "www.example.com/a", "https://www.example.com/a", False),
    ("WWW.Zerohedge.com", "WWW.Zerohedge.com", "https://www.zerohedge.com/", False),
    ("https://example.com:443/", "https://example.com:443/", "https://example.com/", False),
    ("http://example.com:80/x", "http://example.com:80/x", "http://example.com/x", False),
    ("http://example.com:8080/x", "http://example.com:8080/x", "http://example.com:8080/x", False),
    ("https://www.youtube.com/watch?v=abc&t=10s", "https://www.youtube.com/watch?v=abc&t=10s",
     "https://www.youtube.com/watch?v=abc&t=10s", False),
    ("https://www.reddit.com/r/conspiracy/comments/1/x/", "https://www.reddit.com/r/conspiracy/comments/1/x/",
     "https://www.reddit.com/r/conspiracy/comments/1/x/", False),
    ("https://patreon.com/truthseeker#posts", "https://patreon.com/truthseeker#posts",
     "https://patreon.com/truthseeker", False),
    ("https://example.org/path%7Euser/%41bc", "https://example.org/path%7Euser/%41bc",
     "https://example.org/path~user/Abc", False),
    ("https://example.org/a%2fb", "https://example.org/a%2fb", "https://example.org/a%2Fb", False),
    ("https://www.paypal.com/donate?hosted_button_id=ABC123", "https://www.paypal.com/donate?hosted_button_id=ABC123",
     "https://www.paypal.com/donate?hosted_button_id=ABC123", False),
    ("https://shop.example.net/products/mug?b=2&a=1", "https://shop.example.net/products/mug?b=2&a=1",
     "https://shop.example.net/products/mug?b=2&a=1", False),
    ("https://EXAMPLE.com", "https://EXAMPLE.com", "https://example.com/", False),
    ("http://xn--mnchen-3ya.de/news", "http://xn--mnchen-3ya.de/news", "http://münchen.de/news", False),
    ("https://de.wikipedia.org/wiki/Telegram", "https://de.wikipedia.org/wiki/Telegram",
     "https://de.wikipedia.org/wiki/Telegram", False),
    ("https://gofundme.com/f/help-the-farm", "https://gofundme.com/f/help-the-farm",
     "https://gofundme.com/f/help-the-farm", False),
    ("https://example.com/search?q=&flag", "https://example.com/search?q=&flag",
     "https://example.com/search?q=&flag", False),
    ("https://cutt.ly/w8Tq", "https://cutt.ly/w8Tq", "https://cutt.ly/w8Tq", True),
    ("https://rb.gy/3kd9", "https://rb.gy/3kd9", "https://rb.gy/3kd9", True),
    ("https://is.gd/Qr7", "https://is.gd/Qr7", "https://is.gd/Qr7", True),
    ("https://bitchute.com/video/ab12/", "https://bitchute.com/video/ab12/", "https://bitchute.com/video/ab12/", False),
    ("www.rumble.com/v1abc-x.html", "www.rumble.com/v1abc-x.html", "https://www.rumble.com/v1abc-x.html", False),
    ("https://t.me/joinchat/AAAA", "https://t.me/joinchat/AAAA", "https://t.me/joinchat/AAAA", False),
]

# punctuation that follows a URL in text and must not be part of it
SUFFIXES = ["", ".", ",", ";", ":", "!", "?", ")", "]", "}", "\"", "'", "...", ").", "!!", "?!"]
PREFIXES = ["", "(", "[", "{", "\"", "'", "see ", "->", "«"]

# text with no URL per the grammar (bare domains, e-mails, other schemes)
NEGATIVES = [
    "contact me at someone@example.com",
    "visit example.com for more",
    "ftp://files.example.com/x is down",
    "version 1.2.3 is out",
    "just http:// and nothing",
    "the site wwwexample.com is fake",
    "www. alone",
    "e.g. this, i.e. that",
    "mailto:test@example.org",
    "https:/broken.example.com",
]

WORDS_EN = "the truth is out there and they do not want you to know about it wake up share".split()
WORDS_RU = "правда где то рядом смотрите видео".split()
WORDS_DE = "die wahrheit wird ans licht kommen teilen bitte".split()


def _words(rng: random.Random) -> str:
    pool = rng.choice([WORDS_EN, WORDS_RU, WORDS_DE])
    return " ".join(rng.choice(pool) for _ in range(rng.randint(0, 6)))


def url_messages(n: int = 200, seed: int = 7) -> list[dict]:
    rng = random.Random(seed)
    out = []
    for i in range(n):
        parts, labels = [], []
        k = rng.choice([0, 1, 1, 1, 2, 2, 3]) if i % 10 else 0
        if k == 0:
            parts.append(rng.choice(NEGATIVES))
        for _ in range(k):
            text, raw, norm, short = rng.choice(URL_TEMPLATES)
            head = _words(rng)
            if head:
                parts.append(head)
            parts.append(rng.choice(PREFIXES) + text + rng.choice(SUFFIXES))
            labels.append({"raw": raw, "normalized": norm, "shortened": short})
            if rng.random() < 0.3:
                parts.append(rng.choice(NEGATIVES))
        sep = rng.choice([" ", "\n", "  ", " \n"])
        out.append({"message_id": i + 1, "text": sep.join(parts), "urls": labels})
    return out


# --- addresses ----------------------------------------------------------------------

B58 = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz"


def _swap_char(s: str, pos: int, alphabet: str, rng: random.Random) -> str:
    choices = [c for c in alphabet if c != s[pos]]
    return s[:pos] + rng.choice(choices) + s[pos + 1:]


def _b58_reject(s: str) -> bool:
    try:
        base58.b58decode_check(s)
    except ValueError:
        return True
    return False


def _bech32_reject(s: str) -> bool:
    try:
        bech32m.decode("bc", s)
    except (bech32m.DecodeError, ValueError, TypeError):
        return True
    return False


def bitcoin(rng: random.Random) -> tuple[list, list]:
    valid = [("1A1zP1eP5QGefi2DMPTfTL5SLmv7DivfNa", "checksum_valid")]
    for version in (0x00, 0x00, 0x00, 0x05, 0x05):
        valid.append((base58.b58encode_check(bytes([version]) + rng.randbytes(20)).decode(), "checksum_valid"))
    for witver, size in ((0, 20), (0, 20), (0, 32), (1, 32)):
        valid.append((bech32m.encode("bc", witver, rng.randbytes(size)), "checksum_valid"))
    for a, _ in valid:
        if a.startswith("bc1"):
            bech32m.decode("bc", a)
        else:
            assert base58.b58decode_check(a)[0] in (0, 5)
    corrupt = ["1A1zP1eP5QGefi2DMPTfTL5SLmv7Divfxx"]
    for a, _ in valid[1:]:
        pos = rng.randrange(4, len(a))
        if a.startswith("bc1"):
            c = _swap_char(a, pos, "qpzry9x8gf2tvdw0s3jn54khce6mua7l", rng)
            assert _bech32_reject(c)
        else:
            c = _swap_char(a, pos, B58, rng)
            assert _b58_reject(c)
        corrupt.append(c)
    return valid, corrupt


def ethereum(rng: random.Random) -> tuple[list, list]:
    valid = []
    for i in range(10):
        body = rng.randbytes(20).hex()
        if i < 6:
            valid.append((oracles.eip55(body), "checksum_valid"))
        elif i < 8:
            valid.append(("0x" + body.lower(), "format_valid"))
        else:
            valid.append(("0x" + body.upper(), "format_valid"))
    valid[0] = ("0x5aAeb6053F3E94C9b9A09f33669435E7Ef1BeAed", "checksum_valid")
    corrupt = []
    for a, grade in valid[:6]:
        # flip the case of one letter: the EIP-55 pattern no longer matches
        letters = [i for i, c in enumerate(a) if i >= 2 and c.isalpha()]
        i = rng.choice(letters)
        c = a[:i] + a[i].swapcase() + a[i + 1:]
        assert c != oracles.eip55(c[2:]) and c[2:] not in (c[2:].lower(), c[2:].upper())
        corrupt.append(c)
        # change one hex digit: the checksum of the new body differs
        j = rng.randrange(2, 42)
        d = _swap_char(a, j, "0123456789", rng) if a[j].isdigit() else a[:j] + ("0" if a[j] != "0" else "1") + a[j + 1:]
        if d[2:] not in (d[2:].lower(), d[2:].upper()) and d != oracles.eip55(d[2:]):
            corrupt.append(d)
    corrupt = corrupt[:8]
    corrupt.append("0x" + rng.randbytes(20).hex()[:39])  # 39 hex digits
    corrupt.append("0x" + rng.randbytes(21).hex()[:41])  # 41 hex digits
    return valid, corrupt[:10]


def monero(rng: random.Random) -> tuple[list, list]:
    valid = []
    for i in range(10):
        net = 0x12 if i < 8 else 0x2A  # standard (4...) and subaddress (8...)
        a = oracles.monero_address(rng.randbytes(32), rng.randbytes(32), net)
        assert len(a) == 95 and a[0] in "48"
        valid.append((a, "format_valid"))
    # checksum validation is out of scope for Monero, so corruptions break the format
    corrupt = []
    for i, (a, _) in enumerate(valid):
        kind = i % 5
        if kind == 0:
            c = "5" + a[1:]                     # wrong network prefix
        elif kind == 1:
            c = a[:-1]                          # 94 characters
        elif kind == 2:
            c = a + rng.choice(B58)             # 96 characters
        elif kind == 3:
            c = a[:40] + "0" + a[41:]           # '0' is outside base58
        else:
            c = a[:60] + "l" + a[61:]           # 'l' is outside base58
        corrupt.append(c)
    return valid, corrupt


def zcash(rng: random.Random) -> tuple[list, list]:
    valid = []
    for i in range(10):
        prefix = b"\x1c\xb8" if i < 6 else b"\x1c\xbd"
        a = base58.b58encode_check(prefix + rng.randbytes(20)).decode()
        assert a[:2] == ("t1" if i < 6 else "t3") and len(a) == 35
        valid.append((a, "checksum_valid"))
    corrupt = []
    for a, _ in valid:
        c = _swap_char(a, rng.randrange(2, len(a)), B58, rng)
        assert _b58_reject(c)
        corrupt.append(c)
    return valid, corrupt


def address_sets(seed: int = 11) -> dict:
    rng = random.Random(seed)
    out = {}
    for name, fn in (("bitcoin", bitcoin), ("ethereum", ethereum), ("monero", monero), ("zcash", zcash)):
        valid, corrupt = fn(rng)
        assert len(valid) == 10 and len(corrupt) == 10, name
        out[name] = {
            "valid": [{"address": a, "validation": g} for a, g in valid],
            "corrupt": corrupt,
        }
    return out


def synthetic_table1() -> list[list]:
    from conspigraph.ingest import RESOURCE_KINDS
    from conspigraph.synthetic import generate

    syn = generate()
    t = syn.truth
    counts = syn.catalog.counts()
    rows = [[k, counts[k], t.resource_urls[k], t.resource_unique_urls[k], t.resource_identifiers[k],
             t.resource_channels[k]] for k in RESOURCE_KINDS]
    rows.append(["total", sum(counts.values()), sum(t.resource_urls.values()), sum(t.resource_unique_urls.values()),
                 sum(t.resource_identifiers.values()), len(t.flagged_channels)])
    return rows


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    with open(OUT / "url_labels.jsonl", "w", encoding="utf-8") as fh:
        for m in url_messages():
            fh.write(json.dumps(m, ensure_ascii=False) + "\n")
    with open(OUT / "addresses.json", "w", encoding="utf-8") as fh:
        json.dump(address_sets(), fh, indent=2)
        fh.write("\n")
    with open(OUT / "synthetic_table1.csv", "w", encoding="utf-8") as fh:
        fh.write("kind,resources,urls,unique_urls,identifiers,channels\n")
        for row in synthetic_table1():
            fh.write(",".join(str(v) for v in row) + "\n")
    print(f"wrote fixtures to {OUT}")


if __name__ == "__main__":
    main()
