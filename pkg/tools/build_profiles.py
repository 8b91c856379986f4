"""Regenerate the bundled trigram profiles from langdetect's n-gram counts.

Usage:
    python tools/build_profiles.py /path/to/langdetect/profiles

The langdetect source distribution (Apache-2.0) ships one JSON file per
language with Wikipedia-derived 1-3 gram counts.  Only trigrams are kept;
they are lowercased, merged, weighted by the square root of their relative
frequency and L2-normalized.
"""

import json
import math
import sys
from pathlib import Path

LANGUAGES = ["en", "de", "es", "pt", "it", "fr", "nl", "ru", "pl", "sv"]
OUT = Path(__file__).resolve().parents[1] / "src" / "conspigraph" / "data" / "profiles"


def build(src: Path, code: str) -> dict[str, float]:
    freq = json.loads((src / code).read_text(encoding="utf-8"))["freq"]
    counts: dict[str, int] = {}
    for gram, n in freq.items():
        if len(gram) == 3:
            key = gram.lower()
            counts[key] = counts.get(key, 0) + n
    total = sum(counts.values())
    weights = {g: math.sqrt(n / total) for g, n in counts.items()}
    norm = math.sqrt(sum(w * w for w in weights.values()))
    return {g: w / norm for g, w in weights.items()}


def main(argv: list[str]) -> None:
    src = Path(argv[1])
    OUT.mkdir(parents=True, exist_ok=True)
    for code in LANGUAGES:
        weights = build(src, code)
        with open(OUT / f"{code}.tsv", "w", encoding="utf-8", newline="\n") as fh:
            for gram, w in sorted(weights.items(), key=lambda kv: (-kv[1], kv[0])):
                fh.write(f"{gram}\t{w:.8f}\n")
    manifest = {
        "format": "trigram<TAB>weight, L2-normalized, lowercase, words padded with one space",
        "source": "langdetect 1.0.9 profiles (Wikipedia n-gram counts), sqrt relative frequency",
        "languages": LANGUAGES,
    }
    (OUT / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main(sys.argv)
