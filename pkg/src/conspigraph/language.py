"""Character-trigram language identification.

Profiles are sparse L2-normalized trigram vectors, one TSV file per language
(``trigram<TAB>weight``) listed in a ``manifest.json``.  A text is scored by
cosine similarity against every profile.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np
import scipy.sparse as sp

UNDETERMINED = "und"
MIN_CHARS = 20
# Cosine between a sentence-length trigram vector and a full profile rarely
# exceeds 0.4 (Cyrillic sentences sit around 0.12 to 0.20), so the floor is
# far lower than a probability-style threshold would be.
MIN_CONFIDENCE = 0.10

_STRIP_RE = re.compile(r"(?:https?://|www\.)\S+|@\w+|#\w+|\d+", re.IGNORECASE)
_WORD_RE = re.compile(r"[^\W\d_]+")


@dataclass(frozen=True)
class LanguageProfile:
    language_code: str
    trigram_weights: dict[str, float]


@dataclass(frozen=True)
class LanguageVerdict:
    language_code: str
    confidence: float

    @property
    def undetermined(self) -> bool:
        return self.language_code == UNDETERMINED


def clean_text(text: str) -> str:
    """Drop URLs, mentions, hashtags and digits; emoji vanish at tokenization."""
    return _STRIP_RE.sub(" ", text)


def trigrams(text: str) -> Counter:
    """Trigram counts over lowercased letter runs padded with one space each side."""
    counts: Counter = Counter()
    for word in _WORD_RE.findall(text.lower()):
        s = f" {word} "
        counts.update(s[i:i + 3] for i in range(len(s) - 2))
    return counts


def _letters(text: str) -> int:
    return sum(len(w) for w in _WORD_RE.findall(text))


def read_profile(path, code: str | None = None) -> LanguageProfile:
    path = Path(path)
    weights = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            gram, _, w = line.rpartition("\t")
            weights[gram] = float(w)
    norm = np.sqrt(sum(w * w for w in weights.values()))
    if norm > 0:
        weights = {g: w / norm for g, w in weights.items()}
    return LanguageProfile(code or path.stem, weights)


def load_profiles(directory=None) -> list[LanguageProfile]:
    """Profiles listed in ``manifest.json`` of ``directory`` (bundled set by default)."""
    if directory is None:
        root = resources.files("conspigraph.data").joinpath("profiles")
        manifest = json.loads(root.joinpath("manifest.json").read_text(encoding="utf-8"))
        with resources.as_file(root) as d:
            return [read_profile(Path(d) / f"{c}.tsv", c) for c in manifest["languages"]]
    d = Path(directory)
    manifest = json.loads((d / "manifest.json").read_text(encoding="utf-8"))
    return [read_profile(d / f"{c}.tsv", c) for c in manifest["languages"]]


class LanguageDetector:
    def __init__(self, profiles: list[LanguageProfile] | None = None,
                 min_chars: int = MIN_CHARS, min_confidence: float = MIN_CONFIDENCE):
        profiles = profiles if profiles is not None else load_profiles()
        self.codes = [p.language_code for p in profiles]
        vocab: dict[str, int] = {}
        rows, cols, vals = [], [], []
        for li, p in enumerate(profiles):
            for g, w in p.trigram_weights.items():
                j = vocab.setdefault(g, len(vocab))
                rows.append(j)
                cols.append(li)
                vals.append(w)
        self.vocab = vocab
        self.matrix = sp.csr_matrix((vals, (rows, cols)), shape=(len(vocab), len(profiles)))
        self.min_chars = min_chars
        self.min_confidence = min_confidence
        self.cache_size = 200_000
        self._cache: dict[str, LanguageVerdict] = {}

    def similarities(self, text: str) -> dict[str, float]:
        counts = trigrams(clean_text(text))
        return dict(zip(self.codes, self._scores([counts])[0].tolist()))

    def _scores(self, batch: list[Counter]) -> np.ndarray:
        rows, cols, vals = [], [], []
        norms = np.zeros(len(batch))
        vocab = self.vocab
        for i, counts in enumerate(batch):
            sq = 0
            for g, c in counts.items():
                sq += c * c
                j = vocab.get(g)
                if j is not None:
                    rows.append(i)
                    cols.append(j)
                    vals.append(c)
            norms[i] = np.sqrt(sq)
        x = sp.csr_matrix((vals, (rows, cols)), shape=(len(batch), len(vocab)))
        scores = np.asarray((x @ self.matrix).todense())
        with np.errstate(invalid="ignore", divide="ignore"):
            scores = np.where(norms[:, None] > 0, scores / norms[:, None], 0.0)
        return scores

    def detect_many(self, texts) -> list[LanguageVerdict]:
        """Verdicts for ``texts``; repeated texts are scored once and cached."""
        cleaned = [clean_text(t or "") for t in texts]
        cache = self._cache
        pending: dict[str, Counter] = {}
        for t in cleaned:
            if t in cache or t in pending:
                continue
            if len(t.strip()) < self.min_chars or _letters(t) == 0:
                cache[t] = LanguageVerdict(UNDETERMINED, 0.0)
            else:
                pending[t] = trigrams(t)
        if pending:
            scores = self._scores(list(pending.values()))
            best = scores.argmax(axis=1)
            if len(cache) + len(pending) > self.cache_size:
                cache.clear()
            for t, b, row in zip(pending, best.tolist(), scores):
                conf = float(row[b])
                code = self.codes[b] if conf >= self.min_confidence else UNDETERMINED
                cache[t] = LanguageVerdict(code, conf)
        return [cache[t] for t in cleaned]

    def detect(self, text: str) -> LanguageVerdict:
        return self.detect_many([text])[0]


@lru_cache(maxsize=1)
def default_detector() -> LanguageDetector:
    return LanguageDetector()


def detect_language(text: str, detector: LanguageDetector | None = None) -> LanguageVerdict:
    """Most similar bundled language, or ``und`` for short/ambiguous text."""
    return (detector or default_detector()).detect(text)


def vote(verdicts) -> LanguageVerdict:
    """Plurality over non-``und`` verdicts; confidence is the winner's share."""
    counts: Counter = Counter()
    weight: Counter = Counter()
    for v in verdicts:
        if v.language_code != UNDETERMINED:
            counts[v.language_code] += 1
            weight[v.language_code] += v.confidence
    total = sum(counts.values())
    if not total:
        return LanguageVerdict(UNDETERMINED, 0.0)
    code = min(counts, key=lambda c: (-counts[c], -weight[c], c))
    return LanguageVerdict(code, counts[code] / total)


def channel_language(channel, sample_size: int = 500, detector: LanguageDetector | None = None) -> LanguageVerdict:
    """Majority language over the ``sample_size`` most recent classifiable messages."""
    detector = detector or default_detector()
    msgs = channel.messages
    if not sample_size or sample_size >= len(msgs):
        return vote(detector.detect_many([m.text for m in msgs]))
    sample: list[LanguageVerdict] = []
    end = len(msgs)
    while end > 0 and len(sample) < sample_size:
        start = max(0, end - (sample_size - len(sample)))
        chunk = detector.detect_many([m.text for m in msgs[start:end]])
        sample.extend(v for v in reversed(chunk) if not v.undetermined)
        end = start
    return vote(sample[:sample_size])


def community_language_distribution(partition, verdicts: dict[int, LanguageVerdict]) -> dict[int, list[tuple[str, float]]]:
    """Per community, the share of channels per language (``und`` included), descending."""
    members: dict[int, list[int]] = {}
    for node, c in partition.assignment.items():
        members.setdefault(c, []).append(node)
    out = {}
    for c in sorted(members):
        nodes = members[c]
        counts = Counter(
            verdicts[n].language_code if n in verdicts else UNDETERMINED for n in nodes
        )
        out[c] = sorted(((code, k / len(nodes)) for code, k in counts.items()), key=lambda x: (-x[1], x[0]))
    return out
