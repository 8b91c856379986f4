"""URL extraction, normalization and shortener detection."""

from __future__ import annotations

import csv
import logging
import re
from dataclasses import dataclass, field
from datetime import datetime
from importlib import resources
from typing import Iterable, Iterator
from urllib.parse import urlsplit

from .domains import registrable_domain

log = logging.getLogger(__name__)

# http(s) URLs and www.-prefixed hosts; bare domains are deliberately not matched.
_URL_RE = re.compile(
    r"(?<![\w@.\-/])(?:https?://|www\.)[^\s<>\"«»“”]+",
    re.IGNORECASE,
)
TRAILING_PUNCT = ".,;:!?)]}\"'"
_PCT_RE = re.compile(r"%([0-9A-Fa-f]{2})")
_UNRESERVED = frozenset("ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-._~")
DEFAULT_PORTS = {"http": 80, "https": 443}


class UrlError(ValueError):
    """URL whose authority cannot be parsed."""


@dataclass(frozen=True, slots=True)
class RawUrl:
    text: str
    channel_id: int | None = None
    message_id: int | None = None
    byte_offset: int = 0


@dataclass(frozen=True, slots=True)
class NormalizedUrl:
    scheme: str
    host: str
    path: str = "/"
    query: tuple[tuple[str, str | None], ...] = ()
    port: int | None = None

    def __str__(self) -> str:
        host = f"[{self.host}]" if ":" in self.host else self.host
        port = f":{self.port}" if self.port is not None else ""
        out = f"{self.scheme}://{host}{port}{self.path}"
        if self.query:
            out += "?" + "&".join(k if v is None else f"{k}={v}" for k, v in self.query)
        return out

    @property
    def url(self) -> str:
        return str(self)

    @property
    def registrable_domain(self) -> str | None:
        return registrable_domain(self.host)

    @property
    def segments(self) -> list[str]:
        """Non-empty path segments."""
        return [s for s in self.path.split("/") if s]

    def param(self, key: str) -> str | None:
        """First value of query parameter ``key`` (``""`` when present without value)."""
        for k, v in self.query:
            if k == key:
                return v or ""
        return None


RESOLUTION_STATUSES = (
    "resolved",
    "not_shortened",
    "failed_timeout",
    "failed_network",
    "failed_loop",
    "failed_status",
    "skipped_offline",
)


@dataclass(frozen=True)
class ResolutionOutcome:
    status: str
    final_url: NormalizedUrl | None = None
    redirect_count: int = 0
    fetched_at: datetime | None = None

    def __post_init__(self):
        if self.status not in RESOLUTION_STATUSES:
            raise ValueError(f"unknown resolution status {self.status!r}")
        if (self.final_url is not None) != (self.status == "resolved"):
            raise ValueError("final_url must be present exactly when status is 'resolved'")


NOT_SHORTENED = ResolutionOutcome("not_shortened")


@dataclass
class UrlOccurrence:
    raw: RawUrl
    normalized: NormalizedUrl
    resolution: ResolutionOutcome = field(default=NOT_SHORTENED)

    @property
    def effective(self) -> NormalizedUrl:
        if self.resolution.status == "resolved":
            return self.resolution.final_url
        return self.normalized

    @property
    def channel_id(self) -> int | None:
        return self.raw.channel_id

    @property
    def message_id(self) -> int | None:
        return self.raw.message_id


def _strip_trailing(s: str) -> str:
    return s.rstrip(TRAILING_PUNCT)


def extract_urls(text: str, channel_id: int | None = None, message_id: int | None = None) -> list[RawUrl]:
    """Every URL in ``text``, left to right, with trailing punctuation removed."""
    if not text:
        return []
    out = []
    ascii_text = text.isascii()
    for m in _URL_RE.finditer(text):
        s = _strip_trailing(m.group())
        low = s.lower()
        if low.startswith("www."):
            if len(s) <= 4:
                continue
        else:
            rest = s.split("://", 1)[1]
            if not rest or rest[0] in "/?#":
                continue
        start = m.start()
        offset = start if ascii_text else len(text[:start].encode("utf-8"))
        out.append(RawUrl(s, channel_id, message_id, offset))
    return out


def _canon_pct(s: str) -> str:
    if "%" not in s:
        return s

    def repl(m):
        ch = chr(int(m.group(1), 16))
        return ch if ch in _UNRESERVED else "%" + m.group(1).upper()

    return _PCT_RE.sub(repl, s)


def _decode_host(host: str) -> str:
    host = host.rstrip(".")
    if "xn--" not in host:
        return host
    labels = []
    for label in host.split("."):
        if label.startswith("xn--"):
            try:
                label = label.encode("ascii").decode("idna")
            except UnicodeError:
                pass
        labels.append(label)
    return ".".join(labels).lower()


def normalize(raw: RawUrl | str) -> NormalizedUrl:
    """Canonical form used by every downstream matcher.

    Lowercases scheme and host, decodes punycode, drops the fragment and
    default port, decodes percent-escaped unreserved characters and keeps the
    query pairs in source order.  Raises ``UrlError`` for a bad authority.
    """
    text = raw.text if isinstance(raw, RawUrl) else raw
    if text[:4].lower() == "www.":
        text = "https://" + text
    try:
        parts = urlsplit(text)
        port = parts.port
        host = parts.hostname
    except ValueError as exc:
        raise UrlError(f"unparseable authority in {text!r}: {exc}") from exc
    scheme = parts.scheme.lower()
    if scheme not in DEFAULT_PORTS:
        raise UrlError(f"unsupported scheme in {text!r}")
    if not host:
        raise UrlError(f"no host in {text!r}")
    host = _decode_host(host)
    if not host:
        raise UrlError(f"no host in {text!r}")
    if port == DEFAULT_PORTS[scheme]:
        port = None
    path = _canon_pct(parts.path) or "/"
    query = []
    if parts.query:
        for piece in parts.query.split("&"):
            if not piece:
                continue
            k, eq, v = piece.partition("=")
            query.append((_canon_pct(k), _canon_pct(v) if eq else None))
    return NormalizedUrl(scheme, host, path, tuple(query), port)


def try_normalize(raw: RawUrl | str) -> NormalizedUrl | None:
    try:
        return normalize(raw)
    except UrlError as exc:
        log.info("dropping URL: %s", exc)
        return None


def load_shorteners(path=None) -> frozenset[str]:
    """Shortener hosts from ``path`` or the bundled list (one host per line, ``#`` comments)."""
    if path is None:
        text = resources.files("conspigraph.data").joinpath("shorteners.txt").read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    hosts = set()
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip().lower()
        if line:
            hosts.add(line)
    return frozenset(hosts)


def is_shortened(url: NormalizedUrl, shorteners: Iterable[str]) -> bool:
    host = url.host
    if host in shorteners:
        return True
    if host.startswith("www.") and host[4:] in shorteners:
        return True
    reg = registrable_domain(host)
    return reg is not None and reg in shorteners


def iter_occurrences(corpus, shorteners: frozenset[str] | None = None) -> Iterator[UrlOccurrence]:
    """Extract and normalize every URL in every message of ``corpus``.

    Shortened URLs start with a ``skipped_offline`` outcome until resolved.
    """
    if shorteners is None:
        shorteners = load_shorteners()
    pending = ResolutionOutcome("skipped_offline")
    for ch in corpus:
        cid = ch.channel_id
        for msg in ch.messages:
            if not msg.text:
                continue
            for raw in extract_urls(msg.text, cid, msg.message_id):
                norm = try_normalize(raw)
                if norm is None:
                    continue
                status = pending if is_shortened(norm, shorteners) else NOT_SHORTENED
                yield UrlOccurrence(raw, norm, status)


URLS_HEADER = ["channel_id", "message_id", "raw", "effective", "status", "byte_offset"]


def write_urls_csv(occurrences: Iterable[UrlOccurrence], path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(URLS_HEADER)
        for occ in occurrences:
            w.writerow([
                occ.raw.channel_id, occ.raw.message_id, occ.raw.text,
                str(occ.effective), occ.resolution.status, occ.raw.byte_offset,
            ])
            n += 1
    return n


def read_urls_csv(path) -> list[UrlOccurrence]:
    """Reload ``urls.csv``.  Resolved rows get their effective URL back as ``final_url``."""
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            raw = RawUrl(row["raw"], int(row["channel_id"]), int(row["message_id"]), int(row.get("byte_offset") or 0))
            norm = try_normalize(raw)
            if norm is None:
                continue
            status = row["status"]
            if status == "resolved":
                res = ResolutionOutcome("resolved", normalize(row["effective"]))
            else:
                res = ResolutionOutcome(status)
            out.append(UrlOccurrence(raw, norm, res))
    return out
