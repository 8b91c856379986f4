"""Corpus and resource-catalog loading.

The corpus is JSON Lines: one channel object per line with its messages
embedded.  The catalog is a CSV table ``kind,identifier,source_label``.
"""

from __future__ import annotations

import csv
import json
import logging
import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator

log = logging.getLogger(__name__)

RESOURCE_KINDS = (
    "youtube_channel",
    "youtube_video",
    "subreddit",
    "voat_subverse",
    "chan_board",
    "website_domain",
)


class CorpusError(ValueError):
    """Malformed corpus input (raised in strict mode, or for duplicate channels)."""


class CatalogError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class MessageRecord:
    message_id: int
    timestamp: datetime
    text: str = ""
    forwarded_from: int | None = None


@dataclass(slots=True)
class ChannelRecord:
    channel_id: int
    title: str
    description: str
    creation_date: datetime
    username: str | None = None
    messages: list[MessageRecord] = field(default_factory=list)


@dataclass
class LoadSummary:
    channels: int = 0
    messages: int = 0
    records: int = 0
    skipped: list[str] = field(default_factory=list)

    @property
    def parsed(self) -> int:
        return self.records - len(self.skipped)

    def as_dict(self) -> dict:
        return {
            "channels": self.channels,
            "messages": self.messages,
            "records": self.records,
            "parsed": self.parsed,
            "skipped": len(self.skipped),
            "skipped_records": list(self.skipped),
        }


def parse_timestamp(value) -> datetime:
    """ISO-8601 string (or epoch seconds) to an aware UTC datetime."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return datetime.fromtimestamp(value, tz=timezone.utc)
    if not isinstance(value, str) or not value:
        raise ValueError(f"bad timestamp {value!r}")
    s = value.strip()
    if s.endswith("Z"):
        s = s[:-1] + "+00:00"
    ts = datetime.fromisoformat(s)
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def _optional_int(value, what: str) -> int | None:
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"{what} must be an integer or null, got {value!r}")
    return value


def _parse_message(obj) -> MessageRecord:
    if not isinstance(obj, dict):
        raise ValueError("message is not an object")
    mid = obj.get("message_id")
    if isinstance(mid, bool) or not isinstance(mid, int):
        raise ValueError(f"message_id must be an integer, got {mid!r}")
    if "timestamp" not in obj or obj["timestamp"] is None:
        raise ValueError(f"message {mid} has no timestamp")
    text = obj.get("text") or ""
    if not isinstance(text, str):
        raise ValueError(f"message {mid} text is not a string")
    return MessageRecord(
        message_id=mid,
        timestamp=parse_timestamp(obj["timestamp"]),
        text=text,
        forwarded_from=_optional_int(obj.get("forwarded_from"), "forwarded_from"),
    )


def parse_channel(obj: dict) -> ChannelRecord:
    """Validate one decoded corpus record.  Raises ``ValueError`` on any defect."""
    if not isinstance(obj, dict):
        raise ValueError("record is not an object")
    cid = obj.get("channel_id")
    if isinstance(cid, bool) or not isinstance(cid, int):
        raise ValueError(f"channel_id must be an integer, got {cid!r}")
    username = obj.get("username")
    if username is not None and not isinstance(username, str):
        raise ValueError("username must be a string or null")
    created = parse_timestamp(obj.get("creation_date"))
    raw_messages = obj.get("messages") or []
    if not isinstance(raw_messages, list):
        raise ValueError("messages must be an array")
    messages = [_parse_message(m) for m in raw_messages]
    messages.sort(key=lambda m: (m.timestamp, m.message_id))
    seen = set()
    for m in messages:
        if m.message_id in seen:
            raise ValueError(f"duplicate message_id {m.message_id}")
        seen.add(m.message_id)
    if messages and messages[0].timestamp < created:
        raise ValueError(f"message {messages[0].message_id} predates channel creation")
    return ChannelRecord(
        channel_id=cid,
        username=username,
        title=str(obj.get("title") or ""),
        description=str(obj.get("description") or ""),
        creation_date=created,
        messages=messages,
    )


def channel_to_dict(ch: ChannelRecord) -> dict:
    return {
        "channel_id": ch.channel_id,
        "username": ch.username,
        "title": ch.title,
        "description": ch.description,
        "creation_date": format_timestamp(ch.creation_date),
        "messages": [
            {
                "message_id": m.message_id,
                "timestamp": format_timestamp(m.timestamp),
                "text": m.text,
                "forwarded_from": m.forwarded_from,
            }
            for m in ch.messages
        ],
    }


def corpus_files(path: str | os.PathLike) -> list[Path]:
    """Shard files making up a corpus: the file itself, or ``*.jsonl`` in a directory."""
    p = Path(path)
    if p.is_dir():
        return sorted(x for x in p.iterdir() if x.suffix in (".jsonl", ".ndjson", ".json"))
    if p.is_file():
        return [p]
    raise FileNotFoundError(f"corpus path not found: {p}")


def _load_shard(path: Path, strict: bool) -> tuple[list[ChannelRecord], int, list[str]]:
    channels, skipped, records = [], [], 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            records += 1
            locator = f"{path.name}:{lineno}"
            try:
                channels.append(parse_channel(json.loads(line)))
            except (ValueError, TypeError) as exc:
                if strict:
                    raise CorpusError(f"{locator}: {exc}") from exc
                log.warning("skipping %s: %s", locator, exc)
                skipped.append(f"{locator}: {exc}")
    return channels, records, skipped


def load_corpus(path, strict: bool = False, workers: int = 1) -> tuple[list[ChannelRecord], LoadSummary]:
    """Load every channel under ``path``.

    Returns the channels sorted by ``channel_id`` and a load summary.  Malformed
    records are skipped and logged unless ``strict``; a repeated ``channel_id``
    is always an error.
    """
    files = corpus_files(path)
    if workers > 1 and len(files) > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(lambda f: _load_shard(f, strict), files))
    else:
        results = [_load_shard(f, strict) for f in files]

    summary = LoadSummary()
    corpus: list[ChannelRecord] = []
    for channels, records, skipped in results:
        corpus.extend(channels)
        summary.records += records
        summary.skipped.extend(skipped)
    corpus.sort(key=lambda c: c.channel_id)
    for a, b in zip(corpus, corpus[1:]):
        if a.channel_id == b.channel_id:
            raise CorpusError(f"duplicate channel_id {a.channel_id}")
    summary.channels = len(corpus)
    summary.messages = sum(len(c.messages) for c in corpus)
    return corpus, summary


def iter_corpus(path, strict: bool = False) -> Iterator[ChannelRecord]:
    """Stream channels one at a time without holding the corpus in memory."""
    for f in corpus_files(path):
        with open(f, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    yield parse_channel(json.loads(line))
                except (ValueError, TypeError) as exc:
                    if strict:
                        raise CorpusError(f"{f.name}:{lineno}: {exc}") from exc
                    log.warning("skipping %s:%d: %s", f.name, lineno, exc)


def write_corpus(corpus: Iterable[ChannelRecord], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for ch in corpus:
            fh.write(json.dumps(channel_to_dict(ch), ensure_ascii=False, separators=(",", ":")))
            fh.write("\n")


# -- resource catalog -------------------------------------------------------


@dataclass(frozen=True)
class ResourceEntry:
    kind: str
    identifier: str
    source_label: str = ""


def normalize_identifier(kind: str, identifier: str) -> str:
    """Canonical form of a catalog identifier for exact-match lookup."""
    if kind not in RESOURCE_KINDS:
        raise CatalogError(f"unknown resource kind {kind!r}")
    ident = identifier.strip()
    if kind in ("youtube_video", "youtube_channel"):
        return ident
    ident = ident.lower()
    if kind == "subreddit":
        ident = ident.removeprefix("/").removeprefix("r/")
    elif kind == "voat_subverse":
        ident = ident.removeprefix("/").removeprefix("v/")
    elif kind == "chan_board":
        ident = ident.strip("/")
    elif kind == "website_domain":
        ident = ident.split("://", 1)[-1].split("/", 1)[0].split(":", 1)[0].strip(".")
        ident = ident.removeprefix("www.")
    return ident.strip("/")


class ResourceCatalog:
    """Flagged web resources indexed per kind."""

    def __init__(self, entries: Iterable[ResourceEntry] = ()):
        self.entries: dict[tuple[str, str], ResourceEntry] = {}
        self.index: dict[str, set[str]] = {k: set() for k in RESOURCE_KINDS}
        self.duplicates = 0
        for e in entries:
            self.add(e)

    def add(self, entry: ResourceEntry) -> bool:
        """Insert after normalization.  Returns False (and warns) on a duplicate."""
        ident = normalize_identifier(entry.kind, entry.identifier)
        if not ident:
            raise CatalogError(f"empty identifier for kind {entry.kind}")
        key = (entry.kind, ident)
        if key in self.entries:
            self.duplicates += 1
            log.warning("duplicate catalog entry %s:%s", entry.kind, ident)
            return False
        self.entries[key] = ResourceEntry(entry.kind, ident, entry.source_label)
        self.index[entry.kind].add(ident)
        return True

    def contains(self, kind: str, identifier: str) -> bool:
        return identifier in self.index.get(kind, ())

    def counts(self) -> dict[str, int]:
        return {k: len(v) for k, v in self.index.items()}

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(sorted(self.entries.values(), key=lambda e: (e.kind, e.identifier)))


def load_catalog(path) -> ResourceCatalog:
    catalog = ResourceCatalog()
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"kind", "identifier"} - set(reader.fieldnames or ())
        if missing:
            raise CatalogError(f"catalog missing columns {sorted(missing)}")
        for row in reader:
            kind = (row["kind"] or "").strip()
            if kind not in RESOURCE_KINDS:
                raise CatalogError(f"line {reader.line_num}: unknown resource kind {kind!r}")
            catalog.add(ResourceEntry(kind, row["identifier"] or "", (row.get("source_label") or "").strip()))
    counts = Counter(kind for kind, _ in catalog.entries)
    log.info("catalog loaded: %s", dict(counts))
    return catalog


def write_catalog(catalog: ResourceCatalog, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["kind", "identifier", "source_label"])
        for e in catalog:
            w.writerow([e.kind, e.identifier, e.source_label])
