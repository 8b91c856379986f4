"""Match effective URLs against the resource catalog and flag channels."""

from __future__ import annotations

import csv
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable

from .domains import registrable_domain
from .ingest import RESOURCE_KINDS, ResourceCatalog
from .urls import NormalizedUrl, UrlOccurrence

YOUTUBE_DOMAINS = {"youtube.com", "youtube-nocookie.com"}
YOUTU_BE = "youtu.be"
REDDIT_DOMAINS = {"reddit.com"}
VOAT_DOMAINS = {"voat.co"}
CHAN_DOMAINS = {"8kun.top", "8kun.net", "8ch.net"}


@dataclass(frozen=True)
class ResourceMatch:
    occurrence: UrlOccurrence | None
    kind: str
    matched_identifier: str


def _youtube_video_id(url: NormalizedUrl, reg: str | None) -> str | None:
    segs = url.segments
    if url.host == YOUTU_BE or reg == YOUTU_BE:
        return segs[0] if segs else None
    if reg not in YOUTUBE_DOMAINS:
        return None
    if segs == ["watch"]:
        return url.param("v") or None
    if len(segs) >= 2 and segs[0] in ("shorts", "embed"):
        return segs[1]
    return None


def _youtube_channel_key(url: NormalizedUrl, reg: str | None) -> str | None:
    if reg not in YOUTUBE_DOMAINS:
        return None
    segs = url.segments
    if not segs:
        return None
    head = segs[0]
    if head.startswith("@") and len(head) > 1:
        return head
    if len(segs) >= 2:
        if head == "channel":
            return segs[1]
        if head in ("c", "user"):
            return f"{head}/{segs[1]}"
    return None


def _prefixed_name(url: NormalizedUrl, reg: str | None, domains: set[str], prefix: str) -> str | None:
    if reg not in domains:
        return None
    segs = url.segments
    if len(segs) >= 2 and segs[0].lower() == prefix:
        return segs[1].lower()
    return None


def match_url(url: NormalizedUrl, catalog: ResourceCatalog, occurrence: UrlOccurrence | None = None) -> ResourceMatch | None:
    """Classify ``url`` against the catalog; the first matching kind wins.

    Order: youtube_video, youtube_channel, subreddit, voat_subverse,
    chan_board, website_domain.
    """
    reg = registrable_domain(url.host)
    idx = catalog.index

    vid = _youtube_video_id(url, reg)
    if vid and vid in idx["youtube_video"]:
        return ResourceMatch(occurrence, "youtube_video", vid)
    chan = _youtube_channel_key(url, reg)
    if chan and chan in idx["youtube_channel"]:
        return ResourceMatch(occurrence, "youtube_channel", chan)
    sub = _prefixed_name(url, reg, REDDIT_DOMAINS, "r")
    if sub and sub in idx["subreddit"]:
        return ResourceMatch(occurrence, "subreddit", sub)
    verse = _prefixed_name(url, reg, VOAT_DOMAINS, "v")
    if verse and verse in idx["voat_subverse"]:
        return ResourceMatch(occurrence, "voat_subverse", verse)
    if reg in CHAN_DOMAINS:
        segs = url.segments
        if segs and segs[0].lower() in idx["chan_board"]:
            return ResourceMatch(occurrence, "chan_board", segs[0].lower())
    if reg is not None and reg in idx["website_domain"]:
        return ResourceMatch(occurrence, "website_domain", reg)
    return None


@dataclass
class MatchTotals:
    """Per-kind tallies in the shape of the resources table."""

    resources: dict[str, int]
    urls: dict[str, int]
    unique_urls: dict[str, int]
    channels: dict[str, int]
    identifiers: dict[str, int]
    flagged_channels: int = 0

    @property
    def total_urls(self) -> int:
        return sum(self.urls.values())

    def rows(self) -> list[dict]:
        return [
            {
                "kind": k,
                "resources": self.resources.get(k, 0),
                "urls": self.urls.get(k, 0),
                "unique_urls": self.unique_urls.get(k, 0),
                "identifiers": self.identifiers.get(k, 0),
                "channels": self.channels.get(k, 0),
            }
            for k in RESOURCE_KINDS
        ]


def match_corpus(occurrences: Iterable[UrlOccurrence], catalog: ResourceCatalog) -> tuple[list[ResourceMatch], MatchTotals]:
    matches = []
    for occ in occurrences:
        m = match_url(occ.effective, catalog, occ)
        if m is not None:
            matches.append(m)
    urls = Counter(m.kind for m in matches)
    unique = defaultdict(set)
    chans = defaultdict(set)
    idents = defaultdict(set)
    for m in matches:
        unique[m.kind].add(str(m.occurrence.effective))
        chans[m.kind].add(m.occurrence.channel_id)
        idents[m.kind].add(m.matched_identifier)
    totals = MatchTotals(
        resources=catalog.counts(),
        urls={k: urls.get(k, 0) for k in RESOURCE_KINDS},
        unique_urls={k: len(unique[k]) for k in RESOURCE_KINDS},
        channels={k: len(chans[k]) for k in RESOURCE_KINDS},
        identifiers={k: len(idents[k]) for k in RESOURCE_KINDS},
        flagged_channels=len({m.occurrence.channel_id for m in matches}),
    )
    return matches, totals


@dataclass
class FlaggedChannelSet:
    channel_ids: set[int] = field(default_factory=set)
    per_channel_counts: dict[int, dict[str, int]] = field(default_factory=dict)

    def __contains__(self, channel_id) -> bool:
        return channel_id in self.channel_ids

    def __len__(self) -> int:
        return len(self.channel_ids)


def flag_channels(matches: Iterable[ResourceMatch]) -> FlaggedChannelSet:
    """Channels with at least one resource match, with per-kind counts."""
    counts: dict[int, Counter] = defaultdict(Counter)
    for m in matches:
        counts[m.occurrence.channel_id][m.kind] += 1
    per = {cid: {k: c.get(k, 0) for k in RESOURCE_KINDS} for cid, c in sorted(counts.items())}
    return FlaggedChannelSet(set(per), per)


# -- persistence ------------------------------------------------------------

MATCHES_HEADER = ["channel_id", "message_id", "effective_url", "kind", "identifier"]
TOTALS_HEADER = ["kind", "resources", "urls", "unique_urls", "identifiers", "channels"]
FLAGGED_HEADER = ["channel_id", *RESOURCE_KINDS]


def write_matches(matches: Iterable[ResourceMatch], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MATCHES_HEADER)
        for m in matches:
            occ = m.occurrence
            w.writerow([occ.channel_id, occ.message_id, str(occ.effective), m.kind, m.matched_identifier])


def write_totals(totals: MatchTotals, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.DictWriter(fh, TOTALS_HEADER, lineterminator="\n")
        w.writeheader()
        w.writerows(totals.rows())
        w.writerow({
            "kind": "total",
            "resources": sum(totals.resources.values()),
            "urls": totals.total_urls,
            "unique_urls": sum(totals.unique_urls.values()),
            "identifiers": sum(totals.identifiers.values()),
            "channels": totals.flagged_channels,
        })


def write_flagged(flagged: FlaggedChannelSet, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FLAGGED_HEADER)
        for cid in sorted(flagged.channel_ids):
            c = flagged.per_channel_counts[cid]
            w.writerow([cid, *(c[k] for k in RESOURCE_KINDS)])


def read_flagged(path) -> FlaggedChannelSet:
    per = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            per[int(row["channel_id"])] = {k: int(row[k]) for k in RESOURCE_KINDS}
    return FlaggedChannelSet(set(per), per)
