"""URL and text detectors for monetization evidence."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable

from ..domains import brand_label, registrable_domain, subdomain_labels
from ..urls import NormalizedUrl, UrlOccurrence, try_normalize
from .blockchain import extract_blockchain_addresses
from .platforms import PlatformCatalog, extract_platform_id, load_platform_catalog

log = logging.getLogger(__name__)

HIT_CATEGORIES = ("affiliate", "donation", "crowdfunding", "shopfront", "wishlist", "blockchain", "custom_shop")
FUNDING_CATEGORIES = ("donation", "crowdfunding")


@dataclass(frozen=True)
class MonetizationHit:
    category: str
    platform_name: str
    extracted_id: str
    channel_id: int | None = None
    message_id: int | None = None
    url: str = ""
    occurrence: UrlOccurrence | None = field(default=None, compare=False, repr=False)

    def located(self, occ: UrlOccurrence) -> "MonetizationHit":
        return MonetizationHit(self.category, self.platform_name, self.extracted_id,
                               occ.channel_id, occ.message_id, str(occ.effective), occ)


def load_shop_keywords(path=None) -> frozenset[str]:
    if path is None:
        text = resources.files("conspigraph.data").joinpath("shop_keywords.txt").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return frozenset(w.strip().lower() for w in text.splitlines() if w.strip() and not w.startswith("#"))


_DEFAULT_KEYWORDS: frozenset[str] | None = None


def _keywords(keywords):
    global _DEFAULT_KEYWORDS
    if keywords is not None:
        return keywords
    if _DEFAULT_KEYWORDS is None:
        _DEFAULT_KEYWORDS = load_shop_keywords()
    return _DEFAULT_KEYWORDS


def detect_affiliate(url: NormalizedUrl) -> MonetizationHit | None:
    """Amazon link with a partner ``tag`` or eBay link with a ``campid``."""
    brand = brand_label(url.host)
    if brand == "amazon":
        tag = url.param("tag")
        if tag:
            return MonetizationHit("affiliate", "Amazon", tag, url=str(url))
    elif brand == "ebay":
        camp = url.param("campid")
        if camp:
            return MonetizationHit("affiliate", "eBay", camp, url=str(url))
    return None


def detect_platform(url: NormalizedUrl, catalog: PlatformCatalog) -> MonetizationHit | None:
    """Donation or crowdfunding hit for catalogued platforms.

    E-commerce entries are recognised by the catalog but yield no hit here;
    their URLs are tallied separately.
    """
    entry = catalog.lookup(url)
    if entry is None or entry.category == "ecommerce":
        return None
    ident = extract_platform_id(entry, url)
    if not ident:
        log.warning("no %s identifier in %s", entry.platform_name, url)
    return MonetizationHit(entry.category, entry.platform_name, ident, url=str(url))


def detect_amazon_pages(url: NormalizedUrl) -> MonetizationHit | None:
    """Amazon influencer shopfronts (``/shop/``) and wish lists (``/wishlist/``)."""
    if brand_label(url.host) != "amazon":
        return None
    path = url.path if url.path.endswith("/") else url.path + "/"
    segs = url.segments
    for marker, category in (("/shop/", "shopfront"), ("/wishlist/", "wishlist")):
        if marker in path.lower():
            tail = segs[-1] if segs else ""
            if tail.lower() == marker.strip("/"):
                return None
            return MonetizationHit(category, "Amazon", tail, url=str(url))
    return None


def detect_custom_shop(url: NormalizedUrl, keywords: frozenset[str] | None = None) -> MonetizationHit | None:
    """Keyword as the label just left of the registrable domain, or as a whole path segment."""
    keywords = _keywords(keywords)
    reg = registrable_domain(url.host)
    if reg is None:
        return None
    labels = subdomain_labels(url.host)
    hit = bool(labels) and labels[0] in keywords
    if not hit:
        hit = any(s.lower() in keywords for s in url.segments)
    return MonetizationHit("custom_shop", reg, reg, url=str(url)) if hit else None


def detect_url(url: NormalizedUrl, catalog: PlatformCatalog,
               keywords: frozenset[str] | None = None) -> MonetizationHit | None:
    """At most one hit per URL: affiliate, then platform, then Amazon pages, then custom shop."""
    hit = detect_affiliate(url)
    if hit is not None:
        return hit
    entry = catalog.lookup(url)
    if entry is not None and entry.category != "ecommerce":
        return detect_platform(url, catalog)
    hit = detect_amazon_pages(url)
    if hit is not None:
        return hit
    if entry is not None or catalog.candidates(url.host):
        # a known platform's own pages are never a custom shop
        return None
    return detect_custom_shop(url, keywords)


def detect_occurrences(occurrences: Iterable[UrlOccurrence], catalog: PlatformCatalog | None = None,
                       keywords: frozenset[str] | None = None) -> list[MonetizationHit]:
    catalog = catalog or load_platform_catalog()
    keywords = _keywords(keywords)
    hits = []
    for occ in occurrences:
        hit = detect_url(occ.effective, catalog, keywords)
        if hit is not None:
            hits.append(hit.located(occ))
    return hits


def detect_channel_addresses(corpus, scan_messages: bool = True) -> list[MonetizationHit]:
    """Wallet addresses in channel descriptions and, optionally, message texts."""
    hits = []
    for ch in corpus:
        for a in extract_blockchain_addresses(ch.description):
            hits.append(MonetizationHit("blockchain", a.chain, a.address, ch.channel_id, None))
        if scan_messages:
            for m in ch.messages:
                if len(m.text) < 26:
                    continue
                for a in extract_blockchain_addresses(m.text):
                    hits.append(MonetizationHit("blockchain", a.chain, a.address, ch.channel_id, m.message_id))
    return hits


def channel_summary(hits: Iterable[MonetizationHit]) -> dict[int, dict[str, int]]:
    """Per channel, the number of hits in each category (zeros included)."""
    out: dict[int, dict[str, int]] = {}
    for h in hits:
        if h.channel_id is None:
            continue
        row = out.setdefault(h.channel_id, dict.fromkeys(HIT_CATEGORIES, 0))
        row[h.category] += 1
    return dict(sorted(out.items()))


# --- cross-community filter -------------------------------------------------

@dataclass(frozen=True)
class ReviewItem:
    url: str
    category: str
    platform_name: str
    extracted_id: str
    conspiracy_channels: int
    other_channels: int
    decision: str  # allow | deny | undecided


@dataclass
class FilterResult:
    retained: list[MonetizationHit]
    review_queue: list[ReviewItem]
    discarded: list[MonetizationHit]


def _url_key(url: str) -> str:
    norm = try_normalize(url)
    return str(norm) if norm is not None else url


def load_allowdeny(path) -> dict[str, str]:
    """Parse ``allow <url>`` / ``deny <url>`` lines; lines starting with ``#`` are comments."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            verb, _, url = line.partition(" ")
            verb = verb.lower()
            if verb not in ("allow", "deny") or not url.strip():
                raise ValueError(f"{path}:{n}: expected 'allow <url>' or 'deny <url>'")
            out[_url_key(url.strip())] = verb
    return out


def cross_community_filter(hits: Iterable[MonetizationHit], partition, flag_report,
                           allowdeny: dict[str, str] | None = None,
                           conspiracy_only: bool = True) -> FilterResult:
    """Split hits into those kept for conspiracy-community analysis and a review queue.

    Donation and crowdfunding URLs posted both inside conspiracy communities
    and elsewhere go to the review queue, since such links are often shared
    to discredit a campaign rather than promote it.  ``allowdeny`` settles
    them; undecided URLs stay retained.  With ``conspiracy_only`` the retained
    set is limited to hits from channels in conspiracy communities.
    """
    hits = list(hits)
    allowdeny = allowdeny or {}
    conspiracy = set(flag_report.conspiracy_ids)
    assign = partition.assignment

    def inside(cid) -> bool:
        return cid in assign and assign[cid] in conspiracy

    sides: dict[str, tuple[set, set]] = {}
    first: dict[str, MonetizationHit] = {}
    for h in hits:
        if h.category not in FUNDING_CATEGORIES or not h.url:
            continue
        key = _url_key(h.url)
        ins, out = sides.setdefault(key, (set(), set()))
        (ins if inside(h.channel_id) else out).add(h.channel_id)
        first.setdefault(key, h)

    queue = []
    denied = set()
    for key in sorted(sides):
        ins, out = sides[key]
        if not ins or not out:
            continue
        decision = allowdeny.get(key, "undecided")
        if decision == "deny":
            denied.add(key)
        h = first[key]
        queue.append(ReviewItem(key, h.category, h.platform_name, h.extracted_id, len(ins), len(out), decision))
    queued = {item.url for item in queue}
    for key in sorted(set(allowdeny) - queued):
        log.warning("allow/deny entry %s does not name a shared funding URL", key)

    retained, discarded = [], []
    for h in hits:
        if h.category in FUNDING_CATEGORIES and h.url and _url_key(h.url) in denied:
            discarded.append(h)
        elif conspiracy_only and not inside(h.channel_id):
            continue
        else:
            retained.append(h)
    return FilterResult(retained, queue, discarded)


MONETIZATION_HEADER = ["channel_id", "message_id", "category", "platform", "extracted_id", "url"]
REVIEW_HEADER = ["url", "category", "platform", "extracted_id", "conspiracy_channels", "other_channels", "decision"]


def _opt(v) -> str:
    return "" if v is None else str(v)


def write_hits(hits: Iterable[MonetizationHit], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MONETIZATION_HEADER)
        for h in hits:
            w.writerow([_opt(h.channel_id), _opt(h.message_id), h.category, h.platform_name, h.extracted_id, h.url])


def read_hits(path) -> list[MonetizationHit]:
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        for r in csv.DictReader(fh):
            out.append(MonetizationHit(
                r["category"], r["platform"], r["extracted_id"],
                int(r["channel_id"]) if r["channel_id"] else None,
                int(r["message_id"]) if r["message_id"] else None,
                r["url"],
            ))
    return out


def write_review_queue(items: Iterable[ReviewItem], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REVIEW_HEADER)
        for it in items:
            w.writerow([it.url, it.category, it.platform_name, it.extracted_id,
                        it.conspiracy_channels, it.other_channels, it.decision])
