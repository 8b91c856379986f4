"""E-commerce, donation and crowdfunding platform catalog."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ..domains import registrable_domain
from ..urls import NormalizedUrl

log = logging.getLogger(__name__)

PLATFORM_CATEGORIES = ("ecommerce", "donation", "crowdfunding")


class PlatformCatalogError(ValueError):
    pass


@dataclass(frozen=True)
class PlatformEntry:
    domain: str
    category: str
    platform_name: str
    path_discriminator: str | None = None

    def matches_path(self, url: NormalizedUrl) -> bool:
        d = self.path_discriminator
        if d is None:
            return True
        path = url.path.lower()
        if path == d or path.startswith(d.rstrip("/") + "/"):
            return True
        # the pre-2019 PayPal donate button posts to /cgi-bin/webscr?cmd=_donations
        return d == "/donate" and path.startswith("/cgi-bin/webscr") and url.param("cmd") == "_donations"


class PlatformCatalog:
    def __init__(self, entries=()):
        self.entries: list[PlatformEntry] = []
        self._exact: dict[str, list[PlatformEntry]] = {}
        self._brands: dict[str, list[PlatformEntry]] = {}
        seen = set()
        for e in entries:
            if e.category not in PLATFORM_CATEGORIES:
                raise PlatformCatalogError(f"unknown platform category {e.category!r}")
            key = (e.domain, e.path_discriminator)
            if key in seen:
                raise PlatformCatalogError(f"duplicate platform entry {key}")
            seen.add(key)
            self.entries.append(e)
            if e.domain.endswith(".*"):
                self._brands.setdefault(e.domain[:-2], []).append(e)
            else:
                self._exact.setdefault(e.domain, []).append(e)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def platforms(self, category: str | None = None) -> list[str]:
        names = {e.platform_name for e in self.entries if category is None or e.category == category}
        return sorted(names)

    def candidates(self, host: str) -> list[PlatformEntry]:
        """Entries whose domain covers ``host``, most specific domain first."""
        out = []
        labels = host.split(".")
        for i in range(len(labels)):
            out.extend(self._exact.get(".".join(labels[i:]), ()))
        if self._brands:
            reg = registrable_domain(host)
            if reg is not None:
                out.extend(self._brands.get(reg.split(".", 1)[0], ()))
        return out

    def lookup(self, url: NormalizedUrl) -> PlatformEntry | None:
        """Catalog entry for ``url``; discriminated entries win over plain ones."""
        cands = [e for e in self.candidates(url.host) if e.matches_path(url)]
        if not cands:
            return None
        cands.sort(key=lambda e: e.path_discriminator is None)
        return cands[0]


def load_platform_catalog(path=None) -> PlatformCatalog:
    """Load ``domain,category,platform_name,path_discriminator`` rows (bundled table by default)."""
    if path is None:
        text = resources.files("conspigraph.data").joinpath("platforms.csv").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    entries = []
    for i, row in enumerate(csv.DictReader(text.splitlines()), start=2):
        try:
            domain = row["domain"].strip().lower()
            category = row["category"].strip().lower()
            name = row["platform_name"].strip()
        except (KeyError, AttributeError) as exc:
            raise PlatformCatalogError(f"line {i}: missing column") from exc
        if not domain or not name:
            raise PlatformCatalogError(f"line {i}: empty domain or platform name")
        disc = (row.get("path_discriminator") or "").strip().lower() or None
        entries.append(PlatformEntry(domain, category, name, disc))
    return PlatformCatalog(entries)


def lookup_platform(url: NormalizedUrl, catalog: PlatformCatalog) -> PlatformEntry | None:
    return catalog.lookup(url)


def _after(segs: list[str], marker: str, count: int = 1) -> str:
    if marker in segs:
        i = segs.index(marker)
        if len(segs) >= i + 1 + count:
            return "/".join(segs[i + 1:i + 1 + count])
    return ""


def _patreon(url, segs):
    if not segs:
        return ""
    if segs[0] in ("join", "c"):
        return segs[1] if len(segs) > 1 else ""
    if segs[0] in ("posts", "user", "home", "login", "search"):
        # numeric profile links look like /user?u=123
        return f"u{url.param('u')}" if url.param("u") else ""
    return segs[0]


def _paypal_donate(url, segs):
    for key in ("hosted_button_id", "business", "campaign_id"):
        v = url.param(key)
        if v:
            return v
    return ""


def _facebook_fundraiser(url, segs):
    return _after(segs, "fundraisers") or (url.param("fundraiser_id") or "")


def _default(url, segs):
    return segs[0] if segs else ""


_EXTRACTORS = {
    "Patreon": _patreon,
    "BuyMeACoffee": _default,
    "Ko-Fi": _default,
    "SubscribeStar": _default,
    "GoFundMe": lambda url, segs: _after(segs, "f"),
    "GiveSendGo": _default,
    "Kickstarter": lambda url, segs: _after(segs, "projects", 2),
    "Indiegogo": lambda url, segs: _after(segs, "projects"),
    "Fundrazr": lambda url, segs: _default(url, [s for s in segs if s != "campaigns"]),
    "DonorBox": _default,
    "Fundly": _default,
    "Paypal/donate": _paypal_donate,
    "Paypal/pools": lambda url, segs: _after(segs, "c"),
    "Facebook Fundraisers": _facebook_fundraiser,
}


def extract_platform_id(entry: PlatformEntry, url: NormalizedUrl) -> str:
    """Profile, campaign or pool identifier; ``""`` when the URL carries none.

    Path-derived identifiers are lowercased; query-derived ones (PayPal button
    and business ids) keep their case.
    """
    segs = [s.lower() for s in url.segments]
    return _EXTRACTORS.get(entry.platform_name, _default)(url, segs)
