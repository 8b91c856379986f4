"""Funding metrics for donation profiles and crowdfunding campaigns.

Pages are read from a fixture directory laid out as
``<platform>/<extracted_id>.html`` (or ``.json``); a live source fetches the
same pages over HTTP and stores them there first, so every aggregate can be
recomputed from files alone.
"""

from __future__ import annotations

import csv
import html
import json
import logging
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from decimal import Decimal, InvalidOperation
from importlib import resources
from pathlib import Path
from typing import Iterable

import requests

from .resolver import HostThrottle
from .urls import try_normalize

log = logging.getLogger(__name__)

PERIODS = ("monthly", "lifetime", "campaign_total")
FUNDING_MODELS = ("keep_it_all", "all_or_nothing")
STATUSES = ("ongoing", "succeeded", "failed", "unreachable")


class MetricsParseError(ValueError):
    """A page exists but the expected figures could not be read from it."""


class MissingRateError(KeyError):
    def __init__(self, currency: str):
        super().__init__(currency)
        self.currency = currency

    def __str__(self) -> str:
        return f"no exchange rate for currency {self.currency!r}"


@dataclass(frozen=True)
class CampaignMetrics:
    platform_name: str
    extracted_id: str
    funds_raised: Decimal
    currency: str
    supporter_count: int
    period: str
    funding_model: str
    status: str
    goal: Decimal | None = None
    fetched_at: str = ""

    def __post_init__(self):
        if self.funds_raised < 0 or self.supporter_count < 0:
            raise ValueError("funds and supporters must be non-negative")
        if self.period not in PERIODS or self.funding_model not in FUNDING_MODELS or self.status not in STATUSES:
            raise ValueError(f"bad period/model/status for {self.platform_name}/{self.extracted_id}")

    @property
    def countable(self) -> bool:
        """Whether funds and supporters count towards totals."""
        if self.status == "unreachable":
            return False
        return not (self.funding_model == "all_or_nothing" and self.status == "failed")


@dataclass(frozen=True)
class PlatformRules:
    period: str
    funding_model: str = "keep_it_all"
    reachability_only: bool = False
    model_from_page: bool = False


PLATFORM_RULES = {
    "Patreon": PlatformRules("monthly"),
    "SubscribeStar": PlatformRules("monthly"),
    "BuyMeACoffee": PlatformRules("lifetime"),
    "Ko-Fi": PlatformRules("lifetime"),
    "GoFundMe": PlatformRules("campaign_total"),
    "GiveSendGo": PlatformRules("campaign_total"),
    "Kickstarter": PlatformRules("campaign_total", "all_or_nothing"),
    "Indiegogo": PlatformRules("campaign_total", model_from_page=True),
    "Fundrazr": PlatformRules("campaign_total"),
    "Fundly": PlatformRules("campaign_total"),
    "DonorBox": PlatformRules("campaign_total", reachability_only=True),
    "Paypal/donate": PlatformRules("campaign_total", reachability_only=True),
    "Paypal/pools": PlatformRules("campaign_total"),
}
DEFAULT_RULES = PlatformRules("campaign_total")


def rules_for(platform: str) -> PlatformRules:
    return PLATFORM_RULES.get(platform, DEFAULT_RULES)


def platform_dir(platform: str) -> str:
    """Directory name for a platform: ``Paypal/pools`` -> ``paypal_pools``."""
    return re.sub(r"[^a-z0-9]+", "_", platform.lower()).strip("_")


def fixture_stem(extracted_id: str) -> str:
    """File stem for an identifier; ``/`` becomes ``__``."""
    return re.sub(r"[^\w.@+-]", "_", extracted_id.replace("/", "__"))


def _now() -> str:
    return datetime.now(timezone.utc).replace(microsecond=0).isoformat().replace("+00:00", "Z")


# --- page parsing -------------------------------------------------------------

_SYMBOLS = {"US$": "USD", "CA$": "CAD", "C$": "CAD", "A$": "AUD", "$": "USD", "€": "EUR", "£": "GBP"}
_MONEY = r"(?P<cur>US\$|CA\$|C\$|A\$|\$|€|£|USD|EUR|GBP|CAD|AUD|CHF)\s?(?P<amt>\d[\d,]*(?:\.\d+)?)"
_MONTHLY_RE = re.compile(_MONEY + r"\s*(?:/|per\s+)\s*month", re.I)
_RAISED_RE = re.compile(_MONEY + r"\s*(?:[A-Z]{3}\s*)?(?:raised|pledged|collected)", re.I)
_GOAL_RE = re.compile(r"(?:of|goal(?:\s+of)?|target(?:\s+of)?)\s*:?\s*" + _MONEY + r"(?:\s*(?:goal|target))?", re.I)
_SUPPORT_RE = re.compile(
    r"(?P<n>\d[\d,]*)\s+(?:patrons|paid\s+members|members|subscribers|supporters|donations|donors|backers|contributors)\b",
    re.I,
)
_ENDED_RE = re.compile(r"\b(?:campaign\s+(?:has\s+)?ended|funding\s+(?:unsuccessful|successful|ended)|ended|closed)\b", re.I)
_AON_RE = re.compile(r"\b(?:fixed\s+funding|all[\s-]+or[\s-]+nothing)\b", re.I)
_FETCHED_RE = re.compile(r'<meta\s+name="fetched_at"\s+content="([^"]+)"', re.I)
_TAG_RE = re.compile(r"<(script|style)\b.*?</\1>|<[^>]+>", re.I | re.S)


def page_text(raw_html: str) -> str:
    return re.sub(r"\s+", " ", html.unescape(_TAG_RE.sub(" ", raw_html))).strip()


def _amount(m) -> tuple[Decimal, str]:
    cur = m.group("cur")
    code = _SYMBOLS.get(cur, cur.upper())
    try:
        return Decimal(m.group("amt").replace(",", "")), code
    except InvalidOperation as exc:  # pragma: no cover - regex admits only digits
        raise MetricsParseError(m.group(0)) from exc


def _status(ended: bool, funds: Decimal, goal: Decimal | None) -> str:
    if not ended:
        return "ongoing"
    if goal is not None and funds < goal:
        return "failed"
    return "succeeded"


def parse_html(platform: str, extracted_id: str, raw_html: str, locator: str = "",
               fetched_at: str = "") -> CampaignMetrics:
    """Read funds, supporters, goal and state from a saved platform page."""
    rules = rules_for(platform)
    m = _FETCHED_RE.search(raw_html)
    fetched_at = m.group(1) if m else fetched_at
    text = page_text(raw_html)
    model = rules.funding_model
    if rules.model_from_page and _AON_RE.search(text):
        model = "all_or_nothing"
    if rules.reachability_only:
        return CampaignMetrics(platform, extracted_id, Decimal(0), "", 0, rules.period, model, "ongoing", None, fetched_at)

    funds_re = _MONTHLY_RE if rules.period == "monthly" else _RAISED_RE
    fm = funds_re.search(text)
    if fm is None:
        raise MetricsParseError(f"{locator or platform + '/' + extracted_id}: no funds figure found")
    funds, currency = _amount(fm)
    sm = _SUPPORT_RE.search(text)
    supporters = int(sm.group("n").replace(",", "")) if sm else 0
    gm = _GOAL_RE.search(text, fm.end())
    goal = _amount(gm)[0] if gm else None
    status = _status(bool(_ENDED_RE.search(text)), funds, goal)
    return CampaignMetrics(platform, extracted_id, funds, currency, supporters, rules.period, model,
                           status, goal, fetched_at)


def parse_json(platform: str, extracted_id: str, doc: dict, locator: str = "",
               fetched_at: str = "") -> CampaignMetrics:
    """JSON snapshot with keys funds, currency, supporters and optional goal, ended, status, model."""
    rules = rules_for(platform)
    fetched_at = str(doc.get("fetched_at", fetched_at))
    if doc.get("status") == "unreachable":
        return unreachable(platform, extracted_id, fetched_at)
    model = rules.funding_model
    if rules.model_from_page and (doc.get("all_or_nothing") or doc.get("model") == "all_or_nothing"):
        model = "all_or_nothing"
    if rules.reachability_only:
        return CampaignMetrics(platform, extracted_id, Decimal(0), "", 0, rules.period, model, "ongoing", None, fetched_at)
    try:
        funds = Decimal(str(doc["funds"]))
        currency = str(doc.get("currency", "USD")).upper()
        supporters = int(doc.get("supporters", 0))
        goal = Decimal(str(doc["goal"])) if doc.get("goal") is not None else None
    except (KeyError, InvalidOperation, ValueError, TypeError) as exc:
        raise MetricsParseError(f"{locator or platform + '/' + extracted_id}: {exc!r}") from exc
    status = doc.get("status") or _status(bool(doc.get("ended")), funds, goal)
    return CampaignMetrics(platform, extracted_id, funds, currency, supporters, rules.period, model,
                           status, goal, fetched_at)


def unreachable(platform: str, extracted_id: str, fetched_at: str = "") -> CampaignMetrics:
    rules = rules_for(platform)
    return CampaignMetrics(platform, extracted_id, Decimal(0), "", 0, rules.period, rules.funding_model,
                           "unreachable", None, fetched_at)


# --- sources ------------------------------------------------------------------

class FixtureSource:
    """Saved pages on disk; performs no network access."""

    def __init__(self, root):
        self.root = Path(root)

    def path_for(self, platform: str, extracted_id: str, suffix: str = ".html") -> Path:
        return self.root / platform_dir(platform) / (fixture_stem(extracted_id) + suffix)

    def fetch(self, hit) -> CampaignMetrics:
        platform, ident = hit.platform_name, hit.extracted_id
        for suffix in (".json", ".html"):
            p = self.path_for(platform, ident, suffix)
            if p.exists():
                stamp = datetime.fromtimestamp(p.stat().st_mtime, timezone.utc).replace(microsecond=0)
                stamp = stamp.isoformat().replace("+00:00", "Z")
                text = p.read_text(encoding="utf-8")
                if suffix == ".json":
                    try:
                        doc = json.loads(text)
                    except json.JSONDecodeError as exc:
                        raise MetricsParseError(f"{p}: {exc}") from exc
                    return parse_json(platform, ident, doc, str(p), stamp)
                return parse_html(platform, ident, text, str(p), stamp)
        return unreachable(platform, ident)


class LiveSource:
    """Fetch pages over HTTP, store them under ``root`` and parse the stored copy.

    Requests to one host are serialized and spaced by ``delay`` seconds.
    """

    def __init__(self, root, delay: float = 1.0, timeout: float = 10.0,
                 session: requests.Session | None = None, throttle: HostThrottle | None = None):
        self.fixtures = FixtureSource(root)
        self.timeout = timeout
        self.session = session or requests.Session()
        self.throttle = throttle or HostThrottle(delay)

    def fetch(self, hit) -> CampaignMetrics:
        url = try_normalize(hit.url) if hit.url else None
        if url is None:
            return unreachable(hit.platform_name, hit.extracted_id, _now())
        try:
            resp = self.throttle.request(
                url.host, lambda: self.session.get(str(url), timeout=self.timeout, allow_redirects=True)
            )
        except requests.RequestException as exc:
            log.warning("fetching %s failed: %s", url, exc)
            return unreachable(hit.platform_name, hit.extracted_id, _now())
        if resp.status_code >= 400:
            return unreachable(hit.platform_name, hit.extracted_id, _now())
        path = self.fixtures.path_for(hit.platform_name, hit.extracted_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        stamp = _now()
        body = f'<meta name="fetched_at" content="{stamp}">\n' + resp.text
        path.write_text(body, encoding="utf-8")
        return parse_html(hit.platform_name, hit.extracted_id, body, str(path), stamp)


def fetch_metrics(hit, source) -> CampaignMetrics:
    """Metrics for one hit; ``source`` is a source object or a fixture directory path."""
    if not hit.extracted_id:
        raise ValueError(f"hit for {hit.platform_name} has no identifier")
    if isinstance(source, (str, Path)):
        source = FixtureSource(source)
    return source.fetch(hit)


def fetch_all(hits: Iterable, source) -> list[CampaignMetrics]:
    """Metrics for every distinct (platform, id) among funding hits with an identifier."""
    seen = set()
    out = []
    for h in hits:
        if h.category not in ("donation", "crowdfunding") or not h.extracted_id:
            continue
        key = (h.platform_name, h.extracted_id)
        if key in seen:
            continue
        seen.add(key)
        out.append(fetch_metrics(h, source))
    return out


# --- persistence --------------------------------------------------------------

METRICS_HEADER = ["platform", "id", "funds", "currency", "supporters", "period", "model", "status", "goal", "fetched_at"]


def write_metrics(metrics: Iterable[CampaignMetrics], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(METRICS_HEADER)
        for m in sorted(metrics, key=lambda m: (m.platform_name, m.extracted_id)):
            w.writerow([m.platform_name, m.extracted_id, m.funds_raised, m.currency, m.supporter_count,
                        m.period, m.funding_model, m.status, "" if m.goal is None else m.goal, m.fetched_at])


def read_metrics(path) -> list[CampaignMetrics]:
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        for r in csv.DictReader(fh):
            out.append(CampaignMetrics(
                r["platform"], r["id"], Decimal(r["funds"]), r["currency"], int(r["supporters"]),
                r["period"], r["model"], r["status"], Decimal(r["goal"]) if r["goal"] else None, r["fetched_at"],
            ))
    return out


def load_rates(path=None) -> dict[str, Decimal]:
    """``code,rate_to_usd,asof`` table; the bundled one is a fixed snapshot."""
    if path is None:
        text = resources.files("conspigraph.data").joinpath("rates.csv").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return {r["code"].strip().upper(): Decimal(r["rate_to_usd"]) for r in csv.DictReader(text.splitlines())}


def import_tx_summaries(path) -> list[CampaignMetrics]:
    """Per-address totals ``chain,address,tx_count,amount,currency`` as lifetime metrics."""
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        for r in csv.DictReader(fh):
            out.append(CampaignMetrics(
                r["chain"].strip().lower(), r["address"].strip(), Decimal(r["amount"]),
                r["currency"].strip().upper(), int(r["tx_count"]), "lifetime", "keep_it_all", "ongoing",
            ))
    return out


# --- aggregation --------------------------------------------------------------

@dataclass(frozen=True)
class AggregateRow:
    platform_name: str
    category: str
    url_count: int
    distinct_ids: int
    reachable_ids: int
    total_funds_usd: Decimal
    total_supporters: int


def aggregate(metrics: Iterable[CampaignMetrics], hits: Iterable, rates: dict[str, Decimal]) -> list[AggregateRow]:
    """One row per platform seen in ``hits``.

    Funds and supporters sum over reachable metrics whose id occurs in the
    hits, leaving out failed all-or-nothing campaigns.  Raises
    ``MissingRateError`` when a counted metric's currency has no rate.
    """
    by_key = {}
    for m in metrics:
        by_key[(m.platform_name, m.extracted_id)] = m
    urls: dict[str, int] = {}
    ids: dict[str, set] = {}
    category: dict[str, str] = {}
    for h in hits:
        urls[h.platform_name] = urls.get(h.platform_name, 0) + 1
        category.setdefault(h.platform_name, h.category)
        if h.extracted_id:
            ids.setdefault(h.platform_name, set()).add(h.extracted_id)
    rows = []
    for platform in sorted(urls, key=lambda p: (category[p], p)):
        funds = Decimal(0)
        supporters = 0
        reachable = 0
        for ident in sorted(ids.get(platform, ())):
            m = by_key.get((platform, ident))
            if m is None or m.status == "unreachable":
                continue
            reachable += 1
            if not m.countable:
                continue
            if m.funds_raised:
                if m.currency not in rates:
                    raise MissingRateError(m.currency)
                funds += m.funds_raised * rates[m.currency]
            supporters += m.supporter_count
        rows.append(AggregateRow(platform, category[platform], urls[platform], len(ids.get(platform, ())),
                                 reachable, funds, supporters))
    return rows


AGGREGATE_HEADER = ["platform", "category", "urls", "distinct_ids", "reachable_ids", "funds_usd", "supporters"]


def aggregate_rows_csv(rows: Iterable[AggregateRow]) -> list[list[str]]:
    return [[r.platform_name, r.category, str(r.url_count), str(r.distinct_ids), str(r.reachable_ids),
             f"{r.total_funds_usd.quantize(Decimal('0.01'))}", str(r.total_supporters)] for r in rows]
