"""Report tables built from persisted stage outputs.

Every writer here uses fixed column order and fixed decimal formatting and
never embeds timestamps, so re-emitting from the same inputs gives
byte-identical files.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass
from datetime import date, timedelta
from decimal import Decimal
from pathlib import Path

from .graph.communities import CommunityFlagReport, CommunityRow
from .graph.leiden import Partition

REPORT_FILES = (
    "table1_resources.csv",
    "table3_ecommerce.csv",
    "table4_donation.csv",
    "table5_crowdfunding.csv",
    "scatter.csv",
    "longitudinal.csv",
    "top_authorities.csv",
)

# stage that produces each persisted input
REPORT_INPUTS = {
    "totals.csv": "match",
    "channels.csv": "ingest",
    "communities.csv": "graph",
    "community_flags.csv": "flag",
    "scatter.csv": "flag",
    "hits.csv": "hits",
    "ecommerce.csv": "monetize",
    "aggregate.csv": "metrics",
}


class MissingStageOutput(FileNotFoundError):
    def __init__(self, path: Path, stage: str):
        super().__init__(f"{path.name} missing; run the '{stage}' stage first")
        self.path = path
        self.stage = stage


@dataclass
class LongitudinalSeries:
    days: list[date]
    communities: dict[int, list[int]]
    conspiracy: list[int]
    rest: list[int]

    @property
    def total(self) -> list[int]:
        return [a + b for a, b in zip(self.conspiracy, self.rest)]

    def peak_day(self, series: str = "total") -> date | None:
        values = self.total if series == "total" else getattr(self, series)
        if not values:
            return None
        return self.days[max(range(len(values)), key=lambda i: (values[i], -i))]


def longitudinal(creation_dates: dict[int, date], partition, flag_report) -> LongitudinalSeries:
    """Daily channel creations per conspiracy community, for all of them together and for the rest.

    ``creation_dates`` maps channel id to creation day (datetimes are truncated).
    The day range runs from the first to the last creation, zero-filled.
    """
    days_of = {cid: (d.date() if hasattr(d, "date") else d) for cid, d in creation_dates.items()}
    ids = sorted(flag_report.conspiracy_ids)
    if not days_of:
        return LongitudinalSeries([], {c: [] for c in ids}, [], [])
    first, last = min(days_of.values()), max(days_of.values())
    span = (last - first).days + 1
    days = [first + timedelta(days=i) for i in range(span)]
    per = {c: [0] * span for c in ids}
    consp = [0] * span
    rest = [0] * span
    assign = partition.assignment
    for cid, d in days_of.items():
        i = (d - first).days
        comm = assign.get(cid)
        if comm in per:
            per[comm][i] += 1
            consp[i] += 1
        else:
            rest[i] += 1
    return LongitudinalSeries(days, per, consp, rest)


def write_longitudinal(series: LongitudinalSeries, path) -> None:
    ids = sorted(series.communities)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", *(f"community_{c}" for c in ids), "conspiracy", "rest", "total"])
        for i, d in enumerate(series.days):
            w.writerow([d.isoformat(), *(series.communities[c][i] for c in ids),
                        series.conspiracy[i], series.rest[i], series.conspiracy[i] + series.rest[i]])


def _read(path: Path) -> list[dict]:
    if not path.exists():
        raise MissingStageOutput(path, REPORT_INPUTS.get(path.name, "?"))
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def _write(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _pct(num: int, den: int) -> str:
    return f"{100.0 * num / den:.2f}" if den else "0.00"


def _money(x) -> str:
    return f"{Decimal(x).quantize(Decimal('0.01'))}"


def _funding_table(rows: list[dict], category: str, id_label: str, supporter_label: str) -> tuple[list[str], list[list]]:
    header = ["platform", "urls", id_label, "reachable", "funds_usd", supporter_label]
    body = []
    tot = [0, 0, 0, Decimal(0), 0]
    for r in rows:
        if r["category"] != category:
            continue
        vals = [int(r["urls"]), int(r["distinct_ids"]), int(r["reachable_ids"]), Decimal(r["funds_usd"]), int(r["supporters"])]
        body.append([r["platform"], vals[0], vals[1], vals[2], _money(vals[3]), vals[4]])
        tot = [a + b for a, b in zip(tot, vals)]
    body.sort(key=lambda row: (-row[1], row[0]))
    if body:
        body.append(["Total", tot[0], tot[1], tot[2], _money(tot[3]), tot[4]])
    return header, body


def emit_reports(out_dir, reports_dir=None, top_k: int = 5) -> dict[str, Path]:
    """Write the report tables from stage outputs in ``out_dir``.

    Raises ``MissingStageOutput`` naming the stage whose output is absent.
    """
    out = Path(out_dir)
    rep = Path(reports_dir) if reports_dir is not None else out / "reports"
    rep.mkdir(parents=True, exist_ok=True)
    paths = {name: rep / name for name in REPORT_FILES}

    totals = _read(out / "totals.csv")
    _write(paths["table1_resources.csv"], ["kind", "resources", "urls", "unique_urls", "identifiers", "channels"],
           [[r["kind"], r["resources"], r["urls"], r["unique_urls"], r["identifiers"], r["channels"]] for r in totals])

    ecom = _read(out / "ecommerce.csv")
    body = []
    t_urls = t_aff = t_ids = 0
    for r in sorted(ecom, key=lambda r: (-int(r["urls"]), r["platform"])):
        u, a, d = int(r["urls"]), int(r["affiliate_urls"]), int(r["distinct_ids"])
        body.append([r["platform"], u, a, _pct(a, u), d, int(r["channels"])])
        t_urls, t_aff, t_ids = t_urls + u, t_aff + a, t_ids + d
    if body:
        body.append(["Total", t_urls, t_aff, _pct(t_aff, t_urls), t_ids, sum(int(r["channels"]) for r in ecom)])
    _write(paths["table3_ecommerce.csv"], ["platform", "urls", "affiliate_urls", "affiliate_pct", "affiliate_ids", "channels"], body)

    agg = _read(out / "aggregate.csv")
    _write(paths["table4_donation.csv"], *_funding_table(agg, "donation", "profiles", "supporters"))
    _write(paths["table5_crowdfunding.csv"], *_funding_table(agg, "crowdfunding", "campaigns", "backers"))

    scatter = _read(out / "scatter.csv")
    _write(paths["scatter.csv"], ["community_id", "size", "flagged_fraction"],
           [[r["community_id"], r["size"], r["flagged_fraction"]] for r in scatter])

    channels = _read(out / "channels.csv")
    comms = _read(out / "communities.csv")
    flags = _read(out / "community_flags.csv")
    partition = Partition({int(r["channel_id"]): int(r["community_id"]) for r in comms}, float("nan"))
    report = CommunityFlagReport([
        CommunityRow(int(r["community_id"]), int(r["size"]), int(r["flagged_count"]),
                     float(r["flagged_fraction"]), r["is_conspiracy"] == "1") for r in flags
    ])
    created = {int(r["channel_id"]): date.fromisoformat(r["creation_date"][:10]) for r in channels}
    write_longitudinal(longitudinal(created, partition, report), paths["longitudinal.csv"])

    hits = _read(out / "hits.csv")
    conspiracy = set(report.conspiracy_ids)
    per: dict[int, list[tuple[float, int, str, str]]] = {}
    for r in hits:
        c = int(r["community_id"]) if r["community_id"] != "" else None
        if c in conspiracy:
            per.setdefault(c, []).append((-float(r["authority"]), int(r["channel_id"]), r["authority"], r["hub"]))
    body = []
    for c in sorted(per):
        for rank, (_, cid, auth, hub) in enumerate(sorted(per[c])[:top_k], start=1):
            body.append([c, rank, cid, auth, hub])
    _write(paths["top_authorities.csv"], ["community_id", "rank", "channel_id", "authority", "hub"], body)
    return paths


def ecommerce_rows(occurrences, catalog, affiliate_hits, channels=None) -> list[list]:
    """Per e-commerce platform: URL count, affiliate URL count, distinct partner ids, channels.

    Only occurrences from ``channels`` are counted when it is given.
    """
    urls: Counter = Counter()
    chans: dict[str, set] = {}
    for occ in occurrences:
        if channels is not None and occ.channel_id not in channels:
            continue
        entry = catalog.lookup(occ.effective)
        if entry is None or entry.category != "ecommerce":
            continue
        urls[entry.platform_name] += 1
        chans.setdefault(entry.platform_name, set()).add(occ.channel_id)
    aff: Counter = Counter()
    ids: dict[str, set] = {}
    for h in affiliate_hits:
        if h.category != "affiliate":
            continue
        aff[h.platform_name] += 1
        ids.setdefault(h.platform_name, set()).add(h.extracted_id)
    names = sorted(set(urls) | set(aff))
    return [[p, urls[p], aff[p], len(ids.get(p, ())), len(chans.get(p, ()))] for p in names]


ECOMMERCE_HEADER = ["platform", "urls", "affiliate_urls", "distinct_ids", "channels"]
