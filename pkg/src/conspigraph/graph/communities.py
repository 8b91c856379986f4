"""Community-level conspiracy flagging and partition comparison."""

from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .leiden import Partition


@dataclass(frozen=True)
class CommunityRow:
    community_id: int
    size: int
    flagged_count: int
    flagged_fraction: float
    is_conspiracy: bool


@dataclass
class CommunityFlagReport:
    rows: list[CommunityRow]
    threshold: float = 0.40
    min_size: int = 10
    total_flagged_channels: int = 0

    @property
    def conspiracy_ids(self) -> list[int]:
        return [r.community_id for r in self.rows if r.is_conspiracy]

    @property
    def conspiracy_channel_count(self) -> int:
        return sum(r.size for r in self.rows if r.is_conspiracy)

    @property
    def coverage(self) -> float:
        """Share of flagged channels that sit inside conspiracy communities."""
        inside = sum(r.flagged_count for r in self.rows if r.is_conspiracy)
        return inside / self.total_flagged_channels if self.total_flagged_channels else 0.0

    def row(self, community_id: int) -> CommunityRow:
        for r in self.rows:
            if r.community_id == community_id:
                return r
        raise KeyError(community_id)

    def summary(self) -> dict:
        return {
            "communities": len(self.rows),
            "conspiracy_communities": self.conspiracy_ids,
            "conspiracy_channels": self.conspiracy_channel_count,
            "flagged_channels": self.total_flagged_channels,
            "flagged_coverage": self.coverage,
            "threshold": self.threshold,
            "min_size": self.min_size,
        }


def flag_communities(partition: Partition, flagged, threshold: float = 0.40, min_size: int = 10) -> CommunityFlagReport:
    """A community is a conspiracy community when at least ``threshold`` of its
    channels are flagged and it has at least ``min_size`` channels."""
    flagged_ids = set(getattr(flagged, "channel_ids", flagged))
    sizes = Counter(partition.assignment.values())
    hits = Counter(c for node, c in partition.assignment.items() if node in flagged_ids)
    rows = []
    for cid in sorted(sizes):
        size = sizes[cid]
        fc = hits.get(cid, 0)
        frac = fc / size
        rows.append(CommunityRow(cid, size, fc, frac, frac >= threshold and size >= min_size))
    covered = len(flagged_ids & set(partition.assignment))
    return CommunityFlagReport(rows, threshold, min_size, covered)


def write_scatter(report: CommunityFlagReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["community_id", "size", "flagged_fraction"])
        for r in report.rows:
            w.writerow([r.community_id, r.size, f"{r.flagged_fraction:.6f}"])


def write_flag_report(report: CommunityFlagReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["community_id", "size", "flagged_count", "flagged_fraction", "is_conspiracy"])
        for r in report.rows:
            w.writerow([r.community_id, r.size, r.flagged_count, f"{r.flagged_fraction:.6f}", int(r.is_conspiracy)])


def read_flag_report(path, threshold: float = 0.40, min_size: int = 10, total_flagged: int = 0) -> CommunityFlagReport:
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        for r in csv.DictReader(fh):
            size, fc = int(r["size"]), int(r["flagged_count"])
            rows.append(CommunityRow(int(r["community_id"]), size, fc, fc / size, r["is_conspiracy"] == "1"))
    return CommunityFlagReport(rows, threshold, min_size, total_flagged)


def write_partition(partition: Partition, communities_csv, meta_json) -> None:
    with open(communities_csv, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["channel_id", "community_id"])
        for node, c in sorted(partition.assignment.items()):
            w.writerow([node, c])
    meta = {
        "modularity": partition.modularity,
        "resolution": partition.resolution,
        "seed": partition.seed,
        "communities": partition.n_communities,
        "iterations": partition.iterations,
        "history": partition.history,
    }
    with open(meta_json, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")


def read_partition(communities_csv, meta_json=None) -> Partition:
    assignment = {}
    with open(communities_csv, encoding="utf-8", newline="") as fh:
        for r in csv.DictReader(fh):
            assignment[int(r["channel_id"])] = int(r["community_id"])
    meta = {}
    if meta_json is not None:
        with open(meta_json, encoding="utf-8") as fh:
            meta = json.load(fh)
    return Partition(
        assignment,
        meta.get("modularity", float("nan")),
        meta.get("resolution", 1.0),
        meta.get("seed", 0),
        meta.get("history", []),
        meta.get("iterations", 0),
    )


def normalized_mutual_info(a, b) -> float:
    """NMI of two labelings with arithmetic-mean normalization (1.0 = identical)."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError("labelings differ in length")
    n = len(a)
    if n == 0:
        return 1.0
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    cont = np.zeros((ai.max() + 1, bi.max() + 1))
    np.add.at(cont, (ai, bi), 1)
    pij = cont / n
    pi = pij.sum(axis=1)
    pj = pij.sum(axis=0)
    nz = pij > 0
    mi = float((pij[nz] * np.log(pij[nz] / np.outer(pi, pj)[nz])).sum())
    ha = -float((pi[pi > 0] * np.log(pi[pi > 0])).sum())
    hb = -float((pj[pj > 0] * np.log(pj[pj > 0])).sum())
    if ha == 0 and hb == 0:
        return 1.0
    denom = (ha + hb) / 2
    return max(0.0, mi / denom) if denom > 0 else 0.0
