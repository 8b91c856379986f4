"""Staged end-to-end run with persisted intermediates and a run manifest.

Each stage hashes its parameters and input files; when the digest matches the
previous manifest entry and the recorded outputs are intact, the stage is
reported as cached and skipped.  A failed stage stops the run.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import time
from dataclasses import asdict, dataclass, fields
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

import yaml

from . import __version__
from .graph import build_graph, hits, leiden_partition, load_graph, save_graph, write_edges
from .graph.communities import (
    flag_communities,
    read_flag_report,
    read_partition,
    write_flag_report,
    write_partition,
    write_scatter,
)
from .ingest import format_timestamp, load_catalog, load_corpus
from .language import LanguageDetector, channel_language, community_language_distribution
from .matcher import flag_channels, match_corpus, read_flagged, write_flagged, write_matches, write_totals
from .metrics import (
    AGGREGATE_HEADER,
    FixtureSource,
    LiveSource,
    aggregate,
    aggregate_rows_csv,
    fetch_all,
    import_tx_summaries,
    load_rates,
    write_metrics,
)
from .monetization import (
    cross_community_filter,
    detect_channel_addresses,
    detect_occurrences,
    load_allowdeny,
    load_platform_catalog,
    read_hits,
    write_hits,
    write_review_queue,
)
from .reports import ECOMMERCE_HEADER, REPORT_FILES, ecommerce_rows, emit_reports
from .resolver import ResolutionPolicy, resolve_all
from .urls import iter_occurrences, load_shorteners, read_urls_csv, write_urls_csv

log = logging.getLogger(__name__)

STAGES = ("ingest", "urls", "match", "graph", "flag", "hits", "language", "monetize", "metrics", "reports")
STAGE_VERSIONS = {name: "1" for name in STAGES}


class ConfigError(ValueError):
    """Invalid pipeline configuration (CLI exit code 2)."""


class StageFailed(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PipelineConfig:
    corpus: str = ""
    catalog: str = ""
    out: str = "out"
    platforms: str | None = None
    shorteners: str | None = None
    cache: str | None = None
    fixtures: str | None = None
    rates: str | None = None
    allowdeny: str | None = None
    tx_summaries: str | None = None
    resolution: float = 1.0
    seed: int = 0
    threshold: float = 0.40
    min_size: int = 10
    hits_tolerance: float = 1e-8
    hits_max_iterations: int = 1000
    sample_size: int = 500
    delay: float = 1.0
    timeout: float = 10.0
    max_redirects: int = 10
    get_fallback: bool = True
    top_k: int = 5
    metrics_source: str = "fixture"
    strict: bool = False
    no_network: bool = False
    binary_edges: bool = False
    scan_messages: bool = True
    workers: int = 1

    PATH_KEYS = ("corpus", "catalog", "out", "platforms", "shorteners", "cache", "fixtures",
                 "rates", "allowdeny", "tx_summaries")

    @classmethod
    def from_mapping(cls, data: dict, base: Path | None = None) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        values = dict(data)
        if base is not None:
            for k in cls.PATH_KEYS:
                v = values.get(k)
                if v and not Path(v).is_absolute():
                    values[k] = str(base / v)
        cfg = cls(**values)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        """Flat YAML or JSON document; relative paths resolve against its directory."""
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file {path} not found")
        try:
            data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected a flat key-value document")
        return cls.from_mapping(data, path.parent)

    def validate(self) -> None:
        if not self.corpus or not Path(self.corpus).exists():
            raise ConfigError(f"corpus path {self.corpus!r} does not exist")
        if not self.catalog or not Path(self.catalog).exists():
            raise ConfigError(f"catalog path {self.catalog!r} does not exist")
        for k in ("platforms", "shorteners", "rates", "allowdeny", "tx_summaries"):
            v = getattr(self, k)
            if v and not Path(v).exists():
                raise ConfigError(f"{k} path {v!r} does not exist")
        self.check_parameters()

    def check_parameters(self) -> None:
        """Range checks on numeric parameters and mode values; creates the output directory."""
        checks = [
            (self.resolution > 0, "resolution must be > 0"),
            (0.0 <= self.threshold <= 1.0, "threshold must lie in [0, 1]"),
            (self.min_size >= 1, "min_size must be >= 1"),
            (self.hits_tolerance > 0, "hits_tolerance must be > 0"),
            (self.sample_size >= 1, "sample_size must be >= 1"),
            (self.delay >= 0, "delay must be >= 0"),
            (self.timeout > 0, "timeout must be > 0"),
            (self.max_redirects >= 0, "max_redirects must be >= 0"),
            (self.top_k >= 1, "top_k must be >= 1"),
            (self.workers >= 1, "workers must be >= 1"),
            (self.metrics_source in ("fixture", "live"), "metrics_source must be 'fixture' or 'live'"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)
        try:
            Path(self.out).mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"cannot create output directory {self.out}: {exc}") from exc

    def as_dict(self) -> dict:
        return asdict(self)


# --- digests ------------------------------------------------------------------

def file_digest(path) -> str:
    """sha256 of a file, or of the sorted (relative path, digest) list of a directory."""
    p = Path(path)
    h = hashlib.sha256()
    if p.is_dir():
        for f in sorted(q for q in p.rglob("*") if q.is_file()):
            h.update(str(f.relative_to(p)).encode())
            h.update(file_digest(f).encode())
        return h.hexdigest()
    with open(p, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds").replace("+00:00", "Z")


@dataclass
class Stage:
    name: str
    params: tuple[str, ...]
    inputs: Callable[["Pipeline"], list]
    outputs: tuple[str, ...]
    run: Callable[["Pipeline"], dict]


class Pipeline:
    def __init__(self, config: PipelineConfig):
        self.config = config
        self.out = Path(config.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.manifest_path = self.out / "manifest.json"
        self._corpus = None
        self._occurrences = None
        self.failure: BaseException | None = None
        self.stages = self._stages()

    # lazily loaded shared state
    @property
    def corpus(self):
        if self._corpus is None:
            self._corpus, _ = load_corpus(self.config.corpus, strict=self.config.strict, workers=self.config.workers)
        return self._corpus

    @property
    def occurrences(self):
        if self._occurrences is None:
            self._occurrences = read_urls_csv(self.out / "urls.csv")
        return self._occurrences

    def path(self, name: str) -> Path:
        return self.out / name

    def _ext(self, *keys) -> list:
        return [getattr(self.config, k) for k in keys if getattr(self.config, k)]

    def _stages(self) -> list[Stage]:
        o = self.path
        return [
            Stage("ingest", ("strict",), lambda p: p._ext("corpus"),
                  ("load_summary.json", "channels.csv"), Pipeline._ingest),
            Stage("urls", ("no_network", "timeout", "max_redirects", "get_fallback", "delay"),
                  lambda p: [o("channels.csv"), *p._ext("corpus", "shorteners")],
                  ("urls.csv", "resolution_stats.json"), Pipeline._urls),
            Stage("match", (), lambda p: [o("urls.csv"), *p._ext("catalog")],
                  ("matches.csv", "totals.csv", "flagged.csv"), Pipeline._match),
            Stage("graph", ("binary_edges", "resolution", "seed"), lambda p: [o("channels.csv"), *p._ext("corpus")],
                  ("edges.csv", "graph.npz", "communities.csv", "partition.json"), Pipeline._graph),
            Stage("flag", ("threshold", "min_size"), lambda p: [o("communities.csv"), o("flagged.csv")],
                  ("community_flags.csv", "scatter.csv", "flag_summary.json"), Pipeline._flag),
            Stage("hits", ("hits_tolerance", "hits_max_iterations"), lambda p: [o("graph.npz"), o("communities.csv")],
                  ("hits.csv",), Pipeline._hits),
            Stage("language", ("sample_size",), lambda p: [o("channels.csv"), o("communities.csv"), *p._ext("corpus")],
                  ("languages.csv", "community_languages.csv"), Pipeline._language),
            Stage("monetize", ("scan_messages",),
                  lambda p: [o("urls.csv"), o("communities.csv"), o("community_flags.csv"),
                             *p._ext("corpus", "platforms", "allowdeny")],
                  ("monetization_all.csv", "monetization.csv", "review_queue.csv", "ecommerce.csv"),
                  Pipeline._monetize),
            Stage("metrics", ("metrics_source", "no_network"),
                  lambda p: [o("monetization.csv"), *p._ext("fixtures", "rates", "tx_summaries")],
                  ("metrics.csv", "aggregate.csv"), Pipeline._metrics),
            Stage("reports", ("top_k",),
                  lambda p: [o(n) for n in ("totals.csv", "ecommerce.csv", "aggregate.csv", "scatter.csv",
                                            "channels.csv", "communities.csv", "community_flags.csv", "hits.csv")],
                  tuple(f"reports/{n}" for n in REPORT_FILES), Pipeline._reports),
        ]

    # --- stage bodies -----------------------------------------------------------

    def _ingest(self) -> dict:
        corpus, summary = load_corpus(self.config.corpus, strict=self.config.strict, workers=self.config.workers)
        self._corpus = corpus
        with open(self.path("load_summary.json"), "w", encoding="utf-8") as fh:
            json.dump(summary.as_dict(), fh, indent=2)
            fh.write("\n")
        with open(self.path("channels.csv"), "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["channel_id", "username", "creation_date", "messages"])
            for ch in corpus:
                w.writerow([ch.channel_id, ch.username or "", format_timestamp(ch.creation_date), len(ch.messages)])
        return {"channels": summary.channels, "messages": summary.messages, "skipped": len(summary.skipped)}

    def _urls(self) -> dict:
        c = self.config
        shorteners = load_shorteners(c.shorteners)
        occ = list(iter_occurrences(self.corpus, shorteners))
        policy = ResolutionPolicy(c.max_redirects, c.timeout, c.get_fallback, c.delay)
        cache = c.cache or str(self.path("resolution_cache.jsonl"))
        occ, stats = resolve_all(occ, cache, policy, network=not c.no_network)
        write_urls_csv(occ, self.path("urls.csv"))
        self._occurrences = occ
        with open(self.path("resolution_stats.json"), "w", encoding="utf-8") as fh:
            json.dump(stats.as_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        return {"urls": len(occ), "unique": len({str(o.normalized) for o in occ}),
                "shortened": stats.unique_shortened, "cache_hit_rate": stats.hit_rate}

    def _match(self) -> dict:
        catalog = load_catalog(self.config.catalog)
        matches, totals = match_corpus(self.occurrences, catalog)
        flagged = flag_channels(matches)
        write_matches(matches, self.path("matches.csv"))
        write_totals(totals, self.path("totals.csv"))
        write_flagged(flagged, self.path("flagged.csv"))
        return {"matched_urls": totals.total_urls, "flagged_channels": len(flagged)}

    def _graph(self) -> dict:
        c = self.config
        g = build_graph(self.corpus, binary=c.binary_edges)
        save_graph(g, self.path("graph.npz"))
        write_edges(g, self.path("edges.csv"))
        part = leiden_partition(g, resolution=c.resolution, seed=c.seed)
        write_partition(part, self.path("communities.csv"), self.path("partition.json"))
        return {"nodes": g.n, "edges": int(len(g.weight)), "dropped_external_forwards": g.dropped_external_forwards,
                "communities": part.n_communities, "modularity": part.modularity}

    def _flag(self) -> dict:
        part = read_partition(self.path("communities.csv"), self.path("partition.json"))
        flagged = read_flagged(self.path("flagged.csv"))
        report = flag_communities(part, flagged, self.config.threshold, self.config.min_size)
        write_flag_report(report, self.path("community_flags.csv"))
        write_scatter(report, self.path("scatter.csv"))
        with open(self.path("flag_summary.json"), "w", encoding="utf-8") as fh:
            json.dump(report.summary(), fh, indent=2)
            fh.write("\n")
        return report.summary()

    def _flag_report(self):
        summary = json.loads(self.path("flag_summary.json").read_text(encoding="utf-8"))
        return read_flag_report(self.path("community_flags.csv"), summary["threshold"], summary["min_size"],
                                summary["flagged_channels"])

    def _hits(self) -> dict:
        g = load_graph(self.path("graph.npz"))
        part = read_partition(self.path("communities.csv"))
        scores = hits(g, self.config.hits_tolerance, self.config.hits_max_iterations)
        with open(self.path("hits.csv"), "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["channel_id", "authority", "hub", "community_id"])
            for cid in sorted(scores.authority):
                w.writerow([cid, f"{scores.authority[cid]:.12f}", f"{scores.hub[cid]:.12f}",
                            part.assignment.get(cid, "")])
        return {"iterations": scores.iterations, "converged": scores.converged}

    def _language(self) -> dict:
        detector = LanguageDetector()
        verdicts = {ch.channel_id: channel_language(ch, self.config.sample_size, detector) for ch in self.corpus}
        with open(self.path("languages.csv"), "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["channel_id", "language", "confidence"])
            for cid in sorted(verdicts):
                v = verdicts[cid]
                w.writerow([cid, v.language_code, f"{v.confidence:.6f}"])
        part = read_partition(self.path("communities.csv"))
        dist = community_language_distribution(part, verdicts)
        with open(self.path("community_languages.csv"), "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["community_id", "language", "fraction"])
            for c, rows in dist.items():
                for code, frac in rows:
                    w.writerow([c, code, f"{frac:.6f}"])
        langs = {}
        for v in verdicts.values():
            langs[v.language_code] = langs.get(v.language_code, 0) + 1
        return {"channels": len(verdicts), "languages": dict(sorted(langs.items()))}

    def _monetize(self) -> dict:
        c = self.config
        catalog = load_platform_catalog(c.platforms)
        found = detect_occurrences(self.occurrences, catalog)
        found += detect_channel_addresses(self.corpus, c.scan_messages)
        write_hits(found, self.path("monetization_all.csv"))
        part = read_partition(self.path("communities.csv"))
        report = self._flag_report()
        allowdeny = load_allowdeny(c.allowdeny) if c.allowdeny else None
        res = cross_community_filter(found, part, report, allowdeny)
        write_hits(res.retained, self.path("monetization.csv"))
        write_review_queue(res.review_queue, self.path("review_queue.csv"))
        conspiracy = set(report.conspiracy_ids)
        inside = {cid for cid, comm in part.assignment.items() if comm in conspiracy}
        with open(self.path("ecommerce.csv"), "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(ECOMMERCE_HEADER)
            w.writerows(ecommerce_rows(self.occurrences, catalog, res.retained, inside))
        by_cat: dict[str, int] = {}
        for h in res.retained:
            by_cat[h.category] = by_cat.get(h.category, 0) + 1
        return {"hits": len(found), "retained": len(res.retained), "review_queue": len(res.review_queue),
                "discarded": len(res.discarded), "retained_by_category": dict(sorted(by_cat.items()))}

    def _metrics(self) -> dict:
        c = self.config
        retained = read_hits(self.path("monetization.csv"))
        fixtures = c.fixtures or str(self.path("fixtures"))
        if c.metrics_source == "live" and not c.no_network:
            source = LiveSource(fixtures, delay=c.delay, timeout=c.timeout)
        else:
            source = FixtureSource(fixtures)
        metrics = fetch_all(retained, source)
        if c.tx_summaries:
            metrics += import_tx_summaries(c.tx_summaries)
        write_metrics(metrics, self.path("metrics.csv"))
        funding = [h for h in retained if h.category in ("donation", "crowdfunding", "blockchain")]
        rows = aggregate(metrics, funding, load_rates(c.rates))
        with open(self.path("aggregate.csv"), "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(AGGREGATE_HEADER)
            w.writerows(aggregate_rows_csv(rows))
        statuses: dict[str, int] = {}
        for m in metrics:
            statuses[m.status] = statuses.get(m.status, 0) + 1
        return {"metrics": len(metrics), "status": dict(sorted(statuses.items()))}

    def _reports(self) -> dict:
        paths = emit_reports(self.out, top_k=self.config.top_k)
        return {"files": sorted(p.name for p in paths.values())}

    # --- driver -----------------------------------------------------------------

    def _load_manifest(self) -> dict:
        if self.manifest_path.exists():
            try:
                return json.loads(self.manifest_path.read_text(encoding="utf-8"))
            except json.JSONDecodeError:
                log.warning("manifest %s unreadable; starting fresh", self.manifest_path)
        return {}

    def _write_manifest(self, manifest: dict) -> None:
        tmp = self.manifest_path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(manifest, indent=2, sort_keys=False, default=str) + "\n", encoding="utf-8")
        tmp.replace(self.manifest_path)

    def _stage_digest(self, stage: Stage) -> tuple[str, dict, dict]:
        params = {k: getattr(self.config, k) for k in stage.params}
        inputs = {}
        for p in stage.inputs(self):
            p = Path(p)
            inputs[str(p)] = file_digest(p) if p.exists() else None
        h = hashlib.sha256(json.dumps({"version": STAGE_VERSIONS[stage.name], "params": params,
                                       "inputs": inputs}, sort_keys=True).encode())
        return h.hexdigest(), params, inputs

    def _outputs_intact(self, recorded: dict) -> bool:
        outputs = recorded.get("outputs") or {}
        if not outputs:
            return False
        for rel, digest in outputs.items():
            p = self.out / rel
            if not p.exists() or file_digest(p) != digest:
                return False
        return True

    def run(self, stages=None, force: bool = False) -> dict:
        selected = set(stages or STAGES)
        old = self._load_manifest().get("stages", {})
        manifest = {
            "package": "conspigraph",
            "version": __version__,
            "started_at": _now(),
            "config": self.config.as_dict(),
            "stages": {},
            "status": "running",
        }
        failed = None
        for stage in self.stages:
            if failed is not None:
                manifest["stages"][stage.name] = {"status": "not_run", "reason": f"upstream stage '{failed}' failed"}
                continue
            if stage.name not in selected:
                if stage.name in old:
                    manifest["stages"][stage.name] = old[stage.name]
                continue
            digest, params, inputs = self._stage_digest(stage)
            prev = old.get(stage.name, {})
            if (not force and prev.get("input_digest") == digest and prev.get("status") in ("completed", "cached")
                    and self._outputs_intact(prev)):
                entry = dict(prev)
                entry["status"] = "cached"
                manifest["stages"][stage.name] = entry
                log.info("stage %s: cached", stage.name)
                continue
            entry = {"version": STAGE_VERSIONS[stage.name], "params": params, "inputs": inputs,
                     "input_digest": digest, "started_at": _now()}
            t0 = time.perf_counter()
            log.info("stage %s: running", stage.name)
            try:
                summary = stage.run(self)
            except Exception as exc:  # recorded in the manifest; callers inspect Pipeline.failure
                entry.update(status="failed", error=f"{type(exc).__name__}: {exc}",
                             finished_at=_now(), duration_s=round(time.perf_counter() - t0, 3))
                manifest["stages"][stage.name] = entry
                failed = stage.name
                self.failure = exc
                log.error("stage %s failed: %s", stage.name, exc)
                manifest["error"] = entry["error"]
                continue
            entry.update(
                status="completed",
                finished_at=_now(),
                duration_s=round(time.perf_counter() - t0, 3),
                outputs={rel: file_digest(self.out / rel) for rel in stage.outputs},
                summary=summary,
            )
            manifest["stages"][stage.name] = entry
            self._write_manifest({**manifest, "status": "running"})
        manifest["finished_at"] = _now()
        manifest["status"] = "failed" if failed else "completed"
        if failed:
            manifest["failed_stage"] = failed
        self._write_manifest(manifest)
        return manifest


def run_pipeline(config: PipelineConfig | dict | str | Path, stages=None, force: bool = False) -> dict:
    """Run (or resume) the pipeline and return its manifest.

    ``config`` may be a ``PipelineConfig``, a mapping, or a path to a config file.
    """
    if isinstance(config, (str, Path)):
        config = PipelineConfig.load(config)
    elif isinstance(config, dict):
        config = PipelineConfig.from_mapping(config)
    else:
        config.validate()
    return Pipeline(config).run(stages, force)
