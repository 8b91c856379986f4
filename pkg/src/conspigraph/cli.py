"""Command-line entry point: ``conspigraph run --config`` plus per-stage subcommands.

Exit codes: 0 success, 2 validation error, 3 stage failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import shutil
import sys
from pathlib import Path

from .graph import build_graph, leiden_partition, load_graph, save_graph, write_edges
from .graph.communities import read_flag_report, write_partition
from .ingest import CatalogError, CorpusError, load_catalog, load_corpus
from .metrics import (
    AGGREGATE_HEADER,
    FixtureSource,
    LiveSource,
    aggregate,
    aggregate_rows_csv,
    fetch_all,
    import_tx_summaries,
    load_rates,
    read_metrics,
    write_metrics,
)
from .monetization import read_hits
from .monetization.platforms import PlatformCatalogError
from .pipeline import ConfigError, Pipeline, PipelineConfig
from .resolver import ResolutionPolicy, resolve_all
from .urls import iter_occurrences, load_shorteners, read_urls_csv, write_urls_csv

EXIT_OK, EXIT_VALIDATION, EXIT_STAGE = 0, 2, 3
VALIDATION_ERRORS = (ConfigError, CorpusError, CatalogError, PlatformCatalogError)

log = logging.getLogger("conspigraph")


class ValidationError(ValueError):
    pass


def _require(path, what: str) -> str:
    if path is None or not Path(path).exists():
        raise ValidationError(f"{what} path {path!r} does not exist")
    return str(path)


def _config(args, **fields) -> PipelineConfig:
    """Config for a single-stage command; only the supplied fields are checked."""
    cfg = PipelineConfig(out=args.out, **{k: v for k, v in fields.items() if v is not None})
    cfg.check_parameters()
    return cfg


def _run_stage(cfg: PipelineConfig, stage: str, force: bool = True) -> int:
    pipeline = Pipeline(cfg)
    manifest = pipeline.run([stage], force=force)
    entry = manifest["stages"][stage]
    if isinstance(pipeline.failure, VALIDATION_ERRORS):
        raise pipeline.failure
    if entry["status"] == "failed":
        print(f"{stage}: failed: {entry['error']}", file=sys.stderr)
        return EXIT_STAGE
    print(json.dumps({stage: entry.get("summary", {})}, indent=2, default=str))
    return EXIT_OK


# --- handlers -------------------------------------------------------------------

def cmd_run(args) -> int:
    cfg = PipelineConfig.load(args.config)
    if args.out_given:
        cfg.out = args.out
    cfg.validate()
    manifest = Pipeline(cfg).run(force=args.force)
    for name, entry in manifest["stages"].items():
        print(f"{name:<10} {entry['status']}")
    if manifest["status"] != "completed":
        print(f"stage '{manifest['failed_stage']}' failed: {manifest.get('error', '')}", file=sys.stderr)
        return EXIT_STAGE
    return EXIT_OK


def cmd_ingest(args) -> int:
    cfg = _config(args, corpus=_require(args.corpus, "corpus"),
                  catalog=args.catalog and _require(args.catalog, "catalog"),
                  strict=args.strict, workers=args.workers)
    if cfg.catalog:
        load_catalog(cfg.catalog)
    return _run_stage(cfg, "ingest")


def cmd_urls(args) -> int:
    out = Path(args.out)
    urls_csv = out / "urls.csv"
    if args.action == "extract":
        corpus, _ = load_corpus(_require(args.corpus, "corpus"))
        occ = list(iter_occurrences(corpus, load_shorteners(args.shorteners)))
        n = write_urls_csv(occ, urls_csv)
        print(json.dumps({"urls": n, "shortened": sum(o.resolution.status != "not_shortened" for o in occ)}))
        return EXIT_OK
    src = Path(args.urls) if args.urls else urls_csv
    occ = read_urls_csv(_require(src, "urls.csv"))
    policy = ResolutionPolicy(args.max_redirects, args.timeout, True, args.delay)
    cache = args.cache or str(out / "resolution_cache.jsonl")
    occ, stats = resolve_all(occ, cache, policy, network=not args.no_network)
    write_urls_csv(occ, urls_csv)
    with open(out / "resolution_stats.json", "w", encoding="utf-8") as fh:
        json.dump(stats.as_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(json.dumps(stats.as_dict(), sort_keys=True))
    return EXIT_OK


def cmd_match(args) -> int:
    out = Path(args.out)
    if args.urls:
        src = Path(_require(args.urls, "urls"))
        if src.resolve() != (out / "urls.csv").resolve():
            shutil.copyfile(src, out / "urls.csv")
    cfg = _config(args, catalog=_require(args.catalog, "catalog"))
    return _run_stage(cfg, "match")


def cmd_graph(args) -> int:
    out = Path(args.out)
    if args.action == "build":
        corpus, _ = load_corpus(_require(args.corpus, "corpus"))
        g = build_graph(corpus, binary=args.binary_edges)
        save_graph(g, out / "graph.npz")
        write_edges(g, out / "edges.csv")
        print(json.dumps({"nodes": g.n, "edges": int(len(g.weight)),
                          "dropped_external_forwards": g.dropped_external_forwards}))
        return EXIT_OK
    if args.action == "communities":
        g = load_graph(_require(out / "graph.npz", "graph.npz (run 'graph build')"))
        part = leiden_partition(g, resolution=args.resolution, seed=args.seed)
        write_partition(part, out / "communities.csv", out / "partition.json")
        print(json.dumps({"communities": part.n_communities, "modularity": part.modularity}))
        return EXIT_OK
    if args.action == "flag":
        _require(out / "communities.csv", "communities.csv (run 'graph communities')")
        _require(out / "flagged.csv", "flagged.csv (run 'match')")
        cfg = _config(args, threshold=args.threshold, min_size=args.min_size)
        return _run_stage(cfg, "flag")
    # hits
    _require(out / "graph.npz", "graph.npz (run 'graph build')")
    _require(out / "communities.csv", "communities.csv (run 'graph communities')")
    code = _run_stage(_config(args, hits_tolerance=args.tolerance), "hits")
    if code != EXIT_OK:
        return code
    flags = out / "community_flags.csv"
    wanted = set(read_flag_report(flags).conspiracy_ids) if flags.exists() else None
    per: dict[int, list[tuple[float, int]]] = {}
    with open(out / "hits.csv", encoding="utf-8", newline="") as fh:
        for r in csv.DictReader(fh):
            c = int(r["community_id"]) if r["community_id"] else -1
            if wanted is None or c in wanted:
                per.setdefault(c, []).append((-float(r["authority"]), int(r["channel_id"])))
    for c in sorted(per):
        top = sorted(per[c])[:args.top]
        print(f"community {c}: " + ", ".join(f"{cid} ({-a:.4f})" for a, cid in top))
    return code


def cmd_monetize(args) -> int:
    cfg = _config(args, corpus=_require(args.corpus, "corpus"),
                  platforms=args.catalog and _require(args.catalog, "platform catalog"),
                  allowdeny=args.allowdeny and _require(args.allowdeny, "allowdeny"),
                  scan_messages=not args.descriptions_only)
    return _run_stage(cfg, "monetize")


def cmd_metrics(args) -> int:
    if args.action == "fetch":
        out = Path(args.out)
        hits = read_hits(_require(out / "monetization.csv", "monetization.csv (run 'monetize')"))
        fixtures = args.fixtures or str(out / "fixtures")
        source = LiveSource(fixtures, args.delay, args.timeout) if args.source == "live" else FixtureSource(fixtures)
        metrics = fetch_all(hits, source)
        write_metrics(metrics, out / "metrics.csv")
        print(json.dumps({"metrics": len(metrics)}))
        return EXIT_OK
    out = Path(args.out)
    metrics = read_metrics(_require(out / "metrics.csv", "metrics.csv (run 'metrics fetch')"))
    if args.tx_summaries:
        metrics += import_tx_summaries(_require(args.tx_summaries, "tx summaries"))
    hits = [h for h in read_hits(_require(out / "monetization.csv", "monetization.csv (run 'monetize')"))
            if h.category in ("donation", "crowdfunding", "blockchain")]
    rows = aggregate(metrics, hits, load_rates(args.rates and _require(args.rates, "rates")))
    with open(out / "aggregate.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AGGREGATE_HEADER)
        w.writerows(aggregate_rows_csv(rows))
    print(json.dumps({"platforms": len(rows)}))
    return EXIT_OK


def cmd_reports(args) -> int:
    return _run_stage(_config(args, top_k=args.top), "reports")


# --- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="conspigraph", description=__doc__.splitlines()[0])
    p.add_argument("--out", default=None, help="output directory for stage files (default: out)")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("run", help="run every stage from a config file")
    s.add_argument("--config", required=True)
    s.add_argument("--force", action="store_true", help="ignore cached stage results")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("ingest", help="load the corpus and emit a load summary")
    s.add_argument("--corpus", required=True)
    s.add_argument("--catalog")
    s.add_argument("--strict", action="store_true")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("urls", help="extract URLs or resolve shortened ones")
    s.add_argument("action", choices=("extract", "resolve"))
    s.add_argument("--corpus")
    s.add_argument("--urls", help="urls.csv to resolve (default: <out>/urls.csv)")
    s.add_argument("--shorteners")
    s.add_argument("--cache")
    s.add_argument("--timeout", type=float, default=10.0)
    s.add_argument("--max-redirects", type=int, default=10)
    s.add_argument("--delay", type=float, default=1.0)
    s.add_argument("--no-network", action="store_true")
    s.set_defaults(func=cmd_urls)

    s = sub.add_parser("match", help="match URLs against the resource catalog")
    s.add_argument("--urls")
    s.add_argument("--catalog", required=True)
    s.set_defaults(func=cmd_match)

    s = sub.add_parser("graph", help="forwarding graph, communities, flags and HITS")
    s.add_argument("action", choices=("build", "communities", "flag", "hits"))
    s.add_argument("--corpus")
    s.add_argument("--binary-edges", action="store_true")
    s.add_argument("--resolution", type=float, default=1.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--threshold", type=float, default=0.40)
    s.add_argument("--min-size", type=int, default=10)
    s.add_argument("--tolerance", type=float, default=1e-8)
    s.add_argument("--top", type=int, default=5)
    s.set_defaults(func=cmd_graph)

    s = sub.add_parser("monetize", help="detect monetization links and wallet addresses")
    s.add_argument("--corpus", required=True)
    s.add_argument("--catalog", help="platform catalog CSV (default: bundled)")
    s.add_argument("--allowdeny")
    s.add_argument("--descriptions-only", action="store_true")
    s.set_defaults(func=cmd_monetize)

    s = sub.add_parser("metrics", help="fetch campaign metrics or aggregate them")
    s.add_argument("action", choices=("fetch", "aggregate"))
    s.add_argument("--source", choices=("fixture", "live"), default="fixture")
    s.add_argument("--fixtures")
    s.add_argument("--rates")
    s.add_argument("--tx-summaries")
    s.add_argument("--delay", type=float, default=1.0)
    s.add_argument("--timeout", type=float, default=10.0)
    s.set_defaults(func=cmd_metrics)

    s = sub.add_parser("reports", help="emit report tables from stage outputs")
    s.add_argument("--top", type=int, default=5)
    s.set_defaults(func=cmd_reports)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.out_given = args.out is not None
    args.out = args.out or "out"
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValidationError, *VALIDATION_ERRORS) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:
        log.debug("stage failure", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
