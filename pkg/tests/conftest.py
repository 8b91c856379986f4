from __future__ import annotations

import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest

from conspigraph.ingest import ChannelRecord, MessageRecord
from conspigraph.synthetic import generate

FIXTURES = Path(__file__).parent / "fixtures"
sys.path.insert(0, str(Path(__file__).parent))

T0 = datetime(2020, 1, 1, tzinfo=timezone.utc)


def make_channel(cid: int, texts=(), forwards=(), created: datetime = T0, description: str = "",
                 username: str | None = None) -> ChannelRecord:
    """Channel with one message per text and one per forwarded-from id."""
    msgs = []
    mid = 1
    for t in texts:
        msgs.append(MessageRecord(mid, T0 + timedelta(minutes=mid), t))
        mid += 1
    for src in forwards:
        msgs.append(MessageRecord(mid, T0 + timedelta(minutes=mid), "", src))
        mid += 1
    return ChannelRecord(cid, f"channel {cid}", description, created, username, msgs)


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def synthetic():
    """The default 200-channel synthetic corpus; treat as read-only."""
    return generate()


@pytest.fixture(scope="session")
def synthetic_dir(tmp_path_factory, synthetic) -> Path:
    d = tmp_path_factory.mktemp("synthetic")
    synthetic.write(d)
    return d


@pytest.fixture(scope="session")
def pipeline_run(tmp_path_factory, synthetic_dir):
    """Full no-network pipeline over the synthetic corpus: (config, manifest, out dir)."""
    from conspigraph.pipeline import PipelineConfig, run_pipeline

    out = tmp_path_factory.mktemp("run") / "out"
    cfg = PipelineConfig(corpus=str(synthetic_dir / "corpus.jsonl"), catalog=str(synthetic_dir / "catalog.csv"),
                         out=str(out), no_network=True)
    cfg.validate()
    manifest = run_pipeline(cfg)
    return cfg, manifest, out


def pytest_terminal_summary(terminalreporter):
    """Print one line per acceptance criterion that ran."""
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in results:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
