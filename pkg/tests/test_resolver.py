import socket

import pytest

from conspigraph.resolver import HostThrottle, ResolutionCache, ResolutionPolicy, Resolver, resolve_all
from conspigraph.urls import ResolutionOutcome, iter_occurrences, normalize
from conftest import make_channel
from stub_http import StubServer, ok, redirect

FAST = ResolutionPolicy(max_redirects=5, timeout=2.0, delay=0.0, workers=4)
LOCAL = frozenset({"127.0.0.1", "localhost"})


def _routes():
    return {
        "/a": redirect("/b"),
        "/b": ok(),
        "/loop": redirect("/loop"),
        "/ping": redirect("/pong", 302),
        "/pong": redirect("/ping", 302),
        "/h405": {"HEAD": (405, {}, b""), "GET": (301, {"Location": "/b"}, b"")},
        "/gone": {"*": (404, {}, b"")},
        "/slow": {"*": (200, {"X-Sleep": "1.0"}, b"")},
        "/abs": redirect("https://example.org/target?x=1"),
    }


@pytest.fixture()
def stub():
    with StubServer(_routes()) as s:
        yield s


def test_single_hop(stub):
    out = Resolver(FAST).resolve(normalize(stub.url("/a")))
    assert out.status == "resolved"
    assert str(out.final_url) == stub.url("/b")
    assert out.redirect_count == 1


def test_self_loop(stub):
    assert Resolver(FAST).resolve(normalize(stub.url("/loop"))).status == "failed_loop"


def test_two_cycle(stub):
    out = Resolver(FAST).resolve(normalize(stub.url("/ping")))
    assert out.status == "failed_loop" and out.redirect_count <= FAST.max_redirects


def test_head_405_falls_back_to_get(stub):
    out = Resolver(FAST).resolve(normalize(stub.url("/h405")))
    assert out.status == "resolved" and str(out.final_url) == stub.url("/b")
    methods = [(r.method, r.path) for r in stub.log]
    assert methods[:3] == [("HEAD", "/h405"), ("GET", "/h405"), ("HEAD", "/b")]


def test_no_fallback_gives_failed_status(stub):
    policy = ResolutionPolicy(5, 2.0, get_fallback=False, delay=0.0)
    assert Resolver(policy).resolve(normalize(stub.url("/h405"))).status == "failed_status"


def test_error_status(stub):
    assert Resolver(FAST).resolve(normalize(stub.url("/gone"))).status == "failed_status"


def test_timeout(stub):
    policy = ResolutionPolicy(5, timeout=0.2, delay=0.0)
    assert Resolver(policy).resolve(normalize(stub.url("/slow"))).status == "failed_timeout"


def test_network_failure():
    s = socket.socket()
    s.bind(("127.0.0.1", 0))
    port = s.getsockname()[1]
    s.close()  # nothing listens here now
    out = Resolver(FAST).resolve(normalize(f"http://127.0.0.1:{port}/x"))
    assert out.status == "failed_network" and out.final_url is None


def test_absolute_location_is_final_without_fetching(stub):
    policy = ResolutionPolicy(0, 2.0, delay=0.0)
    out = Resolver(policy).resolve(normalize(stub.url("/abs")))
    # one redirect exceeds a zero budget
    assert out.status == "failed_loop" and out.redirect_count == 0


def _occurrences(urls):
    ch = make_channel(1, [f"link {u}" for u in urls])
    return list(iter_occurrences([ch], LOCAL))


def test_dedup_and_cache(stub, tmp_path):
    cache = tmp_path / "cache.jsonl"
    occ = _occurrences([stub.url("/a")] * 100)
    occ, stats = resolve_all(occ, cache, FAST)
    assert stats.unique_shortened == 1 and stats.resolutions == 1
    assert len(stub.log) == 2  # HEAD /a then HEAD /b
    assert all(o.resolution.status == "resolved" for o in occ)

    again = _occurrences([stub.url("/a")] * 100)
    again, stats2 = resolve_all(again, cache, FAST)
    assert len(stub.log) == 2  # zero network calls on the second run
    assert stats2.cache_hits == 1 and stats2.hit_rate == 1.0 and stats2.requests == 0
    assert [o.effective for o in again] == [o.effective for o in occ]


def test_mixed_shortened_and_direct(stub, tmp_path):
    short = [stub.url(f"/a?i={i}") for i in range(5)]
    direct = [f"https://example.com/page{i}" for i in range(5)]
    occ, stats = resolve_all(_occurrences(short + direct), tmp_path / "c.jsonl", FAST)
    assert stats.resolutions == 5 and stats.passthrough == 5


def test_offline_mode_keeps_normalized(tmp_path):
    occ = _occurrences(["http://127.0.0.1:9/x", "https://example.com/y"])
    occ, stats = resolve_all(occ, tmp_path / "c.jsonl", FAST, network=False)
    assert [o.resolution.status for o in occ] == ["skipped_offline", "not_shortened"]
    assert all(o.effective == o.normalized for o in occ)
    assert stats.skipped_offline == 1 and stats.requests == 0


def test_resolution_invariants(stub, tmp_path):
    urls = [stub.url(p) for p in ("/a", "/loop", "/gone", "/h405")] + ["https://example.com/"]
    occ = _occurrences(urls)
    raws = [o.raw for o in occ]
    occ, _ = resolve_all(occ, tmp_path / "c.jsonl", FAST)
    assert [o.raw for o in occ] == raws
    for o in occ:
        if o.resolution.status == "resolved":
            assert o.effective == o.resolution.final_url
        else:
            assert o.resolution.final_url is None and o.effective == o.normalized


def test_politeness_gap_and_single_inflight(tmp_path):
    delay = 0.25
    with StubServer({f"/s{i}": ok() for i in range(5)}, latency=0.05) as stub:
        urls = [stub.url(f"/s{i}") for i in range(5)] + [stub.url(f"/s{i}", host="localhost") for i in range(3)]
        policy = ResolutionPolicy(5, 2.0, delay=delay, workers=8)
        occ, stats = resolve_all(_occurrences(urls), tmp_path / "c.jsonl", policy)
        assert stats.resolutions == 8
        for host in ("127.0.0.1", "localhost"):
            log = sorted(stub.requests_for(host), key=lambda r: r.start)
            assert len(log) == (5 if host == "127.0.0.1" else 3)
            assert max(r.concurrent for r in log) == 1
            gaps = [b.start - a.end for a, b in zip(log, log[1:])]
            assert min(gaps) >= delay - 0.01, gaps


def test_throttle_spacing_without_server():
    import time

    t = HostThrottle(0.1)
    stamps = []
    for _ in range(3):
        t.request("h", lambda: stamps.append(time.monotonic()))
    assert all(b - a >= 0.099 for a, b in zip(stamps, stamps[1:]))


def test_corrupt_cache_is_rebuilt(tmp_path):
    p = tmp_path / "cache.jsonl"
    p.write_text("{broken\n", encoding="utf-8")
    cache = ResolutionCache(p)
    assert cache.rebuilt and cache.records == {}
    assert (tmp_path / "cache.jsonl.corrupt").exists()
    cache.put("http://a/", ResolutionOutcome("failed_status"))
    assert ResolutionCache(p).get("http://a/").status == "failed_status"


def test_outcome_invariant():
    with pytest.raises(ValueError):
        ResolutionOutcome("resolved")
    with pytest.raises(ValueError):
        ResolutionOutcome("failed_loop", normalize("https://a.com"))
