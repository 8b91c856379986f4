"""Shortened-URL resolution over HTTP with per-host politeness and a persistent cache."""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from urllib.parse import urljoin

import requests

from .urls import ResolutionOutcome, NormalizedUrl, UrlOccurrence, UrlError, normalize, NOT_SHORTENED

log = logging.getLogger(__name__)

USER_AGENT = "conspigraph-resolver/0.1 (+research; polite)"


@dataclass(frozen=True)
class ResolutionPolicy:
    max_redirects: int = 10
    timeout: float = 10.0
    get_fallback: bool = True
    delay: float = 1.0
    workers: int = 4


class HostThrottle:
    """At most one in-flight request per host, and ``delay`` seconds between
    the end of one request and the start of the next to the same host."""

    def __init__(self, delay: float):
        self.delay = delay
        self._locks: dict[str, threading.Lock] = {}
        self._last: dict[str, float] = {}
        self._guard = threading.Lock()

    def _lock(self, host: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(host, threading.Lock())

    def request(self, host: str, fn):
        lock = self._lock(host)
        with lock:
            last = self._last.get(host)
            if last is not None:
                wait = last + self.delay - time.monotonic()
                if wait > 0:
                    time.sleep(wait)
            try:
                return fn()
            finally:
                self._last[host] = time.monotonic()


def _netloc(url: NormalizedUrl) -> str:
    return url.host if url.port is None else f"{url.host}:{url.port}"


class Resolver:
    """Follows a redirect chain hop by hop (HEAD, optionally falling back to a body-less GET)."""

    def __init__(self, policy: ResolutionPolicy | None = None, session: requests.Session | None = None,
                 throttle: HostThrottle | None = None):
        self.policy = policy or ResolutionPolicy()
        self.session = session or requests.Session()
        self.session.headers.setdefault("User-Agent", USER_AGENT)
        self.throttle = throttle or HostThrottle(self.policy.delay)
        self.requests_made = 0
        self._count_lock = threading.Lock()

    def _send(self, method: str, url: NormalizedUrl):
        def go():
            with self._count_lock:
                self.requests_made += 1
            resp = self.session.request(
                method, str(url), allow_redirects=False, timeout=self.policy.timeout, stream=True,
            )
            resp.close()
            return resp

        return self.throttle.request(_netloc(url), go)

    def _hop(self, url: NormalizedUrl):
        resp = self._send("HEAD", url)
        if resp.status_code >= 400 and self.policy.get_fallback:
            resp = self._send("GET", url)
        return resp

    def resolve(self, url: NormalizedUrl) -> ResolutionOutcome:
        now = datetime.now(timezone.utc)
        visited = {str(url)}
        current = url
        hops = 0
        try:
            while True:
                resp = self._hop(current)
                location = resp.headers.get("Location")
                if 300 <= resp.status_code < 400 and location:
                    try:
                        nxt = normalize(urljoin(str(current), location))
                    except UrlError:
                        return ResolutionOutcome("failed_status", None, hops, now)
                    hops += 1
                    if str(nxt) in visited or hops > self.policy.max_redirects:
                        return ResolutionOutcome("failed_loop", None, min(hops, self.policy.max_redirects), now)
                    visited.add(str(nxt))
                    current = nxt
                    continue
                if resp.status_code >= 400 or 300 <= resp.status_code < 400:
                    return ResolutionOutcome("failed_status", None, hops, now)
                return ResolutionOutcome("resolved", current, hops, now)
        except requests.Timeout:
            return ResolutionOutcome("failed_timeout", None, hops, now)
        except requests.RequestException as exc:
            log.info("network failure resolving %s: %s", url, exc)
            return ResolutionOutcome("failed_network", None, hops, now)


class ResolutionCache:
    """Append-only JSON Lines log keyed by normalized URL; the last record wins."""

    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self.records: dict[str, ResolutionOutcome] = {}
        self.rebuilt = False
        self._load()

    def _load(self):
        if not self.path.exists():
            return
        records = {}
        try:
            with open(self.path, encoding="utf-8") as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    rec = json.loads(line)
                    final = rec.get("final_url")
                    fetched = rec.get("fetched_at")
                    records[rec["normalized_url"]] = ResolutionOutcome(
                        rec["status"],
                        normalize(final) if final else None,
                        int(rec.get("redirect_count", 0)),
                        datetime.fromisoformat(fetched) if fetched else None,
                    )
        except (ValueError, KeyError, TypeError) as exc:
            log.warning("resolution cache %s is corrupt (%s); rebuilding from empty", self.path, exc)
            os.replace(self.path, self.path.with_name(self.path.name + ".corrupt"))
            self.rebuilt = True
            return
        self.records = records

    def get(self, key: str) -> ResolutionOutcome | None:
        return self.records.get(key)

    def put(self, key: str, outcome: ResolutionOutcome) -> None:
        rec = {
            "normalized_url": key,
            "status": outcome.status,
            "final_url": str(outcome.final_url) if outcome.final_url else None,
            "redirect_count": outcome.redirect_count,
            "fetched_at": outcome.fetched_at.isoformat() if outcome.fetched_at else None,
        }
        with self._lock:
            self.records[key] = outcome
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


@dataclass
class CacheStats:
    unique_shortened: int = 0
    cache_hits: int = 0
    resolutions: int = 0
    requests: int = 0
    skipped_offline: int = 0
    passthrough: int = 0
    rebuilt: bool = False
    status_counts: dict[str, int] = field(default_factory=dict)

    @property
    def hit_rate(self) -> float:
        return self.cache_hits / self.unique_shortened if self.unique_shortened else 1.0

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["hit_rate"] = self.hit_rate
        return d


def resolve_all(occurrences: list[UrlOccurrence], cache_path, policy: ResolutionPolicy | None = None,
                network: bool = True, resolver: Resolver | None = None) -> tuple[list[UrlOccurrence], CacheStats]:
    """Resolve each distinct shortened URL at most once; update occurrences in place.

    Occurrences whose status is ``not_shortened`` pass through untouched.
    With ``network=False`` uncached shortened URLs keep ``skipped_offline``
    and their normalized form stays effective.
    """
    policy = policy or ResolutionPolicy()
    cache = ResolutionCache(cache_path)
    stats = CacheStats(rebuilt=cache.rebuilt)

    pending: dict[str, NormalizedUrl] = {}
    for occ in occurrences:
        if occ.resolution.status == "not_shortened":
            stats.passthrough += 1
        else:
            pending.setdefault(str(occ.normalized), occ.normalized)
    stats.unique_shortened = len(pending)

    outcomes: dict[str, ResolutionOutcome] = {}
    misses = []
    for key, url in pending.items():
        hit = cache.get(key)
        if hit is not None:
            outcomes[key] = hit
            stats.cache_hits += 1
        else:
            misses.append((key, url))

    if misses and network:
        resolver = resolver or Resolver(policy)
        before = resolver.requests_made

        def work(item):
            key, url = item
            outcome = resolver.resolve(url)
            cache.put(key, outcome)
            return key, outcome

        with ThreadPoolExecutor(max(1, policy.workers)) as pool:
            for key, outcome in pool.map(work, misses):
                outcomes[key] = outcome
        stats.resolutions = len(misses)
        stats.requests = resolver.requests_made - before
    else:
        stats.skipped_offline = len(misses)

    skipped = ResolutionOutcome("skipped_offline")
    for occ in occurrences:
        if occ.resolution.status == "not_shortened":
            continue
        occ.resolution = outcomes.get(str(occ.normalized), skipped)
    counts: dict[str, int] = {}
    for occ in occurrences:
        counts[occ.resolution.status] = counts.get(occ.resolution.status, 0) + 1
    stats.status_counts = dict(sorted(counts.items()))
    return occurrences, stats


def resolve(url: NormalizedUrl, policy: ResolutionPolicy | None = None) -> ResolutionOutcome:
    """Resolve one shortened URL without caching."""
    return Resolver(policy).resolve(url)


__all__ = [
    "ResolutionPolicy", "HostThrottle", "Resolver", "ResolutionCache", "CacheStats",
    "resolve_all", "resolve", "NOT_SHORTENED",
]
