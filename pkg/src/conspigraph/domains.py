"""Registrable domain (eTLD+1) lookup against a bundled Public Suffix List snapshot."""

from __future__ import annotations

import ipaddress
from functools import lru_cache
from importlib import resources


class SuffixList:
    """Public Suffix List rules: plain, wildcard (``*.ck``) and exception (``!www.ck``)."""

    def __init__(self, lines):
        self.rules: set[str] = set()
        self.wildcards: set[str] = set()
        self.exceptions: set[str] = set()
        for line in lines:
            line = line.strip()
            if not line or line.startswith("//"):
                continue
            rule = line.split()[0].lower()
            if rule.startswith("!"):
                self.exceptions.add(rule[1:])
            elif rule.startswith("*."):
                self.wildcards.add(rule[2:])
            else:
                self.rules.add(rule)

    @classmethod
    def bundled(cls) -> "SuffixList":
        text = resources.files("conspigraph.data").joinpath("public_suffix_list.dat").read_text(encoding="utf-8")
        return cls(text.splitlines())

    def public_suffix_length(self, labels: list[str]) -> int:
        """Number of trailing labels forming the public suffix (at least 1)."""
        n = len(labels)
        best = 1
        for i in range(n):
            name = ".".join(labels[i:])
            if name in self.exceptions:
                return n - i - 1
            if name in self.rules:
                best = max(best, n - i)
            if i + 1 < n and ".".join(labels[i + 1:]) in self.wildcards:
                best = max(best, n - i)
        return best

    def registrable_domain(self, host: str) -> str | None:
        host = host.strip(".").lower()
        if not host:
            return None
        if _is_ip(host):
            return host
        labels = host.split(".")
        k = self.public_suffix_length(labels)
        if len(labels) <= k:
            return None
        return ".".join(labels[-(k + 1):])


def _is_ip(host: str) -> bool:
    try:
        ipaddress.ip_address(host.strip("[]"))
    except ValueError:
        return False
    return True


@lru_cache(maxsize=1)
def default_suffix_list() -> SuffixList:
    return SuffixList.bundled()


@lru_cache(maxsize=262144)
def registrable_domain(host: str) -> str | None:
    """eTLD+1 of ``host``; ``None`` when the host is itself a public suffix.

    >>> registrable_domain("sub.zerohedge.com")
    'zerohedge.com'
    >>> registrable_domain("www.amazon.co.uk")
    'amazon.co.uk'
    """
    return default_suffix_list().registrable_domain(host)


def subdomain_labels(host: str) -> list[str]:
    """Labels left of the registrable domain, nearest first.

    ``shop.news.example.co.uk`` -> ``["news", "shop"]``.
    """
    reg = registrable_domain(host)
    if reg is None or reg == host:
        return []
    prefix = host[: -len(reg) - 1]
    return list(reversed(prefix.split(".")))


def brand_label(host: str) -> str | None:
    """First label of the registrable domain (``amazon`` for ``smile.amazon.de``)."""
    reg = registrable_domain(host)
    if reg is None:
        return None
    return reg.split(".", 1)[0]


def host_matches(host: str, domain: str) -> bool:
    """True if ``host`` is ``domain`` or one of its subdomains.

    ``domain`` may be a brand wildcard such as ``amazon.*`` matching the brand
    under any public suffix.
    """
    if domain.endswith(".*"):
        brand = domain[:-2]
        reg = registrable_domain(host)
        return reg is not None and reg.split(".", 1)[0] == brand
    return host == domain or host.endswith("." + domain)
