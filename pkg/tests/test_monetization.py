import csv
from collections import defaultdict

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conspigraph.graph import Partition, flag_communities
from conspigraph.monetization import (
    MonetizationHit,
    channel_summary,
    cross_community_filter,
    detect_channel_addresses,
    detect_occurrences,
    detect_url,
    load_allowdeny,
    load_platform_catalog,
    read_hits,
    write_hits,
)
from conspigraph.monetization.detectors import HIT_CATEGORIES
from conspigraph.urls import iter_occurrences, load_shorteners, normalize
from conftest import make_channel

CATALOG = load_platform_catalog()


def _cases(fixtures_dir):
    with open(fixtures_dir / "monetization_cases.csv", encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def test_sixty_labeled_cases(fixtures_dir):
    cases = _cases(fixtures_dir)
    assert len(cases) == 60
    disagreements = []
    for c in cases:
        hit = detect_url(normalize(c["url"]), CATALOG)
        got = ("none", "", "") if hit is None else (hit.category, hit.platform_name, hit.extracted_id)
        want = (c["category"], c["platform"], c["extracted_id"])
        if got != want:
            disagreements.append((c["url"], got, want))
    assert disagreements == []


def test_cases_cover_every_rule_family(fixtures_dir):
    cats = {c["category"] for c in _cases(fixtures_dir)}
    assert {"affiliate", "donation", "crowdfunding", "shopfront", "wishlist", "custom_shop", "none"} <= cats


def test_detectors_are_disjoint_on_detected_urls(fixtures_dir, synthetic):
    urls = [c["url"] for c in _cases(fixtures_dir)]
    urls += [str(o.effective) for o in iter_occurrences(synthetic.corpus, load_shorteners())]
    per_url = defaultdict(set)
    for u in urls:
        hit = detect_url(normalize(u), CATALOG)
        if hit is not None:
            per_url[str(normalize(u))].add(hit.category)
    assert per_url and all(len(c) == 1 for c in per_url.values())


_params = st.lists(st.tuples(st.sampled_from(["tag", "ref", "campid", "utm_source", "x", "psc"]),
                             st.from_regex(r"[a-z0-9-]{1,6}", fullmatch=True)),
                   max_size=4, unique_by=lambda kv: kv[0])
_bases = st.sampled_from([
    "https://www.amazon.com/dp/B01", "https://www.ebay.com/itm/1", "https://www.patreon.com/truth",
    "https://shop.example.com/item", "https://www.amazon.de/shop/truthguy", "https://news.example.org/a",
    "https://www.gofundme.com/f/help", "https://www.paypal.com/donate",
])


@settings(max_examples=150, deadline=None)
@given(_bases, _params, st.randoms(use_true_random=False))
def test_detection_ignores_query_order(base, params, rnd):
    shuffled = list(params)
    rnd.shuffle(shuffled)

    def url(ps):
        return base + ("?" + "&".join(f"{k}={v}" for k, v in ps) if ps else "")

    a = detect_url(normalize(url(params)), CATALOG)
    b = detect_url(normalize(url(shuffled)), CATALOG)
    key = lambda h: None if h is None else (h.category, h.platform_name, h.extracted_id)
    assert key(a) == key(b)
    if a is not None:
        assert a.category in HIT_CATEGORIES


def test_occurrence_hits_are_located():
    ch = make_channel(3, ["buy https://www.amazon.com/dp/X?tag=me-20 now", "https://www.patreon.com/truth"])
    hits = detect_occurrences(iter_occurrences([ch], load_shorteners()), CATALOG)
    assert [(h.channel_id, h.message_id, h.category) for h in hits] == [(3, 1, "affiliate"), (3, 2, "donation")]


def test_addresses_from_descriptions_and_messages():
    addr = "1A1zP1eP5QGefi2DMPTfTL5SLmv7DivfNa"
    ch = make_channel(4, [f"tips: {addr}", "short"], description=f"BTC {addr}")
    hits = detect_channel_addresses([ch])
    assert [(h.message_id, h.platform_name) for h in hits] == [(None, "bitcoin"), (1, "bitcoin")]
    assert len(detect_channel_addresses([ch], scan_messages=False)) == 1


def test_channel_summary_counts_every_category():
    hits = [MonetizationHit("donation", "Patreon", "a", 1), MonetizationHit("donation", "Patreon", "b", 1),
            MonetizationHit("blockchain", "bitcoin", "x", 2), MonetizationHit("wishlist", "Amazon", "l", None)]
    s = channel_summary(hits)
    assert list(s) == [1, 2]
    assert s[1]["donation"] == 2 and sum(s[1].values()) == 2
    assert set(s[2]) == set(HIT_CATEGORIES)


def _filter_setup():
    part = Partition({1: 0, 2: 0, 3: 1}, 0.0)
    report = flag_communities(part, {1, 2}, threshold=0.5, min_size=1)
    shared = "https://www.gofundme.com/f/shared"
    hits = [
        MonetizationHit("crowdfunding", "GoFundMe", "shared", 1, 1, shared),
        MonetizationHit("crowdfunding", "GoFundMe", "shared", 3, 1, shared),
        MonetizationHit("donation", "Patreon", "own", 2, 1, "https://www.patreon.com/own"),
        MonetizationHit("affiliate", "Amazon", "t-20", 3, 2, "https://amazon.com/dp/X?tag=t-20"),
    ]
    return part, report, hits, shared


def test_cross_community_filter_queue_and_scope():
    part, report, hits, shared = _filter_setup()
    res = cross_community_filter(hits, part, report)
    assert [(q.url, q.conspiracy_channels, q.other_channels, q.decision) for q in res.review_queue] == \
        [(shared, 1, 1, "undecided")]
    assert [(h.channel_id, h.extracted_id) for h in res.retained] == [(1, "shared"), (2, "own")]
    assert res.discarded == []
    everything = cross_community_filter(hits, part, report, conspiracy_only=False)
    assert len(everything.retained) == 4


def test_deny_discards_and_allow_keeps(tmp_path):
    part, report, hits, shared = _filter_setup()
    p = tmp_path / "ad.txt"
    # host case and a fragment do not matter; the entry is matched after normalization
    p.write_text(f"# reviewed\ndeny {shared.replace('gofundme', 'GoFundMe')}#top\n", encoding="utf-8")
    decisions = load_allowdeny(p)
    res = cross_community_filter(hits, part, report, decisions)
    assert res.review_queue[0].decision == "deny"
    assert {h.channel_id for h in res.discarded} == {1, 3}
    assert all(h.extracted_id != "shared" for h in res.retained)
    p.write_text(f"allow {shared}\n", encoding="utf-8")
    res = cross_community_filter(hits, part, report, load_allowdeny(p))
    assert res.review_queue[0].decision == "allow" and len(res.retained) == 2


def test_allowdeny_rejects_bad_lines(tmp_path):
    p = tmp_path / "ad.txt"
    p.write_text("maybe https://x.com\n", encoding="utf-8")
    with pytest.raises(ValueError, match="ad.txt:1"):
        load_allowdeny(p)


def test_hits_csv_roundtrip(tmp_path):
    _, _, hits, _ = _filter_setup()
    hits.append(MonetizationHit("blockchain", "bitcoin", "1abc", 9, None, ""))
    write_hits(hits, tmp_path / "h.csv")
    assert read_hits(tmp_path / "h.csv") == hits


def test_synthetic_planted_monetization(synthetic):
    occ = iter_occurrences(synthetic.corpus, load_shorteners())
    got = {(h.channel_id, h.category, h.platform_name, h.extracted_id) for h in detect_occurrences(occ, CATALOG)}
    want = {(m["channel_id"], m["category"], m["platform"], m["extracted_id"]) for m in synthetic.truth.monetization}
    assert got == want
