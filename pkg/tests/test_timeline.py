import math
import random
from datetime import datetime, timedelta, timezone

import pytest

from repgraph.errors import CycleDetected, DuplicateId, InsufficientData, MalformedLine, NoKnownAccounts, TemporalOrderError
from repgraph.features import AccountFeatures, BotTag
from repgraph.graph import all_node_scores
from repgraph.synthetic import SyntheticSpec, generate_synthetic
from repgraph.timeline import (
    GapBaseline,
    TweetKind,
    TweetNode,
    bot_account_fraction,
    bot_tag_fractions,
    build_tree,
    hourly_activity,
    non_reputed_fraction,
    parse_utc_offset,
    share_create_gap,
    timeline_report,
    tree_centralities,
)

T0 = datetime(2019, 11, 5, 12, 0, tzinfo=timezone.utc)
BOT = AccountFeatures(0.05, 0.05, 0.05, 0.05, 0.05)
HUMAN = AccountFeatures(0.9, 0.9, 0.9, 0.9, 0.9)


def tweet(tid, author, parent=None, at=T0):
    kind = TweetKind.RETWEET if parent is not None else TweetKind.ORIGINAL
    return TweetNode(tid, author, parent, at, kind)


def star(k):
    return [tweet("root", "a0")] + [tweet(f"r{i}", f"a{i + 1}", "root", T0 + timedelta(minutes=i)) for i in range(k)]


# -- tree construction ---------------------------------------------------------------


def test_star_tree():
    t = build_tree(star(3))
    assert t.roots == ("root",)
    assert t.children == {"root": ("r0", "r1", "r2")}
    assert len(t.edges) == 3 and not t.quarantined


def test_orphan_quarantined_with_descendants():
    nodes = star(2) + [
        tweet("orphan", "x", "outside", T0),
        tweet("child", "y", "orphan", T0 + timedelta(hours=1)),
    ]
    t = build_tree(nodes)
    assert set(t.quarantined) == {"orphan", "child"}
    assert "orphan" not in t.nodes
    assert len(t.nodes) == 3


def test_duplicate_ids():
    with pytest.raises(DuplicateId):
        build_tree([tweet("a", "u"), tweet("a", "v")])


def test_cycle_detected():
    with pytest.raises(CycleDetected):
        build_tree([tweet("a", "u", "b"), tweet("b", "v", "a"), tweet("c", "w")])
    with pytest.raises(CycleDetected):
        tweet("a", "u", "a")


def test_retweet_before_parent_rejected():
    with pytest.raises(TemporalOrderError):
        build_tree([tweet("a", "u", at=T0), tweet("b", "v", "a", T0 - timedelta(seconds=1))])


def test_kind_must_agree_with_parent():
    with pytest.raises(MalformedLine):
        TweetNode("a", "u", None, T0, TweetKind.RETWEET)
    with pytest.raises(MalformedLine):
        TweetNode("a", "u", "b", T0, TweetKind.ORIGINAL)


def test_synthetic_cascade_matches_ledger():
    ds = generate_synthetic(SyntheticSpec(n_accounts=250, n_tweets=500, seed=3, orphan_tweets=7))
    t = build_tree(ds.tweets)
    assert len(t.nodes) == 500 and len(t.quarantined) == 7
    assert sorted(map(list, t.edges)) == sorted(ds.ledger["retweet_edges"])
    assert len(t.edges) == sum(1 for n in t.nodes.values() if n.is_retweet)
    assert len(t.roots) == ds.ledger["original_count"]


# -- fractions ----------------------------------------------------------------------------


def _authored(n_authors, bot_authors, unknown=0):
    nodes = [tweet(f"t{i}", f"a{i}") for i in range(n_authors + unknown)]
    feats = {f"a{i}": (BOT if i < bot_authors else HUMAN) for i in range(n_authors)}
    return build_tree(nodes), feats


def test_bot_fraction_by_construction():
    t, feats = _authored(32, 4)
    f = bot_account_fraction(t, feats)
    assert f.value == 0.125 and (f.matched, f.known, f.unknown) == (4, 32, 0)


def test_bot_fraction_reports_unknown_authors():
    t, feats = _authored(32, 4, unknown=5)
    f = bot_account_fraction(t, feats)
    assert f.value == 0.125 and f.unknown == 5


def test_bot_fraction_counts_distinct_authors():
    nodes = [tweet("o", "bot")] + [tweet(f"r{i}", "bot", "o") for i in range(9)] + [tweet("h", "human")]
    t = build_tree(nodes)
    feats = {"bot": BOT, "human": HUMAN}
    assert bot_account_fraction(t, feats).value == 0.5
    assert bot_account_fraction(t, feats, per_tweet=True).value == pytest.approx(10 / 11)


def test_no_known_accounts():
    t, _ = _authored(3, 0)
    with pytest.raises(NoKnownAccounts):
        bot_account_fraction(t, {})


def test_non_reputed_fraction_by_construction():
    t, _ = _authored(200, 0)
    reps = {f"a{i}": (0.2 if i < 17 else 0.9) for i in range(200)}
    assert non_reputed_fraction(t, reps).value == 0.085
    assert non_reputed_fraction(t, {a: 0.95 for a in reps}).value == 0.0


def test_bot_tag_fractions_sum_to_one():
    rng = random.Random(1)
    t, _ = _authored(300, 0)
    feats = {f"a{i}": AccountFeatures(0.5, 0.5, 0.5, 0.5, rng.random()) for i in range(300)}
    fr = bot_tag_fractions(t, feats)
    assert math.fsum(fr.values()) == pytest.approx(1.0, abs=1e-12)
    assert fr[BotTag.BOT] == bot_account_fraction(t, feats).value


@pytest.mark.parametrize("seed", [0, 1])
def test_planted_fractions_recovered_exactly(seed):
    spec = SyntheticSpec(
        n_accounts=10000, bot_fraction=0.1256, non_reputed_fraction=0.0865,
        n_tweets=10000, edge_probability=0.0, seed=seed,
    )
    ds = generate_synthetic(spec)
    t = build_tree(ds.tweets)
    feats = {r.id: r.features for r in ds.accounts}
    from repgraph.reputation import active_reputation

    assert bot_account_fraction(t, feats).value == 0.1256 == ds.ledger["bot_fraction"]
    reps = {a: active_reputation(f) for a, f in feats.items()}
    assert non_reputed_fraction(t, reps).value == 0.0865 == ds.ledger["non_reputed_fraction"]


def test_fractions_invariant_under_reordering_and_relabeling():
    ds = generate_synthetic(SyntheticSpec(n_accounts=300, n_tweets=900, seed=5))
    feats = {r.id: r.features for r in ds.accounts}
    base = timeline_report(build_tree(ds.tweets), feats)
    shuffled = ds.tweets[:]
    random.Random(2).shuffle(shuffled)
    relabel = {n.tweet_id: f"x{n.tweet_id}" for n in ds.tweets}
    renamed = [
        TweetNode(relabel[n.tweet_id], n.author_id, relabel.get(n.parent_id), n.created_at, n.kind)
        for n in shuffled
    ]
    other = timeline_report(build_tree(renamed), feats)
    assert base.as_dict() == other.as_dict()


# -- share / create gap --------------------------------------------------------------------


def _gap_tree(bot_rt, bot_n, other_rt, other_n):
    nodes = [tweet("seed", "h0")]
    feats = {"h0": HUMAN, "b": BOT, "h": HUMAN}
    for i in range(bot_n):
        nodes.append(tweet(f"b{i}", "b", "seed" if i < bot_rt else None))
    for i in range(other_n):
        nodes.append(tweet(f"h{i}", "h", "seed" if i < other_rt else None))
    # the seed original counts toward the non-bot group
    return build_tree(nodes), feats


def test_gap_by_construction():
    t, feats = _gap_tree(6, 10, 5, 9)
    g = share_create_gap(t, feats)
    assert (g.bot_tweets, g.bot_retweets, g.other_tweets, g.other_retweets) == (10, 6, 10, 5)
    assert g.value == pytest.approx(0.10, abs=1e-15)


def test_gap_equal_rates_is_zero():
    t, feats = _gap_tree(4, 8, 5, 9)
    assert share_create_gap(t, feats).value == 0.0


def test_gap_within_bots_variant():
    t, feats = _gap_tree(6, 10, 5, 9)
    assert share_create_gap(t, feats, GapBaseline.WITHIN_BOTS).value == pytest.approx(0.2)


def test_gap_insufficient_data():
    t = build_tree([tweet("o", "h")])
    with pytest.raises(InsufficientData):
        share_create_gap(t, {"h": HUMAN})


def test_planted_gap_within_sampling_tolerance():
    spec = SyntheticSpec(
        n_accounts=2000, bot_fraction=0.15, n_tweets=10000,
        bot_retweet_rate=0.6, other_retweet_rate=0.5487, edge_probability=0.0, seed=11,
    )
    ds = generate_synthetic(spec)
    t = build_tree(ds.tweets)
    feats = {r.id: r.features for r in ds.accounts}
    gap = share_create_gap(t, feats)
    assert gap.value == pytest.approx(0.0513, abs=0.002)
    assert gap.value == pytest.approx(ds.ledger["share_create_gap"], abs=1e-12)


# -- hourly ------------------------------------------------------------------------------------


def test_hourly_single_bin():
    nodes = [tweet(f"t{i}", "a", at=T0.replace(hour=13, minute=i)) for i in range(7)]
    h = hourly_activity(build_tree(nodes), timedelta(0))
    assert h.counts[13] == 7 and sum(h.counts) == 7
    assert h.night_share == 0.0


def test_hourly_offset_shifts_bins():
    h = hourly_activity(build_tree([tweet("t", "a", at=T0.replace(hour=23))]), timedelta(hours=1))
    assert h.counts[0] == 1
    assert h.night_share == 1.0


def test_hourly_empty():
    h = hourly_activity(build_tree([]))
    assert h.counts == (0,) * 24 and h.night_share == 0.0


def test_hourly_uniform_within_binomial_band():
    rng = random.Random(8)
    total = 24000
    start = datetime(2019, 11, 1, tzinfo=timezone.utc)
    nodes = [tweet(f"t{i}", "a", at=start + timedelta(seconds=rng.randrange(30 * 86400))) for i in range(total)]
    h = hourly_activity(build_tree(nodes))
    sd = math.sqrt(total * (1 / 24) * (23 / 24))
    for count in h.counts:
        assert abs(count - total / 24) <= 3 * sd
    assert sum(h.counts) == total


@pytest.mark.parametrize(
    "text, minutes", [("+01:00", 60), ("-05:30", -330), ("Z", 0), ("+0200", 120), ("00", 0)]
)
def test_parse_offset(text, minutes):
    assert parse_utc_offset(text) == timedelta(minutes=minutes)


@pytest.mark.parametrize("text", ["+25:00", "1:00", "abc", "+01:75"])
def test_parse_offset_invalid(text):
    with pytest.raises(ValueError):
        parse_utc_offset(text)


# -- centralities -----------------------------------------------------------------------------


def test_star_centralities():
    scores = tree_centralities(build_tree(star(4)))
    assert scores["root"].out_degree == 4
    assert all(scores[f"r{i}"].in_degree == 1 for i in range(4))


def test_chain_betweenness():
    nodes = [tweet("a", "u"), tweet("b", "v", "a"), tweet("c", "w", "b")]
    assert tree_centralities(build_tree(nodes))["b"].betweenness == 1.0


def test_forest_centralities_match_graph_core():
    ds = generate_synthetic(SyntheticSpec(n_accounts=60, n_tweets=150, seed=9))
    t = build_tree(ds.tweets)
    from repgraph.graph import DirectedGraph

    g = DirectedGraph((n.tweet_id for n in ds.tweets), (tuple(e) for e in ds.ledger["retweet_edges"]))
    assert tree_centralities(t) == all_node_scores(g)


def test_report_histogram_sums_to_nodes():
    ds = generate_synthetic(SyntheticSpec(n_accounts=100, n_tweets=400, seed=2, orphan_tweets=3))
    feats = {r.id: r.features for r in ds.accounts}
    rep = timeline_report(build_tree(ds.tweets), feats, centralities=True)
    assert sum(rep.hourly_histogram) == rep.tweets == 400
    assert rep.quarantined == 3
    assert 0 <= rep.bot_account_fraction <= 1 and 0 <= rep.non_reputed_fraction <= 1
    assert len(rep.as_dict()["centralities"]) == 400
