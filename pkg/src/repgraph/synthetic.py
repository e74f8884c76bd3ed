"""Seeded synthetic account networks and retweet cascades with a ground-truth ledger.

Everything is drawn from one ``numpy`` PCG64 stream in a fixed order (classes,
features, follow edges, tweets), so a spec and seed reproduce the same bytes.
The bot clique is wired without touching the stream, which keeps the paired
``bot_clique`` on/off runs identical everywhere else.

Four account classes are planted so that bot share and non-reputed share can be
set independently:

* ``bot``            bot-tagged and non-reputed (low everything)
* ``disguised_bot``  bot-tagged but with high other features (not non-reputed)
* ``low_human``      not a bot, but non-reputed
* ``human``          neither
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from datetime import datetime, timedelta
from pathlib import Path
from typing import Any

import numpy as np

from .errors import InvalidSpec
from .features import FEATURE_NAMES, AccountFeatures, BotTag, classify_bot
from .ingest import AccountRecord, serialize_accounts, serialize_tweets
from .reputation import ReputationTag, active_reputation, classify_reputation
from .timeline import TweetKind, TweetNode

# (mean, sd, lo, hi) per feature. Means of the bot and party profiles follow
# the five bot and five party rows of the reference sample; supports are chosen
# so every draw lands in its planted bot/reputation bucket.
Profile = dict[str, tuple[float, float, float, float]]

BOT_PROFILE: Profile = {
    "user": (0.034, 0.02, 0.005, 0.35),
    "sentiment": (0.252, 0.15, 0.005, 0.35),
    "content": (0.172, 0.10, 0.005, 0.35),
    "temporal": (0.076, 0.04, 0.005, 0.35),
    "bot": (0.024, 0.02, 0.0, 0.2),
}
HUMAN_PROFILE: Profile = {
    "user": (0.958, 0.03, 0.6, 1.0),
    "sentiment": (0.952, 0.03, 0.6, 1.0),
    "content": (0.948, 0.03, 0.6, 1.0),
    "temporal": (0.904, 0.04, 0.6, 1.0),
    "bot": (0.932, 0.04, 0.6, 1.0),
}
DISGUISED_BOT_PROFILE: Profile = {
    **{k: (m, s, 0.85, 1.0) for k, (m, s, _, _) in HUMAN_PROFILE.items() if k != "bot"},
    "bot": (0.12, 0.05, 0.05, 0.2),
}
LOW_HUMAN_PROFILE: Profile = {
    **{k: v for k, v in BOT_PROFILE.items() if k != "bot"},
    "bot": (0.3, 0.05, 0.21, 0.35),
}

CLASSES = ("bot", "disguised_bot", "low_human", "human")
DEFAULT_PROFILES: dict[str, Profile] = {
    "bot": BOT_PROFILE,
    "disguised_bot": DISGUISED_BOT_PROFILE,
    "low_human": LOW_HUMAN_PROFILE,
    "human": HUMAN_PROFILE,
}
_EXPECTED_TAGS = {
    "bot": (True, True),
    "disguised_bot": (True, False),
    "low_human": (False, True),
    "human": (False, False),
}

@dataclass(frozen=True)
class SyntheticSpec:
    n_accounts: int = 1000
    bot_fraction: float = 0.1
    edge_probability: float = 0.01
    bot_clique: bool = False
    seed: int = 0
    # None: every bot is non-reputed and no human is
    non_reputed_fraction: float | None = None
    # None: two tweets per account
    n_tweets: int | None = None
    bot_retweet_rate: float = 0.6
    other_retweet_rate: float = 0.5
    orphan_tweets: int = 0
    days: int = 30
    start: str = "2019-11-01T00:00:00Z"
    feature_profiles: dict[str, Profile] = field(default_factory=dict)

    def validate(self) -> None:
        if int(self.n_accounts) != self.n_accounts or self.n_accounts < 1:
            raise InvalidSpec(f"n_accounts={self.n_accounts!r} must be a positive integer")
        for name in ("bot_fraction", "edge_probability", "bot_retweet_rate", "other_retweet_rate"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise InvalidSpec(f"{name}={value!r} must lie in [0, 1]")
        if self.non_reputed_fraction is not None and not (0.0 <= self.non_reputed_fraction <= 1.0):
            raise InvalidSpec(f"non_reputed_fraction={self.non_reputed_fraction!r} must lie in [0, 1]")
        if self.n_tweets is not None and self.n_tweets < self.n_accounts:
            raise InvalidSpec("n_tweets must be at least n_accounts (every account tweets once)")
        if self.orphan_tweets < 0 or self.days < 1:
            raise InvalidSpec("orphan_tweets must be >= 0 and days >= 1")
        if not (0 <= self.seed < 2**64):
            raise InvalidSpec(f"seed={self.seed!r} must be a 64-bit unsigned integer")
        unknown = set(self.feature_profiles) - set(CLASSES)
        if unknown:
            raise InvalidSpec(f"unknown profile classes {sorted(unknown)}")

    @property
    def tweet_count(self) -> int:
        return self.n_tweets if self.n_tweets is not None else 2 * self.n_accounts


@dataclass
class SyntheticDataset:
    accounts: list[AccountRecord]
    tweets: list[TweetNode]
    ledger: dict[str, Any]


def _round_count(x: float) -> int:
    return int(math.floor(x + 0.5))


def _truncnorm(rng: np.random.Generator, mean: float, sd: float, lo: float, hi: float, size: int) -> np.ndarray:
    """Normal(mean, sd) restricted to [lo, hi] by resampling rejected draws."""
    if not lo <= hi:
        raise InvalidSpec(f"empty support [{lo}, {hi}]")
    out = rng.normal(mean, sd, size)
    bad = (out < lo) | (out > hi)
    rounds = 0
    while bad.any():
        rounds += 1
        if rounds > 1000:
            raise InvalidSpec(f"profile N({mean}, {sd}) rarely falls in [{lo}, {hi}]")
        out[bad] = rng.normal(mean, sd, int(bad.sum()))
        bad = (out < lo) | (out > hi)
    return out


def _gnp_directed(rng: np.random.Generator, n: int, p: float) -> list[tuple[int, int]]:
    """Directed G(n, p) without self-loops via geometric skipping over the
    ``n * (n - 1)`` ordered pairs."""
    total = n * (n - 1)
    if p <= 0 or total == 0:
        return []
    if p >= 1:
        return [(u, v) for u in range(n) for v in range(n) if u != v]
    chunk = max(1024, int(total * p * 1.1))
    picks = []
    k = -1
    while True:
        gaps = rng.geometric(p, size=chunk)
        pos = k + np.cumsum(gaps)
        inside = pos[pos < total]
        picks.append(inside)
        if len(inside) < chunk:
            break
        k = int(pos[-1])
    idx = np.concatenate(picks)
    u = idx // (n - 1)
    r = idx % (n - 1)
    v = np.where(r < u, r, r + 1)
    return list(zip(u.tolist(), v.tolist()))


def generate_synthetic(spec: SyntheticSpec) -> SyntheticDataset:
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    n = spec.n_accounts
    width = len(str(n - 1))
    ids = [f"u{i:0{width}d}" for i in range(n)]

    # 1. classes
    n_bots = _round_count(spec.bot_fraction * n)
    nrf = spec.bot_fraction if spec.non_reputed_fraction is None else spec.non_reputed_fraction
    n_nonrep = _round_count(nrf * n)
    overlap = min(n_bots, n_nonrep)
    sizes = {
        "bot": overlap,
        "disguised_bot": n_bots - overlap,
        "low_human": n_nonrep - overlap,
    }
    sizes["human"] = n - sum(sizes.values())
    if sizes["human"] < 0:
        raise InvalidSpec("bot_fraction + non_reputed_fraction leave no room for the class mix")
    order = rng.permutation(n)
    cls_of = [""] * n
    start = 0
    members: dict[str, list[int]] = {}
    for c in CLASSES:
        members[c] = sorted(order[start:start + sizes[c]].tolist())
        for i in members[c]:
            cls_of[i] = c
        start += sizes[c]

    # 2. features
    profiles = {**DEFAULT_PROFILES, **spec.feature_profiles}
    feats: list[AccountFeatures | None] = [None] * n
    for c in CLASSES:
        idx = members[c]
        if not idx:
            continue
        cols = [_truncnorm(rng, *profiles[c][name], len(idx)) for name in FEATURE_NAMES]
        for row, i in enumerate(idx):
            feats[i] = AccountFeatures(*(float(col[row]) for col in cols))
    for i, f in enumerate(feats):
        is_bot = classify_bot(f) is BotTag.BOT
        is_nonrep = classify_reputation(active_reputation(f)) is ReputationTag.NON_REPUTED
        if (is_bot, is_nonrep) != _EXPECTED_TAGS[cls_of[i]]:
            raise InvalidSpec(f"profile for class {cls_of[i]!r} produced an off-class account {ids[i]}")

    # 3. follow graph
    edges = set(_gnp_directed(rng, n, spec.edge_probability))
    if spec.bot_clique:
        bots = members["bot"] + members["disguised_bot"]
        edges.update((u, v) for u in bots for v in bots if u != v)
    edge_list = sorted(edges)
    friends: list[list[int]] = [[] for _ in range(n)]
    followers: list[list[int]] = [[] for _ in range(n)]
    for u, v in edge_list:
        followers[u].append(v)
        friends[v].append(u)
    accounts = [
        AccountRecord(
            id=ids[i],
            handle=f"user{i:0{width}d}",
            features=feats[i],
            friends=tuple(ids[j] for j in sorted(friends[i])),
            followers=tuple(ids[j] for j in sorted(followers[i])),
        )
        for i in range(n)
    ]

    # 4. tweets
    tweets, tweet_ledger = _cascade(rng, spec, ids, cls_of)

    ledger = {
        "spec": _spec_dict(spec),
        "class_counts": {c: sizes[c] for c in CLASSES},
        "bot_count": n_bots,
        "non_reputed_count": n_nonrep,
        "bot_fraction": n_bots / n,
        "non_reputed_fraction": n_nonrep / n,
        "classes": {ids[i]: cls_of[i] for i in range(n)},
        "edge_count": len(edge_list),
        "edges": [[ids[u], ids[v]] for u, v in edge_list],
        **tweet_ledger,
    }
    return SyntheticDataset(accounts, tweets, ledger)


def _cascade(rng, spec: SyntheticSpec, ids: list[str], cls_of: list[str]):
    n = len(ids)
    n_tweets = spec.tweet_count
    authors = np.concatenate([np.arange(n), rng.integers(0, n, size=n_tweets - n)])
    is_bot = np.array([cls_of[a] in ("bot", "disguised_bot") for a in authors.tolist()])

    retweet = np.zeros(n_tweets, dtype=bool)
    counts = {}
    for label, mask, rate in (
        ("bot", is_bot, spec.bot_retweet_rate),
        ("other", ~is_bot, spec.other_retweet_rate),
    ):
        idx = np.flatnonzero(mask)
        k = _round_count(rate * len(idx))
        chosen = rng.permutation(idx)[:k]
        retweet[chosen] = True
        counts[label] = (len(idx), k)
    if retweet.all():
        raise InvalidSpec("a cascade needs at least one original tweet")

    # slot i of the timeline holds tweet perm[i]; slot 0 must be an original
    offsets = np.sort(rng.integers(0, spec.days * 86400, size=n_tweets))
    perm = rng.permutation(n_tweets)
    first_original = int(np.flatnonzero(~retweet[perm])[0])
    perm[[0, first_original]] = perm[[first_original, 0]]
    parents = [int(rng.integers(0, i)) if retweet[perm[i]] else -1 for i in range(n_tweets)]

    start = datetime.fromisoformat(spec.start.replace("Z", "+00:00"))
    width = len(str(n_tweets - 1))
    tid = [f"t{i:0{width}d}" for i in range(n_tweets)]
    tweets = []
    for i in range(n_tweets):
        k = perm[i]
        tweets.append(TweetNode(
            tweet_id=tid[i],
            author_id=ids[int(authors[k])],
            parent_id=tid[parents[i]] if parents[i] >= 0 else None,
            created_at=start + timedelta(seconds=int(offsets[i])),
            kind=TweetKind.RETWEET if retweet[k] else TweetKind.ORIGINAL,
        ))

    owidth = len(str(max(spec.orphan_tweets - 1, 0)))
    for j in range(spec.orphan_tweets):
        tweets.append(TweetNode(
            tweet_id=f"o{j:0{owidth}d}",
            author_id=ids[int(rng.integers(0, n))],
            parent_id=f"missing{j:0{owidth}d}",
            created_at=start + timedelta(seconds=int(rng.integers(0, spec.days * 86400))),
            kind=TweetKind.RETWEET,
        ))

    (bot_n, bot_rt), (other_n, other_rt) = counts["bot"], counts["other"]
    bot_rate = bot_rt / bot_n if bot_n else None
    other_rate = other_rt / other_n if other_n else None
    gap = bot_rate - other_rate if bot_rate is not None and other_rate is not None else None
    return tweets, {
        "tweet_count": n_tweets,
        "orphan_count": spec.orphan_tweets,
        "retweet_count": int(retweet.sum()),
        "original_count": int((~retweet).sum()),
        "bot_tweets": bot_n,
        "bot_retweets": bot_rt,
        "other_tweets": other_n,
        "other_retweets": other_rt,
        "planted_share_create_gap": spec.bot_retweet_rate - spec.other_retweet_rate,
        "share_create_gap": gap,
        "retweet_edges": [[tid[parents[i]], tid[i]] for i in range(n_tweets) if parents[i] >= 0],
    }


def _spec_dict(spec: SyntheticSpec) -> dict[str, Any]:
    d = asdict(spec)
    d["feature_profiles"] = {c: {k: list(v) for k, v in p.items()} for c, p in spec.feature_profiles.items()}
    return d


def write_dataset(ds: SyntheticDataset, out_dir: str | Path) -> dict[str, Path]:
    """Write ``accounts.jsonl``, ``tweets.jsonl`` and ``ledger.json`` under ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "accounts": out / "accounts.jsonl",
        "tweets": out / "tweets.jsonl",
        "ledger": out / "ledger.json",
    }
    with open(paths["accounts"], "w", encoding="utf-8", newline="\n") as fh:
        serialize_accounts(ds.accounts, fh)
    with open(paths["tweets"], "w", encoding="utf-8", newline="\n") as fh:
        serialize_tweets(ds.tweets, fh)
    with open(paths["ledger"], "w", encoding="utf-8", newline="\n") as fh:
        json.dump(ds.ledger, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return paths
