"""Tweet tree reconstruction and timeline forensics.

A timeline is a forest: original tweets are roots and every retweet hangs off
the tweet it shares. Retweets whose parent lies outside the captured window
(and everything below them) are quarantined rather than grafted somewhere,
and all report metrics are computed over the attached nodes only.
"""

from __future__ import annotations

import enum
import logging
from collections import Counter
from dataclasses import asdict, dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Hashable, Iterable, Mapping

from .config import ScoringConfig
from .errors import (
    CycleDetected,
    DuplicateId,
    InsufficientData,
    MalformedLine,
    NoKnownAccounts,
    TemporalOrderError,
)
from .features import AccountFeatures, BotTag, classify_bot
from .graph import DirectedGraph, NodeScore, all_node_scores
from .reputation import ReputationTag, active_reputation, classify_reputation

logger = logging.getLogger(__name__)

AccountId = Hashable
TweetId = Hashable

DEFAULT_UTC_OFFSET = timedelta(hours=1)
NIGHT_HOURS = range(0, 6)


class TweetKind(enum.Enum):
    ORIGINAL = "original"
    RETWEET = "retweet"


@dataclass(frozen=True)
class TweetNode:
    tweet_id: TweetId
    author_id: AccountId
    parent_id: TweetId | None
    created_at: datetime
    kind: TweetKind

    def __post_init__(self) -> None:
        if (self.kind is TweetKind.RETWEET) != (self.parent_id is not None):
            raise MalformedLine(
                f"tweet {self.tweet_id!r}: kind={self.kind.value} but parent_id={self.parent_id!r}"
            )
        if self.created_at.tzinfo is None:
            raise MalformedLine(f"tweet {self.tweet_id!r}: created_at must be timezone-aware")
        if self.parent_id == self.tweet_id:
            raise CycleDetected(f"tweet {self.tweet_id!r} retweets itself")

    @property
    def is_retweet(self) -> bool:
        return self.kind is TweetKind.RETWEET


@dataclass(frozen=True)
class TimelineTree:
    nodes: Mapping[TweetId, TweetNode]
    roots: tuple[TweetId, ...]
    children: Mapping[TweetId, tuple[TweetId, ...]]
    quarantined: Mapping[TweetId, TweetNode] = field(default_factory=dict)

    @property
    def edges(self) -> list[tuple[TweetId, TweetId]]:
        return [(p, c) for p in sorted(self.children) for c in self.children[p]]

    def __len__(self) -> int:
        return len(self.nodes)

    def to_graph(self) -> DirectedGraph:
        """Tweet graph with parent -> retweet edges."""
        return DirectedGraph(self.nodes, self.edges)


def build_tree(nodes: Iterable[TweetNode]) -> TimelineTree:
    """Assemble the tweet forest.

    Raises :class:`DuplicateId` on repeated tweet ids, :class:`CycleDetected`
    when parent links loop, and :class:`TemporalOrderError` when a retweet
    predates its parent.
    """
    by_id: dict[TweetId, TweetNode] = {}
    for node in nodes:
        if node.tweet_id in by_id:
            raise DuplicateId(f"duplicate tweet_id {node.tweet_id!r}")
        by_id[node.tweet_id] = node

    # status: True = attached to an original, False = quarantined
    status: dict[TweetId, bool] = {}
    for start in by_id:
        path = []
        on_path = set()
        cur = start
        while cur not in status:
            node = by_id.get(cur)
            if node is None:
                verdict = False  # parent outside the capture window
                break
            if cur in on_path:
                raise CycleDetected(f"parent links form a cycle through tweet {cur!r}")
            if node.parent_id is None:
                status[cur] = True
                verdict = True
                break
            path.append(cur)
            on_path.add(cur)
            cur = node.parent_id
        else:
            verdict = status[cur]
        for t in path:
            status[t] = verdict

    attached = {t: n for t, n in by_id.items() if status[t]}
    quarantined = {t: n for t, n in by_id.items() if not status[t]}
    children: dict[TweetId, list[TweetId]] = {}
    for t, node in attached.items():
        if node.parent_id is not None:
            parent = attached[node.parent_id]
            if node.created_at < parent.created_at:
                raise TemporalOrderError(
                    f"retweet {t!r} ({node.created_at.isoformat()}) predates its parent "
                    f"{parent.tweet_id!r} ({parent.created_at.isoformat()})"
                )
            children.setdefault(node.parent_id, []).append(t)
    if quarantined:
        logger.warning("quarantined %d orphan tweets", len(quarantined))
    return TimelineTree(
        nodes=dict(sorted(attached.items())),
        roots=tuple(sorted(t for t, n in attached.items() if n.parent_id is None)),
        children={p: tuple(sorted(c)) for p, c in sorted(children.items())},
        quarantined=dict(sorted(quarantined.items())),
    )


# -- forensics -------------------------------------------------------------------


@dataclass(frozen=True)
class Fraction:
    """Share of known authors (or tweets) that fall in a class."""

    value: float
    matched: int
    known: int
    unknown: int

    def __float__(self) -> float:
        return self.value


def _authors(t: TimelineTree) -> set[AccountId]:
    return {n.author_id for n in t.nodes.values()}


def _fraction(t: TimelineTree, is_match, is_known, per_tweet: bool) -> Fraction:
    units = [n.author_id for n in t.nodes.values()] if per_tweet else sorted(_authors(t))
    known = [a for a in units if is_known(a)]
    if not known:
        raise NoKnownAccounts("no author in the timeline has known scores")
    matched = sum(1 for a in known if is_match(a))
    return Fraction(matched / len(known), matched, len(known), len(units) - len(known))


def bot_account_fraction(
    t: TimelineTree,
    features_of: Mapping[AccountId, AccountFeatures],
    per_tweet: bool = False,
) -> Fraction:
    """Share of distinct known authors tagged Bot.

    Authors without features are reported as ``unknown``; since any of them
    could be a bot, the value is a lower bound on the true share.
    """
    return _fraction(
        t,
        lambda a: classify_bot(features_of[a]) is BotTag.BOT,
        lambda a: a in features_of,
        per_tweet,
    )


def bot_tag_fractions(t: TimelineTree, features_of: Mapping[AccountId, AccountFeatures]) -> dict[BotTag, float]:
    authors = [a for a in sorted(_authors(t)) if a in features_of]
    if not authors:
        raise NoKnownAccounts("no author in the timeline has known scores")
    counts = Counter(classify_bot(features_of[a]) for a in authors)
    return {tag: counts.get(tag, 0) / len(authors) for tag in BotTag}


def non_reputed_fraction(
    t: TimelineTree,
    reputation_of: Mapping[AccountId, float],
    per_tweet: bool = False,
) -> Fraction:
    """Share of distinct known authors whose active reputation is NonReputed."""
    return _fraction(
        t,
        lambda a: classify_reputation(reputation_of[a]) is ReputationTag.NON_REPUTED,
        lambda a: a in reputation_of,
        per_tweet,
    )


class GapBaseline(enum.Enum):
    OTHERS = "others"
    WITHIN_BOTS = "within-bots"


@dataclass(frozen=True)
class ShareCreateGap:
    value: float
    bot_tweets: int
    bot_retweets: int
    other_tweets: int
    other_retweets: int
    baseline: GapBaseline

    def __float__(self) -> float:
        return self.value


def share_create_gap(
    t: TimelineTree,
    features_of: Mapping[AccountId, AccountFeatures],
    baseline: GapBaseline = GapBaseline.OTHERS,
) -> ShareCreateGap:
    """How much more bots share than create.

    With the ``others`` baseline: bot retweet rate minus the retweet rate of
    every other known author. With ``within-bots``: bot retweet rate minus bot
    original rate. Tweets by unknown authors are ignored.
    """
    bot_n = bot_rt = other_n = other_rt = 0
    for node in t.nodes.values():
        f = features_of.get(node.author_id)
        if f is None:
            continue
        if classify_bot(f) is BotTag.BOT:
            bot_n += 1
            bot_rt += node.is_retweet
        else:
            other_n += 1
            other_rt += node.is_retweet
    if bot_n == 0:
        raise InsufficientData("share/create gap needs at least one bot-authored tweet")
    bot_rate = bot_rt / bot_n
    if baseline is GapBaseline.WITHIN_BOTS:
        value = bot_rate - (bot_n - bot_rt) / bot_n
    else:
        if other_n == 0:
            raise InsufficientData("share/create gap needs at least one non-bot tweet")
        value = bot_rate - other_rt / other_n
    return ShareCreateGap(value, bot_n, bot_rt, other_n, other_rt, baseline)


@dataclass(frozen=True)
class HourlyActivity:
    counts: tuple[int, ...]
    night_share: float
    utc_offset: timedelta


def hourly_activity(t: TimelineTree, utc_offset: timedelta = DEFAULT_UTC_OFFSET) -> HourlyActivity:
    """Tweets per local-clock hour plus the share posted between 00:00 and 06:00."""
    counts = [0] * 24
    tz = timezone(utc_offset)
    for node in t.nodes.values():
        counts[node.created_at.astimezone(tz).hour] += 1
    total = sum(counts)
    night = sum(counts[h] for h in NIGHT_HOURS)
    return HourlyActivity(tuple(counts), night / total if total else 0.0, utc_offset)


def tree_centralities(
    t: TimelineTree,
    config: ScoringConfig | None = None,
    workers: int = 1,
) -> dict[TweetId, NodeScore]:
    return all_node_scores(t.to_graph(), config, workers=workers)


# -- report ------------------------------------------------------------------------


@dataclass
class TimelineReport:
    tweets: int
    quarantined: int
    roots: int
    retweets: int
    distinct_accounts: int
    unknown_accounts: int
    bot_account_fraction: float | None
    non_reputed_fraction: float | None
    share_create_gap: float | None
    gap_baseline: str
    hourly_histogram: list[int]
    night_share: float
    utc_offset: str
    per_tweet: bool = False
    centralities: dict[TweetId, NodeScore] | None = None

    def as_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__ if k != "centralities"}
        if self.centralities is not None:
            d["centralities"] = {str(k): asdict(v) for k, v in self.centralities.items()}
        return d


def format_offset(offset: timedelta) -> str:
    minutes = int(offset.total_seconds() // 60)
    sign = "+" if minutes >= 0 else "-"
    minutes = abs(minutes)
    return f"{sign}{minutes // 60:02d}:{minutes % 60:02d}"


def timeline_report(
    t: TimelineTree,
    features_of: Mapping[AccountId, AccountFeatures],
    reputation_of: Mapping[AccountId, float] | None = None,
    *,
    utc_offset: timedelta = DEFAULT_UTC_OFFSET,
    baseline: GapBaseline = GapBaseline.OTHERS,
    per_tweet: bool = False,
    centralities: bool = False,
    config: ScoringConfig | None = None,
) -> TimelineReport:
    """Every timeline metric in one record. Metrics that lack data are ``None``."""
    if reputation_of is None:
        reputation_of = {a: active_reputation(f) for a, f in features_of.items()}
    authors = _authors(t)

    def attempt(fn):
        try:
            return float(fn())
        except InsufficientData as exc:
            logger.warning("%s", exc)
            return None

    hourly = hourly_activity(t, utc_offset)
    return TimelineReport(
        tweets=len(t.nodes),
        quarantined=len(t.quarantined),
        roots=len(t.roots),
        retweets=sum(1 for n in t.nodes.values() if n.is_retweet),
        distinct_accounts=len(authors),
        unknown_accounts=sum(1 for a in authors if a not in features_of),
        bot_account_fraction=attempt(lambda: bot_account_fraction(t, features_of, per_tweet)),
        non_reputed_fraction=attempt(lambda: non_reputed_fraction(t, reputation_of, per_tweet)),
        share_create_gap=attempt(lambda: share_create_gap(t, features_of, baseline)),
        gap_baseline=baseline.value,
        hourly_histogram=list(hourly.counts),
        night_share=hourly.night_share,
        utc_offset=format_offset(utc_offset),
        per_tweet=per_tweet,
        centralities=tree_centralities(t, config) if centralities and t.nodes else None,
    )


def parse_utc_offset(text: str) -> timedelta:
    """``+01:00`` / ``-0530`` / ``Z`` -> timedelta."""
    text = text.strip()
    if text in ("Z", "z", "UTC"):
        return timedelta(0)
    sign = -1 if text.startswith("-") else 1
    body = text.lstrip("+-").replace(":", "")
    if not body.isdigit() or len(body) not in (2, 4):
        raise ValueError(f"invalid UTC offset {text!r}")
    hours, minutes = int(body[:2]), int(body[2:] or 0)
    offset = sign * timedelta(hours=hours, minutes=minutes)
    if abs(offset) >= timedelta(hours=24) or minutes >= 60:
        raise ValueError(f"invalid UTC offset {text!r}")
    return offset

