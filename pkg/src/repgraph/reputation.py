"""Active, passive and total reputation of accounts.

Active reputation is the geometric mean of an account's five feature scores.
Passive reputation blends the mean active reputation of the friends net and of
the followers net. Total reputation blends the two. Neighbours contribute their
*active* reputation only, so scoring is a single non-recursive pass.
"""

from __future__ import annotations

import enum
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

from .config import ScoringConfig
from .errors import InvalidConfig
from .features import AccountFeatures, BotTag, classify_bot
from .graph import DirectedGraph

logger = logging.getLogger(__name__)

AccountId = Hashable

# provenance flags
FLAG_EMPTY_FRIENDS = "empty_friends"
FLAG_EMPTY_FOLLOWERS = "empty_followers"
FLAG_MISSING_NEIGHBORS = "missing_neighbors"


class ReputationTag(enum.IntEnum):
    NON_REPUTED = 0
    DOUBTFUL = 1
    TRUSTWORTHY = 2
    REPUTED = 3

    @property
    def label(self) -> str:
        return {
            ReputationTag.NON_REPUTED: "NonReputed",
            ReputationTag.DOUBTFUL: "Doubtful",
            ReputationTag.TRUSTWORTHY: "Trustworthy",
            ReputationTag.REPUTED: "Reputed",
        }[self]


_REPUTATION_SCALE = (
    (0.35, ReputationTag.NON_REPUTED),
    (0.50, ReputationTag.DOUBTFUL),
    (0.85, ReputationTag.TRUSTWORTHY),
    (1.00, ReputationTag.REPUTED),
)


def classify_reputation(r_active: float) -> ReputationTag:
    """Bucket an active reputation; each upper bound is inclusive."""
    if not (0.0 <= r_active <= 1.0):
        raise ValueError(f"active reputation {r_active!r} outside [0, 1]")
    for upper, tag in _REPUTATION_SCALE:
        if r_active <= upper:
            return tag
    raise AssertionError("unreachable")


def active_reputation(f: AccountFeatures) -> float:
    """Geometric mean of the five features.

    Evaluated as ``exp(mean(log x))`` so tiny products do not underflow; any
    zero feature gives exactly 0.
    """
    values = f.as_tuple()
    if min(values) == 0.0:
        return 0.0
    r = math.exp(math.fsum(math.log(x) for x in values) / len(values))
    return min(r, 1.0)


def total_reputation(r_active: float, r_passive: float, config: ScoringConfig | None = None) -> float:
    gamma = (config or ScoringConfig()).gamma
    r = gamma * r_active + (1.0 - gamma) * r_passive
    # keep the blend inside its endpoints despite rounding
    return min(max(r, min(r_active, r_passive)), max(r_active, r_passive))


@dataclass(frozen=True)
class Neighborhood:
    """Friends (accounts ``v`` follows, information flows in) and followers."""

    friends: frozenset = frozenset()
    followers: frozenset = frozenset()


def neighborhoods_from_graph(g: DirectedGraph) -> dict[AccountId, Neighborhood]:
    """Friends are predecessors and followers are successors in a friend -> follower graph."""
    return {
        v: Neighborhood(frozenset(g.predecessors(v)), frozenset(g.successors(v)))
        for v in g.vertices
    }


@dataclass(frozen=True)
class PassiveReputation:
    r_in: float
    r_out: float
    r_passive: float
    flags: tuple[str, ...] = ()
    missing: int = 0


def _net_mean(
    owner: AccountId,
    members: Iterable[AccountId],
    r_active_of: Mapping[AccountId, float],
) -> tuple[float | None, int]:
    """Mean active reputation over the resolvable members of one net."""
    values = []
    missing = 0
    for u in members:
        if u == owner:
            continue
        r = r_active_of.get(u)
        if r is None:
            missing += 1
        else:
            values.append(r)
    if not values:
        return None, missing
    # fsum is exact, so the mean does not depend on member order
    return math.fsum(values) / len(values), missing


def _passive(
    v: AccountId,
    nbhd: Neighborhood,
    r_active_of: Mapping[AccountId, float],
    config: ScoringConfig,
) -> PassiveReputation:
    own = r_active_of[v]
    flags = []
    r_in, miss_in = _net_mean(v, nbhd.friends, r_active_of)
    r_out, miss_out = _net_mean(v, nbhd.followers, r_active_of)
    if r_in is None:
        r_in = own
        flags.append(FLAG_EMPTY_FRIENDS)
    if r_out is None:
        r_out = own
        flags.append(FLAG_EMPTY_FOLLOWERS)
    if miss_in or miss_out:
        flags.append(FLAG_MISSING_NEIGHBORS)
    r_p = config.omega_in * r_in + config.omega_out * r_out
    r_p = min(max(r_p, min(r_in, r_out)), max(r_in, r_out))
    return PassiveReputation(r_in, r_out, r_p, tuple(flags), miss_in + miss_out)


def passive_reputation(
    v: AccountId,
    neighborhoods: Mapping[AccountId, Neighborhood],
    features_of: Mapping[AccountId, AccountFeatures],
    config: ScoringConfig | None = None,
) -> PassiveReputation:
    """Weighted mean of the neighbours' active reputations.

    A net with no scoreable member falls back to ``v``'s own active
    reputation and is reported in ``flags``; neighbours without features are
    skipped and counted in ``missing``.
    """
    config = config or ScoringConfig()
    nbhd = neighborhoods.get(v, Neighborhood())
    wanted = set(nbhd.friends) | set(nbhd.followers) | {v}
    r_active_of = {u: active_reputation(features_of[u]) for u in wanted if u in features_of}
    return _passive(v, nbhd, r_active_of, config)


def passive_from_nets(r_in: float, r_out: float, config: ScoringConfig | None = None) -> float:
    """Passive reputation from already-averaged friends/followers means."""
    config = config or ScoringConfig()
    return config.omega_in * r_in + config.omega_out * r_out


@dataclass(frozen=True)
class ReputationVector:
    r_active: float
    r_passive_out: float
    r_passive_in: float
    r_passive: float
    r_total: float


@dataclass(frozen=True)
class ScoredAccount:
    id: AccountId
    handle: str
    features: AccountFeatures
    reputation: ReputationVector
    bot_tag: BotTag
    reputation_tag: ReputationTag
    flags: tuple[str, ...] = field(default=())
    missing_neighbors: int = 0


def score_population(
    features_of: Mapping[AccountId, AccountFeatures],
    neighborhoods: Mapping[AccountId, Neighborhood],
    config: ScoringConfig | None = None,
    handles: Mapping[AccountId, str] | None = None,
    threads: int = 1,
) -> list[ScoredAccount]:
    """Score every account that has features.

    Phase one computes all active reputations; phase two reads them to build
    passive and total reputation. Output is sorted by total reputation, then id.
    """
    config = config or ScoringConfig()
    if threads < 1:
        raise InvalidConfig(f"threads={threads!r} must be >= 1")
    handles = handles or {}
    ids: Sequence[AccountId] = sorted(features_of)

    r_active_of = {v: active_reputation(features_of[v]) for v in ids}

    def score(v: AccountId) -> ScoredAccount:
        p = _passive(v, neighborhoods.get(v, Neighborhood()), r_active_of, config)
        r_a = r_active_of[v]
        vec = ReputationVector(r_a, p.r_out, p.r_in, p.r_passive, total_reputation(r_a, p.r_passive, config))
        return ScoredAccount(
            id=v,
            handle=handles.get(v, str(v)),
            features=features_of[v],
            reputation=vec,
            bot_tag=classify_bot(features_of[v]),
            reputation_tag=classify_reputation(r_a),
            flags=p.flags,
            missing_neighbors=p.missing,
        )

    if threads == 1:
        scored = [score(v) for v in ids]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            scored = list(pool.map(score, ids, chunksize=1))

    n_flagged = sum(1 for s in scored if s.flags)
    if n_flagged:
        logger.warning("%d of %d accounts carry provenance flags", n_flagged, len(scored))
    scored.sort(key=lambda s: (s.reputation.r_total, s.id))
    return scored
