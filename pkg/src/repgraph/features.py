"""Per-account feature scores, the bot scale and feature correlations."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import FeatureOutOfRange, InsufficientData

FEATURE_NAMES = ("user", "sentiment", "content", "temporal", "bot")


@dataclass(frozen=True)
class AccountFeatures:
    """Five unit-interval scores for one account.

    ``bot`` is oriented so that LOW values mean automation (0.02 is a bot,
    0.97 a human), the same way as every other feature.
    """

    user: float
    sentiment: float
    content: float
    temporal: float
    bot: float

    def __post_init__(self) -> None:
        for name in FEATURE_NAMES:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise FeatureOutOfRange(name, value)
            if not (0.0 <= value <= 1.0):  # also rejects NaN
                raise FeatureOutOfRange(name, value)
            object.__setattr__(self, name, float(value))

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.user, self.sentiment, self.content, self.temporal, self.bot)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(FEATURE_NAMES, self.as_tuple()))

    @classmethod
    def from_mapping(cls, values: Mapping[str, float]) -> AccountFeatures:
        return cls(**{name: values[name] for name in FEATURE_NAMES})


class BotTag(enum.IntEnum):
    """Bot scale buckets, ordered from most to least automated."""

    BOT = 0
    DOUBTFUL = 1
    MEDIUM = 2
    REAL = 3

    @property
    def label(self) -> str:
        return self.name.capitalize()


# (inclusive upper bound, tag); the first bucket also includes 0.
_BOT_SCALE = ((0.2, BotTag.BOT), (0.5, BotTag.DOUBTFUL), (0.8, BotTag.MEDIUM), (1.0, BotTag.REAL))


def classify_bot_score(a_b: float) -> BotTag:
    if not (0.0 <= a_b <= 1.0):
        raise FeatureOutOfRange("bot", a_b)
    for upper, tag in _BOT_SCALE:
        if a_b <= upper:
            return tag
    raise AssertionError("unreachable")


def classify_bot(f: AccountFeatures) -> BotTag:
    return classify_bot_score(f.bot)


# -- correlations ----------------------------------------------------------------


@dataclass(frozen=True)
class CorrelationMatrix:
    """Pairwise Pearson coefficients between the five features.

    Entries touching a zero-variance feature are ``None`` (undefined) instead
    of NaN; such features are listed in ``degenerate``.
    """

    names: tuple[str, ...]
    values: tuple[tuple[float | None, ...], ...]
    degenerate: tuple[str, ...]
    size: int

    def __getitem__(self, key: tuple[str, str]) -> float | None:
        a, b = key
        return self.values[self.names.index(a)][self.names.index(b)]

    def rows(self) -> list[dict[str, object]]:
        """Table form, one dict per feature, ready for CSV/JSON emission."""
        return [
            {"feature": a, **{b: self.values[i][j] for j, b in enumerate(self.names)}}
            for i, a in enumerate(self.names)
        ]


def feature_correlations(population: Iterable[AccountFeatures]) -> CorrelationMatrix:
    """Pearson correlation matrix over a population, computed in two passes
    (means first, then centered cross products)."""
    data = np.array([f.as_tuple() for f in population], dtype=float).reshape(-1, len(FEATURE_NAMES))
    n = data.shape[0]
    if n < 2:
        raise InsufficientData(f"feature correlations need at least 2 accounts, got {n}")
    centered = data - data.mean(axis=0)
    cross = centered.T @ centered
    ss = np.diag(cross).copy()
    # variance indistinguishable from rounding noise on the mean counts as zero
    scale = np.maximum(np.abs(data).max(axis=0), 1.0)
    degenerate = ss <= n * (64 * np.finfo(float).eps * scale) ** 2

    k = len(FEATURE_NAMES)
    values: list[tuple[float | None, ...]] = []
    for i in range(k):
        row: list[float | None] = []
        for j in range(k):
            if degenerate[i] or degenerate[j]:
                row.append(None)
            elif i == j:
                row.append(1.0)
            else:
                r = cross[i, j] / math.sqrt(ss[i] * ss[j])
                row.append(min(1.0, max(-1.0, float(r))))
        values.append(tuple(row))
    # exact symmetry regardless of floating-point matmul details
    for i in range(k):
        for j in range(i + 1, k):
            values[j] = values[j][:i] + (values[i][j],) + values[j][i + 1:]
    return CorrelationMatrix(
        names=FEATURE_NAMES,
        values=tuple(values),
        degenerate=tuple(name for name, d in zip(FEATURE_NAMES, degenerate) if d),
        size=n,
    )

