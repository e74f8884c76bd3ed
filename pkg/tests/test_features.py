import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from repgraph.errors import FeatureOutOfRange, InsufficientData
from repgraph.features import (
    FEATURE_NAMES,
    AccountFeatures,
    BotTag,
    classify_bot,
    classify_bot_score,
    feature_correlations,
)

unit = st.floats(min_value=0.0, max_value=1.0)


def feats(bot=0.5, rest=0.5):
    return AccountFeatures(rest, rest, rest, rest, bot)


@pytest.mark.parametrize("bad", [-0.01, 1.3, float("nan"), float("inf")])
def test_out_of_range_rejected_not_clamped(bad):
    with pytest.raises(FeatureOutOfRange) as info:
        AccountFeatures(0.5, 0.5, 0.5, 0.5, bad)
    assert info.value.field == "bot"


def test_non_numeric_rejected():
    with pytest.raises(FeatureOutOfRange):
        AccountFeatures(0.5, "0.5", 0.5, 0.5, 0.5)
    with pytest.raises(FeatureOutOfRange):
        AccountFeatures(0.5, True, 0.5, 0.5, 0.5)


@pytest.mark.parametrize(
    "a_b, tag",
    [
        (0.02, BotTag.BOT),   # Bot_5
        (0.0, BotTag.BOT),
        (0.2, BotTag.BOT),
        (0.2000001, BotTag.DOUBTFUL),
        (0.5, BotTag.DOUBTFUL),
        (0.5000001, BotTag.MEDIUM),
        (0.8, BotTag.MEDIUM),
        (0.8000001, BotTag.REAL),
        (0.97, BotTag.REAL),  # vox_es
        (1.0, BotTag.REAL),
    ],
)
def test_bot_scale(a_b, tag):
    assert classify_bot(feats(bot=a_b)) is tag


def test_bot_labels():
    assert [t.label for t in BotTag] == ["Bot", "Doubtful", "Medium", "Real"]


@given(unit, unit)
def test_bot_scale_monotone(x, y):
    lo, hi = sorted((x, y))
    assert classify_bot_score(lo) <= classify_bot_score(hi)


def test_correlations_collinear_pair():
    corr = feature_correlations([feats(0.1, 0.1), feats(0.9, 0.9)])
    assert all(v == 1.0 for row in corr.values for v in row)
    assert corr.degenerate == ()


def test_correlations_need_two_accounts():
    with pytest.raises(InsufficientData):
        feature_correlations([feats()])


def test_correlations_flag_zero_variance():
    pop = [AccountFeatures(0.1 * i, 0.3, 0.05 * i, 1 - 0.1 * i, 0.02 * i) for i in range(1, 8)]
    corr = feature_correlations(pop)
    assert corr.degenerate == ("sentiment",)
    assert corr["sentiment", "user"] is None and corr["sentiment", "sentiment"] is None
    assert corr["user", "user"] == 1.0
    assert corr["user", "temporal"] == pytest.approx(-1.0)


def test_correlations_match_two_pass_oracle():
    rng = random.Random(42)
    pop = [AccountFeatures(*(rng.random() for _ in FEATURE_NAMES)) for _ in range(1000)]
    corr = feature_correlations(pop)
    expected = oracles.pearson_two_pass([[getattr(f, n) for f in pop] for n in FEATURE_NAMES])
    for i in range(5):
        for j in range(5):
            assert corr.values[i][j] == pytest.approx(expected[i][j], abs=1e-12)


@given(st.lists(st.tuples(unit, unit, unit, unit, unit), min_size=2, max_size=30))
def test_correlation_matrix_shape_invariants(rows):
    corr = feature_correlations([AccountFeatures(*r) for r in rows])
    for i in range(5):
        for j in range(5):
            v = corr.values[i][j]
            assert v == corr.values[j][i]
            if v is not None:
                assert -1.0 <= v <= 1.0
        if corr.values[i][i] is not None:
            assert corr.values[i][i] == 1.0


def test_correlation_rows_table():
    corr = feature_correlations([feats(0.1, 0.2), feats(0.3, 0.5), feats(0.4, 0.9)])
    rows = corr.rows()
    assert [r["feature"] for r in rows] == list(FEATURE_NAMES)
    assert rows[0]["user"] == 1.0


def test_correlation_matches_numpy_on_random_population():
    rng = np.random.default_rng(5)
    data = rng.random((200, 5))
    corr = feature_correlations(AccountFeatures(*row) for row in data.tolist())
    assert np.allclose(np.array(corr.values, dtype=float), np.corrcoef(data.T), atol=1e-12)
