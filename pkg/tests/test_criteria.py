"""Penalized criterion and AIC/BIC profile scores."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pindex.criteria import IcConfig, argmin_tiebreak, bic_score, ic_value, profile_score
from pindex.errors import ParameterError
from pindex.linalg import Dataset, FitSummary, fit_columns
from pindex.models import Family, FamilyConfig
from pindex.subset import exhaustive_select, select_best


def summary(rss, rank, n):
    return FitSummary(rss, rank, np.zeros(rank), np.zeros(n), rss / max(1, n - rank), n)


def test_ic_reduces_to_log_n_penalty():
    n, s2 = 200, 2.5
    assert ic_value(summary(n * s2, 1, n), n, IcConfig(), s2) == pytest.approx(s2 * math.log(n))


def test_ic_hand_arithmetic():
    got = ic_value(summary(150.0, 4, 200), 200, IcConfig(), 1.0)
    assert got == pytest.approx(150.0 + 4 * math.log(200.0) - 200.0, rel=1e-14)
    assert got == pytest.approx(-28.8067, abs=1e-4)


def test_ic_rejects_bad_reference_variance():
    with pytest.raises(ParameterError):
        ic_value(summary(1.0, 1, 10), 10, IcConfig(), 0.0)
    with pytest.raises(ParameterError):
        IcConfig(lambda_n=0.1).check_n(200)


@settings(max_examples=60, deadline=None)
@given(
    st.integers(20, 500),
    st.integers(1, 10),
    st.floats(0.3, 3.0),
    st.floats(0.0, 2.0),
    st.integers(0, 2**31 - 1),
)
def test_ic_identity_at_estimated_variance(n, r, lam, d, seed):
    rng = np.random.default_rng(seed)
    cfg = IcConfig(lambda_n=lam, d=d)
    if lam * math.log(n) < 1:
        return
    A = rng.standard_normal((n, r))
    fit = fit_columns(A, rng.standard_normal(n))
    s2 = fit.rss / (n - fit.rank)
    expected = s2 * ((lam * math.log(n) - 1) * fit.rank + d * math.sqrt(n) * math.log(n))
    assert ic_value(fit, n, cfg, s2) == pytest.approx(expected, rel=1e-10, abs=1e-10 * s2)


def test_bic_prefers_smaller_rank_at_equal_rss():
    assert bic_score(summary(10.0, 3, 50), 50) < bic_score(summary(10.0, 4, 50), 50)


def test_bic_tie_resolved_to_smaller_rank():
    n = 120
    small = summary(37.0, 3, n)
    big = summary(37.0 * math.exp(-math.log(n) / n), 4, n)
    a, b = bic_score(small, n), bic_score(big, n)
    assert a == pytest.approx(b, abs=1e-9)
    items = [("big", big), ("small", small)]
    pick = argmin_tiebreak(
        items,
        score=lambda it: bic_score(it[1], n),
        rank=lambda it: it[1].rank,
        terms=lambda it: (),
    )
    assert pick[0] == "small"


def test_perfect_fit_sentinel():
    assert profile_score(0.0, 3, 10, 2.0) == -math.inf


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 7), st.floats(0.01, 50.0), st.integers(0, 2**31 - 1))
def test_bic_selection_scale_invariant(p, c, seed):
    r = np.random.default_rng(seed)
    X = r.standard_normal((40, p))
    y = X @ (r.standard_normal(p) * r.integers(0, 2, p)) + r.standard_normal(40)
    fam = Family(FamilyConfig("subset", p))
    a = select_best(Dataset(y, X), fam, "bic")
    b = select_best(Dataset(c * y, X), fam, "bic")
    assert a.model == b.model


def brute_force_argmin(ds, p, penalty):
    n = ds.n
    best = None
    for s in range(1, p + 1):
        for combo in itertools.combinations(range(p), s):
            A = np.column_stack([np.ones(n), ds.X[:, list(combo)]])
            beta = np.linalg.lstsq(A, ds.y, rcond=None)[0]
            rss = float(np.sum((ds.y - A @ beta) ** 2))
            score = n * math.log(rss / n) + penalty * (s + 1)
            if best is None or score < best[0] - 1e-9:
                best = (score, tuple(j + 1 for j in combo))
    return best[1]


@pytest.mark.parametrize("criterion", ["aic", "bic"])
@pytest.mark.parametrize("seed", range(6))
def test_selection_matches_brute_force(criterion, seed):
    r = np.random.default_rng(seed)
    p = 8
    X = r.standard_normal((80, p))
    beta = np.array([2.0, 0.0, 0.7, 0.0, 0.3, 0.0, 0.0, 1.0])
    ds = Dataset(X @ beta + r.standard_normal(80), X)
    fam = Family(FamilyConfig("subset", p))
    penalty = math.log(80) if criterion == "bic" else 2.0
    expected = brute_force_argmin(ds, p, penalty)
    assert select_best(ds, fam, criterion).model.term_indices == expected
    assert exhaustive_select(ds, fam, criterion).model.term_indices == expected
