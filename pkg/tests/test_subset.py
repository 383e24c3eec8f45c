"""Branch-and-bound best-subset search against exhaustive enumeration."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pindex.errors import ParameterError
from pindex.linalg import Dataset
from pindex.models import Family, FamilyConfig
from pindex.subset import best_rss_per_size, exhaustive_rss_per_size, exhaustive_select, select_best


def correlated_dataset(seed, n, p, rho=0.5, sparsity=0.5):
    r = np.random.default_rng(seed)
    idx = np.arange(p)
    C = rho ** np.abs(idx[:, None] - idx[None, :])
    X = r.standard_normal((n, p)) @ np.linalg.cholesky(C).T
    beta = r.standard_normal(p) * (r.random(p) < sparsity)
    return Dataset(X @ beta + r.standard_normal(n) * r.uniform(0.3, 3.0), X)


def assert_same_champions(ds, p, intercept=True):
    got, stats = best_rss_per_size(ds, p, intercept, return_stats=True)
    ref = exhaustive_rss_per_size(ds, p, intercept)
    assert set(got) == set(ref)
    for s in ref:
        assert got[s][0].term_indices == ref[s][0].term_indices, s
        assert got[s][1] == ref[s][1]
    assert stats.nodes <= stats.exhaustive_nodes
    return stats


def test_orthogonal_design_picks_strongest_terms():
    n = 64
    # centred orthogonal columns with equal norms
    Q = np.linalg.qr(np.column_stack([np.ones(n), np.random.default_rng(1).standard_normal((n, 4))]))[0]
    X = Q[:, 1:] * np.sqrt(n)
    y = X @ np.array([3.0, 2.0, 1.0, 0.0])
    champs = best_rss_per_size(Dataset(y, X), 4)
    assert champs[1][0].term_indices == (1,)
    assert champs[2][0].term_indices == (1, 2)
    assert champs[3][0].term_indices == (1, 2, 3)


@pytest.mark.parametrize("seed", range(50))
def test_p8_matches_exhaustive(seed):
    assert_same_champions(correlated_dataset(seed, 60, 8), 8)


@pytest.mark.parametrize("seed", range(10))
def test_p10_without_intercept_matches_exhaustive(seed):
    assert_same_champions(correlated_dataset(100 + seed, 100, 10), 10, intercept=False)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**31 - 1), st.floats(0.0, 0.95))
def test_exactness_property(p, seed, rho):
    assert_same_champions(correlated_dataset(seed, 3 * p + 10, p, rho), p)


def test_pruning_saves_work_on_sparse_signal():
    total = 0
    for seed in range(10):
        r = np.random.default_rng(seed)
        X = r.standard_normal((100, 12))
        y = 4 * X[:, 0] + 3 * X[:, 3] + r.standard_normal(100)
        stats = assert_same_champions(Dataset(y, X), 12)
        total += stats.nodes
    assert total < 10 * 2**12 / 2


def test_rank_deficient_design_falls_back():
    r = np.random.default_rng(5)
    X = r.standard_normal((40, 6))
    X[:, 5] = X[:, 0] + X[:, 1]
    ds = Dataset(X[:, 0] + r.standard_normal(40), X)
    got, stats = best_rss_per_size(ds, 6, return_stats=True)
    assert stats.method == "exhaustive"
    ref = exhaustive_rss_per_size(ds, 6)
    assert {s: m.term_indices for s, (m, _) in got.items()} == {s: m.term_indices for s, (m, _) in ref.items()}


def test_final_selection_matches_exhaustive_scan():
    for seed in range(10):
        ds = correlated_dataset(200 + seed, 100, 10)
        fam = Family(FamilyConfig("subset", 10))
        assert select_best(ds, fam, "bic").model == exhaustive_select(ds, fam, "bic").model


def test_selectable_intercept_matches_exhaustive_scan():
    for seed in range(5):
        ds = correlated_dataset(300 + seed, 50, 5)
        fam = Family(FamilyConfig("subset", 5, "selectable"))
        assert select_best(ds, fam, "aic").model == exhaustive_select(ds, fam, "aic").model


def test_single_candidate_family():
    r = np.random.default_rng(0)
    ds = Dataset(r.standard_normal(20), r.standard_normal((20, 1)))
    sel = select_best(ds, Family(FamilyConfig("subset", 1)), "bic")
    assert sel.model.term_indices == (1,)


def test_bad_predictor_count():
    r = np.random.default_rng(0)
    ds = Dataset(r.standard_normal(20), r.standard_normal((20, 3)))
    with pytest.raises(ParameterError):
        best_rss_per_size(ds, 0)
