import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pindex.criteria import IcConfig
from pindex.dgp import Dgp, generate_dataset, preset
from pindex.errors import ParameterError
from pindex.linalg import Dataset
from pindex.models import Family, FamilyConfig
from pindex.study import (
    coverage_study,
    nearest_rank,
    parametric_bootstrap,
    percentile_table,
    risk_comparison,
    run_replications,
    subsample_study,
)
from pindex.subset import select_best


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50), st.integers(1, 100))
def test_nearest_rank_matches_sort_and_index(values, q):
    ordered = sorted(values)
    k = math.ceil(q * len(values) / 100)
    assert nearest_rank(values, q) == ordered[k - 1]


def test_percentiles_of_one_value():
    table = percentile_table([2.5])
    assert set(table.values()) == {2.5}


def test_single_replication_summary():
    s = run_replications(preset("example3"), 1, base_seed=4)
    rec = s.records[0]
    assert all(v == rec.pi for v in s.percentiles["pi"].values())
    assert all(v == rec.rank for v in s.percentiles["rank"].values())


def test_replications_are_worker_independent():
    a = run_replications(preset("example4"), 12, base_seed=3, workers=1)
    b = run_replications(preset("example4"), 12, base_seed=3, workers=8)
    assert a.to_dict() == b.to_dict()


def test_replication_seeds_are_offsets():
    s = run_replications(preset("example3"), 3, base_seed=10)
    assert [r.seed for r in s.records] == [10, 11, 12]


def test_bootstrap_near_noiseless_reselects():
    # every candidate is active, so with vanishing noise nothing can be dropped or added
    r = np.random.default_rng(0)
    X = r.standard_normal((100, 5))
    ds = Dataset(X @ [3.0, -1.0, 2.0, 1.5, 1.0] + 1e-6 * r.standard_normal(100), X)
    fam = Family(FamilyConfig("subset", 5))
    sel = select_best(ds, fam, "bic")
    rep = parametric_bootstrap(ds, sel, 100, 1, fam)
    assert rep.reselection_frequency >= 0.99


def test_bootstrap_single_resample():
    ds = generate_dataset(preset("example3"), 2)
    fam = preset("example3").family()
    rep = parametric_bootstrap(ds, select_best(ds, fam, "bic"), 1, 0, fam)
    assert len(rep.outcomes) == 1
    with pytest.raises(ParameterError):
        parametric_bootstrap(ds, select_best(ds, fam, "bic"), 0, 0, fam)


def test_subsample_sizes():
    ds = generate_dataset(preset("example3"), 2)
    fam = preset("example3").family()
    rep = subsample_study(ds, [ds.n - 1], 1, 0, fam)
    assert rep.sizes == [ds.n - 1]
    with pytest.warns(UserWarning, match="duplicate"):
        rep = subsample_study(ds, [50, 50, 80], 2, 0, fam)
    assert rep.sizes == [50, 80]
    with pytest.raises(ParameterError):
        subsample_study(ds, [ds.n], 1, 0, fam)


@pytest.mark.slow
def test_subsample_median_grows_with_size():
    dgp = preset("example3", n=1000)
    ds = generate_dataset(dgp, 5)
    rep = subsample_study(ds, [100, 200, 400], 40, 1, dgp.family())
    meds = [rep.median_pi(s) for s in (100, 200, 400)]
    assert meds[0] < meds[1] < meds[2]


def test_oracle_coverage_near_nominal():
    rep = coverage_study(preset("example3"), 0.9, 200, seed=1, oracle=True)
    assert rep.true_model_proportion == 1.0
    assert abs(rep.overall - 0.9) < 3 * math.sqrt(0.9 * 0.1 / 200)


def test_coverage_needs_finite_truth():
    with pytest.raises(ParameterError):
        coverage_study(preset("example1_case1"), reps=2)
    with pytest.raises(ParameterError):
        coverage_study(preset("example3"), level=1.0, reps=2)


def test_risk_when_criteria_agree():
    dgp = Dgp("custom", 200, 0.2, "gaussian", (3.0, -2.0, 2.0, 1.0), 0.0)
    rep = risk_comparison(dgp, 20, seed=0)
    assert rep.mean_tse["aic"] == rep.mean_tse["bic"] == rep.mean_tse["adaptive"]


@pytest.mark.parametrize("name", ["example3", "example4", "example5", "example6"])
def test_oracle_risk_lower_bounds_selection(name):
    rep = risk_comparison(preset(name), 60, seed=2)
    for m in ("aic", "bic", "adaptive"):
        assert rep.mean_tse["oracle"] <= rep.mean_tse[m] + 2 * rep.se_tse[m]


def test_unknown_method():
    with pytest.raises(ParameterError):
        run_replications(preset("example3"), 2, method="cp")


def test_known_variance_study_runs():
    s = run_replications(preset("example3"), 5, cfg=IcConfig(sigma2=25.0), base_seed=1)
    assert s.failures == 0
