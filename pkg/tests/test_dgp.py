import numpy as np
import pytest

from pindex.dgp import (
    PRESETS,
    Dgp,
    correlation_matrix,
    generate_dataset,
    nonlinear_component,
    preset,
    rng_stream,
    standard_normal,
    symmetric_sqrt,
)
from pindex.errors import ParameterError


def test_noiseless_process_returns_mean():
    dgp = Dgp("custom", 50, 0.0, "gaussian", (1.0, -2.0, 0.5), 0.3)
    ds = generate_dataset(dgp, 3)
    np.testing.assert_array_equal(ds.y, ds.truth)
    np.testing.assert_allclose(ds.truth, ds.X @ [1.0, -2.0, 0.5])


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_same_seed_same_bits(name):
    a = generate_dataset(preset(name), 17)
    b = generate_dataset(preset(name), 17)
    assert a.y.tobytes() == b.y.tobytes()
    assert a.X.tobytes() == b.X.tobytes()
    assert generate_dataset(preset(name), 18).y.tobytes() != a.y.tobytes()


def test_example3_correlation():
    ds = generate_dataset(preset("example3", n=10000), 0)
    c = np.corrcoef(ds.X, rowvar=False)
    assert c[0, 2] == pytest.approx(0.25, abs=0.03)
    assert c[0, 1] == pytest.approx(0.5, abs=0.03)


def test_exchangeable_correlation():
    ds = generate_dataset(preset("example5", n=10000), 0)
    c = np.corrcoef(ds.X, rowvar=False)
    assert c[0, 12] == pytest.approx(0.6, abs=0.03)


def test_example7_layout():
    dgp = preset("example7")
    ds = generate_dataset(dgp, 1)
    assert ds.p == 16
    assert ds.labels[8:10] == ("u", "u^2")
    u = ds.X[:, 8]
    assert u.min() >= -4 and u.max() <= 4
    np.testing.assert_allclose(ds.X[:, 15], u**8)
    assert dgp.true_model() is None


def test_nonlinear_component_values():
    assert nonlinear_component(np.array([0.0]))[0] == pytest.approx(3.0)
    assert nonlinear_component(np.array([2.0]))[0] == pytest.approx(3 * (1 - 1 + 8) * np.exp(-1))


def test_non_positive_definite_rejected():
    with pytest.raises(ParameterError):
        symmetric_sqrt(correlation_matrix(4, -0.5, "exchangeable"))
    with pytest.raises(ParameterError):
        generate_dataset(Dgp("custom", 20, 1.0, "gaussian", (1.0,) * 4, -0.5, "exchangeable"), 0)


def test_unknown_preset_lists_valid_names():
    with pytest.raises(ParameterError, match="example3"):
        preset("example99")


def test_polynomial_truth_and_true_model():
    dgp = preset("example1_case2")
    assert dgp.true_model().order == 4
    assert preset("example1_case1").true_model() is None
    ds = generate_dataset(dgp, 0)
    x = ds.X[:, 0]
    np.testing.assert_allclose(ds.truth, 3 - 5 * x + 2 * x**2 + 1.5 * x**3 + 0.8 * x**4)


def test_normal_draws_are_standard():
    z = standard_normal(rng_stream(5), 200000)
    assert z.mean() == pytest.approx(0.0, abs=0.01)
    assert z.std() == pytest.approx(1.0, abs=0.01)
    assert np.all(np.isfinite(z))


def test_streams_are_keyed_by_path():
    a = rng_stream(1, 0).random(4)
    b = rng_stream(1, 1).random(4)
    assert not np.array_equal(a, b)
    np.testing.assert_array_equal(a, rng_stream(1, 0).random(4))
    with pytest.raises(ParameterError):
        rng_stream(-1)


def test_small_n_rejected():
    with pytest.raises(ParameterError):
        preset("example3", n=5)
