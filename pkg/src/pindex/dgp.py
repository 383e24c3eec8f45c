"""Data-generating processes for the simulation studies.

Two designs are supported.  ``polynomial``: a single ``x ~ N(0, 1)``
predictor expanded into monomials ``x, ..., x^max_order`` for order
selection.  ``gaussian``: ``p`` jointly normal predictors with unit
variance and either AR(1) (``rho^|i-j|``) or exchangeable correlation,
optionally followed by ``u ~ U(-4, 4)`` and its powers ``u^1..u^8`` when
a nonlinear component ``3(1 - 0.5u + 2u^2) exp(-u^2/4)`` enters the
mean.

Normal deviates are produced by inverse-CDF transformation of Philox
uniforms, so a ``(dgp, seed)`` pair always yields the same bits.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Literal

import numpy as np
from scipy.special import ndtri

from .errors import ParameterError
from .linalg import Dataset
from .models import Family, FamilyConfig, ModelSpec, polynomial_dataset

NONLINEAR_POWERS = 8


def rng_stream(seed: int, *path: int) -> np.random.Generator:
    """Counter-based generator keyed by ``seed`` and an optional path."""
    if seed < 0 or any(p < 0 for p in path):
        raise ParameterError("seeds must be non-negative integers")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def standard_normal(rng: np.random.Generator, size) -> np.ndarray:
    # uniforms on the open interval (0, 1): k/2^53 shifted by half a step
    u = rng.random(size) + 2.0**-54
    return ndtri(u)


def correlation_matrix(p: int, rho: float, structure: str) -> np.ndarray:
    idx = np.arange(p)
    if structure == "ar1":
        return rho ** np.abs(idx[:, None] - idx[None, :])
    if structure == "exchangeable":
        return np.full((p, p), rho) + (1.0 - rho) * np.eye(p)
    raise ParameterError(f"unknown correlation structure {structure!r}")


def symmetric_sqrt(C: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(C)
    if w.min() <= 1e-12 * max(1.0, w.max()):
        raise ParameterError("correlation matrix is not positive definite")
    return (V * np.sqrt(w)) @ V.T


def nonlinear_component(u: np.ndarray) -> np.ndarray:
    return 3.0 * (1.0 - 0.5 * u + 2.0 * u**2) * np.exp(-(u**2) / 4.0)


@dataclass(frozen=True)
class Dgp:
    """A regression data-generating process.

    For the polynomial design the mean is ``sum_j poly[j] x^j`` plus
    ``sine * sin(2 pi x)``.  For the gaussian design it is ``X @ beta``
    plus the nonlinear component when ``nonlinear`` is set.
    """

    kind: str = "custom"
    n: int = 200
    sigma: float = 1.0
    design: Literal["polynomial", "gaussian"] = "gaussian"
    beta: tuple[float, ...] = ()
    rho: float = 0.0
    correlation: Literal["ar1", "exchangeable"] = "ar1"
    poly: tuple[float, ...] = ()
    sine: float = 0.0
    nonlinear: bool = False
    max_order: int = 30
    notes: str = field(default="", compare=False)

    def __post_init__(self):
        if self.n < 10:
            raise ParameterError(f"n must be at least 10, got {self.n}")
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise ParameterError(f"sigma must be non-negative, got {self.sigma}")
        if self.design not in ("polynomial", "gaussian"):
            raise ParameterError(f"unknown design {self.design!r}")
        if self.design == "gaussian" and not self.beta:
            raise ParameterError("gaussian design needs a coefficient vector")
        if self.design == "polynomial" and self.max_order < 1:
            raise ParameterError("max_order must be at least 1")
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
        object.__setattr__(self, "poly", tuple(float(b) for b in self.poly))

    @property
    def n_predictors(self) -> int:
        if self.design == "polynomial":
            return self.max_order
        return len(self.beta) + (NONLINEAR_POWERS if self.nonlinear else 0)

    def family(self) -> Family:
        if self.design == "polynomial":
            return Family(FamilyConfig("nested", self.max_order))
        return Family(FamilyConfig("subset", self.n_predictors))

    def true_coefficients(self) -> dict[int, float] | None:
        """Nonzero coefficients of the true model by term, if it is a candidate."""
        if self.design == "polynomial":
            if self.sine != 0.0:
                return None
            coefs = {j: c for j, c in enumerate(self.poly) if j >= 1 and c != 0.0}
            if coefs and max(coefs) > self.max_order:
                return None
            return coefs
        if self.nonlinear:
            return None
        return {j + 1: b for j, b in enumerate(self.beta) if b != 0.0}

    def true_model(self) -> ModelSpec | None:
        coefs = self.true_coefficients()
        if coefs is None:
            return None
        fam = self.family()
        if self.design == "polynomial":
            return ModelSpec(fam.family_id, tuple(range(1, max(coefs, default=0) + 1)), True)
        return ModelSpec(fam.family_id, tuple(sorted(coefs)), True)

    def with_n(self, n: int) -> "Dgp":
        return replace(self, n=n)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["beta"] = list(self.beta)
        d["poly"] = list(self.poly)
        return d


_EX3_BETA = (3.0, 1.5, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0)

PRESETS: dict[str, Dgp] = {
    "example1_case1": Dgp(
        "example1_case1", 200, 3.0, "polynomial", sine=3.0,
        notes="n and sigma are assumed defaults; override them as needed",
    ),
    "example1_case2": Dgp(
        "example1_case2", 200, 7.0, "polynomial", poly=(3.0, -5.0, 2.0, 1.5, 0.8),
        notes="n and sigma are assumed defaults; override them as needed",
    ),
    "example2_case1": Dgp(
        "example2_case1", 200, 2.0, "polynomial", poly=(1.0, -2.0, 1.6, 0.5), sine=3.0,
        notes="n and sigma are assumed defaults; override them as needed",
    ),
    "example2_case2": Dgp(
        "example2_case2", 200, 2.0, "polynomial", poly=(1.0, -2.0, 1.6, 0.5), sine=1.0,
        notes="n and sigma are assumed defaults; override them as needed",
    ),
    "cubic": Dgp("cubic", 200, 2.0, "polynomial", poly=(1.0, -2.0, 1.6, 0.5)),
    "example3": Dgp("example3", 200, 5.0, "gaussian", _EX3_BETA, 0.5, "ar1"),
    "example4": Dgp("example4", 200, 3.0, "gaussian", (0.85,) * 8, 0.5, "ar1"),
    "example5": Dgp(
        "example5", 200, 3.0, "gaussian",
        (0.9, 0.9, 0.0, 0.0, 2.0, 0.0, 0.0, 1.6, 2.2, 0.0, 0.0, 0.0, 0.0), 0.6, "exchangeable",
    ),
    "example6": Dgp(
        "example6", 200, 3.0, "gaussian",
        (0.85, 0.85, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0), 0.5, "exchangeable",
    ),
    "example7": Dgp("example7", 200, 3.0, "gaussian", _EX3_BETA, 0.5, "ar1", nonlinear=True),
}


def preset(name: str, **overrides) -> Dgp:
    """Look up a named process, optionally overriding fields."""
    try:
        dgp = PRESETS[name]
    except KeyError:
        raise ParameterError(
            f"unknown preset {name!r}; valid presets: {', '.join(sorted(PRESETS))}"
        ) from None
    return replace(dgp, **overrides) if overrides else dgp


def generate_dataset(dgp: Dgp, seed: int) -> Dataset:
    """Draw one dataset; the mean vector and noise level ride along."""
    rng = rng_stream(seed)
    n = dgp.n
    coefs = dgp.true_coefficients()
    true_model = dgp.true_model()
    truth_kw = dict(
        sigma=dgp.sigma,
        true_terms=None if true_model is None else true_model.term_indices,
        true_coefficients=None
        if true_model is None
        else tuple(coefs.get(t, 0.0) for t in true_model.term_indices),
    )

    if dgp.design == "polynomial":
        x = standard_normal(rng, n)
        eps = standard_normal(rng, n)
        f = np.polynomial.polynomial.polyval(x, np.asarray(dgp.poly)) if dgp.poly else np.zeros(n)
        if dgp.sine:
            f = f + dgp.sine * np.sin(2.0 * np.pi * x)
        y = f + dgp.sigma * eps
        return polynomial_dataset(x, y, dgp.max_order, truth=f, **truth_kw)

    p = len(dgp.beta)
    S = symmetric_sqrt(correlation_matrix(p, dgp.rho, dgp.correlation))
    X = standard_normal(rng, (n, p)) @ S
    f = X @ np.asarray(dgp.beta)
    labels = [f"x{j + 1}" for j in range(p)]
    if dgp.nonlinear:
        u = -4.0 + 8.0 * rng.random(n)
        f = f + nonlinear_component(u)
        X = np.column_stack([X] + [u**k for k in range(1, NONLINEAR_POWERS + 1)])
        labels += ["u"] + [f"u^{k}" for k in range(2, NONLINEAR_POWERS + 1)]
    eps = standard_normal(rng, n)
    y = f + dgp.sigma * eps
    return Dataset(y, X, tuple(labels), truth=f, **truth_kw)
