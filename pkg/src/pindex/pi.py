"""Parametricness index, classification and the adaptive AIC/BIC rule.

The index compares the penalized criterion of the selected model with
that of its best one-rank-smaller sub-model.  A model that genuinely
stands out makes every sub-model look much worse (large index); when the
selected model is a compromise, dropping its weakest term barely matters
(index near 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .criteria import IcConfig, ic_value
from .errors import DataError, ParameterError, PiError
from .linalg import Dataset, fit_columns, least_squares_fit
from .models import Family, ModelSpec, submodels_one_less
from .subset import SelectionResult, best_rss_per_size, select_best

PARAMETRIC = "practically_parametric"
NONPARAMETRIC = "practically_nonparametric"

DEFAULT_CUTOFFS = {"nested": 1.6, "subset": 1.2}


def default_cutoff(family_kind: str) -> float:
    try:
        return DEFAULT_CUTOFFS[family_kind]
    except KeyError:
        raise ParameterError(f"unknown family kind {family_kind!r}") from None


@dataclass(frozen=True)
class PiReport:
    """Outcome of one index computation.

    ``degenerate`` is set when the selected model's criterion value is
    not positive (known-variance mode only); the index is then formed
    from absolute ratios and should not be trusted.
    """

    pi: float
    n: int
    selected: ModelSpec
    ic_selected: float
    submodel_ics: tuple[tuple[ModelSpec, float], ...]
    argmin_submodel: ModelSpec | None
    sigma_mode: str
    sigma2_used: float
    classification: str
    cutoff_used: float
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "pi": _finite_or_none(self.pi),
            "n": self.n,
            "selected": self.selected.to_dict(),
            "ic_selected": _finite_or_none(self.ic_selected),
            "submodel_ics": [
                {"model": m.to_dict(), "ic": _finite_or_none(v)} for m, v in self.submodel_ics
            ],
            "argmin_submodel": None if self.argmin_submodel is None else self.argmin_submodel.to_dict(),
            "sigma_mode": self.sigma_mode,
            "sigma2_used": _finite_or_none(self.sigma2_used),
            "classification": self.classification,
            "cutoff_used": self.cutoff_used,
            "degenerate": self.degenerate,
        }


def _finite_or_none(v: float):
    return float(v) if math.isfinite(v) else None


def classify(pi: float, family_kind: str = "subset", cutoff: float | None = None) -> str:
    """``practically_parametric`` iff ``pi >= cutoff``.

    The default cutoff is 1.6 for nested (order selection) families and
    1.2 for all-subset families.
    """
    c = default_cutoff(family_kind) if cutoff is None else float(cutoff)
    return PARAMETRIC if pi >= c else NONPARAMETRIC


def compute_pi(
    dataset: Dataset,
    selected: SelectionResult,
    family: Family,
    cfg: IcConfig = IcConfig(),
    cutoff: float | None = None,
) -> PiReport:
    """Parametricness index of ``selected``.

    In estimated mode the variance reference is
    ``rss(selected) / (n - rank(selected))`` and is reused unchanged for
    every sub-model.  A rank-1 selection gets the value ``n`` by
    convention.
    """
    n = dataset.n
    cfg.check_n(n)
    c = default_cutoff(family.kind) if cutoff is None else float(cutoff)
    fit = selected.fit
    r = fit.rank
    model = ModelSpec(
        selected.model.family_id,
        selected.model.term_indices,
        selected.model.includes_intercept,
        r,
    )

    if cfg.sigma2 is not None:
        s2 = cfg.sigma2
    else:
        if r >= n:
            raise PiError(f"cannot estimate the variance: rank {r} >= n = {n}")
        s2 = fit.rss / (n - r)

    if r <= 1:
        ic_sel = ic_value(fit, n, cfg, s2) if s2 > 0 else math.nan
        return PiReport(
            float(n), n, model, ic_sel, (), None, cfg.sigma_mode, s2,
            classify(float(n), family.kind, c), c,
        )

    if not s2 > 0:
        raise PiError("selected model fits the data exactly; the index is undefined")

    subs = submodels_one_less(model, dataset, family)
    if not subs:
        raise PiError(
            f"model {model.code} (rank {r}) has no sub-model of rank {r - 1} in the family"
        )

    ic_sel = ic_value(fit, n, cfg, s2)
    sub_ics = tuple(
        (sub, ic_value(least_squares_fit(dataset, sub), n, cfg, s2)) for sub in subs
    )
    degenerate = not ic_sel > 0
    if degenerate:
        ratios = [abs(v / ic_sel) if ic_sel != 0 else math.inf for _, v in sub_ics]
    else:
        ratios = [v / ic_sel for _, v in sub_ics]
    j = int(np.argmin(ratios))
    pi = float(ratios[j])
    return PiReport(
        pi, n, model, ic_sel, sub_ics, sub_ics[j][0], cfg.sigma_mode, s2,
        classify(pi, family.kind, c), c, degenerate,
    )


@dataclass(frozen=True)
class AdaptiveResult:
    """Model chosen by the PI-driven switch between AIC and BIC."""

    chosen: SelectionResult
    method: str
    report: PiReport
    bic: SelectionResult
    aic: SelectionResult

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "chosen": self.chosen.model.to_dict(),
            "bic_selected": self.bic.model.to_dict(),
            "aic_selected": self.aic.model.to_dict(),
            "pi_report": self.report.to_dict(),
        }


def adaptive_select(
    dataset: Dataset,
    family: Family,
    cfg: IcConfig = IcConfig(),
    cutoff: float | None = None,
) -> AdaptiveResult:
    """AIC when the index of the BIC choice is below ``cutoff``, else BIC."""
    bic = select_best(dataset, family, "bic")
    aic = select_best(dataset, family, "aic")
    report = compute_pi(dataset, bic, family, cfg, cutoff)
    if report.pi < report.cutoff_used:
        return AdaptiveResult(aic, "aic", report, bic, aic)
    return AdaptiveResult(bic, "bic", report, bic, aic)


@dataclass(frozen=True)
class ConditionDiagnostics:
    """Oracle quantities computed from the known mean vector.

    ``a_n`` is the smallest scaled approximation error among the
    one-less sub-models of the true model.  ``b_jn`` and ``e_jn`` map a
    rank ``j`` to the penalized approximation-error infima used for known
    and estimated variance respectively.
    """

    a_n: float | None
    b_jn: dict[int, float] = field(default_factory=dict)
    e_jn: dict[int, float] = field(default_factory=dict)
    min_residual_by_rank: dict[int, float] = field(default_factory=dict, repr=False)


def _min_residual_by_rank(truth_fn: np.ndarray, dataset: Dataset, family: Family) -> dict[int, float]:
    """Smallest ``||(I - M_k) f||^2`` over the models of each rank."""
    probe = dataset.with_response(truth_fn)
    out: dict[int, float] = {}

    def keep(rank: int, value: float) -> None:
        if rank not in out or value < out[rank]:
            out[rank] = value

    floor = family.floor()
    keep(1, fit_columns(floor.matrix(probe), truth_fn).rss)
    if family.kind == "nested":
        for model in family:
            f = least_squares_fit(probe, model)
            keep(f.rank, f.rss)
        return out
    variants = [True, False] if family.intercept_selectable else [True]
    for intercept in variants:
        champions = best_rss_per_size(probe, family.size, intercept, family.family_id)
        for model, _ in champions.values():
            f = least_squares_fit(probe, model)
            keep(f.rank, f.rss)
    return out


def oracle_conditions(
    truth_fn: np.ndarray,
    sigma2: float,
    family: Family,
    cfg: IcConfig,
    j_range,
    dataset: Dataset,
    true_model: ModelSpec | None = None,
) -> ConditionDiagnostics:
    """Approximation-error diagnostics for a simulated problem.

    ``a_n`` is ``None`` unless ``true_model`` is given.  Ranks in
    ``j_range`` that no candidate attains (or with ``j >= n``) are left
    out of ``b_jn`` and ``e_jn``.
    """
    truth_fn = np.asarray(truth_fn, dtype=float).ravel()
    if truth_fn.shape[0] != dataset.n:
        raise DataError(f"truth has length {truth_fn.shape[0]}, dataset has {dataset.n} rows")
    if not sigma2 > 0:
        raise ParameterError(f"sigma^2 must be positive, got {sigma2}")
    n = dataset.n
    cfg.check_n(n)
    slope = cfg.penalty_slope(n)
    offset = cfg.offset(n)

    a_n = None
    if true_model is not None:
        subs = submodels_one_less(true_model, dataset, family)
        if subs:
            a_n = min(fit_columns(s.matrix(dataset), truth_fn).rss for s in subs) / sigma2

    # both infima are increasing in the residual norm at fixed rank
    # because slope * j + offset >= 0 whenever lambda_n >= 1/log(n)
    resid = _min_residual_by_rank(truth_fn, dataset, family)
    b_jn: dict[int, float] = {}
    e_jn: dict[int, float] = {}
    for j in j_range:
        j = int(j)
        if j not in resid or j >= n:
            continue
        approx = resid[j] / sigma2
        b_jn[j] = slope * j + approx + offset
        e_jn[j] = (slope * j + offset) * (1.0 + resid[j] / ((n - j) * sigma2))
    return ConditionDiagnostics(a_n, b_jn, e_jn, resid)
