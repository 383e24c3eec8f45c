"""Exact best-subset search and model selection by AIC/BIC.

For every subset size the search returns the predictor set with the
smallest residual sum of squares.  Because AIC and BIC are increasing in
RSS at a fixed rank, scoring one champion per size and minimizing over
sizes gives the same model as scoring all ``2^p - 1`` subsets.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .criteria import Criterion, argmin_tiebreak, criterion_penalty, profile_score
from .errors import DataError, ParameterError, SelectionError
from .linalg import Dataset, FitSummary, least_squares_fit, matrix_rank
from .models import MAX_SUBSET_PREDICTORS, Family, ModelSpec

PRUNE_RTOL = 1e-9
EXHAUSTIVE_FALLBACK_MAX_P = 20


@dataclass(frozen=True)
class SearchStats:
    nodes: int
    exhaustive_nodes: int
    method: str


@dataclass(frozen=True)
class SelectionResult:
    """Selected model, its fit and score, plus the scored candidates."""

    model: ModelSpec
    fit: FitSummary
    score: float
    criterion: str
    candidates: tuple[tuple[ModelSpec, float, float], ...] = field(default=(), repr=False)

    @property
    def rank(self) -> int:
        return self.fit.rank


def _candidate_matrix(dataset: Dataset, p: int, intercept: bool):
    X = dataset.X[:, :p]
    y = dataset.y
    if intercept:
        X = X - X.mean(axis=0)
        y = y - y.mean()
    return X, y


def branch_and_bound_search(dataset: Dataset, p: int, intercept: bool = True):
    """Run the kernel on the first ``p`` predictors.

    Returns ``(best_rss, best_mask, stats)`` or ``None`` when the
    candidate columns are numerically rank deficient (the kernel needs a
    nonsingular factor).
    """
    X, y = _candidate_matrix(dataset, p, intercept)
    norms = np.sqrt(np.einsum("ij,ij->j", X, X))
    if np.any(norms == 0.0):
        return None
    Xs = X / norms
    if matrix_rank(Xs) < p:
        return None
    Q, R = np.linalg.qr(Xs)
    z = Q.T @ y
    resid = y - Q @ z
    rss_full = float(resid @ resid)
    rss_empty = float(y @ y)
    best_rss, best_mask, nodes = _kernels.branch_and_bound(
        np.ascontiguousarray(R), np.ascontiguousarray(z), rss_full, rss_empty, PRUNE_RTOL
    )
    stats = SearchStats(int(nodes), 2**p, "branch_and_bound")
    return best_rss, best_mask, stats


def _mask_terms(mask: int, p: int) -> tuple[int, ...]:
    return tuple(j + 1 for j in range(p) if (int(mask) >> j) & 1)


def exhaustive_rss_per_size(
    dataset: Dataset, p: int, intercept: bool = True, family_id: str | None = None
) -> dict[int, tuple[ModelSpec, float]]:
    """Reference enumeration of all ``2^p - 1`` subsets with full refits."""
    fid = family_id or f"subset{p}"
    best: dict[int, tuple[ModelSpec, float]] = {}
    for s in range(1, p + 1):
        for combo in itertools.combinations(range(1, p + 1), s):
            model = ModelSpec(fid, combo, intercept)
            rss = least_squares_fit(dataset, model).rss
            if s not in best or rss < best[s][1]:
                best[s] = (model, rss)
    return best


def best_rss_per_size(
    dataset: Dataset,
    p: int,
    intercept: bool = True,
    family_id: str | None = None,
    *,
    return_stats: bool = False,
):
    """Smallest-RSS subset of each size ``1..p``.

    The returned RSS values come from a fresh fit of each champion, so
    they agree exactly with :func:`exhaustive_rss_per_size`.
    """
    if not 1 <= p <= MAX_SUBSET_PREDICTORS:
        raise ParameterError(f"predictor count must be in 1..{MAX_SUBSET_PREDICTORS}, got {p}")
    if dataset.p < p:
        raise DataError(f"search over {p} predictors but dataset has {dataset.p}")
    fid = family_id or f"subset{p}"

    found = branch_and_bound_search(dataset, p, intercept)
    if found is None:
        if p > EXHAUSTIVE_FALLBACK_MAX_P:
            raise SelectionError(
                f"candidate predictors are rank deficient and p={p} is too large "
                "for exhaustive enumeration"
            )
        result = exhaustive_rss_per_size(dataset, p, intercept, fid)
        stats = SearchStats(2**p - 1, 2**p, "exhaustive")
    else:
        _, masks, stats = found
        result = {}
        for s in range(1, p + 1):
            model = ModelSpec(fid, _mask_terms(masks[s], p), intercept)
            result[s] = (model, least_squares_fit(dataset, model).rss)
    if return_stats:
        return result, stats
    return result


def _scored(dataset: Dataset, models, criterion: Criterion):
    n = dataset.n
    pen = criterion_penalty(criterion, n)
    out = []
    for model in models:
        fit = least_squares_fit(dataset, model)
        ranked = ModelSpec(model.family_id, model.term_indices, model.includes_intercept, fit.rank)
        out.append((ranked, fit, profile_score(fit.rss, fit.rank, n, pen)))
    return out


def select_best(dataset: Dataset, family: Family, criterion: Criterion = "bic") -> SelectionResult:
    """Select by profile AIC or BIC over ``family``.

    Ties go to the smaller rank and then to the lexicographically smaller
    term set.
    """
    criterion_penalty(criterion, dataset.n)
    family.check_dataset(dataset)
    if family.kind == "nested":
        models = list(family)
    else:
        champions = best_rss_per_size(dataset, family.size, True, family.family_id)
        models = [m for m, _ in champions.values()]
        if family.intercept_selectable:
            bare = best_rss_per_size(dataset, family.size, False, family.family_id)
            models += [m for m, _ in bare.values()]

    scored = [c for c in _scored(dataset, models, criterion) if c[1].rank > 0]
    if not scored:
        raise SelectionError("every candidate model has rank 0")
    model, fit, score = argmin_tiebreak(
        scored,
        score=lambda c: c[2],
        rank=lambda c: c[1].rank,
        terms=lambda c: (c[0].term_indices, not c[0].includes_intercept),
    )
    table = tuple((m, f.rss, s) for m, f, s in scored)
    return SelectionResult(model, fit, score, criterion, table)


def exhaustive_select(dataset: Dataset, family: Family, criterion: Criterion = "bic") -> SelectionResult:
    """Score every model of ``family`` directly (reference path)."""
    scored = [c for c in _scored(dataset, family, criterion) if c[1].rank > 0]
    if not scored:
        raise SelectionError("every candidate model has rank 0")
    model, fit, score = argmin_tiebreak(
        scored,
        score=lambda c: c[2],
        rank=lambda c: c[1].rank,
        terms=lambda c: (c[0].term_indices, not c[0].includes_intercept),
    )
    return SelectionResult(model, fit, score, criterion)


def fixed_selection(dataset: Dataset, model: ModelSpec, criterion: Criterion = "bic") -> SelectionResult:
    """Wrap a given model as if it had been selected."""
    (ranked, fit, score), = _scored(dataset, [model], criterion)
    return SelectionResult(ranked, fit, score, criterion)
