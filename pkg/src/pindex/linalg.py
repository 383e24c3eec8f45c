"""Rank-revealing least squares.

All projections go through a column-pivoted Householder QR of the
column-equilibrated model matrix.  Equilibration (scaling every column to
unit Euclidean norm) leaves the column span, and hence every fitted value
and residual, unchanged while keeping high-order monomial designs
factorizable.  Normal equations are never formed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np
import scipy.linalg

from .errors import DataError

if TYPE_CHECKING:
    from .models import ModelSpec

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class DesignMatrix:
    """Ordered real-valued columns with unique labels."""

    columns: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        cols = np.asarray(self.columns, dtype=float)
        if cols.ndim != 2:
            raise DataError("design columns must form a 2-d array")
        if len(self.labels) != cols.shape[1]:
            raise DataError(
                f"{len(self.labels)} labels given for {cols.shape[1]} columns"
            )
        if len(set(self.labels)) != len(self.labels):
            raise DataError("design column labels must be unique")
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def n(self) -> int:
        return self.columns.shape[0]

    @property
    def width(self) -> int:
        return self.columns.shape[1]


@dataclass(frozen=True)
class Dataset:
    """Response vector plus the candidate predictor columns.

    ``X`` holds the predictors that model terms refer to (term ``j`` is
    column ``j - 1``); the intercept is not stored and is added by the
    model specification.  ``truth``, ``sigma`` and ``true_terms`` are only
    known for simulated data and feed the oracle diagnostics.
    """

    y: np.ndarray
    X: np.ndarray
    labels: tuple[str, ...] = ()
    truth: np.ndarray | None = None
    sigma: float | None = None
    true_terms: tuple[int, ...] | None = None
    true_coefficients: tuple[float, ...] | None = None

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float).ravel()
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise DataError(
                f"response has {y.shape[0]} rows but predictors have shape {X.shape}"
            )
        if y.shape[0] < 1:
            raise DataError("dataset has no rows")
        if not np.all(np.isfinite(y)) or not np.all(np.isfinite(X)):
            raise DataError("dataset contains non-finite values")
        labels = tuple(self.labels) or tuple(f"x{j + 1}" for j in range(X.shape[1]))
        if len(labels) != X.shape[1]:
            raise DataError(f"{len(labels)} labels given for {X.shape[1]} predictors")
        if len(set(labels)) != len(labels):
            raise DataError("predictor labels must be unique")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "labels", labels)
        if self.truth is not None:
            truth = np.asarray(self.truth, dtype=float).ravel()
            if truth.shape != y.shape:
                raise DataError("truth vector length does not match the response")
            object.__setattr__(self, "truth", truth)

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def design(self) -> DesignMatrix:
        return DesignMatrix(self.X, self.labels)

    def with_response(self, y: np.ndarray) -> "Dataset":
        """Same predictors and truth, new response."""
        return Dataset(
            y,
            self.X,
            self.labels,
            self.truth,
            self.sigma,
            self.true_terms,
            self.true_coefficients,
        )

    def take(self, rows: Sequence[int] | np.ndarray) -> "Dataset":
        rows = np.asarray(rows)
        return Dataset(
            self.y[rows],
            self.X[rows],
            self.labels,
            None if self.truth is None else self.truth[rows],
            self.sigma,
            self.true_terms,
            self.true_coefficients,
        )


@dataclass(frozen=True)
class FitSummary:
    """Least-squares output for one model.

    ``coefficients`` are ordered like the model matrix columns (intercept
    first when present).  ``sigma_hat2`` is ``rss / (n - rank)`` and zero
    for a saturated fit.
    """

    rss: float
    rank: int
    coefficients: np.ndarray
    fitted: np.ndarray
    sigma_hat2: float
    n: int
    unscaled_cov_diag: np.ndarray | None = field(default=None, repr=False)


def _check_finite(*arrays: np.ndarray) -> None:
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise DataError("non-finite values in least-squares input")


def _factor(A: np.ndarray):
    """Equilibrated pivoted QR: returns (Q, R, perm, scale, rank)."""
    norms = np.sqrt(np.einsum("ij,ij->j", A, A))
    scale = np.where(norms > 0, norms, 1.0)
    As = A / scale
    Q, R, perm = scipy.linalg.qr(As, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0.0:
        return Q, R, perm, scale, 0
    tol = A.shape[1] * _EPS * diag[0]
    rank = int(np.count_nonzero(diag > tol))
    return Q, R, perm, scale, rank


def matrix_rank(A: np.ndarray) -> int:
    """Numerical rank under the same tolerance rule as :func:`fit_columns`."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[1] == 0:
        return 0
    _check_finite(A)
    return _factor(A)[4]


def fit_columns(A: np.ndarray, y: np.ndarray, *, with_cov: bool = False) -> FitSummary:
    """Project ``y`` onto the span of the columns of ``A``.

    Parameters
    ----------
    A
        ``n x m`` model matrix; ``m`` may be zero.
    y
        Response of length ``n``.
    with_cov
        Also return the diagonal of ``(A'A)^{-1}`` (full-rank fits only),
        used for classical standard errors.
    """
    y = np.asarray(y, dtype=float).ravel()
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    n = y.shape[0]
    if n < 1:
        raise DataError("cannot fit an empty response")
    if A.shape[0] != n:
        raise DataError(f"model matrix has {A.shape[0]} rows, response has {n}")
    _check_finite(A, y)

    m = A.shape[1]
    if m == 0:
        rss = float(y @ y)
        return FitSummary(rss, 0, np.zeros(0), np.zeros(n), rss / n, n)

    Q, R, perm, scale, rank = _factor(A)
    if rank == 0:
        rss = float(y @ y)
        return FitSummary(rss, 0, np.zeros(m), np.zeros(n), rss / n, n)

    Qr = Q[:, :rank]
    z = Qr.T @ y
    fitted = Qr @ z
    resid = y - fitted
    rss = float(resid @ resid)

    if rank == m:
        coef_p = scipy.linalg.solve_triangular(R[:m, :m], z)
    else:
        # minimum-norm solution of the rank-r trapezoidal system
        coef_p = np.linalg.lstsq(R[:rank, :], z, rcond=None)[0]
    coef = np.empty(m)
    coef[perm] = coef_p
    coef /= scale

    cov_diag = None
    if with_cov and rank == m:
        Rinv = scipy.linalg.solve_triangular(R[:m, :m], np.eye(m))
        d = np.empty(m)
        d[perm] = np.einsum("ij,ij->i", Rinv, Rinv)
        cov_diag = d / scale**2

    sigma_hat2 = rss / (n - rank) if rank < n else 0.0
    return FitSummary(rss, rank, coef, fitted, sigma_hat2, n, cov_diag)


def least_squares_fit(dataset: Dataset, model: "ModelSpec", *, with_cov: bool = False) -> FitSummary:
    """Fit ``model`` to ``dataset`` by orthogonal projection."""
    return fit_columns(model.matrix(dataset), dataset.y, with_cov=with_cov)


def oracle_residual_norm(truth_fn: np.ndarray, model: "ModelSpec", dataset: Dataset) -> float:
    """Squared norm of the part of ``truth_fn`` outside the model span."""
    truth_fn = np.asarray(truth_fn, dtype=float).ravel()
    if truth_fn.shape[0] != dataset.n:
        raise DataError(
            f"truth vector has length {truth_fn.shape[0]}, dataset has {dataset.n} rows"
        )
    return fit_columns(model.matrix(dataset), truth_fn).rss


def tse(truth_fn: np.ndarray, fit: FitSummary) -> float:
    """Total square error ``||truth - fitted||^2``."""
    truth_fn = np.asarray(truth_fn, dtype=float).ravel()
    if truth_fn.shape != fit.fitted.shape:
        raise DataError(
            f"truth vector has length {truth_fn.shape[0]}, fit has {fit.fitted.shape[0]}"
        )
    d = truth_fn - fit.fitted
    return float(d @ d)
