"""Information criteria.

Two flavours live here.  :func:`ic_value` is the penalized criterion with
an explicit noise-variance reference that the parametricness index is
built from.  :func:`aic_score` and :func:`bic_score` are the usual
profile-likelihood forms (variance eliminated) used to *select* a model.
All logarithms are natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Literal, Sequence, TypeVar

from .errors import ParameterError
from .linalg import FitSummary

Criterion = Literal["aic", "bic"]

T = TypeVar("T")

# Selection scores closer than this are treated as tied.
SCORE_TIE_RTOL = 1e-12
SCORE_TIE_ATOL = 1e-9


@dataclass(frozen=True)
class IcConfig:
    """Parameters of the penalized criterion.

    ``sigma2`` set means the noise variance is known; ``None`` means it is
    estimated from the selected model.
    """

    lambda_n: float = 1.0
    d: float = 0.0
    sigma2: float | None = None

    def __post_init__(self):
        if not math.isfinite(self.lambda_n) or self.lambda_n <= 0:
            raise ParameterError(f"lambda_n must be positive, got {self.lambda_n}")
        if not math.isfinite(self.d) or self.d < 0:
            raise ParameterError(f"d must be non-negative, got {self.d}")
        if self.sigma2 is not None and not (math.isfinite(self.sigma2) and self.sigma2 > 0):
            raise ParameterError(f"known sigma^2 must be positive, got {self.sigma2}")

    @property
    def sigma_mode(self) -> str:
        return "estimated" if self.sigma2 is None else "known"

    def check_n(self, n: int) -> None:
        if n < 2:
            raise ParameterError(f"criterion needs n >= 2, got {n}")
        if self.lambda_n * math.log(n) < 1.0 - 1e-12:
            raise ParameterError(
                f"lambda_n must be at least 1/log(n) = {1 / math.log(n):.6g}, got {self.lambda_n}"
            )

    def penalty_slope(self, n: int) -> float:
        """``lambda_n log(n) - 1``, the per-rank coefficient after centring."""
        return self.lambda_n * math.log(n) - 1.0

    def offset(self, n: int) -> float:
        """``d sqrt(n) log(n)``."""
        return self.d * math.sqrt(n) * math.log(n)

    def to_dict(self) -> dict:
        return {
            "lambda_n": self.lambda_n,
            "d": self.d,
            "sigma_mode": self.sigma_mode,
            "sigma2": self.sigma2,
        }


def ic_value(fit: FitSummary, n: int, cfg: IcConfig, sigma2_ref: float) -> float:
    """``rss + lambda log(n) r s2 - n s2 + d sqrt(n) log(n) s2``.

    ``sigma2_ref`` is supplied by the caller: the known variance, or the
    estimate from the selected model shared across every model being
    compared.
    """
    if n < 2:
        raise ParameterError(f"criterion needs n >= 2, got {n}")
    if not (sigma2_ref > 0) or not math.isfinite(sigma2_ref):
        raise ParameterError(f"reference variance must be positive, got {sigma2_ref}")
    logn = math.log(n)
    return (
        fit.rss
        + cfg.lambda_n * logn * fit.rank * sigma2_ref
        - n * sigma2_ref
        + cfg.d * math.sqrt(n) * logn * sigma2_ref
    )


def profile_score(rss: float, rank: int, n: int, penalty: float) -> float:
    if rss <= 0.0:
        return -math.inf
    return n * math.log(rss / n) + penalty * rank


def criterion_penalty(criterion: Criterion, n: int) -> float:
    if criterion == "bic":
        return math.log(n)
    if criterion == "aic":
        return 2.0
    raise ParameterError(f"unknown criterion {criterion!r}; expected 'aic' or 'bic'")


def aic_score(fit: FitSummary, n: int) -> float:
    """``n log(rss/n) + 2 r``; ``-inf`` flags a perfect fit."""
    return profile_score(fit.rss, fit.rank, n, 2.0)


def bic_score(fit: FitSummary, n: int) -> float:
    """``n log(rss/n) + log(n) r``; ``-inf`` flags a perfect fit."""
    return profile_score(fit.rss, fit.rank, n, math.log(n))


def scores_tied(a: float, b: float) -> bool:
    if a == b:
        return True
    if math.isinf(a) or math.isinf(b):
        return False
    return math.isclose(a, b, rel_tol=SCORE_TIE_RTOL, abs_tol=SCORE_TIE_ATOL)


def argmin_tiebreak(items: Iterable[T], score: Callable[[T], float], rank: Callable[[T], int], terms: Callable[[T], Sequence[int]]) -> T:
    """Lowest score; ties go to the smaller rank, then the smaller term tuple."""
    items = list(items)
    if not items:
        raise ValueError("argmin over an empty collection")
    scores = [score(it) for it in items]
    best = min(scores)
    tied = [it for it, s in zip(items, scores) if scores_tied(s, best)]
    return min(tied, key=lambda it: (rank(it), tuple(terms(it))))
