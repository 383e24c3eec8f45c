"""Candidate model families and one-rank-less sub-models.

Terms are numbered from 1 and refer to predictor columns of a
:class:`~pindex.linalg.Dataset` (term ``j`` is column ``j - 1``).  For
polynomial order selection term ``j`` is the monomial ``x^j``.  The
intercept is carried separately by :attr:`ModelSpec.includes_intercept`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Literal

import numpy as np

from .errors import DataError, ParameterError
from .linalg import Dataset, DesignMatrix, matrix_rank

FamilyKind = Literal["nested", "subset"]
InterceptPolicy = Literal["always", "selectable"]

MAX_SUBSET_PREDICTORS = 60


def term_code(term: int) -> str:
    """One-character code: 1-9 as digits, 10 onwards as A, B, ..."""
    if term < 1:
        raise ValueError(f"terms are numbered from 1, got {term}")
    if term <= 9:
        return str(term)
    if term <= 9 + 26:
        return chr(ord("A") + term - 10)
    return f"[{term}]"


@dataclass(frozen=True)
class ModelSpec:
    """One candidate model: a set of terms plus an optional intercept.

    ``rank`` is the realized rank on a particular design when known; it
    does not take part in equality or hashing.
    """

    family_id: str
    term_indices: tuple[int, ...]
    includes_intercept: bool = True
    rank: int | None = field(default=None, compare=False)

    def __post_init__(self):
        terms = tuple(int(t) for t in self.term_indices)
        if len(set(terms)) != len(terms):
            raise ParameterError(f"duplicate terms in model {terms}")
        if any(t < 1 for t in terms):
            raise ParameterError(f"terms are numbered from 1, got {terms}")
        object.__setattr__(self, "term_indices", tuple(sorted(terms)))

    @property
    def size(self) -> int:
        return len(self.term_indices)

    @property
    def code(self) -> str:
        """Compact label such as ``"125"``; ``"0"`` for intercept only."""
        body = "".join(term_code(t) for t in self.term_indices)
        if not body:
            return "0" if self.includes_intercept else "-"
        return body

    @property
    def order(self) -> int:
        return max(self.term_indices, default=0)

    def matrix(self, dataset: Dataset) -> np.ndarray:
        """Model matrix on ``dataset``: intercept column first, then terms."""
        if self.term_indices and self.term_indices[-1] > dataset.p:
            raise DataError(
                f"model uses term {self.term_indices[-1]} but dataset has {dataset.p} predictors"
            )
        cols = [dataset.X[:, t - 1] for t in self.term_indices]
        if self.includes_intercept:
            cols.insert(0, np.ones(dataset.n))
        if not cols:
            return np.empty((dataset.n, 0))
        return np.column_stack(cols)

    def without(self, term: int) -> "ModelSpec":
        if term == 0:
            return ModelSpec(self.family_id, self.term_indices, False)
        return ModelSpec(
            self.family_id,
            tuple(t for t in self.term_indices if t != term),
            self.includes_intercept,
        )

    def to_dict(self) -> dict:
        return {
            "code": self.code,
            "terms": list(self.term_indices),
            "intercept": self.includes_intercept,
            "rank": self.rank,
        }


@dataclass(frozen=True)
class FamilyConfig:
    """``size`` is the maximal order (nested) or predictor count (subset)."""

    kind: FamilyKind
    size: int
    intercept_policy: InterceptPolicy = "always"

    def __post_init__(self):
        if self.kind not in ("nested", "subset"):
            raise ParameterError(f"unknown family kind {self.kind!r}")
        if self.intercept_policy not in ("always", "selectable"):
            raise ParameterError(f"unknown intercept policy {self.intercept_policy!r}")
        if self.size < 1:
            raise ParameterError("family size must be at least 1")
        if self.kind == "subset" and self.size > MAX_SUBSET_PREDICTORS:
            raise ParameterError(
                f"all-subset families support at most {MAX_SUBSET_PREDICTORS} predictors, "
                f"got {self.size}"
            )


@dataclass(frozen=True)
class Family:
    """Lazily enumerable candidate list.

    Nested families hold the orders ``1..size``; subset families hold
    every nonempty subset of ``size`` predictors, smallest first and
    lexicographic within a size.  With a selectable intercept, subset
    families also hold each subset without the intercept.
    """

    config: FamilyConfig

    @property
    def kind(self) -> FamilyKind:
        return self.config.kind

    @property
    def size(self) -> int:
        return self.config.size

    @property
    def intercept_selectable(self) -> bool:
        return self.config.intercept_policy == "selectable"

    @property
    def family_id(self) -> str:
        return f"{self.kind}{self.size}"

    def __len__(self) -> int:
        if self.kind == "nested":
            return self.size
        count = 2**self.size - 1
        return 2 * count if self.intercept_selectable else count

    def __iter__(self) -> Iterator[ModelSpec]:
        fid = self.family_id
        if self.kind == "nested":
            for k in range(1, self.size + 1):
                yield ModelSpec(fid, tuple(range(1, k + 1)), True)
            return
        for r in range(1, self.size + 1):
            for combo in itertools.combinations(range(1, self.size + 1), r):
                yield ModelSpec(fid, combo, True)
                if self.intercept_selectable:
                    yield ModelSpec(fid, combo, False)

    def model(self, terms, includes_intercept: bool = True) -> ModelSpec:
        return ModelSpec(self.family_id, tuple(terms), includes_intercept)

    def floor(self) -> ModelSpec:
        """The intercept-only model, the rank-1 base of every chain."""
        return ModelSpec(self.family_id, (), True)

    def check_dataset(self, dataset: Dataset) -> None:
        if dataset.p < self.size:
            raise DataError(
                f"family needs {self.size} predictor columns, dataset has {dataset.p}"
            )


def build_family(config: FamilyConfig) -> Family:
    return Family(config)


def submodels_one_less(model: ModelSpec, dataset: Dataset, family: Family | None = None) -> list[ModelSpec]:
    """Sub-models of ``model`` whose realized rank is exactly one less.

    Nested families drop the highest-order term only.  Subset families
    drop each term in turn, and the intercept when the family makes it
    selectable.  Candidates whose rank on ``dataset`` is not
    ``rank(model) - 1`` are discarded.
    """
    r = model.rank if model.rank is not None else matrix_rank(model.matrix(dataset))
    if r <= 1:
        return []

    if family is not None:
        nested = family.kind == "nested"
    else:
        nested = model.family_id.startswith("nested")
    if nested:
        if model.term_indices:
            candidates = [model.without(model.order)]
        else:
            candidates = []
    else:
        candidates = [model.without(t) for t in model.term_indices]
        if family is not None and family.intercept_selectable and model.includes_intercept:
            candidates.append(model.without(0))

    out = []
    for sub in candidates:
        if not sub.term_indices and not sub.includes_intercept:
            continue
        rs = matrix_rank(sub.matrix(dataset))
        if rs == r - 1:
            out.append(ModelSpec(sub.family_id, sub.term_indices, sub.includes_intercept, rs))
    return out


def build_polynomial_design(x: np.ndarray, max_order: int) -> DesignMatrix:
    """Raw monomial columns ``1, x, ..., x^max_order``."""
    if max_order < 1:
        raise ParameterError("max_order must be at least 1")
    x = np.asarray(x, dtype=float).ravel()
    if not np.all(np.isfinite(x)):
        raise DataError("non-finite values in polynomial predictor")
    cols = np.vander(x, max_order + 1, increasing=True)
    return DesignMatrix(cols, tuple(f"x^{j}" for j in range(max_order + 1)))


def polynomial_dataset(x: np.ndarray, y: np.ndarray, max_order: int, **truth) -> Dataset:
    """Dataset whose term ``j`` is ``x^j``; the constant column is dropped."""
    design = build_polynomial_design(x, max_order)
    return Dataset(y, design.columns[:, 1:], design.labels[1:], **truth)
