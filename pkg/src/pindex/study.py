"""Seeded replication studies.

Replication ``r`` of a study with base seed ``s`` always draws its data
from seed ``s + r``, so results do not depend on how many workers run
the replications or in which order they finish.  Bootstrap and
subsampling draws use streams keyed by ``(seed, index)``.
"""

from __future__ import annotations

import math
import os
import warnings
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np
import scipy.stats

from .criteria import IcConfig
from .dgp import Dgp, generate_dataset, rng_stream, standard_normal
from .errors import ParameterError, PindexError, StudyError
from .linalg import Dataset, fit_columns, tse
from .models import Family, ModelSpec
from .pi import PiReport, compute_pi, default_cutoff
from .subset import SelectionResult, fixed_selection, select_best

PERCENTILES = (10, 20, 25, 50, 75, 80, 90)
MAX_FAILURE_RATE = 0.05
METHODS = ("bic", "aic", "adaptive")

T = TypeVar("T")
R = TypeVar("R")


def resolve_workers(workers: int | None = None) -> int:
    """Explicit value, else ``PINDEX_THREADS``, else 1."""
    if workers is None:
        env = os.environ.get("PINDEX_THREADS", "").strip()
        if env:
            try:
                workers = int(env)
            except ValueError:
                raise ParameterError(f"PINDEX_THREADS must be an integer, got {env!r}") from None
        else:
            workers = 1
    if workers < 1:
        raise ParameterError(f"worker count must be at least 1, got {workers}")
    return workers


def parallel_map(fn: Callable[[T], R], items: Iterable[T], workers: int | None = None) -> list[R]:
    """Ordered map; threads are enough because the kernels release the GIL."""
    items = list(items)
    workers = resolve_workers(workers)
    if workers == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def nearest_rank(values: Sequence[float], q: float) -> float:
    """Type-1 percentile: the ``ceil(q/100 * N)``-th smallest value."""
    if not values:
        return math.nan
    if not 0 <= q <= 100:
        raise ParameterError(f"percentile must be in [0, 100], got {q}")
    ordered = sorted(values)
    k = max(1, math.ceil(q / 100.0 * len(ordered) - 1e-12))
    return float(ordered[k - 1])


def percentile_table(values: Sequence[float], qs: Sequence[int] = PERCENTILES) -> dict[str, float]:
    return {str(q): nearest_rank(values, q) for q in qs}


def mean_and_se(values: Sequence[float]) -> tuple[float, float]:
    a = np.asarray(values, dtype=float)
    if a.size == 0:
        return math.nan, math.nan
    se = float(a.std(ddof=1) / math.sqrt(a.size)) if a.size > 1 else 0.0
    return float(a.mean()), se


def _check_failures(failures: int, total: int, what: str) -> None:
    if total and failures / total > MAX_FAILURE_RATE:
        raise StudyError(
            f"{failures} of {total} {what} failed (limit {MAX_FAILURE_RATE:.0%})"
        )


@dataclass(frozen=True)
class Outcome:
    """One pass of selection plus index on a single dataset."""

    chosen: SelectionResult
    method: str
    bic: SelectionResult
    report: PiReport


def run_pipeline(
    dataset: Dataset,
    family: Family,
    cfg: IcConfig = IcConfig(),
    cutoff: float | None = None,
    method: str = "bic",
) -> Outcome:
    """BIC selection, its index, and the model reported by ``method``."""
    if method not in METHODS:
        raise ParameterError(f"unknown method {method!r}; expected one of {METHODS}")
    bic = select_best(dataset, family, "bic")
    report = compute_pi(dataset, bic, family, cfg, cutoff)
    if method == "bic":
        return Outcome(bic, "bic", bic, report)
    if method == "aic" or report.pi < report.cutoff_used:
        return Outcome(select_best(dataset, family, "aic"), "aic", bic, report)
    return Outcome(bic, "bic", bic, report)


@dataclass(frozen=True)
class ReplicationRecord:
    rep: int
    seed: int
    selected: str = ""
    rank: int = 0
    order: int = 0
    size: int = 0
    pi: float = math.nan
    sigma_hat: float = math.nan
    tse: float = math.nan
    classification: str = ""
    method: str = ""
    true_selected: bool | None = None
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error


RECORD_FIELDS = tuple(ReplicationRecord.__dataclass_fields__)


@dataclass
class SimSummary:
    config: dict
    records: list[ReplicationRecord]
    percentiles: dict[str, dict[str, float]] = field(default_factory=dict)
    selection_frequency: dict[str, float] = field(default_factory=dict)
    true_model: str | None = None
    true_model_proportion: float | None = None
    classification_frequency: dict[str, float] = field(default_factory=dict)
    mean_tse: float = math.nan
    se_tse: float = math.nan
    failures: int = 0

    def good(self) -> list[ReplicationRecord]:
        return [r for r in self.records if r.ok]

    def median(self, key: str) -> float:
        return self.percentiles[key]["50"]

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "aggregates": {
                "percentiles": self.percentiles,
                "selection_frequency": self.selection_frequency,
                "true_model": self.true_model,
                "true_model_proportion": self.true_model_proportion,
                "classification_frequency": self.classification_frequency,
                "mean_tse": self.mean_tse,
                "se_tse": self.se_tse,
                "failures": self.failures,
                "replications": len(self.records),
            },
            "records": [asdict(r) for r in self.records],
        }


def _frequency(labels: Iterable[str]) -> dict[str, float]:
    labels = list(labels)
    if not labels:
        return {}
    counts = Counter(labels)
    total = len(labels)
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return {k: v / total for k, v in ordered}


def summarize(records: list[ReplicationRecord], config: dict, true_model: ModelSpec | None) -> SimSummary:
    good = [r for r in records if r.ok]
    failures = len(records) - len(good)
    _check_failures(failures, len(records), "replications")
    summary = SimSummary(config, records, failures=failures)
    summary.percentiles = {
        "pi": percentile_table([r.pi for r in good]),
        "rank": percentile_table([r.rank for r in good]),
        "order": percentile_table([r.order for r in good]),
        "sigma_hat": percentile_table([r.sigma_hat for r in good]),
    }
    summary.selection_frequency = _frequency(r.selected for r in good)
    summary.classification_frequency = _frequency(r.classification for r in good)
    if true_model is not None and good:
        summary.true_model = true_model.code
        summary.true_model_proportion = sum(bool(r.true_selected) for r in good) / len(good)
    summary.mean_tse, summary.se_tse = mean_and_se([r.tse for r in good if not math.isnan(r.tse)])
    return summary


def _record(rep: int, seed: int, ds: Dataset, out: Outcome, true_model: ModelSpec | None) -> ReplicationRecord:
    chosen = out.chosen
    err = math.nan if ds.truth is None else tse(ds.truth, chosen.fit)
    return ReplicationRecord(
        rep=rep,
        seed=seed,
        selected=chosen.model.code,
        rank=chosen.fit.rank,
        order=chosen.model.order,
        size=chosen.model.size,
        pi=out.report.pi,
        sigma_hat=math.sqrt(out.report.sigma2_used),
        tse=err,
        classification=out.report.classification,
        method=out.method,
        true_selected=None if true_model is None else chosen.model == true_model,
    )


def run_replications(
    dgp: Dgp,
    reps: int,
    method: str = "bic",
    cfg: IcConfig = IcConfig(),
    base_seed: int = 0,
    cutoff: float | None = None,
    workers: int | None = None,
    family: Family | None = None,
) -> SimSummary:
    """Simulate ``reps`` datasets and run the selection pipeline on each.

    Failed replications are kept as records with an error message; more
    than 5% failures aborts the study.
    """
    if reps < 1:
        raise ParameterError(f"reps must be at least 1, got {reps}")
    if method not in METHODS:
        raise ParameterError(f"unknown method {method!r}; expected one of {METHODS}")
    family = family or dgp.family()
    true_model = dgp.true_model()
    c = default_cutoff(family.kind) if cutoff is None else cutoff

    def one(rep: int) -> ReplicationRecord:
        seed = base_seed + rep
        try:
            ds = generate_dataset(dgp, seed)
            out = run_pipeline(ds, family, cfg, c, method)
            return _record(rep, seed, ds, out, true_model)
        except (PindexError, np.linalg.LinAlgError, FloatingPointError) as exc:
            return ReplicationRecord(rep, seed, error=f"{type(exc).__name__}: {exc}")

    records = parallel_map(one, range(reps), workers)
    config = {
        "dgp": dgp.to_dict(),
        "reps": reps,
        "base_seed": base_seed,
        "method": method,
        "ic": cfg.to_dict(),
        "cutoff": c,
        "family": {"kind": family.kind, "size": family.size,
                   "intercept_policy": family.config.intercept_policy},
    }
    return summarize(records, config, true_model)


@dataclass
class BootstrapReport:
    original: str
    sigma_hat: float
    resamples: int
    seed: int
    reselection_frequency: float
    model_frequency: dict[str, float]
    pi_percentiles: dict[str, float]
    outcomes: list[dict]
    failures: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def parametric_bootstrap(
    dataset: Dataset,
    selected: SelectionResult,
    b: int,
    seed: int,
    family: Family,
    cfg: IcConfig = IcConfig(),
    cutoff: float | None = None,
    workers: int | None = None,
) -> BootstrapReport:
    """Resample ``Y* = fitted + sigma_hat * eps`` from the selected model.

    Each resample reruns BIC selection and the index; the report gives
    how often the original model comes back.
    """
    if b < 1:
        raise ParameterError(f"number of resamples must be at least 1, got {b}")
    fit = selected.fit
    n = dataset.n
    if fit.rank >= n:
        raise ParameterError("selected model is saturated; no residual variance to resample")
    sigma_hat = math.sqrt(fit.rss / (n - fit.rank))
    target = ModelSpec(selected.model.family_id, selected.model.term_indices,
                       selected.model.includes_intercept)

    def one(i: int) -> dict:
        eps = standard_normal(rng_stream(seed, i), n)
        ds = dataset.with_response(fit.fitted + sigma_hat * eps)
        try:
            out = run_pipeline(ds, family, cfg, cutoff, "bic")
        except (PindexError, np.linalg.LinAlgError) as exc:
            return {"resample": i, "selected": "", "pi": None, "error": str(exc)}
        return {"resample": i, "selected": out.chosen.model.code,
                "reselected": out.chosen.model == target,
                "pi": out.report.pi, "error": ""}

    outcomes = parallel_map(one, range(b), workers)
    good = [o for o in outcomes if not o["error"]]
    failures = b - len(good)
    _check_failures(failures, b, "bootstrap resamples")
    return BootstrapReport(
        original=selected.model.code,
        sigma_hat=sigma_hat,
        resamples=b,
        seed=seed,
        reselection_frequency=sum(o["reselected"] for o in good) / max(1, len(good)),
        model_frequency=_frequency(o["selected"] for o in good),
        pi_percentiles=percentile_table([o["pi"] for o in good]),
        outcomes=outcomes,
        failures=failures,
    )


@dataclass
class SubsampleReport:
    sizes: list[int]
    reps: int
    seed: int
    pi_percentiles: dict[str, dict[str, float]]
    selection_frequency: dict[str, dict[str, float]]
    failures: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    def median_pi(self, size: int) -> float:
        return self.pi_percentiles[str(size)]["50"]


def subsample_study(
    dataset: Dataset,
    sizes: Sequence[int],
    reps: int,
    seed: int,
    family: Family,
    cfg: IcConfig = IcConfig(),
    cutoff: float | None = None,
    workers: int | None = None,
) -> SubsampleReport:
    """Index distribution on row subsamples drawn without replacement."""
    if reps < 1:
        raise ParameterError(f"reps must be at least 1, got {reps}")
    uniq: list[int] = []
    for s in sizes:
        s = int(s)
        if s in uniq:
            warnings.warn(f"duplicate subsample size {s} ignored", stacklevel=2)
            continue
        uniq.append(s)
    bad = [s for s in uniq if not 1 <= s < dataset.n]
    if bad:
        raise ParameterError(
            f"subsample sizes must be in 1..{dataset.n - 1}; got {', '.join(map(str, bad))}"
        )

    jobs = [(si, s, r) for si, s in enumerate(uniq) for r in range(reps)]

    def one(job) -> tuple[int, str, float | None]:
        si, size, r = job
        rows = rng_stream(seed, si, r).permutation(dataset.n)[:size]
        rows.sort()
        try:
            out = run_pipeline(dataset.take(rows), family, cfg, cutoff, "bic")
        except (PindexError, np.linalg.LinAlgError):
            return size, "", None
        return size, out.chosen.model.code, out.report.pi

    results = parallel_map(one, jobs, workers)
    failures = sum(1 for _, _, pi in results if pi is None)
    _check_failures(failures, len(results), "subsample fits")
    pis = {str(s): percentile_table([pi for sz, _, pi in results if sz == s and pi is not None])
           for s in uniq}
    freq = {str(s): _frequency(code for sz, code, pi in results if sz == s and pi is not None)
            for s in uniq}
    return SubsampleReport(uniq, reps, seed, pis, freq, failures)


@dataclass
class CoverageReport:
    level: float
    reps: int
    seed: int
    oracle: bool
    per_coefficient: dict[str, float]
    overall: float
    true_model_proportion: float

    def to_dict(self) -> dict:
        return asdict(self)


def coverage_study(
    dgp: Dgp,
    level: float = 0.95,
    reps: int = 300,
    cfg: IcConfig = IcConfig(),
    seed: int = 0,
    *,
    oracle: bool = False,
    workers: int | None = None,
) -> CoverageReport:
    """Coverage of naive t-intervals computed after BIC selection.

    A true coefficient whose term was not selected is estimated as 0
    with no interval and counts as not covered.  With ``oracle`` the true
    model is used instead of the selected one.
    """
    if not 0 < level < 1:
        raise ParameterError(f"level must be in (0, 1), got {level}")
    if reps < 1:
        raise ParameterError(f"reps must be at least 1, got {reps}")
    coefs = dgp.true_coefficients()
    if not coefs:
        raise ParameterError(f"{dgp.kind} has no finite-dimensional truth to cover")
    family = dgp.family()
    true_model = dgp.true_model()
    terms = sorted(coefs)

    def one(rep: int) -> tuple[list[bool], bool]:
        ds = generate_dataset(dgp, seed + rep)
        sel = fixed_selection(ds, true_model) if oracle else select_best(ds, family, "bic")
        model = sel.model
        fit = fit_columns(model.matrix(ds), ds.y, with_cov=True)
        n, r = ds.n, fit.rank
        hits = [False] * len(terms)
        if fit.unscaled_cov_diag is not None and r < n:
            q = scipy.stats.t.ppf(0.5 + level / 2.0, n - r)
            s2 = fit.rss / (n - r)
            offset = 1 if model.includes_intercept else 0
            for a, t in enumerate(terms):
                if t in model.term_indices:
                    pos = offset + model.term_indices.index(t)
                    half = q * math.sqrt(s2 * fit.unscaled_cov_diag[pos])
                    hits[a] = abs(fit.coefficients[pos] - coefs[t]) <= half
        return hits, model == true_model

    results = parallel_map(one, range(reps), workers)
    cover = np.array([h for h, _ in results], dtype=float)
    return CoverageReport(
        level=level,
        reps=reps,
        seed=seed,
        oracle=oracle,
        per_coefficient={str(t): float(cover[:, a].mean()) for a, t in enumerate(terms)},
        overall=float(cover.mean()),
        true_model_proportion=float(np.mean([hit for _, hit in results])),
    )


@dataclass
class RiskReport:
    reps: int
    seed: int
    cutoff: float
    mean_tse: dict[str, float]
    se_tse: dict[str, float]
    adaptive_choice_frequency: dict[str, float]
    records: list[dict] = field(repr=False, default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def risk_comparison(
    dgp: Dgp,
    reps: int,
    cutoff: float | None = None,
    seed: int = 0,
    cfg: IcConfig = IcConfig(),
    workers: int | None = None,
) -> RiskReport:
    """Mean total square error of AIC, BIC and the adaptive rule.

    All methods see the same datasets.  When the process has a true
    candidate model, its risk is reported under ``"oracle"``.
    """
    if reps < 1:
        raise ParameterError(f"reps must be at least 1, got {reps}")
    family = dgp.family()
    c = default_cutoff(family.kind) if cutoff is None else cutoff
    true_model = dgp.true_model()

    def one(rep: int) -> dict:
        ds = generate_dataset(dgp, seed + rep)
        bic = select_best(ds, family, "bic")
        aic = select_best(ds, family, "aic")
        report = compute_pi(ds, bic, family, cfg, c)
        use_aic = report.pi < c
        row = {
            "rep": rep,
            "aic": tse(ds.truth, aic.fit),
            "bic": tse(ds.truth, bic.fit),
            "pi": report.pi,
            "adaptive_method": "aic" if use_aic else "bic",
        }
        row["adaptive"] = row["aic"] if use_aic else row["bic"]
        if true_model is not None:
            row["oracle"] = tse(ds.truth, fixed_selection(ds, true_model).fit)
        return row

    rows = parallel_map(one, range(reps), workers)
    methods = ["aic", "bic", "adaptive"] + (["oracle"] if true_model is not None else [])
    means, ses = {}, {}
    for m in methods:
        means[m], ses[m] = mean_and_se([row[m] for row in rows])
    return RiskReport(
        reps=reps,
        seed=seed,
        cutoff=c,
        mean_tse=means,
        se_tse=ses,
        adaptive_choice_frequency=_frequency(row["adaptive_method"] for row in rows),
        records=rows,
    )
