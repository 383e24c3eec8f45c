"""Command-line driver: ``pindex <command> [options]``.

Every command writes one JSON report (stdout, or ``--out``).  Reports echo
all inputs that affect the result, so re-running with the echoed
settings reproduces the report byte for byte.  Errors go to stderr as a
JSON object with a category and a list of messages.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from . import dataio
from .criteria import IcConfig
from .dgp import PRESETS, Dgp, generate_dataset, preset
from .errors import PindexError
from .linalg import Dataset
from .models import Family, FamilyConfig, polynomial_dataset
from .pi import adaptive_select, compute_pi
from .study import (
    coverage_study,
    parametric_bootstrap,
    resolve_workers,
    risk_comparison,
    run_replications,
    subsample_study,
)
from .subset import SelectionResult, select_best

COMMANDS = ("fit", "pi", "simulate", "bootstrap", "subsample", "coverage", "risk")
DATA_COMMANDS = ("fit", "pi", "bootstrap", "subsample")
STUDY_COMMANDS = ("simulate", "coverage", "risk")
EXIT_CODES = {"config": 2, "parameter": 2, "data": 3}
DEFAULT_MAX_ORDER = 30


class ConfigError(PindexError):
    category = "config"

    def __init__(self, messages: list[str]):
        super().__init__("; ".join(messages))
        self.messages = messages


@dataclass
class RunConfig:
    command: str
    data: str | None = None
    response: str | None = None
    preset: str | None = None
    n: int | None = None
    family: str | None = None
    max_order: int | None = None
    lambda_n: float = 1.0
    d: float = 0.0
    sigma: float | None = None
    cutoff: float | None = None
    reps: int = 300
    seed: int = 0
    method: str = "bic"
    sizes: list[int] = field(default_factory=list)
    level: float = 0.95
    oracle: bool = False
    out: str | None = None
    csv_out: str | None = None
    plot_data: str | None = None
    threads: int | None = None

    def validate(self) -> None:
        """Collect every problem before failing."""
        errs = []
        if self.command not in COMMANDS:
            errs.append(f"unknown command {self.command!r}")
        if self.command in DATA_COMMANDS:
            if (self.data is None) == (self.preset is None):
                errs.append("give exactly one data source: --data or --preset")
            if self.data is not None and not self.response:
                errs.append("--response is required with --data")
        if self.command in STUDY_COMMANDS:
            if self.data is not None:
                errs.append(f"{self.command} runs on a simulated process; --data is not accepted")
            if self.preset is None:
                errs.append(f"{self.command} needs --preset")
        if self.preset is not None and self.preset not in PRESETS:
            errs.append(f"unknown preset {self.preset!r}; valid presets: {', '.join(sorted(PRESETS))}")
        if self.family is not None and self.family not in ("nested", "subset"):
            errs.append(f"--family must be 'nested' or 'subset', got {self.family!r}")
        if self.max_order is not None and self.max_order < 1:
            errs.append("--max-order must be at least 1")
        if self.n is not None and self.n < 10:
            errs.append("--n must be at least 10")
        if not self.lambda_n > 0:
            errs.append("--lambda must be positive")
        if not self.d >= 0:
            errs.append("--d must be non-negative")
        if self.sigma is not None and not self.sigma > 0:
            errs.append("--sigma must be positive")
        if self.cutoff is not None and not self.cutoff > 0:
            errs.append("--cutoff must be positive")
        if self.reps < 1:
            errs.append("--reps must be at least 1")
        if self.seed < 0:
            errs.append("--seed must be non-negative")
        if self.method not in ("bic", "aic", "adaptive"):
            errs.append("--method must be one of bic, aic, adaptive")
        if self.command == "subsample" and not self.sizes:
            errs.append("subsample needs --sizes")
        if not 0 < self.level < 1:
            errs.append("--level must be in (0, 1)")
        if self.threads is not None and self.threads < 1:
            errs.append("--threads must be at least 1")
        if errs:
            raise ConfigError(errs)

    def echo(self) -> dict:
        """Inputs that determine the report (output paths and threads excluded)."""
        d = asdict(self)
        for k in ("out", "csv_out", "plot_data", "threads"):
            d.pop(k)
        return d

    def ic(self) -> IcConfig:
        return IcConfig(self.lambda_n, self.d, None if self.sigma is None else self.sigma**2)


def _dgp(cfg: RunConfig) -> Dgp:
    dgp = preset(cfg.preset)
    changes = {}
    if cfg.n is not None:
        changes["n"] = cfg.n
    if cfg.max_order is not None and dgp.design == "polynomial":
        changes["max_order"] = cfg.max_order
    dgp = replace(dgp, **changes) if changes else dgp
    want = "nested" if dgp.design == "polynomial" else "subset"
    if cfg.family is not None and cfg.family != want:
        raise ConfigError([f"preset {cfg.preset} is a {want} problem; --family {cfg.family} does not apply"])
    return dgp


def _load(cfg: RunConfig) -> tuple[Dataset, Family]:
    if cfg.preset is not None:
        dgp = _dgp(cfg)
        return generate_dataset(dgp, cfg.seed), dgp.family()
    raw = dataio.ingest_csv(cfg.data, cfg.response)
    kind = cfg.family or ("nested" if raw.p == 1 else "subset")
    if kind == "nested":
        if raw.p != 1:
            raise ConfigError([f"nested order selection needs exactly one predictor, file has {raw.p}"])
        order = cfg.max_order or DEFAULT_MAX_ORDER
        ds = polynomial_dataset(raw.X[:, 0], raw.y, order)
        ds = Dataset(ds.y, ds.X, tuple(f"{raw.labels[0]}^{j}" for j in range(1, order + 1)))
        return ds, Family(FamilyConfig("nested", order))
    if raw.p < 1:
        raise ConfigError(["data file has no predictor columns"])
    return raw, Family(FamilyConfig("subset", raw.p))


def _selection_dict(ds: Dataset, sel: SelectionResult) -> dict:
    names = (["(intercept)"] if sel.model.includes_intercept else []) + [
        ds.labels[t - 1] for t in sel.model.term_indices
    ]
    fit = sel.fit
    return {
        "model": sel.model.to_dict(),
        "criterion": sel.criterion,
        "score": sel.score,
        "rss": fit.rss,
        "rank": fit.rank,
        "sigma_hat2": fit.sigma_hat2,
        "coefficients": [{"term": nm, "estimate": float(c)} for nm, c in zip(names, fit.coefficients)],
    }


def _family_dict(family: Family) -> dict:
    return {"kind": family.kind, "size": family.size, "intercept_policy": family.config.intercept_policy}


def execute(cfg: RunConfig) -> tuple[dict, list[dict] | None, list[dict] | None]:
    """Run one command.

    Returns the JSON report, per-replication rows and percentile-curve
    rows (either may be ``None``).
    """
    cfg.validate()
    ic = cfg.ic()
    workers = resolve_workers(cfg.threads)
    rows = plot = None

    if cfg.command in DATA_COMMANDS:
        ds, family = _load(cfg)
        head = {"n": ds.n, "family": _family_dict(family), "labels": list(ds.labels)}
        if cfg.command == "fit":
            result = {
                **head,
                "bic": _selection_dict(ds, select_best(ds, family, "bic")),
                "aic": _selection_dict(ds, select_best(ds, family, "aic")),
            }
        elif cfg.command == "pi":
            ad = adaptive_select(ds, family, ic, cfg.cutoff)
            result = {
                **head,
                "selection": _selection_dict(ds, ad.bic),
                "pi_report": ad.report.to_dict(),
                "classification": ad.report.classification,
                "adaptive": ad.to_dict(),
            }
        elif cfg.command == "bootstrap":
            sel = select_best(ds, family, "bic")
            boot = parametric_bootstrap(ds, sel, cfg.reps, cfg.seed, family, ic, cfg.cutoff, workers)
            rows = boot.outcomes
            plot = dataio.percentile_rows({"pi": boot.pi_percentiles}, group="bootstrap")
            result = {**head, "selection": _selection_dict(ds, sel),
                      "original_pi": compute_pi(ds, sel, family, ic, cfg.cutoff).pi,
                      "bootstrap": boot.to_dict()}
        else:
            sub = subsample_study(ds, cfg.sizes, cfg.reps, cfg.seed, family, ic, cfg.cutoff, workers)
            plot = []
            for s in sub.sizes:
                plot += dataio.percentile_rows({"pi": sub.pi_percentiles[str(s)]}, group=str(s))
            result = {**head, "subsample": sub.to_dict()}
    else:
        dgp = _dgp(cfg)
        if cfg.command == "simulate":
            summary = run_replications(dgp, cfg.reps, cfg.method, ic, cfg.seed, cfg.cutoff, workers)
            rows = [asdict(r) for r in summary.records]
            plot = dataio.percentile_rows(summary.percentiles, group=dgp.kind)
            result = summary.to_dict()
        elif cfg.command == "coverage":
            result = coverage_study(dgp, cfg.level, cfg.reps, ic, cfg.seed,
                                    oracle=cfg.oracle, workers=workers).to_dict()
        else:
            risk = risk_comparison(dgp, cfg.reps, cfg.cutoff, cfg.seed, ic, workers)
            rows = risk.records
            result = risk.to_dict()
        result = {"dgp": dgp.to_dict(), **result}

    return dataio.envelope(cfg.command, cfg.echo(), result), rows, plot


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("data source")
    g.add_argument("--data", help="CSV file with a header row")
    g.add_argument("--response", help="name of the response column in --data")
    g.add_argument("--preset", help=f"simulated process: {', '.join(sorted(PRESETS))}")
    g.add_argument("--n", type=int, help="sample size override for --preset")
    m = common.add_argument_group("model family and criterion")
    m.add_argument("--family", help="nested (polynomial order) or subset (all subsets)")
    m.add_argument("--max-order", type=int, dest="max_order")
    m.add_argument("--lambda", type=float, default=1.0, dest="lambda_n")
    m.add_argument("--d", type=float, default=0.0)
    m.add_argument("--sigma", type=float, help="known noise standard deviation")
    m.add_argument("--cutoff", type=float, help="default 1.6 nested, 1.2 subset")
    s = common.add_argument_group("study")
    s.add_argument("--reps", type=int, default=300)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--method", default="bic", help="bic, aic or adaptive (simulate)")
    s.add_argument("--sizes", type=lambda v: [int(x) for x in v.split(",") if x.strip()], default=[])
    s.add_argument("--level", type=float, default=0.95)
    s.add_argument("--oracle", action="store_true", help="coverage with the true model")
    o = common.add_argument_group("output")
    o.add_argument("--out", help="JSON report path (default stdout)")
    o.add_argument("--csv", dest="csv_out", help="per-replication CSV path")
    o.add_argument("--plot-data", dest="plot_data", help="percentile-curve CSV path")
    o.add_argument("--threads", type=int, help="worker threads (env PINDEX_THREADS)")

    parser = argparse.ArgumentParser(prog="pindex", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "fit": "select a model by BIC and AIC",
        "pi": "parametricness index of the BIC choice and the adaptive rule",
        "simulate": "replication study on a preset process",
        "bootstrap": "parametric bootstrap from the BIC choice",
        "subsample": "index on row subsamples of several sizes",
        "coverage": "coverage of naive post-selection intervals",
        "risk": "risk of AIC, BIC and the adaptive rule",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def _fail(exc: PindexError) -> int:
    messages = getattr(exc, "messages", None) or [str(exc)]
    payload = {"error": {"category": exc.category, "messages": messages}}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return EXIT_CODES.get(exc.category, 4)


def main(argv: list[str] | None = None) -> int:
    args = vars(build_parser().parse_args(argv))
    cfg = RunConfig(**args)
    try:
        report, rows, plot = execute(cfg)
    except PindexError as exc:
        return _fail(exc)
    text = dataio.dumps(report)
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if cfg.csv_out and rows is not None:
        dataio.write_rows_csv(rows, cfg.csv_out)
    if cfg.plot_data and plot is not None:
        dataio.write_rows_csv(plot, cfg.plot_data, ["group", "series", "percentile", "value"])
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
