"""Parametricness index diagnostics for linear-regression model selection."""

from ._accel import NUMBA_ENABLED, backend_name
from .criteria import IcConfig, aic_score, bic_score, ic_value
from .dataio import ingest_csv
from .dgp import PRESETS, Dgp, generate_dataset, preset
from .errors import DataError, ParameterError, PiError, PindexError, SelectionError, StudyError
from .linalg import (
    Dataset,
    DesignMatrix,
    FitSummary,
    least_squares_fit,
    oracle_residual_norm,
    tse,
)
from .models import (
    Family,
    FamilyConfig,
    ModelSpec,
    build_family,
    build_polynomial_design,
    polynomial_dataset,
    submodels_one_less,
)
from .pi import (
    ConditionDiagnostics,
    PiReport,
    adaptive_select,
    classify,
    compute_pi,
    oracle_conditions,
)
from .study import (
    coverage_study,
    parametric_bootstrap,
    risk_comparison,
    run_replications,
    subsample_study,
)
from .subset import SelectionResult, best_rss_per_size, select_best

__version__ = "0.1.0"

__all__ = [
    "ConditionDiagnostics", "DataError", "Dataset", "DesignMatrix", "Dgp", "Family",
    "FamilyConfig", "FitSummary", "IcConfig", "ModelSpec", "NUMBA_ENABLED", "PRESETS",
    "ParameterError", "PiError", "PiReport", "PindexError", "SelectionError",
    "SelectionResult", "StudyError", "adaptive_select", "aic_score", "backend_name",
    "best_rss_per_size", "bic_score", "build_family", "build_polynomial_design", "classify",
    "compute_pi", "coverage_study", "generate_dataset", "ic_value", "ingest_csv",
    "least_squares_fit", "oracle_conditions", "oracle_residual_norm",
    "parametric_bootstrap", "polynomial_dataset", "preset", "risk_comparison",
    "run_replications", "select_best", "submodels_one_less", "subsample_study", "tse",
]
