"""Generalized propensity scores for multi-valued treatments under weighted
network interference in country-year panels."""

__version__ = "0.1.0"

from .dgp import DgpSpec, generate, true_direct_effect  # noqa: E402
from .effects import (bootstrap, estimate_direct_effect, run_iiw_sweep,  # noqa: E402
                      write_effects_csv, write_effects_json)
from .errors import (ConfigError, DataError, DomainError, FitError,  # noqa: E402
                     NetPScoreError)
from .exposure import build_ntem  # noqa: E402
from .influence import build_influence, load_pairwise, validate_pairwise  # noqa: E402
from .mnl import fit_mnl  # noqa: E402
from .mvlr import fit_mvlr, lambda_density  # noqa: E402
from .outcome import fit_outcome, impute_potential_outcome  # noqa: E402
from .panel import (PanelFrame, Schema, Scheme, categorize_treatment,  # noqa: E402
                    lag_align, load_panel)
from .pipeline import PipelineOptions, fit_pipeline, prepare_analysis  # noqa: E402
from .transform import orq_fit_transform  # noqa: E402

__all__ = [
    "DgpSpec", "generate", "true_direct_effect", "bootstrap", "estimate_direct_effect",
    "run_iiw_sweep", "write_effects_csv", "write_effects_json", "ConfigError", "DataError",
    "DomainError", "FitError", "NetPScoreError", "build_ntem", "build_influence",
    "load_pairwise", "validate_pairwise", "fit_mnl", "fit_mvlr", "lambda_density",
    "fit_outcome", "impute_potential_outcome", "PanelFrame", "Schema", "Scheme",
    "categorize_treatment", "lag_align", "load_panel", "PipelineOptions", "fit_pipeline",
    "prepare_analysis", "orq_fit_transform",
]
