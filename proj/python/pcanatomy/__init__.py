"""Regional Phillips-curve estimation toolkit.

Thin Python layer over the C++ core: panel ingestion, derived-variable
construction, two-way fixed-effects 2SLS with shift-share instruments,
cluster/Driscoll-Kraay inference, the structural slope mapping, and the
synthetic-panel Monte Carlo harness.
"""

from ._core import (
    DEFAULT_BETA,
    CovarianceRequest,
    CovKind,
    DataError,
    DesignSpec,
    DgpConfig,
    EstimationError,
    FeSet,
    FirstStageInfo,
    FitResult,
    McParamStat,
    McResult,
    Model,
    PanelDataset,
    Quarter,
    SyntheticPanel,
    UsageError,
    Window,
    __version__,
    add_model_variables,
    ar1_persistence,
    calvo_kappa,
    gen_panel,
    implied_post_slope,
    kappa_from_psi,
    load_csv,
    mc_study,
    model_spec,
    psi_from_kappa,
    tsls_fit,
    write_csv,
)

__all__ = [
    "DEFAULT_BETA",
    "CovarianceRequest",
    "CovKind",
    "DataError",
    "DesignSpec",
    "DgpConfig",
    "EstimationError",
    "FeSet",
    "FirstStageInfo",
    "FitResult",
    "McParamStat",
    "McResult",
    "Model",
    "PanelDataset",
    "Quarter",
    "SyntheticPanel",
    "UsageError",
    "Window",
    "__version__",
    "add_model_variables",
    "ar1_persistence",
    "calvo_kappa",
    "gen_panel",
    "implied_post_slope",
    "kappa_from_psi",
    "load_csv",
    "mc_study",
    "model_spec",
    "psi_from_kappa",
    "tsls_fit",
    "write_csv",
]
