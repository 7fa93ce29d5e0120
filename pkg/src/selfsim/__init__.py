"""Self-similar Gaussian processes: simulation and index estimation.

The package covers four process families (fractional, subfractional,
bifractional and trifractional Brownian motion), exact samplers for each,
five self-similarity index estimators built on an exponential subsampling
of the path, a parametric bootstrap bias correction, and a reproducible
Monte Carlo benchmark harness with CSV export.  A scikit-learn style
estimator API lives in :mod:`selfsim.estimators`; the command line entry
point is ``selfsim``.
"""

from .bootstrap import BootstrapError, BootstrapResult, bias_correct
from .estimate import (
    Algorithm,
    DegenerateDataError,
    EstimateResult,
    EstimationError,
    estimate_known_sigma,
    estimate_kurtosis,
    estimate_qv,
    estimate_sfbm,
    estimate_tfbm,
    f_known_sigma,
    kurtosis_stat,
)
from .estimators import (
    KnownSigmaLamperti,
    KurtosisLamperti,
    QuadraticVariations,
    SubfractionalLamperti,
    TrifractionalLamperti,
)
from .harness import ExperimentGrid, McCell, McTable, export_table, export_tables, run_grid
from .kernels import Family, KernelSpec, ParameterError, cov, cov_matrix, fgn_autocov
from .lamperti import (
    SubsampledSeries,
    TimedSeries,
    build_subsample,
    j_threshold,
    lamperti_forward,
    lamperti_inverse,
    stationary_series,
)
from .numeric import BracketError, SolveMethod, SolveReport, brent_minimize, halley_solve
from .simulate import (
    RngStream,
    SamplePath,
    SimulationError,
    read_path_csv,
    sample_path,
    simulate_cholesky,
    simulate_fbm_circulant,
    write_path_csv,
)

__version__ = "0.1.0"

__all__ = [
    "Algorithm",
    "BootstrapError",
    "BootstrapResult",
    "BracketError",
    "DegenerateDataError",
    "EstimateResult",
    "EstimationError",
    "ExperimentGrid",
    "Family",
    "KernelSpec",
    "KnownSigmaLamperti",
    "KurtosisLamperti",
    "McCell",
    "McTable",
    "ParameterError",
    "QuadraticVariations",
    "RngStream",
    "SamplePath",
    "SimulationError",
    "SolveMethod",
    "SolveReport",
    "SubfractionalLamperti",
    "SubsampledSeries",
    "TimedSeries",
    "TrifractionalLamperti",
    "bias_correct",
    "brent_minimize",
    "build_subsample",
    "cov",
    "cov_matrix",
    "estimate_known_sigma",
    "estimate_kurtosis",
    "estimate_qv",
    "estimate_sfbm",
    "estimate_tfbm",
    "export_table",
    "export_tables",
    "f_known_sigma",
    "fgn_autocov",
    "halley_solve",
    "j_threshold",
    "kurtosis_stat",
    "lamperti_forward",
    "lamperti_inverse",
    "read_path_csv",
    "run_grid",
    "sample_path",
    "simulate_cholesky",
    "simulate_fbm_circulant",
    "stationary_series",
    "write_path_csv",
]
