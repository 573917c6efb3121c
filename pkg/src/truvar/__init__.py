"""truvar: truncated variation of sampled stochastic-process paths.

Exact path kernels, explicit concentration/MGF bound evaluators and a
seed-reproducible Monte Carlo verification harness.
"""

from ._backend import BACKEND
from .path import SampledPath, read_path_csv, write_path_csv
from .tv import (
    Skeleton,
    TvResult,
    level_crossing_skeleton,
    minimal_envelope,
    total_variation,
    truncated_variation,
    tv_oracle_dp,
    tv_oracle_exhaustive,
    tv_profile,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "SampledPath",
    "Skeleton",
    "TvResult",
    "__version__",
    "level_crossing_skeleton",
    "minimal_envelope",
    "read_path_csv",
    "total_variation",
    "truncated_variation",
    "tv_oracle_dp",
    "tv_oracle_exhaustive",
    "tv_profile",
    "write_path_csv",
]
