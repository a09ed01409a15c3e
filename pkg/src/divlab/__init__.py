"""divlab: indivisibility and resourcefulness measures for single-qubit
open dynamics over finite time intervals.
"""

__version__ = "0.1.0"

from .channels import (
    JCParams,
    LindbladTrajectory,
    SingularTimeError,
    SurvivalRatio,
    apply_ad,
    choi_of,
    decay_amplitude,
    decay_rate,
    free_family,
    integrate_lindblad,
    interval_map,
)
from .inequalities import SweepConfig, VerdictRecord, sweep, verify
from .measures import (
    MeasureRecord,
    OptConfig,
    cp_indivisibility,
    diameter_d,
    measure_point,
    nm1,
    nm2,
    p_indivisibility,
)
from .qmat import (
    BlochVector,
    bloch_to_state,
    hermitian_eig,
    trace_distance,
    trace_norm,
)

__all__ = [
    "__version__",
    "JCParams", "LindbladTrajectory", "SingularTimeError", "SurvivalRatio",
    "apply_ad", "choi_of", "decay_amplitude", "decay_rate", "free_family",
    "integrate_lindblad", "interval_map",
    "SweepConfig", "VerdictRecord", "sweep", "verify",
    "MeasureRecord", "OptConfig", "cp_indivisibility", "diameter_d",
    "measure_point", "nm1", "nm2", "p_indivisibility",
    "BlochVector", "bloch_to_state", "hermitian_eig", "trace_distance",
    "trace_norm",
]
