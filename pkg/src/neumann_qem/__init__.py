"""Truncated-Neumann-series mitigation of gate and readout errors in expectation values."""

__version__ = "0.1.0"

from .estimators import GateErrorMitigator, MeasurementErrorMitigator
from .exceptions import (
    DistributionError,
    MethodInapplicableError,
    OracleMismatchError,
    ParameterError,
    QEMError,
    ResourceLimitError,
    StructuralError,
)
from .gem import GemConfig, exact_series_gem, mitigate_gem, sample_eta_gem
from .mem import MemConfig, exact_series_mem, mitigate_mem, sample_eta_mem, sequential_measure
from .neumann import (
    TruncationPlan,
    coefficients,
    combine,
    make_plan,
    optimal_K_gem,
    optimal_K_mem,
    shots_per_term,
)
from .noise_models import ErrorMatrix, GateNoiseSpec, make_channel, noise_resistance_gate, noise_resistance_meas
from .quantum_core import DensityMatrix, DiagonalObservable, KrausChannel, PauliTransferMatrix
from .report import MitigationReport
from .sampling import EstimateSummary, SeededStream
