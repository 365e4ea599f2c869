"""Input validation helpers shared by the library, the estimators and the CLI."""

from __future__ import annotations

import numpy as np

from .exceptions import DistributionError, ParameterError, ResourceLimitError, StructuralError

MAX_PTM_QUBITS = 6
MAX_DIAGONAL_QUBITS = 12

STOCHASTIC_TOL = 1e-10
PROB_SUM_TOL = 1e-9
NEG_MASS_TOL = 1e-12


def num_qubits_from_dim(dim: int) -> int:
    """Return ``n`` such that ``dim == 2**n``, or raise."""
    n = int(dim).bit_length() - 1
    if dim < 2 or (1 << n) != dim:
        raise StructuralError(f"dimension {dim} is not a power of two >= 2")
    return n


def check_qubits(n: int, cap: int = MAX_DIAGONAL_QUBITS) -> int:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ParameterError(f"qubit count must be a positive integer, got {n!r}")
    if n > cap:
        raise ResourceLimitError(f"{n} qubits exceeds the cap of {cap} for this object")
    return int(n)


def check_open_unit(value: float, name: str) -> float:
    """Require ``0 < value < 1``."""
    value = float(value)
    if not 0.0 < value < 1.0:
        raise ParameterError(f"{name} must lie in (0, 1), got {value}")
    return value


def check_closed_unit(value: float, name: str) -> float:
    """Require ``0 <= value <= 1``."""
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ParameterError(f"{name} must lie in [0, 1], got {value}")
    return value


def check_square(matrix, name: str = "matrix", dtype=float) -> np.ndarray:
    arr = np.asarray(matrix, dtype=dtype)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.size == 0:
        raise StructuralError(f"{name} must be a non-empty square matrix, got shape {arr.shape}")
    return arr


def check_probability_vector(probs, tol: float = PROB_SUM_TOL) -> np.ndarray:
    """Validate and renormalize a probability vector.

    Tiny negative entries (round-off from matrix products) are clipped to zero;
    anything more negative than ``NEG_MASS_TOL`` is rejected.
    """
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise DistributionError(f"probability vector must be 1-D and non-empty, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise DistributionError("probability vector contains non-finite entries")
    if p.min() < -NEG_MASS_TOL:
        raise DistributionError(f"negative probability mass {p.min():.3e}")
    total = p.sum()
    if abs(total - 1.0) > tol:
        raise DistributionError(f"probabilities sum to {total!r}, not 1")
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def check_column_stochastic(matrix, tol: float = STOCHASTIC_TOL) -> np.ndarray:
    a = check_square(matrix, "error matrix")
    if not np.all(np.isfinite(a)):
        raise DistributionError("error matrix contains non-finite entries")
    if a.min() < 0.0:
        raise DistributionError(f"error matrix has a negative entry {a.min():.3e}")
    sums = a.sum(axis=0)
    worst = np.max(np.abs(sums - 1.0))
    if worst > tol:
        raise DistributionError(f"error matrix is not column stochastic (max |colsum - 1| = {worst:.3e})")
    return a


def check_shots(shots) -> int:
    if isinstance(shots, bool) or int(shots) != shots or shots < 1:
        raise ParameterError(f"shot count must be a positive integer, got {shots!r}")
    return int(shots)


def check_state_batch(X) -> np.ndarray:
    """Coerce one density matrix ``(d, d)`` or a batch ``(m, d, d)`` to a batch."""
    arr = np.asarray(X, dtype=complex)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2] or arr.shape[0] == 0:
        raise StructuralError(f"expected density matrices of shape (m, d, d), got {arr.shape}")
    num_qubits_from_dim(arr.shape[1])
    return arr


def check_distribution_batch(X) -> np.ndarray:
    """Coerce one probability vector ``(d,)`` or a batch ``(m, d)`` to a validated batch."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr[None]
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise StructuralError(f"expected probability vectors of shape (m, d), got {arr.shape}")
    num_qubits_from_dim(arr.shape[1])
    return np.stack([check_probability_vector(row) for row in arr])
