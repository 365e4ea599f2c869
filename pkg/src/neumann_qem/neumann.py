"""Truncated Neumann series: coefficients, truncation order, remainder and shot budget.

With ``c_K(k) = (-1)**k * C(K+1, k+1)`` the polynomial identity

    I = sum_{k=1}^{K+1} c_K(k-1) A**k + (I - A)**(K+1)

holds for every square ``A``.  Applied to a PTM or a readout matrix, the
weighted combination of ``K + 1`` noisy expectations recovers the noiseless one
up to a remainder of order ``xi**(K+1)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import MethodInapplicableError, ParameterError
from .validation import check_open_unit, check_square

MAX_ORDER = 30
# slack on ceil() so that exact ratios like log(0.01)/log(0.1) == 2 are not bumped up by round-off
_CEIL_SLACK = 1e-9


def _check_order(K) -> int:
    if isinstance(K, bool) or int(K) != K or K < 0:
        raise ParameterError(f"truncation order must be a non-negative integer, got {K!r}")
    if K > MAX_ORDER:
        raise ParameterError(f"truncation order {K} exceeds the exact-arithmetic limit {MAX_ORDER}")
    return int(K)


def coefficients(K: int) -> list[int]:
    """``[c_K(0), ..., c_K(K)]`` as exact integers."""
    K = _check_order(K)
    return [(-1) ** k * math.comb(K + 1, k + 1) for k in range(K + 1)]


def delta_cap(K: int) -> int:
    """``C(2K+2, K+1) - 1``, equal to the sum of squared coefficients."""
    K = _check_order(K)
    return math.comb(2 * K + 2, K + 1) - 1


def combine(values: Sequence[float], coeffs: Sequence[int]) -> float:
    """``sum_k coeffs[k-1] * values[k]`` for ``values`` indexed from order 1."""
    if len(values) != len(coeffs):
        raise ParameterError(f"{len(values)} values for {len(coeffs)} coefficients")
    return float(math.fsum(c * float(v) for c, v in zip(coeffs, values)))


def _ceil_order(ratio: float) -> int:
    return max(0, math.ceil(ratio - 1.0 - _CEIL_SLACK * max(1.0, abs(ratio))))


def _check_xi(xi: float, what: str) -> float:
    xi = float(xi)
    if not math.isfinite(xi) or xi < 0.0:
        raise ParameterError(f"{what} must be a non-negative number, got {xi}")
    if xi >= 1.0:
        raise MethodInapplicableError(
            f"{what} = {xi:.6g} violates the requirement {what} < 1; the truncated series cannot be bounded"
        )
    return xi


def optimal_K_gem(epsilon: float, xi_g: float, obs_inf_norm: float = 1.0) -> int:
    """Smallest ``K >= 0`` with ``obs_inf_norm * xi_g**(K+1) <= epsilon``."""
    epsilon = check_open_unit(epsilon, "epsilon")
    xi_g = _check_xi(xi_g, "xi_g")
    if obs_inf_norm < 0:
        raise ParameterError(f"observable norm must be non-negative, got {obs_inf_norm}")
    if xi_g == 0.0 or obs_inf_norm <= epsilon:
        return 0
    return _ceil_order((math.log(epsilon) - math.log(obs_inf_norm)) / math.log(xi_g))


def optimal_K_mem(epsilon: float, xi_m: float) -> int:
    """Smallest ``K >= 0`` with ``xi_m**(K+1) <= epsilon``."""
    epsilon = check_open_unit(epsilon, "epsilon")
    xi_m = _check_xi(xi_m, "xi_m")
    if xi_m == 0.0:
        return 0
    return _ceil_order(math.log(epsilon) / math.log(xi_m))


def shots_per_term(K: int, epsilon: float, delta: float) -> int:
    """Hoeffding budget ``ceil(2 (K+1) Delta log2(2/delta) / epsilon**2)`` per noisy term."""
    K = _check_order(K)
    epsilon = check_open_unit(epsilon, "epsilon")
    delta = check_open_unit(delta, "delta")
    return math.ceil(2 * (K + 1) * delta_cap(K) * math.log2(2.0 / delta) / epsilon ** 2)


def remainder_bound_gem(xi_g: float, obs_inf_norm: float, K: int) -> float:
    return float(obs_inf_norm) * _check_xi(xi_g, "xi_g") ** (_check_order(K) + 1)


def remainder_bound_mem(xi_m: float, K: int) -> float:
    return _check_xi(xi_m, "xi_m") ** (_check_order(K) + 1)


def matrix_identity_residual(A, K: int) -> float:
    """Max-entry norm of ``I - sum_k c_K(k-1) A**k - (I - A)**(K+1)``."""
    a = check_square(A, "A")
    coeffs = coefficients(K)
    eye = np.eye(a.shape[0])
    series = np.zeros_like(a)
    power = eye
    for c in coeffs:
        power = power @ a
        series = series + c * power
    tail = np.linalg.matrix_power(eye - a, len(coeffs))
    return float(np.max(np.abs(eye - series - tail)))


@dataclass(frozen=True)
class TruncationPlan:
    """Full mitigation schedule: order, weights and per-term shot count."""

    K: int
    coeffs: list = field(default_factory=list)
    delta_cap: int = 0
    shots_per_term: int = 1
    epsilon: float = 0.01
    delta: float = 0.01
    xi: float = 0.0
    overhead: int = 1
    guarantee: str = "hoeffding"

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "TruncationPlan":
        return cls(**data)


def make_plan(
    epsilon: float,
    delta: float,
    xi: float,
    mode: str = "gem",
    obs_inf_norm: float = 1.0,
    K: int | None = None,
    shots: int | None = None,
) -> TruncationPlan:
    """Build a plan from the noise resistance, honouring optional ``K``/``shots`` overrides.

    An override that lowers ``K`` below the optimal order or ``shots`` below
    the Hoeffding budget drops the ``(epsilon, delta)`` guarantee; the plan is
    then marked ``guarantee="none"``.
    """
    epsilon = check_open_unit(epsilon, "epsilon")
    delta = check_open_unit(delta, "delta")
    if mode == "gem":
        K_opt = optimal_K_gem(epsilon, xi, obs_inf_norm)
    elif mode == "mem":
        K_opt = optimal_K_mem(epsilon, xi)
    else:
        raise ParameterError(f"mode must be 'gem' or 'mem', got {mode!r}")
    K_used = K_opt if K is None else _check_order(K)
    budget = shots_per_term(K_used, epsilon, delta)
    M = budget
    if shots is not None:
        if isinstance(shots, bool) or int(shots) != shots or shots < 1:
            raise ParameterError(f"shot override must be a positive integer, got {shots!r}")
        M = int(shots)
    guarantee = "hoeffding" if K_used >= K_opt and M >= budget else "none"
    return TruncationPlan(
        K=K_used,
        coeffs=coefficients(K_used),
        delta_cap=delta_cap(K_used),
        shots_per_term=M,
        epsilon=epsilon,
        delta=delta,
        xi=float(xi),
        overhead=4 ** K_used,
        guarantee=guarantee,
    )
