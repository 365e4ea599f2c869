"""Gate-error mitigation.

The noisy value at order ``k`` is ``E_k = <<O| [N]**k |rho>>``, the
expectation after running the noise channel ``k`` times in sequence.  Each
``E_k`` is estimated from ``M`` measured shots and the estimates are combined
with the Neumann coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .exceptions import OracleMismatchError, ParameterError, StructuralError
from .neumann import TruncationPlan, make_plan, remainder_bound_gem
from .noise_models import GateNoiseSpec, local_channel, noise_resistance_gate
from .quantum_core import (
    DensityMatrix,
    DiagonalObservable,
    KrausChannel,
    PauliTransferMatrix,
    apply_channel,
    exact_expectation,
    observable_vec,
    ptm_from_kraus,
    state_vec,
)
from .report import MitigationReport, build_report, sample_orders
from .sampling import (
    EstimateSummary,
    SeededStream,
    categorical_samples,
    empirical_observable_mean,
    mean_from_counts,
    sample_counts,
)
from .validation import MAX_PTM_QUBITS, check_open_unit, check_qubits, check_shots

__all__ = [
    "GemConfig",
    "MitigationReport",
    "exact_series_gem",
    "sample_eta_gem",
    "mitigate_gem",
]

SERIES_AGREEMENT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class GemConfig:
    """Inputs of one gate-error mitigation run.

    ``noise`` is either a catalog spec, applied independently to every qubit,
    or an explicit :class:`KrausChannel` on all ``n`` qubits.  ``K`` and
    ``shots`` override the planned order and per-term shot count.
    """

    state: DensityMatrix
    observable: DiagonalObservable
    noise: GateNoiseSpec | KrausChannel
    epsilon: float = 0.01
    delta: float = 0.01
    seed: int = 0
    K: int | None = None
    shots: int | None = None

    def __post_init__(self):
        check_open_unit(self.epsilon, "epsilon")
        check_open_unit(self.delta, "delta")
        if self.state.n != self.observable.n:
            raise StructuralError(f"state has {self.state.n} qubits, observable {self.observable.n}")
        check_qubits(self.state.n, MAX_PTM_QUBITS)
        if self.channel.n != self.state.n:
            raise StructuralError(f"noise acts on {self.channel.n} qubits, state on {self.state.n}")

    @cached_property
    def channel(self) -> KrausChannel:
        if isinstance(self.noise, KrausChannel):
            return self.noise
        return local_channel(self.noise, self.state.n)

    @cached_property
    def ptm(self) -> PauliTransferMatrix:
        return ptm_from_kraus(self.channel)

    @cached_property
    def xi(self) -> float:
        return noise_resistance_gate(self.ptm)

    @cached_property
    def obs_inf_norm(self) -> float:
        return float(np.abs(observable_vec(self.observable)).sum())

    def plan(self) -> TruncationPlan:
        return make_plan(self.epsilon, self.delta, self.xi, "gem", self.obs_inf_norm, K=self.K, shots=self.shots)


def _trajectory(cfg: GemConfig, K: int) -> tuple[list[float], list[np.ndarray]]:
    """Exact ``E_1..E_{K+1}`` and the outcome distributions ``diag(N^k(rho))``.

    The values are computed by PTM powers and by repeated Kraus application;
    disagreement beyond ``SERIES_AGREEMENT_TOL`` raises.
    """
    o_vec = observable_vec(cfg.observable)
    r_vec = state_vec(cfg.state)
    ptm = cfg.ptm.entries
    rho = cfg.state
    values, dists = [], []
    for k in range(1, K + 2):
        r_vec = ptm @ r_vec
        via_ptm = float(o_vec @ r_vec)
        rho = apply_channel(cfg.channel, rho, 1)
        via_kraus = exact_expectation(cfg.observable, rho)
        if abs(via_ptm - via_kraus) > SERIES_AGREEMENT_TOL:
            raise OracleMismatchError(
                f"order {k}: PTM value {via_ptm!r} and Kraus value {via_kraus!r} disagree"
            )
        values.append(via_kraus)
        dists.append(rho.diagonal())
    return values, dists


def exact_series_gem(cfg: GemConfig, K: int) -> list[float]:
    """``[E_1, ..., E_{K+1}]`` computed exactly (no sampling)."""
    if isinstance(K, bool) or int(K) != K or K < 0:
        raise ParameterError(f"truncation order must be a non-negative integer, got {K!r}")
    return _trajectory(cfg, int(K))[0]


def _estimate(dist: np.ndarray, observable, shots: int, stream, delta: float, method: str) -> EstimateSummary:
    if method == "counts":
        return mean_from_counts(sample_counts(dist, shots, stream), observable, delta)
    if method == "shots":
        return empirical_observable_mean(categorical_samples(dist, shots, stream), observable, delta)
    raise ParameterError(f"unknown sampling method {method!r}; expected 'counts' or 'shots'")


def sample_eta_gem(cfg: GemConfig, k: int, shots: int, stream, method: str = "counts") -> EstimateSummary:
    """Estimate ``E_k`` from ``shots`` measurements of ``N^k(rho)``.

    ``method="counts"`` draws the outcome histogram in one multinomial step;
    ``"shots"`` draws each outcome individually.  Both have the same law.
    """
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise ParameterError(f"order k must be a positive integer, got {k!r}")
    shots = check_shots(shots)
    rho = apply_channel(cfg.channel, cfg.state, int(k))
    return _estimate(rho.diagonal(), cfg.observable, shots, stream, cfg.delta, method)


def mitigate_gem(
    cfg: GemConfig,
    stream: SeededStream | None = None,
    threads: int = 1,
    method: str = "counts",
) -> MitigationReport:
    """Plan, evaluate the exact series, sample every order and combine."""
    plan = cfg.plan()
    stream = SeededStream(cfg.seed).child("gem") if stream is None else stream
    exact, dists = _trajectory(cfg, plan.K)

    def sampler(k, shots, sub):
        return _estimate(dists[k - 1], cfg.observable, shots, sub, cfg.delta, method)

    estimates = sample_orders(sampler, plan.K, plan.shots_per_term, stream, threads)
    return build_report(
        plan,
        exact,
        estimates,
        ideal=exact_expectation(cfg.observable, cfg.state),
        remainder_bound=remainder_bound_gem(cfg.xi, cfg.obs_inf_norm, plan.K),
    )
