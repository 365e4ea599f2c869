"""Measurement-error mitigation via sequential noisy measurement.

Feeding the outcome of one noisy readout back in as a computational basis
state and measuring again ``k`` times produces outcomes distributed as
``A**k vec(rho)``.  The order-``k`` noisy values are combined exactly as in
gate-error mitigation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .exceptions import ParameterError, StructuralError
from .neumann import TruncationPlan, make_plan, remainder_bound_mem
from .noise_models import ErrorMatrix, noise_resistance_meas
from .quantum_core import DensityMatrix, DiagonalObservable
from .report import MitigationReport, build_report, sample_orders
from .sampling import (
    EstimateSummary,
    SeededStream,
    as_generator,
    categorical_samples,
    empirical_observable_mean,
    index_to_bitstring,
    mean_from_counts,
    sample_counts,
)
from .validation import check_column_stochastic, check_open_unit, check_probability_vector, check_shots

# shots per vectorized chain step; bounds the (chunk,) working arrays
_CHAIN_CHUNK = 1 << 20


@dataclass(frozen=True, eq=False)
class MemConfig:
    """Inputs of one measurement-error mitigation run.

    ``state`` may be a :class:`DensityMatrix` or directly its diagonal, a
    probability vector of length ``2**n``; only the diagonal is ever used.
    """

    state: DensityMatrix | np.ndarray
    observable: DiagonalObservable
    error: ErrorMatrix
    epsilon: float = 0.01
    delta: float = 0.01
    seed: int = 0
    K: int | None = None
    shots: int | None = None

    def __post_init__(self):
        check_open_unit(self.epsilon, "epsilon")
        check_open_unit(self.delta, "delta")
        d = self.observable.diag.size
        if self.true_dist.size != d or self.error.dim != d:
            raise StructuralError(
                f"state ({self.true_dist.size}), observable ({d}) and error matrix ({self.error.dim}) "
                "dimensions differ"
            )

    @cached_property
    def true_dist(self) -> np.ndarray:
        if isinstance(self.state, DensityMatrix):
            return self.state.diagonal()
        return check_probability_vector(self.state)

    @cached_property
    def xi(self) -> float:
        return noise_resistance_meas(self.error)

    def plan(self) -> TruncationPlan:
        return make_plan(self.epsilon, self.delta, self.xi, "mem", K=self.K, shots=self.shots)


def _chain(a: np.ndarray, start: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Advance every outcome in ``start`` through ``k`` readouts with matrix ``a``."""
    cdfs = np.cumsum(a, axis=0)
    cdfs[-1, :] = 1.0
    x = start.copy()
    for _ in range(k):
        u = rng.random(x.size)
        nxt = np.empty_like(x)
        for y in np.unique(x):
            sel = x == y
            nxt[sel] = np.searchsorted(cdfs[:, y], u[sel], side="right")
        x = nxt
    return x


def sequential_measure_batch(error, true_dist, k: int, size: int, stream) -> np.ndarray:
    """Outcome indices of ``size`` independent rounds of ``k`` chained noisy readouts."""
    a = error.entries if isinstance(error, ErrorMatrix) else check_column_stochastic(error)
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise ParameterError(f"number of sequential measurements must be >= 1, got {k!r}")
    p = check_probability_vector(true_dist)
    if p.size != a.shape[0]:
        raise StructuralError(f"distribution has {p.size} outcomes, error matrix {a.shape[0]}")
    rng = as_generator(stream)
    out = []
    for start in range(0, int(size), _CHAIN_CHUNK):
        m = min(_CHAIN_CHUNK, int(size) - start)
        x = categorical_samples(p, m, rng)
        out.append(_chain(a, x, int(k), rng))
    return np.concatenate(out) if out else np.zeros(0, dtype=np.int64)


def sequential_measure(error, true_dist, k: int, stream) -> str:
    """One round: draw the true outcome, then pass it through ``k`` noisy readouts."""
    a = error.entries if isinstance(error, ErrorMatrix) else check_column_stochastic(error)
    idx = sequential_measure_batch(a, true_dist, k, 1, stream)[0]
    return index_to_bitstring(idx, a.shape[0].bit_length() - 1)


def noisy_distributions(cfg: MemConfig, K: int) -> list[np.ndarray]:
    """``[A vec(rho), A**2 vec(rho), ..., A**(K+1) vec(rho)]`` by repeated mat-vec."""
    a = cfg.error.entries
    v = cfg.true_dist
    out = []
    for _ in range(K + 1):
        v = a @ v
        out.append(v)
    return out


def exact_series_mem(cfg: MemConfig, K: int) -> list[float]:
    if isinstance(K, bool) or int(K) != K or K < 0:
        raise ParameterError(f"truncation order must be a non-negative integer, got {K!r}")
    return [float(np.dot(cfg.observable.diag, v)) for v in noisy_distributions(cfg, int(K))]


def _estimate(cfg: MemConfig, k: int, dist, shots: int, stream, method: str) -> EstimateSummary:
    if method == "direct":
        # renormalize: repeated mat-vecs drift from unit sum by ~1e-16 per step
        return mean_from_counts(sample_counts(dist / dist.sum(), shots, stream), cfg.observable, cfg.delta)
    if method == "chain":
        outcomes = sequential_measure_batch(cfg.error, cfg.true_dist, k, shots, stream)
        return empirical_observable_mean(outcomes, cfg.observable, cfg.delta)
    raise ParameterError(f"unknown sampling method {method!r}; expected 'direct' or 'chain'")


def sample_eta_mem(cfg: MemConfig, k: int, shots: int, stream, method: str = "direct") -> EstimateSummary:
    """Estimate ``E_k`` from ``shots`` rounds of ``k`` sequential readouts.

    ``method="chain"`` simulates each round step by step; ``"direct"`` draws
    the outcome histogram from ``A**k vec(rho)`` in one multinomial step.
    """
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise ParameterError(f"order k must be a positive integer, got {k!r}")
    shots = check_shots(shots)
    dist = noisy_distributions(cfg, int(k) - 1)[-1]
    return _estimate(cfg, int(k), dist, shots, stream, method)


def mitigate_mem(
    cfg: MemConfig,
    stream: SeededStream | None = None,
    threads: int = 1,
    method: str = "direct",
) -> MitigationReport:
    plan = cfg.plan()
    stream = SeededStream(cfg.seed).child("mem") if stream is None else stream
    dists = noisy_distributions(cfg, plan.K)
    exact = [float(np.dot(cfg.observable.diag, v)) for v in dists]

    def sampler(k, shots, sub):
        return _estimate(cfg, k, dists[k - 1], shots, sub, method)

    estimates = sample_orders(sampler, plan.K, plan.shots_per_term, stream, threads)
    return build_report(
        plan,
        exact,
        estimates,
        ideal=float(np.dot(cfg.observable.diag, cfg.true_dist)),
        remainder_bound=remainder_bound_mem(cfg.xi, plan.K),
    )
