"""scikit-learn style front end.

``fit`` takes the noise characterization (a channel or a readout matrix) and
derives the noise resistance and truncation plan.  ``transform`` maps a batch
of states to their per-order noisy estimates, shape ``(m, K+1)``, and
``predict`` to the mitigated estimates, shape ``(m,)``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import ParameterError
from .gem import GemConfig, mitigate_gem
from .mem import MemConfig, mitigate_mem
from .noise_models import ErrorMatrix, GateNoiseSpec, local_channel, noise_resistance_gate
from .quantum_core import DensityMatrix, DiagonalObservable, KrausChannel, observable_vec, ptm_from_kraus
from .sampling import SeededStream
from .validation import check_distribution_batch, check_state_batch

_ESTIMATES = ("sampled", "exact")


class _NeumannMitigator(TransformerMixin, BaseEstimator):
    _tag = ""

    def _check_estimate(self):
        if self.estimate not in _ESTIMATES:
            raise ParameterError(f"estimate must be one of {_ESTIMATES}, got {self.estimate!r}")

    def _stream(self, i: int) -> SeededStream:
        return SeededStream(self.random_state).child(self._tag, i)

    def transform(self, X):
        reports = self.mitigate(X)
        field = "sampled" if self.estimate == "sampled" else "exact"
        return np.array([[getattr(o, field) for o in r.per_order] for r in reports])

    def predict(self, X):
        reports = self.mitigate(X)
        field = "combined_sampled" if self.estimate == "sampled" else "combined_exact"
        return np.array([getattr(r, field) for r in reports])


class GateErrorMitigator(_NeumannMitigator):
    """Gate-error mitigation for a fixed noise channel.

    Parameters
    ----------
    observable : DiagonalObservable, optional
        Defaults to ``Z`` on every qubit.
    epsilon, delta : float
        Target precision and failure probability.
    K, shots : int, optional
        Overrides for the truncation order and per-term shot count.
    estimate : {"sampled", "exact"}
        Whether outputs come from simulated shots or from the exact series.
    random_state : int
        Master seed; sample ``i`` of a batch uses its own sub-stream.
    n_jobs : int
        Worker threads per mitigation; results do not depend on it.
    """

    _tag = "gem-estimator"

    def __init__(self, observable=None, epsilon=0.01, delta=0.01, K=None, shots=None,
                 estimate="sampled", random_state=0, n_jobs=1):
        self.observable = observable
        self.epsilon = epsilon
        self.delta = delta
        self.K = K
        self.shots = shots
        self.estimate = estimate
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y=None, n_qubits=None):
        """``X`` is a :class:`KrausChannel`, or a :class:`GateNoiseSpec` applied to ``n_qubits`` qubits."""
        self._check_estimate()
        if isinstance(X, GateNoiseSpec):
            channel = local_channel(X, 1 if n_qubits is None else n_qubits)
        elif isinstance(X, KrausChannel):
            channel = X
        else:
            raise ParameterError(f"expected a KrausChannel or GateNoiseSpec, got {type(X).__name__}")
        self.channel_ = channel
        self.n_qubits_ = channel.n
        self.observable_ = self.observable or DiagonalObservable.z_string(channel.n)
        self.ptm_ = ptm_from_kraus(channel)
        self.xi_ = noise_resistance_gate(self.ptm_)
        probe = GemConfig(DensityMatrix.basis_state(channel.n), self.observable_, channel,
                          self.epsilon, self.delta, self.random_state, self.K, self.shots)
        self.plan_ = probe.plan()
        self.obs_inf_norm_ = float(np.abs(observable_vec(self.observable_)).sum())
        return self

    def mitigate(self, X):
        """Full :class:`MitigationReport` for each density matrix in ``X``."""
        check_is_fitted(self, "plan_")
        batch = check_state_batch(X)
        reports = []
        for i, rho in enumerate(batch):
            cfg = GemConfig(DensityMatrix(rho), self.observable_, self.channel_,
                            self.epsilon, self.delta, self.random_state, self.K, self.shots)
            reports.append(mitigate_gem(cfg, self._stream(i), threads=self.n_jobs))
        return reports


class MeasurementErrorMitigator(_NeumannMitigator):
    """Measurement-error mitigation for a fixed readout matrix.

    ``X`` passed to ``transform``/``predict`` holds the true outcome
    distributions ``vec(rho)``, one per row; a 3-D array is read as a batch of
    density matrices and reduced to their diagonals.  Other parameters as for
    :class:`GateErrorMitigator`.
    """

    _tag = "mem-estimator"

    def __init__(self, observable=None, epsilon=0.01, delta=0.01, K=None, shots=None,
                 estimate="sampled", random_state=0, n_jobs=1):
        self.observable = observable
        self.epsilon = epsilon
        self.delta = delta
        self.K = K
        self.shots = shots
        self.estimate = estimate
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        self._check_estimate()
        self.error_ = X if isinstance(X, ErrorMatrix) else ErrorMatrix(X)
        self.n_qubits_ = self.error_.n
        self.observable_ = self.observable or DiagonalObservable.z_string(self.error_.n)
        probe = MemConfig(np.full(self.error_.dim, 1.0 / self.error_.dim), self.observable_, self.error_,
                          self.epsilon, self.delta, self.random_state, self.K, self.shots)
        self.xi_ = probe.xi
        self.plan_ = probe.plan()
        return self

    def mitigate(self, X):
        check_is_fitted(self, "plan_")
        arr = np.asarray(X)
        if arr.ndim == 3:
            batch = np.stack([DensityMatrix(r).diagonal() for r in check_state_batch(arr)])
        else:
            batch = check_distribution_batch(arr)
        reports = []
        for i, dist in enumerate(batch):
            cfg = MemConfig(dist, self.observable_, self.error_, self.epsilon, self.delta,
                            self.random_state, self.K, self.shots)
            reports.append(mitigate_mem(cfg, self._stream(i), threads=self.n_jobs))
        return reports
