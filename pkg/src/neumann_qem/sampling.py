"""Seeded Monte Carlo primitives.

Every random draw comes from a :class:`SeededStream`, a value object naming a
master seed plus a path of ``(tag, k, round)`` labels.  The generator behind a
stream depends only on that path, so results do not depend on the order in
which streams are consumed or on how many worker threads consume them.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .exceptions import DistributionError, ParameterError
from .quantum_core import DiagonalObservable
from .validation import check_open_unit, check_probability_vector, check_shots

_MASK64 = (1 << 64) - 1


def _tag_key(tag: str) -> int:
    # crc32 is stable across processes, unlike hash()
    return zlib.crc32(tag.encode("utf-8"))


@dataclass(frozen=True)
class SeededStream:
    master_seed: int
    labels: tuple = ()

    def __post_init__(self):
        if isinstance(self.master_seed, bool) or int(self.master_seed) != self.master_seed:
            raise ParameterError(f"seed must be an integer, got {self.master_seed!r}")
        object.__setattr__(self, "master_seed", int(self.master_seed) & _MASK64)

    def child(self, tag: str, k: int = 0, round_index: int = 0) -> "SeededStream":
        return SeededStream(self.master_seed, self.labels + ((tag, int(k), int(round_index)),))

    def _spawn_key(self) -> tuple:
        key = []
        for tag, k, r in self.labels:
            key.extend((_tag_key(tag), k, r))
        return tuple(key)

    def seed_sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(self.master_seed, spawn_key=self._spawn_key())

    def sub_seed(self) -> int:
        """64-bit seed mixed from the master seed and the label path."""
        lo, hi = self.seed_sequence().generate_state(2, dtype=np.uint32)
        return int(lo) | (int(hi) << 32)

    def generator(self) -> np.random.Generator:
        """A fresh PCG64 generator positioned at the start of this stream."""
        return np.random.Generator(np.random.PCG64(self.seed_sequence()))


def as_generator(stream) -> np.random.Generator:
    if isinstance(stream, np.random.Generator):
        return stream
    if isinstance(stream, SeededStream):
        return stream.generator()
    return np.random.default_rng(stream)


def _cdf(probs) -> np.ndarray:
    cdf = np.cumsum(check_probability_vector(probs))
    cdf[-1] = 1.0
    return cdf


def categorical_samples(probs, size: int, stream) -> np.ndarray:
    """``size`` i.i.d. indices drawn by inverse-CDF lookup."""
    cdf = _cdf(probs)
    u = as_generator(stream).random(int(size))
    return np.searchsorted(cdf, u, side="right")


def categorical_sample(probs, stream) -> int:
    return int(categorical_samples(probs, 1, stream)[0])


def sample_counts(probs, shots: int, stream) -> np.ndarray:
    """Outcome histogram of ``shots`` i.i.d. categorical draws (multinomial law)."""
    p = check_probability_vector(probs)
    return as_generator(stream).multinomial(check_shots(shots), p)


@dataclass(frozen=True)
class EstimateSummary:
    """Empirical mean of a bounded observable with its error bars.

    ``half_width`` is the Hoeffding radius at confidence ``delta`` for values in
    ``[-bound, bound]``: ``bound * sqrt(2 log2(2/delta) / shots)``.
    """

    mean: float
    shots: int
    half_width: float
    std_error: float
    bound: float = 1.0
    delta: float = 0.01

    def to_dict(self) -> dict:
        return {"mean": self.mean, "shots": self.shots, "half_width": self.half_width,
                "std_error": self.std_error}


def hoeffding_half_width(shots: int, delta: float, bound: float = 1.0) -> float:
    delta = check_open_unit(delta, "delta")
    return float(bound) * math.sqrt(2.0 * math.log2(2.0 / delta) / check_shots(shots))


def bitstring_to_index(bits: str) -> int:
    if not bits or set(bits) - {"0", "1"}:
        raise DistributionError(f"invalid bitstring {bits!r}")
    return int(bits, 2)


def index_to_bitstring(index: int, n: int) -> str:
    return format(int(index), f"0{n}b")


def mean_from_counts(counts, observable: DiagonalObservable, delta: float = 0.01) -> EstimateSummary:
    counts = np.asarray(counts)
    if counts.shape != observable.diag.shape:
        raise ParameterError(f"{counts.size} count bins for a {observable.diag.size}-outcome observable")
    shots = int(counts.sum())
    if shots < 1:
        raise ParameterError("cannot average zero outcomes")
    values = observable.diag
    weights = counts / shots
    mean = float(np.dot(weights, values))
    var = float(np.dot(weights, (values - mean) ** 2))
    bound = float(np.max(np.abs(values)))
    return EstimateSummary(
        mean=mean,
        shots=shots,
        half_width=hoeffding_half_width(shots, delta, bound) if bound > 0 else 0.0,
        std_error=math.sqrt(var / shots),
        bound=bound,
        delta=delta,
    )


def empirical_observable_mean(
    outcomes: Sequence | Iterable, observable: DiagonalObservable, delta: float = 0.01
) -> EstimateSummary:
    """Average ``O(s)`` over outcomes given as bitstrings (``"0110"``) or integer indices."""
    idx = [bitstring_to_index(s) if isinstance(s, str) else int(s) for s in outcomes]
    if not idx:
        raise ParameterError("cannot average an empty outcome list")
    idx = np.asarray(idx)
    if idx.min() < 0 or idx.max() >= observable.diag.size:
        raise DistributionError("outcome index out of range for the observable")
    counts = np.bincount(idx, minlength=observable.diag.size)
    return mean_from_counts(counts, observable, delta)
