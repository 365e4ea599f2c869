"""Gate-noise channels, readout error matrices and their noise resistances."""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .exceptions import ParameterError, StructuralError
from .quantum_core import KrausChannel, PauliTransferMatrix, matrix_inf_norm
from .validation import (
    MAX_DIAGONAL_QUBITS,
    check_closed_unit,
    check_column_stochastic,
    check_qubits,
    num_qubits_from_dim,
)

GATE_NOISE_KINDS = ("depolarizing", "dephasing", "amplitude_damping", "custom")

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class GateNoiseSpec:
    """A catalog channel (single qubit) or a user-supplied Kraus channel.

    ``parameter`` is ``p`` for depolarizing/dephasing and ``gamma`` for
    amplitude damping; it is ignored for ``custom``.
    """

    kind: str
    parameter: float = 0.0
    channel: KrausChannel | None = None

    def __post_init__(self):
        if self.kind not in GATE_NOISE_KINDS:
            raise ParameterError(f"unknown noise kind {self.kind!r}; expected one of {GATE_NOISE_KINDS}")
        if self.kind == "custom":
            if self.channel is None:
                raise ParameterError("custom noise needs a KrausChannel")
        else:
            check_closed_unit(self.parameter, f"{self.kind} parameter")


def make_channel(spec: GateNoiseSpec) -> KrausChannel:
    p = spec.parameter
    if spec.kind == "depolarizing":
        # (1-p) rho + p I/2 == (1 - 3p/4) rho + (p/4)(X rho X + Y rho Y + Z rho Z)
        return KrausChannel((np.sqrt(1 - 0.75 * p) * _I, np.sqrt(p / 4) * _X,
                             np.sqrt(p / 4) * _Y, np.sqrt(p / 4) * _Z))
    if spec.kind == "dephasing":
        return KrausChannel((np.sqrt(1 - p) * _I, np.sqrt(p) * _Z))
    if spec.kind == "amplitude_damping":
        e1 = np.array([[1, 0], [0, np.sqrt(1 - p)]], dtype=complex)
        e2 = np.array([[0, np.sqrt(p)], [0, 0]], dtype=complex)
        return KrausChannel((e1, e2))
    return spec.channel


def local_channel(spec: GateNoiseSpec, n: int) -> KrausChannel:
    """The catalog channel applied independently to each of ``n`` qubits."""
    check_qubits(n)
    single = make_channel(spec)
    if spec.kind == "custom":
        if single.n != n:
            raise StructuralError(f"custom channel acts on {single.n} qubits, expected {n}")
        return single
    return reduce(lambda acc, ch: acc.tensor(ch), [single] * n)


def noise_resistance_gate(ptm) -> float:
    """``||I - [N]||_inf`` for a PTM (object or raw square array)."""
    m = ptm.entries if isinstance(ptm, PauliTransferMatrix) else np.asarray(ptm, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise StructuralError(f"PTM must be square, got shape {m.shape}")
    return matrix_inf_norm(np.eye(m.shape[0]) - m)


# ---------------------------------------------------------------------------
# readout noise
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ErrorMatrix:
    """Column-stochastic readout matrix, ``A[x, y] = P(read x | true y)``."""

    entries: np.ndarray

    def __post_init__(self):
        a = check_column_stochastic(self.entries)
        check_qubits(num_qubits_from_dim(a.shape[0]), MAX_DIAGONAL_QUBITS)
        a = np.array(a, copy=True)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def n(self) -> int:
        return num_qubits_from_dim(self.entries.shape[0])

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def identity(cls, n: int) -> "ErrorMatrix":
        return cls(np.eye(1 << check_qubits(n)))


def noise_resistance_meas(error: ErrorMatrix) -> float:
    """``2 (1 - min_x A[x, x])``, which equals ``||I - A||_1`` for stochastic ``A``."""
    a = error.entries if isinstance(error, ErrorMatrix) else check_column_stochastic(error)
    return float(2.0 * (1.0 - a.diagonal().min()))


def bitflip_error_matrix(p01: float, p10: float | None = None) -> ErrorMatrix:
    """Single-qubit readout noise.

    ``p01`` is the probability of reading 1 when the qubit is 0 and ``p10`` the
    reverse; ``p10`` defaults to ``p01`` (symmetric flip).
    """
    p01 = check_closed_unit(p01, "p01")
    p10 = p01 if p10 is None else check_closed_unit(p10, "p10")
    return ErrorMatrix(np.array([[1 - p01, p10], [p01, 1 - p10]]))


def tensor_local_error(factors: Sequence[ErrorMatrix]) -> ErrorMatrix:
    """Kronecker product of single-qubit matrices; ``factors[0]`` is qubit 0 (most significant)."""
    if not factors:
        raise StructuralError("need at least one factor")
    mats = []
    for f in factors:
        a = f.entries if isinstance(f, ErrorMatrix) else check_column_stochastic(f)
        if a.shape != (2, 2):
            raise StructuralError(f"local factors must be 2x2, got {a.shape}")
        mats.append(a)
    check_qubits(len(mats))
    return ErrorMatrix(reduce(np.kron, mats))


def random_error_matrix(n: int, target_xi: float, seed: int) -> ErrorMatrix:
    """Seeded random readout matrix with ``noise_resistance_meas == target_xi``.

    Column ``y`` keeps ``1 - s * w_y`` on the diagonal and spreads ``s * w_y``
    over the other outcomes with a flat-Dirichlet profile, where ``w_y`` is
    uniform on (0, 1].  The scale ``s`` is fixed so the smallest diagonal entry
    is exactly ``1 - target_xi / 2``.
    """
    n = check_qubits(n)
    target_xi = float(target_xi)
    if not 0.0 <= target_xi < 1.0:
        raise ParameterError(f"target noise resistance must lie in [0, 1), got {target_xi}")
    d = 1 << n
    if target_xi == 0.0:
        return ErrorMatrix.identity(n)
    rng = np.random.default_rng(seed)
    weights = 1.0 - rng.random(d)
    leak = rng.dirichlet(np.ones(d - 1), size=d)
    scale = target_xi / (2.0 * weights.max())
    a = np.zeros((d, d))
    for y in range(d):
        col = np.insert(leak[y], y, 0.0) * (scale * weights[y])
        col[y] = 1.0 - col.sum()
        a[:, y] = col
    return ErrorMatrix(a)


def write_error_csv(error: ErrorMatrix, path: str | os.PathLike | None = None) -> str:
    """Serialize as a ``dim=<2**n>`` header line followed by row-major rows."""
    if not isinstance(error, ErrorMatrix):
        error = ErrorMatrix(error)
    buf = io.StringIO()
    buf.write(f"dim={error.dim}\n")
    writer = csv.writer(buf, lineterminator="\n")
    for row in error.entries:
        writer.writerow([repr(float(v)) for v in row])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def read_error_csv(source: str | os.PathLike) -> ErrorMatrix:
    with open(source, newline="") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].strip().lower().startswith("dim="):
        raise StructuralError("error-matrix CSV must start with a 'dim=<2**n>' header")
    spec = lines[0].strip()[4:]
    try:
        dim = 2 ** int(spec[2:]) if spec.startswith("2^") else int(spec)
    except ValueError:
        raise StructuralError(f"bad dimension header {lines[0]!r}") from None
    rows = [r for r in csv.reader(lines[1:]) if r]
    a = np.array(rows, dtype=float)
    if a.shape != (dim, dim):
        raise StructuralError(f"header says dim={dim} but the body has shape {a.shape}")
    return ErrorMatrix(a)
