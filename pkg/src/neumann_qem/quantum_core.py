"""Dense finite-dimensional quantum objects and the Pauli transfer matrix algebra.

Conventions
-----------
Pauli strings are *unnormalized* tensor products of I, X, Y, Z (eigenvalues
+/-1), ordered lexicographically with I < X < Y < Z and qubit 0 as the most
significant tensor factor.  With ``d = 2**n``:

* ``[N]_{ij} = tr[P_i N(P_j)] / d``   (so the identity channel maps to the identity)
* ``|rho>>_j = tr[P_j rho]``           (entries bounded by 1 in absolute value)
* ``<<O|_i   = tr[O P_i] / d``         (so ``O = sum_i <<O|_i P_i``)

and ``tr[O N(rho)] = <<O| [N] |rho>>``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .exceptions import ParameterError, StructuralError
from .validation import (
    MAX_DIAGONAL_QUBITS,
    MAX_PTM_QUBITS,
    check_qubits,
    check_square,
    num_qubits_from_dim,
)

CONSTRUCTION_TOL = 1e-12
VERIFY_TOL = 1e-10

_PAULI_LETTERS = "IXYZ"
_SINGLE_PAULIS = (
    np.array([[1, 0], [0, 1]], dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


# ---------------------------------------------------------------------------
# states and observables
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A ``2**n x 2**n`` Hermitian, unit-trace, positive semidefinite matrix."""

    entries: np.ndarray

    def __post_init__(self):
        rho = check_square(self.entries, "density matrix", dtype=complex)
        n = num_qubits_from_dim(rho.shape[0])
        check_qubits(n, MAX_DIAGONAL_QUBITS)
        if np.max(np.abs(rho - rho.conj().T)) > CONSTRUCTION_TOL:
            raise ParameterError("density matrix is not Hermitian")
        tr = np.trace(rho)
        if abs(tr - 1.0) > CONSTRUCTION_TOL:
            raise ParameterError(f"density matrix has trace {tr}, expected 1")
        if np.linalg.eigvalsh(rho).min() < -VERIFY_TOL:
            raise ParameterError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "entries", _frozen(rho))

    @property
    def n(self) -> int:
        return num_qubits_from_dim(self.entries.shape[0])

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def diagonal(self) -> np.ndarray:
        """The computational-basis outcome distribution ``vec(rho)``."""
        p = np.clip(self.entries.diagonal().real, 0.0, None)
        return p / p.sum()

    @classmethod
    def from_pure(cls, psi) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def basis_state(cls, n: int, index: int = 0) -> "DensityMatrix":
        d = 1 << check_qubits(n)
        if not 0 <= index < d:
            raise ParameterError(f"basis index {index} out of range for {n} qubits")
        rho = np.zeros((d, d), dtype=complex)
        rho[index, index] = 1.0
        return cls(rho)


def max_superposition_state(n: int) -> DensityMatrix:
    """``|Phi><Phi|`` with ``|Phi> = sum_i |i> / sqrt(2**n)``; every entry equals ``2**-n``."""
    d = 1 << check_qubits(n)
    return DensityMatrix(np.full((d, d), 1.0 / d, dtype=complex))


def random_density_matrix(n: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Ginibre-distributed mixed state of the given rank (full rank by default)."""
    d = 1 << check_qubits(n)
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(rho / np.trace(rho).real)


@dataclass(frozen=True, eq=False)
class DiagonalObservable:
    """An observable diagonal in the computational basis with ``max |O(x)| <= 1``."""

    diag: np.ndarray

    def __post_init__(self):
        diag = np.asarray(self.diag, dtype=float)
        if diag.ndim != 1:
            raise StructuralError(f"observable diagonal must be 1-D, got shape {diag.shape}")
        check_qubits(num_qubits_from_dim(diag.size), MAX_DIAGONAL_QUBITS)
        if np.max(np.abs(diag)) > 1.0 + CONSTRUCTION_TOL:
            raise ParameterError("observable has spectral norm above 1")
        object.__setattr__(self, "diag", _frozen(diag))

    @property
    def n(self) -> int:
        return num_qubits_from_dim(self.diag.size)

    @classmethod
    def from_label(cls, label: str) -> "DiagonalObservable":
        """Tensor product of ``I`` and ``Z`` factors, e.g. ``"ZIZ"``."""
        label = label.upper()
        if not label or set(label) - {"I", "Z"}:
            raise ParameterError(f"diagonal observable label must be a word over {{I, Z}}, got {label!r}")
        diag = np.ones(1)
        for ch in label:
            diag = np.kron(diag, [1.0, 1.0] if ch == "I" else [1.0, -1.0])
        return cls(diag)

    @classmethod
    def z_string(cls, n: int) -> "DiagonalObservable":
        """``Z^{(x) n}``, i.e. the parity ``(-1)^{|x|}``."""
        check_qubits(n)
        return cls.from_label("Z" * n)

    @classmethod
    def identity(cls, n: int) -> "DiagonalObservable":
        return cls(np.ones(1 << check_qubits(n)))

    def matrix(self) -> np.ndarray:
        return np.diag(self.diag).astype(complex)


def exact_expectation(observable: DiagonalObservable, rho: DensityMatrix) -> float:
    """``sum_x O(x) rho(x, x)``."""
    if observable.n != rho.n:
        raise StructuralError(f"observable acts on {observable.n} qubits, state on {rho.n}")
    return float(np.dot(observable.diag, rho.entries.diagonal().real))


# ---------------------------------------------------------------------------
# Pauli strings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PauliString:
    label: str

    def __post_init__(self):
        if not self.label or set(self.label) - set(_PAULI_LETTERS):
            raise ParameterError(f"invalid Pauli label {self.label!r}")

    @property
    def n(self) -> int:
        return len(self.label)

    @property
    def matrix(self) -> np.ndarray:
        out = np.ones((1, 1), dtype=complex)
        for ch in self.label:
            out = np.kron(out, _SINGLE_PAULIS[_PAULI_LETTERS.index(ch)])
        return out


def pauli_labels(n: int) -> list[str]:
    check_qubits(n, MAX_PTM_QUBITS)
    return ["".join(w) for w in itertools.product(_PAULI_LETTERS, repeat=n)]


def pauli_basis(n: int) -> list[PauliString]:
    """All ``4**n`` Pauli strings in lexicographic order, identity first."""
    return [PauliString(label) for label in pauli_labels(n)]


@lru_cache(maxsize=None)
def _pauli_stack(n: int) -> np.ndarray:
    """Pauli matrices stacked as ``(4**n, 2**n, 2**n)``, in ``pauli_labels`` order."""
    stack = np.ones((1, 1, 1), dtype=complex)
    for _ in range(n):
        stack = np.einsum("iab,jcd->ijacbd", stack, np.stack(_SINGLE_PAULIS))
        m, s = stack.shape[0] * 4, stack.shape[2] * 2
        stack = stack.reshape(m, s, s)
    stack.setflags(write=False)
    return stack


def _pauli_rows(n: int) -> np.ndarray:
    """Row ``i`` is ``P_i`` flattened so that ``rows @ X.T.ravel() = [tr(P_i X)]_i``."""
    check_qubits(n, MAX_PTM_QUBITS)
    stack = _pauli_stack(n)
    return stack.reshape(stack.shape[0], -1)


# ---------------------------------------------------------------------------
# channels and their PTMs
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """A trace-preserving channel ``rho -> sum_i E_i rho E_i^dagger``."""

    kraus_ops: tuple

    def __post_init__(self):
        ops = [np.asarray(e, dtype=complex) for e in self.kraus_ops]
        if not ops:
            raise StructuralError("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if len(shape) != 2 or shape[0] != shape[1]:
            raise StructuralError(f"Kraus operators must be square, got shape {shape}")
        if any(e.shape != shape for e in ops):
            raise StructuralError("Kraus operators have mismatched dimensions")
        n = num_qubits_from_dim(shape[0])
        check_qubits(n, MAX_DIAGONAL_QUBITS)
        completeness = sum(e.conj().T @ e for e in ops)
        if np.max(np.abs(completeness - np.eye(shape[0]))) > VERIFY_TOL:
            raise ParameterError("Kraus operators are not trace preserving")
        object.__setattr__(self, "kraus_ops", tuple(_frozen(e) for e in ops))

    @property
    def n(self) -> int:
        return num_qubits_from_dim(self.kraus_ops[0].shape[0])

    @classmethod
    def identity(cls, n: int) -> "KrausChannel":
        return cls((np.eye(1 << check_qubits(n)),))

    def __call__(self, operator: np.ndarray) -> np.ndarray:
        """Apply the channel to an arbitrary (not necessarily positive) operator."""
        stacked = np.stack(self.kraus_ops)
        return np.einsum("kab,bc,kdc->ad", stacked, operator, stacked.conj())

    def compose(self, first: "KrausChannel") -> "KrausChannel":
        """The channel ``self o first`` (``first`` acts before ``self``)."""
        if first.n != self.n:
            raise StructuralError(f"cannot compose {self.n}-qubit and {first.n}-qubit channels")
        return KrausChannel(tuple(a @ b for a in self.kraus_ops for b in first.kraus_ops))

    def tensor(self, other: "KrausChannel") -> "KrausChannel":
        """``self (x) other`` with ``self`` on the leading qubits."""
        return KrausChannel(tuple(np.kron(a, b) for a in self.kraus_ops for b in other.kraus_ops))


def random_kraus_channel(n: int, rng: np.random.Generator, num_ops: int = 2) -> KrausChannel:
    """Random channel from a Haar-ish isometry ``C^d -> C^{num_ops * d}``."""
    d = 1 << check_qubits(n, MAX_PTM_QUBITS)
    g = rng.normal(size=(num_ops * d, d)) + 1j * rng.normal(size=(num_ops * d, d))
    q, r = np.linalg.qr(g)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return KrausChannel(tuple(q[i * d:(i + 1) * d] for i in range(num_ops)))


@dataclass(frozen=True, eq=False)
class PauliTransferMatrix:
    """Real ``4**n x 4**n`` matrix of a channel in the Pauli basis."""

    entries: np.ndarray

    def __post_init__(self):
        m = check_square(self.entries, "PTM", dtype=float)
        n = num_qubits_from_dim(m.shape[0]) // 2
        if 4 ** n != m.shape[0]:
            raise StructuralError(f"PTM dimension {m.shape[0]} is not a power of four")
        check_qubits(n, MAX_PTM_QUBITS)
        object.__setattr__(self, "entries", _frozen(m))

    @property
    def n(self) -> int:
        return num_qubits_from_dim(self.entries.shape[0]) // 2

    @classmethod
    def identity(cls, n: int) -> "PauliTransferMatrix":
        return cls(np.eye(4 ** check_qubits(n, MAX_PTM_QUBITS)))

    def __matmul__(self, other: "PauliTransferMatrix") -> "PauliTransferMatrix":
        return ptm_compose(self, other)


def ptm_from_kraus(channel: KrausChannel) -> PauliTransferMatrix:
    n = check_qubits(channel.n, MAX_PTM_QUBITS)
    d = 1 << n
    stack = _pauli_stack(n)
    ops = np.stack(channel.kraus_ops)
    # images[j] = N(P_j), computed for all j at once
    images = np.einsum("kab,jbc,kdc->jad", ops, stack, ops.conj())
    rows = _pauli_rows(n)
    ptm = rows @ images.transpose(0, 2, 1).reshape(images.shape[0], -1).T / d
    return PauliTransferMatrix(ptm.real)


def ptm_compose(a: PauliTransferMatrix, b: PauliTransferMatrix) -> PauliTransferMatrix:
    """PTM of ``a o b``: the plain matrix product."""
    if a.n != b.n:
        raise StructuralError(f"cannot compose {a.n}-qubit and {b.n}-qubit PTMs")
    return PauliTransferMatrix(a.entries @ b.entries)


def ptm_power(a: PauliTransferMatrix, k: int) -> PauliTransferMatrix:
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise ParameterError(f"PTM power must be a positive integer, got {k!r}")
    return PauliTransferMatrix(np.linalg.matrix_power(a.entries, int(k)))


def state_vec(rho: DensityMatrix) -> np.ndarray:
    """``|rho>>`` with entries ``tr[P_j rho]``."""
    rows = _pauli_rows(rho.n)
    return (rows @ rho.entries.T.ravel()).real


def observable_vec(observable: DiagonalObservable) -> np.ndarray:
    """``<<O|`` with entries ``tr[O P_i] / 2**n``."""
    n = check_qubits(observable.n, MAX_PTM_QUBITS)
    rows = _pauli_rows(n)
    return (rows @ observable.matrix().T.ravel()).real / (1 << n)


def apply_channel(channel: KrausChannel, rho: DensityMatrix, k: int = 1) -> DensityMatrix:
    """``N^{o k}(rho)``; ``k = 0`` returns ``rho`` itself."""
    if isinstance(k, bool) or int(k) != k or k < 0:
        raise ParameterError(f"repetition count must be a non-negative integer, got {k!r}")
    if channel.n != rho.n:
        raise StructuralError(f"channel acts on {channel.n} qubits, state on {rho.n}")
    out = rho.entries
    for _ in range(int(k)):
        out = channel(out)
        out = (out + out.conj().T) / 2
    if k == 0:
        return rho
    return DensityMatrix(out / np.trace(out).real)


def matrix_inf_norm(matrix) -> float:
    """Maximum absolute row sum."""
    m = np.atleast_2d(np.asarray(matrix))
    if m.size == 0:
        raise StructuralError("norm of an empty matrix")
    return float(np.abs(m).sum(axis=1).max())


def matrix_one_norm(matrix) -> float:
    """Maximum absolute column sum."""
    m = np.atleast_2d(np.asarray(matrix))
    if m.size == 0:
        raise StructuralError("norm of an empty matrix")
    return float(np.abs(m).sum(axis=0).max())


def matrix_to_json(matrix) -> list:
    """Row-major nested list of ``[real, imag]`` pairs."""
    m = np.atleast_2d(np.asarray(matrix, dtype=complex))
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(data: Sequence) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise StructuralError(f"expected rows of [real, imag] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]
