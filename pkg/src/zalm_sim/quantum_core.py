"""Density-matrix backend for 1-4 polarization qubits.

Basis convention: |0> = H, |1> = V. Qubits are addressed by label; the
first label is the most significant tensor factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Hashable, Iterable, Sequence

import numpy as np

MAX_QUBITS = 4
TOL = 1e-9


class BellKind(str, Enum):
    PHI_PLUS = "PhiPlus"
    PSI_PLUS = "PsiPlus"
    PSI_MINUS = "PsiMinus"
    PHI_MINUS = "PhiMinus"


class Pauli(str, Enum):
    I = "I"
    X = "X"
    Y = "Y"
    Z = "Z"


PAULI_MATRICES = {
    Pauli.I: np.eye(2, dtype=complex),
    Pauli.X: np.array([[0, 1], [1, 0]], dtype=complex),
    Pauli.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    Pauli.Z: np.array([[1, 0], [0, -1]], dtype=complex),
}

_S = 1 / np.sqrt(2)
BELL_VECTORS = {
    BellKind.PHI_PLUS: np.array([_S, 0, 0, _S], dtype=complex),
    BellKind.PSI_PLUS: np.array([0, _S, _S, 0], dtype=complex),
    BellKind.PSI_MINUS: np.array([0, _S, -_S, 0], dtype=complex),
    BellKind.PHI_MINUS: np.array([_S, 0, 0, -_S], dtype=complex),
}


@dataclass(frozen=True)
class PauliOp:
    op: Pauli
    target: Hashable


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Immutable density matrix with labelled qubits."""

    data: np.ndarray
    labels: tuple

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        n = len(self.labels)
        if not 1 <= n <= MAX_QUBITS:
            raise ValueError(f"supports 1..{MAX_QUBITS} qubits, got {n}")
        if len(set(self.labels)) != n:
            raise ValueError(f"duplicate qubit labels {self.labels}")
        if data.shape != (2**n, 2**n):
            raise ValueError(f"matrix shape {data.shape} does not match {n} qubits")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def n_qubits(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def index(self, label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValueError(f"unknown qubit {label!r}; state has {self.labels}") from None

    def trace(self) -> float:
        return float(np.real(np.trace(self.data)))

    def purity(self) -> float:
        return float(np.real(np.trace(self.data @ self.data)))

    def is_valid(self, tol: float = TOL) -> bool:
        """Unit trace, Hermitian and positive semidefinite within ``tol``."""
        rho = self.data
        if abs(np.trace(rho) - 1) > tol:
            return False
        if np.max(np.abs(rho - rho.conj().T)) > tol:
            return False
        return bool(np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() >= -tol)

    def relabel(self, labels: Sequence) -> "DensityMatrix":
        return DensityMatrix(self.data, tuple(labels))


def pure_state(vector, labels: Sequence) -> DensityMatrix:
    v = np.asarray(vector, dtype=complex)
    v = v / np.linalg.norm(v)
    return DensityMatrix(np.outer(v, v.conj()), tuple(labels))


_BELL_RHO = {k: np.outer(v, v.conj()) for k, v in BELL_VECTORS.items()}


def bell_state(kind: BellKind, labels: Sequence = (0, 1)) -> DensityMatrix:
    return DensityMatrix(_BELL_RHO[kind], tuple(labels))


def tensor(a: DensityMatrix | None, b: DensityMatrix) -> DensityMatrix:
    """a (x) b; ``a`` may be None for an empty register."""
    if a is None:
        return b
    da, db = a.dim, b.dim
    data = (a.data[:, None, :, None] * b.data[None, :, None, :]).reshape(da * db, da * db)
    return DensityMatrix(data, a.labels + b.labels)


def embed_operator(op: np.ndarray, positions: Sequence[int], n: int) -> np.ndarray:
    """Lift a k-qubit operator acting on ``positions`` to the full n-qubit space."""
    k = len(positions)
    rest = [q for q in range(n) if q not in positions]
    full = np.kron(op, np.eye(2 ** (n - k), dtype=complex))
    order = list(positions) + rest
    inv = np.argsort(order)
    t = full.reshape([2] * (2 * n))
    t = t.transpose(list(inv) + [n + i for i in inv])
    return t.reshape(2**n, 2**n)


def _positions(rho: DensityMatrix, targets: Iterable) -> list[int]:
    pos = [rho.index(t) for t in targets]
    if len(set(pos)) != len(pos):
        raise ValueError(f"targets must be distinct, got {list(targets)}")
    return pos


def apply_unitary(rho: DensityMatrix, u, targets: Sequence) -> DensityMatrix:
    u = np.asarray(u, dtype=complex)
    pos = _positions(rho, targets)
    if u.shape != (2 ** len(pos), 2 ** len(pos)):
        raise ValueError(f"operator shape {u.shape} does not fit {len(pos)} targets")
    if np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))) > TOL:
        raise ValueError("operator is not unitary")
    U = embed_operator(u, pos, rho.n_qubits)
    return DensityMatrix(U @ rho.data @ U.conj().T, rho.labels)


def apply_pauli(rho: DensityMatrix, pauli: PauliOp) -> DensityMatrix:
    return apply_unitary(rho, PAULI_MATRICES[pauli.op], [pauli.target])


def _check_prob(p: float, name: str = "p") -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {p}")


def depolarize(rho: DensityMatrix, target, p: float) -> DensityMatrix:
    """Replace ``target`` by the maximally mixed state with probability p."""
    _check_prob(p)
    if p == 0.0:
        return rho
    pos = rho.index(target)
    n = rho.n_qubits
    # I/2 (x) tr_t(rho) equals the uniform Pauli twirl on the target
    twirl = np.zeros_like(rho.data)
    for m in PAULI_MATRICES.values():
        P = embed_operator(m, [pos], n)
        twirl += P @ rho.data @ P.conj().T
    return DensityMatrix((1 - p) * rho.data + p * twirl / 4, rho.labels)


def dephase(rho: DensityMatrix, target, p: float) -> DensityMatrix:
    """Damp the H/V coherences of ``target`` by a factor (1 - p)."""
    _check_prob(p)
    if p == 0.0:
        return rho
    Z = embed_operator(PAULI_MATRICES[Pauli.Z], [rho.index(target)], rho.n_qubits)
    return DensityMatrix((1 - p / 2) * rho.data + (p / 2) * (Z @ rho.data @ Z), rho.labels)


def fidelity(rho: DensityMatrix, target: BellKind) -> float:
    if rho.n_qubits != 2:
        raise ValueError(f"fidelity to a Bell state needs 2 qubits, got {rho.n_qubits}")
    b = BELL_VECTORS[target]
    f = float(np.real(b.conj() @ rho.data @ b))
    return min(1.0, max(0.0, f))


def partial_trace(rho: DensityMatrix, keep: Sequence) -> DensityMatrix:
    """Reduced state on ``keep``; kept qubits retain their original order."""
    keep_set = set(keep)
    if not keep_set:
        raise ValueError("keep must name at least one qubit")
    for k in keep_set:
        rho.index(k)
    n = rho.n_qubits
    kept = [i for i, lab in enumerate(rho.labels) if lab in keep_set]
    if len(kept) == n:
        return rho
    traced = [i for i in range(n) if i not in kept]
    t = rho.data.reshape([2] * (2 * n))
    # trace pairs from the highest index down so axis numbers stay valid
    m = n
    for i in sorted(traced, reverse=True):
        t = np.trace(t, axis1=i, axis2=i + m)
        m -= 1
    d = 2 ** len(kept)
    return DensityMatrix(t.reshape(d, d), tuple(rho.labels[i] for i in kept))


def dephase_bell(kind: BellKind, coherence: float, labels: Sequence = (0, 1)) -> DensityMatrix:
    """Bell state whose off-diagonal terms are scaled by ``coherence``."""
    _check_prob(coherence, "coherence")
    rho = _BELL_RHO[kind]
    damped = coherence * rho + (1 - coherence) * np.diag(np.diag(rho))
    return DensityMatrix(damped, tuple(labels))
