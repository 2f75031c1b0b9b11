"""Two-qubit memory states and the density-matrix helpers shared by the package.

The computational basis is fixed everywhere as ``|1,1>, |1,0>, |0,1>, |0,0>``
(memory A first, ``|1>`` the level that did not emit a photon).  The Bell basis
is ordered ``Psi+, Psi-, Phi+, Phi-``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
EIG_CLAMP = 1e-14

BASIS_LABELS = ("|1,1>", "|1,0>", "|0,1>", "|0,0>")

_S = 1 / np.sqrt(2)
# rows are Bell vectors expressed in the computational basis
BELL_BASIS = np.array(
    [
        [0, _S, _S, 0],    # Psi+
        [0, _S, -_S, 0],   # Psi-
        [_S, 0, 0, _S],    # Phi+
        [_S, 0, 0, -_S],   # Phi-
    ],
    dtype=complex,
)


class InvalidStateError(ValueError):
    pass


class BellState(enum.Enum):
    PSI_PLUS = 0
    PSI_MINUS = 1
    PHI_PLUS = 2
    PHI_MINUS = 3

    @property
    def vector(self) -> np.ndarray:
        return BELL_BASIS[self.value].copy()


def check_density_matrix(m: np.ndarray, name: str = "state") -> np.ndarray:
    """Validate a square density matrix and return it as a complex array."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidStateError(f"{name} must be a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidStateError(f"{name} has non-finite entries")
    herm_err = np.max(np.abs(m - m.conj().T))
    if herm_err > HERMITIAN_TOL:
        raise InvalidStateError(f"{name} is not Hermitian (max |M - M^H| = {herm_err:.3e})")
    tr = np.trace(m).real
    if abs(tr - 1) > TRACE_TOL:
        raise InvalidStateError(f"{name} has trace {tr!r}, expected 1")
    lam_min = np.linalg.eigvalsh(m).min()
    if lam_min < -PSD_TOL:
        raise InvalidStateError(f"{name} is not positive semidefinite (min eigenvalue {lam_min:.3e})")
    return m


@dataclass(frozen=True, eq=False)
class TwoQubitState:
    """Validated 4x4 density matrix of the two memories."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise InvalidStateError(f"two-qubit state must be 4x4, got {m.shape}")
        check_density_matrix(m, "TwoQubitState")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_unnormalized(cls, m: np.ndarray) -> "TwoQubitState":
        m = np.asarray(m, dtype=complex)
        m = (m + m.conj().T) / 2
        return cls(m / np.trace(m).real)

    @classmethod
    def pure(cls, psi) -> "TwoQubitState":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def bell(cls, kind: BellState) -> "TwoQubitState":
        return cls.pure(kind.vector)

    @classmethod
    def maximally_mixed(cls) -> "TwoQubitState":
        return cls(np.eye(4) / 4)

    def __getitem__(self, idx):
        return self.matrix[idx]

    def allclose(self, other, atol: float = 1e-12) -> bool:
        other = other.matrix if isinstance(other, TwoQubitState) else np.asarray(other)
        return bool(np.allclose(self.matrix, other, rtol=0, atol=atol))

    def __repr__(self):
        return f"TwoQubitState(\n{np.array2string(self.matrix, precision=6)})"


@dataclass(frozen=True)
class BellDiagonalVec:
    """Weights of Psi+, Psi-, Phi+, Phi- in a Bell-diagonal state."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        for name in "abcd":
            v = getattr(self, name)
            if not (-1e-12 <= v <= 1 + 1e-12):
                raise InvalidStateError(f"Bell weight {name}={v!r} outside [0, 1]")

    @classmethod
    def from_array(cls, v) -> "BellDiagonalVec":
        a, b, c, d = (float(x) for x in v)
        return cls(a, b, c, d)

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d])

    def total(self) -> float:
        return self.a + self.b + self.c + self.d

    def normalized(self) -> "BellDiagonalVec":
        return BellDiagonalVec.from_array(self.as_array() / self.total())

    def to_state(self) -> TwoQubitState:
        return TwoQubitState(from_bell_basis(np.diag(self.normalized().as_array())))


def _matrix(state) -> np.ndarray:
    if isinstance(state, TwoQubitState):
        return state.matrix
    return check_density_matrix(state)


def von_neumann_entropy(state) -> float:
    """Entropy in bits of a TwoQubitState or any valid density matrix."""
    lam = np.linalg.eigvalsh(_matrix(state))
    lam = lam[lam > EIG_CLAMP]
    return float(max(-np.sum(lam * np.log2(lam)), 0.0))


def partial_trace(state, keep: str) -> np.ndarray:
    """Reduced 2x2 state of memory ``keep`` ('A' or 'B'), basis order |1>, |0>."""
    t = _matrix(state).reshape(2, 2, 2, 2)
    if keep == "A":
        return np.einsum("ijkj->ik", t)
    if keep == "B":
        return np.einsum("jijk->ik", t)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def to_bell_basis(state) -> np.ndarray:
    m = _matrix(state)
    return BELL_BASIS.conj() @ m @ BELL_BASIS.T


def from_bell_basis(m_bell: np.ndarray) -> np.ndarray:
    return BELL_BASIS.T @ np.asarray(m_bell, dtype=complex) @ BELL_BASIS.conj()


def bell_diagonal_projection(state) -> BellDiagonalVec:
    """Bell-basis diagonal of ``state``; drops any Bell-basis coherences."""
    w = np.clip(np.real(np.diag(to_bell_basis(state))), 0.0, None)
    return BellDiagonalVec.from_array(w / w.sum())


def trace_distance(rho, sigma) -> float:
    d = np.asarray(rho.matrix if isinstance(rho, TwoQubitState) else rho) - np.asarray(
        sigma.matrix if isinstance(sigma, TwoQubitState) else sigma
    )
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(d))))


def partial_transpose_min_eig(state) -> float:
    """Smallest eigenvalue of the partial transpose on B (negative iff NPT)."""
    t = _matrix(state).reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)
    return float(np.linalg.eigvalsh(t).min())
