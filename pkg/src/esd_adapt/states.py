"""Two-qubit density matrices used as inputs to the channel pipelines.

Basis ordering is ``|00>, |01>, |10>, |11>`` with qubit A as the left tensor
factor everywhere in the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DomainError, InvalidState
from .linalg import I2, I4, dagger, eigvals_hermitian, hermitian_defect, kron


class BellKind(str, Enum):
    PSI_MINUS = "PsiMinus"
    PSI_PLUS = "PsiPlus"
    PHI_MINUS = "PhiMinus"
    PHI_PLUS = "PhiPlus"

    @classmethod
    def parse(cls, value) -> "BellKind":
        if isinstance(value, cls):
            return value
        key = str(value).replace("-", "").replace("_", "").lower()
        aliases = {
            "psiminus": cls.PSI_MINUS, "psi": cls.PSI_MINUS,
            "psiplus": cls.PSI_PLUS,
            "phiminus": cls.PHI_MINUS, "phi": cls.PHI_MINUS,
            "phiplus": cls.PHI_PLUS,
        }
        try:
            return aliases[key]
        except KeyError:
            raise DomainError(f"unknown Bell state {value!r}") from None


class Side(str, Enum):
    A = "A"
    B = "B"

    @classmethod
    def parse(cls, value) -> "Side":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise DomainError(f"side must be 'A' or 'B', got {value!r}") from None


STATE_HERMITIAN_TOL = 1e-10
STATE_TRACE_TOL = 1e-10
STATE_PSD_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class TwoQubitState:
    """A validated 4x4 density matrix."""

    rho: np.ndarray = field(repr=False)

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        if rho.shape != (4, 4):
            raise InvalidState(f"expected a 4x4 matrix, got shape {rho.shape}")
        if not np.all(np.isfinite(rho)):
            raise InvalidState("density matrix has non-finite entries")
        if hermitian_defect(rho) > STATE_HERMITIAN_TOL:
            raise InvalidState(f"not Hermitian (defect {hermitian_defect(rho):.3e})")
        tr = np.trace(rho).real
        if abs(tr - 1.0) > STATE_TRACE_TOL:
            raise InvalidState(f"trace is {tr!r}, expected 1")
        lo = eigvals_hermitian(rho)[-1]
        if lo < -STATE_PSD_TOL:
            raise InvalidState(f"not positive semidefinite (min eigenvalue {lo:.3e})")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.rho @ self.rho)))

    def marginal(self, side: Side | str) -> np.ndarray:
        """Reduced 2x2 density matrix of one qubit."""
        r = self.rho.reshape(2, 2, 2, 2)
        if Side.parse(side) is Side.A:
            return np.einsum("ikjk->ij", r)
        return np.einsum("kikj->ij", r)

    def allclose(self, other: "TwoQubitState", atol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.rho - other.rho)) <= atol)


def bell_vector(kind: BellKind | str) -> np.ndarray:
    kind = BellKind.parse(kind)
    v = np.zeros(4, dtype=complex)
    if kind is BellKind.PSI_MINUS:
        v[1], v[2] = 1, -1
    elif kind is BellKind.PSI_PLUS:
        v[1], v[2] = 1, 1
    elif kind is BellKind.PHI_MINUS:
        v[0], v[3] = 1, -1
    else:
        v[0], v[3] = 1, 1
    return v / np.sqrt(2)


def pure(vector) -> TwoQubitState:
    v = np.asarray(vector, dtype=complex)
    v = v / np.linalg.norm(v)
    return TwoQubitState(np.outer(v, v.conj()))


def bell(kind: BellKind | str) -> TwoQubitState:
    return pure(bell_vector(kind))


def check_probability(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {value}")
    return value


def werner(kind: BellKind | str, p: float) -> TwoQubitState:
    """Bell state mixed with white noise: ``p |B><B| + (1-p)/4 I``.

    Only the two singlet-type states ``PsiMinus`` and ``PhiMinus`` are
    accepted; use :func:`mixture` for anything else.
    """
    kind = BellKind.parse(kind)
    if kind not in (BellKind.PSI_MINUS, BellKind.PHI_MINUS):
        raise DomainError(f"werner() supports PsiMinus and PhiMinus, got {kind.value}")
    p = check_probability("p", p)
    return TwoQubitState(p * bell(kind).rho + (1 - p) / 4 * I4)


def mixture(states, weights) -> TwoQubitState:
    """Convex combination of states; weights must be non-negative and sum to 1."""
    weights = np.asarray(weights, dtype=float)
    if np.any(weights < 0) or abs(weights.sum() - 1) > 1e-12:
        raise DomainError("mixture weights must be non-negative and sum to 1")
    return TwoQubitState(sum(w * s.rho for w, s in zip(weights, states)))


def product(rho_a: np.ndarray, rho_b: np.ndarray) -> TwoQubitState:
    return TwoQubitState(kron(rho_a, rho_b))


def embed(op: np.ndarray, side: Side | str) -> np.ndarray:
    """Lift a single-qubit operator to the two-qubit space.

    Side A gives ``op ⊗ I``, side B gives ``I ⊗ op``.  A leading batch
    dimension on ``op`` is preserved.
    """
    op = np.asarray(op, dtype=complex)
    if Side.parse(side) is Side.A:
        return kron(op, np.broadcast_to(I2, op.shape))
    return kron(np.broadcast_to(I2, op.shape), op)


def conjugate(op: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return op @ rho @ dagger(op)


def random_density(rng: np.random.Generator, rank: int = 4) -> TwoQubitState:
    """Random state from the induced (Ginibre) measure with the given rank."""
    g = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    rho = g @ dagger(g)
    rho = rho / np.trace(rho).real
    return TwoQubitState(0.5 * (rho + dagger(rho)))


def random_qubit_density(rng: np.random.Generator, rank: int = 2) -> np.ndarray:
    g = rng.normal(size=(2, rank)) + 1j * rng.normal(size=(2, rank))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


def random_unitary(rng: np.random.Generator, n: int = 2) -> np.ndarray:
    """Haar-random unitary via QR with phase correction."""
    z = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
