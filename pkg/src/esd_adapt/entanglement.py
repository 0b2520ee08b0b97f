"""Partial transpose, PPT decision and Wootters concurrence for two qubits.

The array-level helpers (``min_pt_eigenvalue``, ``concurrence_matrix``)
accept stacks of 4x4 matrices so that parameter scans can be vectorised.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import SIGMA_Y, dagger, eigvals_hermitian, kron, sqrt_psd
from .states import TwoQubitState

YY = kron(SIGMA_Y, SIGMA_Y)
DEFAULT_TOL = 1e-10


def _matrix(state) -> np.ndarray:
    return state.rho if isinstance(state, TwoQubitState) else np.asarray(state, dtype=complex)


def partial_transpose_A(state) -> np.ndarray:
    """Transpose the indices of qubit A: entry ``(2i+k, 2j+l)`` goes to ``(2j+k, 2i+l)``."""
    rho = _matrix(state)
    lead = rho.shape[:-2]
    r = rho.reshape(lead + (2, 2, 2, 2))
    n = r.ndim
    axes = list(range(n - 4)) + [n - 2, n - 3, n - 4, n - 1]
    return r.transpose(axes).reshape(lead + (4, 4))


def min_pt_eigenvalue(state):
    """Smallest eigenvalue of the partial transpose (float, or array for stacks)."""
    w = eigvals_hermitian(partial_transpose_A(state))[..., -1]
    return float(w) if np.ndim(w) == 0 else w


def spin_flip(rho: np.ndarray) -> np.ndarray:
    return YY @ np.conj(rho) @ YY


def concurrence_matrix(rho: np.ndarray):
    """Concurrence of one or many (normalised) 4x4 density matrices.

    The decreasing values ``lambda_i`` are the square roots of the
    eigenvalues of the Hermitian matrix ``sqrt(rho) rho~ sqrt(rho)``.  They are
    obtained as the singular values of ``sqrt(rho) sqrt(rho~)``, which has the
    same spectrum but avoids taking square roots of near-zero eigenvalues.
    """
    rho = np.asarray(rho, dtype=complex)
    root = sqrt_psd(rho)
    root_flip = spin_flip(root)
    lam = np.linalg.svd(root @ root_flip, compute_uv=False)
    c = lam[..., 0] - lam[..., 1] - lam[..., 2] - lam[..., 3]
    c = np.clip(c, 0.0, 1.0)
    return float(c) if np.ndim(c) == 0 else c


def concurrence(state) -> float:
    return concurrence_matrix(_matrix(state))


@dataclass(frozen=True)
class EntanglementReport:
    min_pt_eigenvalue: float
    concurrence: float
    entangled: bool
    tolerance: float


def is_entangled(state, tol: float = DEFAULT_TOL) -> EntanglementReport:
    """PPT decision; for two qubits a negative partial transpose is necessary and sufficient."""
    rho = _matrix(state)
    lo = min_pt_eigenvalue(rho)
    return EntanglementReport(lo, concurrence_matrix(rho), lo < -tol, tol)
