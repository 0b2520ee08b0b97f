"""Small dense complex-matrix kernel for 2x2 and 4x4 operators.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Most helpers
accept a leading batch dimension so that parameter sweeps can be evaluated
in one call.
"""

from __future__ import annotations

import numpy as np

from .errors import NotHermitian, NotPSD

I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

HERMITIAN_TOL = 1e-12
PSD_CLIP = 1e-10


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def trace(m: np.ndarray):
    return np.trace(m, axis1=-2, axis2=-1)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product ``a ⊗ b`` of two 2x2 matrices (batched over leading axes).

    Index convention: ``(a⊗b)[2i+k, 2j+l] = a[i, j] * b[k, l]``.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    out = np.einsum("...ij,...kl->...ikjl", a, b)
    return out.reshape(out.shape[:-4] + (4, 4))


def hermitian_defect(m: np.ndarray) -> float:
    """Largest entry of ``|m - m†|``."""
    return float(np.max(np.abs(m - dagger(m))))


def eig_hermitian(m: np.ndarray, check: bool = True):
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(w, v)`` with eigenvalues ``w`` sorted in descending order and
    the matching eigenvectors as the columns of the unitary ``v``, so that
    ``m = v @ diag(w) @ v†``.  Works on stacks of matrices.

    Raises
    ------
    NotHermitian
        If ``check`` is set and ``max|m - m†| > 1e-12``.
    """
    m = np.asarray(m, dtype=complex)
    if check and hermitian_defect(m) > HERMITIAN_TOL:
        raise NotHermitian(f"matrix is not Hermitian (defect {hermitian_defect(m):.3e})")
    w, v = np.linalg.eigh(0.5 * (m + dagger(m)))
    return w[..., ::-1], v[..., ::-1]


def eigvals_hermitian(m: np.ndarray) -> np.ndarray:
    """Descending eigenvalues of (the Hermitian part of) ``m``."""
    m = np.asarray(m, dtype=complex)
    return np.linalg.eigvalsh(0.5 * (m + dagger(m)))[..., ::-1]


def jacobi_eigh(m: np.ndarray, tol: float = 1e-13, max_sweeps: int = 100):
    """Cyclic complex Jacobi eigensolver for a single small Hermitian matrix.

    Each rotation first removes the phase of the pivot ``m[p, q]`` and then
    applies a real Givens rotation with ``|theta| <= pi/4``.  Iteration stops
    once the off-diagonal Frobenius norm drops below ``tol`` (relative to
    ``max(1, ||m||_F)``) or after ``max_sweeps`` sweeps.

    Returns ``(w, v, sweeps)`` with ``w`` descending.
    """
    a = np.array(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("jacobi_eigh expects a single square matrix")
    if hermitian_defect(a) > HERMITIAN_TOL:
        raise NotHermitian(f"matrix is not Hermitian (defect {hermitian_defect(a):.3e})")
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(a)))
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off < tol * scale:
            sweeps -= 1
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag < 1e-300:
                    continue
                phase = apq / mag
                tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                w = np.eye(n, dtype=complex)
                w[p, p] = c
                w[p, q] = s
                w[q, p] = -s * np.conj(phase)
                w[q, q] = c * np.conj(phase)
                a = dagger(w) @ a @ w
                v = v @ w
    evals = np.real(np.diag(a))
    order = np.argsort(evals)[::-1]
    return evals[order], v[:, order], sweeps


def sqrt_psd(m: np.ndarray) -> np.ndarray:
    """Principal square root of a Hermitian positive semidefinite matrix.

    Eigenvalues down to ``-1e-10`` are treated as rounding noise and clipped
    to zero; anything more negative raises :class:`NotPSD`.
    """
    w, v = eig_hermitian(m)
    if np.min(w) < -PSD_CLIP:
        raise NotPSD(f"matrix has eigenvalue {np.min(w):.3e} < -{PSD_CLIP}")
    root = np.sqrt(np.clip(w, 0.0, None))
    return (v * root[..., None, :]) @ dagger(v)
