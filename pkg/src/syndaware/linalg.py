"""Cyclic Jacobi eigensolver for small dense Hermitian matrices.

Used where an independent eigendecomposition is wanted (measurement
simulation, the SLD oracle, cross-checks of ``numpy.linalg.eigh``).  The
hot QFIM paths call LAPACK through numpy instead.
"""

from __future__ import annotations

import numpy as np


def jacobi_eigh(a: np.ndarray, tol: float = 1e-14, max_sweeps: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.

    Each rotation first removes the phase of the pivot ``a[p, q]`` with a
    diagonal unitary and then applies a real Givens rotation that zeros it.
    Sweeps stop once the off-diagonal Frobenius norm falls below
    ``tol * ||a||_F``.

    Returns
    -------
    w : (n,) float array
    v : (n, n) array with ``a @ v[:, j] = w[j] v[:, j]``; real when ``a`` is real.
    """
    a = np.array(a, dtype=complex if np.iscomplexobj(a) else float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("square matrix required")
    if not np.allclose(a, a.conj().T, atol=1e-12 * max(1.0, np.abs(a).max(initial=0.0))):
        raise ValueError("matrix is not Hermitian")
    a = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=a.dtype)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n), v
    complex_ = np.iscomplexobj(a)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                if complex_:
                    ph = apq / mag
                    a[q, :] *= ph
                    a[:, q] *= np.conj(ph)
                    v[:, q] *= np.conj(ph)
                app, aqq = a[p, p].real, a[q, q].real
                tau = (aqq - app) / (2.0 * mag)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        raise RuntimeError("Jacobi iteration did not converge")
    w = np.diag(a).real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def psd_pinv(a: np.ndarray, rtol: float = 1e-8) -> np.ndarray:
    """Pseudo-inverse of a symmetric PSD matrix; eigenvalues below
    ``rtol * max(eigenvalue)`` are treated as zero."""
    w, v = np.linalg.eigh(a)
    cut = rtol * max(w.max(initial=0.0), 0.0)
    inv = np.where(w > cut, 1.0 / np.where(w > cut, w, 1.0), 0.0)
    return (v * inv) @ v.conj().T


def kernel_basis(a: np.ndarray, rtol: float = 1e-8) -> np.ndarray:
    """Orthonormal basis (columns) of the numerical kernel of a PSD matrix."""
    w, v = np.linalg.eigh(a)
    cut = rtol * max(w.max(initial=0.0), 0.0)
    return v[:, w <= cut]
