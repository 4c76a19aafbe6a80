"""Quantum Fisher information of noisy and syndrome-resolved logical states.

A ``k``-qubit logical state is written ``rho = (I + sum_j theta_j P_j) / 2**k``
with ``P_j`` running over the nontrivial label indices ``1 .. 4**k - 1`` (see
:mod:`syndaware.codes`); vector position ``j - 1`` holds ``theta_j``.  Its
covariance matrix ``C_jl = <{P_j, P_l}>/2 - theta_j theta_l`` is the inverse
QFIM.  Pure states make ``C`` singular; two strategies handle that:

* the default pseudo-inverse path computes the exact ``delta -> 0`` limit of
  the depolarised problem ``theta -> (1 - delta) theta``;
* the ``delta`` path solves the regularised problem directly, with optional
  Richardson extrapolation in ``delta``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channels import Classification, anticommute_matrix, lambda_matrix
from .codes import label_pauli
from .fisher import f_inv, f_inv_deficit, f_max
from .linalg import jacobi_eigh, kernel_basis, psd_pinv
from .noise import SyndromeTable

PINV_RTOL = 1e-8
MAX_K = 5

# power of i in the product of single-qubit labels a * b (I=0, X=1, Y=2, Z=3)
_PHASE1 = np.zeros((4, 4), dtype=np.int64)
for _a, _b in ((1, 2), (2, 3), (3, 1)):
    _PHASE1[_a, _b] = 1
    _PHASE1[_b, _a] = 3


def num_params(k: int) -> int:
    return 4**k - 1


def k_from_params(n_params: int) -> int:
    k = int(round(np.log(n_params + 1) / np.log(4)))
    if 4**k - 1 != n_params:
        raise ValueError(f"{n_params} is not of the form 4**k - 1")
    return k


@lru_cache(maxsize=None)
def _digits(k: int) -> np.ndarray:
    c = np.arange(4**k)
    return np.stack([(c >> (2 * (k - 1 - q))) & 3 for q in range(k)], axis=1)


@lru_cache(maxsize=None)
def structure_constants(k: int) -> tuple[np.ndarray, np.ndarray]:
    """``(M, S)`` with ``{P_j, P_l} / 2 = S[j, l] P_{M[j, l]}``.

    ``M[j, l] = j ^ l`` and ``S`` is 0 for anticommuting pairs and +-1
    otherwise.  Indices include the identity label 0.
    """
    dig = _digits(k)
    e = _PHASE1[dig[:, None, :], dig[None, :, :]].sum(axis=2) % 4
    S = np.where(e % 2 == 1, 0.0, np.where(e == 0, 1.0, -1.0))
    idx = np.arange(4**k)
    M = idx[:, None] ^ idx[None, :]
    S.setflags(write=False)
    M.setflags(write=False)
    return M, S


# ---------------------------------------------------------------------------
# states


@lru_cache(maxsize=None)
def _action_tables(k: int):
    """Bit-flip masks, phase-Z masks and ``i**#Y`` factors per label, in basis-index bits."""
    dig = _digits(k)
    shift = np.array([k - 1 - q for q in range(k)])
    has_x = (dig == 1) | (dig == 2)
    has_z = (dig == 2) | (dig == 3)
    xb = (has_x << shift).sum(axis=1)
    zb = (has_z << shift).sum(axis=1)
    ny = (dig == 2).sum(axis=1)
    return xb, zb, (1j) ** ny


@lru_cache(maxsize=None)
def _parity(nbits: int) -> np.ndarray:
    v = np.arange(1 << nbits)
    out = np.zeros(1 << nbits, dtype=np.int64)
    for b in range(nbits):
        out ^= (v >> b) & 1
    return out


def pauli_expectations(psi: np.ndarray, k: int) -> np.ndarray:
    """``<psi|P_j|psi>`` for all labels ``j = 0 .. 4**k - 1`` without dense matrices."""
    xb, zb, iy = _action_tables(k)
    b = np.arange(2**k)
    sign = 1.0 - 2.0 * _parity(k)[b[None, :] & zb[:, None]]
    amp = psi[b[None, :] ^ xb[:, None]].conj() * psi[None, :]
    return np.real(iy * (sign * amp).sum(axis=1))


@dataclass(frozen=True)
class BlochState:
    """Generalised Bloch vector of a ``k``-qubit logical state."""

    k: int
    theta: np.ndarray
    amplitudes: np.ndarray | None = None

    @property
    def purity_sum(self) -> float:
        return float(np.dot(self.theta, self.theta))

    def density_matrix(self) -> np.ndarray:
        return density_matrix(self.theta)


def bloch_from_state(amplitudes, tol: float = 1e-10) -> BlochState:
    psi = np.asarray(amplitudes, dtype=complex).ravel()
    k = int(round(np.log2(len(psi))))
    if 2**k != len(psi) or k < 1:
        raise ValueError("amplitude vector length must be a power of two")
    if abs(np.linalg.norm(psi) - 1.0) > tol:
        raise ValueError("state is not normalised")
    return BlochState(k, pauli_expectations(psi, k)[1:], psi)


@lru_cache(maxsize=None)
def pauli_matrices(k: int) -> np.ndarray:
    """Dense matrices of all ``4**k`` labels, shape ``(4**k, 2**k, 2**k)``."""
    mats = np.array([label_pauli(c, k).to_matrix() for c in range(4**k)])
    mats.setflags(write=False)
    return mats


def density_matrix(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    k = k_from_params(len(theta))
    mats = pauli_matrices(k)
    return (mats[0] + np.tensordot(theta, mats[1:], axes=1)) / 2**k


def bloch_from_density(rho: np.ndarray) -> np.ndarray:
    k = int(round(np.log2(rho.shape[0])))
    mats = pauli_matrices(k)
    return np.real(np.einsum("jab,ba->j", mats[1:], rho))


def random_mixed_theta(k: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Bloch vector of a random full-rank (or rank-``rank``) density matrix."""
    dim = 2**k
    g = rng.normal(size=(dim, rank or dim)) + 1j * rng.normal(size=(dim, rank or dim))
    rho = g @ g.conj().T
    return bloch_from_density(rho / np.trace(rho).real)


# ---------------------------------------------------------------------------
# covariance and QFIM


def covariance(theta, delta: float = 0.0) -> np.ndarray:
    """Covariance matrix of the state with Bloch vector ``(1 - delta) theta``."""
    if not 0.0 <= delta < 1.0:
        raise ValueError("delta must lie in [0, 1)")
    th = (1.0 - delta) * np.asarray(theta, dtype=float)
    k = k_from_params(len(th))
    M, S = structure_constants(k)
    ext = np.concatenate([[1.0], th])
    return S[1:, 1:] * ext[M[1:, 1:]] - np.outer(th, th)


def _inverse(c: np.ndarray, delta: float) -> np.ndarray:
    if delta > 0:
        try:
            return np.linalg.inv(c)
        except np.linalg.LinAlgError as exc:
            raise np.linalg.LinAlgError("covariance singular despite regularisation") from exc
    return psd_pinv(c, PINV_RTOL)


def qfim_noisy(A: np.ndarray, c: np.ndarray | None, theta, delta: float = 0.0) -> np.ndarray:
    """QFIM ``A^T C(A theta + c)^{-1} A`` of an affinely transformed state.

    A diagonal Pauli channel is ``A = diag(lambda)``, ``c = 0``.  With
    ``delta = 0`` a pseudo-inverse replaces the inverse.
    """
    A = np.asarray(A, dtype=float)
    theta = np.asarray(theta, dtype=float)
    v = A @ theta + (0.0 if c is None else np.asarray(c, dtype=float))
    return A.T @ _inverse(covariance(v, delta), delta) @ A


@dataclass
class SyndromeQFIM:
    """Inverse QFIM of a classical-quantum state and derived target quantities."""

    jinv: np.ndarray
    target: int
    theta: np.ndarray
    method: str

    @property
    def variance(self) -> float:
        """``((J^Synd)^{-1})_{ii}``."""
        return float(self.jinv[self.target - 1, self.target - 1])

    @property
    def J_i(self) -> float:
        return 1.0 / self.variance

    def eps_qsynd(self) -> float:
        return eps_qsynd_from_variance(self.variance, float(self.theta[self.target - 1]))


def _merge_channels(weights: np.ndarray, lams: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    keep = weights > 0
    weights, lams = weights[keep], lams[keep]
    _, first, inv = np.unique(np.round(lams, 13), axis=0, return_index=True, return_inverse=True)
    w = np.bincount(inv.ravel(), weights=weights, minlength=len(first))
    return w, lams[first]


def _jinv_limit(weights, lams, theta) -> np.ndarray:
    """``delta -> 0`` limit of the inverse QFIM of ``sum_s w_s rho(Lambda_s theta)``.

    The regularised QFIM behaves as ``F + G / delta`` where ``G`` has range
    ``K = span{Lambda_s ker C(Lambda_s theta)}``.  Its inverse converges to
    ``P (P F P)^+ P`` with ``P`` the projector onto the complement of ``K``.
    """
    L = len(theta)
    F = np.zeros((L, L))
    kernels = []
    for w, lam in zip(weights, lams):
        c = covariance(lam * theta)
        F += w * (lam[:, None] * psd_pinv(c, PINV_RTOL) * lam[None, :])
        ker = kernel_basis(c, PINV_RTOL)
        if ker.shape[1]:
            kernels.append(lam[:, None] * ker)
    P = np.eye(L)
    if kernels:
        K = np.concatenate(kernels, axis=1)
        u, sv, _ = np.linalg.svd(K, full_matrices=False)
        basis = u[:, sv > 1e-10 * max(sv.max(initial=0.0), 1e-300)]
        P -= basis @ basis.T
    return P @ psd_pinv(P @ F @ P, PINV_RTOL) @ P


def _jinv_delta(weights, lams, theta, delta) -> np.ndarray:
    L = len(theta)
    J = np.zeros((L, L))
    for w, lam in zip(weights, lams):
        J += w * (lam[:, None] * np.linalg.inv(covariance(lam * theta, delta)) * lam[None, :])
    return np.linalg.inv(J)


def qfim_from_channels(
    weights, lams, theta, i: int, delta: float | None = None, richardson: bool = True
) -> SyndromeQFIM:
    """Inverse QFIM of ``sum_s w_s |s><s| (x) rho(Lambda_s theta)``.

    ``delta=None`` selects the pseudo-inverse limit.  Otherwise the problem is
    regularised by ``theta -> (1 - delta) theta``; with ``richardson`` the
    results at ``delta`` and ``delta / 10`` are extrapolated linearly to zero.
    """
    theta = np.asarray(theta, dtype=float)
    w, lm = _merge_channels(np.asarray(weights, dtype=float), np.atleast_2d(np.asarray(lams, dtype=float)))
    if delta is None:
        return SyndromeQFIM(_jinv_limit(w, lm, theta), i, theta, "pinv")
    j1 = _jinv_delta(w, lm, theta, delta)
    if not richardson:
        return SyndromeQFIM(j1, i, theta, f"delta={delta:g}")
    j2 = _jinv_delta(w, lm, theta, delta / 10)
    return SyndromeQFIM((10.0 * j2 - j1) / 9.0, i, theta, f"richardson({delta:g})")


def qfim_syndrome(
    table: SyndromeTable, theta, i: int, delta: float | None = None, richardson: bool = True
) -> SyndromeQFIM:
    """QFIM of the syndrome-resolved logical state for an ML-normalised table.

    Excluded (unenumerated) mass is treated as carrying no information about
    ``theta``, which can only lower the QFIM.
    """
    if table.series:
        raise ValueError("numeric table required")
    return qfim_from_channels(table.p, lambda_matrix(table), theta, i, delta, richardson)


def eps_qsynd(J_i: float, theta_i: float) -> float:
    return f_inv(theta_i, J_i)


def eps_qsynd_from_variance(variance: float, theta_i: float) -> float:
    """``eps^qSynd`` from ``((J^Synd)^{-1})_{ii}`` via the information deficit."""
    t2 = theta_i * theta_i
    deficit = (variance - (1.0 - t2)) / (variance * (1.0 - t2))
    return f_inv_deficit(theta_i, min(max(deficit, 0.0), f_max(theta_i)))


def delta_contribution(lam, theta, i: int, delta: float = 0.0) -> float:
    """Syndrome contribution ``Delta_i = e_i^T (C - C Lam C(Lam theta)^{-1} Lam C) e_i / 4``."""
    lam = np.asarray(lam, dtype=float)
    theta = np.asarray(theta, dtype=float)
    c = covariance(theta, delta)
    ci = c[:, i - 1]
    v = lam * ci
    inner = _inverse(covariance(lam * theta, delta), delta)
    return 0.25 * float(ci[i - 1] - v @ inner @ v)


def limit_ratio_quantum(cls: Classification, theta) -> float:
    """``lim_{eta->0} eps^qSynd / eps_i`` for the state ``theta``."""
    den = cls.denominator()
    w, lams = _merge_channels(cls.s1_coeff, cls.s1_lambdas()) if len(cls.s1_rows) else ([], [])
    num = sum(wt * delta_contribution(lam, theta, cls.target) for wt, lam in zip(w, lams))
    return (num + cls.minority_total()) / den


# ---------------------------------------------------------------------------
# simplified state: noiseless branch plus one (I + Q . Q)/2 branch


def split_indices(k: int, Q: int) -> tuple[np.ndarray, np.ndarray]:
    """Label indices (1-based) commuting / anticommuting with ``Q``."""
    anti = anticommute_matrix(k)[Q, 1:]
    labels = np.arange(1, 4**k)
    return labels[~anti], labels[anti]


def q_channel_lambda(k: int, Q: int) -> np.ndarray:
    """Contraction vector of ``(I + Q . Q) / 2``."""
    return np.where(anticommute_matrix(k)[Q, 1:], 0.0, 1.0)


@dataclass
class SimplifiedSuite:
    jinv: np.ndarray
    jinv_direct: np.ndarray
    schur: np.ndarray
    o_coeffs: np.ndarray
    plus: np.ndarray
    minus: np.ndarray
    schur_check: float | None
    target: int
    p: float

    @property
    def variance(self) -> float:
        return float(self.jinv[self.target - 1, self.target - 1])

    def observable_coeffs(self) -> tuple[np.ndarray, np.ndarray]:
        """Pauli coefficient vectors (length ``4**k - 1``) of the s=0 and s=1 observables."""
        L = len(self.jinv)
        o = np.zeros(L)
        o[self.plus - 1] = self.o_coeffs
        e = np.zeros(L)
        e[self.target - 1] = 1.0
        return (e - self.p * o) / (1.0 - self.p), o


def schur_complement(c: np.ndarray, Q: int) -> np.ndarray:
    """``C_{--} - C_{-+} C_{++}^+ C_{+-}``, which equals ``((C^{-1})_{--})^{-1}``
    for invertible ``C`` and is its ``delta -> 0`` limit for pure states."""
    k = k_from_params(len(c))
    plus, minus = split_indices(k, Q)
    pi, mi = plus - 1, minus - 1
    cpm = c[np.ix_(pi, mi)]
    return c[np.ix_(mi, mi)] - cpm.T @ psd_pinv(c[np.ix_(pi, pi)], PINV_RTOL) @ cpm


def o_coefficients(theta, i: int, Q: int, rtol: float = PINV_RTOL) -> tuple[np.ndarray, np.ndarray]:
    """``O_i(theta) = e_i^T C_{-+} (C_{++})^{-1} P_+`` as coefficients over ``J_+``.

    A pseudo-inverse stands in for ``(C_{++})^{-1}`` when the block is
    singular; eigenvalues below ``rtol`` times the largest are dropped.
    """
    theta = np.asarray(theta, dtype=float)
    k = k_from_params(len(theta))
    plus, _ = split_indices(k, Q)
    c = covariance(theta)
    cpp = c[np.ix_(plus - 1, plus - 1)]
    return psd_pinv(cpp, rtol) @ c[plus - 1, i - 1], plus


def simplified_state_suite(theta, p: float, Q: int, i: int, delta: float | None = None) -> SimplifiedSuite:
    """Closed-form and direct inverse QFIM of the two-branch state."""
    theta = np.asarray(theta, dtype=float)
    k = k_from_params(len(theta))
    if not anticommute_matrix(k)[Q, i]:
        raise ValueError("Q must anticommute with the target")
    if not 0.0 <= p < 1.0:
        raise ValueError("p must lie in [0, 1)")
    plus, minus = split_indices(k, Q)
    c = covariance(theta)
    pi, mi = plus - 1, minus - 1
    schur = schur_complement(c, Q)
    jinv = c.copy()
    jinv[np.ix_(mi, mi)] += p / (1.0 - p) * schur
    check = None
    w = np.linalg.eigvalsh(c)
    if w.min() > 1e-8 * w.max():
        check = float(np.max(np.abs(np.linalg.inv(np.linalg.inv(c)[np.ix_(mi, mi)]) - schur)))
    lams = np.stack([np.ones(len(theta)), q_channel_lambda(k, Q)])
    direct = qfim_from_channels(np.array([1.0 - p, p]), lams, theta, i, delta).jinv
    o_c, _ = o_coefficients(theta, i, Q)
    return SimplifiedSuite(jinv, direct, schur, o_c, plus, minus, check, i, p)


# ---------------------------------------------------------------------------
# SLD oracle


def sld_from_formula(theta) -> np.ndarray:
    """``L_j = sum_l (C^{-1})_{jl} (P_l - theta_l I)`` as dense matrices."""
    theta = np.asarray(theta, dtype=float)
    k = k_from_params(len(theta))
    mats = pauli_matrices(k)
    cinv = np.linalg.inv(covariance(theta))
    centred = mats[1:] - theta[:, None, None] * mats[0][None]
    return np.tensordot(cinv, centred, axes=1)


def sld_oracle(rho: np.ndarray, tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """SLDs and QFIM of ``rho`` w.r.t. its Bloch coordinates by spectral decomposition.

    Solves ``d rho / d theta_j = (rho L_j + L_j rho) / 2`` in the eigenbasis
    of ``rho`` (Jacobi), dropping terms with ``lambda_a + lambda_b <= tol``.
    Returns ``(L, J)`` with ``L`` of shape ``(4**k - 1, 2**k, 2**k)``.
    """
    k = int(round(np.log2(rho.shape[0])))
    lam, vec = jacobi_eigh(rho)
    mats = pauli_matrices(k)
    denom = lam[:, None] + lam[None, :]
    mask = denom > tol
    Ls = []
    for P in mats[1:]:
        d = vec.conj().T @ (P / 2**k) @ vec
        Lb = np.where(mask, 2.0 * d / np.where(mask, denom, 1.0), 0.0)
        Ls.append(vec @ Lb @ vec.conj().T)
    Ls = np.array(Ls)
    prod = np.einsum("ab,jbc,lca->jl", rho, Ls, Ls)
    return Ls, np.real(0.5 * (prod + prod.T))
