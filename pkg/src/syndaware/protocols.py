"""Monte Carlo simulation of syndrome-agnostic and syndrome-aware estimators.

Classical protocols observe ``(s, x)`` pairs with ``x = +-1`` and
``E[x | s] = (1 - 2 eps_{i,s}) theta``.  Because every estimator here only
depends on the counts ``n[s, x]``, repetition runs draw those counts from a
multinomial instead of simulating shot by shot; :func:`sample_shots` gives
the per-shot record for direct use.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .channels import anticommute_matrix, error_rates
from .fisher import f, fisher_synd
from .linalg import jacobi_eigh
from .noise import SyndromeTable
from .qfisher import (
    PINV_RTOL,
    density_matrix,
    k_from_params,
    o_coefficients,
    pauli_matrices,
    q_channel_lambda,
    simplified_state_suite,
)

THETA_CLIP = 1.0 - 1e-6


@dataclass
class ShotRecords:
    """Per-shot syndrome row indices and +-1 outcomes."""

    syndromes: np.ndarray
    outcomes: np.ndarray
    num_syndromes: int

    def __len__(self) -> int:
        return len(self.outcomes)

    def counts(self, start: int = 0, stop: int | None = None) -> np.ndarray:
        """``(S, 2)`` counts of outcomes ``-1`` and ``+1`` per syndrome."""
        s = self.syndromes[start:stop]
        x = self.outcomes[start:stop]
        return np.stack([
            np.bincount(s[x < 0], minlength=self.num_syndromes),
            np.bincount(s[x > 0], minlength=self.num_syndromes),
        ], axis=1)

    def shuffled(self, rng: np.random.Generator) -> ShotRecords:
        """Syndrome labels randomly permuted across shots."""
        return ShotRecords(rng.permutation(self.syndromes), self.outcomes.copy(), self.num_syndromes)


def joint_distribution(table: SyndromeTable, i: int, theta: float) -> np.ndarray:
    """``Pr(s, x)`` as an ``(S, 2)`` array (columns ``x = -1, +1``), renormalised."""
    p = table.p / table.p.sum()
    m = (1.0 - 2.0 * error_rates(table, i)) * theta
    return np.stack([p * (1 - m) / 2, p * (1 + m) / 2], axis=1)


def sample_shots(table: SyndromeTable, i: int, theta: float, n: int, rng: np.random.Generator) -> ShotRecords:
    """Draw ``s ~ p_s`` and then ``x`` from the conditional binary law."""
    joint = joint_distribution(table, i, theta)
    p = joint.sum(axis=1)
    s = rng.choice(len(p), size=n, p=p)
    plus = rng.random(n) < joint[s, 1] / p[s]
    return ShotRecords(s, np.where(plus, 1, -1).astype(np.int8), len(p))


def sample_counts(joint: np.ndarray, n: int, rng: np.random.Generator, size=None) -> np.ndarray:
    flat = rng.multinomial(n, joint.ravel(), size=size)
    return flat.reshape(flat.shape[:-1] + joint.shape)


def shuffle_counts(counts: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Counts after a uniformly random permutation of syndrome labels across shots."""
    margins = counts.sum(axis=1)
    plus = rng.multivariate_hypergeometric(margins, int(counts[:, 1].sum()))
    return np.stack([margins - plus, plus], axis=1)


# ---------------------------------------------------------------------------
# estimators


def _signed(counts: np.ndarray) -> np.ndarray:
    return counts[..., 1] - counts[..., 0]


def estimate_agnostic(shots, eps_i: float) -> float:
    """Average of the rescaled outcomes ``x / (1 - 2 eps_i)``."""
    if eps_i >= 0.5:
        raise ValueError("eps_i = 1/2: outcomes carry no information")
    counts = shots.counts() if isinstance(shots, ShotRecords) else np.asarray(shots)
    return float(_signed(counts).sum() / counts.sum() / (1.0 - 2.0 * eps_i))


def _csynd_stage2(counts: np.ndarray, eps_s: np.ndarray, theta_init: float) -> float:
    t = float(np.clip(theta_init, -THETA_CLIP, THETA_CLIP))
    w = f(t, eps_s)
    lam = 1.0 - 2.0 * eps_s
    live = w > 0
    num = np.sum(w[live] * _signed(counts)[live] / lam[live])
    den = np.sum(w * counts.sum(axis=1))
    return float(num / den) if den > 0 else 0.0


def estimate_csynd(shots, eps_s, n_init: int | None = None) -> float:
    """Two-stage classical syndrome-aware estimator.

    The first ``n_init = floor(sqrt(N))`` shots give an agnostic initial
    estimate (rates averaged with the empirical syndrome frequencies); the
    rest are combined with weights ``f(theta_init, eps_{i,s})``.  A syndrome
    with ``eps = 1/2`` gets weight zero.
    """
    eps_s = np.asarray(eps_s, dtype=float)
    if isinstance(shots, ShotRecords):
        n_init = int(np.sqrt(len(shots))) if n_init is None else n_init
        c1, c2 = shots.counts(0, n_init), shots.counts(n_init)
    else:
        c1, c2 = shots
    return _csynd_from_counts(c1, c2, eps_s)


def _csynd_from_counts(c1: np.ndarray, c2: np.ndarray, eps_s: np.ndarray) -> float:
    n1 = c1.sum()
    eps_bar = float(np.dot(c1.sum(axis=1), eps_s) / n1) if n1 else 0.0
    theta_init = _signed(c1).sum() / n1 / (1 - 2 * eps_bar) if n1 and eps_bar < 0.5 else 0.0
    return _csynd_stage2(c2, eps_s, theta_init)


# ---------------------------------------------------------------------------
# quantum two-step protocol on the simplified state


def _measure_counts(obs: np.ndarray, rho: np.ndarray, n: int, rng: np.random.Generator) -> float:
    """Sum of ``n`` Born-rule outcomes of measuring the Hermitian ``obs`` on ``rho``."""
    if n == 0:
        return 0.0
    vals, vecs = jacobi_eigh(obs)
    probs = np.real(np.einsum("ai,ab,bi->i", vecs.conj(), rho, vecs))
    probs = np.clip(probs, 0.0, None)
    counts = rng.multinomial(n, probs / probs.sum())
    return float(np.dot(counts, vals))


def _pauli_sum(coeffs: np.ndarray, k: int) -> np.ndarray:
    return np.tensordot(coeffs, pauli_matrices(k)[1:], axes=1)


def rough_tomography(theta, p: float, Q: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Stage-1 estimate of every Bloch component from ``n`` copies.

    Copies are assigned to the Pauli labels in turn.  A copy whose syndrome
    flags the ``(I + Q . Q)/2`` branch is kept only for labels commuting with
    ``Q``, where that branch leaves the expectation unchanged.
    """
    theta = np.asarray(theta, dtype=float)
    L = len(theta)
    k = k_from_params(L)
    per = np.full(L, n // L)
    per[: n % L] += 1
    keep_all = q_channel_lambda(k, Q) == 1.0
    est = np.zeros(L)
    for j in range(L):
        m = per[j] if keep_all[j] else rng.binomial(per[j], 1.0 - p)
        if m:
            est[j] = 2.0 * rng.binomial(m, (1.0 + theta[j]) / 2.0) / m - 1.0
    return est


def project_physical(theta) -> np.ndarray:
    """Bloch vector of the density matrix closest to ``rho(theta)``.

    Negative eigenvalues of the (possibly unphysical) estimate are removed by
    projecting its spectrum onto the probability simplex.
    """
    rho = density_matrix(theta)
    w, v = np.linalg.eigh(rho)
    u = np.sort(w)[::-1]
    css = np.cumsum(u) - 1.0
    r = np.nonzero(u - css / np.arange(1, len(u) + 1) > 0)[0][-1]
    w = np.clip(w - css[r] / (r + 1), 0.0, None)
    rho = (v * w) @ v.conj().T
    k = k_from_params(len(theta))
    return np.real(np.einsum("jab,ba->j", pauli_matrices(k)[1:], rho))


def estimate_quantum_twostep(
    theta, p: float, Q: int, i: int, n: int, rng: np.random.Generator, mode: str = "oracle_init"
) -> float:
    """Adaptive two-step estimator for the simplified classical-quantum state.

    ``mode="oracle_init"`` uses the true Bloch vector as the initial
    estimate and spends all ``n`` copies in stage 2.  ``mode="rough_init"``
    spends ``n1 = floor(sqrt(n))`` copies on :func:`rough_tomography`,
    projects the result onto a physical state and, when forming ``O_i``,
    drops eigenvalues of ``C_{++}`` below ``1 / sqrt(n1)``, the scale of the
    stage-1 error.  Without that cut-off, pure states (singular ``C_{++}``)
    acquire tiny noise eigenvalues whose inverses make the estimator heavy
    tailed.
    """
    theta = np.asarray(theta, dtype=float)
    k = k_from_params(len(theta))
    if not anticommute_matrix(k)[Q, i]:
        raise ValueError("Q must anticommute with the target")
    if mode == "oracle_init":
        theta_init, n2, rtol = theta, n, PINV_RTOL
    elif mode == "rough_init":
        n1 = int(np.sqrt(n))
        theta_init = project_physical(rough_tomography(theta, p, Q, n1, rng))
        n2, rtol = n - n1, max(PINV_RTOL, 1.0 / np.sqrt(max(n1, 1)))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    o_c, plus = o_coefficients(theta_init, i, Q, rtol)
    o_vec = np.zeros(len(theta))
    o_vec[plus - 1] = o_c
    e_i = np.zeros(len(theta))
    e_i[i - 1] = 1.0
    a0 = e_i - p * o_vec
    n_flag = rng.binomial(n2, p)
    n_clean = n2 - n_flag
    rho = density_matrix(theta)
    rho_q = density_matrix(q_channel_lambda(k, Q) * theta)
    s0 = _measure_counts(_pauli_sum(a0, k), rho, n_clean, rng)
    s1 = _measure_counts(_pauli_sum(o_vec, k), rho_q, n_flag, rng)
    delta_sum = (s0 - n_clean * float(a0 @ theta_init)) / (1.0 - p) + s1 - n_flag * float(o_vec @ theta_init)
    return float(theta_init[i - 1] + delta_sum / n2)


# ---------------------------------------------------------------------------
# repetition harness


@dataclass
class EstimatorResult:
    protocol: str
    label: str
    eta: float | None
    theta: float
    n: int
    reps: int
    mean: float
    bias: float
    bias_se: float
    var: float
    crb: float
    seed: int

    @property
    def ratio(self) -> float:
        """Empirical variance over the Cramer-Rao prediction."""
        return self.var / self.crb

    @property
    def bias_ok(self) -> bool:
        return abs(self.bias) < 3.0 * self.bias_se

    def as_row(self) -> dict:
        d = asdict(self)
        d["ratio"] = self.ratio
        return d


PROTOCOL_COLUMNS = ["protocol", "label", "eta", "theta", "n", "bias", "var", "crb", "ratio", "seed"]


def _result(protocol, label, eta, theta, n, estimates, crb, seed) -> EstimatorResult:
    est = np.asarray(estimates, dtype=float)
    var = float(est.var(ddof=1))
    return EstimatorResult(protocol, label, eta, float(theta), n, len(est), float(est.mean()),
                           float(est.mean() - theta), float(np.sqrt(var / len(est))), var, crb, seed)


def _rep_rngs(seed: int, reps: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(reps)]


def run_classical(
    table: SyndromeTable, i: int, theta: float, n: int, reps: int, seed: int, protocol: str
) -> EstimatorResult:
    """Repeat a classical protocol ``reps`` times on ``n`` shots each.

    ``protocol`` is ``agnostic``, ``csynd`` or ``shuffled``.  The shuffled
    control permutes syndrome labels across shots, which makes every
    conditional rate equal to ``eps_i``; the syndrome-aware estimator is then
    run with those recalibrated rates.
    """
    joint = joint_distribution(table, i, theta)
    p = joint.sum(axis=1)
    eps_s = error_rates(table, i)
    eps_i = float(np.dot(p, eps_s))
    n_init = int(np.sqrt(n))
    estimates = []
    for rng in _rep_rngs(seed, reps):
        if protocol == "agnostic":
            estimates.append(estimate_agnostic(sample_counts(joint, n, rng), eps_i))
        elif protocol == "csynd":
            c1 = sample_counts(joint, n_init, rng)
            c2 = sample_counts(joint, n - n_init, rng)
            estimates.append(_csynd_from_counts(c1, c2, eps_s))
        elif protocol == "shuffled":
            c1 = shuffle_counts(sample_counts(joint, n_init, rng), rng)
            c2 = shuffle_counts(sample_counts(joint, n - n_init, rng), rng)
            estimates.append(_csynd_from_counts(c1, c2, np.full_like(eps_s, eps_i)))
        else:
            raise ValueError(f"unknown protocol {protocol!r}")
    if protocol == "csynd":
        info = fisher_synd(table.with_masses(table.masses / table.p.sum()), i, theta)
    else:
        info = f(theta, eps_i)
    return _result(protocol, table.code_name, table.noise.eta, theta, n, estimates, 1.0 / (n * info), seed)


def run_quantum(
    theta, p: float, Q: int, i: int, n: int, reps: int, seed: int, mode: str = "oracle_init", label: str = "state"
) -> EstimatorResult:
    theta = np.asarray(theta, dtype=float)
    suite = simplified_state_suite(theta, p, Q, i)
    estimates = [estimate_quantum_twostep(theta, p, Q, i, n, rng, mode) for rng in _rep_rngs(seed, reps)]
    return _result(f"quantum_{mode}", label, p, theta[i - 1], n, estimates, suite.variance / n, seed)


__all__ = [
    "EstimatorResult", "PROTOCOL_COLUMNS", "ShotRecords", "estimate_agnostic", "estimate_csynd",
    "estimate_quantum_twostep", "joint_distribution", "rough_tomography", "run_classical",
    "run_quantum", "sample_counts", "sample_shots", "shuffle_counts",
]
