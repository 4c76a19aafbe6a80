"""Haar-random logical states and Monte Carlo averages of Fisher quantities.

Sample ``j`` of a run with seed ``seed`` always uses the generator spawned
as child ``j`` of ``SeedSequence(seed)``, so results do not depend on how
samples are split across threads.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .channels import Classification, anticommute_matrix, classify_syndromes
from .codes import block_product, parse_target, resolve_code
from .noise import enumerate_leading, noise_from_name
from .qfisher import (
    BlochState,
    bloch_from_state,
    covariance,
    delta_contribution,
    limit_ratio_quantum,
    q_channel_lambda,
    schur_complement,
    split_indices,
)

DEFAULT_SAMPLES = 1000
DEFAULT_SEED = 20250101


class AssumptionError(ValueError):
    """A theorem's precondition does not hold for the requested input."""


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("SYNDAWARE_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class AveragedQuantity:
    mean: float
    se: float
    n: int

    @classmethod
    def from_samples(cls, values) -> AveragedQuantity:
        v = np.asarray(values, dtype=float)
        se = float(v.std(ddof=1) / np.sqrt(len(v))) if len(v) > 1 else float("nan")
        return cls(float(v.mean()), se, len(v))

    @property
    def rel_se(self) -> float:
        return self.se / abs(self.mean) if self.mean != 0 else float("inf")

    def z(self, expected: float) -> float:
        return (self.mean - expected) / self.se if self.se > 0 else (0.0 if self.mean == expected else float("inf"))

    def agrees(self, expected: float, n_se: float = 5.0, max_rel_se: float | None = 0.1) -> bool:
        """Within ``n_se`` standard errors and, optionally, relatively precise."""
        ok = abs(self.mean - expected) <= n_se * self.se
        if max_rel_se is not None:
            ok = ok and self.rel_se < max_rel_se
        return bool(ok)


def sample_haar(k: int, rng: np.random.Generator) -> BlochState:
    """Haar-random pure ``k``-qubit state from normalised complex Gaussians."""
    if k < 1:
        raise ValueError("k must be positive")
    psi = rng.normal(size=2**k) + 1j * rng.normal(size=2**k)
    return bloch_from_state(psi / np.linalg.norm(psi))


def sample_rngs(seed: int, n: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def haar_map(
    func: Callable[[BlochState], object], k: int, n: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED, threads: int | None = None,
) -> list:
    """``[func(state_j) for j < n]`` with per-sample streams, in sample order."""
    rngs = sample_rngs(seed, n)
    threads = threads or default_threads()

    def one(r):
        return func(sample_haar(k, r))

    if threads <= 1 or n < 2:
        return [one(r) for r in rngs]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(one, rngs, chunksize=max(1, n // (4 * threads))))


def haar_average(func, k: int, n: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED,
                 threads: int | None = None) -> AveragedQuantity:
    return AveragedQuantity.from_samples(haar_map(func, k, n, seed, threads))


def first_qubit_label(kind: str, k: int) -> int:
    """Label index of ``kind`` on logical qubit 0 and identity elsewhere."""
    return parse_target(kind, k)


# ---------------------------------------------------------------------------
# identities


def theta_sq_average(k: int, i: int | None = None, n: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED,
                     threads: int | None = None) -> AveragedQuantity:
    """Haar mean of ``theta_i^2`` (expected ``1 / (2**k + 1)``)."""
    i = first_qubit_label("Z", k) if i is None else i
    return haar_average(lambda st: st.theta[i - 1] ** 2, k, n, seed, threads)


def lemma1_average(k: int, i: int | None = None, Q: int | None = None, n: int = DEFAULT_SAMPLES,
                   seed: int = DEFAULT_SEED, threads: int | None = None) -> AveragedQuantity:
    """Haar mean of ``Delta_i`` for the channel ``(I + Q . Q) / 2`` (expected ``2**-(k+2)``)."""
    i = first_qubit_label("Z", k) if i is None else i
    Q = first_qubit_label("X", k) if Q is None else Q
    if not anticommute_matrix(k)[Q, i]:
        raise AssumptionError("Q must anticommute with the target")
    lam = q_channel_lambda(k, Q)
    return haar_average(lambda st: delta_contribution(lam, st.theta, i), k, n, seed, threads)


def lemma2_check(state: BlochState, tol: float = 1e-9) -> dict:
    """Pure-state covariance: ``C theta = 0`` and spectrum ``{0, 2**(k-1)}``."""
    k = state.k
    c = covariance(state.theta)
    w = np.linalg.eigvalsh(c)
    top = 2.0 ** (k - 1)
    n_zero = int(np.sum(np.abs(w) <= tol))
    n_top = int(np.sum(np.abs(w - top) <= tol))
    kernel_ok = float(np.max(np.abs(c @ state.theta))) <= tol
    d = 2**k - 1
    ok = kernel_ok and n_zero == d * d and n_top == 2 * d
    return {"ok": ok, "kernel_ok": kernel_ok, "n_zero": n_zero, "n_top": n_top,
            "max_dev": float(np.min(np.stack([np.abs(w), np.abs(w - top)]), axis=0).max())}


def schur_block(theta, Q: int) -> np.ndarray:
    """``((C^{-1})_{--})^{-1}`` as the Schur complement ``C_{--} - C_{-+} C_{++}^+ C_{+-}``."""
    return schur_complement(covariance(theta), Q)


@dataclass
class MatrixAverage:
    mean: np.ndarray
    se: np.ndarray
    n: int
    labels: np.ndarray


def prop3_average(k: int, Q: int | None = None, n: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED,
                  threads: int | None = None) -> MatrixAverage:
    """Haar mean of ``((C^{-1})_{--})^{-1}`` (expected ``I / 2**k``)."""
    Q = first_qubit_label("X", k) if Q is None else Q
    mats = np.array(haar_map(lambda st: schur_block(st.theta, Q), k, n, seed, threads))
    _, minus = split_indices(k, Q)
    return MatrixAverage(mats.mean(axis=0), mats.std(axis=0, ddof=1) / np.sqrt(n), n, minus)


# ---------------------------------------------------------------------------
# block-code limit ratios and sweeps


def default_noise(code_name: str) -> str:
    """Bit-flip noise for repetition codes, depolarising otherwise."""
    return "bitflip" if code_name.lower().startswith("rep") else "depolarizing"


def block_classification(code_name: str, k: int, noise: str | None = None) -> Classification:
    """Classification of ``k`` blocks of a code, target ``Z`` on the first block."""
    base = resolve_code(code_name)
    code = block_product(base, k) if k > 1 else base
    nz = noise_from_name(noise or default_noise(code_name), 0.01)
    table = enumerate_leading(code, nz)
    return classify_syndromes(table, first_qubit_label("Z", code.k), base.d)


def thm2_qualifies(cls: Classification, tol: float = 1e-9) -> tuple[bool, str]:
    """Check that every Theta(1) limit channel is ``(I + Q . Q) / 2`` up to a logical frame."""
    if cls.d % 2:
        return False, f"distance {cls.d} is odd"
    if len(cls.s1_rows) == 0:
        return False, "no Theta(1) syndromes"
    anti = anticommute_matrix(cls.k)[cls.target]
    for dist in cls.s1_dist:
        support = np.nonzero(dist > tol)[0]
        if len(support) != 2 or abs(dist[support[0]] - 0.5) > tol or abs(dist[support[1]] - 0.5) > tol:
            return False, "a Theta(1) channel is not an equal mixture of two classes"
        if not anti[support[0] ^ support[1]]:
            return False, "a Theta(1) channel mixes classes that commute with the target"
    return True, "ok"


def thm2_ratio(code_name: str, k: int, n: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED,
               noise: str | None = None, threads: int | None = None) -> AveragedQuantity:
    """Haar mean of the quantum low-error limit ratio (expected ``2**-(k+1)``)."""
    cls = block_classification(code_name, k, noise)
    ok, why = thm2_qualifies(cls)
    if not ok:
        raise AssumptionError(f"{code_name}^{k}: {why}")
    return haar_average(lambda st: limit_ratio_quantum(cls, st.theta), k, n, seed, threads)


def pauli_channel_lambda(k: int, ex: float, ey: float, ez: float) -> np.ndarray:
    """Contraction vector of a Pauli channel on logical qubit 0, identity elsewhere."""
    if min(ex, ey, ez) < 0 or ex + ey + ez > 1:
        raise ValueError("invalid Pauli channel parameters")
    one = {0: 1.0, 1: 1 - 2 * (ey + ez), 2: 1 - 2 * (ex + ez), 3: 1 - 2 * (ex + ey)}
    labels = np.arange(1, 4**k)
    return np.array([one[int(j >> (2 * (k - 1)))] for j in labels])


def fig5_sweep(ks: Sequence[int], params: Sequence[tuple[float, float, float]], n: int = DEFAULT_SAMPLES,
               seed: int = DEFAULT_SEED, threads: int | None = None) -> list[dict]:
    """Haar mean of ``Delta_i`` for local Pauli channels on the first logical qubit."""
    rows = []
    for prm in params:
        for k in ks:
            lam = pauli_channel_lambda(k, *prm)
            i = first_qubit_label("Z", k)
            avg = haar_average(lambda st: delta_contribution(lam, st.theta, i), k, n, seed, threads)
            rows.append({"quantity": "delta", "k": k, "param": "/".join(f"{x:g}" for x in prm),
                         "mean": avg.mean, "se": avg.se, "n": n, "seed": seed})
    return rows


def fig6_sweep(codes: Sequence[str], ks: Sequence[int], n: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED,
               threads: int | None = None, noise: str | None = None) -> list[dict]:
    """Haar mean of the quantum low-error limit ratio for block codes."""
    rows = []
    for name in codes:
        for k in ks:
            cls = block_classification(name, k, noise)
            avg = haar_average(lambda st: limit_ratio_quantum(cls, st.theta), k, n, seed, threads)
            rows.append({"quantity": "limit_ratio", "code": name, "k": k, "mean": avg.mean,
                         "se": avg.se, "n": n, "seed": seed})
    return rows
