"""Vectorised enumeration of fixed-weight Pauli errors over packed keys.

Every single-qubit Pauli ``P`` on qubit ``q`` is mapped to an integer key
(syndrome bits plus logical-label bits).  The key map is a group
homomorphism, so the key of a multi-qubit error is the XOR of the keys of
its single-qubit factors.  The helpers here enumerate all errors of a given
weight in fixed chunks and return their keys together with the product of
per-Pauli coefficients.
"""

from __future__ import annotations

import itertools
from math import comb
from typing import Iterator

import numpy as np

CHUNK_ELEMENTS = 1 << 21


def weight_chunks(
    keys: np.ndarray, coeffs: np.ndarray, w: int
) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield ``(error_keys, error_coeffs)`` for all weight-``w`` errors.

    Parameters
    ----------
    keys : (n, 3) int64 array
        Key of X, Y, Z on each qubit.
    coeffs : (3,) float array
        Coefficient of X, Y, Z.  Paulis with a zero coefficient are skipped.
    w : int
        Error weight.

    The chunking depends only on ``(n, w)`` and the nonzero coefficient
    pattern, so the enumeration order is deterministic.
    """
    n = keys.shape[0]
    allowed = [a for a in range(3) if coeffs[a] != 0.0]
    if w == 0:
        yield np.zeros(1, dtype=np.int64), np.ones(1)
        return
    if w > n or not allowed:
        return
    assign = np.array(list(itertools.product(allowed, repeat=w)), dtype=np.int64)
    a_coeff = np.prod(coeffs[assign], axis=1)
    per_chunk = max(1, CHUNK_ELEMENTS // len(assign))
    combos = itertools.combinations(range(n), w)
    remaining = comb(n, w)
    while remaining > 0:
        take = min(per_chunk, remaining)
        remaining -= take
        supp = np.fromiter(
            itertools.chain.from_iterable(itertools.islice(combos, take)),
            dtype=np.int64,
            count=take * w,
        ).reshape(take, w)
        acc = np.zeros((take, len(assign)), dtype=np.int64)
        for t in range(w):
            acc ^= keys[supp[:, t][:, None], assign[:, t][None, :]]
        yield acc.ravel(), np.broadcast_to(a_coeff, acc.shape).ravel()


def weight_resolved_sparse(
    keys: np.ndarray, coeffs: np.ndarray, w_max: int
) -> tuple[np.ndarray, np.ndarray]:
    """Sum coefficients per key, resolved by weight ``0..w_max``.

    Returns ``(unique_keys, table)`` where ``table[u, w]`` is the sum over
    weight-``w`` errors with key ``unique_keys[u]`` of the product of
    per-Pauli coefficients.
    """
    per_weight = []
    for w in range(w_max + 1):
        parts_k, parts_v = [], []
        for ks, vs in weight_chunks(keys, coeffs, w):
            uk, inv = np.unique(ks, return_inverse=True)
            parts_k.append(uk)
            parts_v.append(np.bincount(inv, weights=vs, minlength=len(uk)))
        if parts_k:
            ks = np.concatenate(parts_k)
            vs = np.concatenate(parts_v)
            uk, inv = np.unique(ks, return_inverse=True)
            per_weight.append((uk, np.bincount(inv, weights=vs, minlength=len(uk))))
        else:
            per_weight.append((np.zeros(0, dtype=np.int64), np.zeros(0)))
    all_keys = np.unique(np.concatenate([pk for pk, _ in per_weight]))
    table = np.zeros((len(all_keys), w_max + 1))
    for w, (pk, pv) in enumerate(per_weight):
        table[np.searchsorted(all_keys, pk), w] = pv
    return all_keys, table


def weight_resolved_dense(keys: np.ndarray, coeffs: np.ndarray, w_max: int, n_bits: int) -> np.ndarray:
    """Dynamic programme over qubits on the full key space.

    Returns ``table[w, key]`` with the same meaning as
    :func:`weight_resolved_sparse`.  Every update adds nonnegative terms, so
    tiny probabilities keep full relative precision.
    """
    size = 1 << n_bits
    idx = np.arange(size, dtype=np.int64)
    table = np.zeros((w_max + 1, size))
    table[0, 0] = 1.0
    for q in range(keys.shape[0]):
        new = table.copy()
        for a in range(3):
            if coeffs[a] == 0.0:
                continue
            shifted = table[:-1][:, idx ^ keys[q, a]]
            new[1:] += coeffs[a] * shifted
        table = new
    return table
