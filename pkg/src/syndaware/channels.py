"""Conditional logical channels derived from syndrome tables.

All functions accept numeric tables and, where it makes sense, leading-order
tables whose masses carry a trailing polynomial axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codes import anticommute_matrix
from .noise import EtaSeries, SyndromeTable, poly_leading

SERIES_RTOL = 1e-12


def _anti_row(k: int, i: int) -> np.ndarray:
    return anticommute_matrix(k)[i]


def sign_matrix(k: int) -> np.ndarray:
    """``S[j-1, c] = -1`` if label ``c`` anticommutes with ``P_j``, else ``+1``."""
    return np.where(anticommute_matrix(k)[1:, :], -1.0, 1.0)


def anticommuting_mass(table: SyndromeTable, i: int) -> np.ndarray:
    """Per-syndrome mass of classes anticommuting with target ``i``."""
    return table.masses[:, _anti_row(table.k, i)].sum(axis=1)


def commuting_mass(table: SyndromeTable, i: int) -> np.ndarray:
    return table.masses[:, ~_anti_row(table.k, i)].sum(axis=1)


def error_rates(table: SyndromeTable, i: int) -> np.ndarray:
    """``eps_{i,s}`` for every syndrome row of a numeric table."""
    if table.series:
        raise ValueError("conditional rates of a leading-order table are not polynomials")
    p = table.p
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(p > 0, anticommuting_mass(table, i) / np.where(p > 0, p, 1.0), 0.0)


def conditional_error_rate(table: SyndromeTable, s: int, i: int) -> float:
    r = table.index_of(s)
    p_s = float(table.masses[r].sum())
    if p_s <= 0:
        raise ValueError(f"syndrome {s} has zero probability")
    return float(table.masses[r, _anti_row(table.k, i)].sum()) / p_s


def flip_label(k: int, i: int) -> int:
    """Smallest label index anticommuting with target ``i``."""
    return int(np.nonzero(_anti_row(k, i))[0][0])


def _series_greater(a: np.ndarray, b: np.ndarray) -> bool:
    scale = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))), 1e-300)
    for x, y in zip(a, b):
        if abs(x - y) > SERIES_RTOL * scale:
            return bool(x > y)
    return False


def flip_mask(table: SyndromeTable, i: int) -> np.ndarray:
    """Rows whose anticommuting mass strictly exceeds the commuting mass."""
    anti = anticommuting_mass(table, i)
    comm = commuting_mass(table, i)
    if not table.series:
        return anti > comm
    return np.array([_series_greater(a, c) for a, c in zip(anti, comm)], dtype=bool)


def ml_normalize(table: SyndromeTable, i: int) -> SyndromeTable:
    """Degenerate maximum-likelihood normalisation with respect to target ``i``.

    Rows with ``eps_{i,s} > 1/2`` have every class label multiplied by the
    smallest anticommuting label; ties are left alone.
    """
    flips = flip_mask(table, i)
    if not flips.any():
        return table
    f = flip_label(table.k, i)
    perm = np.arange(table.num_classes) ^ f
    masses = table.masses.copy()
    masses[flips] = table.masses[flips][:, perm]
    return table.with_masses(masses)


def average_error_rate(table: SyndromeTable, i: int):
    """``eps_i = sum_s p_s eps_{i,s}``; an :class:`EtaSeries` for leading tables."""
    anti = anticommuting_mass(table, i)
    if table.series:
        return EtaSeries.from_poly(anti.sum(axis=0))
    return float(anti.sum())


def lambda_matrix(table: SyndromeTable) -> np.ndarray:
    """Contraction vectors ``lambda_s`` for all rows, shape ``(S, 4**k - 1)``."""
    if table.series:
        raise ValueError("use limit channels for leading-order tables")
    p = table.p
    signed = table.masses @ sign_matrix(table.k).T
    return signed / np.where(p > 0, p, 1.0)[:, None]


def lambda_vector(table: SyndromeTable, s: int) -> np.ndarray:
    r = table.index_of(s)
    row = table.masses[r]
    return sign_matrix(table.k) @ row / row.sum()


def lambda_from_distribution(dist: np.ndarray) -> np.ndarray:
    """Contraction vector of a Pauli channel given its class distribution."""
    k = int(round(np.log(len(dist)) / np.log(4)))
    return sign_matrix(k) @ np.asarray(dist, dtype=float)


def coarse_grain(table: SyndromeTable, grouping) -> SyndromeTable:
    """Merge syndromes into groups; ``grouping`` maps syndrome -> group id."""
    if callable(grouping):
        gid = np.array([grouping(int(s)) for s in table.syndromes], dtype=np.int64)
    else:
        gid = np.array([grouping[int(s)] for s in table.syndromes], dtype=np.int64)
    groups, inv = np.unique(gid, return_inverse=True)
    masses = np.zeros((len(groups),) + table.masses.shape[1:])
    np.add.at(masses, inv, table.masses)
    return table.with_masses(masses, syndromes=groups, backend=table.backend + "+grouped")


# ---------------------------------------------------------------------------
# low-error classification


@dataclass
class Classification:
    """Leading-order structure of an ML-normalised leading table.

    ``s1_*`` arrays describe syndromes with Theta(1) conditional error rate:
    the leading coefficient ``c_s`` of ``p_s``, the limit rate and the limit
    class distribution.  ``seta_minority`` holds, for syndromes with
    Theta(eta) conditional rate, the leading coefficient of ``p_s eps_{i,s}``.
    ``eps_coeff`` is the leading coefficient of ``eps_i`` at ``eps_order``.
    """

    d: int
    target: int
    k: int
    table: SyndromeTable
    s1_rows: np.ndarray
    s1_coeff: np.ndarray
    s1_eps: np.ndarray
    s1_dist: np.ndarray
    seta_rows: np.ndarray
    seta_minority: np.ndarray
    eps_order: int
    eps_coeff: float

    @property
    def odd(self) -> bool:
        return self.d % 2 == 1

    def s1_lambdas(self) -> np.ndarray:
        return self.s1_dist @ sign_matrix(self.k).T

    def minority_total(self) -> float:
        """Summed Theta(eta) minority coefficients (zero for even ``d``)."""
        return float(self.seta_minority.sum()) if self.odd else 0.0

    def denominator(self) -> float:
        """Leading coefficient of ``eps_i`` rebuilt from the dominant syndromes.

        Raises if it does not reproduce ``eps_coeff``, which signals a
        classification inconsistent with ``d``.
        """
        order = (self.d + 1) // 2
        if self.eps_order < order:
            raise ValueError(
                f"eps_i has order {self.eps_order} < {order}: classification inconsistent with d={self.d}"
            )
        den = float(np.dot(self.s1_coeff, self.s1_eps)) + self.minority_total()
        if den <= 0:
            if self.eps_order == order:
                raise ValueError("empty dominant syndrome sets while eps_i is nonzero at leading order")
            raise ValueError("eps_i vanishes at the leading order; the limit ratio is undefined")
        if abs(den - self.eps_coeff) > 1e-9 * abs(self.eps_coeff):
            raise ValueError(f"dominant syndromes carry {den} of the leading eps_i coefficient {self.eps_coeff}")
        return den


def classify_syndromes(table: SyndromeTable, i: int, d: int | None = None) -> Classification:
    """Split syndromes into Theta(1), Theta(eta) and negligible classes."""
    if not table.series:
        raise ValueError("classification needs a leading-order table")
    d = table.d if d is None else d
    need = (d + 1) // 2
    if table.precision < need:
        raise ValueError(f"w_max={table.precision} too small; need at least {need} for d={d}")
    tab = ml_normalize(table, i)
    anti = anticommuting_mass(tab, i)
    comm = commuting_mass(tab, i)
    p_ord, p_c = poly_leading(tab.p, SERIES_RTOL)
    a_ord, a_c = poly_leading(anti, SERIES_RTOL)
    c_ord, _ = poly_leading(comm, SERIES_RTOL)
    if d % 2 == 0:
        l1 = d // 2
        s1 = (p_ord == l1) & (a_ord == l1) & (c_ord == l1)
        seta = np.zeros_like(s1)
    else:
        l1 = (d + 1) // 2
        s1 = (p_ord == l1) & (a_ord == l1) & (c_ord == l1)
        seta = (p_ord == (d - 1) // 2) & (a_ord == l1)
    rows1 = np.nonzero(s1)[0]
    dist = tab.masses[rows1, :, l1] / p_c[rows1, None] if len(rows1) else np.zeros((0, tab.num_classes))
    eps1 = a_c[rows1] / p_c[rows1] if len(rows1) else np.zeros(0)
    rows_eta = np.nonzero(seta)[0]
    eps_ser = anti.sum(axis=0)
    e_ord, e_c = poly_leading(eps_ser, SERIES_RTOL)
    return Classification(
        d=d, target=i, k=tab.k, table=tab,
        s1_rows=rows1, s1_coeff=p_c[rows1], s1_eps=eps1, s1_dist=dist,
        seta_rows=rows_eta, seta_minority=a_c[rows_eta],
        eps_order=int(e_ord), eps_coeff=float(e_c),
    )
