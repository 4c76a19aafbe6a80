"""Classical Fisher information of syndrome-aware and agnostic estimation.

For a binary outcome with mean ``(1 - 2 eps) theta`` the Fisher information
about ``theta`` is ``f(theta, eps)``.  Effective error rates are obtained by
inverting ``f`` at fixed ``theta``.  Small error rates are handled through
the information *deficit* ``f(theta, 0) - f(theta, eps)``, which avoids the
cancellation that the closed-form inverse suffers below ``eps ~ 1e-8``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import (
    Classification,
    anticommuting_mass,
    average_error_rate,
    error_rates,
)
from .noise import SyndromeTable

TOL = 1e-12


def _check_theta(theta: float) -> None:
    if not -1.0 <= theta <= 1.0:
        raise ValueError(f"theta={theta} outside [-1, 1]")


def f(theta: float, eps):
    """Fisher information ``(1-2e)^2 / (1 - (1-2e)^2 theta^2)``."""
    _check_theta(theta)
    lam2 = (1.0 - 2.0 * np.asarray(eps, dtype=float)) ** 2
    den = 1.0 - lam2 * theta * theta
    if np.any(den <= 0):
        raise ValueError("infinite information: |theta| = 1 with eps = 0")
    out = lam2 / den
    return float(out) if np.ndim(out) == 0 else out


def f_max(theta: float) -> float:
    """``f(theta, 0) = 1 / (1 - theta^2)``."""
    return f(theta, 0.0)


def f_prime0(theta: float) -> float:
    """Derivative of ``f`` in ``eps`` at ``eps = 0``: ``-4 / (1 - theta^2)^2``."""
    _check_theta(theta)
    return -4.0 / (1.0 - theta * theta) ** 2


def f_deficit(theta: float, eps):
    """``f(theta, 0) - f(theta, eps)`` without cancellation."""
    _check_theta(theta)
    e = np.asarray(eps, dtype=float)
    lam2 = (1.0 - 2.0 * e) ** 2
    t2 = theta * theta
    out = 4.0 * e * (1.0 - e) / ((1.0 - t2) * (1.0 - lam2 * t2))
    return float(out) if np.ndim(out) == 0 else out


def f_inv(theta: float, F: float) -> float:
    """Error rate ``eps in [0, 1/2]`` with ``f(theta, eps) = F``."""
    fm = f_max(theta)
    if F < -TOL * fm or F > fm * (1 + TOL):
        raise ValueError(f"F={F} outside [0, {fm}]")
    return f_inv_deficit(theta, fm - min(max(F, 0.0), fm))


def f_inv_deficit(theta: float, D: float) -> float:
    """Inverse of ``f`` given the deficit ``D = f(theta, 0) - F``.

    Uses ``eps = (1 - r) / 2`` with ``r = sqrt(F / (1 + F theta^2))``,
    rewritten as ``(1 - r^2) / (2 (1 + r))`` and
    ``1 - r^2 = D (1 - theta^2) / (1 + F theta^2)``.
    """
    fm = f_max(theta)
    D = min(max(D, 0.0), fm)
    F = fm - D
    t2 = theta * theta
    r = np.sqrt(F / (1.0 + F * t2))
    one_minus_r2 = D * (1.0 - t2) / (1.0 + F * t2)
    return float(min(0.5, one_minus_r2 / (2.0 * (1.0 + r))))


# ---------------------------------------------------------------------------
# tables


def fisher_synd(table: SyndromeTable, i: int, theta: float) -> float:
    """``F^Synd = sum_s p_s f(theta, eps_{i,s})`` over enumerated syndromes."""
    return float(np.dot(table.p, f(theta, error_rates(table, i))))


def fisher_deficit(table: SyndromeTable, i: int, theta: float) -> float:
    """``sum_s p_s [f(theta,0) - f(theta,eps_{i,s})]`` over enumerated syndromes."""
    return float(np.dot(table.p, f_deficit(theta, error_rates(table, i))))


def eps_csynd_bounds(table: SyndromeTable, i: int, theta: float) -> tuple[float, float]:
    """Range of ``eps^cSynd`` over all placements of the excluded mass.

    The row deficit ``G(p, a) = p * f_deficit(theta, a / p)`` is concave and
    homogeneous of degree one, hence superadditive: unenumerated mass can
    only raise the total deficit, which gives the lower end.  Its gradient
    is bounded by ``|f'(theta, 0)|`` in the directions that add mass, so the
    deficit grows by at most ``excluded_mass * |f'(theta, 0)|``, which gives
    the upper end.  Both hold whether the excluded errors land on enumerated
    syndromes or on new ones.
    """
    D = fisher_deficit(table, i, theta)
    lo = f_inv_deficit(theta, D)
    hi = f_inv_deficit(theta, D + table.excluded_mass * -f_prime0(theta))
    return lo, hi


def eps_csynd(table: SyndromeTable, i: int, theta: float) -> float:
    """Effective error rate of classical syndrome-aware estimation.

    Exact tables give a point value; for truncated tables the midpoint of
    :func:`eps_csynd_bounds` is returned.
    """
    lo, hi = eps_csynd_bounds(table, i, theta)
    return lo if lo == hi else 0.5 * (lo + hi)


def eps_agnostic_bounds(table: SyndromeTable, i: int) -> tuple[float, float]:
    e = float(anticommuting_mass(table, i).sum())
    return e, min(0.5, e + table.excluded_mass)


@dataclass
class Theorem1Result:
    ok: bool
    lower_ok: bool
    upper_ok: bool
    lower_margin: float
    upper_margin: float


def theorem1_check(eps_i: float, eps_c: float, theta: float, tol: float = TOL) -> Theorem1Result:
    """``(1-theta^2)/2 eps_i <= eps^cSynd <= eps_i`` with additive tolerance."""
    lower = (1.0 - theta * theta) / 2.0 * eps_i
    lo_m = eps_c - lower
    up_m = eps_i - eps_c
    lo_ok = lo_m >= -tol
    up_ok = up_m >= -tol
    return Theorem1Result(lo_ok and up_ok, lo_ok, up_ok, lo_m, up_m)


def sampling_overhead(F: float, sigma: float) -> float:
    """Samples needed for standard deviation ``sigma``: ``1 / (sigma^2 F)``."""
    if F <= 0:
        raise ValueError("zero Fisher information: no finite sample count")
    return 1.0 / (sigma * sigma * F)


@dataclass
class Corollary2Result:
    ok: bool
    n_csynd: float
    n_agnostic: float
    lower: float


def corollary2_check(F_synd: float, F_L: float, sigma: float, theta: float, rtol: float = 1e-12) -> Corollary2Result:
    """``(1-theta^2)/sigma sqrt(N^L + theta^2/sigma^2) <= N^cSynd <= N^L``."""
    n_c = sampling_overhead(F_synd, sigma)
    n_l = sampling_overhead(F_L, sigma)
    lower = (1.0 - theta * theta) / sigma * np.sqrt(n_l + theta * theta / sigma**2)
    ok = lower <= n_c * (1 + rtol) and n_c <= n_l * (1 + rtol)
    return Corollary2Result(bool(ok), n_c, n_l, float(lower))


# ---------------------------------------------------------------------------
# low-error limits


def _limit_term(theta: float, eps) -> np.ndarray:
    """``(f(theta, eps) - f(theta, 0)) / f'(theta, 0)``."""
    return np.asarray(f_deficit(theta, eps)) / -f_prime0(theta)


def limit_ratio_classical(cls: Classification, theta: float = 0.0) -> float:
    """``lim_{eta->0} eps^cSynd / eps_i`` from a syndrome classification."""
    den = cls.denominator()
    num = float(np.dot(cls.s1_coeff, _limit_term(theta, cls.s1_eps))) + cls.minority_total()
    return num / den


# ---------------------------------------------------------------------------
# reports


@dataclass
class RatioRow:
    code: str
    eta: float
    theta: float
    eps: float
    eps_csynd: float
    limit: float | None = None
    eps_interval: tuple[float, float] | None = None
    csynd_interval: tuple[float, float] | None = None

    @property
    def ratio(self) -> float:
        return self.eps_csynd / self.eps if self.eps > 0 else float("nan")

    @property
    def lower(self) -> float:
        return (1.0 - self.theta**2) / 2.0

    @property
    def upper(self) -> float:
        return 1.0

    def as_dict(self) -> dict:
        d = {
            "code": self.code, "eta": self.eta, "theta": self.theta, "eps": self.eps,
            "eps_csynd": self.eps_csynd, "ratio": self.ratio, "lower": self.lower,
            "upper": self.upper, "limit": self.limit,
        }
        if self.eps_interval is not None:
            d["eps_interval"] = list(self.eps_interval)
            d["eps_csynd_interval"] = list(self.csynd_interval)
        return d


RATIO_COLUMNS = ["code", "eta", "theta", "eps", "eps_csynd", "ratio", "lower", "upper", "limit"]


@dataclass
class RatioReport:
    code: str
    noise: str
    rows: list[RatioRow] = field(default_factory=list)

    def bounds_ok(self, tol: float = TOL) -> bool:
        return all(theorem1_check(r.eps, r.eps_csynd, r.theta, tol).ok for r in self.rows)


def ratio_row(table: SyndromeTable, i: int, theta: float, limit: float | None = None) -> RatioRow:
    """Row for one ML-normalised numeric table."""
    eps = average_error_rate(table, i)
    if table.excluded_mass > 0:
        e_lo, e_hi = eps_agnostic_bounds(table, i)
        c_lo, c_hi = eps_csynd_bounds(table, i, theta)
        return RatioRow(table.code_name, table.noise.eta, theta, 0.5 * (e_lo + e_hi),
                        0.5 * (c_lo + c_hi), limit, (e_lo, e_hi), (c_lo, c_hi))
    return RatioRow(table.code_name, table.noise.eta, theta, eps, eps_csynd(table, i, theta), limit)
