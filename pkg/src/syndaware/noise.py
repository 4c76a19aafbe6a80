"""I.i.d. Pauli noise, truncated power series in eta, and syndrome tables.

A syndrome table records, for every syndrome ``s`` reached by the noise,
the probability mass of each logical class (label index, see
:mod:`syndaware.codes`).  Three back-ends build tables:

* :func:`enumerate_exact` -- every Pauli error, no excluded mass;
* :func:`enumerate_truncated` -- errors of weight ``<= w_cut`` with the
  excluded mass reported;
* :func:`enumerate_leading` -- class masses as polynomials in eta, exact
  through order ``w_max``.

All three share one engine.  For each key (syndrome plus label) it computes
``A_w``, the sum over weight-``w`` errors of the product of per-Pauli rates
``a_P`` (with ``p_P = a_P * eta``).  A class mass is then
``sum_w A_w eta**w p_I**(n - w)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import comb

import numpy as np

from . import _enum
from .codes import StabilizerCode, anticommute_matrix, label_pauli

MAX_DENSE_BITS = 18
MAX_EXACT_BITS = 18
DEFAULT_TRUNCATION = 2


class EnumerationError(ValueError):
    """Raised when a back-end cannot handle the requested code size."""


# ---------------------------------------------------------------------------
# noise models


@dataclass(frozen=True)
class NoiseModel:
    """Uniform single-qubit Pauli channel ``p_P = rates[P] * eta``.

    ``rates`` holds the X, Y and Z coefficients.  Writing every model in this
    form lets the leading-order back-end expand in the physical error rate.
    """

    eta: float
    rates: tuple[float, float, float]
    name: str = "pauli"

    def __post_init__(self):
        if any(r < 0 for r in self.rates):
            raise ValueError("rates must be nonnegative")
        if self.eta < 0:
            raise ValueError("eta must be nonnegative")
        if self.p_identity < -1e-15:
            raise ValueError(f"probabilities exceed one (p_I = {self.p_identity})")

    @property
    def p_identity(self) -> float:
        return 1.0 - self.eta * sum(self.rates)

    @property
    def probs(self) -> tuple[float, float, float, float]:
        return (self.p_identity,) + tuple(r * self.eta for r in self.rates)

    def with_eta(self, eta: float) -> NoiseModel:
        if self.name == "depolarizing":
            return depolarizing(eta)
        return NoiseModel(eta, self.rates, self.name)

    def bitflip_marginal(self) -> NoiseModel:
        """Distribution of the X component only (X or Y flips the bit)."""
        return NoiseModel(self.eta, (self.rates[0] + self.rates[1], 0.0, 0.0), f"{self.name}-xmarginal")

    def describe(self) -> str:
        return f"{self.name}(eta={self.eta!r})"


def depolarizing(eta: float) -> NoiseModel:
    if not 0.0 <= eta <= 0.75:
        raise ValueError("depolarizing eta must lie in [0, 3/4]")
    return NoiseModel(eta, (1 / 3, 1 / 3, 1 / 3), "depolarizing")


def bitflip(eta: float) -> NoiseModel:
    if not 0.0 <= eta <= 1.0:
        raise ValueError("bitflip eta must lie in [0, 1]")
    return NoiseModel(eta, (1.0, 0.0, 0.0), "bitflip")


def pauli_channel(px: float, py: float, pz: float) -> NoiseModel:
    eta = px + py + pz
    if eta == 0:
        return NoiseModel(0.0, (1.0, 0.0, 0.0), "pauli")
    return NoiseModel(eta, (px / eta, py / eta, pz / eta), "pauli")


def noise_from_name(name: str, eta: float) -> NoiseModel:
    name = name.lower()
    if name in ("depolarizing", "depol", "dep"):
        return depolarizing(eta)
    if name in ("bitflip", "bit-flip", "x"):
        return bitflip(eta)
    raise ValueError(f"unknown noise model {name!r}")


# ---------------------------------------------------------------------------
# truncated power series


@dataclass(frozen=True)
class EtaSeries:
    """``sum_j coeffs[j] eta**(order + j) + O(eta**(prec + 1))``.

    ``prec`` is the highest order known exactly.  The zero series has
    ``coeffs == ()`` and ``order == prec + 1``.  Normalisation strips
    leading zeros and truncates to ``order + truncation`` terms.
    """

    order: int
    coeffs: tuple[float, ...]
    prec: int

    @classmethod
    def make(cls, order: int, coeffs, prec: int | None = None, truncation: int = DEFAULT_TRUNCATION) -> EtaSeries:
        coeffs = [float(c) for c in coeffs]
        if prec is None:
            prec = order + len(coeffs) - 1
        coeffs = coeffs[: max(0, prec - order + 1)]
        while coeffs and coeffs[0] == 0.0:
            coeffs.pop(0)
            order += 1
        if not coeffs:
            return cls(prec + 1, (), prec)
        prec = min(prec, order + truncation)
        return cls(order, tuple(coeffs[: prec - order + 1]), prec)

    @classmethod
    def from_poly(cls, poly, truncation: int = DEFAULT_TRUNCATION) -> EtaSeries:
        """Series from coefficients of ``eta**0 .. eta**W`` (exact through W)."""
        poly = list(poly)
        return cls.make(0, poly, len(poly) - 1, truncation)

    @classmethod
    def constant(cls, c: float, prec: int = DEFAULT_TRUNCATION) -> EtaSeries:
        return cls.make(0, [c] + [0.0] * prec, prec, truncation=prec)

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> float:
        return self.coeffs[0] if self.coeffs else 0.0

    def coefficient(self, j: int) -> float:
        if j > self.prec:
            raise ValueError(f"order {j} beyond known precision {self.prec}")
        if j < self.order:
            return 0.0
        return self.coeffs[j - self.order]

    def _dense(self, upto: int) -> np.ndarray:
        out = np.zeros(upto + 1)
        for j, c in enumerate(self.coeffs):
            if self.order + j <= upto:
                out[self.order + j] = c
        return out

    def __add__(self, other: EtaSeries) -> EtaSeries:
        if isinstance(other, (int, float)):
            other = EtaSeries.constant(float(other), self.prec)
        prec = min(self.prec, other.prec)
        trunc = max(len(self.coeffs), len(other.coeffs), 1) - 1
        return EtaSeries.make(0, self._dense(prec) + other._dense(prec), prec, truncation=max(trunc, DEFAULT_TRUNCATION))

    __radd__ = __add__

    def __neg__(self) -> EtaSeries:
        return EtaSeries(self.order, tuple(-c for c in self.coeffs), self.prec)

    def __sub__(self, other: EtaSeries) -> EtaSeries:
        return self + (-other)

    def __mul__(self, other) -> EtaSeries:
        if isinstance(other, (int, float)):
            if other == 0:
                return EtaSeries(self.prec + 1, (), self.prec)
            return EtaSeries(self.order, tuple(c * other for c in self.coeffs), self.prec)
        if self.is_zero() or other.is_zero():
            prec = min(self.prec + max(other.order, 0), other.prec + max(self.order, 0))
            return EtaSeries(prec + 1, (), prec)
        prec = min(self.order + other.prec, other.order + self.prec)
        prod = np.convolve(np.array(self.coeffs), np.array(other.coeffs))
        order = self.order + other.order
        trunc = max(len(self.coeffs), len(other.coeffs)) - 1
        return EtaSeries.make(order, prod, prec, truncation=trunc)

    __rmul__ = __mul__

    def __call__(self, eta: float) -> float:
        return float(sum(c * eta ** (self.order + j) for j, c in enumerate(self.coeffs)))

    def compare(self, other: EtaSeries, rtol: float = 1e-12) -> int:
        """Sign of ``self - other`` as eta -> 0+ (0 if equal to known precision)."""
        prec = min(self.prec, other.prec)
        a, b = self._dense(prec), other._dense(prec)
        scale = max(np.max(np.abs(a), initial=0.0), np.max(np.abs(b), initial=0.0), 1e-300)
        for x, y in zip(a, b):
            if abs(x - y) > rtol * scale:
                return 1 if x > y else -1
        return 0

    def __str__(self) -> str:
        if self.is_zero():
            return f"O(eta^{self.prec + 1})"
        terms = " + ".join(f"{c:.6g} eta^{self.order + j}" for j, c in enumerate(self.coeffs))
        return f"{terms} + O(eta^{self.prec + 1})"


def poly_leading(poly: np.ndarray, rtol: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Leading order and coefficient along the last axis of polynomial arrays.

    Returns ``(order, coeff)``; an identically zero polynomial gets order
    ``W + 1`` and coefficient 0.
    """
    poly = np.asarray(poly)
    nz = np.abs(poly) > rtol * np.max(np.abs(poly), axis=-1, keepdims=True, initial=0.0)
    nz &= poly != 0
    w1 = poly.shape[-1]
    order = np.where(nz.any(axis=-1), np.argmax(nz, axis=-1), w1)
    coeff = np.take_along_axis(
        np.concatenate([poly, np.zeros(poly.shape[:-1] + (1,))], axis=-1), order[..., None], axis=-1
    )[..., 0]
    return order, coeff


# ---------------------------------------------------------------------------
# syndrome tables


@dataclass
class SyndromeTable:
    """Joint distribution of syndromes and logical classes.

    ``masses[r, c]`` is the probability that syndrome ``syndromes[r]``
    occurs together with logical class ``c``.  For leading-order tables the
    entries carry an extra trailing axis of polynomial coefficients in eta
    (orders ``0 .. precision``).
    """

    code_name: str
    n: int
    m: int
    k: int
    noise: NoiseModel
    backend: str
    syndromes: np.ndarray
    masses: np.ndarray
    excluded_mass: float = 0.0
    w_cut: int | None = None
    z_only: bool = False
    d: int | None = None
    _index: dict = field(default=None, init=False, repr=False, compare=False)

    @property
    def series(self) -> bool:
        return self.masses.ndim == 3

    @property
    def precision(self) -> int | None:
        return self.masses.shape[2] - 1 if self.series else None

    @property
    def num_classes(self) -> int:
        return 4**self.k

    @property
    def p(self) -> np.ndarray:
        """Per-syndrome probabilities (or polynomial coefficients)."""
        return self.masses.sum(axis=1)

    def index_of(self, s: int) -> int:
        if self._index is None:
            self._index = {int(v): r for r, v in enumerate(self.syndromes)}
        try:
            return self._index[int(s)]
        except KeyError:
            raise KeyError(f"syndrome {s} not present in table") from None

    def row(self, s: int) -> np.ndarray:
        return self.masses[self.index_of(s)]

    def class_mass(self, s: int) -> dict[str, float]:
        """Readable map from class label string to mass (numeric tables)."""
        row = self.row(s)
        return {str(label_pauli(c, self.k)): float(row[c]) for c in range(self.num_classes) if np.any(row[c] != 0)}

    def mass_series(self, r: int, c: int, truncation: int = DEFAULT_TRUNCATION) -> EtaSeries:
        return EtaSeries.from_poly(self.masses[r, c], truncation)

    def p_series(self, r: int, truncation: int = DEFAULT_TRUNCATION) -> EtaSeries:
        return EtaSeries.from_poly(self.masses[r].sum(axis=0), truncation)

    def with_masses(self, masses: np.ndarray, syndromes: np.ndarray | None = None, **changes) -> SyndromeTable:
        kw = dict(
            code_name=self.code_name, n=self.n, m=self.m, k=self.k, noise=self.noise,
            backend=self.backend, syndromes=self.syndromes if syndromes is None else syndromes,
            masses=masses, excluded_mass=self.excluded_mass, w_cut=self.w_cut,
            z_only=self.z_only, d=self.d,
        )
        kw.update(changes)
        return SyndromeTable(**kw)

    def evaluate(self, eta: float) -> SyndromeTable:
        """Numeric table from a leading-order table (truncated polynomial)."""
        if not self.series:
            raise ValueError("table is already numeric")
        powers = eta ** np.arange(self.masses.shape[2])
        masses = np.zeros(self.masses.shape[:2])
        for j in range(self.masses.shape[2]):
            masses += self.masses[:, :, j] * powers[j]
        noise = self.noise.with_eta(eta)
        return self.with_masses(masses, noise=noise, backend="leading-eval",
                                excluded_mass=max(0.0, 1.0 - float(masses.sum())))

    def total_mass(self) -> float:
        return float(self.masses.sum())

    # -- serialisation ------------------------------------------------------

    def to_json(self) -> str:
        return json.dumps(
            {
                "code": self.code_name, "n": self.n, "m": self.m, "k": self.k, "d": self.d,
                "noise": {"name": self.noise.name, "eta": self.noise.eta, "rates": list(self.noise.rates)},
                "backend": self.backend, "w_cut": self.w_cut, "z_only": self.z_only,
                "excluded_mass": self.excluded_mass,
                "syndromes": [int(s) for s in self.syndromes],
                "masses": self.masses.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> SyndromeTable:
        obj = json.loads(text)
        nz = obj["noise"]
        return cls(
            obj["code"], obj["n"], obj["m"], obj["k"],
            NoiseModel(nz["eta"], tuple(nz["rates"]), nz["name"]),
            obj["backend"], np.array(obj["syndromes"], dtype=np.int64),
            np.array(obj["masses"], dtype=float), obj["excluded_mass"], obj["w_cut"],
            obj["z_only"], obj["d"],
        )


# ---------------------------------------------------------------------------
# enumeration engine


def _setup(code: StabilizerCode, noise: NoiseModel, z_only: bool):
    if z_only:
        subset = code.z_type_generators()
        if not subset:
            raise EnumerationError(f"{code.name} has no Z-type generators")
        keys = code.pauli_keys(subset)
        noise = noise.bitflip_marginal()
        m = len(subset)
    else:
        keys = code.pauli_keys()
        m = code.m
    return keys, np.array(noise.rates, dtype=float), m, noise


def _weight_resolved(code, keys, rates, w_max, m):
    """``(syndromes, A)`` with ``A[r, c, w]`` the weight-resolved coefficients."""
    n_bits = m + 2 * code.k
    if n_bits <= MAX_DENSE_BITS:
        dense = _enum.weight_resolved_dense(keys, rates, w_max, n_bits)
        ukeys = np.nonzero(np.any(dense != 0, axis=0))[0].astype(np.int64)
        table = dense[:, ukeys].T
    else:
        ukeys, table = _enum.weight_resolved_sparse(keys, rates, w_max)
    s = ukeys & ((1 << m) - 1)
    c = ukeys >> m
    syndromes, rows = np.unique(s, return_inverse=True)
    coeffs = np.zeros((len(syndromes), 4**code.k, w_max + 1))
    coeffs[rows, c] = table
    return syndromes, coeffs


def _numeric_masses(coeffs: np.ndarray, n: int, eta: float, p_id: float) -> np.ndarray:
    masses = np.zeros(coeffs.shape[:2])
    for w in range(coeffs.shape[2]):
        masses += coeffs[:, :, w] * (eta**w * p_id ** (n - w))
    return masses


def _make_table(code, noise_in, backend, syndromes, masses, excluded, w_cut, z_only, m):
    return SyndromeTable(
        code.name, code.n, m, code.k, noise_in, backend, syndromes, masses,
        excluded, w_cut, z_only, code.d,
    )


def enumerate_exact(code: StabilizerCode, noise: NoiseModel, z_only: bool = False) -> SyndromeTable:
    """Exact syndrome table over all ``4**n`` Pauli errors.

    Errors are aggregated by a dynamic programme over qubits on the packed
    key space, which is exactly equivalent to visiting all ``4**n`` errors.
    """
    m = len(code.z_type_generators()) if z_only else code.m
    if m + 2 * code.k > MAX_EXACT_BITS:
        raise EnumerationError(
            f"{code.name}: key space 2^{m + 2 * code.k} too large for exact enumeration; "
            "use the truncated back-end"
        )
    return _truncated(code, noise, code.n, z_only, backend="exact")


def enumerate_truncated(code: StabilizerCode, noise: NoiseModel, w_cut: int, z_only: bool = False) -> SyndromeTable:
    """Errors of weight ``<= w_cut``; the remaining probability is ``excluded_mass``."""
    if not 0 <= w_cut <= code.n:
        raise ValueError(f"w_cut must lie in [0, n={code.n}]")
    return _truncated(code, noise, w_cut, z_only, backend="truncated")


def _truncated(code, noise, w_cut, z_only, backend):
    keys, rates, m, eff = _setup(code, noise, z_only)
    syndromes, coeffs = _weight_resolved(code, keys, rates, w_cut, m)
    p_id = eff.p_identity
    masses = _numeric_masses(coeffs, code.n, eff.eta, p_id)
    alpha_eta = eff.eta * float(rates.sum())
    excluded = 0.0
    for w in range(w_cut + 1, code.n + 1):
        excluded += comb(code.n, w) * alpha_eta**w * p_id ** (code.n - w)
    keep = np.any(masses != 0, axis=1)
    return _make_table(code, noise, backend, syndromes[keep], masses[keep], excluded,
                       None if backend == "exact" else w_cut, z_only, m)


def enumerate_leading(
    code: StabilizerCode, noise: NoiseModel, w_max: int | None = None, z_only: bool = False
) -> SyndromeTable:
    """Class masses as polynomials in eta, exact through order ``w_max``.

    The eta value stored in ``noise`` is ignored; only its rates matter.
    ``masses[r, c, j]`` is the coefficient of ``eta**j``.
    """
    if w_max is None:
        w_max = (code.d + 1) // 2
    keys, rates, m, _ = _setup(code, noise, z_only)
    syndromes, coeffs = _weight_resolved(code, keys, rates, w_max, m)
    alpha = float(rates.sum())
    expand = np.zeros((w_max + 1, w_max + 1))
    for w in range(w_max + 1):
        for j in range(w, w_max + 1):
            expand[w, j] = comb(code.n - w, j - w) * (-alpha) ** (j - w)
    poly = coeffs @ expand
    return _make_table(code, noise, "leading", syndromes, poly, 0.0, w_max, z_only, m)


# ---------------------------------------------------------------------------
# dense oracle


def _dense_pauli(p) -> np.ndarray:
    return p.to_matrix()


def syndrome_sector_oracle(
    code: StabilizerCode, noise: NoiseModel, seed: int = 0, tol: float = 1e-9
) -> dict:
    """Compare an exact table with a dense density-matrix computation.

    Encodes a random logical pure state, applies the noise qubit by qubit as
    an explicit Kraus sum, projects onto each syndrome sector, applies the
    canonical recovery and reads off the logical Bloch vector.  Returns the
    largest deviations of sector weights and of Bloch contractions.
    """
    from .codes import canonical_recovery, label_pauli as _lp
    from .pauli import PauliOp

    n, k, m = code.n, code.k, code.m
    if n > 7:
        raise EnumerationError("dense oracle limited to n <= 7")
    dim = 2**n
    eye = np.eye(dim, dtype=complex)
    gens = [_dense_pauli(g) for g in code.generators]
    proj = eye.copy()
    for g in gens:
        proj = proj @ (eye + g) / 2
    lx = [_dense_pauli(p) for p in code.logical_x]
    lz = [_dense_pauli(p) for p in code.logical_z]
    zero = proj.copy()
    for z in lz:
        zero = zero @ (eye + z) / 2
    col = np.argmax(np.linalg.norm(zero, axis=0))
    v0 = zero[:, col] / np.linalg.norm(zero[:, col])
    basis = []
    for b in range(2**k):
        v = v0.copy()
        for i in range(k):
            if (b >> (k - 1 - i)) & 1:
                v = lx[i] @ v
        basis.append(v)
    enc = np.array(basis).T
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=2**k) + 1j * rng.normal(size=2**k)
    psi /= np.linalg.norm(psi)
    rho = enc @ np.outer(psi, psi.conj()) @ enc.conj().T

    single = {
        "I": np.eye(2, dtype=complex), "X": np.array([[0, 1], [1, 0]], dtype=complex),
        "Y": np.array([[0, -1j], [1j, 0]]), "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    }
    probs = noise.probs
    for q in range(n):
        out = np.zeros_like(rho)
        for pr, ch in zip(probs, "IXYZ"):
            if pr == 0:
                continue
            op = np.kron(np.kron(np.eye(2**q), single[ch]), np.eye(2 ** (n - q - 1)))
            out += pr * op @ rho @ op.conj().T
        rho = out

    def logical_op(j: int) -> np.ndarray:
        lab = _lp(j, k)
        op = np.eye(dim, dtype=complex)
        for i in range(k):
            bx, bz = (lab.x >> i) & 1, (lab.z >> i) & 1
            if bx and bz:
                op = op @ (1j * lx[i] @ lz[i])
            elif bx:
                op = op @ lx[i]
            elif bz:
                op = op @ lz[i]
        return op

    lops = [logical_op(j) for j in range(1, 4**k)]
    theta = np.array([np.real(np.vdot(enc @ psi, op @ (enc @ psi))) for op in lops])
    table = enumerate_exact(code, noise)
    anti = anticommute_matrix(k)[1:, :]
    max_w = max_c = 0.0
    for s in range(2**m):
        ps = eye.copy()
        for a, g in enumerate(gens):
            sign = -1.0 if (s >> a) & 1 else 1.0
            ps = ps @ (eye + sign * g) / 2
        weight = float(np.real(np.trace(ps @ rho)))
        try:
            row = table.row(s)
            p_s = float(row.sum())
        except KeyError:
            row, p_s = None, 0.0
        max_w = max(max_w, abs(weight - p_s))
        if p_s <= 1e-300 or row is None:
            continue
        r = _dense_pauli(canonical_recovery(code, s))
        rs = r @ ps @ rho @ ps @ r.conj().T / weight
        got = np.array([np.real(np.trace(rs @ op)) for op in lops])
        lam = (row[None, :] * np.where(anti, -1.0, 1.0)).sum(axis=1) / p_s
        max_c = max(max_c, float(np.max(np.abs(got - lam * theta))))
    return {"max_weight_error": max_w, "max_contraction_error": max_c,
            "ok": max_w <= tol and max_c <= tol}
