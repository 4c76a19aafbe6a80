"""Stabilizer codes: syndromes, canonical recovery and logical classes.

Logical classes are labelled by phaseless k-qubit Paulis.  The integer
*label index* of a logical Pauli packs one base-4 digit per logical qubit
(I=0, X=1, Y=2, Z=3), first logical qubit most significant.  With this
encoding the product of two labels is the XOR of their indices, and the
nontrivial labels ``1 .. 4**k - 1`` double as generalized Bloch-vector
indices (``j - 1`` is the vector position).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

from . import _enum
from .pauli import PauliOp, commutes, prod

MAX_KEY_BITS = 62

_DIGIT_OF_BITS = {(0, 0): 0, (1, 0): 1, (1, 1): 2, (0, 1): 3}
_BITS_OF_DIGIT = {v: k for k, v in _DIGIT_OF_BITS.items()}


class CodeError(ValueError):
    """Raised when a code definition violates a stabilizer-code invariant."""


# ---------------------------------------------------------------------------
# logical labels


def label_index(p: PauliOp) -> int:
    """Label index of a k-qubit logical Pauli."""
    j = 0
    for q in range(p.n):
        j = (j << 2) | _DIGIT_OF_BITS[((p.x >> q) & 1, (p.z >> q) & 1)]
    return j


def label_pauli(j: int, k: int) -> PauliOp:
    """Inverse of :func:`label_index`."""
    if not 0 <= j < 4**k:
        raise ValueError(f"label index {j} out of range for k={k}")
    x = z = 0
    for q in range(k):
        bx, bz = _BITS_OF_DIGIT[(j >> (2 * (k - 1 - q))) & 3]
        x |= bx << q
        z |= bz << q
    return PauliOp(k, x, z)


def parse_target(target: str | int, k: int) -> int:
    """Resolve a target observable given as a label index or Pauli string.

    A string shorter than ``k`` is padded with identities, so ``"Z"`` means
    logical Z on the first logical qubit.
    """
    if isinstance(target, (int, np.integer)):
        j = int(target)
    else:
        s = str(target).strip().upper()
        if len(s) > k:
            raise ValueError(f"target {target!r} longer than k={k}")
        j = label_index(PauliOp.from_string(s + "I" * (k - len(s))))
    if not 1 <= j < 4**k:
        raise ValueError(f"target index {j} must be a nontrivial label for k={k}")
    return j


@lru_cache(maxsize=None)
def anticommute_matrix(k: int) -> np.ndarray:
    """Boolean matrix ``A[j, l]``: labels ``j`` and ``l`` anticommute."""
    size = 4**k
    digits = np.array([[(j >> (2 * (k - 1 - q))) & 3 for q in range(k)] for j in range(size)])
    a = digits[:, None, :]
    b = digits[None, :, :]
    per_qubit = (a != 0) & (b != 0) & (a != b)
    out = (per_qubit.sum(axis=2) % 2).astype(bool)
    out.setflags(write=False)
    return out


# ---------------------------------------------------------------------------
# GF(2) helpers


def _gf2_rank(mat: np.ndarray) -> int:
    a = mat.copy() % 2
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        piv = np.nonzero(a[r:, c])[0]
        if len(piv) == 0:
            continue
        p = r + piv[0]
        a[[r, p]] = a[[p, r]]
        others = np.nonzero(a[:, c])[0]
        others = others[others != r]
        a[others] ^= a[r]
        r += 1
        if r == rows:
            break
    return r


def _gf2_solve(mat: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Particular solution of ``mat @ x = rhs`` over GF(2) (free variables 0)."""
    a = np.concatenate([mat % 2, (rhs % 2)[:, None]], axis=1).astype(np.uint8)
    rows, cols = mat.shape
    pivots = []
    r = 0
    for c in range(cols):
        piv = np.nonzero(a[r:, c])[0]
        if len(piv) == 0:
            continue
        p = r + piv[0]
        a[[r, p]] = a[[p, r]]
        others = np.nonzero(a[:, c])[0]
        others = others[others != r]
        a[others] ^= a[r]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    if np.any(a[r:, -1]):
        raise CodeError("inconsistent GF(2) system")
    x = np.zeros(cols, dtype=np.uint8)
    for row, c in enumerate(pivots):
        x[c] = a[row, -1]
    return x


def _sym_row(p: PauliOp) -> np.ndarray:
    """Row ``r`` with ``r @ [v_x | v_z] = <p, v>`` (symplectic form)."""
    return np.concatenate([p.z_bits, p.x_bits])


def _bits_to_int(bits: np.ndarray) -> int:
    return int(sum(int(b) << q for q, b in enumerate(bits)))


# ---------------------------------------------------------------------------
# the code type


@dataclass(frozen=True)
class StabilizerCode:
    """An ``[[n, k, d]]`` stabilizer code with a fixed destabilizer tableau.

    ``distance_paulis`` lists the single-qubit Paulis over which the declared
    distance holds.  It is ``"XYZ"`` for genuine quantum codes and ``"X"``
    for bit-flip repetition codes, whose Z-type logicals have weight one.
    """

    name: str
    n: int
    k: int
    d: int
    generators: tuple[PauliOp, ...]
    logical_x: tuple[PauliOp, ...]
    logical_z: tuple[PauliOp, ...]
    distance_paulis: str = "XYZ"
    provenance: str = "built-in"
    destabilizers: tuple[PauliOp, ...] = field(init=False, repr=False)

    def __post_init__(self):
        self._validate_structure()
        object.__setattr__(self, "destabilizers", self._compute_destabilizers())

    # -- validation ---------------------------------------------------------

    def _validate_structure(self) -> None:
        n, k = self.n, self.k
        ops = list(self.generators) + list(self.logical_x) + list(self.logical_z)
        for p in ops:
            if p.n != n:
                raise CodeError(f"operator {p} has {p.n} qubits, expected {n}")
        if len(self.generators) != n - k:
            raise CodeError(f"expected {n - k} generators, got {len(self.generators)}")
        if len(self.logical_x) != k or len(self.logical_z) != k:
            raise CodeError("need exactly k logical X and k logical Z operators")
        if n + k > MAX_KEY_BITS:
            raise CodeError(f"n + k = {n + k} exceeds the packed-key limit {MAX_KEY_BITS}")
        gens = self.generators
        for a in range(len(gens)):
            for b in range(a + 1, len(gens)):
                if not commutes(gens[a], gens[b]):
                    raise CodeError(f"generators {a} ({gens[a]}) and {b} ({gens[b]}) anticommute")
        for name, group in (("logical_x", self.logical_x), ("logical_z", self.logical_z)):
            for i, lop in enumerate(group):
                for a, g in enumerate(gens):
                    if not commutes(lop, g):
                        raise CodeError(f"{name}[{i}] ({lop}) anticommutes with generator {a} ({g})")
        for i in range(k):
            for j in range(k):
                anti = not commutes(self.logical_x[i], self.logical_z[j])
                if anti != (i == j):
                    raise CodeError(f"logical_x[{i}] and logical_z[{j}] violate the pairing")
                if i < j:
                    if not commutes(self.logical_x[i], self.logical_x[j]):
                        raise CodeError(f"logical_x[{i}] and logical_x[{j}] anticommute")
                    if not commutes(self.logical_z[i], self.logical_z[j]):
                        raise CodeError(f"logical_z[{i}] and logical_z[{j}] anticommute")
        mat = np.array([np.concatenate([p.x_bits, p.z_bits]) for p in ops], dtype=np.uint8)
        if len(ops) and _gf2_rank(mat) != len(ops):
            raise CodeError("generators and logicals are not independent")

    def _compute_destabilizers(self) -> tuple[PauliOp, ...]:
        n, m = self.n, self.m
        if m == 0:
            return ()
        cons = list(self.generators) + list(self.logical_x) + list(self.logical_z)
        mat = np.array([_sym_row(c) for c in cons], dtype=np.uint8)
        out: list[PauliOp] = []
        for a in range(m):
            rhs = np.zeros(len(cons), dtype=np.uint8)
            rhs[a] = 1
            v = _gf2_solve(mat, rhs)
            d_a = PauliOp(n, _bits_to_int(v[:n]), _bits_to_int(v[n:]))
            for b, d_b in enumerate(out):
                if not commutes(d_a, d_b):
                    d_a = prod(d_a, self.generators[b])
            out.append(d_a)
        return tuple(out)

    # -- basic properties ---------------------------------------------------

    @property
    def m(self) -> int:
        return self.n - self.k

    def z_type_generators(self) -> list[int]:
        return [a for a, g in enumerate(self.generators) if g.x == 0]

    def x_type_generators(self) -> list[int]:
        return [a for a, g in enumerate(self.generators) if g.z == 0]

    def is_css(self) -> bool:
        return len(self.z_type_generators()) + len(self.x_type_generators()) == self.m

    # -- keys ---------------------------------------------------------------

    def pauli_keys(self, generator_subset: list[int] | None = None) -> np.ndarray:
        """Packed keys of single-qubit X, Y, Z errors, shape ``(n, 3)``.

        A key holds the syndrome (bit ``a`` for the ``a``-th selected
        generator) in its low bits and the logical label index shifted left
        by the number of selected generators.
        """
        sel = list(range(self.m)) if generator_subset is None else list(generator_subset)
        keys = np.zeros((self.n, 3), dtype=np.int64)
        for q in range(self.n):
            for a_idx, kind in enumerate("XYZ"):
                e = PauliOp.single(self.n, q, kind)
                s = 0
                for bit, a in enumerate(sel):
                    if not commutes(e, self.generators[a]):
                        s |= 1 << bit
                keys[q, a_idx] = s | (label_index(self._raw_label(e)) << len(sel))
        return keys

    def _raw_label(self, error: PauliOp) -> PauliOp:
        x = z = 0
        for i in range(self.k):
            if not commutes(error, self.logical_z[i]):
                x |= 1 << i
            if not commutes(error, self.logical_x[i]):
                z |= 1 << i
        return PauliOp(self.k, x, z)

    # -- distance -----------------------------------------------------------

    def min_logical_weight(self, max_weight: int, paulis: str | None = None) -> int | None:
        """Smallest weight ``<= max_weight`` of a nontrivial logical operator.

        Only errors built from the single-qubit Paulis in ``paulis`` (default
        :attr:`distance_paulis`) are considered.  Returns ``None`` if no
        logical operator of weight ``<= max_weight`` exists.
        """
        paulis = self.distance_paulis if paulis is None else paulis
        keys = self.pauli_keys()
        coeffs = np.array([1.0 if ch in paulis else 0.0 for ch in "XYZ"])
        smask = (1 << self.m) - 1
        for w in range(1, max_weight + 1):
            for ks, _ in _enum.weight_chunks(keys, coeffs, w):
                if np.any((ks & smask == 0) & (ks != 0)):
                    return w
        return None

    def verify_distance(self, exact: bool | None = None) -> None:
        """Check that no logical operator has weight below ``d``.

        With ``exact`` (default: when ``n <= 16``) also check that weight
        ``d`` is attained.
        """
        if self.k == 0:
            return
        exact = self.n <= 16 if exact is None else exact
        found = self.min_logical_weight(self.d if exact else self.d - 1)
        if found is not None and found < self.d:
            raise CodeError(f"{self.name}: logical operator of weight {found} < declared d={self.d}")
        if exact and found != self.d:
            raise CodeError(f"{self.name}: no logical operator of weight d={self.d}; distance is larger")


# ---------------------------------------------------------------------------
# operations on codes


def syndrome(code: StabilizerCode, error: PauliOp) -> int:
    """Packed syndrome: bit ``a`` set iff ``error`` anticommutes with generator ``a``."""
    if error.n != code.n:
        raise ValueError(f"error has {error.n} qubits, code has {code.n}")
    s = 0
    for a, g in enumerate(code.generators):
        if not commutes(error, g):
            s |= 1 << a
    return s


def syndrome_bits(code: StabilizerCode, error: PauliOp) -> tuple[int, ...]:
    s = syndrome(code, error)
    return tuple((s >> a) & 1 for a in range(code.m))


def canonical_recovery(code: StabilizerCode, s: int | tuple[int, ...]) -> PauliOp:
    """Product of destabilizers ``D_a`` over the set bits of ``s``."""
    if isinstance(s, tuple):
        if len(s) != code.m:
            raise ValueError(f"syndrome length {len(s)} != m = {code.m}")
        s = sum(int(b) << a for a, b in enumerate(s))
    if s < 0 or s >> code.m:
        raise ValueError("syndrome has bits beyond the generator count")
    r = PauliOp.identity(code.n)
    for a, d_a in enumerate(code.destabilizers):
        if (s >> a) & 1:
            r = prod(r, d_a)
    return r


def logical_class(code: StabilizerCode, error: PauliOp) -> PauliOp:
    """Logical label (k-qubit Pauli) of ``error`` times its canonical recovery."""
    residual = prod(error, canonical_recovery(code, syndrome(code, error)))
    return code._raw_label(residual)


def block_product(code: StabilizerCode, k: int) -> StabilizerCode:
    """``k`` disjoint copies of a one-logical-qubit code."""
    if code.k != 1:
        raise CodeError(f"block_product needs a k=1 code, got k={code.k}")
    if k < 1:
        raise ValueError("k must be at least 1")
    if k == 1:
        return code
    n = code.n * k
    gens = tuple(g.embed(n, b * code.n) for b in range(k) for g in code.generators)
    lx = tuple(code.logical_x[0].embed(n, b * code.n) for b in range(k))
    lz = tuple(code.logical_z[0].embed(n, b * code.n) for b in range(k))
    return StabilizerCode(
        f"{code.name}^{k}", n, k, code.d, gens, lx, lz, code.distance_paulis, code.provenance
    )


def promote_logical(code: StabilizerCode, i: int, d: int | None = None) -> StabilizerCode:
    """Turn ``logical_z[i]`` into an extra stabilizer generator.

    The new code keeps the remaining logical pairs.  Its last generator is the
    promoted operator and its last destabilizer is the old ``logical_x[i]``.
    """
    if not 0 <= i < code.k:
        raise IndexError(f"logical index {i} out of range for k={code.k}")
    if code.k - 1 < 1:
        raise CodeError("promotion would leave no logical qubit")
    keep = [j for j in range(code.k) if j != i]
    new = StabilizerCode(
        f"{code.name}/promote{i}",
        code.n,
        code.k - 1,
        code.d if d is None else d,
        code.generators + (code.logical_z[i],),
        tuple(code.logical_x[j] for j in keep),
        tuple(code.logical_z[j] for j in keep),
        code.distance_paulis,
        code.provenance,
    )
    new.verify_distance()
    return new


# ---------------------------------------------------------------------------
# built-in codes


def _ops(strings) -> tuple[PauliOp, ...]:
    return tuple(PauliOp.from_string(s) for s in strings)


def repetition(d: int) -> StabilizerCode:
    """Bit-flip repetition code ``[[d, 1, d]]`` with ``Z_q Z_{q+1}`` checks."""
    if d < 2:
        raise ValueError("repetition code needs d >= 2")
    gens = ["I" * q + "ZZ" + "I" * (d - q - 2) for q in range(d - 1)]
    lz = "Z" + "I" * (d - 1)
    code = StabilizerCode(f"rep{d}", d, 1, d, _ops(gens), _ops(["X" * d]), _ops([lz]), "X")
    code.verify_distance()
    return code


def rotated_surface(d: int) -> StabilizerCode:
    """Rotated surface code ``[[d*d, 1, d]]`` on a row-major ``d x d`` grid.

    Plaquette ``(r, c)`` for ``r, c in -1 .. d-1`` touches the qubits
    ``(r + i, c + j)``, ``i, j in {0, 1}``, that lie on the grid.  It is
    X-type when ``r + c`` is even and Z-type otherwise.  Weight-2 plaquettes
    are kept on the top and bottom edges when Z-type and on the left and
    right edges when X-type.  Logical Z is column 0, logical X is row 0.
    """
    if d not in (2, 3, 4, 5):
        raise ValueError("rotated_surface supports d in {2, 3, 4, 5}")
    n = d * d
    gens = []
    for r in range(-1, d):
        for c in range(-1, d):
            qubits = [
                (r + i) * d + (c + j)
                for i in (0, 1)
                for j in (0, 1)
                if 0 <= r + i < d and 0 <= c + j < d
            ]
            kind = "X" if (r + c) % 2 == 0 else "Z"
            if len(qubits) == 4:
                pass
            elif len(qubits) == 2:
                horizontal = r in (-1, d - 1)
                if horizontal != (kind == "Z"):
                    continue
            else:
                continue
            mask = sum(1 << q for q in qubits)
            gens.append(PauliOp(n, mask, 0) if kind == "X" else PauliOp(n, 0, mask))
    lz = PauliOp(n, 0, sum(1 << (r * d) for r in range(d)))
    lx = PauliOp(n, sum(1 << c for c in range(d)), 0)
    code = StabilizerCode(f"surface{d}", n, 1, d, tuple(gens), (lx,), (lz,))
    code.verify_distance()
    return code


def perfect_513() -> StabilizerCode:
    gens = ["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"]
    code = StabilizerCode("perfect513", 5, 1, 3, _ops(gens), _ops(["XXXXX"]), _ops(["ZZZZZ"]))
    code.verify_distance()
    return code


def steane_713() -> StabilizerCode:
    rows = ["0001111", "0110011", "1010101"]
    gens = [r.replace("0", "I").replace("1", "X") for r in rows]
    gens += [r.replace("0", "I").replace("1", "Z") for r in rows]
    code = StabilizerCode("steane713", 7, 1, 3, _ops(gens), _ops(["X" * 7]), _ops(["Z" * 7]))
    code.verify_distance()
    return code


# ---------------------------------------------------------------------------
# file format


def parse_code_text(text: str, name: str = "file", provenance: str = "file") -> StabilizerCode:
    """Parse the plain-text code format.

    Header lines ``key = value`` (``d`` is required) precede the sections
    ``[stabilizers]``, ``[logical_x]`` and ``[logical_z]``, each holding one
    Pauli string per line.  ``#`` starts a comment.
    """
    header: dict[str, str] = {}
    sections: dict[str, list[str]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        sec = re.fullmatch(r"\[(\w+)\]", line)
        if sec:
            current = sec.group(1).lower()
            if current not in ("stabilizers", "logical_x", "logical_z"):
                raise CodeError(f"line {lineno}: unknown section [{current}]")
            sections.setdefault(current, [])
            continue
        if current is None:
            if "=" not in line:
                raise CodeError(f"line {lineno}: expected 'key = value' header, got {line!r}")
            key, value = (t.strip() for t in line.split("=", 1))
            header[key.lower()] = value
            continue
        try:
            sections[current].append(PauliOp.from_string(line.upper()))
        except ValueError as exc:
            raise CodeError(f"line {lineno}: {exc}") from None
    for sec in ("stabilizers", "logical_x", "logical_z"):
        if sec not in sections:
            raise CodeError(f"missing section [{sec}]")
    if "d" not in header:
        raise CodeError("header must declare the distance 'd'")
    gens = tuple(sections["stabilizers"])
    lx, lz = tuple(sections["logical_x"]), tuple(sections["logical_z"])
    ns = {p.n for p in gens + lx + lz}
    if len(ns) != 1:
        raise CodeError(f"Pauli strings have inconsistent lengths {sorted(ns)}")
    n = ns.pop()
    k = len(lx)
    if "n" in header and int(header["n"]) != n:
        raise CodeError(f"header n={header['n']} but operators act on {n} qubits")
    if "k" in header and int(header["k"]) != k:
        raise CodeError(f"header k={header['k']} but {k} logical pairs given")
    code = StabilizerCode(
        header.get("name", name),
        n,
        k,
        int(header["d"]),
        gens,
        lx,
        lz,
        header.get("distance_paulis", "XYZ"),
        header.get("provenance", provenance),
    )
    code.verify_distance()
    return code


def load_code(path: str | Path) -> StabilizerCode:
    path = Path(path)
    return parse_code_text(path.read_text(), name=path.stem, provenance=f"file:{path.name}")


def format_code_text(code: StabilizerCode) -> str:
    lines = [f"name = {code.name}", f"n = {code.n}", f"k = {code.k}", f"d = {code.d}"]
    if code.distance_paulis != "XYZ":
        lines.append(f"distance_paulis = {code.distance_paulis}")
    lines.append("[stabilizers]")
    lines += [str(g) for g in code.generators]
    lines.append("[logical_x]")
    lines += [str(p) for p in code.logical_x]
    lines.append("[logical_z]")
    lines += [str(p) for p in code.logical_z]
    return "\n".join(lines) + "\n"


def _load_packaged(filename: str) -> StabilizerCode:
    text = resources.files("syndaware").joinpath("data").joinpath(filename).read_text()
    return parse_code_text(text, name=filename.rsplit(".", 1)[0], provenance="external")


@lru_cache(maxsize=None)
def catalog(name: str) -> StabilizerCode:
    """Look up a built-in code.

    Accepted names: ``rep<d>`` / ``repetition:<d>``, ``surface<d>`` /
    ``rotated_surface:<d>``, ``perfect_513`` / ``513``, ``steane`` /
    ``steane_713`` / ``713``, ``carbon`` ([[12,2,4]], external generators)
    and ``carbon_promoted`` ([[12,1,4]]).
    """
    key = name.strip().lower()
    m = re.fullmatch(r"(rep|repetition)[:_]?(\d+)", key)
    if m:
        return repetition(int(m.group(2)))
    m = re.fullmatch(r"(surface|rotated_surface)[:_]?(\d+)", key)
    if m:
        return rotated_surface(int(m.group(2)))
    if key in ("perfect_513", "perfect513", "perfect", "513"):
        return perfect_513()
    if key in ("steane", "steane_713", "steane713", "713"):
        return steane_713()
    if key in ("carbon", "carbon_1224"):
        return _load_packaged("carbon_12_2_4.txt")
    if key in ("carbon_promoted", "carbon_1214"):
        return promote_logical(catalog("carbon"), 0)
    raise KeyError(f"unknown code {name!r}")


def resolve_code(spec: str) -> StabilizerCode:
    """Catalog name, ``<name>^<k>`` block product, or path to a code file."""
    m = re.fullmatch(r"(.+)\^(\d+)", spec.strip())
    if m:
        return block_product(resolve_code(m.group(1)), int(m.group(2)))
    try:
        return catalog(spec)
    except KeyError:
        path = Path(spec)
        if path.is_file():
            return load_code(path)
        raise
