"""Phaseless n-qubit Pauli operators in the binary symplectic representation.

Qubit ``q`` is stored in bit ``q`` of two Python integers, ``x`` and ``z``.
A qubit carries X when only its x bit is set, Z when only its z bit is set
and Y when both are set.  Global phases are dropped everywhere except in
:func:`product_phase`, which recovers the power of ``i`` picked up by a
product of Hermitian Paulis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_QUBITS = 64

_CHAR_TO_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_TO_CHAR = {bits: ch for ch, bits in _CHAR_TO_BITS.items()}


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True)
class PauliOp:
    """Phaseless Pauli operator on ``n`` qubits.

    Parameters
    ----------
    n : int
        Number of qubits.
    x, z : int
        Bit masks; bit ``q`` refers to qubit ``q`` (the ``q``-th character of
        the string form).
    """

    n: int
    x: int = 0
    z: int = 0

    def __post_init__(self):
        if not 0 <= self.n <= MAX_QUBITS:
            raise ValueError(f"qubit count {self.n} outside [0, {MAX_QUBITS}]")
        mask = (1 << self.n) - 1
        if self.x & ~mask or self.z & ~mask or self.x < 0 or self.z < 0:
            raise ValueError("bit masks exceed the qubit count")

    @classmethod
    def from_string(cls, s: str) -> PauliOp:
        x = z = 0
        for q, ch in enumerate(s):
            try:
                bx, bz = _CHAR_TO_BITS[ch]
            except KeyError:
                raise ValueError(f"invalid Pauli character {ch!r} in {s!r}") from None
            x |= bx << q
            z |= bz << q
        return cls(len(s), x, z)

    @classmethod
    def identity(cls, n: int) -> PauliOp:
        return cls(n, 0, 0)

    @classmethod
    def single(cls, n: int, qubit: int, kind: str) -> PauliOp:
        bx, bz = _CHAR_TO_BITS[kind]
        return cls(n, bx << qubit, bz << qubit)

    def __str__(self) -> str:
        return "".join(
            _BITS_TO_CHAR[((self.x >> q) & 1, (self.z >> q) & 1)] for q in range(self.n)
        )

    def __repr__(self) -> str:
        return f"PauliOp({str(self)!r})"

    @property
    def x_bits(self) -> np.ndarray:
        return np.array([(self.x >> q) & 1 for q in range(self.n)], dtype=np.uint8)

    @property
    def z_bits(self) -> np.ndarray:
        return np.array([(self.z >> q) & 1 for q in range(self.n)], dtype=np.uint8)

    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    @property
    def support(self) -> int:
        return self.x | self.z

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def _check(self, other: PauliOp) -> None:
        if self.n != other.n:
            raise ValueError(f"qubit count mismatch: {self.n} vs {other.n}")

    def commutes(self, other: PauliOp) -> bool:
        return commutes(self, other)

    def __mul__(self, other: PauliOp) -> PauliOp:
        return prod(self, other)

    def tensor(self, other: PauliOp) -> PauliOp:
        """Operator acting as ``self`` on the first qubits and ``other`` after them."""
        return PauliOp(self.n + other.n, self.x | (other.x << self.n), self.z | (other.z << self.n))

    def embed(self, n: int, offset: int) -> PauliOp:
        """Place this operator on qubits ``offset .. offset+self.n-1`` of ``n`` qubits."""
        if offset < 0 or offset + self.n > n:
            raise ValueError("embedding does not fit")
        return PauliOp(n, self.x << offset, self.z << offset)

    def to_matrix(self) -> np.ndarray:
        """Dense Hermitian matrix (Y = iXZ), qubit 0 as the leftmost tensor factor."""
        mats = {
            "I": np.eye(2, dtype=complex),
            "X": np.array([[0, 1], [1, 0]], dtype=complex),
            "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
            "Z": np.array([[1, 0], [0, -1]], dtype=complex),
        }
        out = np.ones((1, 1), dtype=complex)
        for ch in str(self):
            out = np.kron(out, mats[ch])
        return out


def parse(s: str) -> PauliOp:
    return PauliOp.from_string(s)


def format_pauli(p: PauliOp) -> str:
    return str(p)


def symplectic_product(p: PauliOp, q: PauliOp) -> int:
    """Symplectic inner product of ``p`` and ``q`` modulo 2."""
    p._check(q)
    return _popcount((p.x & q.z) ^ (p.z & q.x)) & 1


def commutes(p: PauliOp, q: PauliOp) -> bool:
    return symplectic_product(p, q) == 0


def prod(p: PauliOp, q: PauliOp) -> PauliOp:
    """Phaseless product: XOR of the bit vectors."""
    p._check(q)
    return PauliOp(p.n, p.x ^ q.x, p.z ^ q.z)


def product_phase(p: PauliOp, q: PauliOp) -> int:
    """Exponent ``e`` (mod 4) with ``P Q = i**e * R`` for Hermitian Paulis.

    ``R`` is the Hermitian Pauli with the bit vectors of ``prod(p, q)``.
    """
    p._check(q)
    px, pz, qx, qz = p.x, p.z, q.x, q.z
    p_x_only, p_y, p_z_only = px & ~pz, px & pz, ~px & pz
    q_x_only, q_y, q_z_only = qx & ~qz, qx & qz, ~qx & qz
    e = (
        _popcount(p_x_only & q_y) - _popcount(p_x_only & q_z_only)
        + _popcount(p_y & q_z_only) - _popcount(p_y & q_x_only)
        + _popcount(p_z_only & q_x_only) - _popcount(p_z_only & q_y)
    )
    return e % 4
