"""n-qubit Pauli group elements in symplectic form with exact phases.

An operator is stored as ``i**phase_exp * X^x_0 Z^z_0 (x) ... (x) X^x_{n-1} Z^z_{n-1}``
where ``x`` and ``z`` are packed bitmasks (bit ``j`` is qubit ``j``). In this
"XZ form" the product rule needs only one popcount::

    (i^a X^x1 Z^z1)(i^b X^x2 Z^z2) = i^(a + b + 2|z1 & x2|) X^(x1^x2) Z^(z1^z2)

The text form uses ordinary Pauli letters, where ``Y = i X Z``; the phase
shown there (``pauli_phase``) differs from ``phase_exp`` by the number of
``Y`` factors. A Hermitian operator has ``pauli_phase`` in {0, 2}.

Bitstrings in the public API are ``str`` of ``'0'``/``'1'``; character ``j``
belongs to qubit ``j``.
"""
from __future__ import annotations

import re
from collections.abc import Sequence
from dataclasses import dataclass

_LETTERS = "IXZY"  # index = x | (z << 1)
_PHASE_TEXT = {0: "+", 1: "+i", 2: "-", 3: "-i"}


class DimensionError(ValueError):
    """Operands act on different numbers of qubits."""


def bits_to_mask(bits: str) -> int:
    mask = 0
    for j, ch in enumerate(bits):
        if ch == "1":
            mask |= 1 << j
        elif ch != "0":
            raise ValueError(f"not a bitstring: {bits!r}")
    return mask


def mask_to_bits(mask: int, n: int) -> str:
    return "".join("1" if (mask >> j) & 1 else "0" for j in range(n))


def xor_bits(a: str, b: str) -> str:
    if len(a) != len(b):
        raise DimensionError(f"bitstrings of length {len(a)} and {len(b)}")
    return "".join("1" if p != q else "0" for p, q in zip(a, b))


@dataclass(frozen=True, slots=True)
class PauliOperator:
    n: int
    x: int = 0
    z: int = 0
    phase_exp: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("negative qubit count")
        limit = 1 << self.n
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise ValueError("x/z masks exceed the qubit count")
        object.__setattr__(self, "phase_exp", self.phase_exp % 4)

    # construction -----------------------------------------------------
    @classmethod
    def identity(cls, n: int) -> "PauliOperator":
        return cls(n)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> "PauliOperator":
        return cls.from_label("I" * qubit + letter + "I" * (n - qubit - 1))

    @classmethod
    def from_label(cls, label: str, pauli_phase: int = 0) -> "PauliOperator":
        """Build ``i**pauli_phase * P_0 P_1 ...`` from letters I, X, Y, Z."""
        x = z = 0
        ys = 0
        for j, ch in enumerate(label.upper()):
            if ch in "I_":
                continue
            if ch == "X":
                x |= 1 << j
            elif ch == "Z":
                z |= 1 << j
            elif ch == "Y":
                x |= 1 << j
                z |= 1 << j
                ys += 1
            else:
                raise ValueError(f"bad Pauli letter {ch!r} in {label!r}")
        return cls(len(label), x, z, pauli_phase + ys)

    @classmethod
    def parse(cls, text: str) -> "PauliOperator":
        """Inverse of ``str()``; also accepts ``+XY``, ``-iZ`` and bare labels."""
        s = text.strip()
        m = re.fullmatch(r"i\^([0-3])\s*(?:[·*]\s*([IXYZ_]*))?", s)
        if m:
            return cls.from_label(m.group(2) or "", int(m.group(1)))
        m = re.fullmatch(r"([+-]?)(i?)([IXYZ_]*)", s)
        if not m:
            raise ValueError(f"cannot parse Pauli operator {text!r}")
        k = (2 if m.group(1) == "-" else 0) + (1 if m.group(2) else 0)
        return cls.from_label(m.group(3), k)

    # views ------------------------------------------------------------
    @property
    def x_bits(self) -> str:
        return mask_to_bits(self.x, self.n)

    @property
    def z_bits(self) -> str:
        return mask_to_bits(self.z, self.n)

    @property
    def num_y(self) -> int:
        return (self.x & self.z).bit_count()

    @property
    def pauli_phase(self) -> int:
        """Exponent of ``i`` in front of the I/X/Y/Z letter string."""
        return (self.phase_exp - self.num_y) % 4

    @property
    def label(self) -> str:
        return "".join(_LETTERS[((self.x >> j) & 1) | (((self.z >> j) & 1) << 1)]
                       for j in range(self.n))

    @property
    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    def letter(self, qubit: int) -> str:
        return _LETTERS[((self.x >> qubit) & 1) | (((self.z >> qubit) & 1) << 1)]

    def is_hermitian(self) -> bool:
        return (self.phase_exp + self.num_y) % 2 == 0

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0 and self.phase_exp == 0

    def commutes(self, other: "PauliOperator") -> bool:
        _check_same(self, other)
        return ((self.x & other.z).bit_count() + (self.z & other.x).bit_count()) % 2 == 0

    def __str__(self) -> str:
        if self.n == 0:
            return f"i^{self.pauli_phase}"
        return f"i^{self.pauli_phase} · {self.label}"

    def short(self) -> str:
        return _PHASE_TEXT[self.pauli_phase] + self.label

    # algebra ----------------------------------------------------------
    def __mul__(self, other: "PauliOperator") -> "PauliOperator":
        return pauli_mul(self, other)

    def adjoint(self) -> "PauliOperator":
        # (i^k X^x Z^z)^dag = i^-k Z^z X^x = i^-k (-1)^|x&z| X^x Z^z
        return PauliOperator(self.n, self.x, self.z, -self.phase_exp + 2 * self.num_y)

    def with_phase(self, phase_exp: int) -> "PauliOperator":
        return PauliOperator(self.n, self.x, self.z, phase_exp)

    def restricted(self, qubits: Sequence[int]) -> "PauliOperator":
        """Sub-operator on ``qubits`` (in that order); phase is kept as is."""
        x = z = 0
        for k, q in enumerate(qubits):
            x |= ((self.x >> q) & 1) << k
            z |= ((self.z >> q) & 1) << k
        return PauliOperator(len(qubits), x, z, self.phase_exp)

    def embedded(self, positions: Sequence[int], total: int) -> "PauliOperator":
        """Place qubit ``k`` of this operator at ``positions[k]`` of a ``total``-qubit register."""
        if len(positions) != self.n:
            raise DimensionError("one position per qubit required")
        x = z = 0
        for k, q in enumerate(positions):
            if not 0 <= q < total:
                raise IndexError(f"position {q} outside register of {total}")
            x |= ((self.x >> k) & 1) << q
            z |= ((self.z >> k) & 1) << q
        return PauliOperator(total, x, z, self.phase_exp)


def _check_same(p: PauliOperator, q: PauliOperator) -> None:
    if p.n != q.n:
        raise DimensionError(f"Pauli operators on {p.n} and {q.n} qubits")


def pauli_mul(p: PauliOperator, q: PauliOperator) -> PauliOperator:
    _check_same(p, q)
    k = p.phase_exp + q.phase_exp + 2 * (p.z & q.x).bit_count()
    return PauliOperator(p.n, p.x ^ q.x, p.z ^ q.z, k)


def tensor(p: PauliOperator, q: PauliOperator) -> PauliOperator:
    """``p (x) q`` with ``p`` on the leading qubits."""
    return PauliOperator(p.n + q.n, p.x | (q.x << p.n), p.z | (q.z << p.n),
                         p.phase_exp + q.phase_exp)


def x_correction(x: str, y: str) -> PauliOperator:
    """Tensor product of X on every position where ``x`` and ``y`` differ.

    Maps the basis state ``|y>`` to ``|x>`` (and back).
    """
    if len(x) != len(y):
        raise DimensionError(f"bitstrings of length {len(x)} and {len(y)}")
    return PauliOperator(len(x), bits_to_mask(x) ^ bits_to_mask(y), 0, 0)


def apply_to_basis(p: PauliOperator, a: str) -> tuple[int, str]:
    """``P|a> = i**phase |b>``; returns ``(phase, b)``."""
    if len(a) != p.n:
        raise DimensionError(f"basis state of length {len(a)} for {p.n}-qubit operator")
    m = bits_to_mask(a)
    phase = (p.phase_exp + 2 * (p.z & m).bit_count()) % 4
    return phase, mask_to_bits(m ^ p.x, p.n)


def conjugate_projector(p: PauliOperator, a: str, measured: Sequence[int]) -> str:
    """Outcome string ``b`` with ``|b><b| (x) I = P (|a><a| (x) I) P^dag``.

    Only the X part of ``P`` on the measured qubits matters: the phase and
    the Z part cancel between ``P`` and ``P^dag``.
    """
    if len(a) != len(measured):
        raise DimensionError("one outcome bit per measured qubit required")
    out = []
    for bit, q in zip(a, measured):
        if not 0 <= q < p.n:
            raise IndexError(f"measured qubit {q} outside {p.n}-qubit operator")
        flip = (p.x >> q) & 1
        out.append("1" if (bit == "1") ^ bool(flip) else "0")
    return "".join(out)
