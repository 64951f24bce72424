"""Stabilizer-state simulation with a destabilizer tableau (CHP layout).

The tableau holds 2n rows, destabilizers ``0..n-1`` then stabilizers
``n..2n-1``; destabilizer ``i`` anticommutes with stabilizer ``i`` only.
Each row is an x-bit row, a z-bit row and a mod-4 phase in the XZ form
used by :mod:`cliffmip.pauli`, so row products need a single popcount.

A state object is mutable and single-threaded; ``copy()`` forks it.
"""
from __future__ import annotations

from collections.abc import Sequence
from fractions import Fraction

import numpy as np

from . import gf2
from .clifford import CliffordCircuit, CliffordGate
from .pauli import DimensionError, PauliOperator
from .rng import SplitMix64

HALF = Fraction(1, 2)


class StabilizerError(ValueError):
    """Invalid generator set or a non-Clifford request."""


class StabilizerState:
    __slots__ = ("n", "x", "z", "r")

    def __init__(self, n: int, x: np.ndarray, z: np.ndarray, r: np.ndarray):
        self.n = n
        self.x = x
        self.z = z
        self.r = r

    # construction -----------------------------------------------------
    @classmethod
    def zero(cls, n: int) -> "StabilizerState":
        if n < 0:
            raise ValueError("negative qubit count")
        eye = np.eye(n, dtype=np.uint8)
        zero = np.zeros((n, n), dtype=np.uint8)
        return cls(n, np.vstack([eye, zero]), np.vstack([zero, eye]), np.zeros(2 * n, dtype=np.int64))

    @classmethod
    def basis(cls, bits: str) -> "StabilizerState":
        st = cls.zero(len(bits))
        for j, b in enumerate(bits):
            if b == "1":
                st.r[st.n + j] = 2
        return st

    @classmethod
    def from_generators(cls, generators: Sequence[PauliOperator]) -> "StabilizerState":
        """State stabilised by ``generators`` (n independent, commuting, Hermitian, not -I)."""
        n = len(generators)
        if any(g.n != n for g in generators):
            raise StabilizerError("need exactly n generators on n qubits")
        for a, g in enumerate(generators):
            if not g.is_hermitian():
                raise StabilizerError(f"generator {g} is not Hermitian")
            for h in generators[a + 1:]:
                if not g.commutes(h):
                    raise StabilizerError(f"generators {g} and {h} anticommute")
        vecs = [g.x | (g.z << n) for g in generators]
        if gf2.rank(vecs, 2 * n) != n:
            raise StabilizerError("generators are not independent")
        # destabilizer d_i: symplectic product with stabilizer j equals delta_ij;
        # <d, s> = |d.x & s.z| + |d.z & s.x|, i.e. d dotted with s's swapped vector
        swapped = [g.z | (g.x << n) for g in generators]
        destab = []
        for i in range(n):
            sol = gf2.solve(swapped, [int(i == j) for j in range(n)], 2 * n)
            if sol is None:
                raise StabilizerError("could not complete the symplectic basis")
            destab.append(sol)
        for i in range(n):
            for j in range(i):
                di, dj = destab[i], destab[j]
                prod = ((di & (dj >> n)).bit_count() + ((di >> n) & dj).bit_count()) & 1
                if prod:
                    destab[i] ^= vecs[j]
        mask = (1 << n) - 1
        rows = [PauliOperator(n, d & mask, d >> n, 0) for d in destab]
        rows = [p if p.is_hermitian() else p.with_phase(1) for p in rows]
        return cls._from_rows(n, rows + list(generators))

    @classmethod
    def _from_rows(cls, n: int, rows: Sequence[PauliOperator]) -> "StabilizerState":
        x = np.zeros((2 * n, n), dtype=np.uint8)
        z = np.zeros((2 * n, n), dtype=np.uint8)
        r = np.zeros(2 * n, dtype=np.int64)
        for k, p in enumerate(rows):
            for j in range(n):
                x[k, j] = (p.x >> j) & 1
                z[k, j] = (p.z >> j) & 1
            r[k] = p.phase_exp
        return cls(n, x, z, r)

    def copy(self) -> "StabilizerState":
        return StabilizerState(self.n, self.x.copy(), self.z.copy(), self.r.copy())

    # views ------------------------------------------------------------
    def _row(self, k: int) -> PauliOperator:
        xm = int(sum(int(b) << j for j, b in enumerate(self.x[k])))
        zm = int(sum(int(b) << j for j, b in enumerate(self.z[k])))
        return PauliOperator(self.n, xm, zm, int(self.r[k]))

    def stabilizers(self) -> list[PauliOperator]:
        return [self._row(self.n + i) for i in range(self.n)]

    def destabilizers(self) -> list[PauliOperator]:
        return [self._row(i) for i in range(self.n)]

    def is_valid(self) -> bool:
        stabs = self.stabilizers()
        dest = self.destabilizers()
        for i, s in enumerate(stabs):
            if not s.is_hermitian():
                return False
            for j, t in enumerate(stabs):
                if not s.commutes(t):
                    return False
                if dest[j].commutes(s) == (i == j):
                    return False
        vecs = [s.x | (s.z << self.n) for s in stabs]
        return gf2.rank(vecs, 2 * self.n) == self.n

    def to_text(self) -> str:
        return f"{self.n}\n" + "".join(f"{s}\n" for s in self.stabilizers())

    # evolution --------------------------------------------------------
    def apply_gate(self, g: CliffordGate) -> None:
        x, z, r = self.x, self.z, self.r
        if g.kind == "H":
            q = g.target
            r += 2 * (x[:, q] & z[:, q])
            x[:, q], z[:, q] = z[:, q].copy(), x[:, q].copy()
        elif g.kind == "S":
            q = g.target
            r += x[:, q]
            z[:, q] ^= x[:, q]
        else:
            c, t = g.control, g.target
            x[:, t] ^= x[:, c]
            z[:, c] ^= z[:, t]
        r %= 4

    def apply_circuit(self, u: CliffordCircuit) -> None:
        if u.n != self.n:
            raise DimensionError(f"{u.n}-qubit circuit on {self.n}-qubit state")
        for g in u.gates:
            self.apply_gate(g)

    def add_qubits(self, bits: str) -> list[int]:
        """Append fresh qubits prepared in ``|bits>``; returns their indices."""
        k = len(bits)
        if k == 0:
            return []
        n, m = self.n, self.n + k
        x = np.zeros((2 * m, m), dtype=np.uint8)
        z = np.zeros((2 * m, m), dtype=np.uint8)
        r = np.zeros(2 * m, dtype=np.int64)
        x[:n, :n], z[:n, :n], r[:n] = self.x[:n], self.z[:n], self.r[:n]
        x[m:m + n, :n], z[m:m + n, :n], r[m:m + n] = self.x[n:], self.z[n:], self.r[n:]
        for j, b in enumerate(bits):
            x[n + j, n + j] = 1
            z[m + n + j, n + j] = 1
            r[m + n + j] = 2 if b == "1" else 0
        self.n, self.x, self.z, self.r = m, x, z, r
        return list(range(n, m))

    # measurement ------------------------------------------------------
    def _pivot(self, q: int) -> int | None:
        col = self.x[self.n:, q]
        if not col.any():
            return None
        return int(col.argmax()) + self.n

    def _deterministic_bit(self, q: int) -> int:
        acc_x = np.zeros(self.n, dtype=np.uint8)
        acc_z = np.zeros(self.n, dtype=np.uint8)
        k = 0
        for i in self.x[: self.n, q].nonzero()[0]:
            s = self.n + int(i)
            k += int(self.r[s]) + 2 * int((acc_z & self.x[s]).sum())
            acc_x ^= self.x[s]
            acc_z ^= self.z[s]
        return (k % 4) // 2

    def outcome_probability(self, qubit: int, bit: int) -> Fraction:
        self._check(qubit)
        if self._pivot(qubit) is not None:
            return HALF
        return Fraction(int(self._deterministic_bit(qubit) == bit))

    def _collapse(self, q: int, p: int, bit: int) -> None:
        x, z, r = self.x, self.z, self.r
        rows = x[:, q].nonzero()[0]
        rows = rows[rows != p]
        if rows.size:
            r[rows] = (r[rows] + r[p] + 2 * (z[rows] & x[p]).sum(axis=1)) % 4
            x[rows] ^= x[p]
            z[rows] ^= z[p]
        d = p - self.n
        x[d], z[d], r[d] = x[p], z[p], r[p]
        x[p] = 0
        z[p] = 0
        z[p, q] = 1
        r[p] = 2 * bit

    def force(self, qubit: int, bit: int) -> Fraction:
        """Project onto outcome ``bit``; returns its probability (state unchanged if 0)."""
        self._check(qubit)
        p = self._pivot(qubit)
        if p is None:
            return Fraction(int(self._deterministic_bit(qubit) == bit))
        self._collapse(qubit, p, bit)
        return HALF

    def measure_inplace(self, qubit: int, rng: SplitMix64) -> tuple[int, bool]:
        self._check(qubit)
        p = self._pivot(qubit)
        if p is None:
            return self._deterministic_bit(qubit), True
        bit = rng.bit()
        self._collapse(qubit, p, bit)
        return bit, False

    def _check(self, qubit: int) -> None:
        if not 0 <= qubit < self.n:
            raise IndexError(f"qubit {qubit} outside {self.n}-qubit state")


def init_zero(n: int) -> StabilizerState:
    if n < 1:
        raise ValueError("need at least one qubit")
    return StabilizerState.zero(n)


def apply_clifford(state: StabilizerState, u: CliffordCircuit) -> StabilizerState:
    out = state.copy()
    out.apply_circuit(u)
    return out


def measure(state: StabilizerState, qubit: int, rng: SplitMix64) -> tuple[int, bool, StabilizerState]:
    out = state.copy()
    bit, det = out.measure_inplace(qubit, rng)
    return bit, det, out


def outcome_probability(state: StabilizerState, qubit: int, bit: int) -> Fraction:
    return state.outcome_probability(qubit, bit)


def exact_outcome_distribution(state: StabilizerState, qubits: Sequence[int]) -> dict[str, Fraction]:
    """Joint distribution of measuring ``qubits`` in order (exact dyadic values)."""
    dist: dict[str, Fraction] = {}

    def walk(st: StabilizerState, k: int, prefix: str, w: Fraction) -> None:
        if k == len(qubits):
            dist[prefix] = dist.get(prefix, Fraction(0)) + w
            return
        for b in (0, 1):
            child = st.copy()
            p = child.force(qubits[k], b)
            if p:
                walk(child, k + 1, prefix + str(b), w * p)

    walk(state, 0, "", Fraction(1))
    return dist


def load_stabilizer(text: str) -> StabilizerState:
    rows = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    rows = [r for r in rows if r]
    n = int(rows[0])
    gens = [PauliOperator.parse(r) for r in rows[1:]]
    if len(gens) != n or any(g.n != n for g in gens):
        raise StabilizerError(f"expected {n} generators on {n} qubits")
    return StabilizerState.from_generators(gens)


def to_dense(state: StabilizerState):
    """Statevector of ``state`` (global phase arbitrary), via the stabilizer projector."""
    from . import dense

    n = state.n
    idx = np.arange(2**n)
    v = np.exp(1j * (0.7 + np.sqrt(2) * idx + np.sqrt(3) * idx**2 % 7))
    for s in state.stabilizers():
        v = 0.5 * (v + dense.apply_pauli(v, n, s))
    nrm = np.linalg.norm(v)
    if nrm < 1e-8:
        raise StabilizerError("projection vanished; degenerate generator set")
    v = v / nrm
    k = int(np.argmax(np.abs(v) > 1e-9))
    v = v * (abs(v[k]) / v[k])
    return dense.DenseState(n, v)
