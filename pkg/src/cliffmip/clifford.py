"""Clifford circuits over {H, S, CNOT} and their conjugation action on Paulis.

Two equivalent routes compute ``U P U^dag``:

* gate replay (:func:`conjugate`), the reference path, walks the gate list
  and updates one operator in O(1) word operations per gate;
* a compiled :class:`CliffordTableau` stores the images of every ``X_j``
  and ``Z_j`` and maps an operator with O(n) Pauli products.

Compilation runs all 2n generators through the circuit at once in a
bit-sliced layout: one packed integer per qubit column holds that column's
bits for every generator, and the mod-4 phases are two bit-planes.
"""
from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from .pauli import DimensionError, PauliOperator, pauli_mul

GATE_KINDS = ("H", "S", "CNOT")


@dataclass(frozen=True, slots=True)
class CliffordGate:
    kind: str
    target: int
    control: int | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown Clifford gate {self.kind!r}")
        if self.target < 0 or (self.control is not None and self.control < 0):
            raise IndexError("negative qubit index")
        if self.kind == "CNOT":
            if self.control is None:
                raise ValueError("CNOT needs a control qubit")
            if self.control == self.target:
                raise ValueError("CNOT control equals target")
        elif self.control is not None:
            raise ValueError(f"{self.kind} takes no control qubit")

    @property
    def qubits(self) -> tuple[int, ...]:
        if self.kind == "CNOT":
            return (self.control, self.target)
        return (self.target,)

    def remapped(self, mapping: Sequence[int]) -> "CliffordGate":
        if self.kind == "CNOT":
            return CliffordGate("CNOT", mapping[self.target], mapping[self.control])
        return CliffordGate(self.kind, mapping[self.target])

    def __str__(self) -> str:
        if self.kind == "CNOT":
            return f"CNOT {self.control} {self.target}"
        return f"{self.kind} {self.target}"


def H(q: int) -> CliffordGate:
    return CliffordGate("H", q)


def S(q: int) -> CliffordGate:
    return CliffordGate("S", q)


def CNOT(c: int, t: int) -> CliffordGate:
    return CliffordGate("CNOT", t, c)


@dataclass(frozen=True, slots=True)
class CliffordCircuit:
    n: int
    gates: tuple[CliffordGate, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if max(g.qubits) >= self.n:
                raise IndexError(f"gate {g} outside {self.n}-qubit circuit")

    def __len__(self) -> int:
        return len(self.gates)

    def __matmul__(self, other: "CliffordCircuit") -> "CliffordCircuit":
        """Operator product: ``(U @ V)`` applies ``V`` first."""
        if self.n != other.n:
            raise DimensionError("circuits of different arity")
        return CliffordCircuit(self.n, other.gates + self.gates)

    def then(self, other: "CliffordCircuit") -> "CliffordCircuit":
        return other @ self

    def to_text(self) -> str:
        return "".join(f"{g}\n" for g in self.gates)


def embed(u: CliffordCircuit, offset: int, total: int) -> CliffordCircuit:
    """Tensor ``u`` with identities so that its qubit 0 lands on ``offset``."""
    if offset < 0 or offset + u.n > total:
        raise DimensionError(f"{u.n}-qubit circuit at offset {offset} overflows {total} qubits")
    mapping = list(range(offset, offset + u.n))
    return CliffordCircuit(total, tuple(g.remapped(mapping) for g in u.gates))


def conjugate(u: CliffordCircuit, p: PauliOperator) -> PauliOperator:
    """``U P U^dag`` by replaying the gates of ``u`` one at a time."""
    if u.n != p.n:
        raise DimensionError(f"{u.n}-qubit circuit applied to {p.n}-qubit operator")
    x, z, k = p.x, p.z, p.phase_exp
    for g in u.gates:
        kind = g.kind
        if kind == "H":
            b = 1 << g.target
            xb, zb = x & b, z & b
            if xb and zb:
                k += 2
            x = (x & ~b) | zb
            z = (z & ~b) | xb
        elif kind == "S":
            b = 1 << g.target
            if x & b:
                k += 1
                z ^= b
        else:
            if (x >> g.control) & 1:
                x ^= 1 << g.target
            if (z >> g.target) & 1:
                z ^= 1 << g.control
    return PauliOperator(p.n, x, z, k)


class _SlicedFrame:
    """Many Pauli operators pushed through gates together (column-major bits)."""

    __slots__ = ("n", "rows", "xcol", "zcol", "p0", "p1")

    def __init__(self, paulis: Sequence[PauliOperator], n: int):
        self.n = n
        self.rows = len(paulis)
        self.xcol = [0] * n
        self.zcol = [0] * n
        self.p0 = 0
        self.p1 = 0
        for r, p in enumerate(paulis):
            if p.n != n:
                raise DimensionError("mixed operator sizes")
            bit = 1 << r
            for j in range(n):
                if (p.x >> j) & 1:
                    self.xcol[j] |= bit
                if (p.z >> j) & 1:
                    self.zcol[j] |= bit
            if p.phase_exp & 1:
                self.p0 |= bit
            if p.phase_exp & 2:
                self.p1 |= bit

    def apply(self, gates: Iterable[CliffordGate]) -> None:
        xcol, zcol = self.xcol, self.zcol
        p0, p1 = self.p0, self.p1
        for g in gates:
            kind = g.kind
            if kind == "H":
                q = g.target
                p1 ^= xcol[q] & zcol[q]
                xcol[q], zcol[q] = zcol[q], xcol[q]
            elif kind == "S":
                v = xcol[g.target]
                p1 ^= p0 & v
                p0 ^= v
                zcol[g.target] ^= v
            else:
                xcol[g.target] ^= xcol[g.control]
                zcol[g.control] ^= zcol[g.target]
        self.p0, self.p1 = p0, p1

    def paulis(self) -> list[PauliOperator]:
        out = []
        for r in range(self.rows):
            x = z = 0
            for j in range(self.n):
                x |= ((self.xcol[j] >> r) & 1) << j
                z |= ((self.zcol[j] >> r) & 1) << j
            k = ((self.p0 >> r) & 1) | (((self.p1 >> r) & 1) << 1)
            out.append(PauliOperator(self.n, x, z, k))
        return out


def conjugate_many(u: CliffordCircuit, paulis: Sequence[PauliOperator]) -> list[PauliOperator]:
    """``[U P U^dag for P in paulis]`` in a single bit-sliced pass over the gates."""
    frame = _SlicedFrame(paulis, u.n)
    frame.apply(u.gates)
    return frame.paulis()


@dataclass(frozen=True)
class CliffordTableau:
    """Images of the generators ``X_j`` and ``Z_j`` under conjugation."""

    n: int
    x_images: tuple[PauliOperator, ...]
    z_images: tuple[PauliOperator, ...]

    @classmethod
    def identity(cls, n: int) -> "CliffordTableau":
        return cls(n, tuple(PauliOperator(n, 1 << j) for j in range(n)),
                   tuple(PauliOperator(n, 0, 1 << j) for j in range(n)))

    def conjugate(self, p: PauliOperator) -> PauliOperator:
        if p.n != self.n:
            raise DimensionError(f"{self.n}-qubit tableau applied to {p.n}-qubit operator")
        acc = PauliOperator(self.n, 0, 0, p.phase_exp)
        for j in range(self.n):
            if (p.x >> j) & 1:
                acc = pauli_mul(acc, self.x_images[j])
            if (p.z >> j) & 1:
                acc = pauli_mul(acc, self.z_images[j])
        return acc

    def preserves_symplectic_form(self) -> bool:
        imgs = self.x_images + self.z_images
        gens = CliffordTableau.identity(self.n)
        gen_list = gens.x_images + gens.z_images
        for a in range(2 * self.n):
            for b in range(a + 1, 2 * self.n):
                if imgs[a].commutes(imgs[b]) != gen_list[a].commutes(gen_list[b]):
                    return False
        return all(p.is_hermitian() for p in imgs)


def compile_tableau(u: CliffordCircuit) -> CliffordTableau:
    gens = CliffordTableau.identity(u.n)
    images = conjugate_many(u, gens.x_images + gens.z_images)
    return CliffordTableau(u.n, tuple(images[: u.n]), tuple(images[u.n:]))


# text format ------------------------------------------------------------

_ALIASES = {
    "SDG": lambda q: [S(q), S(q), S(q)],
    "S_DAG": lambda q: [S(q), S(q), S(q)],
    "Z": lambda q: [S(q), S(q)],
    "X": lambda q: [H(q), S(q), S(q), H(q)],
    "Y": lambda q: [S(q), S(q), H(q), S(q), S(q), H(q)],
}
_ALIASES2 = {
    "CX": lambda a, b: [CNOT(a, b)],
    "CZ": lambda a, b: [H(b), CNOT(a, b), H(b)],
    "SWAP": lambda a, b: [CNOT(a, b), CNOT(b, a), CNOT(a, b)],
}


class CircuitFormatError(ValueError):
    pass


def parse_gate_line(line: str, lineno: int = 0) -> list[CliffordGate]:
    parts = line.split()
    name = parts[0].upper()
    try:
        args = [int(a) for a in parts[1:]]
    except ValueError:
        raise CircuitFormatError(f"line {lineno}: non-integer qubit index in {line!r}") from None
    if name in ("H", "S") or name in _ALIASES:
        if len(args) != 1:
            raise CircuitFormatError(f"line {lineno}: {name} takes one qubit")
        return [CliffordGate(name, args[0])] if name in ("H", "S") else _ALIASES[name](args[0])
    if name == "CNOT" or name in _ALIASES2:
        if len(args) != 2:
            raise CircuitFormatError(f"line {lineno}: {name} takes two qubits")
        if args[0] == args[1]:
            raise CircuitFormatError(f"line {lineno}: {name} on a single qubit")
        return [CNOT(*args)] if name == "CNOT" else _ALIASES2[name](*args)
    raise CircuitFormatError(f"line {lineno}: unknown gate {parts[0]!r}")


def parse_circuit(text: str, n: int | None = None) -> CliffordCircuit:
    """Read ``H q`` / ``S q`` / ``CNOT c t`` lines (plus aliases, ``#`` comments).

    An optional ``qubits N`` line fixes the arity; otherwise ``n`` or the
    largest index used decides it.
    """
    gates: list[CliffordGate] = []
    declared = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.lower().startswith("qubits"):
            declared = int(line.split()[1])
            continue
        gates.extend(parse_gate_line(line, lineno))
    arity = declared if declared is not None else n
    if arity is None:
        arity = 1 + max((max(g.qubits) for g in gates), default=-1)
    try:
        return CliffordCircuit(arity, tuple(gates))
    except IndexError as exc:
        raise CircuitFormatError(str(exc)) from None
