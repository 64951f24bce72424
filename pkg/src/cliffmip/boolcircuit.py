"""Acyclic boolean circuits over AND, OR, NOT, XOR.

Used for verifier predicates and for provers' classical post-processing of
measured bits. Wires ``0 .. n_inputs-1`` are inputs; gate ``k`` drives wire
``n_inputs + k`` and may only read lower-numbered wires.
"""
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

_ARITY = {"AND": 2, "OR": 2, "XOR": 2, "NOT": 1}


@dataclass(frozen=True)
class BoolCircuit:
    n_inputs: int
    gates: tuple[tuple, ...] = field(default=())
    outputs: tuple[int, ...] = field(default=())

    def __post_init__(self):
        gates = tuple(tuple(g) for g in self.gates)
        object.__setattr__(self, "gates", gates)
        object.__setattr__(self, "outputs", tuple(self.outputs))
        for k, g in enumerate(gates):
            op = g[0]
            if op not in _ARITY:
                raise ValueError(f"unknown boolean gate {op!r}")
            if len(g) != 1 + _ARITY[op]:
                raise ValueError(f"{op} takes {_ARITY[op]} inputs")
            for w in g[1:]:
                if not 0 <= w < self.n_inputs + k:
                    raise ValueError(f"gate {k} reads wire {w} which is not yet defined")
        n_wires = self.n_inputs + len(gates)
        for w in self.outputs:
            if not 0 <= w < n_wires:
                raise ValueError(f"output wire {w} out of range")

    @property
    def n_outputs(self) -> int:
        return len(self.outputs)

    def evaluate(self, bits: str) -> str:
        if len(bits) != self.n_inputs:
            raise ValueError(f"circuit expects {self.n_inputs} input bits, got {len(bits)}")
        wires = [ch == "1" for ch in bits]
        for g in self.gates:
            op = g[0]
            if op == "NOT":
                wires.append(not wires[g[1]])
            elif op == "AND":
                wires.append(wires[g[1]] and wires[g[2]])
            elif op == "OR":
                wires.append(wires[g[1]] or wires[g[2]])
            else:
                wires.append(wires[g[1]] != wires[g[2]])
        return "".join("1" if wires[w] else "0" for w in self.outputs)

    __call__ = evaluate

    def is_identity(self) -> bool:
        return not self.gates and self.outputs == tuple(range(self.n_inputs))

    def to_json(self) -> dict:
        return {"inputs": self.n_inputs, "gates": [list(g) for g in self.gates],
                "outputs": list(self.outputs)}

    @classmethod
    def from_json(cls, data: dict) -> "BoolCircuit":
        return cls(int(data["inputs"]), tuple(tuple(g) for g in data.get("gates", ())),
                   tuple(data["outputs"]))


def identity_circuit(n: int) -> BoolCircuit:
    return BoolCircuit(n, (), tuple(range(n)))


def select_circuit(n_inputs: int, positions: Sequence[int]) -> BoolCircuit:
    """Copy the listed input bits to the output, in order."""
    return BoolCircuit(n_inputs, (), tuple(positions))


def chain(first: BoolCircuit, second: BoolCircuit) -> BoolCircuit:
    """Circuit computing ``second(first(bits))``."""
    if first.n_outputs != second.n_inputs:
        raise ValueError("output width of the first circuit must match input width of the second")
    base = first.n_inputs + len(first.gates)
    remap = {w: first.outputs[w] for w in range(second.n_inputs)}

    def wire(w: int) -> int:
        return remap[w] if w < second.n_inputs else base + (w - second.n_inputs)

    gates = list(first.gates)
    for g in second.gates:
        gates.append((g[0],) + tuple(wire(w) for w in g[1:]))
    return BoolCircuit(first.n_inputs, tuple(gates), tuple(wire(w) for w in second.outputs))
