"""Prover program elements beyond the Clifford generators.

A prover's per-round program is a list drawn from:

* :class:`~cliffmip.clifford.CliffordGate` (H, S, CNOT);
* :class:`TGate` and :class:`UnitaryGate` (non-Clifford, unrestricted provers only);
* :class:`Controlled`, a Clifford gate applied only when a bit of the
  round's question is 1 (classical control, outside the Clifford model);
* :class:`Measure`, a standard-basis measurement of some local qubits with
  optional classical post-processing of the outcome.

Qubit indices are positions in the prover's local register at the moment
the element runs.
"""
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .boolcircuit import BoolCircuit
from .clifford import CliffordGate, parse_gate_line

UNITARY_TOL = 1e-10


class ModelError(ValueError):
    """A program or strategy violates its declared computational model."""


@dataclass(frozen=True, slots=True)
class TGate:
    target: int

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.target,)

    def remapped(self, mapping: Sequence[int]) -> "TGate":
        return TGate(mapping[self.target])


@dataclass(frozen=True)
class UnitaryGate:
    matrix: tuple[tuple[complex, ...], ...]
    qubits: tuple[int, ...]

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        k = len(self.qubits)
        if k not in (1, 2):
            raise ModelError("unitary blocks act on one or two qubits")
        if len(set(self.qubits)) != k:
            raise ModelError("repeated qubit in unitary block")
        if m.shape != (2**k, 2**k):
            raise ModelError(f"unitary on {k} qubits must be {2**k}x{2**k}")
        if not np.allclose(m.conj().T @ m, np.eye(2**k), atol=UNITARY_TOL, rtol=0):
            raise ModelError("matrix is not unitary within tolerance")
        object.__setattr__(self, "matrix", tuple(tuple(complex(v) for v in row) for row in m))
        object.__setattr__(self, "qubits", tuple(self.qubits))

    @classmethod
    def of(cls, matrix, qubits: Sequence[int]) -> "UnitaryGate":
        return cls(tuple(tuple(complex(v) for v in row) for row in np.asarray(matrix)), tuple(qubits))

    def array(self) -> np.ndarray:
        return np.asarray(self.matrix, dtype=complex)

    def remapped(self, mapping: Sequence[int]) -> "UnitaryGate":
        return UnitaryGate(self.matrix, tuple(mapping[q] for q in self.qubits))


@dataclass(frozen=True, slots=True)
class Controlled:
    gate: CliffordGate
    bit: int

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.gate.qubits

    def remapped(self, mapping: Sequence[int]) -> "Controlled":
        return Controlled(self.gate.remapped(mapping), self.bit)


@dataclass(frozen=True)
class Measure:
    """Measure ``qubits`` in the standard basis.

    The output is ``post(outcome)`` when a post-processing circuit is given,
    else the raw outcome. Post-processed outputs are written back into fresh
    basis-state qubits prepended to the local register, so later elements can
    use them; raw outcomes stay available on the collapsed qubits.
    """

    qubits: tuple[int, ...]
    post: BoolCircuit | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        if len(set(self.qubits)) != len(self.qubits):
            raise ModelError("repeated qubit in measurement")
        if self.post is not None and self.post.n_inputs != len(self.qubits):
            raise ModelError("post-processing input width must equal the number of measured qubits")

    @property
    def output_width(self) -> int:
        return len(self.qubits) if self.post is None else self.post.n_outputs

    @property
    def writes_back(self) -> int:
        return 0 if self.post is None else self.post.n_outputs

    def output(self, outcome: str) -> str:
        return outcome if self.post is None else self.post.evaluate(outcome)

    def remapped(self, mapping: Sequence[int]) -> "Measure":
        return Measure(tuple(mapping[q] for q in self.qubits), self.post)


Element = CliffordGate | TGate | UnitaryGate | Controlled | Measure


def is_clifford_gate(el) -> bool:
    return isinstance(el, CliffordGate)


def element_to_json(el) -> dict:
    if isinstance(el, CliffordGate):
        if el.kind == "CNOT":
            return {"op": "CNOT", "c": el.control, "t": el.target}
        return {"op": el.kind, "q": el.target}
    if isinstance(el, TGate):
        return {"op": "T", "q": el.target}
    if isinstance(el, UnitaryGate):
        return {"op": "U", "qubits": list(el.qubits),
                "matrix": [[[v.real, v.imag] for v in row] for row in el.matrix]}
    if isinstance(el, Controlled):
        return {"op": "CTRL", "bit": el.bit, "gate": element_to_json(el.gate)}
    if isinstance(el, Measure):
        out = {"op": "MEASURE", "qubits": list(el.qubits)}
        if el.post is not None:
            out["post"] = el.post.to_json()
        return out
    raise TypeError(f"not a program element: {el!r}")


def element_from_json(data: dict) -> list:
    """Decode one element; Clifford aliases (CZ, SWAP, SDG, X, Y, Z) expand to several gates."""
    op = str(data["op"]).upper()
    if op == "T":
        return [TGate(int(data["q"]))]
    if op == "U":
        m = [[complex(re, im) for re, im in row] for row in data["matrix"]]
        return [UnitaryGate.of(m, [int(q) for q in data["qubits"]])]
    if op == "CTRL":
        inner = element_from_json(data["gate"])
        return [Controlled(g, int(data["bit"])) for g in inner]
    if op == "MEASURE":
        post = BoolCircuit.from_json(data["post"]) if data.get("post") else None
        return [Measure(tuple(int(q) for q in data["qubits"]), post)]
    if "c" in data:
        return parse_gate_line(f"{op} {int(data['c'])} {int(data['t'])}")
    if "qubits" in data:
        return parse_gate_line(" ".join([op] + [str(int(q)) for q in data["qubits"]]))
    return parse_gate_line(f"{op} {int(data['q'])}")
