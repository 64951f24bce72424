"""Constructors for the bundled games; ``python -m cliffmip.games.build`` rewrites the data files.

Expected values carry a provenance tag saying how they were obtained
independently of the enumeration that the test suite re-runs.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

from ..boolcircuit import BoolCircuit
from ..clifford import CNOT, H, S
from ..elements import Controlled, Measure, TGate
from ..pauli import PauliOperator
from ..protocol import Protocol, QuestionTable, hex_key, protocol_to_json, uniform_row
from ..stabilizer import StabilizerState
from ..strategy import (ClassicalStrategy, ConstantResponse, ProverProgram, QuantumStrategy,
                        strategy_to_json)

DATA = Path(__file__).parent / "data"
COS2 = math.cos(math.pi / 8) ** 2
SIN2 = math.sin(math.pi / 8) ** 2


def _xor_circuit() -> BoolCircuit:
    return BoolCircuit(2, (("XOR", 0, 1),), (2,))


def _stab(*labels: str) -> StabilizerState:
    return StabilizerState.from_generators([PauliOperator.from_label(l) for l in labels])


def _constant(answers: list[str], name: str, R: int = 1) -> ClassicalStrategy:
    return ClassicalStrategy(tuple(tuple(ConstantResponse(a) for _ in range(R)) for a in answers), name=name)


# CHSH ------------------------------------------------------------------------------

def chsh_protocol() -> Protocol:
    # inputs q0 q1 a0 a1; accept iff a0 xor a1 == q0 and q1
    v = BoolCircuit(4, (("AND", 0, 1), ("XOR", 2, 3), ("XOR", 4, 5), ("NOT", 6)), (7,))
    row = uniform_row((a, b) for a in "01" for b in "01")
    return Protocol(2, 1, ((1, 1),), ((1, 1),), QuestionTable(({"*": row},)), v, "chsh")


def _bell() -> StabilizerState:
    return _stab("XX", "ZZ")


def chsh_strategies() -> dict:
    bell = _bell()
    # local register: [question, share]
    # Alice: Z basis on question 0, Y basis (S^dag then H) on question 1
    alice_opt = (Controlled(S(1), 0), Controlled(S(1), 0), Controlled(S(1), 0), Controlled(H(1), 0),
                 Measure((1,)))
    # Bob: H T^dag H rotates by -pi/4 about X; question 1 adds H S H, a further +pi/2
    bob_opt = ((H(1),) + (TGate(1),) * 7 + (H(1),)
               + (Controlled(H(1), 0), Controlled(S(1), 0), Controlled(H(1), 0), Measure((1,))))
    quantum = QuantumStrategy(bell, (
        ProverProgram((0,), (alice_opt,), (1,), unrestricted=True),
        ProverProgram((1,), (bob_opt,), (1,), unrestricted=True)), "quantum_optimal")
    clifford = QuantumStrategy(bell, (
        ProverProgram((0,), ((H(1), Measure((1,))),), (1,)),
        ProverProgram((1,), ((CNOT(0, 1), H(1), Measure((1,))),), (1,))), "clifford_only")
    one_t = QuantumStrategy(bell, (
        ProverProgram((0,), ((Measure((1,)),),), (1,)),
        ProverProgram((1,), ((H(1), TGate(1), H(1), Measure((1,))),), (1,), unrestricted=True)),
        "one_nonclifford")
    return {
        "classical_best": (_constant(["0", "0"], "classical_best"),
                           0.75, "brute force over the 16 deterministic strategies"),
        "quantum_optimal": (quantum, COS2, "Tsirelson value cos^2(pi/8)"),
        "clifford_only": (clifford, 0.75, "analytic: X outcomes on a Bell pair agree"),
        "one_nonclifford": (one_t, 0.25 + 0.5 * COS2,
                            "analytic: outcomes agree w.p. cos^2(pi/8) for every question"),
    }


# GHZ ---------------------------------------------------------------------------------

def ghz3_protocol() -> Protocol:
    # inputs q0 q1 q2 a0 a1 a2; accept iff a0^a1^a2 == q0|q1|q2
    v = BoolCircuit(6, (("OR", 0, 1), ("OR", 6, 2), ("XOR", 3, 4), ("XOR", 8, 5), ("XOR", 9, 7),
                        ("NOT", 10)), (11,))
    row = uniform_row(tuple(q) for q in ("000", "011", "101", "110"))
    return Protocol(3, 1, ((1, 1, 1),), ((1, 1, 1),), QuestionTable(({"*": row},)), v, "ghz3")


def ghz3_strategies() -> dict:
    ghz = _stab("XXX", "ZZI", "IZZ")
    # X basis on question 0, Y basis on question 1 (S^dag as S^3, then H)
    ctrl = (Controlled(S(1), 0), Controlled(S(1), 0), Controlled(S(1), 0), H(1), Measure((1,)))
    controlled = QuantumStrategy(ghz, tuple(ProverProgram((i,), (ctrl,), (1,), unrestricted=True)
                                            for i in range(3)), "controlled_ghz")
    mixed = QuantumStrategy(ghz, (
        ProverProgram((0,), ((H(1), Measure((1,))),), (1,)),
        ProverProgram((1,), ((CNOT(0, 1), H(1), Measure((1,))),), (1,)),
        ProverProgram((2,), ((TGate(1),) + ctrl,), (1,), unrestricted=True)), "mixed")
    return {
        "classical_best": (_constant(["1", "1", "1"], "classical_best"),
                           0.75, "brute force over the 64 deterministic strategies"),
        "controlled_ghz": (controlled, 1.0, "analytic: XXX = +1, XYY = YXY = YYX = -1 on GHZ"),
        "mixed": (mixed, 0.25 + 0.5 * SIN2,
                  "independent tensor oracle; equals 1/4 + sin^2(pi/8)/2, below the classical 3/4"),
    }


# two-round toy -------------------------------------------------------------------------

def two_round_protocol() -> Protocol:
    """Round 1 is CHSH; round-2 questions echo the round-1 answers, crossed over.

    Prover 0 receives prover 1's first answer, possibly flipped by a fair
    coin, and prover 1 receives prover 0's first answer. Acceptance needs
    the round-1 CHSH condition and round-2 answers whose XOR equals the
    XOR of the round-2 questions.
    """
    row1 = uniform_row((a, b) for a in "01" for b in "01")
    table2 = {}
    for q in ("00", "01", "10", "11"):
        for a in ("00", "01", "10", "11"):
            key = hex_key(q + a)
            b0, b1 = a[1], a[0]
            flip = "1" if b0 == "0" else "0"
            table2[key] = (((b0, b1), 0.5), ((flip, b1), 0.5))
    # wires 0..3: q0 q1 a0 a1 (round 1); 4..7: q0 q1 a0 a1 (round 2)
    gates = (("AND", 0, 1), ("XOR", 2, 3), ("XOR", 8, 9),          # 8, 9, 10: chsh mismatch
             ("XOR", 4, 5), ("XOR", 6, 7), ("XOR", 11, 12),        # 11, 12, 13: round-2 mismatch
             ("OR", 10, 13), ("NOT", 14))                          # 14, 15
    v = BoolCircuit(8, gates, (15,))
    return Protocol(2, 2, ((1, 1), (1, 1)), ((1, 1), (1, 1)),
                    QuestionTable(({"*": row1}, table2)), v, "two_round_toy")


def two_round_strategies() -> dict:
    state = _stab("XXII", "ZZII", "IIXX", "IIZZ")
    # registers: prover 0 holds qubits 0 and 2, prover 1 holds 1 and 3
    # round 1 local: [q, s, t]; round 2 local: [q2, q1, s, t]
    alice = ((H(1), Measure((1,))),
             (CNOT(0, 3), H(3), Measure((3,))))
    bob = ((CNOT(0, 1), H(1), Measure((1,))),
           (CNOT(0, 3), H(3), Measure((3,))))
    plain = QuantumStrategy(state, (ProverProgram((0, 2), alice, (1, 1)),
                                    ProverProgram((1, 3), bob, (1, 1))), "clifford")
    # round 2 with a raw mid-round measurement and an XOR post-processing
    alice_post = ((H(1), Measure((1,))),
                  (H(3), Measure((3,)), S(2), Measure((0, 3), _xor_circuit())))
    copy_bit = BoolCircuit(1, (), (0,))
    negate = BoolCircuit(1, (("NOT", 0),), (1,))
    bob_post = ((CNOT(0, 1), H(1), Measure((1,))),
                (H(3), Measure((3,), copy_bit), CNOT(0, 1), Measure((0,), negate)))
    post = QuantumStrategy(state, (ProverProgram((0, 2), alice_post, (1, 1)),
                                   ProverProgram((1, 3), bob_post, (1, 1))), "clifford_post")
    return {
        "classical_zero": (_constant(["0", "0"], "classical_zero", R=2), 0.375,
                           "hand count: round 1 wins w.p. 3/4, round 2 w.p. 1/2"),
        "clifford": (plain, 0.375, "independent tensor oracle"),
        "clifford_post": (post, 0.375, "independent tensor oracle"),
    }


BUILDERS = {
    "chsh": (chsh_protocol, chsh_strategies),
    "ghz3": (ghz3_protocol, ghz3_strategies),
    "two_round_toy": (two_round_protocol, two_round_strategies),
}


def write_bundle(name: str, root: Path = DATA) -> None:
    make_protocol, make_strategies = BUILDERS[name]
    folder = root / name
    folder.mkdir(parents=True, exist_ok=True)
    (folder / "protocol.json").write_text(json.dumps(protocol_to_json(make_protocol()), indent=1) + "\n")
    manifest = {"name": name, "protocol": "protocol.json", "strategies": {}}
    for sid, (strategy, value, provenance) in make_strategies().items():
        fname = f"{sid}.json"
        (folder / fname).write_text(json.dumps(strategy_to_json(strategy), indent=1) + "\n")
        manifest["strategies"][sid] = {"file": fname, "value": value, "provenance": provenance}
    (folder / "bundle.json").write_text(json.dumps(manifest, indent=1) + "\n")


def main() -> None:
    for name in BUILDERS:
        write_bundle(name)


if __name__ == "__main__":
    main()
