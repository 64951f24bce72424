"""Seeded random Paulis, circuits, states, protocols and strategies."""
from __future__ import annotations

import itertools

import numpy as np

from .boolcircuit import BoolCircuit
from .clifford import CNOT, CliffordCircuit, H, S
from .dense import DenseState
from .elements import Measure
from .pauli import PauliOperator
from .protocol import Protocol, QuestionTable, TruthTable, all_bitstrings
from .rng import SplitMix64
from .stabilizer import StabilizerState
from .strategy import ProverProgram, QuantumStrategy


def random_pauli(n: int, rng: SplitMix64, hermitian: bool = False) -> PauliOperator:
    x, z = rng.randbelow(1 << n), rng.randbelow(1 << n)
    p = PauliOperator(n, x, z, rng.randbelow(4))
    if hermitian and not p.is_hermitian():
        p = p.with_phase(p.phase_exp + 1)
    return p


def random_gates(n: int, m: int, rng: SplitMix64) -> list:
    gates = []
    for _ in range(m):
        kind = rng.randbelow(3)
        if kind == 2 and n > 1:
            c = rng.randbelow(n)
            t = rng.randbelow(n - 1)
            gates.append(CNOT(c, t + (t >= c)))
        elif kind == 0:
            gates.append(H(rng.randbelow(n)))
        else:
            gates.append(S(rng.randbelow(n)))
    return gates


def random_circuit(n: int, m: int, rng: SplitMix64) -> CliffordCircuit:
    return CliffordCircuit(n, tuple(random_gates(n, m, rng)))


def random_stabilizer_state(n: int, rng: SplitMix64) -> StabilizerState:
    st = StabilizerState.zero(n)
    st.apply_circuit(random_circuit(n, 8 * n + 4, rng))
    return st


def random_dense_state(n: int, rng: SplitMix64) -> DenseState:
    v = np.array([complex(rng.normal(), rng.normal()) for _ in range(2**n)])
    return DenseState(n, v / np.linalg.norm(v))


def random_post(width: int, rng: SplitMix64) -> BoolCircuit:
    """A one-output boolean function of the measured bits."""
    if width == 1:
        return BoolCircuit(1, (("NOT", 0),), (1,)) if rng.bit() else BoolCircuit(1, (), (0,))
    op = ("XOR", "AND", "OR")[rng.randbelow(3)]
    return BoolCircuit(width, ((op, 0, 1),), (width,))


def _subset(d: int, k: int, rng: SplitMix64) -> tuple[int, ...]:
    pool = list(range(d))
    out = []
    for _ in range(min(k, d)):
        out.append(pool.pop(rng.randbelow(len(pool))))
    return tuple(out)


def random_strategy(K: int, R: int, rng: SplitMix64, *, max_qubits: int = 4, max_gates: int = 40,
                    post: bool = False, dense_state: bool = False, max_measured: int = 2) -> QuantumStrategy:
    """Random Clifford-model strategy.

    Every prover's register, questions and write-back qubits together stay
    within ``max_qubits``. With ``post`` some rounds contain intermediate
    measurements and post-processing; otherwise each round is a Clifford
    circuit followed by one raw measurement.
    """
    programs, sizes = [], []
    for _ in range(K):
        q_widths = [rng.randbelow(2) for _ in range(R)]
        budget = max_qubits - sum(q_widths)
        held = 1 + rng.randbelow(max(1, budget - (1 if post else 0)))
        held = max(1, min(held, budget))
        spare = budget - held
        d = held
        rounds = []
        for r in range(R):
            d += q_widths[r]
            prog = []
            if post and spare > 0 and rng.bit():
                prog += random_gates(d, rng.randbelow(max_gates // 2 + 1), rng)
                k = 1 + rng.randbelow(min(2, d))
                prog.append(Measure(_subset(d, k, rng), random_post(k, rng)))
                d += 1
                spare -= 1
            prog += random_gates(d, rng.randbelow(max_gates + 1), rng)
            k = 1 + rng.randbelow(min(max_measured, d))
            final_post = None
            if post and spare > 0 and rng.bit():
                final_post = random_post(k, rng)
                spare -= 1
            prog.append(Measure(_subset(d, k, rng), final_post))
            if final_post is not None:
                d += final_post.n_outputs
            rounds.append(tuple(prog))
        sizes.append(held)
        programs.append((tuple(rounds), tuple(q_widths)))
    n = sum(sizes)
    state = random_dense_state(n, rng) if dense_state else random_stabilizer_state(n, rng)
    out, offset = [], 0
    for (rounds, qw), held in zip(programs, sizes):
        out.append(ProverProgram(tuple(range(offset, offset + held)), rounds, qw))
        offset += held
    return QuantumStrategy(state, tuple(out), "random")


def protocol_for(strategy: QuantumStrategy, rng: SplitMix64, name: str = "random") -> Protocol:
    """Random protocol matching the strategy's widths.

    Questions are drawn from a random full-support distribution; the first
    round's row is shared, later rounds get a row per history. The predicate
    is a random truth table.
    """
    K, R = strategy.K, strategy.R
    qw = tuple(tuple(p.question_widths[r] for p in strategy.programs) for r in range(R))
    aw = tuple(tuple(p.answer_width(r) for p in strategy.programs) for r in range(R))
    rows = []
    for r in range(R):
        blocks = list(itertools.product(*[all_bitstrings(w) for w in qw[r]]))
        weights = [1 + rng.randbelow(4) for _ in blocks]
        total = sum(weights)
        rows.append({"*": tuple((tuple(b), w / total) for b, w in zip(blocks, weights))})
    width = sum(sum(qw[r]) + sum(aw[r]) for r in range(R))
    accept = frozenset(b for b in all_bitstrings(width) if rng.bit())
    return Protocol(K, R, qw, aw, QuestionTable(tuple(rows)), TruthTable(width, accept), name)


def random_questions(protocol: Protocol, rng: SplitMix64) -> tuple[tuple[str, ...], ...]:
    return tuple(tuple(rng.bits(w) for w in protocol.q_widths[r]) for r in range(protocol.R))
