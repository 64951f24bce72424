from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from cliffmip.boolcircuit import BoolCircuit
from cliffmip.clifford import CNOT, CliffordCircuit, H
from cliffmip.dense import circuit_matrix, pauli_matrix
from cliffmip.desim import (PrecomputedInteraction, correction_trace, correction_update, declifford,
                            declifford_mostly, delegate_postprocessing,
                            link_report, precomputed_support, sample_precomputed, verify_state_link)
from cliffmip.elements import Measure, ModelError
from cliffmip.engine import exact_history_distribution, game_value, push_forward, total_variation
from cliffmip.games import load_bundle
from cliffmip.generators import protocol_for, random_questions, random_strategy
from cliffmip.pauli import PauliOperator, tensor, x_correction
from cliffmip.protocol import Protocol, ProtocolError, QuestionTable, TruthTable, uniform_row
from cliffmip.rng import SplitMix64
from cliffmip.stabilizer import StabilizerState
from cliffmip.strategy import ProverProgram, QuantumStrategy, evaluate_classical, is_unitary_then_measure

XOR = BoolCircuit(2, (("XOR", 0, 1),), (2,))


def one_prover(program, held=1, q=1, a=1):
    s = QuantumStrategy(StabilizerState.zero(held), (ProverProgram(tuple(range(held)), (program,), (q,)),))
    row = uniform_row((b,) for b in ("0", "1")[: 2 ** q]) if q == 1 else uniform_row([("",)])
    p = Protocol(1, 1, ((q,),), ((a,),), QuestionTable(({"*": row},)), TruthTable(q + a, frozenset()))
    return p, s


# correction_update ------------------------------------------------------------------

def test_same_question_gives_identity():
    u = CliffordCircuit(3, (H(0), CNOT(0, 2)))
    assert correction_update(u, "1", "1", PauliOperator.identity(2)) == PauliOperator.identity(3)


def test_identity_circuit_leaves_operator():
    prev = PauliOperator.from_label("ZX")
    r = correction_update(CliffordCircuit(3, ()), "1", "0", prev)
    assert r == tensor(x_correction("1", "0"), prev)


def test_cnot_spreads_question_flip():
    u = CliffordCircuit(2, (CNOT(0, 1),))
    r = correction_update(u, "0", "1", PauliOperator.identity(1))
    assert r == PauliOperator.from_label("XX")
    m = circuit_matrix(u)
    prev = tensor(x_correction("0", "1"), PauliOperator.identity(1))
    assert np.allclose(m @ pauli_matrix(prev) @ m.conj().T, pauli_matrix(r), atol=1e-12)


def test_arity_mismatch():
    with pytest.raises(ModelError, match="question qubits"):
        correction_update(CliffordCircuit(3, ()), "1", "0", PauliOperator.identity(1))


# precomputed sampling --------------------------------------------------------------

def test_zero_state_answers_zero():
    p, s = one_prover((Measure((1, 2)),), held=2, q=1, a=2)
    for seed in range(5):
        pre = sample_precomputed(s, p, (("1",),), SplitMix64(seed))
        assert pre.answers == (("00",),)


def test_bell_answers_agree():
    b = load_bundle("chsh")
    s = b.strategies["clifford_only"]
    sup = precomputed_support(s, (("0", "0"),))
    assert sum(p for _, p in sup) == pytest.approx(1)
    assert all(pi.answers[0][0] == pi.answers[0][1] for pi, _ in sup)


def test_precomputed_sampling_frequencies():
    b = load_bundle("two_round_toy")
    s = b.strategies["clifford"]
    qs = (("1", "0"), ("0", "1"))
    exact = {pi.answers: p for pi, p in precomputed_support(s, qs)}
    rng = SplitMix64(5)
    n = 20_000
    counts = Counter(sample_precomputed(s, b.protocol, qs, rng.split()).answers for _ in range(n))
    keys = sorted(exact)
    res = stats.chisquare([counts.get(k, 0) for k in keys], [exact[k] * n for k in keys])
    assert res.pvalue > 1e-3


def test_lambda_encoding_round_trip():
    pi = PrecomputedInteraction((("0", "1"), ("01", "")), (("1", "0"), ("1", "")))
    assert PrecomputedInteraction.decode(pi.encode()) == pi


def test_post_processed_rounds_need_delegation():
    b = load_bundle("two_round_toy")
    with pytest.raises(ModelError, match="delegate"):
        sample_precomputed(b.strategies["clifford_post"], b.protocol, (("0", "0"), ("0", "0")), SplitMix64(0))


# declifford ---------------------------------------------------------------------------

def test_identity_prover_answers_zero():
    p, s = one_prover((Measure((1,)),))
    c = declifford(s, p)
    for q in "01":
        assert evaluate_classical(c, c.support[0][0], 0, 0, (), q) == "0"


@pytest.mark.parametrize("bundle, sid", [("chsh", "clifford_only"), ("two_round_toy", "clifford"),
                                         ("two_round_toy", "clifford_post")])
def test_bundled_clifford_strategies(bundle, sid):
    b = load_bundle(bundle)
    s = b.strategies[sid]
    d = exact_history_distribution(b.protocol, s)
    c = declifford(s, b.protocol)
    assert total_variation(d, exact_history_distribution(b.protocol, c)) <= 1e-9


def test_rejects_non_clifford_with_location():
    b = load_bundle("chsh")
    with pytest.raises(ModelError, match="prover 0 round 0 element 0"):
        declifford(b.strategies["quantum_optimal"], b.protocol)


def test_rejects_bad_hardcoded_questions():
    b = load_bundle("chsh")
    with pytest.raises(ProtocolError):
        declifford(b.strategies["clifford_only"], b.protocol, (("01", "0"),))


@settings(max_examples=25)
@given(st.integers(0, 2**64 - 1))
def test_random_two_round_equivalence(seed):
    rng = SplitMix64(seed)
    s = random_strategy(2, 2, rng, max_gates=20, post=bool(rng.bit()))
    p = protocol_for(s, rng)
    c = declifford(s, p, random_questions(p, rng))
    assert total_variation(exact_history_distribution(p, s), exact_history_distribution(p, c)) <= 1e-9


@settings(max_examples=15)
@given(st.integers(0, 2**64 - 1))
def test_sampled_support_matches_exact(seed):
    rng = SplitMix64(seed)
    s = random_strategy(2, 1, rng, max_gates=10)
    p = protocol_for(s, rng)
    exact = declifford(s, p, support="exact")
    sampled = declifford(s, p, support="sample")
    lam = sampled.sample_lambda(SplitMix64(seed ^ 1))
    assert lam in dict(exact.support)


@settings(max_examples=20)
@given(st.integers(0, 2**64 - 1))
def test_answers_ignore_other_provers_questions(seed):
    """Perturbing other provers' questions never changes prover i's answer."""
    rng = SplitMix64(seed)
    s = random_strategy(3, 2, rng, max_gates=12, post=bool(rng.bit()))
    p = protocol_for(s, rng)
    c = declifford(s, p)
    lam = c.support[rng.randbelow(len(c.support))][0]
    q1, q2 = random_questions(p, rng), random_questions(p, rng)
    for i in range(3):
        mixed = tuple(tuple(a if j == i else b for j, (a, b) in enumerate(zip(r1, r2))) for r1, r2 in zip(q1, q2))
        assert (c.responses[i][-1].program.replay(lam, [q1[r][i] for r in range(2)])
                == c.responses[i][-1].program.replay(lam, [mixed[r][i] for r in range(2)]))


def test_correction_trace_lines():
    b = load_bundle("chsh")
    c = declifford(b.strategies["clifford_only"], b.protocol)
    text = correction_trace(c, c.support[0][0], (("1", "1"),))
    lines = text.splitlines()
    assert len(lines) == 2 and lines[0].startswith("prover 0 round 0.0: ")
    assert "X" in lines[1]


# delegation ------------------------------------------------------------------------------

def test_no_post_processing_delegation_is_trivial():
    b = load_bundle("chsh")
    s = b.strategies["clifford_only"]
    gs, sp = delegate_postprocessing(b.protocol, s)
    assert gs.R == 1 and sp.programs == s.programs


def test_mid_round_xor_makes_two_subrounds():
    state = StabilizerState.from_generators([PauliOperator.from_label(l) for l in ("XX", "ZZ")])
    prog = (H(1), Measure((1, 2), XOR), CNOT(0, 1), Measure((1,)))
    s = QuantumStrategy(state, (ProverProgram((0, 1), (prog,), (1,)),))
    p = Protocol(1, 1, ((1,),), ((1,),), QuestionTable(({"*": uniform_row([("0",), ("1",)])},)),
                 TruthTable(2, frozenset({"00", "11"})))
    gs, sp = delegate_postprocessing(p, s)
    assert gs.R == 2
    d = exact_history_distribution(p, s)
    assert total_variation(d, push_forward(exact_history_distribution(gs, sp), gs.project)) <= 1e-9


def test_identity_post_processing_is_echoed():
    copy = BoolCircuit(1, (), (0,))
    prog = (H(1), Measure((1,), copy), CNOT(0, 2), Measure((2,)))
    s = QuantumStrategy(StabilizerState.zero(1), (ProverProgram((0,), (prog,), (1,)),))
    p = Protocol(1, 1, ((1,),), ((1,),), QuestionTable(({"*": uniform_row([("0",), ("1",)])},)),
                 TruthTable(2, frozenset()))
    gs, sp = delegate_postprocessing(p, s)
    for h, pr in exact_history_distribution(gs, sp).items():
        # the sub-round 2 question carries the verifier's echo of the sub-round 1 reply
        assert h.questions(1)[0][-1] == h.answers(0)[0]


@settings(max_examples=20)
@given(st.integers(0, 2**64 - 1))
def test_delegation_preserves_visible_marginal(seed):
    rng = SplitMix64(seed)
    s = random_strategy(1 + rng.randbelow(3), 1 + rng.randbelow(2), rng, max_gates=12, post=True)
    p = protocol_for(s, rng)
    gs, sp = delegate_postprocessing(p, s)
    assert all(all(row) for row in is_unitary_then_measure(sp))
    d = exact_history_distribution(p, s)
    assert total_variation(d, push_forward(exact_history_distribution(gs, sp), gs.project)) <= 1e-9


# one unrestricted prover ----------------------------------------------------------------

@pytest.mark.parametrize("bundle, sid", [("chsh", "one_nonclifford"), ("ghz3", "mixed")])
def test_mostly_clifford_games(bundle, sid):
    b = load_bundle(bundle)
    s = b.strategies[sid]
    c = declifford_mostly(s, b.protocol)
    d = exact_history_distribution(b.protocol, c)
    assert total_variation(exact_history_distribution(b.protocol, s), d) <= 1e-9
    assert game_value(b.protocol, d) <= 0.75 + 1e-9


def test_mostly_with_all_clifford_is_declifford():
    b = load_bundle("chsh")
    s = b.strategies["clifford_only"]
    a = exact_history_distribution(b.protocol, declifford_mostly(s, b.protocol))
    assert total_variation(a, exact_history_distribution(b.protocol, declifford(s, b.protocol))) <= 1e-12


def test_mostly_rejects_two_unrestricted():
    b = load_bundle("chsh")
    with pytest.raises(ModelError, match="at most one"):
        declifford_mostly(b.strategies["quantum_optimal"], b.protocol)
    t = load_bundle("two_round_toy")
    with pytest.raises(ProtocolError):
        declifford_mostly(t.strategies["clifford"], t.protocol)


# dense identity checks ------------------------------------------------------------------

def test_state_link_zero_for_equal_questions():
    b = load_bundle("chsh")
    s = b.strategies["clifford_only"]
    assert verify_state_link(s, (("1", "0"),), (("1", "0"),)) == 0.0


def test_chsh_state_link():
    b = load_bundle("chsh")
    rep = link_report(b.strategies["clifford_only"], (("0", "0"),), (("1", "1"),))
    assert rep.deviation <= 1e-10 and rep.probability_error <= 1e-9
    assert rep.commutation_error <= 1e-12 and rep.hermitian


@settings(max_examples=20)
@given(st.integers(0, 2**64 - 1))
def test_random_state_link(seed):
    rng = SplitMix64(seed)
    s = random_strategy(2, 1 + rng.randbelow(2), rng, max_gates=15, dense_state=bool(rng.bit()))
    p = protocol_for(s, rng)
    rep = link_report(s, random_questions(p, rng), random_questions(p, rng))
    assert rep.deviation <= 1e-10 and rep.probability_error <= 1e-9
    assert rep.commutation_error <= 1e-12 and rep.hermitian
