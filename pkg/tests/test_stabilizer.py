from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cliffmip.clifford import CNOT, CliffordCircuit, H
from cliffmip.generators import random_circuit, random_stabilizer_state
from cliffmip.pauli import PauliOperator
from cliffmip.rng import SplitMix64
from cliffmip.stabilizer import (StabilizerError, StabilizerState, apply_clifford, exact_outcome_distribution,
                                 init_zero, load_stabilizer, measure, outcome_probability, to_dense)

import oracle

P = PauliOperator.from_label


def dense_distribution(state, qubits):
    """Born marginal from the oracle's own stabilizer expansion."""
    psi = oracle.stabilizer_vector(state).reshape((2,) * state.n)
    probs = np.abs(psi) ** 2
    others = tuple(q for q in range(state.n) if q not in qubits)
    marg = probs.sum(axis=others) if others else probs
    marg = np.transpose(marg, [sorted(qubits).index(q) for q in qubits])
    return {"".join(map(str, idx)): float(marg[idx]) for idx in np.ndindex(marg.shape)}


def random_instance(seed):
    rng = SplitMix64(seed)
    n = 1 + rng.randbelow(5)
    st_ = init_zero(n)
    st_.apply_circuit(random_circuit(n, rng.randbelow(61), rng))
    k = 1 + rng.randbelow(n)
    order = list(range(n))
    qubits = [order.pop(rng.randbelow(len(order))) for _ in range(k)]
    return st_, qubits


# examples ---------------------------------------------------------------------

def test_init_zero_stabilizers():
    assert init_zero(1).stabilizers() == [P("Z")]
    assert init_zero(2).stabilizers() == [P("ZI"), P("IZ")]
    v = to_dense(init_zero(3)).amps
    assert abs(abs(v[0]) - 1) < 1e-12


def test_apply_clifford_examples():
    z = init_zero(2)
    assert apply_clifford(z, CliffordCircuit(2)).stabilizers() == z.stabilizers()
    assert apply_clifford(init_zero(1), CliffordCircuit(1, (H(0),))).stabilizers() == [P("X")]
    bell = apply_clifford(z, CliffordCircuit(2, (H(0), CNOT(0, 1))))
    group = {str(s) for s in bell.stabilizers()}
    assert group == {str(P("XX")), str(P("ZZ"))}


def test_measure_zero_is_deterministic():
    bit, det, _ = measure(init_zero(1), 0, SplitMix64(0))
    assert (bit, det) == (0, True)


def test_measure_plus_state_frequency():
    plus = apply_clifford(init_zero(1), CliffordCircuit(1, (H(0),)))
    rng = SplitMix64(11)
    shots = 100_000
    ones = 0
    for _ in range(shots):
        bit, det, _ = measure(plus, 0, rng)
        assert not det
        ones += bit
    assert abs(ones - shots / 2) < 3 * np.sqrt(shots / 4)


def test_bell_outcomes_agree():
    bell = apply_clifford(init_zero(2), CliffordCircuit(2, (H(0), CNOT(0, 1))))
    rng = SplitMix64(5)
    for _ in range(200):
        a, _, after = measure(bell, 0, rng)
        b, det, _ = measure(after, 1, rng)
        assert det and a == b


def test_outcome_probability_examples():
    assert outcome_probability(init_zero(1), 0, 0) == 1
    plus = apply_clifford(init_zero(1), CliffordCircuit(1, (H(0),)))
    assert outcome_probability(plus, 0, 1) == Fraction(1, 2)
    assert outcome_probability(StabilizerState.basis("1"), 0, 0) == 0


def test_index_errors():
    with pytest.raises(IndexError):
        init_zero(1).outcome_probability(1, 0)


def test_from_generators_rejects_bad_sets():
    with pytest.raises(StabilizerError):
        StabilizerState.from_generators([P("XI"), P("ZI")])
    with pytest.raises(StabilizerError):
        StabilizerState.from_generators([P("ZZ"), P("ZZ")])


def test_text_round_trip():
    ghz = StabilizerState.from_generators([P("XXX"), P("ZZI"), P("IZZ")])
    again = load_stabilizer(ghz.to_text())
    assert exact_outcome_distribution(again, [0, 1, 2]) == {"000": Fraction(1, 2), "111": Fraction(1, 2)}


def test_minus_sign_generator():
    st_ = load_stabilizer("2\n-ZI\ni^0 · IX\n")
    assert exact_outcome_distribution(st_, [0, 1]) == {"10": Fraction(1, 2), "11": Fraction(1, 2)}


# properties -----------------------------------------------------------------------

@given(st.integers(0, 2**63))
def test_distribution_matches_dense(seed):
    state, qubits = random_instance(seed)
    exact = exact_outcome_distribution(state, qubits)
    want = dense_distribution(state, qubits)
    assert sum(exact.values()) == 1
    for k, p in want.items():
        assert abs(float(exact.get(k, 0)) - p) < 1e-12


@given(st.integers(0, 2**63))
def test_tableau_stays_valid(seed):
    rng = SplitMix64(seed)
    state = random_stabilizer_state(1 + rng.randbelow(5), rng)
    for _ in range(5):
        q = rng.randbelow(state.n)
        state.measure_inplace(q, rng)
        state.apply_circuit(random_circuit(state.n, 10, rng))
        assert state.is_valid()


@given(st.integers(0, 2**63))
def test_to_dense_is_stabilized(seed):
    rng = SplitMix64(seed)
    state = random_stabilizer_state(1 + rng.randbelow(5), rng)
    v = to_dense(state).amps
    for s in state.stabilizers():
        assert np.allclose(oracle.pauli_dense(s) @ v, v, atol=1e-12)


@given(st.integers(0, 2**63))
def test_add_qubits_appends_basis_state(seed):
    rng = SplitMix64(seed)
    state = random_stabilizer_state(1 + rng.randbelow(3), rng)
    bits = rng.bits(1 + rng.randbelow(2))
    before = exact_outcome_distribution(state, list(range(state.n)))
    new = state.copy()
    idx = new.add_qubits(bits)
    after = exact_outcome_distribution(new, list(range(state.n)) + idx)
    assert after == {k + bits: p for k, p in before.items()}


def test_sampling_matches_exact_chi_square():
    from scipy.stats import chisquare
    shots = 10_000
    for seed in range(10):
        state, qubits = random_instance(1000 + seed)
        exact = exact_outcome_distribution(state, qubits)
        rng = SplitMix64(seed)
        counts = Counter()
        for _ in range(shots):
            s = state.copy()
            counts["".join(str(s.measure_inplace(q, rng)[0]) for q in qubits)] += 1
        assert set(counts) <= set(exact)
        keys = sorted(exact)
        if len(keys) > 1:
            p = chisquare([counts[k] for k in keys], [float(exact[k]) * shots for k in keys]).pvalue
            assert p > 0.001, (seed, p)
