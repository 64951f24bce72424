import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cliffmip.clifford import (CNOT, CircuitFormatError, CliffordCircuit, CliffordTableau, H, S,
                               compile_tableau, conjugate, conjugate_many, embed, parse_circuit)
from cliffmip.generators import random_circuit, random_pauli
from cliffmip.pauli import DimensionError, PauliOperator
from cliffmip.rng import SplitMix64

from oracle import circuit_unitary as unitary, pauli_dense

P = PauliOperator.from_label


def instance(seed):
    rng = SplitMix64(seed)
    n = 1 + rng.randbelow(5)
    return random_circuit(n, rng.randbelow(51), rng), random_pauli(n, rng)


# examples ---------------------------------------------------------------------

def test_empty_circuit_leaves_pauli():
    p = P("XZY", 2)
    assert conjugate(CliffordCircuit(3), p) == p


def test_h_maps_x_to_z():
    assert conjugate(CliffordCircuit(1, (H(0),)), P("X")) == P("Z")


def test_cnot_spreads_x():
    assert conjugate(CliffordCircuit(2, (CNOT(0, 1),)), P("XI")) == P("XX")


def test_tableau_examples():
    assert compile_tableau(CliffordCircuit(2)) == CliffordTableau.identity(2)
    th = compile_tableau(CliffordCircuit(1, (H(0),)))
    assert (th.x_images[0], th.z_images[0]) == (P("Z"), P("X"))
    ts = compile_tableau(CliffordCircuit(1, (S(0),)))
    assert (ts.x_images[0], ts.z_images[0]) == (P("Y"), P("Z"))


def test_embed_examples():
    u = CliffordCircuit(2, (CNOT(0, 1),))
    assert embed(u, 0, 2) == u
    assert embed(CliffordCircuit(1, (H(0),)), 2, 4).gates == (H(2),)
    assert embed(u, 1, 3).gates == (CNOT(1, 2),)
    with pytest.raises(DimensionError):
        embed(u, 2, 3)


def test_arity_mismatch():
    with pytest.raises(DimensionError):
        conjugate(CliffordCircuit(2), P("X"))


def test_gate_validation():
    with pytest.raises(ValueError):
        CNOT(1, 1)
    with pytest.raises(IndexError):
        CliffordCircuit(1, (H(1),))


def test_text_format_with_aliases():
    u = parse_circuit("qubits 3\nH 0\nS 1  # phase\nCNOT 0 2\nSDG 1\nCZ 0 1\n")
    assert u.n == 3
    assert u.gates[:3] == (H(0), S(1), CNOT(0, 2))
    assert parse_circuit(u.to_text(), 3) == u
    with pytest.raises(CircuitFormatError, match="line 2"):
        parse_circuit("H 0\nFOO 1\n")


def test_swap_alias_swaps():
    u = parse_circuit("SWAP 0 1")
    assert conjugate(u, P("XZ")) == P("ZX")


# properties -----------------------------------------------------------------------

@given(st.integers(0, 2**63))
def test_conjugation_matches_dense(seed):
    u, p = instance(seed)
    m = unitary(u)
    assert np.allclose(pauli_dense(conjugate(u, p)), m @ pauli_dense(p) @ m.conj().T, atol=1e-12)


@given(st.integers(0, 2**63))
def test_tableau_equals_replay(seed):
    u, p = instance(seed)
    assert compile_tableau(u).conjugate(p) == conjugate(u, p)


@given(st.integers(0, 2**63))
def test_sliced_batch_equals_replay(seed):
    rng = SplitMix64(seed)
    u, _ = instance(seed)
    ps = [random_pauli(u.n, rng) for _ in range(5)]
    assert conjugate_many(u, ps) == [conjugate(u, p) for p in ps]


@given(st.integers(0, 2**63))
def test_hermiticity_preserved(seed):
    rng = SplitMix64(seed)
    u, _ = instance(seed)
    p = random_pauli(u.n, rng, hermitian=True)
    assert conjugate(u, p).is_hermitian()


@given(st.integers(0, 2**63))
def test_functoriality(seed):
    rng = SplitMix64(seed)
    u, p = instance(seed)
    v = random_circuit(u.n, rng.randbelow(30), rng)
    assert conjugate(u @ v, p) == conjugate(u, conjugate(v, p))


@given(st.integers(0, 2**63))
def test_tableau_preserves_symplectic_form(seed):
    u, _ = instance(seed)
    assert compile_tableau(u).preserves_symplectic_form()
