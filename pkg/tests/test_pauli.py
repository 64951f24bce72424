import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cliffmip.pauli import (DimensionError, PauliOperator, apply_to_basis, conjugate_projector, pauli_mul,
                            tensor, x_correction)

from oracle import pauli_dense


@st.composite
def paulis(draw, n=None, hermitian=False):
    n = draw(st.integers(0, 5)) if n is None else n
    p = PauliOperator(n, draw(st.integers(0, 2**n - 1)), draw(st.integers(0, 2**n - 1)), draw(st.integers(0, 3)))
    if hermitian and not p.is_hermitian():
        p = p.with_phase(p.phase_exp + 1)
    return p


@st.composite
def pauli_pairs(draw, count=2):
    n = draw(st.integers(0, 5))
    return [draw(paulis(n)) for _ in range(count)]


def basis(bits):
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2) if bits else 0] = 1
    return v


# examples ---------------------------------------------------------------------

def test_identity_is_neutral():
    p = PauliOperator.from_label("XYZ", 1)
    assert pauli_mul(PauliOperator.identity(3), p) == p


def test_x_squared_is_identity():
    x = PauliOperator.from_label("X")
    assert pauli_mul(x, x) == PauliOperator.identity(1)


def test_x_times_z_is_minus_i_y():
    r = pauli_mul(PauliOperator.from_label("X"), PauliOperator.from_label("Z"))
    assert (r.label, r.pauli_phase) == ("Y", 3)
    assert str(r) == "i^3 · Y"
    assert np.array_equal(pauli_dense(r), -1j * np.array([[0, -1j], [1j, 0]]))


def test_x_correction_examples():
    assert x_correction("01", "01") == PauliOperator.identity(2)
    assert x_correction("10", "00") == PauliOperator.from_label("XI")
    assert x_correction("011", "110") == PauliOperator.from_label("XIX")
    with pytest.raises(DimensionError):
        x_correction("0", "01")


def test_apply_to_basis_examples():
    assert apply_to_basis(PauliOperator.from_label("X"), "0") == (0, "1")
    assert apply_to_basis(PauliOperator.from_label("Z"), "1") == (2, "1")
    assert apply_to_basis(PauliOperator.from_label("Y"), "0") == (1, "1")


def test_conjugate_projector_examples():
    assert conjugate_projector(PauliOperator.identity(2), "01", [0, 1]) == "01"
    assert conjugate_projector(PauliOperator.from_label("X"), "0", [0]) == "1"
    assert conjugate_projector(PauliOperator.from_label("ZX"), "01", [0, 1]) == "00"


def test_size_mismatch_raises():
    with pytest.raises(DimensionError):
        pauli_mul(PauliOperator.identity(1), PauliOperator.identity(2))


def test_zero_qubit_pauli_is_a_scalar():
    p = PauliOperator(0, 0, 0, 3)
    assert str(p) == "i^3"
    assert pauli_mul(p, p) == PauliOperator(0, 0, 0, 2)


def test_text_round_trip():
    for text in ("i^0 · XYZI", "i^2 · Y", "i^1 · ZZ", "-iXY", "+Z"):
        p = PauliOperator.parse(text)
        assert PauliOperator.parse(str(p)) == p


# properties against the dense oracle --------------------------------------------

@given(pauli_pairs())
def test_product_matches_dense(pair):
    p, q = pair
    assert np.allclose(pauli_dense(pauli_mul(p, q)), pauli_dense(p) @ pauli_dense(q), atol=1e-12)


@given(pauli_pairs(3))
def test_product_is_associative(triple):
    p, q, r = triple
    assert pauli_mul(pauli_mul(p, q), r) == pauli_mul(p, pauli_mul(q, r))


@given(paulis())
def test_hermitian_flag_matches_dense(p):
    m = pauli_dense(p)
    assert p.is_hermitian() == np.allclose(m, m.conj().T)


@given(paulis(hermitian=True))
def test_hermitian_square_is_identity(p):
    assert pauli_mul(p, p) == PauliOperator.identity(p.n)
    assert p.pauli_phase in (0, 2)


@given(paulis())
def test_adjoint_matches_dense(p):
    assert np.allclose(pauli_dense(p.adjoint()), pauli_dense(p).conj().T)


@given(pauli_pairs())
def test_commutation_matches_dense(pair):
    p, q = pair
    a, b = pauli_dense(p), pauli_dense(q)
    assert p.commutes(q) == np.allclose(a @ b, b @ a)


@given(pauli_pairs())
def test_tensor_matches_kron(pair):
    p, q = pair
    assert np.allclose(pauli_dense(tensor(p, q)), np.kron(pauli_dense(p), pauli_dense(q)))


@given(paulis(), st.data())
def test_apply_to_basis_matches_dense(p, data):
    a = "".join(data.draw(st.sampled_from("01")) for _ in range(p.n))
    phase, b = apply_to_basis(p, a)
    assert b == "".join(str(int(x) ^ int(y)) for x, y in zip(a, p.x_bits))
    assert np.allclose(pauli_dense(p) @ basis(a), (1j ** phase) * basis(b))


@given(paulis(hermitian=True), st.data())
def test_apply_hermitian_twice_round_trips(p, data):
    a = "".join(data.draw(st.sampled_from("01")) for _ in range(p.n))
    k1, b = apply_to_basis(p, a)
    k2, c = apply_to_basis(p, b)
    assert c == a and (k1 + k2) % 4 == 0


@given(paulis(), st.data())
def test_conjugate_projector_matches_dense(p, data):
    if p.n == 0:
        return
    measured = data.draw(st.lists(st.integers(0, p.n - 1), min_size=1, max_size=p.n, unique=True))
    a = "".join(data.draw(st.sampled_from("01")) for _ in measured)
    out = conjugate_projector(p, a, measured)
    # projector onto outcome a on the measured qubits, identity elsewhere
    diag = np.array([all(format(i, f"0{p.n}b")[q] == b for q, b in zip(measured, a)) for i in range(2**p.n)])
    proj = np.diag(diag.astype(complex))
    m = pauli_dense(p)
    conj = m @ proj @ m.conj().T
    want = np.diag(np.array([all(format(i, f"0{p.n}b")[q] == b for q, b in zip(measured, out))
                             for i in range(2**p.n)]).astype(complex))
    assert np.allclose(conj, want)


@given(paulis(), st.data())
def test_conjugate_projector_ignores_z_and_phase(p, data):
    if p.n == 0:
        return
    measured = data.draw(st.lists(st.integers(0, p.n - 1), min_size=1, max_size=p.n, unique=True))
    a = "".join(data.draw(st.sampled_from("01")) for _ in measured)
    other = PauliOperator(p.n, p.x, data.draw(st.integers(0, 2**p.n - 1)), data.draw(st.integers(0, 3)))
    assert conjugate_projector(p, a, measured) == conjugate_projector(other, a, measured)


@given(st.data())
def test_x_correction_maps_y_to_x(data):
    n = data.draw(st.integers(1, 6))
    x = "".join(data.draw(st.sampled_from("01")) for _ in range(n))
    y = "".join(data.draw(st.sampled_from("01")) for _ in range(n))
    assert apply_to_basis(x_correction(x, y), y) == (0, x)
