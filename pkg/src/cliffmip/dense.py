"""Brute-force statevector backend.

This is the independent oracle for everything else in the package: gates
are applied as explicit matrices, probabilities come from the Born rule and
conditioning is literal projection. Nothing here uses the symplectic
machinery of :mod:`cliffmip.pauli` or :mod:`cliffmip.clifford`.

Qubit 0 is the most significant bit of the basis index, so the amplitude
of ``|b_0 b_1 ... b_{n-1}>`` sits at ``int("b_0b_1...", 2)``.
"""
from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .clifford import CliffordCircuit, CliffordGate
from .elements import Controlled, Measure, ModelError, TGate, UnitaryGate
from .pauli import PauliOperator

NORM_TOL = 1e-12
DIST_TOL = 1e-9

_SQ2 = 1 / math.sqrt(2)
I2 = np.eye(2, dtype=complex)
X_MAT = np.array([[0, 1], [1, 0]], dtype=complex)
Y_MAT = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z_MAT = np.array([[1, 0], [0, -1]], dtype=complex)
H_MAT = np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex)
S_MAT = np.array([[1, 0], [0, 1j]], dtype=complex)
T_MAT = np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=complex)
CNOT_MAT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


class ConditioningError(ValueError):
    """Conditioning on an outcome of probability zero."""


class ResourceError(RuntimeError):
    """The dense register would exceed the configured qubit cap."""


@dataclass
class DenseState:
    n: int
    amps: np.ndarray

    def __post_init__(self):
        self.amps = np.asarray(self.amps, dtype=complex).reshape(-1)
        if self.amps.size != 2**self.n:
            raise ValueError(f"{self.amps.size} amplitudes for {self.n} qubits")
        if not self.is_normalized():
            raise ValueError(f"state has norm {self.norm()!r}, expected 1 within {NORM_TOL}")

    @classmethod
    def zero(cls, n: int) -> "DenseState":
        v = np.zeros(2**n, dtype=complex)
        v[0] = 1
        return cls(n, v)

    @classmethod
    def basis(cls, bits: str) -> "DenseState":
        v = np.zeros(2 ** len(bits), dtype=complex)
        v[int(bits, 2) if bits else 0] = 1
        return cls(len(bits), v)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.norm() - 1) <= tol

    def copy(self) -> "DenseState":
        return DenseState(self.n, self.amps.copy())

    def amplitude(self, bits: str) -> complex:
        return complex(self.amps[int(bits, 2) if bits else 0])


# matrices -----------------------------------------------------------------

def gate_matrix(el) -> tuple[np.ndarray, tuple[int, ...]]:
    if isinstance(el, CliffordGate):
        if el.kind == "H":
            return H_MAT, (el.target,)
        if el.kind == "S":
            return S_MAT, (el.target,)
        return CNOT_MAT, (el.control, el.target)
    if isinstance(el, TGate):
        return T_MAT, (el.target,)
    if isinstance(el, UnitaryGate):
        return el.array(), el.qubits
    raise TypeError(f"no matrix for {el!r}")


def pauli_matrix(p: PauliOperator) -> np.ndarray:
    m = np.array([[1]], dtype=complex)
    for j in range(p.n):
        f = I2
        if (p.x >> j) & 1:
            f = X_MAT
        if (p.z >> j) & 1:
            f = f @ Z_MAT
        m = np.kron(m, f)
    return (1j**p.phase_exp) * m


def embed_matrix(matrix: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    """Full ``2^n x 2^n`` matrix of ``matrix`` acting on ``qubits``."""
    cols = np.eye(2**n, dtype=complex)
    out = np.empty_like(cols)
    for c in range(2**n):
        out[:, c] = apply_matrix(cols[:, c], n, matrix, qubits)
    return out


def circuit_matrix(u: CliffordCircuit | Iterable, n: int | None = None) -> np.ndarray:
    if isinstance(u, CliffordCircuit):
        n, gates = u.n, u.gates
    else:
        gates = list(u)
    m = np.eye(2**n, dtype=complex)
    for g in gates:
        mat, qs = gate_matrix(g)
        m = embed_matrix(mat, qs, n) @ m
    return m


# vector kernels -------------------------------------------------------------

def apply_matrix(vec: np.ndarray, n: int, matrix: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    k = len(qubits)
    if any(not 0 <= q < n for q in qubits):
        raise IndexError(f"qubits {tuple(qubits)} outside {n}-qubit register")
    psi = np.moveaxis(vec.reshape([2] * n), list(qubits), list(range(k)))
    shape = psi.shape
    psi = (matrix @ psi.reshape(2**k, -1)).reshape(shape)
    return np.moveaxis(psi, list(range(k)), list(qubits)).reshape(-1)


def apply_pauli(vec: np.ndarray, n: int, p: PauliOperator, positions: Sequence[int] | None = None) -> np.ndarray:
    """Apply ``p`` with its qubit ``k`` acting on register qubit ``positions[k]``."""
    if positions is None:
        positions = range(p.n)
    out = vec
    for k, q in enumerate(positions):
        xk, zk = (p.x >> k) & 1, (p.z >> k) & 1
        if zk:
            out = apply_matrix(out, n, Z_MAT, (q,))
        if xk:
            out = apply_matrix(out, n, X_MAT, (q,))
    return (1j**p.phase_exp) * out


def _marginal(vec: np.ndarray, n: int, indices: Sequence[int]) -> np.ndarray:
    probs = (np.abs(vec) ** 2).reshape([2] * n)
    others = tuple(q for q in range(n) if q not in indices)
    marg = probs.sum(axis=others) if others else probs
    kept = sorted(indices)
    return np.transpose(marg, [kept.index(q) for q in indices]).reshape(-1)


def project(vec: np.ndarray, n: int, indices: Sequence[int], outcome: str) -> np.ndarray:
    """Unnormalised ``(|outcome><outcome| (x) I) vec``."""
    if len(outcome) != len(indices):
        raise ValueError("one outcome bit per measured qubit required")
    psi = vec.reshape([2] * n).copy()
    for q, b in zip(indices, outcome):
        sl = [slice(None)] * n
        sl[q] = 1 - int(b)
        psi[tuple(sl)] = 0
    return psi.reshape(-1)


def extend(vec: np.ndarray, bits: str) -> np.ndarray:
    """``vec (x) |bits>`` (new qubits are appended at the end)."""
    if not bits:
        return vec
    e = np.zeros(2 ** len(bits), dtype=complex)
    e[int(bits, 2)] = 1
    return np.kron(vec, e)


# public operations ------------------------------------------------------------

def apply(state: DenseState, element, question: str = "") -> DenseState:
    """Exact action of one unitary circuit element.

    ``question`` supplies the classical bits read by :class:`Controlled`.
    """
    if isinstance(element, Measure):
        raise TypeError("measurements branch; use measure_distribution / condition")
    if isinstance(element, Controlled):
        if question[element.bit] != "1":
            return state.copy()
        element = element.gate
    mat, qs = gate_matrix(element)
    if not np.allclose(mat.conj().T @ mat, np.eye(mat.shape[0]), atol=1e-10, rtol=0):
        raise ModelError("non-unitary block")
    return DenseState(state.n, apply_matrix(state.amps, state.n, mat, qs))


def apply_circuit(state: DenseState, elements: Iterable, question: str = "") -> DenseState:
    for el in elements:
        state = apply(state, el, question)
    return state


def measure_distribution(state: DenseState, indices: Sequence[int]) -> dict[str, float]:
    marg = _marginal(state.amps, state.n, list(indices))
    k = len(indices)
    return {format(b, f"0{k}b") if k else "": float(p) for b, p in enumerate(marg)}


def condition(state: DenseState, indices: Sequence[int], outcome: str, tol: float = 1e-15) -> DenseState:
    v = project(state.amps, state.n, list(indices), outcome)
    nrm = np.linalg.norm(v)
    if nrm**2 <= tol:
        raise ConditioningError(f"outcome {outcome!r} on qubits {tuple(indices)} has probability zero")
    return DenseState(state.n, v / nrm)


def bell_state() -> DenseState:
    return DenseState(2, np.array([_SQ2, 0, 0, _SQ2], dtype=complex))


def ghz_state(n: int) -> DenseState:
    v = np.zeros(2**n, dtype=complex)
    v[0] = v[-1] = _SQ2
    return DenseState(n, v)


def total_variation(p: dict, q: dict) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(float(p.get(k, 0.0)) - float(q.get(k, 0.0))) for k in keys)


# file format: one "index re im" triple per line -------------------------------

def dump_dense(state: DenseState, tol: float = 0.0) -> str:
    lines = [f"{state.n}"]
    for idx, a in enumerate(state.amps):
        if abs(a) > tol:
            lines.append(f"{idx} {float(a.real)!r} {float(a.imag)!r}")
    return "\n".join(lines) + "\n"


def load_dense(text: str) -> DenseState:
    rows = [ln.split("#", 1)[0].split() for ln in text.splitlines()]
    rows = [r for r in rows if r]
    n = int(rows[0][0])
    v = np.zeros(2**n, dtype=complex)
    for r in rows[1:]:
        v[int(r[0])] = complex(float(r[1]), float(r[2]))
    return _normalized(n, v)


def _normalized(n: int, v: np.ndarray) -> DenseState:
    # files may carry rounded amplitudes; accept them if close, then renormalize
    nrm = np.linalg.norm(v)
    if abs(nrm - 1) > DIST_TOL:
        raise ValueError(f"dense state has norm {nrm}")
    return DenseState(n, v / nrm)


def to_json(state: DenseState) -> dict:
    return {"n": state.n,
            "amplitudes": [[i, float(a.real), float(a.imag)] for i, a in enumerate(state.amps) if a != 0]}


def from_json(data: dict) -> DenseState:
    n = int(data["n"])
    v = np.zeros(2**n, dtype=complex)
    for i, re, im in data["amplitudes"]:
        v[int(i)] = complex(re, im)
    return _normalized(n, v)
