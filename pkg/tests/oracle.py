"""Independent brute-force oracle for strategy history distributions.

Shares no simulation code with the package: the joint state is a tensor
with one axis per qubit (fresh qubits become trailing axes), gates are
applied with einsum from hand-written matrices, stabilizer states are
expanded from their generators by projection, and branches stay
unnormalized so a branch's squared norm is its probability.
"""
from __future__ import annotations

import itertools

import numpy as np

from cliffmip.clifford import CliffordGate
from cliffmip.elements import Controlled, Measure, TGate, UnitaryGate
from cliffmip.protocol import History
from cliffmip.stabilizer import StabilizerState

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
MATS = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "S": np.diag([1, 1j]),
    "T": np.diag([1, np.exp(1j * np.pi / 4)]),
    # control is the first axis
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
}


def pauli_dense(p) -> np.ndarray:
    """Matrix of ``i^k X^x Z^z`` with qubit 0 as the most significant factor."""
    m = np.ones((1, 1), dtype=complex)
    for j in range(p.n):
        f = I2
        if (p.x >> j) & 1:
            f = X
        if (p.z >> j) & 1:
            f = f @ Z
        m = np.kron(m, f)
    return (1j ** p.phase_exp) * m


def stabilizer_vector(state: StabilizerState) -> np.ndarray:
    n = state.n
    dim = 2 ** n
    proj = np.eye(dim, dtype=complex)
    for g in state.stabilizers():
        proj = proj @ (np.eye(dim) + pauli_dense(g)) / 2
    col = int(np.argmax(np.linalg.norm(proj, axis=0)))
    v = proj[:, col]
    return v / np.linalg.norm(v)


def initial_tensor(strategy) -> np.ndarray:
    st = strategy.shared_state
    vec = stabilizer_vector(st) if isinstance(st, StabilizerState) else np.asarray(st.amps, dtype=complex)
    return vec.reshape((2,) * st.n)


def _apply(psi: np.ndarray, mat: np.ndarray, axes: list[int]) -> np.ndarray:
    k = len(axes)
    op = mat.reshape((2,) * (2 * k))
    letters = "abcdefghijklmnopqrstuvwxyz"
    n = psi.ndim
    src = list(letters[:n])
    out = list(src)
    new = list(letters[n:n + k])
    for j, a in enumerate(axes):
        out[a] = new[j]
    spec = "".join(new) + "".join(src[a] for a in axes) + "," + "".join(src) + "->" + "".join(out)
    return np.einsum(spec, op, psi)


def _append_basis(psi: np.ndarray, bits: str) -> np.ndarray:
    for b in bits:
        e = np.zeros(2, dtype=complex)
        e[int(b)] = 1
        psi = np.multiply.outer(psi, e)
    return psi


def _bool_eval(circuit, bits: str) -> str:
    w = [b == "1" for b in bits]
    for g in circuit.gates:
        if g[0] == "NOT":
            w.append(not w[g[1]])
        elif g[0] == "AND":
            w.append(w[g[1]] and w[g[2]])
        elif g[0] == "OR":
            w.append(w[g[1]] or w[g[2]])
        else:
            w.append(w[g[1]] ^ w[g[2]])
    return "".join("1" if w[o] else "0" for o in circuit.outputs)


def _gate(el):
    if isinstance(el, CliffordGate):
        if el.kind == "CNOT":
            return MATS["CNOT"], (el.control, el.target)
        return MATS[el.kind], (el.target,)
    if isinstance(el, TGate):
        return MATS["T"], (el.target,)
    if isinstance(el, UnitaryGate):
        return np.asarray(el.matrix, dtype=complex), el.qubits
    raise TypeError(el)


def circuit_unitary(u) -> np.ndarray:
    """Dense matrix of a Clifford circuit, built column by column."""
    dim = 2 ** u.n
    cols = []
    for c in range(dim):
        psi = np.zeros(dim, dtype=complex)
        psi[c] = 1
        psi = psi.reshape((2,) * u.n)
        for g in u.gates:
            psi = _apply(psi, MATS[g.kind], list(g.qubits))
        cols.append(psi.reshape(-1))
    return np.array(cols).T


def run_program(psi, local, program, question):
    """All ``(answer, psi, local)`` outcomes; local lists axis ids, question first."""
    n0 = psi.ndim
    psi = _append_basis(psi, question)
    local = list(range(n0, n0 + len(question))) + list(local)
    states = [("", psi, local)]
    for el in program:
        nxt = []
        for ans, ps, loc in states:
            if isinstance(el, Measure):
                axes = [loc[q] for q in el.qubits]
                for outcome in itertools.product("01", repeat=len(axes)):
                    sl = [slice(None)] * ps.ndim
                    for a, b in zip(axes, outcome):
                        sl[a] = slice(int(b), int(b) + 1)
                    proj = np.zeros_like(ps)
                    proj[tuple(sl)] = ps[tuple(sl)]
                    if np.vdot(proj, proj).real <= 1e-30:
                        continue
                    raw = "".join(outcome)
                    if el.post is None:
                        nxt.append((raw, proj, loc))
                    else:
                        out = _bool_eval(el.post, raw)
                        m = proj.ndim
                        nxt.append((out, _append_basis(proj, out), list(range(m, m + len(out))) + loc))
            else:
                g = el
                if isinstance(g, Controlled):
                    if question[g.bit] != "1":
                        nxt.append((ans, ps, loc))
                        continue
                    g = g.gate
                mat, qs = _gate(g)
                nxt.append((ans, _apply(ps, mat, [loc[q] for q in qs]), loc))
        states = nxt
    return states


def history_distribution(protocol, strategy) -> dict:
    branches = [(History(), 1.0, initial_tensor(strategy), [list(p.register) for p in strategy.programs])]
    for r in range(protocol.R):
        new = []
        for hist, w, psi, locs in branches:
            for q, pq in protocol.question_row(r, hist):
                if pq <= 0:
                    continue
                partial = [((), psi, locs)]
                for i, prog in enumerate(strategy.programs):
                    step = []
                    for answers, ps, ls in partial:
                        for a, ps2, li in run_program(ps, ls[i], prog.rounds[r], q[i]):
                            step.append((answers + (a,), ps2, ls[:i] + [li] + ls[i + 1:]))
                    partial = step
                for answers, ps, ls in partial:
                    new.append((hist.extend(q, answers), w * pq, ps, ls))
        branches = new
    out: dict = {}
    for hist, w, psi, _ in branches:
        out[hist] = out.get(hist, 0.0) + w * float(np.vdot(psi, psi).real)
    return out


def value(protocol, strategy) -> float:
    return sum(p for h, p in history_distribution(protocol, strategy).items() if protocol.accept(h))


def deterministic_value(protocol) -> float:
    """Best single-round value over all deterministic answer functions."""
    row = protocol.question_row(0, History())
    tables = []
    for i in range(protocol.K):
        qs = ["".join(b) for b in itertools.product("01", repeat=protocol.q_widths[0][i])]
        ans = ["".join(b) for b in itertools.product("01", repeat=protocol.a_widths[0][i])]
        tables.append([dict(zip(qs, c)) for c in itertools.product(ans, repeat=len(qs))])
    best = 0.0
    for combo in itertools.product(*tables):
        v = sum(p for q, p in row if protocol.accept(History().extend(q, tuple(f[x] for f, x in zip(combo, q)))))
        best = max(best, v)
    return best
