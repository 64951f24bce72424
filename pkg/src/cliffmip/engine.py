"""Executing strategies: exact history enumeration and sampled provers.

A *machine* is the joint quantum state of all provers plus each prover's
local register (a list of global qubit indices, question qubits first).
Two machines exist: :class:`DenseMachine` (statevector, any gates) and
:class:`StabilizerMachine` (tableau, Clifford gates only, exact dyadic
probabilities). Exact enumeration copies machines at every measurement
branch; sampling mutates one machine in place.
"""
from __future__ import annotations

import weakref
from collections.abc import Sequence

import numpy as np

from . import dense
from .clifford import CliffordGate
from .dense import ResourceError
from .elements import Controlled, Measure, ModelError
from .protocol import History, LocalHistory, Protocol, ProtocolError, local_view
from .rng import SplitMix64, sample_index
from .stabilizer import StabilizerState, to_dense
from .strategy import ClassicalStrategy, QuantumStrategy

DEFAULT_CAP = 12
PRUNE = 1e-14


class DenseMachine:
    kind = "dense"

    def __init__(self, n: int, vec: np.ndarray, locals_: list[list[int]]):
        self.n = n
        self.vec = vec
        self.locals = locals_

    def copy(self) -> "DenseMachine":
        return DenseMachine(self.n, self.vec.copy(), [list(l) for l in self.locals])

    def add_qubits(self, i: int, bits: str) -> None:
        if not bits:
            return
        self.vec = dense.extend(self.vec, bits)
        self.locals[i] = list(range(self.n, self.n + len(bits))) + self.locals[i]
        self.n += len(bits)

    def apply(self, i: int, el, question: str) -> None:
        if isinstance(el, Controlled):
            if question[el.bit] != "1":
                return
            el = el.gate
        mat, qs = dense.gate_matrix(el)
        self.vec = dense.apply_matrix(self.vec, self.n, mat, [self.locals[i][q] for q in qs])

    def apply_block(self, i: int, elements: tuple, question: str) -> None:
        """Apply a run of gates as one fused unitary on the local qubits it touches."""
        qs, mat = _fused(elements, question)
        if qs:
            self.vec = dense.apply_matrix(self.vec, self.n, mat, [self.locals[i][q] for q in qs])

    def _distribution(self, i: int, qubits: Sequence[int]) -> tuple[list[int], dict[str, float]]:
        glob = [self.locals[i][q] for q in qubits]
        probs = dense._marginal(self.vec, self.n, glob)
        k = len(glob)
        return glob, {format(b, f"0{k}b") if k else "": float(p) for b, p in enumerate(probs)}

    def branches(self, i: int, qubits: Sequence[int]):
        glob, dist = self._distribution(i, qubits)
        out = []
        for outcome, p in dist.items():
            if p <= PRUNE:
                continue
            child = self.copy()
            child.vec = dense.project(child.vec, child.n, glob, outcome) / np.sqrt(p)
            out.append((outcome, p, child))
        return out

    def sample(self, i: int, qubits: Sequence[int], rng: SplitMix64) -> str:
        glob, dist = self._distribution(i, qubits)
        items = list(dist.items())
        outcome, p = items[sample_index([p for _, p in items], rng.random())]
        self.vec = dense.project(self.vec, self.n, glob, outcome) / np.sqrt(p)
        return outcome


_FUSED: dict = {}


def _fused(elements: tuple, question: str):
    key = (elements, question)
    hit = _FUSED.get(key)
    if hit is not None:
        return hit
    gates = []
    for el in elements:
        if isinstance(el, Controlled):
            if question[el.bit] != "1":
                continue
            el = el.gate
        gates.append(dense.gate_matrix(el))
    qs = sorted({q for _, g in gates for q in g})
    pos = {q: k for k, q in enumerate(qs)}
    mat = np.eye(2 ** len(qs), dtype=complex)
    for m, g in gates:
        mat = dense.embed_matrix(m, [pos[q] for q in g], len(qs)) @ mat
    if len(_FUSED) > 4096:
        _FUSED.clear()
    _FUSED[key] = (tuple(qs), mat)
    return _FUSED[key]


class StabilizerMachine:
    kind = "stabilizer"

    def __init__(self, state: StabilizerState, locals_: list[list[int]]):
        self.state = state
        self.locals = locals_

    @property
    def n(self) -> int:
        return self.state.n

    def copy(self) -> "StabilizerMachine":
        return StabilizerMachine(self.state.copy(), [list(l) for l in self.locals])

    def add_qubits(self, i: int, bits: str) -> None:
        new = self.state.add_qubits(bits)
        self.locals[i] = new + self.locals[i]

    def apply(self, i: int, el, question: str) -> None:
        if isinstance(el, Controlled):
            if question[el.bit] != "1":
                return
            el = el.gate
        if not isinstance(el, CliffordGate):
            raise ModelError(f"stabilizer backend cannot apply {el!r}")
        self.state.apply_gate(el.remapped(self.locals[i]))

    def branches(self, i: int, qubits: Sequence[int]):
        glob = [self.locals[i][q] for q in qubits]
        out = []

        def walk(m: "StabilizerMachine", k: int, prefix: str, w: float):
            if k == len(glob):
                out.append((prefix, w, m))
                return
            p0 = m.state.outcome_probability(glob[k], 0)
            for b, p in ((0, p0), (1, 1 - p0)):
                if p == 0:
                    continue
                child = m.copy() if 0 < p < 1 else m
                child.state.force(glob[k], b)
                walk(child, k + 1, prefix + str(b), w * float(p))

        walk(self.copy(), 0, "", 1.0)
        return out

    def sample(self, i: int, qubits: Sequence[int], rng: SplitMix64) -> str:
        return "".join(str(self.state.measure_inplace(self.locals[i][q], rng)[0]) for q in qubits)


def choose_backend(strategy: QuantumStrategy, backend: str | None = None) -> str:
    if backend is not None:
        if backend == "stabilizer" and not strategy.is_stabilizer():
            raise ModelError("stabilizer backend needs a stabilizer shared state")
        return backend
    clifford = all(isinstance(el, (CliffordGate, Controlled, Measure))
                   for p in strategy.programs for prog in p.rounds for el in prog)
    return "stabilizer" if strategy.is_stabilizer() and clifford else "dense"


_DENSE_CACHE: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def make_machine(strategy: QuantumStrategy, backend: str | None = None, cap: int | None = DEFAULT_CAP):
    backend = choose_backend(strategy, backend)
    locals_ = [list(p.register) for p in strategy.programs]
    if backend == "stabilizer":
        return StabilizerMachine(strategy.shared_state.copy(), locals_)
    total = strategy.total_qubits()
    if cap is not None and total > cap:
        raise ResourceError(f"dense execution needs {total} qubits, cap is {cap}")
    st = strategy.shared_state
    vec = _DENSE_CACHE.get(strategy)
    if vec is None:
        vec = to_dense(st).amps if isinstance(st, StabilizerState) else st.amps
        _DENSE_CACHE[strategy] = vec
    return DenseMachine(st.n, vec.copy(), locals_)


# one prover, one round ------------------------------------------------------------

def round_branches(machine, i: int, program: Sequence, question: str):
    """All ``(answer, probability, machine)`` outcomes of one round program."""
    m = machine.copy()
    m.add_qubits(i, question)
    return _run_from(m, i, program, 0, question, "")


def _run_from(m, i, program, start, question, answer):
    idx = start
    while idx < len(program):
        el = program[idx]
        if isinstance(m, DenseMachine) and not isinstance(el, Measure):
            stop = idx
            while stop < len(program) and not isinstance(program[stop], Measure):
                stop += 1
            m.apply_block(i, tuple(program[idx:stop]), question)
            idx = stop
            continue
        if isinstance(el, Measure):
            out = []
            for outcome, p, child in m.branches(i, el.qubits):
                o = el.output(outcome)
                if el.post is not None:
                    child.add_qubits(i, o)
                for ans, p2, mm in _run_from(child, i, program, idx + 1, question, o):
                    out.append((ans, p * p2, mm))
            return out
        m.apply(i, el, question)
        idx += 1
    return [(answer, 1.0, m)]


def run_round(machine, i: int, program: Sequence, question: str, rng: SplitMix64) -> str:
    """Sampled execution of one round program; mutates ``machine``."""
    machine.add_qubits(i, question)
    answer = ""
    idx = 0
    while idx < len(program):
        el = program[idx]
        if isinstance(el, Measure):
            answer = el.output(machine.sample(i, el.qubits, rng))
            if el.post is not None:
                machine.add_qubits(i, answer)
        elif isinstance(machine, DenseMachine):
            stop = idx
            while stop < len(program) and not isinstance(program[stop], Measure):
                stop += 1
            machine.apply_block(i, tuple(program[idx:stop]), question)
            idx = stop
            continue
        else:
            machine.apply(i, el, question)
        idx += 1
    return answer


def joint_round_branches(machine, strategy: QuantumStrategy, r: int, questions: Sequence[str],
                         provers: Sequence[int] | None = None):
    """Branches of all (or the listed) provers answering round ``r``, in prover order."""
    provers = range(strategy.K) if provers is None else provers
    layer = [((), 1.0, machine)]
    for i in provers:
        nxt = []
        for answers, w, m in layer:
            for a, p, mm in round_branches(m, i, strategy.programs[i].rounds[r], questions[i]):
                nxt.append((answers + (a,), w * p, mm))
        layer = nxt
    return layer


def fixed_question_branches(strategy: QuantumStrategy, questions: Sequence[Sequence[str]],
                            backend: str | None = None, cap: int | None = DEFAULT_CAP, machine=None):
    """Joint answer branches when round ``r`` questions are ``questions[r]`` (fixed)."""
    machine = make_machine(strategy, backend, cap) if machine is None else machine
    layer = [((), 1.0, machine)]
    for r, q in enumerate(questions):
        nxt = []
        for hist, w, m in layer:
            for ans, p, mm in joint_round_branches(m, strategy, r, q):
                nxt.append((hist + (ans,), w * p, mm))
        layer = nxt
    return layer


# exact history distributions ----------------------------------------------------------

def exact_history_distribution(protocol: Protocol, strategy, backend: str | None = None,
                               cap: int | None = DEFAULT_CAP) -> dict[History, float]:
    """Probability of every full history, by exhaustive enumeration."""
    if strategy.K != protocol.K:
        raise ProtocolError(f"{strategy.K}-prover strategy for a {protocol.K}-prover protocol")
    out: dict[History, float] = {}
    if isinstance(strategy, QuantumStrategy):
        _quantum_rec(protocol, strategy, 0, History(), make_machine(strategy, backend, cap), 1.0, out)
    elif isinstance(strategy, ClassicalStrategy):
        if strategy.support is None:
            raise ModelError("exact enumeration needs a classical strategy with explicit support")
        for lam, pl in strategy.support:
            if pl > 0:
                _classical_rec(protocol, strategy, lam, 0, History(), pl, out)
    else:
        raise TypeError(f"not a strategy: {strategy!r}")
    return out


def _quantum_rec(protocol, strategy, r, hist, machine, w, out):
    if r == protocol.R:
        out[hist] = out.get(hist, 0.0) + w
        return
    # provers answer in order, so branches are shared across questions with a common prefix
    prefix_layers = {(): [((), 1.0, machine)]}

    def layer(qs):
        if qs not in prefix_layers:
            i = len(qs) - 1
            prefix_layers[qs] = [(ans + (a,), pw * pa, mm) for ans, pw, m in layer(qs[:-1])
                                 for a, pa, mm in round_branches(m, i, strategy.programs[i].rounds[r], qs[-1])]
        return prefix_layers[qs]

    for q, p in protocol.question_row(r, hist):
        if p <= 0:
            continue
        for answers, pa, m in layer(tuple(q)):
            protocol.check_block(r, q, answers)
            _quantum_rec(protocol, strategy, r + 1, hist.extend(q, answers), m, w * p * pa, out)


def _classical_rec(protocol, strategy, lam, r, hist, w, out):
    if r == protocol.R:
        out[hist] = out.get(hist, 0.0) + w
        return
    for q, p in protocol.question_row(r, hist):
        if p <= 0:
            continue
        layer = [((), 1.0)]
        for i in range(protocol.K):
            dist = strategy.responses[i][r].respond(lam, local_view(hist, i), q[i])
            layer = [(ans + (a,), pw * pa) for ans, pw in layer for a, pa in dist.items() if pa > 0]
        for answers, pa in layer:
            protocol.check_block(r, q, answers)
            _classical_rec(protocol, strategy, lam, r + 1, hist.extend(q, answers), w * p * pa, out)


def game_value(protocol: Protocol, dist: dict[History, float]) -> float:
    return sum(p for h, p in dist.items() if protocol.accept(h))


def total_variation(p: dict, q: dict) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def push_forward(dist: dict, f) -> dict:
    out: dict = {}
    for k, p in dist.items():
        key = f(k)
        out[key] = out.get(key, 0.0) + p
    return out


# sampled provers --------------------------------------------------------------------

class QuantumSession:
    """The shared quantum state behind a set of quantum prover handles."""

    def __init__(self, strategy: QuantumStrategy, rng: SplitMix64, backend=None, cap=DEFAULT_CAP):
        self.strategy = strategy
        self.machine = make_machine(strategy, backend, cap)
        self.rngs = rng.spawn(strategy.K)


class QuantumProver:
    def __init__(self, session: QuantumSession, i: int):
        self._session = session
        self._i = i
        self._round = 0

    def answer(self, r: int, local: LocalHistory, question: str) -> str:
        if r != self._round:
            raise ProtocolError(f"prover {self._i} asked round {r} out of order")
        self._round += 1
        s = self._session
        return run_round(s.machine, self._i, s.strategy.programs[self._i].rounds[r], question, s.rngs[self._i])


def quantum_provers(strategy: QuantumStrategy, rng: SplitMix64, backend=None, cap=None):
    session = QuantumSession(strategy, rng, backend, DEFAULT_CAP if cap is None else cap)
    return [QuantumProver(session, i) for i in range(strategy.K)]
