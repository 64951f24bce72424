"""Turning Clifford-restricted quantum strategies into classical ones.

The classical strategy plays the quantum one on fixed, hard-coded questions
ahead of time and shares the resulting transcript ``lam``. On a live
question each prover tracks a Pauli correction

    R_r = U_r (X_{q_r xor q'_r} (x) R_{r-1}) U_r^dag,    R_0 = I,

where ``q_r`` is the hard-coded question, ``q'_r`` the live one and ``U_r``
the prover's Clifford circuit for the round. The live answer is the
precomputed answer with the X part of ``R_r`` on the measured qubits
flipped in.

Programs with several measurements or classical post-processing per round
are first split by :func:`delegate_postprocessing` into sub-rounds that are
each "Clifford unitary, then measure", with the post-processing moved to
the verifier. The classical prover runs those sub-rounds internally and
does the verifier's post-processing itself.

:func:`declifford_mostly` handles one-round games where a single prover is
unrestricted: that prover answers from the exact conditional distribution
of its answer given the other provers' precomputed transcript.
"""
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import dense
from .boolcircuit import BoolCircuit
from .clifford import CliffordCircuit, CliffordGate, CliffordTableau, compile_tableau, conjugate
from .elements import Controlled, Measure, ModelError, element_from_json, element_to_json
from .engine import (DEFAULT_CAP, PRUNE, choose_backend, fixed_question_branches, make_machine,
                     round_branches, run_round)
from .pauli import PauliOperator, conjugate_projector, tensor, x_correction
from .protocol import History, LocalHistory, Protocol, ProtocolError, all_bitstrings
from .rng import SplitMix64
from .strategy import (ClassicalStrategy, ProverProgram, QuantumStrategy, Response, TableResponse,
                       describe_element, is_unitary_then_measure, measure_all,
                       strategy_from_json, strategy_to_json, validate_model)


# correction algebra ------------------------------------------------------------

def correction_update(u: CliffordCircuit | CliffordTableau, q: str, q_live: str,
                      r_prev: PauliOperator) -> PauliOperator:
    """``U (X_{q xor q_live} (x) R_prev) U^dag`` with the question qubits leading."""
    if u.n != len(q) + r_prev.n:
        raise ModelError(f"{u.n}-qubit round circuit, but {len(q)} question qubits + {r_prev.n} held")
    p = tensor(x_correction(q, q_live), r_prev)
    return u.conjugate(p) if isinstance(u, CliffordTableau) else conjugate(u, p)


def correct_answer(r: PauliOperator, a: str, measured: Sequence[int]) -> str:
    return conjugate_projector(r, a, measured)


class CorrectionState:
    """One prover's running correction operator."""

    def __init__(self, held: int):
        self.R = PauliOperator.identity(held)
        self.steps = 0

    def advance(self, u: CliffordCircuit | CliffordTableau, q: str, q_live: str) -> PauliOperator:
        self.R = correction_update(u, q, q_live, self.R)
        if not self.R.is_hermitian():
            raise AssertionError(f"correction {self.R} is not Hermitian")
        self.steps += 1
        return self.R

    def correct(self, a: str, measured: Sequence[int]) -> str:
        return correct_answer(self.R, a, measured)


# precomputed interactions --------------------------------------------------------

def _enc(blocks: Sequence[Sequence[str]]) -> str:
    return ";".join(",".join(b) for b in blocks)


def _dec(text: str) -> tuple[tuple[str, ...], ...]:
    return tuple(tuple(b.split(",")) for b in text.split(";"))


@dataclass(frozen=True)
class PrecomputedInteraction:
    """Hard-coded questions and jointly sampled answers, per (sub-)round and prover."""

    questions: tuple[tuple[str, ...], ...]
    answers: tuple[tuple[str, ...], ...]
    backend: str = ""

    def encode(self) -> str:
        return f"q={_enc(self.questions)}/a={_enc(self.answers)}"

    @classmethod
    def decode(cls, lam: str, backend: str = "") -> "PrecomputedInteraction":
        qpart, apart = lam.split("/a=")
        return cls(_dec(qpart[2:]), _dec(apart), backend)


def sample_precomputed(strategy: QuantumStrategy, protocol: Protocol | None, hardcoded_q,
                       rng: SplitMix64, backend: str | None = None,
                       cap: int | None = DEFAULT_CAP) -> PrecomputedInteraction:
    """Sample the strategy's answers on the fixed questions ``hardcoded_q[r][i]``."""
    if not all(all(row) for row in is_unitary_then_measure(strategy)):
        raise ModelError("strategy is not unitary-then-measure; delegate its post-processing first")
    if protocol is not None:
        for r, q in enumerate(hardcoded_q):
            protocol.check_block(r, q)
    backend = choose_backend(strategy, backend)
    m = make_machine(strategy, backend, cap)
    rngs = rng.spawn(strategy.K)
    answers = []
    for r, q in enumerate(hardcoded_q):
        answers.append(tuple(run_round(m, i, strategy.programs[i].rounds[r], q[i], rngs[i])
                             for i in range(strategy.K)))
    return PrecomputedInteraction(tuple(tuple(q) for q in hardcoded_q), tuple(answers), backend)


def precomputed_support(strategy: QuantumStrategy, hardcoded_q, backend: str | None = None,
                        cap: int | None = DEFAULT_CAP) -> list[tuple[PrecomputedInteraction, float]]:
    """Exact distribution of :func:`sample_precomputed` (by branching)."""
    backend = choose_backend(strategy, backend)
    qs = tuple(tuple(q) for q in hardcoded_q)
    agg: dict[tuple, float] = {}
    for answers, p, _ in fixed_question_branches(strategy, qs, backend, cap):
        agg[answers] = agg.get(answers, 0.0) + p
    return [(PrecomputedInteraction(qs, a, backend), p) for a, p in sorted(agg.items())]


@dataclass
class PrecomputedSampler:
    """Draws ``lam`` by simulating the quantum strategy on the hard-coded questions."""

    strategy: QuantumStrategy
    questions: tuple
    backend: str | None = None
    cap: int | None = DEFAULT_CAP

    def sample(self, rng: SplitMix64) -> str:
        return sample_precomputed(self.strategy, None, self.questions, rng, self.backend, self.cap).encode()

    def to_json(self) -> dict:
        return {"kind": "precomputed", "strategy": strategy_to_json(self.strategy),
                "questions": [list(q) for q in self.questions], "backend": self.backend}

    @classmethod
    def from_json(cls, data) -> "PrecomputedSampler":
        return cls(strategy_from_json(data["strategy"]), tuple(tuple(q) for q in data["questions"]),
                   data.get("backend"))


# delegation of post-processing ------------------------------------------------------

@dataclass(frozen=True)
class SubRound:
    """One unitary-then-measure piece of a prover's round.

    ``q_width`` bits arrive as fresh qubits: in the first sub-round the
    round's own question (``g_width`` bits) followed by the verifier's reply
    to the previous round's final post-processing; later, the reply to the
    previous sub-round's post-processing. Raw measurements get an empty
    reply, since their result stays on the collapsed qubits.
    """

    program: tuple
    q_width: int
    g_width: int = 0
    post: BoolCircuit | None = None
    real: bool = True

    @property
    def measured(self) -> tuple[int, ...]:
        return self.program[-1].qubits if self.program else ()

    @property
    def a_width(self) -> int:
        return len(self.measured)

    def reply(self, raw: str) -> str:
        return self.post.evaluate(raw) if self.post is not None else ""

    def output(self, raw: str) -> str:
        return self.post.evaluate(raw) if self.post is not None else raw


DUMMY = SubRound((), 0, 0, None, False)


def split_round(program: Sequence, g_width: int, carried: int) -> list[SubRound]:
    """Cut a round program at its measurements."""
    subs, cur = [], []
    width = g_width + carried
    for el in program:
        if isinstance(el, Measure):
            subs.append(SubRound(tuple(cur) + (Measure(el.qubits),), width,
                                 g_width if not subs else 0, el.post))
            width = el.writes_back
            cur = []
        else:
            if isinstance(el, Controlled) and subs:
                raise ModelError("question-controlled gate after a measurement cannot be delegated")
            cur.append(el)
    if cur:
        raise ModelError("round program must end with a measurement")
    return subs or [SubRound((), width, g_width)]


def prover_subrounds(p: ProverProgram) -> list[list[SubRound]]:
    out, carried = [], 0
    for r, prog in enumerate(p.rounds):
        subs = split_round(prog, p.question_widths[r], carried)
        carried = subs[-1].post.n_outputs if subs[-1].post is not None else 0
        out.append(subs)
    return out


@dataclass(frozen=True)
class DelegationPlan:
    """Sub-round layout of every prover; rounds are padded at the back with dummies."""

    subs: tuple[tuple[tuple[SubRound, ...], ...], ...]  # [i][r][k]
    n_real: tuple[tuple[int, ...], ...]                  # [i][r]
    starts: tuple[int, ...]                              # first sub-round index of each round
    lengths: tuple[int, ...]

    @property
    def total(self) -> int:
        return self.starts[-1] + self.lengths[-1] if self.starts else 0

    def locate(self, t: int) -> tuple[int, int]:
        for r, (s, n) in enumerate(zip(self.starts, self.lengths)):
            if s <= t < s + n:
                return r, t - s
        raise IndexError(f"sub-round {t} out of range")

    def last_real(self, i: int, r: int) -> int:
        return self.starts[r] + self.n_real[i][r] - 1


def plan_delegation(strategy: QuantumStrategy, provers: Sequence[int] | None = None) -> DelegationPlan:
    """Sub-round plan; provers outside ``provers`` get a single sub-round per round, unsplit."""
    chosen = set(range(strategy.K) if provers is None else provers)
    raw = []
    for i, p in enumerate(strategy.programs):
        if i in chosen:
            raw.append(prover_subrounds(p))
        else:
            raw.append([[SubRound(tuple(prog), p.question_widths[r], p.question_widths[r])]
                        for r, prog in enumerate(p.rounds)])
    R = strategy.R
    lengths = tuple(max(len(raw[i][r]) for i in range(strategy.K)) for r in range(R))
    starts = tuple(int(sum(lengths[:r])) for r in range(R))
    subs = tuple(tuple(tuple(raw[i][r]) + (DUMMY,) * (lengths[r] - len(raw[i][r])) for r in range(R))
                 for i in range(strategy.K))
    n_real = tuple(tuple(len(raw[i][r]) for r in range(R)) for i in range(strategy.K))
    return DelegationPlan(subs, n_real, starts, lengths)


def delegated_strategy(strategy: QuantumStrategy, plan: DelegationPlan) -> QuantumStrategy:
    programs = []
    for i, p in enumerate(strategy.programs):
        flat = [sub for r in range(strategy.R) for sub in plan.subs[i][r]]
        programs.append(ProverProgram(p.register, tuple(s.program for s in flat),
                                      tuple(s.q_width for s in flat), p.unrestricted))
    return strategy.with_programs(programs, name=f"{strategy.name}/delegated")


@dataclass(frozen=True)
class DelegatedProtocol(Protocol):
    """The protocol in which the verifier performs the provers' post-processing.

    Questions of a round's first sub-round are drawn from the base protocol
    (given the projected history) with each prover's reply appended; later
    sub-rounds carry deterministic replies. Acceptance is the base
    predicate on the projected history.
    """

    base: Protocol | None = None
    plan: DelegationPlan | None = None

    def project(self, history: History) -> History:
        """The base-protocol history hidden inside a sub-round history."""
        plan, out = self.plan, History()
        for r in range(self.base.R):
            if plan.starts[r] >= len(history):
                break
            q0 = history.questions(plan.starts[r])
            qs = tuple(q0[i][: plan.subs[i][r][0].g_width] for i in range(self.K))
            ans = []
            for i in range(self.K):
                t = plan.last_real(i, r)
                ans.append(plan.subs[i][r][self.plan.n_real[i][r] - 1].output(history.answers(t)[i]))
            out = out.extend(qs, ans)
        return out

    def _reply(self, history: History, i: int, r: int, k: int) -> str:
        sub = self.plan.subs[i][r][k]
        return sub.reply(history.answers(self.plan.starts[r] + k)[i])

    def question_row(self, t: int, history: History):
        plan = self.plan
        r, k = plan.locate(t)
        if k == 0:
            g_hist = self.project(history)
            prev = tuple(self._reply(history, i, r - 1, plan.n_real[i][r - 1] - 1) if r else ""
                         for i in range(self.K))
            return tuple((tuple(q + prev[i] for i, q in enumerate(qs)), p)
                         for qs, p in self.base.question_row(r, g_hist))
        qs = tuple(self._reply(history, i, r, k - 1) if k < plan.n_real[i][r] else ""
                   for i in range(self.K))
        return ((qs, 1.0),)

    def accept(self, history: History) -> bool:
        return self.base.accept(self.project(history))


def delegate_postprocessing(protocol: Protocol, strategy: QuantumStrategy,
                            provers: Sequence[int] | None = None):
    """Return ``(G_S, S')``: the delegated protocol and unitary-then-measure strategy."""
    report = validate_model(strategy)
    if not report.ok:
        raise ModelError("; ".join(report.violations))
    _check_widths(protocol, strategy)
    plan = plan_delegation(strategy, provers)
    K = strategy.K
    qw, aw = [], []
    for r in range(protocol.R):
        for k in range(plan.lengths[r]):
            qw.append(tuple(plan.subs[i][r][k].q_width for i in range(K)))
            aw.append(tuple(plan.subs[i][r][k].a_width for i in range(K)))
    gs = DelegatedProtocol(K, plan.total, tuple(qw), tuple(aw), None, None,
                           f"{protocol.name}/delegated", base=protocol, plan=plan)
    return gs, delegated_strategy(strategy, plan)


def _check_widths(protocol: Protocol, strategy: QuantumStrategy) -> None:
    if strategy.K != protocol.K or strategy.R != protocol.R:
        raise ProtocolError(f"strategy shape {strategy.K}x{strategy.R} vs protocol {protocol.K}x{protocol.R}")
    for i, p in enumerate(strategy.programs):
        for r in range(protocol.R):
            if p.question_widths[r] != protocol.q_widths[r][i]:
                raise ProtocolError(f"prover {i} round {r}: question width mismatch")
            if p.answer_width(r) != protocol.a_widths[r][i]:
                raise ProtocolError(f"prover {i} round {r}: answer width {p.answer_width(r)}, "
                                    f"protocol expects {protocol.a_widths[r][i]}")


# classical response built from corrections ----------------------------------------------

@dataclass(frozen=True)
class CorrectionStep:
    t: int                      # sub-round index inside lam
    circuit: CliffordCircuit    # Clifford part of the sub-round on the grown register
    measured: tuple[int, ...]
    hardcoded: str              # question the precomputation used for this sub-round
    g_width: int
    post: BoolCircuit | None

    def to_json(self) -> dict:
        return {"t": self.t, "n": self.circuit.n,
                "gates": [element_to_json(g) for g in self.circuit.gates],
                "measured": list(self.measured), "hardcoded": self.hardcoded,
                "g_width": self.g_width, "post": self.post.to_json() if self.post else None}

    @cached_property
    def tableau(self) -> CliffordTableau:
        return compile_tableau(self.circuit)

    @classmethod
    def from_json(cls, d) -> "CorrectionStep":
        gates = [g for e in d["gates"] for g in element_from_json(e)]
        post = BoolCircuit.from_json(d["post"]) if d.get("post") else None
        return cls(int(d["t"]), CliffordCircuit(int(d["n"]), tuple(gates)), tuple(d["measured"]),
                   d["hardcoded"], int(d["g_width"]), post)


@dataclass(frozen=True)
class CorrectionProgram:
    """Everything prover ``i`` needs to answer classically: its sub-round circuits."""

    prover: int
    held: int
    rounds: tuple[tuple[CorrectionStep, ...], ...]

    def replay(self, lam: str, questions: Sequence[str], trace: list | None = None) -> list[str]:
        """Answers to the live questions of rounds ``0..len(questions)-1``."""
        if trace is not None:
            return self._replay(lam, questions, trace)
        key = (lam, tuple(questions))
        memo = self.__dict__.setdefault("_memo", {})
        if key not in memo:
            if len(memo) > 1 << 16:
                memo.clear()
            memo[key] = self._replay(lam, questions, None)
        return list(memo[key])

    def _replay(self, lam: str, questions: Sequence[str], trace: list | None) -> list[str]:
        pre = PrecomputedInteraction.decode(lam)
        state = CorrectionState(self.held)
        out, reply = [], ""
        for r, q_live in enumerate(questions):
            steps = self.rounds[r]
            for k, st in enumerate(steps):
                live = (q_live + reply) if k == 0 else reply
                if k == 0 and len(q_live) != st.g_width:
                    raise ModelError(f"prover {self.prover} round {r}: question has {len(q_live)} bits, "
                                     f"expected {st.g_width}")
                R = state.advance(st.tableau, st.hardcoded, live)
                if trace is not None:
                    trace.append((self.prover, r, k, R))
                corrected = state.correct(pre.answers[st.t][self.prover], st.measured)
                reply = st.post.evaluate(corrected) if st.post is not None else ""
                if k == len(steps) - 1:
                    out.append(st.post.evaluate(corrected) if st.post is not None else corrected)
        return out

    def to_json(self) -> dict:
        return {"prover": self.prover, "held": self.held,
                "rounds": [[s.to_json() for s in steps] for steps in self.rounds]}

    @classmethod
    def from_json(cls, d) -> "CorrectionProgram":
        return cls(int(d["prover"]), int(d["held"]),
                   tuple(tuple(CorrectionStep.from_json(s) for s in steps) for steps in d["rounds"]))


@dataclass(frozen=True)
class CorrectionResponse(Response):
    program: CorrectionProgram
    round: int
    kind = "correction"

    def respond(self, lam: str, local: LocalHistory, question: str) -> dict[str, float]:
        qs = [q for q, _ in local[: self.round]] + [question]
        return {self.program.replay(lam, qs)[self.round]: 1.0}

    def to_json(self) -> dict:
        return {"kind": self.kind, "round": self.round, "program": self.program.to_json()}

    @classmethod
    def from_json(cls, d) -> "CorrectionResponse":
        return cls(CorrectionProgram.from_json(d["program"]), int(d["round"]))


def _subround_questions(plan: DelegationPlan, hardcoded_q, K: int, R: int) -> tuple[tuple[str, ...], ...]:
    """Hard-coded sub-round questions: the round's question, then all-zero replies."""
    out = []
    for r in range(R):
        for k in range(plan.lengths[r]):
            row = []
            for i in range(K):
                sub = plan.subs[i][r][k]
                if k == 0:
                    row.append(hardcoded_q[r][i] + "0" * (sub.q_width - sub.g_width))
                else:
                    row.append("0" * sub.q_width)
            out.append(tuple(row))
    return tuple(out)


def _correction_program(strategy: QuantumStrategy, plan: DelegationPlan, subq, i: int) -> CorrectionProgram:
    p = strategy.programs[i]
    d = len(p.register)
    rounds = []
    for r in range(strategy.R):
        steps = []
        for k in range(plan.n_real[i][r]):
            sub = plan.subs[i][r][k]
            d += sub.q_width
            gates = sub.program[:-1] if sub.program else ()
            if not all(isinstance(g, CliffordGate) for g in gates):
                raise ModelError(f"prover {i} round {r}: non-Clifford element in a corrected prover")
            t = plan.starts[r] + k
            steps.append(CorrectionStep(t, CliffordCircuit(d, tuple(gates)), sub.measured,
                                        subq[t][i], sub.g_width, sub.post))
        rounds.append(tuple(steps))
    return CorrectionProgram(i, len(p.register), tuple(rounds))


def default_questions(protocol: Protocol) -> tuple[tuple[str, ...], ...]:
    return tuple(tuple("0" * w for w in protocol.q_widths[r]) for r in range(protocol.R))


def _first_offence(strategy: QuantumStrategy, i: int) -> str:
    for r, prog in enumerate(strategy.programs[i].rounds):
        for k, el in enumerate(prog):
            if not isinstance(el, (CliffordGate, Measure)):
                return f"prover {i} round {r} element {k} is {describe_element(el)}"
    return f"prover {i}"


def declifford(strategy: QuantumStrategy, protocol: Protocol, hardcoded_q=None, *,
               support: str = "exact", backend: str | None = None,
               cap: int | None = DEFAULT_CAP) -> ClassicalStrategy:
    """Classical strategy equivalent to a Clifford-model quantum strategy.

    ``support="exact"`` enumerates the distribution of the shared string;
    ``"sample"`` ships a sampler instead (needed beyond the dense cap for
    non-stabilizer states, or when the branch count is large).
    """
    report = validate_model(strategy)
    offenders = [_first_offence(strategy, i) for i, pr in enumerate(report.provers) if not pr.clifford_only]
    if offenders:
        raise ModelError("not in the Clifford model: " + "; ".join(offenders))
    _check_widths(protocol, strategy)
    hardcoded_q = default_questions(protocol) if hardcoded_q is None else tuple(tuple(q) for q in hardcoded_q)
    for r, q in enumerate(hardcoded_q):
        protocol.check_block(r, q)
    plan = plan_delegation(strategy)
    s_prime = delegated_strategy(strategy, plan)
    subq = _subround_questions(plan, hardcoded_q, strategy.K, strategy.R)
    programs = [_correction_program(strategy, plan, subq, i) for i in range(strategy.K)]
    responses = tuple(tuple(CorrectionResponse(programs[i], r) for r in range(strategy.R))
                      for i in range(strategy.K))
    meta = {"construction": "declifford", "hardcoded_q": [list(q) for q in hardcoded_q],
            "a_widths": protocol.a_widths, "subrounds": plan.total}
    name = f"{strategy.name}/classical"
    if support == "exact":
        sup = tuple((pi.encode(), p) for pi, p in precomputed_support(s_prime, subq, backend, cap))
        return ClassicalStrategy(responses, sup, None, name, meta)
    if support == "sample":
        return ClassicalStrategy(responses, None, PrecomputedSampler(s_prime, subq, backend, cap), name, meta)
    raise ValueError(f"unknown support mode {support!r}")


def declifford_mostly(strategy: QuantumStrategy, protocol: Protocol, hardcoded_q=None, *,
                      cap: int | None = DEFAULT_CAP) -> ClassicalStrategy:
    """Classical strategy for a one-round game with at most one unrestricted prover."""
    if protocol.R != 1:
        raise ProtocolError("the one-unrestricted-prover construction is for single-round games")
    report = validate_model(strategy)
    general = [i for i, pr in enumerate(report.provers) if not pr.clifford_only]
    if not general:
        return declifford(strategy, protocol, hardcoded_q, cap=cap)
    if len(general) > 1:
        raise ModelError(f"provers {general} are all outside the Clifford model; at most one may be")
    u = general[0]
    if any(isinstance(el, Controlled) for i, p in enumerate(strategy.programs) if i != u
           for prog in p.rounds for el in prog):
        raise ModelError("question-controlled gate in a Clifford prover")
    _check_widths(protocol, strategy)
    hardcoded_q = default_questions(protocol) if hardcoded_q is None else tuple(tuple(q) for q in hardcoded_q)
    protocol.check_block(0, hardcoded_q[0])
    clifford = [i for i in range(strategy.K) if i != u]
    s1 = measure_all(strategy, clifford)
    plan = plan_delegation(s1, clifford)
    # prover u sits out the precomputation: its sub-rounds are empty
    subs = list(plan.subs)
    subs[u] = (tuple(DUMMY for _ in range(plan.lengths[0])),)
    n_real = list(plan.n_real)
    run_plan = DelegationPlan(tuple(subs), tuple(n_real), plan.starts, plan.lengths)
    s_prime = delegated_strategy(s1, run_plan)
    subq = _subround_questions(run_plan, tuple(tuple("" if i == u else q for i, q in enumerate(row))
                                               for row in hardcoded_q), strategy.K, 1)
    u_program = strategy.programs[u].rounds[0]
    table: dict[str, dict[str, float]] = {}
    agg: dict[str, float] = {}
    for answers, p, machine in fixed_question_branches(s_prime, subq, "dense", cap):
        lam = PrecomputedInteraction(subq, answers, "dense").encode()
        agg[lam] = agg.get(lam, 0.0) + p
        for q_live in all_bitstrings(protocol.q_widths[0][u]):
            dist: dict[str, float] = {}
            for a, pa, _ in round_branches(machine, u, u_program, q_live):
                dist[a] = dist.get(a, 0.0) + pa
            table[f"{lam}|*|{q_live}"] = dist
    responses = []
    for i in range(strategy.K):
        if i == u:
            responses.append((TableResponse(table),))
        else:
            responses.append((CorrectionResponse(_correction_program(s1, plan, subq, i), 0),))
    meta = {"construction": "declifford_mostly", "unrestricted": u,
            "hardcoded_q": [list(q) for q in hardcoded_q], "a_widths": protocol.a_widths}
    return ClassicalStrategy(tuple(responses), tuple(sorted(agg.items())), None,
                             f"{strategy.name}/classical", meta)


def correction_trace(strategy: ClassicalStrategy, lam: str, questions: Sequence[Sequence[str]]) -> str:
    """One line per prover and (sub-)round: the correction operator used."""
    lines = []
    for i, rounds in enumerate(strategy.responses):
        resp = rounds[-1]
        if not isinstance(resp, CorrectionResponse):
            continue
        trace: list = []
        resp.program.replay(lam, [questions[r][i] for r in range(len(questions))], trace)
        for p, r, k, R in trace:
            lines.append(f"prover {p} round {r}.{k}: {R}")
    return "\n".join(lines) + ("\n" if lines else "")


# dense cross-checks of the correction identities ------------------------------------------

@dataclass(frozen=True)
class LinkReport:
    deviation: float          # max Frobenius distance between linked post-measurement states
    probability_error: float  # max per-round difference of linked answer probabilities
    commutation_error: float  # max entry error of U (X (x) R_prev) = R U
    branches: int
    hermitian: bool
    corrections: tuple = ()


def _frobenius_gap(psi: np.ndarray, phi: np.ndarray) -> float:
    """``|| psi psi^dag - phi phi^dag ||_F`` without cancellation when they agree."""
    if np.array_equal(psi, phi):
        return 0.0
    ov = np.vdot(psi, phi)
    if abs(ov) > 0:
        phi = phi * (abs(ov) / ov)
    d, s = psi - phi, psi + phi
    val = 0.5 * (np.vdot(d, d).real * np.vdot(s, s).real + (np.vdot(d, s) ** 2).real)
    return float(np.sqrt(max(val, 0.0)))


def link_report(strategy: QuantumStrategy, q, q_live, rounds: int | None = None,
                cap: int | None = DEFAULT_CAP) -> LinkReport:
    """Check the state link, probability equality and commutation identity densely.

    ``strategy`` must be unitary-then-measure in every round. ``q`` and
    ``q_live`` are per-round, per-prover question blocks. States are kept
    unnormalised so that branch weights are part of the comparison.
    """
    if not all(all(row) for row in is_unitary_then_measure(strategy)):
        raise ModelError("link checks need a unitary-then-measure strategy")
    rounds = len(q) if rounds is None else rounds
    base = make_machine(strategy, "dense", cap)
    branches = [(base, base.copy())]
    Rs = [PauliOperator.identity(len(p.register)) for p in strategy.programs]
    prob_err = comm_err = 0.0
    hermitian = True
    for r in range(rounds):
        before = [(np.vdot(m.vec, m.vec).real, np.vdot(mt.vec, mt.vec).real) for m, mt in branches]
        for i in range(strategy.K):
            prog = strategy.programs[i].rounds[r]
            gates = prog[:-1] if prog else ()
            measured = prog[-1].qubits if prog else ()
            u = CliffordCircuit(len(base.locals[i]) + len(q[r][i]), tuple(gates))
            prev = tensor(x_correction(q[r][i], q_live[r][i]), Rs[i])
            Rs[i] = correction_update(u, q[r][i], q_live[r][i], Rs[i])
            hermitian &= Rs[i].is_hermitian()
            comm_err = max(comm_err, _commutation_error(u, prev, Rs[i]))
            base = base.copy()
            base.add_qubits(i, q[r][i])
            nxt, weights = [], []
            for (m, mt), w in zip(branches, before):
                m, mt = m.copy(), mt.copy()
                m.add_qubits(i, q[r][i])
                mt.add_qubits(i, q_live[r][i])
                for g in gates:
                    m.apply(i, g, q[r][i])
                    mt.apply(i, g, q_live[r][i])
                glob = [m.locals[i][j] for j in measured]
                for a in all_bitstrings(len(measured)):
                    v = dense.project(m.vec, m.n, glob, a)
                    if np.vdot(v, v).real <= PRUNE:
                        continue
                    c, ct = m.copy(), mt.copy()
                    c.vec = v
                    ct.vec = dense.project(mt.vec, mt.n, glob, correct_answer(Rs[i], a, measured))
                    nxt.append((c, ct))
                    weights.append(w)
            branches, before = nxt, weights
        for (m, mt), (n0, nt0) in zip(branches, before):
            p = np.vdot(m.vec, m.vec).real / n0
            pt = np.vdot(mt.vec, mt.vec).real / nt0 if nt0 > 0 else 0.0
            prob_err = max(prob_err, abs(p - pt))
    dev = 0.0
    for m, mt in branches:
        psi = m.vec
        for i in range(strategy.K):
            psi = dense.apply_pauli(psi, m.n, Rs[i], m.locals[i])
        dev = max(dev, _frobenius_gap(mt.vec, psi))
    return LinkReport(dev, prob_err, comm_err, len(branches), hermitian, tuple(Rs))


def _commutation_error(u: CliffordCircuit, prev: PauliOperator, R: PauliOperator) -> float:
    """Max entry of ``U (X (x) R_prev) - R U`` as dense matrices."""
    um = dense.circuit_matrix(u)
    return float(np.max(np.abs(um @ dense.pauli_matrix(prev) - dense.pauli_matrix(R) @ um)))


def verify_state_link(strategy: QuantumStrategy, q, q_live, rounds: int | None = None,
                      cap: int | None = DEFAULT_CAP) -> float:
    return link_report(strategy, q, q_live, rounds, cap).deviation
