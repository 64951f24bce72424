"""Quantum and classical strategies, and validation of the Clifford model.

A quantum prover owns a register of shared-state qubits. At the start of
each round its question arrives as fresh basis-state qubits prepended to
the local register, so local qubit ``j`` of round ``r`` is question bit
``j`` and the previous round's register follows. Program elements index
that local register (see :mod:`cliffmip.elements` for write-back rules).
The round's answer is the output of the program's final measurement.

A classical strategy is a distribution over strings ``lam`` plus one
response program per prover and round; a response maps ``(lam, local
history, question)`` to a distribution over answers (deterministic
responses return a single answer with probability 1).
"""
from __future__ import annotations

import json
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field, replace
from pathlib import Path

from .boolcircuit import BoolCircuit, chain, select_circuit
from .clifford import CliffordGate
from .dense import DenseState, dump_dense, load_dense
from .elements import (Controlled, Measure, ModelError, TGate, UnitaryGate,
                       element_from_json, element_to_json)
from .protocol import LocalHistory
from .rng import SplitMix64, sample_index
from .stabilizer import StabilizerState, load_stabilizer


# quantum strategies -----------------------------------------------------------

@dataclass(frozen=True)
class ProverProgram:
    register: tuple[int, ...]
    rounds: tuple[tuple, ...]
    question_widths: tuple[int, ...]
    unrestricted: bool = False

    def __post_init__(self):
        object.__setattr__(self, "register", tuple(self.register))
        object.__setattr__(self, "rounds", tuple(tuple(r) for r in self.rounds))
        object.__setattr__(self, "question_widths", tuple(self.question_widths))
        if len(self.rounds) != len(self.question_widths):
            raise ModelError("one question width per round required")

    def local_sizes(self) -> list[tuple[int, int]]:
        """(size at round start after questions, size at round end) per round."""
        out, d = [], len(self.register)
        for r, prog in enumerate(self.rounds):
            d += self.question_widths[r]
            start = d
            for el in prog:
                if isinstance(el, Measure):
                    d += el.writes_back
            out.append((start, d))
        return out

    def answer_width(self, r: int) -> int:
        meas = [el for el in self.rounds[r] if isinstance(el, Measure)]
        return meas[-1].output_width if meas else 0


@dataclass(frozen=True, eq=False)
class QuantumStrategy:
    shared_state: StabilizerState | DenseState
    programs: tuple[ProverProgram, ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "programs", tuple(self.programs))
        owned = [q for p in self.programs for q in p.register]
        if len(set(owned)) != len(owned):
            raise ModelError("prover registers overlap")
        if any(not 0 <= q < self.shared_state.n for q in owned):
            raise ModelError("register index outside the shared state")
        if len({len(p.rounds) for p in self.programs}) > 1:
            raise ModelError("provers disagree on the number of rounds")
        for i, p in enumerate(self.programs):
            _check_program(i, p)

    @property
    def K(self) -> int:
        return len(self.programs)

    @property
    def R(self) -> int:
        return len(self.programs[0].rounds) if self.programs else 0

    def total_qubits(self) -> int:
        """Qubits a full execution allocates (shared state, questions, write-backs)."""
        extra = 0
        for p in self.programs:
            sizes = p.local_sizes()
            extra += (sizes[-1][1] - len(p.register)) if sizes else 0
        return self.shared_state.n + extra

    def is_stabilizer(self) -> bool:
        return isinstance(self.shared_state, StabilizerState)

    def provers(self, rng: SplitMix64, backend: str | None = None, cap: int | None = None):
        from .engine import quantum_provers
        return quantum_provers(self, rng, backend=backend, cap=cap)

    def with_programs(self, programs: Sequence[ProverProgram], name: str | None = None) -> "QuantumStrategy":
        return QuantumStrategy(self.shared_state, tuple(programs), self.name if name is None else name)


def _check_program(i: int, p: ProverProgram) -> None:
    d = len(p.register)
    for r, prog in enumerate(p.rounds):
        d += p.question_widths[r]
        for k, el in enumerate(prog):
            for q in el.qubits:
                if not 0 <= q < d:
                    raise ModelError(f"prover {i} round {r} element {k} ({el}) uses qubit {q}; "
                                     f"local register has {d}")
            if isinstance(el, Controlled) and el.bit >= p.question_widths[r]:
                raise ModelError(f"prover {i} round {r} element {k} reads question bit {el.bit}")
            if isinstance(el, Measure):
                d += el.writes_back
        if prog and not isinstance(prog[-1], Measure):
            raise ModelError(f"prover {i} round {r}: program must end with the answer measurement")


# model validation ------------------------------------------------------------------

@dataclass(frozen=True)
class ProverReport:
    clifford_only: bool
    has_intermediate_measurement: bool
    has_postprocessing: bool
    unrestricted: bool
    violations: tuple[str, ...] = ()


@dataclass(frozen=True)
class ModelReport:
    provers: tuple[ProverReport, ...]

    @property
    def ok(self) -> bool:
        return not any(p.violations for p in self.provers)

    @property
    def clifford_provers(self) -> list[int]:
        return [i for i, p in enumerate(self.provers) if p.clifford_only]

    @property
    def violations(self) -> list[str]:
        return [v for p in self.provers for v in p.violations]


def validate_model(strategy: QuantumStrategy) -> ModelReport:
    """Classify every prover and list elements that break its declared model.

    A prover not flagged unrestricted may use only H, S, CNOT and standard
    basis measurements (with post-processing of the measured bits). Gates
    controlled by question bits are rejected for such provers.
    """
    reports = []
    for i, p in enumerate(strategy.programs):
        clifford_only, inter, post = True, False, False
        bad = []
        for r, prog in enumerate(p.rounds):
            n_meas = 0
            for k, el in enumerate(prog):
                if isinstance(el, Measure):
                    n_meas += 1
                    post = post or el.post is not None
                elif not isinstance(el, CliffordGate):
                    clifford_only = False
                    if not p.unrestricted:
                        kind = ("classically-controlled Clifford" if isinstance(el, Controlled)
                                else "non-Clifford gate")
                        bad.append(f"prover {i} round {r} element {k}: {kind} {describe_element(el)}")
            inter = inter or n_meas > 1
        reports.append(ProverReport(clifford_only, inter, post, p.unrestricted, tuple(bad)))
    return ModelReport(tuple(reports))


def describe_element(el) -> str:
    if isinstance(el, Controlled):
        return f"{el.gate} if question bit {el.bit}"
    if isinstance(el, TGate):
        return f"T {el.target}"
    if isinstance(el, UnitaryGate):
        return f"U on {el.qubits}"
    return str(el)


def round_is_unitary_then_measure(prog: Sequence) -> bool:
    if not prog:
        return True
    *body, last = prog
    return (isinstance(last, Measure) and last.post is None
            and all(isinstance(el, CliffordGate) for el in body))


def is_unitary_then_measure(strategy: QuantumStrategy) -> list[list[bool]]:
    return [[round_is_unitary_then_measure(prog) for prog in p.rounds] for p in strategy.programs]


def measure_all(strategy: QuantumStrategy, provers: Sequence[int] | None = None) -> QuantumStrategy:
    """Make the final measurement of the last round read every local qubit.

    The answer is unchanged: the extra bits are discarded by a selection
    placed in front of the original post-processing.
    """
    targets = range(strategy.K) if provers is None else provers
    programs = list(strategy.programs)
    for i in targets:
        p = programs[i]
        if not p.rounds:
            continue
        r = len(p.rounds) - 1
        prog = list(p.rounds[r])
        d = p.local_sizes()[r][1]
        if prog:
            last = prog.pop()
            d -= last.writes_back
        else:
            last = Measure(())
        order = list(last.qubits) + [j for j in range(d) if j not in last.qubits]
        sel = select_circuit(d, range(len(last.qubits)))
        post = sel if last.post is None else chain(sel, last.post)
        prog.append(Measure(tuple(order), post))
        rounds = p.rounds[:r] + (tuple(prog),)
        programs[i] = replace(p, rounds=rounds)
    return strategy.with_programs(programs)


# classical strategies ---------------------------------------------------------------

class Response:
    """One prover's behaviour in one round of a classical strategy."""

    kind = "abstract"

    def respond(self, lam: str, local: LocalHistory, question: str) -> dict[str, float]:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantResponse(Response):
    answer: str
    kind = "constant"

    def respond(self, lam, local, question):
        return {self.answer: 1.0}

    def to_json(self):
        return {"kind": self.kind, "answer": self.answer}


@dataclass(frozen=True)
class CircuitResponse(Response):
    """Deterministic answer ``circuit(local history bits + question)``."""

    circuit: BoolCircuit
    kind = "circuit"

    def respond(self, lam, local, question):
        bits = "".join(q + a for q, a in local) + question
        return {self.circuit.evaluate(bits): 1.0}

    def to_json(self):
        return {"kind": self.kind, "circuit": self.circuit.to_json()}


@dataclass(frozen=True)
class TableResponse(Response):
    """Lookup keyed ``"lam|history|question"``; any field may be ``*``.

    ``history`` is the concatenated local (question, answer) bits.
    """

    table: Mapping[str, Mapping[str, float]]
    kind = "table"

    def respond(self, lam, local, question):
        hist = "".join(q + a for q, a in local)
        for key in _table_keys(lam, hist, question):
            if key in self.table:
                return dict(self.table[key])
        raise ModelError(f"no table entry for lam={lam!r} history={hist!r} question={question!r}")

    def to_json(self):
        return {"kind": self.kind, "table": {k: dict(v) for k, v in self.table.items()}}


def _table_keys(lam: str, hist: str, question: str):
    for a in (lam, "*"):
        for b in (hist, "*"):
            for c in (question, "*"):
                yield f"{a}|{b}|{c}"


def response_from_json(data: Mapping) -> Response:
    kind = data["kind"]
    if kind == "constant":
        return ConstantResponse(data["answer"])
    if kind == "circuit":
        return CircuitResponse(BoolCircuit.from_json(data["circuit"]))
    if kind == "table":
        return TableResponse({k: {a: float(p) for a, p in v.items()} for k, v in data["table"].items()})
    if kind == "correction":
        from .desim import CorrectionResponse
        return CorrectionResponse.from_json(data)
    raise ModelError(f"unknown response kind {kind!r}")


@dataclass(frozen=True, eq=False)
class ClassicalStrategy:
    """Shared randomness ``lam`` plus ``responses[i][r]``.

    ``support`` lists ``(lam, probability)`` pairs when the distribution is
    known exactly; otherwise ``sampler`` draws ``lam`` from a random stream.
    """

    responses: tuple[tuple[Response, ...], ...]
    support: tuple[tuple[str, float], ...] | None = None
    sampler: object | None = None
    name: str = ""
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "responses", tuple(tuple(r) for r in self.responses))
        if self.support is None and self.sampler is None:
            object.__setattr__(self, "support", (("", 1.0),))
        if self.support is not None:
            object.__setattr__(self, "support", tuple((str(l), float(p)) for l, p in self.support))
            total = sum(p for _, p in self.support)
            if abs(total - 1) > 1e-9:
                raise ModelError(f"shared randomness sums to {total}")

    @property
    def K(self) -> int:
        return len(self.responses)

    @property
    def R(self) -> int:
        return len(self.responses[0]) if self.responses else 0

    def sample_lambda(self, rng: SplitMix64) -> str:
        if self.support is not None:
            return self.support[sample_index([p for _, p in self.support], rng.random())][0]
        return self.sampler.sample(rng)

    def provers(self, rng: SplitMix64) -> list["ClassicalProver"]:
        lam = self.sample_lambda(rng.split())
        return [ClassicalProver(self, i, lam, rng.split()) for i in range(self.K)]


class ClassicalProver:
    """Holds ``lam`` and private coins; sees only its own local history."""

    def __init__(self, strategy: ClassicalStrategy, i: int, lam: str, rng: SplitMix64):
        self._strategy = strategy
        self._i = i
        self._lam = lam
        self._rng = rng

    def answer(self, r: int, local: LocalHistory, question: str) -> str:
        return evaluate_classical(self._strategy, self._lam, self._i, r, local, question, self._rng)


def evaluate_classical(strategy: ClassicalStrategy, lam: str, i: int, r: int,
                       local: LocalHistory, question: str, rng: SplitMix64 | None = None) -> str:
    """Answer of prover ``i`` in round ``r``; randomized responses need ``rng``."""
    if len(local) != r:
        raise ModelError(f"round {r} needs {r} rounds of local history, got {len(local)}")
    dist = strategy.responses[i][r].respond(lam, local, question)
    widths = strategy.meta.get("a_widths")
    if len(dist) == 1:
        (ans,) = dist
    else:
        if rng is None:
            raise ModelError("randomized response; an rng is required")
        items = sorted(dist.items())
        ans = items[sample_index([p for _, p in items], rng.random())][0]
    if widths is not None and len(ans) != widths[r][i]:
        raise ModelError(f"prover {i} round {r} produced {len(ans)} bits, expected {widths[r][i]}")
    return ans


# serialization ------------------------------------------------------------------------

def _state_to_json(state) -> dict:
    if isinstance(state, StabilizerState):
        return {"kind": "stabilizer", "text": state.to_text()}
    return {"kind": "dense", "text": dump_dense(state)}


def _state_from_json(data: Mapping, base: Path | None):
    text = data.get("text")
    if text is None:
        path = Path(data["file"])
        if base is not None and not path.is_absolute():
            path = base / path
        text = path.read_text()
    if data["kind"] == "stabilizer":
        return load_stabilizer(text)
    if data["kind"] == "dense":
        return load_dense(text)
    raise ModelError(f"unknown shared state kind {data['kind']!r}")


def strategy_to_json(strategy) -> dict:
    if isinstance(strategy, QuantumStrategy):
        return {
            "kind": "quantum",
            "name": strategy.name,
            "shared_state": _state_to_json(strategy.shared_state),
            "provers": [{
                "register": list(p.register),
                "unrestricted": p.unrestricted,
                "question_widths": list(p.question_widths),
                "rounds": [[element_to_json(el) for el in prog] for prog in p.rounds],
            } for p in strategy.programs],
        }
    out = {
        "kind": "classical",
        "name": strategy.name,
        "support": [list(x) for x in strategy.support] if strategy.support is not None else None,
        "provers": [{"rounds": [resp.to_json() for resp in rounds]} for rounds in strategy.responses],
        "meta": _jsonable(strategy.meta),
    }
    if strategy.sampler is not None:
        out["sampler"] = strategy.sampler.to_json()
    return out


def _jsonable(meta: Mapping) -> dict:
    return {k: v for k, v in meta.items() if not k.startswith("_")}


def strategy_from_json(data: Mapping, base: Path | None = None):
    if data.get("kind", "quantum") == "quantum":
        programs = []
        for p in data["provers"]:
            rounds = []
            for prog in p["rounds"]:
                els = []
                for e in prog:
                    els.extend(element_from_json(e))
                rounds.append(tuple(els))
            programs.append(ProverProgram(tuple(p["register"]), tuple(rounds),
                                          tuple(p["question_widths"]), bool(p.get("unrestricted", False))))
        return QuantumStrategy(_state_from_json(data["shared_state"], base), tuple(programs),
                               data.get("name", ""))
    responses = [tuple(response_from_json(r) for r in p["rounds"]) for p in data["provers"]]
    sampler = None
    if data.get("sampler"):
        from .desim import PrecomputedSampler
        sampler = PrecomputedSampler.from_json(data["sampler"])
    support = data.get("support")
    meta = dict(data.get("meta", {}))
    if "a_widths" in meta:
        meta["a_widths"] = tuple(tuple(w) for w in meta["a_widths"])
    return ClassicalStrategy(tuple(responses), tuple(tuple(x) for x in support) if support is not None else None,
                             sampler, data.get("name", ""), meta)


def load_strategy(path: str | Path):
    path = Path(path)
    with open(path) as fh:
        return strategy_from_json(json.load(fh), path.parent)


def dump_strategy(strategy, path: str | Path) -> None:
    Path(path).write_text(json.dumps(strategy_to_json(strategy), indent=1) + "\n")


def deterministic_strategy(tables: Sequence[Mapping[str, str]]) -> ClassicalStrategy:
    """Single-round strategy from per-prover ``question -> answer`` dicts."""
    responses = []
    for t in tables:
        responses.append((TableResponse({f"*|*|{q}": {a: 1.0} for q, a in t.items()}),))
    return ClassicalStrategy(tuple(responses))
