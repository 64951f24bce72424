"""Interactive protocols, histories and the verifier side of an execution.

Rounds are indexed from 0. A history holding ``r`` rounds is the input to
the question sampler of round ``r``. Each round's questions and answers are
tuples of bitstrings, one per prover; widths may vary per round and per
prover.

A history is flattened to bits as, for every round in order, all question
blocks (prover-major) followed by all answer blocks. Predicates and
question-table keys read that bit layout.
"""
from __future__ import annotations

import itertools
import json
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

from .boolcircuit import BoolCircuit
from .rng import SplitMix64, sample_index

ROW_TOL = 1e-12
WILDCARD = "*"


class ProtocolError(ValueError):
    pass


Block = tuple[str, ...]


@dataclass(frozen=True)
class History:
    rounds: tuple[tuple[Block, Block], ...] = ()

    def __len__(self) -> int:
        return len(self.rounds)

    def extend(self, questions: Sequence[str], answers: Sequence[str]) -> "History":
        return History(self.rounds + ((tuple(questions), tuple(answers)),))

    def prefix(self, r: int) -> "History":
        return History(self.rounds[:r])

    def questions(self, r: int) -> Block:
        return self.rounds[r][0]

    def answers(self, r: int) -> Block:
        return self.rounds[r][1]

    def bits(self) -> str:
        return "".join("".join(q) + "".join(a) for q, a in self.rounds)

    def key(self) -> str:
        return hex_key(self.bits())

    def to_json(self) -> list:
        return [{"q": list(q), "a": list(a)} for q, a in self.rounds]

    @classmethod
    def from_json(cls, data: list) -> "History":
        return cls(tuple((tuple(r["q"]), tuple(r["a"])) for r in data))

    def __str__(self) -> str:
        return " | ".join(f"q={','.join(q)} a={','.join(a)}" for q, a in self.rounds)


LocalHistory = tuple[tuple[str, str], ...]


def local_view(history: History, i: int) -> LocalHistory:
    """Prover ``i``'s own (question, answer) pairs, one per round."""
    return tuple((q[i], a[i]) for q, a in history.rounds)


def hex_key(bits: str) -> str:
    """Hex encoding of a bitstring; the bit length is implied by the round."""
    if not bits:
        return ""
    return format(int(bits, 2), f"0{(len(bits) + 3) // 4}x")


# question samplers ---------------------------------------------------------

Row = tuple[tuple[Block, float], ...]


@dataclass(frozen=True)
class QuestionTable:
    """Per-round rows ``history key -> ((question block, p), ...)``.

    The key ``"*"`` matches any history of that round.
    """

    rounds: tuple[Mapping[str, Row], ...]

    def row(self, r: int, history: History) -> Row:
        table = self.rounds[r]
        key = history.key()
        if key in table:
            return table[key]
        if WILDCARD in table:
            return table[WILDCARD]
        raise ProtocolError(f"no question row for round {r} and history {key!r}")


@dataclass(frozen=True)
class TruthTable:
    """Accepting set of flattened history bitstrings."""

    width: int
    accept: frozenset[str]

    def __call__(self, bits: str) -> str:
        return "1" if bits in self.accept else "0"


# protocols ------------------------------------------------------------------

@dataclass(frozen=True)
class Protocol:
    """A K-prover, R-round protocol with table-backed questions.

    ``q_widths[r][i]`` and ``a_widths[r][i]`` are the question and answer
    widths of prover ``i`` in round ``r``. ``predicate`` maps the flattened
    final history to ``"1"`` (accept) or ``"0"``.
    """

    K: int
    R: int
    q_widths: tuple[tuple[int, ...], ...]
    a_widths: tuple[tuple[int, ...], ...]
    questions: QuestionTable | None = None
    predicate: BoolCircuit | TruthTable | Callable[[str], str] | None = None
    name: str = ""

    def __post_init__(self):
        for label, w in (("question", self.q_widths), ("answer", self.a_widths)):
            if len(w) != self.R or any(len(row) != self.K for row in w):
                raise ProtocolError(f"{label} widths must be R x K")

    def question_row(self, r: int, history: History) -> Row:
        row = self.questions.row(r, history)
        total = sum(p for _, p in row)
        if abs(total - 1) > ROW_TOL:
            raise ProtocolError(f"question row for round {r} sums to {total}")
        return row

    def accept(self, history: History) -> bool:
        out = self.predicate(history.bits())
        return out == "1"

    def history_width(self, r: int) -> int:
        return sum(sum(self.q_widths[j]) + sum(self.a_widths[j]) for j in range(r))

    def is_nonlocal_game(self) -> bool:
        return self.R == 1

    def check_block(self, r: int, questions: Sequence[str], answers: Sequence[str] | None = None) -> None:
        if len(questions) != self.K or any(len(q) != w for q, w in zip(questions, self.q_widths[r])):
            raise ProtocolError(f"round {r}: question block {questions} does not match widths {self.q_widths[r]}")
        if answers is not None:
            for i, (a, w) in enumerate(zip(answers, self.a_widths[r])):
                if len(a) != w or set(a) - {"0", "1"}:
                    raise ProtocolError(f"round {r}: prover {i} answered {a!r}, expected {w} bits")


def sample_questions(protocol: Protocol, r: int, history: History, rng: SplitMix64) -> Block:
    if len(history) != r:
        raise ProtocolError(f"sampling round {r} needs a history of {r} rounds, got {len(history)}")
    row = protocol.question_row(r, history)
    return row[sample_index([p for _, p in row], rng.random())][0]


class Prover:
    """Interface of a participant in :func:`run_protocol`."""

    def answer(self, r: int, local: LocalHistory, question: str) -> str:  # pragma: no cover
        raise NotImplementedError


def run_protocol(protocol: Protocol, provers, master_seed: int = 0) -> tuple[History, bool]:
    """Play one execution; returns the transcript and the verdict.

    ``provers`` is either a list of :class:`Prover` objects or a strategy
    exposing ``provers(rng)``. Every prover sees only its own local history.
    """
    master = SplitMix64(master_seed)
    verifier_rng = master.split()
    prover_rng = master.split()
    if hasattr(provers, "provers"):
        provers = provers.provers(prover_rng)
    if len(provers) != protocol.K:
        raise ProtocolError(f"{len(provers)} provers for a {protocol.K}-prover protocol")
    history = History()
    for r in range(protocol.R):
        q = sample_questions(protocol, r, history, verifier_rng)
        answers = tuple(p.answer(r, local_view(history, i), q[i]) for i, p in enumerate(provers))
        protocol.check_block(r, q, answers)
        history = history.extend(q, answers)
    return history, protocol.accept(history)


# brute force ------------------------------------------------------------------

def all_bitstrings(width: int) -> list[str]:
    return ["".join(b) for b in itertools.product("01", repeat=width)]


def classical_value(protocol: Protocol) -> tuple[float, tuple]:
    """Best value over deterministic strategies of a single-round game.

    Returns the value and one optimal strategy as per-prover dicts
    ``question -> answer``.
    """
    if protocol.R != 1:
        raise ProtocolError("brute force is implemented for single-round games")
    row = protocol.question_row(0, History())
    per_prover = []
    for i in range(protocol.K):
        qs = all_bitstrings(protocol.q_widths[0][i])
        ans = all_bitstrings(protocol.a_widths[0][i])
        per_prover.append([dict(zip(qs, choice)) for choice in itertools.product(ans, repeat=len(qs))])
    best, arg = -1.0, None
    for combo in itertools.product(*per_prover):
        v = 0.0
        for q, p in row:
            a = tuple(f[qi] for f, qi in zip(combo, q))
            if protocol.accept(History().extend(q, a)):
                v += p
        if v > best + 1e-15:
            best, arg = v, combo
    return best, arg


# serialization ------------------------------------------------------------------

def _widths(raw, K: int, R: int) -> tuple[tuple[int, ...], ...]:
    if isinstance(raw, int):
        return tuple((raw,) * K for _ in range(R))
    if len(raw) != R:
        raise ProtocolError(f"width list has {len(raw)} entries for {R} rounds")
    return tuple((w,) * K if isinstance(w, int) else tuple(w) for w in raw)


def _split_block(q, widths: Sequence[int]) -> Block:
    if isinstance(q, str):
        if len(q) != sum(widths):
            raise ProtocolError(f"question {q!r} does not have {sum(widths)} bits")
        out, k = [], 0
        for w in widths:
            out.append(q[k:k + w])
            k += w
        return tuple(out)
    return tuple(q)


def protocol_from_json(data: Mapping) -> Protocol:
    K, R = int(data["K"]), int(data["R"])
    qw = _widths(data["s"], K, R)
    aw = _widths(data["t"], K, R)
    rounds: list[dict[str, Row]] = [{} for _ in range(R)]
    for entry in data["pi"]:
        r = int(entry.get("round", 0))
        row = tuple((_split_block(e["questions"], qw[r]), float(e["p"])) for e in entry["row"])
        rounds[r][entry.get("history_key", WILDCARD)] = row
    v = data["v"]
    if "circuit" in v:
        pred = BoolCircuit.from_json(v["circuit"])
    else:
        tt = v["truth_table"]
        pred = TruthTable(int(tt["width"]), frozenset(tt["accept"]))
    proto = Protocol(K, R, qw, aw, QuestionTable(tuple(rounds)), pred, data.get("name", ""))
    width = proto.history_width(R)
    n_in = pred.n_inputs if isinstance(pred, BoolCircuit) else pred.width
    if n_in != width:
        raise ProtocolError(f"predicate reads {n_in} bits but a full history has {width}")
    for r, table in enumerate(rounds):
        for key, row in table.items():
            for q, _ in row:
                proto.check_block(r, q)
            total = sum(p for _, p in row)
            if abs(total - 1) > ROW_TOL:
                raise ProtocolError(f"round {r} row {key!r} sums to {total}")
    return proto


def protocol_to_json(proto: Protocol) -> dict:
    pi = []
    for r, table in enumerate(proto.questions.rounds):
        for key, row in table.items():
            pi.append({"round": r, "history_key": key,
                       "row": [{"questions": list(q), "p": p} for q, p in row]})
    if isinstance(proto.predicate, BoolCircuit):
        v = {"circuit": proto.predicate.to_json()}
    elif isinstance(proto.predicate, TruthTable):
        v = {"truth_table": {"width": proto.predicate.width, "accept": sorted(proto.predicate.accept)}}
    else:
        raise ProtocolError("only circuit and truth-table predicates serialize")
    return {"name": proto.name, "K": proto.K, "R": proto.R,
            "s": [list(w) for w in proto.q_widths], "t": [list(w) for w in proto.a_widths],
            "pi": pi, "v": v}


def load_protocol(path: str | Path) -> Protocol:
    with open(path) as fh:
        return protocol_from_json(json.load(fh))


def uniform_row(blocks: Iterable[Block]) -> Row:
    blocks = list(blocks)
    return tuple((b, 1 / len(blocks)) for b in blocks)
