"""Command-line front end: ``cliffmip run | declifford | verify | bench | list-games``.

Protocols and strategies are given as JSON files or as bundled names
(``chsh`` for a protocol, ``chsh/quantum_optimal`` for a strategy).
Reports are printed as aligned text followed by one JSON line. Output is a
pure function of the inputs and ``--seed``; wall-clock time is only shown
with ``--timing``.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from scipy import stats

from .clifford import compile_tableau, conjugate
from .dense import ResourceError
from .desim import correction_trace, declifford, declifford_mostly
from .elements import ModelError
from .engine import DEFAULT_CAP, exact_history_distribution, game_value, total_variation
from .games import UnknownBundle, list_bundles, load_bundle
from .generators import random_circuit, random_pauli
from .protocol import History, Protocol, ProtocolError, load_protocol, run_protocol, sample_questions
from .rng import SplitMix64
from .strategy import QuantumStrategy, load_strategy, strategy_to_json, validate_model

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


class CliError(Exception):
    pass


# input resolution ------------------------------------------------------------------

def _json_error(path: Path, err: json.JSONDecodeError) -> CliError:
    return CliError(f"{path}:{err.lineno}:{err.colno}: {err.msg}")


def resolve_protocol(arg: str) -> tuple[str, Protocol]:
    path = Path(arg)
    if path.is_file():
        try:
            return path.stem, load_protocol(path)
        except json.JSONDecodeError as err:
            raise _json_error(path, err) from None
    try:
        return arg, load_bundle(arg).protocol
    except UnknownBundle:
        raise CliError(f"{arg}: no such file or bundled game (known: {', '.join(list_bundles())})") from None


def resolve_strategy(arg: str, game: str | None = None):
    path = Path(arg)
    if path.is_file():
        try:
            return path.stem, load_strategy(path)
        except json.JSONDecodeError as err:
            raise _json_error(path, err) from None
    name, _, sid = arg.partition("/")
    if not sid and game is not None:
        name, sid = game, arg
    try:
        bundle = load_bundle(name)
    except UnknownBundle:
        raise CliError(f"{arg}: no such file or bundled strategy") from None
    if sid not in bundle.strategies:
        raise CliError(f"{arg}: game {name!r} has strategies {', '.join(bundle.strategies)}")
    return sid, bundle.strategies[sid]


def parse_questions(text: str) -> tuple[tuple[str, ...], ...]:
    """``"0,1;1,0"`` -> one tuple of per-prover questions per round."""
    rounds = tuple(tuple(block.split(",")) for block in text.split(";"))
    for block in rounds:
        if any(set(q) - {"0", "1"} for q in block):
            raise CliError(f"question block {','.join(block)!r} is not made of bits")
    return rounds


# reports ------------------------------------------------------------------------

@dataclass
class RunReport:
    game: str
    strategy: str
    seed: int
    mode: str                          # "exact" or "shots"
    value: float
    shots: int | None = None
    std_error: float | None = None
    exact_value: float | None = None
    z_score: float | None = None
    tv: float | None = None
    chi2: float | None = None
    p_value: float | None = None
    dof: int | None = None
    verdict: str | None = None
    wall_time: float | None = None
    extra: dict = field(default_factory=dict)

    def fields(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if v is not None and k != "extra"}
        d.update(self.extra)
        return d

    def render(self) -> str:
        d = self.fields()
        width = max(len(k) for k in d)
        lines = [f"{k:<{width}}  {_fmt(v)}" for k, v in d.items()]
        lines.append(json.dumps(_rounded(d), sort_keys=True))
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def _rounded(d: dict) -> dict:
    # 12 significant digits keeps the JSON line stable across libm differences
    return {k: float(f"{v:.12g}") if isinstance(v, float) else v for k, v in d.items()}


def chi_square_goodness(counts: dict, probs: dict, shots: int) -> tuple[float, float, int]:
    """Chi-square of observed outcome counts against exact probabilities.

    Cells with expected count below 5 are pooled. An observation outside the
    exact support gives p = 0.
    """
    if any(k not in probs or probs[k] <= 0 for k in counts):
        return math.inf, 0.0, 0
    obs, exp, pool_o, pool_e = [], [], 0, 0.0
    for k in sorted(probs, key=str):
        e = probs[k] * shots
        if e < 5:
            pool_o += counts.get(k, 0)
            pool_e += e
        else:
            obs.append(counts.get(k, 0))
            exp.append(e)
    if pool_e > 0:
        obs.append(pool_o)
        exp.append(pool_e)
    if len(obs) < 2:
        return 0.0, 1.0, 0
    scale = sum(obs) / sum(exp)
    res = stats.chisquare(obs, [e * scale for e in exp])
    return float(res.statistic), float(res.pvalue), len(obs) - 1


def chi_square_homogeneity(a: dict, b: dict) -> tuple[float, float, int]:
    keys = sorted(set(a) | set(b), key=str)
    if len(keys) < 2:
        return 0.0, 1.0, 0
    res = stats.chi2_contingency([[a.get(k, 0) for k in keys], [b.get(k, 0) for k in keys]], correction=False)
    return float(res.statistic), float(res.pvalue), int(res.dof)


# execution helpers ------------------------------------------------------------------

def exact(protocol: Protocol, strategy, cap: int) -> dict[History, float]:
    try:
        return exact_history_distribution(protocol, strategy, cap=cap)
    except ResourceError as err:
        raise CliError(f"{err}; exact enumeration refused, pass --shots N to sample") from None


def sample_histories(protocol: Protocol, strategy, shots: int, seed: int,
                     transcript=None) -> tuple[dict[History, int], int]:
    """Counts of sampled histories and the number of accepted runs."""
    master = SplitMix64(seed)
    counts: dict[History, int] = {}
    wins = 0
    for shot in range(shots):
        hist, ok = run_protocol(protocol, strategy, master.next_u64())
        counts[hist] = counts.get(hist, 0) + 1
        wins += ok
        if transcript is not None:
            transcript.write(f"{shot} {hist.bits()} {int(ok)}\n")
    return counts, wins


def _strategy_kind(strategy) -> str:
    return "quantum" if isinstance(strategy, QuantumStrategy) else "classical"


# commands -----------------------------------------------------------------------

def cmd_run(args) -> int:
    game, protocol = resolve_protocol(args.protocol)
    sid, strategy = resolve_strategy(args.strategy, game)
    t0 = time.perf_counter()
    if args.shots is None:
        dist = exact(protocol, strategy, args.cap)
        report = RunReport(game, sid, args.seed, "exact", game_value(protocol, dist))
    else:
        if args.shots <= 0:
            raise CliError("--shots must be positive")
        transcript = open(args.transcript, "w") if args.transcript else None
        try:
            counts, wins = sample_histories(protocol, strategy, args.shots, args.seed, transcript)
        finally:
            if transcript is not None:
                transcript.close()
        rate = wins / args.shots
        report = RunReport(game, sid, args.seed, "shots", rate, shots=args.shots,
                           std_error=math.sqrt(max(rate * (1 - rate), 0.0) / args.shots))
        if not args.no_exact:
            try:
                dist = exact_history_distribution(protocol, strategy, cap=args.cap)
            except (ResourceError, ModelError):
                dist = None
            if dist is not None:
                v = game_value(protocol, dist)
                sigma = math.sqrt(max(v * (1 - v), 0.0) / args.shots)
                report.exact_value = v
                report.z_score = (rate - v) / sigma if sigma > 0 else (0.0 if rate == v else math.inf)
                report.tv = total_variation({h: c / args.shots for h, c in counts.items()}, dist)
                report.chi2, report.p_value, report.dof = chi_square_goodness(counts, dist, args.shots)
    if args.timing:
        report.wall_time = time.perf_counter() - t0
    sys.stdout.write(report.render())
    return EXIT_OK


def cmd_declifford(args) -> int:
    game, protocol = resolve_protocol(args.protocol)
    sid, strategy = resolve_strategy(args.strategy, game)
    if not isinstance(strategy, QuantumStrategy):
        raise CliError(f"{args.strategy} is already classical")
    hq = parse_questions(args.hardcoded_q) if args.hardcoded_q else None
    general = [i for i, pr in enumerate(validate_model(strategy).provers) if not pr.clifford_only]
    if general and protocol.R == 1 and len(general) == 1:
        out = declifford_mostly(strategy, protocol, hq, cap=args.cap)
    else:
        out = declifford(strategy, protocol, hq, support=args.support, cap=args.cap)
    text = json.dumps(strategy_to_json(out), indent=1) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.trace:
        rng = SplitMix64(args.seed)
        lam = out.sample_lambda(rng)
        hist = History()
        questions = []
        for r in range(protocol.R):
            q = sample_questions(protocol, r, hist, rng)
            questions.append(q)
            hist = hist.extend(q, tuple("0" * w for w in protocol.a_widths[r]))
        header = f"# lambda {lam}\n# questions {';'.join(','.join(q) for q in questions)}\n"
        Path(args.trace).write_text(header + correction_trace(out, lam, questions))
    if args.out:
        sys.stdout.write(f"wrote {args.out} ({out.meta.get('construction')}, "
                         f"{len(out.support) if out.support is not None else 'sampled'} shared strings)\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    game, protocol = resolve_protocol(args.protocol)
    ida, a = resolve_strategy(args.strategy_a, game)
    idb, b = resolve_strategy(args.strategy_b, game)
    t0 = time.perf_counter()
    if args.shots is None:
        da, db = exact(protocol, a, args.cap), exact(protocol, b, args.cap)
        tv = total_variation(da, db)
        report = RunReport(game, f"{ida} vs {idb}", args.seed, "exact", game_value(protocol, da), tv=tv,
                           verdict="PASS" if tv <= args.tol else "FAIL",
                           extra={"value_b": game_value(protocol, db), "tolerance": args.tol})
    else:
        master = SplitMix64(args.seed)
        sa, sb = master.next_u64(), master.next_u64()
        ca, wa = sample_histories(protocol, a, args.shots, sa)
        cb, wb = sample_histories(protocol, b, args.shots, sb)
        tv = total_variation({h: c / args.shots for h, c in ca.items()},
                             {h: c / args.shots for h, c in cb.items()})
        chi2, p, dof = chi_square_homogeneity(ca, cb)
        report = RunReport(game, f"{ida} vs {idb}", args.seed, "shots", wa / args.shots, shots=args.shots,
                           tv=tv, chi2=chi2, p_value=p, dof=dof,
                           verdict="PASS" if p > args.alpha else "FAIL",
                           extra={"value_b": wb / args.shots, "alpha": args.alpha})
    if args.timing:
        report.wall_time = time.perf_counter() - t0
    sys.stdout.write(report.render())
    return EXIT_OK if report.verdict == "PASS" else EXIT_FAIL


def bench_conjugation(n: int, m: int, reps: int, seed: int) -> dict:
    """Time replay and tableau conjugation of one Pauli through ``m`` random gates."""
    rng = SplitMix64(seed)
    u = random_circuit(n, m, rng)
    p = random_pauli(n, rng, hermitian=True)
    replay = []
    for _ in range(reps):
        t = time.perf_counter()
        a = conjugate(u, p)
        replay.append(time.perf_counter() - t)
    t = time.perf_counter()
    tab = compile_tableau(u)
    compile_time = time.perf_counter() - t
    t = time.perf_counter()
    b = tab.conjugate(p)
    lookup = time.perf_counter() - t
    scaling = []
    for frac in (4, 2, 1):
        sub = type(u)(n, u.gates[: m // frac])
        t = time.perf_counter()
        conjugate(sub, p)
        dt = time.perf_counter() - t
        scaling.append((m // frac, dt / max(m // frac, 1)))
    per_gate = [s for _, s in scaling]
    return {"qubits": n, "gates": m, "reps": reps, "replay_seconds": min(replay),
            "gates_per_second": m / min(replay) if min(replay) > 0 else math.inf,
            "tableau_compile_seconds": compile_time, "tableau_conjugate_seconds": lookup,
            "tableau_matches_replay": a == b,
            "scaling": [{"gates": g, "seconds_per_gate": s} for g, s in scaling],
            "scaling_ratio": max(per_gate) / min(per_gate) if min(per_gate) > 0 else math.inf}


def cmd_bench(args) -> int:
    res = bench_conjugation(args.qubits, args.gates, args.reps, args.seed)
    print(f"conjugation through {res['gates']} gates on {res['qubits']} qubits")
    print(f"  replay     {res['replay_seconds']:.3f} s  ({res['gates_per_second']:.3g} gates/s, best of {args.reps})")
    print(f"  tableau    compile {res['tableau_compile_seconds']:.3f} s, apply {res['tableau_conjugate_seconds']:.2e} s")
    print(f"  agreement  {'yes' if res['tableau_matches_replay'] else 'NO'}")
    for row in res["scaling"]:
        print(f"  m={row['gates']:<10d} {row['seconds_per_gate'] * 1e9:8.1f} ns/gate")
    linear = res["scaling_ratio"] <= 2.0
    print(f"  per-gate cost spread {res['scaling_ratio']:.2f}x ({'linear within 2x' if linear else 'not linear within 2x'})")
    print(json.dumps(res, sort_keys=True))
    return EXIT_OK if res["tableau_matches_replay"] else EXIT_FAIL


def cmd_list_games(args) -> int:
    for name in list_bundles():
        b = load_bundle(name)
        p = b.protocol
        print(f"{name}  K={p.K} R={p.R} questions={p.q_widths} answers={p.a_widths}")
        for sid, strat in b.strategies.items():
            value, provenance = b.expected[sid]
            kind = _strategy_kind(strat)
            shown = "unannotated" if value is None else f"{value:.10g}"
            print(f"  {name}/{sid:<18} {kind:<9} value {shown:<14} {provenance}")
    return EXIT_OK


# argument parsing ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cliffmip", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, shots=True):
        p.add_argument("--seed", type=int, default=0, help="64-bit seed for all randomness")
        p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="qubit cap for dense execution")
        p.add_argument("--timing", action="store_true", help="include wall time (breaks byte-identical output)")
        if shots:
            mode = p.add_mutually_exclusive_group()
            mode.add_argument("--exact", action="store_true", help="exhaustive enumeration (default)")
            mode.add_argument("--shots", type=int, help="sample N independent runs")

    p = sub.add_parser("run", help="evaluate a strategy on a protocol")
    p.add_argument("protocol")
    p.add_argument("strategy")
    common(p)
    p.add_argument("--transcript", help="write one line per shot: index, history bits, verdict")
    p.add_argument("--no-exact", action="store_true", help="skip the exact comparison in --shots mode")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("declifford", help="compile a Clifford-model strategy into a classical one")
    p.add_argument("strategy")
    p.add_argument("protocol")
    p.add_argument("--hardcoded-q", help="fixed questions, rounds split by ';' and provers by ','")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--support", choices=("exact", "sample"), default="exact",
                   help="enumerate the shared-string distribution or ship a sampler")
    p.add_argument("--trace", help="write the correction operators for one sampled run")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.set_defaults(func=cmd_declifford)

    p = sub.add_parser("verify", help="compare the history distributions of two strategies")
    p.add_argument("protocol")
    p.add_argument("strategy_a")
    p.add_argument("strategy_b")
    common(p)
    p.add_argument("--tol", type=float, default=1e-9, help="TV tolerance in exact mode")
    p.add_argument("--alpha", type=float, default=1e-3, help="significance level in --shots mode")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="time Pauli conjugation through random Clifford circuits")
    p.add_argument("--qubits", type=int, default=512)
    p.add_argument("--gates", type=int, default=1_000_000)
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("list-games", help="list bundled protocols and strategies")
    p.set_defaults(func=cmd_list_games)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ProtocolError, ModelError, ResourceError, OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
