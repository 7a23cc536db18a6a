"""Command-line front end.

    posynt --formula '<ltlf>' --ins i --outs o --unobservable-ins u
    posynt --ltlf bm.ltlf --part bm.part --unobservable-ins 'a b'
    posynt bench DIR --reps 10 --hide-fraction 0.5 --seed 0

Exit codes: 0 realizable, 1 unrealizable, 2 usage or parse error,
3 resource limit.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import random
import re
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from .controller import build_controller, export_controller
from .game import solve_full, solve_otf
from .logic import (MEALY, MOORE, Context, Limits, LogicError, ParseError,
                    PartitionError, ResourceLimitExceeded)
from .translate import Translator, build_full

EXIT_REALIZABLE = 0
EXIT_UNREALIZABLE = 1
EXIT_USAGE = 2
EXIT_LIMIT = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def split_names(text) -> list:
    """Comma- or whitespace-separated names; ``''`` is the empty list."""
    if text is None:
        return []
    return [n for n in re.split(r"[,\s]+", text.strip()) if n]


@dataclass
class ProblemSpec:
    formula: str
    ins: list
    outs: list
    unobservable: list = field(default_factory=list)
    semantics: str = MEALY


def read_part(path) -> tuple[list, list]:
    ins = outs = None
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, rest = line.partition(":")
        if not sep:
            raise PartitionError(f"malformed part line {raw!r}")
        key = key.strip()
        if key == ".inputs":
            ins = rest.split()
        elif key == ".outputs":
            outs = rest.split()
        else:
            raise PartitionError(f"unknown part section {key!r}")
    if ins is None or outs is None:
        raise PartitionError(f"{path}: needs both .inputs and .outputs lines")
    return ins, outs


def load_part_pair(ltlf_path, part_path, unobservable=(), semantics=MEALY) -> ProblemSpec:
    """Problem from a ``.ltlf`` file and a ``.part`` file; the unobservable
    names are moved out of the declared inputs."""
    ins, outs = read_part(part_path)
    unobservable = list(unobservable)
    for u in unobservable:
        if u not in ins:
            raise PartitionError(f"unobservable {u!r} is not a declared input")
    formula = Path(ltlf_path).read_text().strip()
    return ProblemSpec(formula, [i for i in ins if i not in unobservable], outs,
                       unobservable, semantics)


def solve(spec: ProblemSpec, mode="otf", limits: Limits | None = None):
    """Parse and solve ``spec``; returns ``(context, formula, result)``."""
    ctx = Context(spec.ins, spec.outs, spec.unobservable, spec.semantics, limits)
    ctx.start_clock()
    f = ctx.parse(spec.formula)
    translator = Translator(ctx)
    if mode == "full":
        result = solve_full(build_full(translator, f))
    elif mode == "otf":
        result = solve_otf(f, translator)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return ctx, f, result


def _build_parser():
    p = _Parser(prog="posynt", description="LTLf synthesis under partial observability")
    p.add_argument("formula_text", nargs="?", metavar="FORMULA")
    p.add_argument("--formula", "-f")
    p.add_argument("--formula-file", "-F")
    p.add_argument("--ltlf")
    p.add_argument("--part")
    p.add_argument("--ins")
    p.add_argument("--outs")
    p.add_argument("--unobservable-ins", default="")
    p.add_argument("--semantics", choices=[MEALY, MOORE], default=MEALY)
    p.add_argument("--mode", choices=["otf", "full"], default="otf")
    p.add_argument("--print-strategy", action="store_true")
    p.add_argument("--format", choices=["text", "dot"], default="text")
    p.add_argument("--print-automaton", nargs="?", const="text", choices=["text", "dot"])
    p.add_argument("--stats", choices=["json"])
    p.add_argument("--timing", action="store_true",
                   help="include wall-clock time in the stats (not reproducible)")
    p.add_argument("--max-states", type=int)
    p.add_argument("--max-nodes", type=int)
    p.add_argument("--timeout", type=float)
    return p


def _spec_from_args(a) -> ProblemSpec:
    unobs = split_names(a.unobservable_ins)
    sources = [s for s in (a.formula_text, a.formula, a.formula_file, a.ltlf) if s is not None]
    if len(sources) != 1:
        raise UsageError("give exactly one formula source")
    if a.ltlf is not None or a.part is not None:
        if a.ltlf is None or a.part is None:
            raise UsageError("--ltlf and --part go together")
        spec = load_part_pair(a.ltlf, a.part, unobs, a.semantics)
        if a.ins is not None or a.outs is not None:
            raise UsageError("--ins/--outs conflict with --part")
        return spec
    text = a.formula_text if a.formula_text is not None else a.formula
    if a.formula_file is not None:
        text = Path(a.formula_file).read_text().strip()
    ins = split_names(a.ins)
    # an input listed as unobservable is simply not observed
    ins = [i for i in ins if i not in unobs]
    return ProblemSpec(text, ins, split_names(a.outs), unobs, a.semantics)


def _limits(a) -> Limits:
    kw = {}
    if a.max_states is not None:
        kw["max_states"] = a.max_states
    if a.max_nodes is not None:
        kw["max_nodes"] = a.max_nodes
    if a.timeout is not None:
        kw["timeout"] = a.timeout
    return Limits(**kw)


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] == "bench":
        return bench_main(argv[1:], stdout, stderr)
    try:
        a = _build_parser().parse_args(argv)
        spec = _spec_from_args(a)
        started = time.perf_counter()
        ctx, f, result = solve(spec, a.mode, _limits(a))
        out = ["REALIZABLE" if result.realizable else "UNREALIZABLE"]
        if a.print_strategy and result.realizable:
            c = build_controller(result.strategy, result.automaton)
            out.append(export_controller(c, a.format).rstrip("\n"))
        if a.print_automaton:
            m = result.automaton
            out.append((m.to_dot() if a.print_automaton == "dot" else m.to_text()).rstrip("\n"))
        if a.stats:
            stats = {"mode": a.mode}
            stats.update(result.stats)
            stats.pop("wall_ms", None)
            if a.timing:
                stats["wall_ms"] = round((time.perf_counter() - started) * 1000, 3)
            out.append(json.dumps(stats, sort_keys=True))
    except UsageError as e:
        print(f"error: usage: {e}", file=stderr)
        return EXIT_USAGE
    except (ParseError, PartitionError) as e:
        print(f"error: {type(e).__name__}: {e}", file=stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"error: io: {e}", file=stderr)
        return EXIT_USAGE
    except ResourceLimitExceeded as e:
        print(f"error: resource limit: {e}", file=stderr)
        return EXIT_LIMIT
    except LogicError as e:
        print(f"error: internal: {e}", file=stderr)
        return EXIT_USAGE
    stdout.write("\n".join(out) + "\n")
    return EXIT_REALIZABLE if result.realizable else EXIT_UNREALIZABLE


def main(argv=None):
    sys.exit(run(argv))


# -- benchmark harness ------------------------------------------------------------

BENCH_COLUMNS = ["instance", "rep", "hidden_set", "mode", "verdict", "states",
                 "deltas", "nodes", "ms", "status"]


def hidden_count(n_inputs: int, fraction: float) -> int:
    """``fraction`` of the inputs, rounded half up."""
    return min(n_inputs, int(math.floor(n_inputs * fraction + 0.5)))


def draw_hidden_sets(inputs, fraction, reps, rng):
    """Up to ``reps`` distinct subsets; fewer when all of them are used up."""
    k = hidden_count(len(inputs), fraction)
    available = math.comb(len(inputs), k)
    seen = []
    keys = set()
    while len(seen) < min(reps, available):
        pick = tuple(sorted(rng.sample(range(len(inputs)), k)))
        if pick not in keys:
            keys.add(pick)
            seen.append([inputs[j] for j in pick])
    return seen, reps > available


def _run_mode(spec, mode, timeout):
    started = time.perf_counter()
    try:
        _, _, result = solve(spec, mode, Limits(timeout=timeout))
    except ResourceLimitExceeded as e:
        status = "timeout" if "time" in str(e) else "limit"
        return {"verdict": "", "states": "", "deltas": "", "nodes": "",
                "ms": round((time.perf_counter() - started) * 1000, 1), "status": status}
    s = result.stats
    return {"verdict": "REALIZABLE" if result.realizable else "UNREALIZABLE",
            "states": s["state_count"], "deltas": s["delta_count"],
            "nodes": s["node_count"],
            "ms": round((time.perf_counter() - started) * 1000, 1), "status": "ok"}


def bench(directory, reps=10, fraction=0.5, seed=0, timeout=90.0,
          semantics=MEALY, modes=("otf", "full"), warn=None):
    """Rows of the benchmark report for every ``.ltlf``/``.part`` pair."""
    rows = []
    for ltlf in sorted(Path(directory).glob("*.ltlf")):
        name = ltlf.stem
        part = ltlf.with_suffix(".part")
        try:
            ins, _ = read_part(part)
            base = load_part_pair(ltlf, part, (), semantics)
        except (OSError, LogicError) as e:
            rows.append(dict.fromkeys(BENCH_COLUMNS, "") | {"instance": name, "status": "unreadable"})
            if warn:
                warn(f"skipping {name}: {e}")
            continue
        rng = random.Random(f"{seed}:{name}")
        hidden_sets, exhausted = draw_hidden_sets(ins, fraction, reps, rng)
        for rep, hidden in enumerate(hidden_sets):
            spec = ProblemSpec(base.formula, [i for i in ins if i not in hidden],
                               base.outs, hidden, semantics)
            runs = {m: _run_mode(spec, m, timeout) for m in modes}
            verdicts = {r["verdict"] for r in runs.values() if r["status"] == "ok"}
            for m, r in runs.items():
                if len(verdicts) > 1:
                    r["status"] = "disagree"
                elif (m == "otf" and "full" in runs and r["status"] == "ok"
                      and runs["full"]["status"] == "ok" and r["deltas"] > runs["full"]["states"]):
                    r["status"] = "not-lazy"
                rows.append({"instance": name, "rep": rep, "hidden_set": " ".join(hidden),
                             "mode": m, **r})
        if exhausted:
            rows.append(dict.fromkeys(BENCH_COLUMNS, "")
                        | {"instance": name, "rep": len(hidden_sets), "status": "exhausted"})
            if warn:
                warn(f"{name}: only {len(hidden_sets)} distinct hidden sets exist")
    return rows


def bench_main(argv, stdout, stderr) -> int:
    p = _Parser(prog="posynt bench")
    p.add_argument("directory")
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--hide-fraction", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timeout", type=float, default=90.0)
    p.add_argument("--semantics", choices=[MEALY, MOORE], default=MEALY)
    p.add_argument("--output", "-o")
    try:
        a = p.parse_args(argv)
    except UsageError as e:
        print(f"error: usage: {e}", file=stderr)
        return EXIT_USAGE
    if not 0 <= a.hide_fraction <= 1 or a.reps < 1:
        print("error: usage: need reps >= 1 and 0 <= hide-fraction <= 1", file=stderr)
        return EXIT_USAGE
    rows = bench(a.directory, a.reps, a.hide_fraction, a.seed, a.timeout, a.semantics,
                 warn=lambda msg: print(f"warning: {msg}", file=stderr))
    if a.output:
        fh = open(a.output, "w", newline="")
    else:
        fh = stdout
    try:
        w = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    finally:
        if a.output:
            fh.close()
    bad = any(r["status"] in ("disagree", "not-lazy") for r in rows)
    return 1 if bad else 0
