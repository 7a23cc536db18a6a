"""Terminating Mealy/Moore controllers built from game strategies."""
from __future__ import annotations

import random
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from . import mtbdd
from .logic import (MOORE, Formula, LogicError, assignments, models)
from .mtbdd import Manager
from .translate import Mtdfa, Translator


class _Terminate:
    __slots__ = ()

    def __repr__(self):
        return "TERMINATE"

    def __str__(self):
        return "TERMINATE"

    def __reduce__(self):
        return "TERMINATE"


TERMINATE = _Terminate()


@dataclass(frozen=True)
class Transition:
    """``guard`` is a disjoint cover of input cubes, each a tuple of
    ``(name, value)`` pairs; ``outputs`` assigns every output."""
    guard: tuple
    outputs: tuple
    target: object

    def matches(self, w: Mapping[str, bool]) -> bool:
        return any(all(w[n] == v for n, v in cube) for cube in self.guard)

    @property
    def output_map(self):
        return dict(self.outputs)


@dataclass(frozen=True)
class Controller:
    semantics: str
    ins: tuple
    outs: tuple
    states: tuple
    transitions: tuple
    initial: int = 0

    def __len__(self):
        return len(self.states)

    def step(self, state: int, w_in: Mapping[str, bool]) -> Transition:
        hits = [t for t in self.transitions[state] if t.matches(w_in)]
        if len(hits) != 1:
            raise LogicError(f"state {state} has {len(hits)} transitions for {w_in}")
        return hits[0]

    def run(self, inputs: Sequence[Mapping[str, bool]]):
        """Outputs produced on ``inputs`` and whether the run terminated."""
        q = self.initial
        outs = []
        for w in inputs:
            t = self.step(q, w)
            outs.append(t.output_map)
            if t.target is TERMINATE:
                return outs, True
            q = t.target
        return outs, False


# -- construction ------------------------------------------------------------------


def _cover(manager: Manager, cubes, names):
    """Disjoint cube cover of the union of ``cubes``."""
    acc = manager.false
    for cube in cubes:
        c = manager.true
        for n in reversed(names):
            if n in cube:
                c = manager.apply("and", manager.literal(n, cube[n]), c)
        acc = manager.apply("or", acc, c)
    out = []
    for cube, t in mtbdd.paths(acc):
        if t is manager.true:
            out.append(tuple((n, cube[n]) for n in names if n in cube))
    return tuple(out)


def build_controller(strategy: Mapping, m: Mtdfa) -> Controller:
    """Controller whose states are the strategy-reachable belief states.

    Each non-losing path of a restricted diagram is one move.  Outputs the
    path leaves free take their most common value among the state's other
    moves (``False`` on ties), so Mealy machines stay compact and Moore
    machines keep one output per state.
    """
    ctx = m.ctx
    ins = tuple(v.name for v in ctx.input_variables)
    outs = tuple(v.name for v in ctx.output_variables)
    false = m.translator.manager.false
    local = Manager(ctx)
    order = [m.initial]
    index = {m.initial: 0}
    rows = []
    i = 0
    while i < len(order):
        s = order[i]
        i += 1
        moves = [(cube, t) for cube, t in mtbdd.paths(strategy[s]) if t is not false]
        votes = {o: 0 for o in outs}
        for cube, _ in moves:
            for o in outs:
                if o in cube:
                    votes[o] += 1 if cube[o] else -1
        groups = {}
        for cube, t in moves:
            out = tuple((o, cube[o] if o in cube else votes[o] > 0) for o in outs)
            if t.accepting:
                target = TERMINATE
            else:
                if t.dest not in index:
                    index[t.dest] = len(order)
                    order.append(t.dest)
                target = index[t.dest]
            groups.setdefault((out, target), []).append(
                {n: cube[n] for n in ins if n in cube})
        rows.append(tuple(Transition(_cover(local, cubes, ins), out, target)
                          for (out, target), cubes in groups.items()))
    return Controller(ctx.semantics, ins, outs, tuple(order), tuple(rows))


# -- export --------------------------------------------------------------------------


def _lits(pairs):
    return "&".join(n if v else "!" + n for n, v in pairs) or "true"


def guard_text(t: Transition) -> str:
    return " | ".join(_lits(c) for c in t.guard) or "false"


def label_text(t: Transition) -> str:
    return f"{guard_text(t)} / {_lits(t.outputs)}"


def to_text(c: Controller) -> str:
    lines = [f"semantics: {c.semantics}",
             "ins: " + " ".join(c.ins),
             "outs: " + " ".join(c.outs)]
    for q, row in enumerate(c.transitions):
        for t in row:
            lines.append(f'{q} "{label_text(t)}" {t.target}')
    return "\n".join(lines) + "\n"


def to_dot(c: Controller) -> str:
    lines = ["digraph controller {", "  rankdir=LR;", "  node [fontname=Helvetica];",
             '  init [shape=point];', "  init -> q0;"]
    for q, s in enumerate(c.states):
        label = str(s).replace("\\", "\\\\").replace('"', '\\"')
        lines.append(f'  q{q} [shape=circle, label="{label}"];')
    lines.append('  term [shape=doublecircle, label=""];')
    for q, row in enumerate(c.transitions):
        for t in row:
            dst = "term" if t.target is TERMINATE else f"q{t.target}"
            lines.append(f'  q{q} -> {dst} [label="{label_text(t)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_controller(c: Controller, format="text") -> str:
    if format == "text":
        return to_text(c)
    if format == "dot":
        return to_dot(c)
    raise ValueError(f"unknown controller format {format!r}")


_LINE = re.compile(r'^(\d+) "(.*) / (.*)" (\d+|TERMINATE)$')


def _parse_lits(text):
    text = text.strip()
    if text == "true":
        return ()
    out = []
    for lit in text.split("&"):
        lit = lit.strip()
        out.append((lit[1:], False) if lit.startswith("!") else (lit, True))
    return tuple(out)


def parse_controller(text: str) -> Controller:
    """Inverse of :func:`to_text`; states are labelled by their index."""
    lines = text.splitlines()
    header = {}
    for line in lines[:3]:
        key, _, value = line.partition(":")
        header[key.strip()] = value.split()
    if set(header) != {"semantics", "ins", "outs"}:
        raise ValueError("missing controller header")
    rows = {}
    for line in lines[3:]:
        if not line.strip():
            continue
        mt = _LINE.match(line)
        if mt is None:
            raise ValueError(f"malformed transition line {line!r}")
        q, guard, outs, target = mt.groups()
        cubes = tuple(_parse_lits(c) for c in guard.split("|"))
        target = TERMINATE if target == "TERMINATE" else int(target)
        rows.setdefault(int(q), []).append(Transition(cubes, _parse_lits(outs), target))
    n = max(rows, default=-1) + 1
    return Controller(header["semantics"][0], tuple(header["ins"]), tuple(header["outs"]),
                      tuple(str(q) for q in range(n)),
                      tuple(tuple(rows.get(q, ())) for q in range(n)))


# -- verification ----------------------------------------------------------------------


@dataclass
class VerifyResult:
    ok: bool
    reason: str = ""
    witness: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def _check_shape(c: Controller, ctx):
    ins = tuple(v.name for v in ctx.input_variables)
    outs = tuple(v.name for v in ctx.output_variables)
    if c.ins != ins or c.outs != outs:
        return f"controller signature {c.ins}/{c.outs} differs from {ins}/{outs}"
    if c.semantics != ctx.semantics:
        return f"controller is {c.semantics}, problem is {ctx.semantics}"
    for q, row in enumerate(c.transitions):
        for t in row:
            if t.target is not TERMINATE and not 0 <= t.target < len(c.states):
                return f"state {q} jumps to unknown state {t.target}"
            if tuple(n for n, _ in t.outputs) != outs:
                return f"state {q} has a move without a full output assignment"
        for w in assignments(ins):
            hits = sum(t.matches(w) for t in row)
            if hits != 1:
                return f"state {q} has {hits} moves on input {w}"
        if c.semantics == MOORE and len({t.outputs for t in row}) > 1:
            return f"Moore state {q} outputs depend on the current input"
    return None


def product_check(c: Controller, m: Mtdfa) -> VerifyResult:
    """Run ``c`` against the belief automaton on every input history.

    Passes when the controller terminates exactly on accepting transitions
    and the product has no cycle, so every play terminates.
    """
    ctx = m.ctx
    ins = c.ins
    start = (c.initial, m.initial)
    colour = {start: 1}
    stack = [(start, iter(assignments(ins)), [])]
    while stack:
        (q, s), letters, trail = stack[-1]
        w = next(letters, None)
        if w is None:
            colour[(q, s)] = 2
            stack.pop()
            continue
        ctx.check_time()
        t = c.step(q, w)
        letter = dict(w)
        letter.update(t.outputs)
        term = m.step(s, letter)
        path = trail + [letter]
        if t.target is TERMINATE:
            if not term.accepting:
                return VerifyResult(False, "terminates on a rejecting transition", path)
            continue
        if term.accepting:
            return VerifyResult(False, "continues past an accepting transition", path)
        nxt = (t.target, term.dest)
        mark = colour.get(nxt)
        if mark == 1:
            return VerifyResult(False, "play can loop without terminating", path)
        if mark is None:
            colour[nxt] = 1
            stack.append((nxt, iter(assignments(ins)), path))
    return VerifyResult(True)


def semantic_check(c: Controller, formula: Formula, exhaustive_limit=5,
                   samples=64, seed=0) -> VerifyResult:
    """Check realizability directly on concrete traces.

    For every observable input history leading to termination, every
    completion of the unobservable inputs (of the same length) must model
    ``formula``.  Completions are enumerated when there are at most
    ``exhaustive_limit`` variables and sampled otherwise.
    """
    ctx = formula.ctx
    unobs = [v.name for v in ctx.unobservable_variables]
    exhaustive = len(ctx.variables) <= exhaustive_limit
    rng = random.Random(seed)
    horizon = len(c.states)

    def completions(k):
        if exhaustive:
            for w in assignments([f"{u}@{j}" for j in range(k) for u in unobs]):
                yield [{u: w[f"{u}@{j}"] for u in unobs} for j in range(k)]
        else:
            for _ in range(samples):
                yield [{u: rng.random() < 0.5 for u in unobs} for _ in range(k)]

    stack = [(c.initial, [])]
    while stack:
        q, prefix = stack.pop()
        ctx.check_time()
        if len(prefix) >= horizon:
            return VerifyResult(False, "no termination within the state bound", prefix)
        letters = list(assignments(c.ins))
        if not exhaustive and len(letters) > samples:
            letters = rng.sample(letters, samples)
        for w in letters:
            t = c.step(q, w)
            letter = dict(w)
            letter.update(t.outputs)
            trace = prefix + [letter]
            if t.target is TERMINATE:
                for comp in completions(len(trace)):
                    full = [dict(a, **b) for a, b in zip(trace, comp)]
                    if not models(full, 0, formula):
                        return VerifyResult(False, "terminated trace violates the formula", full)
            else:
                stack.append((t.target, trace))
    return VerifyResult(True)


def verify_controller(c: Controller, formula: Formula, m: Mtdfa | None = None,
                      **kwargs) -> VerifyResult:
    """Product check against the belief automaton, then the semantic check."""
    ctx = formula.ctx
    problem = _check_shape(c, ctx)
    if problem:
        return VerifyResult(False, problem)
    if m is None:
        m = Mtdfa(Translator(ctx), ctx.canonical(formula))
    r = product_check(c, m)
    if not r:
        return r
    return semantic_check(c, formula, **kwargs)


def reachable_states(c: Controller):
    seen = [c.initial]
    queue = deque(seen)
    while queue:
        q = queue.popleft()
        for t in c.transitions[q]:
            if t.target is not TERMINATE and t.target not in seen:
                seen.append(t.target)
                queue.append(t.target)
    return seen
