"""Symbolic translation of LTLf formulas into belief-state MTDFAs.

``tr(f)`` builds one MTBDD holding every progression of ``f`` at once.
Quantifying the unobservable variables universally out of it gives the
outgoing transitions of belief state ``f``.  States are canonical formulas
and acceptance is carried by transitions.
"""
from __future__ import annotations

from collections import deque
from typing import Mapping, Sequence

import numpy as np

from . import mtbdd
from .logic import (BINARY, Context, Formula, LogicError,
                    ResourceLimitExceeded, assignments)
from .mtbdd import Manager


class Translator:
    """Memoized ``tr`` and belief deltas for one context."""

    def __init__(self, ctx: Context):
        self.ctx = ctx
        self.manager = Manager(ctx)
        self._tr = {}
        self._delta = {}
        self.delta_count = 0

    def tr(self, f: Formula):
        r = self._tr.get(f.id)
        if r is not None:
            return r
        m = self.manager
        op = f.op
        if op == "tt":
            r = m.true
        elif op == "ff":
            r = m.false
        elif op == "ap":
            r = m.literal(f.name)
        elif op == "not":
            r = m.negate(self.tr(f.args[0]))
        elif op in BINARY:
            r = m.apply(op, self.tr(f.args[0]), self.tr(f.args[1]))
        elif op == "X":
            r = m.terminal(f.args[0], True)
        elif op == "N":
            r = m.terminal(f.args[0], False)
        elif op == "F":
            r = m.apply("or", self.tr(f.args[0]), m.terminal(f, False))
        elif op == "G":
            r = m.apply("and", self.tr(f.args[0]), m.terminal(f, True))
        elif op == "U":
            a, b = f.args
            rest = m.apply("and", self.tr(a), m.terminal(f, False))
            r = m.apply("or", self.tr(b), rest)
        elif op == "R":
            a, b = f.args
            rest = m.apply("or", self.tr(a), m.terminal(f, True))
            r = m.apply("and", self.tr(b), rest)
        else:
            raise LogicError(f"unknown operator {op!r}")
        self._tr[f.id] = r
        return r

    def belief_delta(self, state: Formula):
        """Outgoing transitions of ``state`` over the observable variables."""
        r = self._delta.get(state.id)
        if r is None:
            self.ctx.check_time()
            self.delta_count += 1
            r = self.manager.forall_quantify(self.tr(state),
                                             self.ctx.unobservable_variables)
            self._delta[state.id] = r
        return r

    def has_delta(self, state: Formula) -> bool:
        return state.id in self._delta


class Mtdfa:
    """Belief-state automaton: canonical formulas mapped to their deltas.

    Built either in full by :func:`build_full` or partially by the on-the-fly
    game solver, in which case some terminal destinations have no entry yet.
    """

    def __init__(self, translator: Translator, initial: Formula):
        self.translator = translator
        self.ctx = translator.ctx
        self.initial = initial
        self.delta = {}

    @property
    def semantics(self):
        return self.ctx.semantics

    @property
    def partition(self):
        return self.ctx.partition

    @property
    def states(self):
        return list(self.delta)

    def __len__(self):
        return len(self.delta)

    def __contains__(self, state):
        return state in self.delta

    def add(self, state):
        if state not in self.delta:
            if len(self.delta) >= self.ctx.limits.max_states:
                raise ResourceLimitExceeded(
                    f"more than {self.ctx.limits.max_states} belief states")
            self.delta[state] = self.translator.belief_delta(state)
        return self.delta[state]

    def successors(self, state):
        """Destinations of ``state``'s terminals, in structural order."""
        out = []
        for t in mtbdd.terminals(self.delta[state]):
            if t.dest not in out:
                out.append(t.dest)
        return out

    def pending(self):
        return [d for s in self.delta for d in self.successors(s)
                if d not in self.delta]

    def step(self, state, w_obs: Mapping[str, bool]):
        return self.translator.manager.evaluate(self.add(state), w_obs)

    # -- export -----------------------------------------------------------------

    def state_names(self):
        return {s: f"s{i}" for i, s in enumerate(self.delta)}

    def to_dot(self) -> str:
        roots = {str(s): d for s, d in self.delta.items()}
        return mtbdd.to_dot(roots, name="mtdfa")

    def to_text(self) -> str:
        """One line per MTBDD path: state, cube, acceptance, successor."""
        names = self.state_names()
        obs = [v.name for v in self.ctx.observable_variables]
        lines = [f"semantics: {self.semantics}",
                 "vars: " + " ".join(obs),
                 f"initial: {names.get(self.initial, '?')}"]
        for s, name in names.items():
            lines.append(f"state {name}: {s}")
        extra = {}
        for s, name in names.items():
            for cube, t in mtbdd.paths(self.delta[s]):
                succ = names.get(t.dest)
                if succ is None:
                    succ = extra.setdefault(t.dest, f"p{len(extra)}")
                lits = []
                for v in obs:
                    if v not in cube:
                        lits.append("-")
                    else:
                        lits.append(v if cube[v] else "!" + v)
                lines.append(f"{name}\t{' '.join(lits) or '-'}\t"
                             f"{int(t.accepting)}\t{succ}")
        for dest, name in extra.items():
            lines.append(f"pending {name}: {dest}")
        return "\n".join(lines) + "\n"


def build_full(translator: Translator, formula: Formula) -> Mtdfa:
    """Breadth-first closure of the initial state under all terminals."""
    ctx = translator.ctx
    initial = ctx.canonical(formula)
    m = Mtdfa(translator, initial)
    queue = deque([initial])
    m.add(initial)
    while queue:
        s = queue.popleft()
        for dest in m.successors(s):
            if dest not in m.delta:
                m.add(dest)
                queue.append(dest)
    return m


def accepts(m: Mtdfa, word: Sequence[Mapping[str, bool]]) -> bool:
    """Run ``word`` from the initial state; acceptance of the last transition."""
    if not word:
        raise ValueError("words are nonempty")
    state = m.initial
    t = None
    for letter in word:
        t = m.step(state, letter)
        state = t.dest
    return t.accepting


def transition_table(m: Mtdfa, names: Sequence[str]):
    """Dense successor/acceptance tables over all letters of ``names``.

    Returns ``(states, succ, acc)`` where ``succ[s, letter]`` indexes
    ``states``; letters are numbered first variable most significant.
    """
    letters = list(assignments(names))
    index = {}
    order = [m.initial]
    index[m.initial] = 0
    succ_rows, acc_rows = [], []
    i = 0
    while i < len(order):
        s = order[i]
        srow, arow = [], []
        for w in letters:
            t = m.step(s, w)
            if t.dest not in index:
                index[t.dest] = len(order)
                order.append(t.dest)
            srow.append(index[t.dest])
            arow.append(t.accepting)
        succ_rows.append(srow)
        acc_rows.append(arow)
        i += 1
    return order, np.array(succ_rows, dtype=np.int64), np.array(acc_rows, dtype=bool)


def language_table(m: Mtdfa, names: Sequence[str], length: int):
    """Acceptance of every word of ``length`` over ``names`` (same numbering
    as :func:`posynt.logic.letter_bits`)."""
    _, succ, acc = transition_table(m, names)
    width = 1 << len(names)
    count = width ** length
    idx = np.arange(count, dtype=np.int64)
    state = np.zeros(count, dtype=np.int64)
    result = None
    for t in range(length):
        letter = (idx // width ** (length - 1 - t)) % width
        result = acc[state, letter]
        state = succ[state, letter]
    return result
