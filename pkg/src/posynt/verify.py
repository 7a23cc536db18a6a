"""Brute-force oracles built only on :func:`posynt.logic.models`.

Nothing here touches progression, MTBDDs or the game solver, which is the
point: these functions are what the symbolic pipeline is tested against.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .logic import (MEALY, Formula, LogicError, assignments, letter_bits,
                    models, models_table)


class OracleBudgetExceeded(LogicError):
    pass


@dataclass(frozen=True)
class OracleBudget:
    max_length: int = 4
    max_variables: int = 6
    max_enumeration: int = 2_000_000

    def __post_init__(self):
        if min(self.max_length, self.max_variables, self.max_enumeration) < 1:
            raise ValueError("oracle budget fields must be positive")


DEFAULT_BUDGET = OracleBudget()


class Realizability(enum.Enum):
    REALIZABLE = "realizable"
    UNREALIZABLE_WITHIN_HORIZON = "unrealizable-within-horizon"


class _Counter:
    def __init__(self, budget):
        self.budget = budget
        self.n = 0

    def tick(self, k=1):
        self.n += k
        if self.n > self.budget.max_enumeration:
            raise OracleBudgetExceeded(
                f"more than {self.budget.max_enumeration} enumeration steps")


def _names(ctx):
    ins = [v.name for v in ctx.input_variables]
    outs = [v.name for v in ctx.output_variables]
    unobs = [v.name for v in ctx.unobservable_variables]
    return ins, outs, unobs


def _check(ctx, length, budget):
    if len(ctx.variables) > budget.max_variables:
        raise OracleBudgetExceeded(
            f"{len(ctx.variables)} variables exceed the budget of {budget.max_variables}")
    if length > budget.max_length:
        raise OracleBudgetExceeded(
            f"length {length} exceeds the budget of {budget.max_length}")


def _all_completions_model(f, word, unobs, counter):
    k = len(word)
    for comp in itertools.product(list(assignments(unobs)), repeat=k):
        counter.tick()
        trace = [dict(a, **b) for a, b in zip(word, comp)]
        if not models(trace, 0, f):
            return False
    return True


def oracle_belief_language(f: Formula, word: Sequence[Mapping[str, bool]],
                           budget: OracleBudget = DEFAULT_BUDGET) -> bool:
    """Whether every completion of the observable ``word`` models ``f``."""
    ctx = f.ctx
    _check(ctx, len(word), budget)
    if not word:
        raise ValueError("words are nonempty")
    _, _, unobs = _names(ctx)
    return _all_completions_model(f, list(word), unobs, _Counter(budget))


def belief_language_table(f: Formula, length: int,
                          budget: OracleBudget = DEFAULT_BUDGET) -> np.ndarray:
    """:func:`oracle_belief_language` for every observable word of ``length``.

    Words are numbered as in :func:`posynt.logic.letter_bits` over the
    observable variables in context order.
    """
    ctx = f.ctx
    _check(ctx, length, budget)
    obs = [v.name for v in ctx.observable_variables]
    unobs = [v.name for v in ctx.unobservable_variables]
    total = 1 << (len(obs) + len(unobs)) * length
    if total > budget.max_enumeration:
        raise OracleBudgetExceeded(f"{total} traces exceed the enumeration budget")
    table = models_table(f, obs + unobs, length, letter_bits(obs + unobs, length))
    shape = (1 << len(obs), 1 << len(unobs)) * length
    table = table.reshape(shape)
    return table.all(axis=tuple(range(1, 2 * length, 2))).reshape(-1)


def oracle_realizable(f: Formula, horizon: int,
                      budget: OracleBudget = DEFAULT_BUDGET) -> Realizability:
    """Search every controller decision tree of depth ``horizon``.

    A leaf terminates after the current step; it is winning when all
    unobservable completions of the history so far model ``f``.
    """
    ctx = f.ctx
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    _check(ctx, horizon, budget)
    ins, outs, unobs = _names(ctx)
    in_letters = list(assignments(ins))
    out_letters = list(assignments(outs))
    counter = _Counter(budget)
    memo = {}

    def done(hist):
        key = tuple(tuple(sorted(w.items())) for w in hist)
        r = memo.get(key)
        if r is None:
            r = memo[key] = _all_completions_model(f, hist, unobs, counter)
        return r

    def move(hist, w_in, w_out, depth):
        letter = dict(w_in, **w_out)
        nxt = hist + [letter]
        return done(nxt) or win(nxt, depth - 1)

    def win(hist, depth):
        if depth == 0:
            return False
        counter.tick()
        if ctx.semantics == MEALY:
            return all(any(move(hist, i, o, depth) for o in out_letters)
                       for i in in_letters)
        return any(all(move(hist, i, o, depth) for i in in_letters)
                   for o in out_letters)

    if win([], horizon):
        return Realizability.REALIZABLE
    return Realizability.UNREALIZABLE_WITHIN_HORIZON
