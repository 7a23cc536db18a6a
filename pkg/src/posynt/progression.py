"""Explicit formula progression and observable progression.

These are deliberately naive: one assignment at a time, exponential in the
number of unobservable variables.  They serve as the reference the symbolic
translation in :mod:`posynt.translate` is checked against.
"""
from __future__ import annotations

from typing import Mapping, NamedTuple, Sequence

from .logic import BINARY, Formula, assignments, fuse


class ProgResult(NamedTuple):
    remainder: Formula
    flag: bool


def _lift(op, p, q):
    ctx = p.remainder.ctx
    if op == "and":
        flag = p.flag and q.flag
    elif op == "or":
        flag = p.flag or q.flag
    elif op == "implies":
        flag = (not p.flag) or q.flag
    elif op == "iff":
        flag = p.flag == q.flag
    else:
        flag = p.flag != q.flag
    return ProgResult(ctx.combine(op, p.remainder, q.remainder), flag)


def _negate(p):
    return ProgResult(p.remainder.ctx.combine("not", p.remainder), not p.flag)


def fp(f: Formula, w: Mapping[str, bool]) -> ProgResult:
    """Progress ``f`` through one letter ``w``."""
    ctx = f.ctx
    op = f.op
    if op == "tt":
        return ProgResult(ctx.tt, True)
    if op == "ff":
        return ProgResult(ctx.ff, False)
    if op == "ap":
        if f.name not in w:
            raise ValueError(f"assignment does not cover {f.name!r}")
        return ProgResult(ctx.tt, True) if w[f.name] else ProgResult(ctx.ff, False)
    if op == "not":
        return _negate(fp(f.args[0], w))
    if op in BINARY:
        return _lift(op, fp(f.args[0], w), fp(f.args[1], w))
    if op == "X":
        return ProgResult(ctx.canonical(f.args[0]), True)
    if op == "N":
        return ProgResult(ctx.canonical(f.args[0]), False)
    if op == "F":
        return _lift("or", fp(f.args[0], w), ProgResult(ctx.canonical(f), False))
    if op == "G":
        return _lift("and", fp(f.args[0], w), ProgResult(ctx.canonical(f), True))
    if op == "U":
        a, b = f.args
        rest = _lift("and", fp(a, w), ProgResult(ctx.canonical(f), False))
        return _lift("or", fp(b, w), rest)
    if op == "R":
        a, b = f.args
        rest = _lift("or", fp(a, w), ProgResult(ctx.canonical(f), True))
        return _lift("and", fp(b, w), rest)
    raise ValueError(f"unknown operator {op!r}")


def fp_word(f: Formula, word: Sequence[Mapping[str, bool]]) -> ProgResult:
    if not word:
        raise ValueError("words are nonempty")
    result = None
    current = f
    for letter in word:
        result = fp(current, letter)
        current = result.remainder
    return result


def fp_obs(f: Formula, w_obs: Mapping[str, bool], unobservable=None) -> ProgResult:
    """Conjunction of ``fp(f, w)`` over every completion ``w`` of ``w_obs``.

    Completions range over the context's unobservable variables (or the names
    given in ``unobservable``) in lexicographic order of variable index.
    """
    ctx = f.ctx
    if unobservable is None:
        unobservable = [v.name for v in ctx.unobservable_variables]
    result = ProgResult(ctx.tt, True)
    for w_u in assignments(unobservable):
        result = _lift("and", result, fp(f, fuse(w_obs, w_u)))
    return result


def fp_obs_word(f: Formula, word: Sequence[Mapping[str, bool]],
                unobservable=None) -> ProgResult:
    if not word:
        raise ValueError("words are nonempty")
    result = None
    current = f
    for letter in word:
        result = fp_obs(current, letter, unobservable)
        current = result.remainder
    return result
