"""Multi-terminal BDDs with ``(formula, accepting)`` terminals.

All diagrams of a :class:`Manager` share one unique table, so two diagrams
denote the same function exactly when they are the same object.  Terminals
are fused with the lifted Boolean operations: ``(a, x) op (b, y)`` becomes
``([a op b], x op y)``.
"""
from __future__ import annotations

import math
from typing import Iterable, Mapping

from .logic import (BINARY, Context, Formula, LogicError, Proposition,
                    ResourceLimitExceeded, bool_op)


class OrderError(LogicError):
    """A node would break the variable order of its manager."""


class UnassignedVariableError(LogicError, KeyError):
    pass


class Terminal:
    __slots__ = ("dest", "accepting", "id")
    level = math.inf
    is_terminal = True

    def __init__(self, dest, accepting, id_):
        self.dest = dest
        self.accepting = accepting
        self.id = id_

    def __hash__(self):
        return self.id

    def __repr__(self):
        flag = "acc" if self.accepting else "rej"
        return f"<Terminal #{self.id} {self.dest} {flag}>"

    @property
    def pair(self):
        return (self.dest, self.accepting)


class Node:
    __slots__ = ("var", "low", "high", "id")
    is_terminal = False

    def __init__(self, var, low, high, id_):
        self.var = var
        self.low = low
        self.high = high
        self.id = id_

    def __hash__(self):
        return self.id

    @property
    def level(self):
        return self.var.index

    def __repr__(self):
        return f"<Node #{self.id} {self.var.name} lo=#{self.low.id} hi=#{self.high.id}>"


class Manager:
    """Unique table and operation caches for one :class:`Context`."""

    def __init__(self, ctx: Context):
        self.ctx = ctx
        self._terminals = {}
        self._unique = {}
        self._count = 0
        self._apply_cache = {}
        self._neg_cache = {}
        self._forall_cache = {}
        self.cache_hits = 0
        self.true = self.terminal(ctx.tt, True)
        self.false = self.terminal(ctx.ff, False)

    def __len__(self):
        return self._count

    @property
    def node_count(self):
        return self._count

    def _next_id(self):
        self._count += 1
        if self._count > self.ctx.limits.max_nodes:
            raise ResourceLimitExceeded(
                f"more than {self.ctx.limits.max_nodes} MTBDD nodes")
        return self._count - 1

    def _var(self, v):
        if isinstance(v, Proposition):
            return v
        return self.ctx.prop(v)

    def terminal(self, dest: Formula, accepting: bool) -> Terminal:
        dest = self.ctx.canonical(dest)
        key = (dest.id, bool(accepting))
        t = self._terminals.get(key)
        if t is None:
            t = Terminal(dest, bool(accepting), self._next_id())
            self._terminals[key] = t
        return t

    def ite_node(self, var, low, high):
        """Reduced node ``if var then high else low``."""
        var = self._var(var)
        if low is high:
            return low
        if low.level <= var.index or high.level <= var.index:
            raise OrderError(f"variable {var.name} must be above its children")
        key = (var.index, low.id, high.id)
        n = self._unique.get(key)
        if n is None:
            n = Node(var, low, high, self._next_id())
            self._unique[key] = n
        return n

    def literal(self, var, value=True):
        var = self._var(var)
        if value:
            return self.ite_node(var, self.false, self.true)
        return self.ite_node(var, self.true, self.false)

    def fuse(self, op, a: Terminal, b: Terminal) -> Terminal:
        dest = self.ctx.combine(op, a.dest, b.dest)
        return self.terminal(dest, bool_op(op, a.accepting, b.accepting))

    def apply(self, op, a, b):
        if op not in BINARY:
            raise ValueError(f"unknown operator {op!r}")
        if op == "and":
            if a is self.true:
                return b
            if b is self.true or a is b:
                return a
            if a is self.false or b is self.false:
                return self.false
        elif op == "or":
            if a is self.false:
                return b
            if b is self.false or a is b:
                return a
            if a is self.true or b is self.true:
                return self.true
        key = (op, a.id, b.id)
        r = self._apply_cache.get(key)
        if r is not None:
            self.cache_hits += 1
            return r
        if a.is_terminal and b.is_terminal:
            r = self.fuse(op, a, b)
        else:
            top = min(a.level, b.level)
            if a.level == top:
                var = a.var
                a0, a1 = a.low, a.high
            else:
                a0 = a1 = a
            if b.level == top:
                var = b.var
                b0, b1 = b.low, b.high
            else:
                b0 = b1 = b
            r = self.ite_node(var, self.apply(op, a0, b0), self.apply(op, a1, b1))
        self._apply_cache[key] = r
        return r

    def negate(self, a):
        r = self._neg_cache.get(a.id)
        if r is not None:
            self.cache_hits += 1
            return r
        if a.is_terminal:
            r = self.terminal(self.ctx.combine("not", a.dest), not a.accepting)
        else:
            r = self.ite_node(a.var, self.negate(a.low), self.negate(a.high))
        self._neg_cache[a.id] = r
        return r

    def forall_quantify(self, a, variables: Iterable):
        """Replace every node on ``variables`` by the conjunction of its children.

        The quantified variables must sit below all others in the order.
        """
        levels = frozenset(self._var(v).index for v in variables)
        if not levels:
            return a
        return self._forall(a, levels)

    def _forall(self, a, levels):
        if a.is_terminal:
            return a
        key = (a.id, levels)
        r = self._forall_cache.get(key)
        if r is not None:
            self.cache_hits += 1
            return r
        if a.var.index in levels:
            for child in (a.low, a.high):
                if not child.is_terminal and child.var.index not in levels:
                    raise OrderError(
                        f"{child.var.name} appears below quantified {a.var.name}")
            r = self.apply("and", self._forall(a.low, levels),
                           self._forall(a.high, levels))
        else:
            r = self.ite_node(a.var, self._forall(a.low, levels),
                              self._forall(a.high, levels))
        self._forall_cache[key] = r
        return r

    def evaluate(self, a, w: Mapping[str, bool]) -> Terminal:
        while not a.is_terminal:
            try:
                value = w[a.var.name]
            except KeyError:
                raise UnassignedVariableError(a.var.name) from None
            a = a.high if value else a.low
        return a

    def restrict(self, a, w: Mapping[str, bool]):
        """Cofactor ``a`` by the (partial) assignment ``w``."""
        memo = {}

        def go(n):
            if n.is_terminal:
                return n
            r = memo.get(n.id)
            if r is None:
                if n.var.name in w:
                    r = go(n.high if w[n.var.name] else n.low)
                else:
                    r = self.ite_node(n.var, go(n.low), go(n.high))
                memo[n.id] = r
            return r

        return go(a)


# -- traversal helpers -------------------------------------------------------------


def nodes(a):
    """Every node reachable from ``a``, depth first, low before high."""
    seen = set()
    out = []
    stack = [a]
    while stack:
        n = stack.pop()
        if n.id in seen:
            continue
        seen.add(n.id)
        out.append(n)
        if not n.is_terminal:
            stack.append(n.high)
            stack.append(n.low)
    return out


def terminals(a):
    """Distinct terminals below ``a`` in structural order (low before high)."""
    return [n for n in nodes(a) if n.is_terminal]


def variables(a):
    return {n.var for n in nodes(a) if not n.is_terminal}


def paths(a):
    """Yield ``(cube, terminal)`` for every root-to-terminal path, low first."""
    cube = {}

    def go(n):
        if n.is_terminal:
            yield dict(cube), n
            return
        for value, child in ((False, n.low), (True, n.high)):
            cube[n.var.name] = value
            yield from go(child)
            del cube[n.var.name]

    yield from go(a)


def is_ordered(a) -> bool:
    for n in nodes(a):
        if n.is_terminal:
            continue
        if n.low is n.high:
            return False
        if n.low.level <= n.level or n.high.level <= n.level:
            return False
    return True


def to_dot(roots: Mapping[str, object], name="mtbdd") -> str:
    """DOT rendering: dashed low edges, solid high edges, and doubled boxes
    for accepting terminals."""
    lines = [f"digraph {name} {{", "  node [fontname=Helvetica];"]
    seen = set()
    for label, root in roots.items():
        rid = f"root_{len(seen)}_{root.id}"
        lines.append(f'  {rid} [shape=plaintext, label="{_esc(label)}"];')
        lines.append(f"  {rid} -> n{root.id} [style=bold, arrowhead=none];")
        for n in nodes(root):
            if n.id in seen:
                continue
            seen.add(n.id)
            if n.is_terminal:
                peri = 2 if n.accepting else 1
                lines.append(f'  n{n.id} [shape=box, peripheries={peri}, '
                             f'label="{_esc(str(n.dest))}"];')
            else:
                lines.append(f'  n{n.id} [shape=circle, label="{n.var.name}"];')
                lines.append(f"  n{n.id} -> n{n.low.id} [style=dashed];")
                lines.append(f"  n{n.id} -> n{n.high.id};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _esc(s):
    return s.replace("\\", "\\\\").replace('"', '\\"')
