"""LTLf formulas over nonempty finite traces.

Formulas are hash-consed inside a :class:`Context`: building the same node
twice returns the same object, so identity doubles as structural equality.
Each context also owns a small BDD package deciding propositional
equivalence.  Two formulas are propositionally equivalent when their Boolean
skeletons agree, where the skeleton abstracts every maximal temporal
subformula into a fresh Boolean variable.
"""
from __future__ import annotations

import itertools
import math
import re
import time
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

MEALY = "mealy"
MOORE = "moore"
SEMANTICS = (MEALY, MOORE)

CONSTANTS = ("tt", "ff")
BINARY = ("and", "or", "implies", "iff", "xor")
TEMPORAL_UNARY = ("X", "N", "F", "G")
TEMPORAL_BINARY = ("U", "R")
TEMPORAL = TEMPORAL_UNARY + TEMPORAL_BINARY

# truth tables indexed by (a, b)
_TABLES = {
    "and": lambda a, b: a and b,
    "or": lambda a, b: a or b,
    "implies": lambda a, b: (not a) or b,
    "iff": lambda a, b: a == b,
    "xor": lambda a, b: a != b,
}


def bool_op(op: str, a: bool, b: bool) -> bool:
    return _TABLES[op](a, b)


class LogicError(Exception):
    """Base class for errors raised by this package."""


class ParseError(LogicError, ValueError):
    """Malformed formula text; ``offset`` is the character position."""

    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UndeclaredAtomError(ParseError):
    def __init__(self, atom, offset):
        LogicError.__init__(self, f"undeclared atom {atom!r} at offset {offset}")
        self.atom = atom
        self.offset = offset


class PartitionError(LogicError, ValueError):
    """Inconsistent split of the variables into inputs/outputs/unobservables."""


class ResourceLimitExceeded(LogicError):
    """A state, node or time budget was exhausted."""


@dataclass(frozen=True)
class Proposition:
    name: str
    index: int

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Partition:
    """Observable inputs, outputs and unobservable inputs."""

    ins: tuple = ()
    outs: tuple = ()
    unobservable: tuple = ()

    def __post_init__(self):
        for field in ("ins", "outs", "unobservable"):
            object.__setattr__(self, field, tuple(getattr(self, field)))
        seen = {}
        for field in ("ins", "outs", "unobservable"):
            for name in getattr(self, field):
                if name in seen:
                    raise PartitionError(
                        f"variable {name!r} is listed in both "
                        f"{seen[name]} and {field}")
                seen[name] = field

    @property
    def observable(self):
        return self.ins + self.outs

    @property
    def variables(self):
        return self.ins + self.outs + self.unobservable


@dataclass
class Limits:
    max_states: int = 10**6
    max_nodes: int = 10**7
    timeout: float | None = None


class Formula:
    """Interned LTLf syntax node.  Do not instantiate directly."""

    __slots__ = ("op", "args", "name", "id", "ctx")

    def __init__(self, op, args, name, id_, ctx):
        self.op = op
        self.args = args
        self.name = name
        self.id = id_
        self.ctx = ctx

    def __hash__(self):
        return self.id

    def __lt__(self, other):
        return self.id < other.id

    def __repr__(self):
        return f"<Formula #{self.id} {self}>"

    def __str__(self):
        return to_str(self)

    @property
    def is_temporal(self):
        return self.op in TEMPORAL

    # raw (non-simplifying) builders, handy in tests
    def __and__(self, other):
        return self.ctx.make("and", self, other)

    def __or__(self, other):
        return self.ctx.make("or", self, other)

    def __invert__(self):
        return self.ctx.make("not", self)

    def __rshift__(self, other):
        return self.ctx.make("implies", self, other)


class BooleanManager:
    """Reduced ordered BDDs over integer levels, used for skeleton keys.

    Nodes are integers; 0 and 1 are the constants.  There are no complement
    edges, so canonicity is plain structural identity.
    """

    FALSE = 0
    TRUE = 1

    def __init__(self):
        self._level = [math.inf, math.inf]
        self._low = [0, 1]
        self._high = [0, 1]
        self._unique = {}
        self._cache = {}

    def __len__(self):
        return len(self._level)

    def level(self, u):
        return self._level[u]

    def low(self, u):
        return self._low[u]

    def high(self, u):
        return self._high[u]

    def var(self, level):
        return self.mk(level, self.FALSE, self.TRUE)

    def mk(self, level, low, high):
        if low == high:
            return low
        key = (level, low, high)
        u = self._unique.get(key)
        if u is None:
            u = len(self._level)
            self._level.append(level)
            self._low.append(low)
            self._high.append(high)
            self._unique[key] = u
        return u

    def negate(self, u):
        return self.apply("xor", u, self.TRUE)

    def apply(self, op, a, b):
        if a <= 1 and b <= 1:
            return int(bool_op(op, bool(a), bool(b)))
        if op == "and":
            if a == 0 or b == 0:
                return 0
            if a == 1:
                return b
            if b == 1 or a == b:
                return a
        elif op == "or":
            if a == 1 or b == 1:
                return 1
            if a == 0:
                return b
            if b == 0 or a == b:
                return a
        key = (op, a, b)
        r = self._cache.get(key)
        if r is not None:
            return r
        la, lb = self._level[a], self._level[b]
        top = min(la, lb)
        a0, a1 = (self._low[a], self._high[a]) if la == top else (a, a)
        b0, b1 = (self._low[b], self._high[b]) if lb == top else (b, b)
        r = self.mk(top, self.apply(op, a0, b0), self.apply(op, a1, b1))
        self._cache[key] = r
        return r

    def support(self, u):
        seen, out, stack = set(), set(), [u]
        while stack:
            v = stack.pop()
            if v <= 1 or v in seen:
                continue
            seen.add(v)
            out.add(self._level[v])
            stack.append(self._low[v])
            stack.append(self._high[v])
        return out


class Context:
    """Owns the interning tables for one synthesis problem.

    The variable order is fixed here once and for all: observable inputs,
    then outputs for Mealy semantics (outputs first for Moore), with the
    unobservable inputs always last.  A context is not thread-safe.
    """

    def __init__(self, ins=(), outs=(), unobservable=(), semantics=MEALY,
                 limits: Limits | None = None):
        if semantics not in SEMANTICS:
            raise PartitionError(f"unknown semantics {semantics!r}")
        self.partition = Partition(ins, outs, unobservable)
        self.semantics = semantics
        self.limits = limits or Limits()
        self._deadline = None
        self._table = {}
        self._formulas = []
        self._props = {}
        p = self.partition
        if semantics == MEALY:
            order = p.ins + p.outs + p.unobservable
        else:
            order = p.outs + p.ins + p.unobservable
        self.variables = tuple(Proposition(n, i) for i, n in enumerate(order))
        for prop in self.variables:
            self._props[prop.name] = prop
        self._outs = frozenset(self._props[n].index for n in p.outs)
        self._unobs = frozenset(self._props[n].index for n in p.unobservable)
        # skeleton BDD: atoms take the first levels, temporal subformulas
        # get fresh levels in first-encounter order
        self.bdd = BooleanManager()
        self._skel_level = {}
        self._skel_formula = {}
        self._keys = {}
        self._reps = {}
        self.tt = self.make("tt")
        self.ff = self.make("ff")
        self._reps[BooleanManager.TRUE] = self.tt
        self._reps[BooleanManager.FALSE] = self.ff
        for prop in self.variables:
            self._skeleton_var(self.atom(prop.name))

    # -- variables ---------------------------------------------------------

    def prop(self, name) -> Proposition:
        try:
            return self._props[name]
        except KeyError:
            raise UndeclaredAtomError(name, 0) from None

    def is_output(self, prop: Proposition) -> bool:
        return prop.index in self._outs

    def is_unobservable(self, prop: Proposition) -> bool:
        return prop.index in self._unobs

    @property
    def observable_variables(self):
        return tuple(v for v in self.variables if v.index not in self._unobs)

    @property
    def unobservable_variables(self):
        return tuple(v for v in self.variables if v.index in self._unobs)

    @property
    def input_variables(self):
        return tuple(v for v in self.variables
                     if v.index not in self._unobs and v.index not in self._outs)

    @property
    def output_variables(self):
        return tuple(v for v in self.variables if v.index in self._outs)

    # -- budget --------------------------------------------------------------

    def start_clock(self):
        if self.limits.timeout is not None:
            self._deadline = time.monotonic() + self.limits.timeout

    def check_time(self):
        if self._deadline is not None and time.monotonic() > self._deadline:
            raise ResourceLimitExceeded(
                f"time limit of {self.limits.timeout}s exceeded")

    # -- construction ----------------------------------------------------------

    def make(self, op, *args, name=None) -> Formula:
        """Return the interned node, without any simplification."""
        for a in args:
            if a.ctx is not self:
                raise LogicError("formula belongs to another context")
        key = (op, tuple(a.id for a in args), name)
        f = self._table.get(key)
        if f is None:
            f = Formula(op, tuple(args), name, len(self._formulas), self)
            self._table[key] = f
            self._formulas.append(f)
        return f

    def atom(self, name) -> Formula:
        if name not in self._props:
            raise UndeclaredAtomError(name, 0)
        return self.make("ap", name=name)

    def parse(self, text: str) -> Formula:
        return parse(text, self)

    def __len__(self):
        return len(self._formulas)

    # -- propositional equivalence ---------------------------------------------

    def _skeleton_var(self, f):
        level = self._skel_level.get(f.id)
        if level is None:
            level = len(self._skel_level)
            self._skel_level[f.id] = level
            self._skel_formula[level] = f
        return self.bdd.var(level)

    def prop_key(self, f: Formula) -> int:
        """BDD node of the Boolean skeleton of ``f``."""
        key = self._keys.get(f.id)
        if key is not None:
            return key
        op = f.op
        if op == "tt":
            key = BooleanManager.TRUE
        elif op == "ff":
            key = BooleanManager.FALSE
        elif op == "ap" or op in TEMPORAL:
            key = self._skeleton_var(f)
        elif op == "not":
            key = self.bdd.negate(self.prop_key(f.args[0]))
        else:
            a = self.prop_key(f.args[0])
            key = self.bdd.apply(op, a, self.prop_key(f.args[1]))
        self._keys[f.id] = key
        return key

    def canonical(self, f: Formula) -> Formula:
        """Fixed representative of the propositional-equivalence class."""
        key = self.prop_key(f)
        rep = self._reps.get(key)
        if rep is not None:
            return rep
        bdd = self.bdd
        if bdd.low(key) == bdd.FALSE and bdd.high(key) == bdd.TRUE:
            rep = self._skel_formula[bdd.level(key)]
        else:
            rep = self._tidy(f)
        self._reps[key] = rep
        return rep

    def _tidy(self, f):
        # constant folding and absorption on the Boolean layer only; temporal
        # subformulas are kept as they are so the skeleton does not change
        op = f.op
        if op in TEMPORAL or op in ("ap", "tt", "ff"):
            return f
        if op == "not":
            return self._smart("not", self._tidy(f.args[0]))
        return self._smart(op, self._tidy(f.args[0]), self._tidy(f.args[1]))

    def _smart(self, op, a, b=None):
        tt, ff = self.tt, self.ff
        if op == "not":
            if a is tt:
                return ff
            if a is ff:
                return tt
            if a.op == "not":
                return a.args[0]
            return self.make("not", a)
        if op == "and":
            if a is ff or b is ff:
                return ff
            if a is tt:
                return b
            if b is tt or a is b:
                return a
        elif op == "or":
            if a is tt or b is tt:
                return tt
            if a is ff:
                return b
            if b is ff or a is b:
                return a
        elif op == "implies":
            if a is ff or b is tt:
                return tt
            if a is tt:
                return b
            if b is ff:
                return self._smart("not", a)
        elif op == "iff":
            if a is tt:
                return b
            if b is tt:
                return a
            if a is ff:
                return self._smart("not", b)
            if b is ff:
                return self._smart("not", a)
        elif op == "xor":
            if a is ff:
                return b
            if b is ff:
                return a
            if a is tt:
                return self._smart("not", b)
            if b is tt:
                return self._smart("not", a)
        key = self.bdd.apply(op, self.prop_key(a), self.prop_key(b))
        if key == self.prop_key(a):
            return a
        if key == self.prop_key(b):
            return b
        return self.make(op, a, b)

    def combine(self, op, a: Formula, b: Formula | None = None) -> Formula:
        """Canonical ``[a op b]``, or ``[not a]`` when ``op == 'not'``.

        Looks the class up by key before building any new node.
        """
        if op == "not":
            key = self.bdd.negate(self.prop_key(a))
        else:
            key = self.bdd.apply(op, self.prop_key(a), self.prop_key(b))
        rep = self._reps.get(key)
        if rep is not None:
            return rep
        if op == "not":
            return self.canonical(self._smart("not", a))
        return self.canonical(self._smart(op, a, b))

    def equivalent(self, a: Formula, b: Formula) -> bool:
        return self.prop_key(a) == self.prop_key(b)


# -- free-function API -----------------------------------------------------------


def canonical(f: Formula) -> Formula:
    return f.ctx.canonical(f)


def prop_key(f: Formula) -> int:
    return f.ctx.prop_key(f)


def subformulas(f: Formula) -> set:
    out = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g in out:
            continue
        out.add(g)
        stack.extend(g.args)
    return out


def atoms(f: Formula) -> set:
    return {g.name for g in subformulas(f) if g.op == "ap"}


def maximal_temporal(f: Formula) -> list:
    """Maximal temporal subformulas, left to right, without repeats."""
    out = []
    seen = set()

    def walk(g):
        if g.op in TEMPORAL:
            if g not in seen:
                seen.add(g)
                out.append(g)
            return
        for a in g.args:
            walk(a)

    walk(f)
    return out


# -- printing ------------------------------------------------------------------

_INFIX = {"and": "&", "or": "|", "implies": "->", "iff": "<->", "xor": "xor",
          "U": "U", "R": "R"}
_PREFIX = {"not": "!", "X": "X", "N": "X[!]", "F": "F", "G": "G"}


def to_str(f: Formula) -> str:
    op = f.op
    if op == "ap":
        return f.name
    if op in CONSTANTS:
        return op
    if op in _PREFIX:
        inner = to_str(f.args[0])
        if f.args[0].op in _INFIX:
            return f"{_PREFIX[op]}({inner})"
        sep = "" if op == "not" else " "
        return f"{_PREFIX[op]}{sep}{inner}"
    parts = []
    for a in f.args:
        s = to_str(a)
        parts.append(f"({s})" if a.op in _INFIX else s)
    return f" {_INFIX[op]} ".join(parts)


# -- parsing -------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<strong>X\s*\[\s*!\s*\])
  | (?P<op><->|<=>|->|=>|&&|\|\||[()!~&|^])
  | (?P<ident>[A-Za-z_][A-Za-z0-9_.']*)
  | (?P<num>[01]\b)
""", re.VERBOSE)

_KEYWORDS = {
    "X": "X", "WX": "X", "N": "N", "F": "F", "G": "G",
    "U": "U", "R": "R", "xor": "xor",
    "tt": "tt", "true": "tt", "TRUE": "tt", "True": "tt",
    "ff": "ff", "false": "ff", "FALSE": "ff", "False": "ff",
}
_OP_NAMES = {"&&": "&", "||": "|", "~": "!", "=>": "->", "<=>": "<->",
             "^": "xor"}


def _tokenize(text):
    pos = 0
    tokens = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        value = m.group()
        if kind == "strong":
            tokens.append(("N", pos))
        elif kind == "op":
            tokens.append((_OP_NAMES.get(value, value), pos))
        elif kind == "ident":
            if value in _KEYWORDS:
                tokens.append((_KEYWORDS[value], pos))
            else:
                tokens.append(("ident:" + value, pos))
        elif kind == "num":
            tokens.append(("tt" if value == "1" else "ff", pos))
        pos = m.end()
    tokens.append(("$", len(text)))
    return tokens


class _Parser:
    # loosest to tightest: U/R, ->/<->/xor, |, &, unary
    def __init__(self, text, ctx):
        self.tokens = _tokenize(text)
        self.i = 0
        self.ctx = ctx

    def peek(self):
        return self.tokens[self.i][0]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind):
        tok, pos = self.take()
        if tok != kind:
            what = "end of input" if tok == "$" else repr(tok.split(":")[-1])
            raise ParseError(f"expected {kind!r}, found {what}", pos)

    def parse(self):
        f = self.temporal()
        tok, pos = self.tokens[self.i]
        if tok != "$":
            raise ParseError(f"unexpected {tok.split(':')[-1]!r}", pos)
        return f

    def temporal(self):
        left = self.equivalence()
        if self.peek() in ("U", "R"):
            op = self.take()[0]
            return self.ctx.make(op, left, self.temporal())
        return left

    def equivalence(self):
        left = self.disjunction()
        ops = {"->": "implies", "<->": "iff", "xor": "xor"}
        if self.peek() in ops:
            op = ops[self.take()[0]]
            return self.ctx.make(op, left, self.equivalence())
        return left

    def disjunction(self):
        f = self.conjunction()
        while self.peek() == "|":
            self.take()
            f = self.ctx.make("or", f, self.conjunction())
        return f

    def conjunction(self):
        f = self.unary()
        while self.peek() == "&":
            self.take()
            f = self.ctx.make("and", f, self.unary())
        return f

    def unary(self):
        tok = self.peek()
        if tok == "!":
            self.take()
            return self.ctx.make("not", self.unary())
        if tok in TEMPORAL_UNARY:
            self.take()
            return self.ctx.make(tok, self.unary())
        return self.primary()

    def primary(self):
        tok, pos = self.take()
        if tok == "(":
            f = self.temporal()
            self.expect(")")
            return f
        if tok in CONSTANTS:
            return self.ctx.tt if tok == "tt" else self.ctx.ff
        if tok.startswith("ident:"):
            name = tok[6:]
            if name not in self.ctx._props:
                raise UndeclaredAtomError(name, pos)
            return self.ctx.atom(name)
        what = "end of input" if tok == "$" else repr(tok)
        raise ParseError(f"unexpected {what}", pos)


def parse(text: str, ctx: Context) -> Formula:
    """Parse LTLf text into an interned formula of ``ctx``.

    Strong next is written ``X[!]`` or ``N``; ``X`` and ``WX`` are weak next.
    ``U`` and ``R`` bind loosest and associate to the right.
    """
    return _Parser(text, ctx).parse()


# -- semantics -----------------------------------------------------------------


def fuse(w1: Mapping[str, bool], w2: Mapping[str, bool]) -> dict:
    overlap = set(w1) & set(w2)
    if overlap:
        raise ValueError(f"assignments overlap on {sorted(overlap)}")
    out = dict(w1)
    out.update(w2)
    return out


def fuse_words(s1: Sequence[Mapping], s2: Sequence[Mapping]) -> list:
    if len(s1) != len(s2):
        raise ValueError("words of different lengths")
    return [fuse(a, b) for a, b in zip(s1, s2)]


def restrict(w: Mapping[str, bool], names: Iterable[str]) -> dict:
    return {n: w[n] for n in names}


def assignments(names: Sequence[str]):
    """All assignments over ``names``, lexicographic with False < True."""
    names = tuple(names)
    for bits in itertools.product((False, True), repeat=len(names)):
        yield dict(zip(names, bits))


def words(names: Sequence[str], length: int):
    letters = list(assignments(names))
    for word in itertools.product(letters, repeat=length):
        yield list(word)


def models(trace: Sequence[Mapping[str, bool]], i: int, f: Formula) -> bool:
    """Whether ``trace, i |= f``, clause by clause from the LTLf semantics."""
    n = len(trace)
    if n == 0:
        raise ValueError("traces are nonempty")
    if not 0 <= i < n:
        raise IndexError(f"position {i} outside trace of length {n}")
    memo = {}

    def sat(g, j):
        key = (g.id, j)
        r = memo.get(key)
        if r is not None:
            return r
        op = g.op
        if op == "tt":
            r = j < n
        elif op == "ff":
            r = j == n
        elif op == "ap":
            try:
                r = bool(trace[j][g.name])
            except KeyError:
                raise ValueError(f"trace letter {j} does not assign {g.name!r}") from None
        elif op == "not":
            r = not sat(g.args[0], j)
        elif op in BINARY:
            r = bool_op(op, sat(g.args[0], j), sat(g.args[1], j))
        elif op == "X":
            r = j + 1 == n or sat(g.args[0], j + 1)
        elif op == "N":
            r = j + 1 < n and sat(g.args[0], j + 1)
        elif op == "F":
            r = any(sat(g.args[0], k) for k in range(j, n))
        elif op == "G":
            r = all(sat(g.args[0], k) for k in range(j, n))
        elif op == "U":
            a, b = g.args
            r = any(sat(b, k) and all(sat(a, m) for m in range(j, k))
                    for k in range(j, n))
        elif op == "R":
            a, b = g.args
            r = all(sat(b, k) or any(sat(a, m) for m in range(j, k))
                    for k in range(j, n))
        else:
            raise LogicError(f"unknown operator {op!r}")
        memo[key] = r
        return r

    return sat(f, i)


def letter_bits(names: Sequence[str], length: int) -> np.ndarray:
    """Boolean array ``[word, position, variable]`` over all words.

    Words are numbered with the first letter most significant and, inside a
    letter, the first variable most significant.
    """
    k = len(names)
    width = 1 << k
    count = width ** length
    idx = np.arange(count, dtype=np.int64)
    out = np.zeros((count, length, k), dtype=bool)
    for t in range(length):
        letter = (idx // width ** (length - 1 - t)) % width
        for j in range(k):
            out[:, t, j] = (letter >> (k - 1 - j)) & 1
    return out


def models_table(f: Formula, names: Sequence[str], length: int,
                 bits: np.ndarray | None = None, memo: dict | None = None) -> np.ndarray:
    """``models(w, 0, f)`` for every word ``w`` of ``length`` over ``names``.

    Same clauses as :func:`models`, evaluated on all words at once.  Pass
    the same ``memo`` (and ``bits``) to share work across many formulas of
    one context.
    """
    if length < 1:
        raise ValueError("traces are nonempty")
    if bits is None:
        bits = letter_bits(names, length)
    col = {n: j for j, n in enumerate(names)}
    n = length
    count = bits.shape[0]
    if memo is None:
        memo = {}

    def sat(g, j):
        key = (g.id, j)
        r = memo.get(key)
        if r is not None:
            return r
        op = g.op
        if op == "tt":
            r = np.ones(count, dtype=bool)
        elif op == "ff":
            r = np.zeros(count, dtype=bool)
        elif op == "ap":
            r = bits[:, j, col[g.name]]
        elif op == "not":
            r = ~sat(g.args[0], j)
        elif op == "and":
            r = sat(g.args[0], j) & sat(g.args[1], j)
        elif op == "or":
            r = sat(g.args[0], j) | sat(g.args[1], j)
        elif op == "implies":
            r = ~sat(g.args[0], j) | sat(g.args[1], j)
        elif op == "iff":
            r = sat(g.args[0], j) == sat(g.args[1], j)
        elif op == "xor":
            r = sat(g.args[0], j) != sat(g.args[1], j)
        elif op == "X":
            r = np.ones(count, dtype=bool) if j + 1 == n else sat(g.args[0], j + 1)
        elif op == "N":
            r = np.zeros(count, dtype=bool) if j + 1 == n else sat(g.args[0], j + 1)
        elif op == "F":
            r = np.logical_or.reduce([sat(g.args[0], k) for k in range(j, n)])
        elif op == "G":
            r = np.logical_and.reduce([sat(g.args[0], k) for k in range(j, n)])
        elif op == "U":
            a, b = g.args
            r = np.zeros(count, dtype=bool)
            prefix = np.ones(count, dtype=bool)
            for k in range(j, n):
                r = r | (sat(b, k) & prefix)
                prefix = prefix & sat(a, k)
        elif op == "R":
            a, b = g.args
            r = np.ones(count, dtype=bool)
            prefix = np.zeros(count, dtype=bool)
            for k in range(j, n):
                r = r & (sat(b, k) | prefix)
                prefix = prefix | sat(a, k)
        else:
            raise LogicError(f"unknown operator {op!r}")
        memo[key] = r
        return r

    return sat(f, 0)
