"""Reachability games on belief-state MTDFAs.

A state's MTBDD is read as one round of play: nodes on environment inputs
are universal choices, nodes on outputs are the controller's choices, and
accepting terminals are the controller's targets.  With the variable order
fixed by :class:`~posynt.logic.Context`, inputs sit above outputs for Mealy
semantics and below them for Moore semantics.
"""
from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field

from . import mtbdd
from .logic import Formula, LogicError
from .translate import Mtdfa, Translator


class Status(enum.Enum):
    WIN = "win"
    LOSE = "lose"
    UNKNOWN = "unknown"


WIN, LOSE, UNKNOWN = Status.WIN, Status.LOSE, Status.UNKNOWN


class GameOrderError(LogicError):
    """An input variable sits below an output in a Mealy game (or the
    reverse for Moore), so the AND/OR reading of the diagram is unsound."""


def _and3(a, b):
    if a is LOSE or b is LOSE:
        return LOSE
    if a is WIN and b is WIN:
        return WIN
    return UNKNOWN


def _or3(a, b):
    if a is WIN or b is WIN:
        return WIN
    if a is LOSE and b is LOSE:
        return LOSE
    return UNKNOWN


def eval3(node, status, ctx, unknown=UNKNOWN, memo=None):
    """Three-valued value of one round of play from ``node``.

    ``status`` maps states to :class:`Status` (missing means UNKNOWN).
    Unknown states are read as ``unknown``, so passing WIN or LOSE gives
    the optimistic and pessimistic evaluations.
    """
    if memo is None:
        memo = {}

    def go(n):
        r = memo.get(n.id)
        if r is not None:
            return r
        if n.is_terminal:
            if n.accepting:
                r = WIN
            else:
                r = status.get(n.dest, UNKNOWN)
                if r is UNKNOWN:
                    r = unknown
        elif ctx.is_output(n.var):
            r = _or3(go(n.low), go(n.high))
        else:
            r = _and3(go(n.low), go(n.high))
        memo[n.id] = r
        return r

    return go(node)


def check_game_order(node, ctx):
    """Raise :class:`GameOrderError` if player blocks are interleaved."""
    mealy = ctx.semantics == "mealy"
    for n in mtbdd.nodes(node):
        if n.is_terminal:
            continue
        if ctx.is_unobservable(n.var):
            raise GameOrderError(f"unobservable {n.var.name} left in a game")
        top_is_out = ctx.is_output(n.var)
        for child in (n.low, n.high):
            if child.is_terminal:
                continue
            child_is_out = ctx.is_output(child.var)
            if mealy and top_is_out and not child_is_out:
                raise GameOrderError(f"input {child.var.name} below output {n.var.name}")
            if not mealy and not top_is_out and child_is_out:
                raise GameOrderError(f"output {child.var.name} below input {n.var.name}")


@dataclass
class GameResult:
    realizable: bool
    automaton: Mtdfa
    status: dict
    rank: dict
    strategy: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)

    @property
    def initial(self):
        return self.automaton.initial


def _stats(translator, automaton, started):
    m = translator.manager
    return {
        "state_count": len(automaton),
        "delta_count": translator.delta_count,
        "node_count": m.node_count,
        "cache_hits": m.cache_hits,
        "wall_ms": round((time.perf_counter() - started) * 1000, 3),
    }


def solve_full(m: Mtdfa) -> GameResult:
    """Least fixpoint of the attractor to the accepting terminals.

    Round ``k`` marks every state that can force an accepting terminal,
    or a state marked in an earlier round, within one step; ``rank`` is
    that first round.
    """
    started = time.perf_counter()
    ctx = m.ctx
    for d in m.delta.values():
        check_game_order(d, ctx)
    status = {}
    rank = {}
    k = 0
    while True:
        k += 1
        ctx.check_time()
        new = [s for s, d in m.delta.items()
               if s not in status and eval3(d, status, ctx, LOSE) is WIN]
        if not new:
            break
        for s in new:
            status[s] = WIN
            rank[s] = k
    for s in m.delta:
        status.setdefault(s, LOSE)
    result = GameResult(status.get(m.initial) is WIN, m, status, rank)
    if result.realizable:
        result.strategy = extract_strategy(result)
    result.stats = _stats(m.translator, m, started)
    return result


def _game_successors(delta):
    """Destinations behind non-accepting terminals, low before high."""
    out = []
    for t in mtbdd.terminals(delta):
        if not t.accepting and t.dest not in out:
            out.append(t.dest)
    return out


def solve_otf(formula: Formula, translator: Translator | None = None) -> GameResult:
    """Explore belief states depth first while solving the game.

    Each explored state is evaluated optimistically and pessimistically;
    when both agree the state is decided and the verdict flows back to its
    predecessors.  States left undecided when their strongly connected
    component is closed cannot reach the targets and lose.  The search
    stops as soon as the initial state is decided.
    """
    started = time.perf_counter()
    if translator is None:
        translator = Translator(formula.ctx)
    ctx = translator.ctx
    initial = ctx.canonical(formula)
    m = Mtdfa(translator, initial)
    status = {}
    rank = {}
    preds = {}
    succs = {}
    counter = [0]

    def decide(s, value):
        work = [(s, value)]
        while work:
            s, value = work.pop()
            if s in status:
                continue
            status[s] = value
            if value is WIN:
                counter[0] += 1
                rank[s] = counter[0]
            for p in preds.get(s, ()):
                if p in status:
                    continue
                v = _evaluate(p)
                if v is not UNKNOWN:
                    work.append((p, v))

    def _evaluate(s):
        d = m.delta[s]
        if eval3(d, status, ctx, LOSE) is WIN:
            return WIN
        if eval3(d, status, ctx, WIN) is LOSE:
            return LOSE
        return UNKNOWN

    def explore(s):
        ctx.check_time()
        d = m.add(s)
        check_game_order(d, ctx)
        succs[s] = _game_successors(d)
        for t in succs[s]:
            preds.setdefault(t, []).append(s)
        v = _evaluate(s)
        if v is not UNKNOWN:
            decide(s, v)

    # iterative Tarjan over the explored part of the game graph
    index, low = {}, {}
    stack, on_stack = [], set()

    def visit(s):
        index[s] = low[s] = len(index)
        stack.append(s)
        on_stack.add(s)
        explore(s)
        return [s, 0]

    frames = [visit(initial)]
    while frames and initial not in status:
        frame = frames[-1]
        s = frame[0]
        pushed = False
        if s not in status:
            succ = succs[s]
            while frame[1] < len(succ):
                t = succ[frame[1]]
                frame[1] += 1
                if t in status:
                    continue
                if t not in index:
                    frames.append(visit(t))
                    pushed = True
                    break
                if t in on_stack:
                    low[s] = min(low[s], index[t])
            if pushed:
                continue
        frames.pop()
        if frames:
            parent = frames[-1][0]
            low[parent] = min(low[parent], low[s])
        if low[s] == index[s]:
            component = []
            while True:
                t = stack.pop()
                on_stack.discard(t)
                component.append(t)
                if t is s:
                    break
            for t in component:
                if t not in status:
                    decide(t, LOSE)

    result = GameResult(status.get(initial) is WIN, m, status, rank)
    if result.realizable:
        result.strategy = extract_strategy(result)
    result.stats = _stats(translator, m, started)
    return result


def extract_strategy(result: GameResult) -> dict:
    """Restrict each strategy-reachable winning state's MTBDD to one choice
    per output node.

    The rejected branch of an output node is replaced by the ``(ff, false)``
    terminal, which never occurs on a winning branch.  Children leading to
    an accepting terminal in every case are preferred; otherwise a child is
    chosen whose non-accepting terminals all have a smaller rank, so every
    play reaches an accepting terminal.  Ties go to the high branch.
    """
    if not result.realizable:
        raise LogicError("no winning strategy: the game is lost")
    m = result.automaton
    ctx = m.ctx
    manager = m.translator.manager
    strategy = {}
    queue = [m.initial]
    while queue:
        s = queue.pop(0)
        if s in strategy:
            continue
        r = result.rank[s]
        below = {t: WIN for t, k in result.rank.items() if k < r}
        restricted = _restrict(manager, m.delta[s], below, ctx)
        strategy[s] = restricted
        for t in mtbdd.terminals(restricted):
            if not t.accepting and t is not manager.false and t.dest not in strategy:
                queue.append(t.dest)
    return strategy


def _restrict(manager, node, below, ctx):
    immediate = {}
    eventual = {}
    cache = {}

    def go(n):
        if n.is_terminal:
            return n
        r = cache.get(n.id)
        if r is not None:
            return r
        if ctx.is_output(n.var):
            pick = None
            for memo, status in ((immediate, {}), (eventual, below)):
                for value, child in ((True, n.high), (False, n.low)):
                    if eval3(child, status, ctx, LOSE, memo) is WIN:
                        pick = value
                        break
                if pick is not None:
                    break
            if pick is None:
                raise LogicError("output node without a winning choice")
            if pick:
                r = manager.ite_node(n.var, manager.false, go(n.high))
            else:
                r = manager.ite_node(n.var, go(n.low), manager.false)
        else:
            r = manager.ite_node(n.var, go(n.low), go(n.high))
        cache[n.id] = r
        return r

    return go(node)
