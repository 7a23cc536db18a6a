"""LTLf synthesis under partial observability with belief-state MTDFAs."""
from .controller import (TERMINATE, Controller, Transition, build_controller,
                         export_controller, parse_controller, verify_controller)
from .game import LOSE, UNKNOWN, WIN, GameResult, Status, eval3, extract_strategy, solve_full, solve_otf
from .logic import (MEALY, MOORE, Context, Formula, Limits, LogicError, ParseError,
                    Partition, PartitionError, ResourceLimitExceeded, canonical, models,
                    parse, prop_key)
from .progression import fp, fp_obs, fp_obs_word, fp_word
from .translate import Mtdfa, Translator, accepts, build_full
from .verify import (OracleBudget, OracleBudgetExceeded, Realizability,
                     oracle_belief_language, oracle_realizable)

__version__ = "0.1.0"


def synthesize(formula: str, ins=(), outs=(), unobservable=(), semantics=MEALY,
               mode="otf", limits=None):
    """Parse and solve in one go; returns ``(result, controller or None)``."""
    ctx = Context(ins, outs, unobservable, semantics, limits)
    ctx.start_clock()
    f = ctx.parse(formula)
    translator = Translator(ctx)
    if mode == "full":
        result = solve_full(build_full(translator, f))
    else:
        result = solve_otf(f, translator)
    controller = build_controller(result.strategy, result.automaton) if result.realizable else None
    return result, controller
