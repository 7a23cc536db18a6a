import dataclasses

import pytest

from posynt.controller import (TERMINATE, Controller, Transition, build_controller,
                               export_controller, parse_controller, product_check,
                               reachable_states, semantic_check, verify_controller)
from posynt.game import solve_full, solve_otf
from posynt.logic import MOORE, Context, assignments
from posynt.translate import Translator, build_full

from corpus import CORPUS

PSI = "(G F u -> F(i <-> o)) & (G F !u -> F(i | o))"

HIDDEN_U_TEXT = """semantics: mealy
ins: i
outs: o
0 "!i / !o" 1
0 "i / o" TERMINATE
1 "true / o" TERMINATE
"""


def synth(ins, outs, unobs, text, semantics="mealy", mode="otf"):
    ctx = Context(ins, outs, unobs, semantics)
    f = ctx.parse(text)
    if mode == "otf":
        r = solve_otf(f)
    else:
        r = solve_full(build_full(Translator(ctx), f))
    return ctx, f, r, build_controller(r.strategy, r.automaton)


def outputs_by_input(c, state=0):
    out = {}
    for w in assignments(c.ins):
        t = c.step(state, w)
        out[tuple(w.values())] = (t.output_map, t.target)
    return out


def test_hidden_u_controller_exact():
    ctx, f, r, c = synth(["i"], ["o"], ["u"], PSI)
    assert export_controller(c) == HIDDEN_U_TEXT
    assert len(c) == 2
    assert str(c.states[1]) == "G F !u -> F(i | o)"
    assert verify_controller(c, f)


def test_observable_controller_cube_sets():
    ctx, f, r, c = synth(["u", "i"], ["o"], [], PSI)
    assert len(c) == 1
    got = outputs_by_input(c)
    for (u, i), (out, target) in got.items():
        assert target is TERMINATE
        assert out == {"o": i or not u}
    assert verify_controller(c, f)


def test_trivial_controller():
    ctx, f, r, c = synth(["i"], ["o"], [], "tt")
    text = export_controller(c)
    assert text.splitlines()[3:] == ['0 "true / !o" TERMINATE']
    assert verify_controller(c, f)


def test_flipped_controller_fails():
    ctx, f, r, c = synth(["i"], ["o"], ["u"], PSI)
    row = tuple(dataclasses.replace(t, outputs=(("o", False),)) for t in c.transitions[1])
    bad = dataclasses.replace(c, transitions=(c.transitions[0], row))
    res = verify_controller(bad, f)
    assert not res
    assert res.reason == "terminates on a rejecting transition"
    assert res.witness == [{"i": False, "o": False}, {"i": False, "o": False}]
    sem = semantic_check(bad, f)
    assert not sem and len(sem.witness) == 2
    assert all(set(letter) == {"i", "o", "u"} for letter in sem.witness)


def test_looping_controller_fails_product_check():
    ctx, f, r, c = synth(["i"], ["o"], ["u"], PSI)
    loop = Transition(((),), (("o", False),), 1)
    bad = dataclasses.replace(c, transitions=(c.transitions[0], (loop,)))
    res = verify_controller(bad, f)
    assert not res and "loop" in res.reason


def test_shape_errors_are_reported():
    ctx, f, r, c = synth(["i"], ["o"], ["u"], PSI)
    gap = dataclasses.replace(c, transitions=(c.transitions[0][:1], c.transitions[1]))
    assert "moves on input" in verify_controller(gap, f).reason
    renamed = dataclasses.replace(c, outs=("z",))
    assert "signature" in verify_controller(renamed, f).reason


def test_roundtrip_text():
    for text in (HIDDEN_U_TEXT,):
        c = parse_controller(text)
        assert export_controller(c) == text
    ctx, f, r, c = synth(["u", "i"], ["o"], [], PSI)
    again = parse_controller(export_controller(c))
    assert again.transitions == c.transitions
    assert (again.ins, again.outs, again.semantics) == (c.ins, c.outs, c.semantics)


def test_parse_controller_rejects_garbage():
    with pytest.raises(ValueError):
        parse_controller("semantics: mealy\nins: i\nouts: o\n0 i / o TERMINATE\n")
    with pytest.raises(ValueError):
        parse_controller("0 \"true / o\" TERMINATE\n")


def test_dot_export():
    ctx, f, r, c = synth(["i"], ["o"], ["u"], PSI)
    dot = export_controller(c, "dot")
    assert "doublecircle" in dot and 'label="!i / !o"' in dot
    with pytest.raises(ValueError):
        export_controller(c, "svg")


def test_moore_outputs_do_not_depend_on_inputs():
    ctx, f, r, c = synth(["i"], ["o"], [], "F(o & X[!] o) | G i", semantics=MOORE)
    assert r.realizable
    for row in c.transitions:
        assert len({t.outputs for t in row}) == 1
    assert verify_controller(c, f)


def test_run_terminates_within_state_bound():
    ctx, f, r, c = synth(["i"], ["o"], ["u"], PSI)
    outs, done = c.run([{"i": False}, {"i": False}])
    assert done and outs == [{"o": False}, {"o": True}]
    assert reachable_states(c) == [0, 1]


def test_corpus_controllers_verify():
    failures = []
    for inst in CORPUS:
        for mode in ("otf", "full"):
            ctx, f = inst.parse()
            r = (solve_otf(f) if mode == "otf"
                 else solve_full(build_full(Translator(ctx), f)))
            if not r.realizable:
                continue
            c = build_controller(r.strategy, r.automaton)
            res = verify_controller(c, f)
            if not res:
                failures.append((inst.name, mode, res.reason))
            # termination bound: depth never exceeds the number of states
            assert product_check(c, r.automaton)
    assert failures == []


def test_sampled_semantic_check_for_wide_problems():
    ctx = Context(["a", "b", "c"], ["x", "y"], ["u"])
    f = ctx.parse("F(x <-> a) & F(y | u | !u)")
    r = solve_otf(f)
    assert r.realizable
    c = build_controller(r.strategy, r.automaton)
    assert semantic_check(c, f, samples=16)
    assert isinstance(c, Controller)
