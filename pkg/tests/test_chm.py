import random
from fractions import Fraction as F

import pytest

from oracles import hml_states
from qsec import (
    BOOLEAN,
    FUZZY,
    INF,
    TROPICAL,
    Box,
    Const,
    Diamond,
    Glb,
    MixedSemirings,
    Mlts,
    Neg,
    NegationUndefined,
    Plus,
    QsecSyntaxError,
    Times,
    build_mlts,
    evaluate,
    format_formula,
    parse_formula,
    parse_process,
    project,
    satisfies,
)
from qsec.generate import random_formula, random_mlts, random_weight

FILES = "[open_file1]([close_file1][open_file2]top * [open_file2]bot)"


def m(text, spec=TROPICAL):
    return build_mlts(parse_process(text, spec), spec)


def test_parse_examples():
    assert parse_formula("top", TROPICAL) == Const(0)
    assert parse_formula("[open]<close> top", TROPICAL) == Box("open", Diamond("close", Const(0)))
    assert parse_formula("3 + ([a] 5)", TROPICAL) == Plus(Const(3), Box("a", Const(5)))
    assert parse_formula("1 + 2 * 3 & 4", TROPICAL) == Plus(Const(1), Glb(Times(Const(2), Const(3)), Const(4)))
    assert parse_formula("!<a>0.5", FUZZY) == Neg(Diamond("a", Const(F(1, 2))))


def test_parse_errors():
    with pytest.raises(NegationUndefined):
        parse_formula("!<a>3", TROPICAL)
    for bad in ["<tau>top", "[a]", "1 +", "(1", "<a b>1", "0.5"]:
        with pytest.raises(QsecSyntaxError):
            parse_formula(bad, TROPICAL)


def test_format_round_trip():
    rng = random.Random(2)
    for spec in (TROPICAL, FUZZY, BOOLEAN):
        for _ in range(300):
            phi = random_formula(rng, spec, "ab", 5, negation=spec.has_negation)
            assert parse_formula(format_formula(phi), spec) == phi


def test_file_example():
    phi = parse_formula(FILES, TROPICAL)
    values = [evaluate(phi, m(t)) for t in (
        "(open_file1,5).(close_file1,4).0",
        "(open_file1,3).(close_file1,10).0",
        "(open_file1,4).(open_file2,2).0",
    )]
    assert values == [9, 13, INF]
    p = parse_process("(open_file1,5).(close_file1,4).0", TROPICAL)
    q = parse_process("(open_file1,3).(close_file1,10).0", TROPICAL)
    assert satisfies(p, phi, 11, TROPICAL).holds
    assert not satisfies(q, phi, 11, TROPICAL).holds
    assert satisfies(q, phi, INF, TROPICAL).holds


def test_empty_modalities():
    mm = m("(b,1).0")
    assert evaluate(Box("a", Const(7)), mm) == TROPICAL.top
    assert evaluate(Diamond("a", Const(7)), mm) == TROPICAL.bot


def test_projection():
    whole = m("(a,1).0 + (b,2).0")
    part = project(whole, parse_process("(a,1).0", TROPICAL))
    assert sorted(a for (_, a, _) in part.transitions) == ["a"]
    own = project(whole, parse_process("(a,1).0 + (b,2).0", TROPICAL))
    assert own.transitions == whole.transitions
    nil = project(whole, parse_process("0", TROPICAL))
    assert nil.transitions == {} and len(nil.labels) == 1


def test_satisfies_through_projection():
    whole = m("(a,1).0 + (b,2).0")
    phi = parse_formula("<b>top", TROPICAL)
    p = parse_process("(a,1).0", TROPICAL)
    assert satisfies(p, phi, INF, TROPICAL, universe=whole).value == INF
    assert satisfies(parse_process("(a,1).0 + (b,2).0", TROPICAL), phi, 2, TROPICAL, universe=whole).holds


def test_mixed_constants():
    with pytest.raises(MixedSemirings):
        evaluate(Const(F(1, 2)), m("0"))


def test_boolean_matches_classical_hml():
    rng = random.Random(3)
    for _ in range(300):
        mm = random_mlts(rng, BOOLEAN, rng.randint(1, 6), "ab", acyclic=rng.random() < 0.5)
        phi = random_formula(rng, BOOLEAN, "ab", 4, negation=True)
        truth = hml_states(phi, mm)
        for s in range(len(mm.labels)):
            assert evaluate(phi, mm, s) == (s in truth)


def test_plus_and_glb_bounds():
    rng = random.Random(4)
    for spec in (TROPICAL, FUZZY):
        for _ in range(200):
            mm = random_mlts(rng, spec, 4, "ab", acyclic=False)
            f, g = random_formula(rng, spec, "ab", 3), random_formula(rng, spec, "ab", 3)
            vf, vg = evaluate(f, mm), evaluate(g, mm)
            assert spec.leq(vf, evaluate(Plus(f, g), mm))
            assert spec.leq(evaluate(Glb(f, g), mm), vg)


def _raise_constant(phi, rng, spec):
    """Replace one constant by something at least as good."""
    if isinstance(phi, Const):
        return Const(spec.plus(phi.value, random_weight(rng, spec)))
    if isinstance(phi, (Plus, Times, Glb)):
        if rng.random() < 0.5:
            return type(phi)(_raise_constant(phi.left, rng, spec), phi.right)
        return type(phi)(phi.left, _raise_constant(phi.right, rng, spec))
    return type(phi)(phi.action, _raise_constant(phi.body, rng, spec))


def test_monotone_in_constants():
    rng = random.Random(5)
    for spec in (TROPICAL, FUZZY, BOOLEAN):
        for _ in range(200):
            mm = random_mlts(rng, spec, 4, "ab", acyclic=False)
            phi = random_formula(rng, spec, "ab", 4)
            assert spec.leq(evaluate(phi, mm), evaluate(_raise_constant(phi, rng, spec), mm))


def test_negation_duality_on_crisp_systems():
    rng = random.Random(6)
    for _ in range(200):
        weighted = random_mlts(rng, FUZZY, 4, "ab", acyclic=False)
        edges = [(s, a, t, FUZZY.top) for (s, a, t) in weighted.transitions]
        mm = Mlts.from_edges(FUZZY, edges) if edges else weighted
        phi = random_formula(rng, FUZZY, "ab", 3)
        for s in range(len(mm.labels)):
            assert evaluate(Neg(Diamond("a", Neg(phi))), mm, s) == evaluate(Box("a", phi), mm, s)


def test_negation_duality_needs_crisp_weights():
    """A weighted step is discounted by the box but not by the negated diamond."""
    mm = m("(a,0.5).0", FUZZY)
    assert evaluate(Box("a", Const(F(1))), mm) == F(1, 2)
    assert evaluate(Neg(Diamond("a", Neg(Const(F(1))))), mm) == 1
