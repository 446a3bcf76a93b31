import random

import pytest

from qsec import (
    BOOLEAN,
    FUZZY,
    TROPICAL,
    Box,
    Const,
    Diamond,
    PmcContext,
    Times,
    evaluate,
    format_formula,
    parse_formula,
    parse_process,
    pmc_transform,
    satisfies,
    simplify,
    verify_theorem,
)
from qsec.chm import formula_depth, formula_size
from qsec.generate import random_formula, random_mlts, random_process
from qsec.process import Parallel
from qsec.qpmc import shrink_counterexample

P5 = "(open,5).(close,4).0 + (open,6).0"
Q5 = "(open,4).(close,3).0"


def proc(text, spec=TROPICAL):
    return parse_process(text, spec)


def test_constants_are_fixed():
    ctx = PmcContext(proc(P5), {"open"}, TROPICAL)
    assert pmc_transform(Const(7), ctx) == Const(7)


def test_files_example():
    phi = parse_formula("[open]<close>top", TROPICAL)
    for rule in ("guarded", "literal"):
        r = verify_theorem(phi, proc(P5), proc(Q5), {"open"}, TROPICAL, box_rule=rule)
        assert (r.lhs, r.rhs) == (13, 13)
    one = parse_formula("[open]<close>1", TROPICAL)
    r = verify_theorem(one, proc(P5), proc(Q5), {"open"}, TROPICAL)
    assert (r.lhs, r.rhs) == (14, 14)
    both = Parallel(frozenset({"open"}), proc(P5), proc(Q5))
    assert satisfies(both, phi, 20, TROPICAL).holds


def test_files_residual_shape():
    phi = parse_formula("[open]<close>top", TROPICAL)
    ctx = PmcContext(proc(P5), {"open"}, TROPICAL)
    literal = simplify(pmc_transform(phi, ctx, box_rule="literal"), TROPICAL)
    assert format_formula(literal) == "5 * [open](<close>0 + 4) & 6 * [open]<close>0"
    guarded = simplify(pmc_transform(phi, ctx), TROPICAL)
    assert format_formula(guarded) == "[open](5 * (<close>0 + 4)) & [open](6 * <close>0)"


def test_literal_box_rule_is_unsound():
    """With a partner that cannot synchronise the literal rule keeps the weight."""
    phi = Box("a", Const(0))
    r = verify_theorem(phi, proc("(a,6).0"), proc("0"), {"a"}, TROPICAL, box_rule="literal")
    assert (r.lhs, r.rhs) == (0, 6)
    assert verify_theorem(phi, proc("(a,6).0"), proc("0"), {"a"}, TROPICAL).equal


def test_unsynchronised_diamond_without_moves():
    ctx = PmcContext(proc("(b,1).0"), {"b"}, TROPICAL)
    assert pmc_transform(Diamond("a", Const(3)), ctx) == Diamond("a", Const(3))


def test_rejects_tau_sync():
    with pytest.raises(ValueError):
        PmcContext(proc("0"), {"tau"}, TROPICAL)


def test_residual_round_trips():
    rng = random.Random(21)
    for _ in range(100):
        p = random_process(rng, TROPICAL, "abc", 3)
        phi = random_formula(rng, TROPICAL, "abc", 3)
        residual = pmc_transform(phi, PmcContext(p, {"a"}, TROPICAL))
        assert parse_formula(format_formula(residual), TROPICAL) == residual


def test_simplify_examples():
    phi = Diamond("a", Const(2))
    assert simplify(Times(Const(TROPICAL.top), phi), TROPICAL) == phi
    assert simplify(Times(Const(TROPICAL.bot), phi), TROPICAL) == Const(TROPICAL.bot)
    assert simplify(Times(Const(5), Const(4)), TROPICAL) == Const(9)


@pytest.mark.parametrize("spec", [TROPICAL, FUZZY, BOOLEAN], ids=lambda s: s.name)
def test_simplify_preserves_values(spec):
    rng = random.Random(22)
    for _ in range(300):
        mm = random_mlts(rng, spec, 4, "ab", acyclic=False)
        phi = random_formula(rng, spec, "ab", 5, negation=spec.has_negation)
        once = simplify(phi, spec)
        assert simplify(once, spec) == once
        for s in range(len(mm.labels)):
            assert evaluate(once, mm, s) == evaluate(phi, mm, s)


@pytest.mark.parametrize("spec", [TROPICAL, FUZZY, BOOLEAN], ids=lambda s: s.name)
def test_transform_size_bound(spec):
    rng = random.Random(23)
    for _ in range(300):
        p = random_process(rng, spec, "abc", 4)
        phi = random_formula(rng, spec, "abc", 4)
        ctx = PmcContext(p, set(rng.sample("abc", rng.randint(0, 2))), spec)
        degree = max((len(e) for e in ctx.mlts.succ), default=0)
        bound = formula_size(phi) * (1 + degree) ** formula_depth(phi)
        assert formula_size(pmc_transform(phi, ctx)) <= bound


def test_shrinking_keeps_failure():
    phi = parse_formula("[a]0 + <b>3", TROPICAL)
    p, q = proc("(a,6).0 + (b,2).(a,1).0"), proc("(b,1).0")
    small = shrink_counterexample(phi, p, q, {"a"}, TROPICAL, box_rule="literal")
    assert not verify_theorem(*small, {"a"}, TROPICAL, box_rule="literal").equal
    assert formula_size(small[0]) <= formula_size(phi)
