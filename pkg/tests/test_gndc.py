import random

import pytest

from qsec import (
    NIL,
    TROPICAL,
    ExplosionGuard,
    GndcSpec,
    UnknownAlpha,
    alpha_apply,
    build_mlts,
    check_qgndc,
    generate_environments,
    parse_process,
    sort,
)
from qsec.equiv import compare
from qsec.generate import random_process
from qsec.gndc import composed
from qsec.process import Hide, Prefix


def proc(text):
    return parse_process(text, TROPICAL)


def test_generated_families():
    assert generate_environments({"h"}, [0], 0) == [NIL]
    assert generate_environments({"h"}, [0], 1) == [NIL, Prefix("h", 0, NIL)]
    two = generate_environments({"h"}, [0], 2)
    assert Prefix("h", 0, Prefix("h", 0, NIL)) in two
    assert len(two) == len(set(two)) == 4


def test_family_guard():
    with pytest.raises(ExplosionGuard):
        generate_environments({"h", "k"}, [0, 1, 2], 2, cap=100)
    with pytest.raises(ValueError):
        generate_environments({"tau"}, [0], 1)


def test_alpha():
    p = proc("(h,1).(a,2).0")
    assert alpha_apply(GndcSpec({"h"}, alpha="identity"), p) == p
    assert alpha_apply(GndcSpec({"h"}, alpha="hide_H"), p) == Hide(frozenset({"h"}), p)
    assert build_mlts(alpha_apply(GndcSpec({"h"}), NIL), TROPICAL).transitions == {}
    with pytest.raises(UnknownAlpha):
        GndcSpec({"h"}, alpha="mask")


def test_desk_checks():
    ok = check_qgndc(proc("(a,1).0"), GndcSpec({"h"}, depth=2, palette=(0,)), TROPICAL)
    assert ok.holds and ok.details["environments"] == 4
    bad = check_qgndc(proc("(h,1).(a,2).0"), GndcSpec({"h"}, environments=[NIL]), TROPICAL)
    assert not bad.holds and bad.witness == NIL
    assert bad.details["inner"].witness == ("a",)
    assert "not a proof" in bad.details["scope"]


def test_empty_family_is_vacuous():
    assert check_qgndc(proc("(h,1).0"), GndcSpec({"h"}, environments=[]), TROPICAL).holds


def test_environment_actions_checked():
    with pytest.raises(ValueError):
        check_qgndc(proc("0"), GndcSpec({"h"}, environments=[proc("(a,1).0")]), TROPICAL)


def test_eps_relation_needs_eps():
    with pytest.raises(ValueError):
        GndcSpec({"h"}, relation="eps-trace")
    with pytest.raises(ValueError):
        GndcSpec({"h"}, relation="wtrace", eps=1)


def test_family_monotonicity():
    rng = random.Random(31)
    for _ in range(60):
        p = random_process(rng, TROPICAL, "ah", 3)
        family = generate_environments({"h"}, [0, 3], 2)
        small = rng.sample(family, rng.randint(0, len(family)))
        big = check_qgndc(p, GndcSpec({"h"}, environments=family), TROPICAL).holds
        sub = check_qgndc(p, GndcSpec({"h"}, environments=small), TROPICAL).holds
        assert sub or not big


def test_h_independence():
    rng = random.Random(32)
    n = 0
    while n < 60:
        p = random_process(rng, TROPICAL, "ab", 3)
        if sort(p) & {"h"}:
            continue
        n += 1
        assert check_qgndc(p, GndcSpec({"h"}, depth=2, palette=(0, 2)), TROPICAL).holds


def test_inclusion_lifts_to_eps():
    rng = random.Random(33)
    for _ in range(60):
        p = random_process(rng, TROPICAL, "ah", 3)
        plain = check_qgndc(p, GndcSpec({"h"}, depth=1, palette=(0, 2)), TROPICAL)
        if plain.holds:
            for eps in (0, 1, 5):
                spec = GndcSpec({"h"}, relation="eps-trace", eps=eps, depth=1, palette=(0, 2))
                assert check_qgndc(p, spec, TROPICAL).holds


def test_witness_reproduces():
    rng = random.Random(34)
    for _ in range(80):
        p = random_process(rng, TROPICAL, "ah", 3)
        spec = GndcSpec({"h"}, depth=1, palette=(0, 4))
        v = check_qgndc(p, spec, TROPICAL)
        if not v.holds:
            actual = build_mlts(composed(p, v.witness, {"h"}), TROPICAL)
            expected = build_mlts(Hide(frozenset({"h"}), p), TROPICAL)
            assert not compare(actual, expected, "wtrace").holds
