"""Seeded random weights, processes, formulas and MLTSs for property checks."""

from __future__ import annotations

import random
from fractions import Fraction

from qsec.chm import Box, Const, Diamond, Glb, Neg, Plus, Times
from qsec.mlts import Mlts
from qsec.process import NIL, TAU, Choice, Hide, Parallel, Prefix, Restrict
from qsec.semiring import INF


def random_weight(rng: random.Random, spec):
    """A carrier value drawn from a small grid that includes top and bottom."""
    kind = spec.kind
    if kind == "boolean":
        return rng.random() < 0.8
    if kind in ("fuzzy", "probabilistic"):
        return Fraction(rng.randint(0, 20), 20)
    if kind == "tropical":
        return INF if rng.random() < 0.05 else rng.randint(0, 9)
    if kind == "bottleneck":
        return INF if rng.random() < 0.1 else Fraction(rng.randint(0, 20), 2)
    if kind == "product":
        return (random_weight(rng, spec.parts[0]), random_weight(rng, spec.parts[1]))
    raise ValueError(f"no generator for {spec.name}")


def palette(spec, size=4, seed=0):
    """A deterministic small set of weights (top and bottom included)."""
    rng = random.Random(seed)
    vals = {spec.top, spec.bot}
    while len(vals) < size + 2 and len(vals) < 50:
        vals.add(random_weight(rng, spec))
        if spec.kind == "boolean":
            break
    return sorted(vals, key=repr)


def random_process(rng: random.Random, spec, actions, depth: int, *, tau=True,
                   operators=True, branching=2):
    """Recursion-free term with at most ``depth`` nested prefixes.

    ``operators`` enables occasional parallel, hiding and restriction nodes.
    """
    acts = list(actions) + ([TAU] if tau else [])

    def gen(d):
        if d == 0 or rng.random() < 0.15:
            return NIL
        r = rng.random()
        if operators and d >= 2 and r < 0.1:
            sync = frozenset(rng.sample(list(actions), rng.randint(0, min(2, len(actions)))))
            return Parallel(sync, gen(d // 2), gen(d // 2))
        if operators and r < 0.15:
            sel = frozenset(rng.sample(list(actions), 1))
            return (Hide if rng.random() < 0.5 else Restrict)(sel, gen(d))
        if r < 0.45:
            k = rng.randint(2, branching)
            return Choice(tuple(gen(d) for _ in range(k)))
        return Prefix(rng.choice(acts), random_weight(rng, spec), gen(d - 1))

    return gen(depth)


def random_formula(rng: random.Random, spec, actions, depth: int, *, negation=False):
    """Formula of height at most ``depth``."""
    actions = list(actions)

    def gen(d):
        if d <= 1 or rng.random() < 0.2:
            r = rng.random()
            if r < 0.2:
                return Const(spec.top)
            if r < 0.3:
                return Const(spec.bot)
            return Const(random_weight(rng, spec))
        r = rng.random()
        if r < 0.3:
            return Diamond(rng.choice(actions), gen(d - 1))
        if r < 0.6:
            return Box(rng.choice(actions), gen(d - 1))
        if negation and r < 0.65:
            return Neg(gen(d - 1))
        cls = rng.choice((Plus, Times, Glb))
        return cls(gen(d - 1), gen(d - 1))

    return gen(depth)


def random_mlts(rng: random.Random, spec, n_states: int, actions, *, acyclic=True,
                density=0.3, tau=True) -> Mlts:
    """Random MLTS; acyclic systems only have edges to higher-numbered states."""
    acts = list(actions) + ([TAU] if tau else [])
    edges = []
    for s in range(n_states):
        targets = range(s + 1, n_states) if acyclic else range(n_states)
        for t in targets:
            for a in acts:
                if rng.random() < density / len(acts):
                    edges.append((s, a, t, random_weight(rng, spec)))
        # keep most states reachable
        if s + 1 < n_states and rng.random() < 0.7:
            edges.append((s, rng.choice(acts), s + 1, random_weight(rng, spec)))
    return Mlts.from_edges(spec, edges, initial=0)
