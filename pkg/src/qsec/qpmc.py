"""Quantitative partial model checking.

``pmc_transform(phi, ctx)`` rewrites a formula about ``P |[L]| Q`` into a
residual formula about ``Q`` alone, so that evaluating the residual on ``Q``
gives the same value as evaluating ``phi`` on the composition.
"""

from __future__ import annotations

from dataclasses import dataclass

from qsec.chm import (
    Box,
    Const,
    Diamond,
    Formula,
    Glb,
    Neg,
    Plus,
    Times,
    check_formula,
    children,
    evaluate,
)
from qsec.errors import MixedSemirings
from qsec.mlts import DEFAULT_STATE_LIMIT, build_mlts
from qsec.process import NIL, TAU, Choice, Hide, Parallel, Prefix, ProcessEnv, Restrict, Term

GUARDED = "guarded"
LITERAL = "literal"


class PmcContext:
    """The component ``P`` being factored out and the synchronisation set ``L``."""

    def __init__(self, component: Term, sync, spec, env: ProcessEnv | None = None,
                 state_limit: int = DEFAULT_STATE_LIMIT):
        sync = frozenset(sync)
        if TAU in sync:
            raise ValueError("tau cannot be synchronised")
        self.component = component
        self.sync = sync
        self.spec = spec
        self.env = env if env is not None else ProcessEnv()
        self.mlts = build_mlts(component, spec, self.env, state_limit=state_limit)
        self.memo = {}

    def moves(self, s, action):
        return [(t, w) for a, t, w in self.mlts.succ[s] if a == action]


def _fold(cls, items, empty):
    if not items:
        return empty
    out = items[0]
    for f in items[1:]:
        out = cls(out, f)
    return out


def pmc_transform(phi: Formula, ctx: PmcContext, state: int | None = None,
                  box_rule: str = GUARDED) -> Formula:
    """Residual of ``phi`` with respect to the component in ``ctx``.

    For a synchronised box the default ``guarded`` rule keeps the weight of
    the component's move under the modality, ``[a](k * phi')``, so a partner
    without ``a``-moves yields top.  ``literal`` places it outside,
    ``k * [a]phi'``, which only agrees with the composition when the partner
    can move.
    """
    if box_rule not in (GUARDED, LITERAL):
        raise ValueError(f"box_rule must be {GUARDED!r} or {LITERAL!r}")
    check_formula(phi, ctx.spec)
    spec = ctx.spec
    bot, top = Const(spec.bot), Const(spec.top)
    memo = ctx.memo

    def tr(f, s):
        key = (id(f), s, box_rule)
        hit = memo.get(key)
        if hit is not None:
            return hit[1]
        if isinstance(f, Const):
            out = f
        elif isinstance(f, (Plus, Times, Glb)):
            out = type(f)(tr(f.left, s), tr(f.right, s))
        elif isinstance(f, Neg):
            out = Neg(tr(f.body, s))
        elif isinstance(f, (Diamond, Box)):
            a = f.action
            moves = ctx.moves(s, a)
            diamond = isinstance(f, Diamond)
            if a not in ctx.sync:
                own = [Times(Const(k), tr(f.body, t)) for t, k in moves]
                here = type(f)(a, tr(f.body, s))
                out = _fold(Plus if diamond else Glb, [here] + own, None)
            elif diamond:
                parts = [Times(Const(k), Diamond(a, tr(f.body, t))) for t, k in moves]
                out = _fold(Plus, parts, bot)
            elif box_rule == GUARDED:
                parts = [Box(a, Times(Const(k), tr(f.body, t))) for t, k in moves]
                out = _fold(Glb, parts, top)
            else:
                parts = [Times(Const(k), Box(a, tr(f.body, t))) for t, k in moves]
                out = _fold(Glb, parts, top)
        else:
            raise TypeError(f"not a formula: {f!r}")
        # keep f alive so its id is not reused while the memo exists
        memo[key] = (f, out)
        return out

    return tr(phi, ctx.mlts.initial if state is None else state)


def simplify(phi: Formula, spec) -> Formula:
    """Constant folding that preserves the value at every state."""
    check_formula(phi, spec)
    bot, top = spec.bot, spec.top
    memo = {}

    def const(f):
        return f.value if isinstance(f, Const) else None

    def go(f):
        key = id(f)
        if key in memo:
            return memo[key][1]
        if isinstance(f, Const):
            out = f
        elif isinstance(f, Plus):
            left, right = go(f.left), go(f.right)
            cl, cr = const(left), const(right)
            if cl is not None and cr is not None:
                out = Const(spec._plus(cl, cr))
            elif cl == top or cr == top:
                out = Const(top)
            elif cl == bot:
                out = right
            elif cr == bot:
                out = left
            else:
                out = Plus(left, right)
        elif isinstance(f, Times):
            left, right = go(f.left), go(f.right)
            cl, cr = const(left), const(right)
            if cl is not None and cr is not None:
                out = Const(spec._times(cl, cr))
            elif cl == bot or cr == bot:
                out = Const(bot)
            elif cl == top:
                out = right
            elif cr == top:
                out = left
            else:
                out = Times(left, right)
        elif isinstance(f, Glb):
            left, right = go(f.left), go(f.right)
            cl, cr = const(left), const(right)
            if cl is not None and cr is not None:
                out = Const(spec._glb(cl, cr))
            elif cl == bot or cr == bot:
                out = Const(bot)
            elif cl == top:
                out = right
            elif cr == top:
                out = left
            else:
                out = Glb(left, right)
        elif isinstance(f, Neg):
            body = go(f.body)
            cb = const(body)
            out = Const(spec._negate(cb)) if cb is not None else Neg(body)
        elif isinstance(f, Diamond):
            body = go(f.body)
            # every summand is k * bot = bot
            out = Const(bot) if const(body) == bot else Diamond(f.action, body)
        elif isinstance(f, Box):
            out = Box(f.action, go(f.body))
        else:
            raise TypeError(f"not a formula: {f!r}")
        memo[key] = (f, out)
        return out

    return go(phi)


def dag_size(phi: Formula) -> int:
    """Number of distinct nodes of a formula graph."""
    seen = set()
    stack = [phi]
    while stack:
        f = stack.pop()
        if id(f) in seen:
            continue
        seen.add(id(f))
        stack.extend(children(f))
    return len(seen)


@dataclass
class TheoremCheck:
    lhs: object
    rhs: object
    equal: bool
    residual: Formula


def verify_theorem(phi: Formula, p: Term, q: Term, sync, spec, env: ProcessEnv | None = None,
                   box_rule: str = GUARDED, state_limit: int = DEFAULT_STATE_LIMIT) -> TheoremCheck:
    """Evaluate ``phi`` on ``P |[L]| Q`` and its residual on ``Q`` and compare."""
    env = env if env is not None else ProcessEnv()
    ctx = PmcContext(p, sync, spec, env, state_limit)
    composed = build_mlts(Parallel(ctx.sync, p, q), spec, env, state_limit=state_limit)
    residual = pmc_transform(phi, ctx, box_rule=box_rule)
    right = build_mlts(q, spec, env, state_limit=state_limit)
    if composed.spec != right.spec:
        raise MixedSemirings("components are over different semirings")
    lhs = evaluate(phi, composed, composed.initial)
    rhs = evaluate(residual, right, right.initial)
    return TheoremCheck(lhs, rhs, lhs == rhs, residual)


def _process_shrinks(t: Term):
    if isinstance(t, Prefix):
        yield t.cont
        yield NIL
        for c in _process_shrinks(t.cont):
            yield Prefix(t.action, t.weight, c)
    elif isinstance(t, Choice):
        yield from t.branches
        for i, b in enumerate(t.branches):
            for c in _process_shrinks(b):
                yield Choice(t.branches[:i] + (c,) + t.branches[i + 1 :])
    elif isinstance(t, Parallel):
        yield t.left
        yield t.right
        for c in _process_shrinks(t.left):
            yield Parallel(t.sync, c, t.right)
        for c in _process_shrinks(t.right):
            yield Parallel(t.sync, t.left, c)
    elif isinstance(t, (Hide, Restrict)):
        yield t.body
        for c in _process_shrinks(t.body):
            yield type(t)(t.actions, c)


def _formula_shrinks(f: Formula):
    for c in children(f):
        yield c
    if isinstance(f, (Plus, Times, Glb)):
        for c in _formula_shrinks(f.left):
            yield type(f)(c, f.right)
        for c in _formula_shrinks(f.right):
            yield type(f)(f.left, c)
    elif isinstance(f, (Diamond, Box)):
        for c in _formula_shrinks(f.body):
            yield type(f)(f.action, c)
    elif isinstance(f, Neg):
        for c in _formula_shrinks(f.body):
            yield Neg(c)


def shrink_counterexample(phi, p, q, sync, spec, env=None, box_rule=GUARDED, max_steps=1000):
    """Greedily simplify a failing ``(phi, P, Q)`` while it keeps failing."""

    def fails(f, a, b):
        return not verify_theorem(f, a, b, sync, spec, env, box_rule).equal

    steps = 0
    improved = True
    while improved and steps < max_steps:
        improved = False
        candidates = [(f, p, q) for f in _formula_shrinks(phi)]
        candidates += [(phi, a, q) for a in _process_shrinks(p)]
        candidates += [(phi, p, b) for b in _process_shrinks(q)]
        for f, a, b in candidates:
            steps += 1
            if fails(f, a, b):
                phi, p, q = f, a, b
                improved = True
                break
    return phi, p, q
