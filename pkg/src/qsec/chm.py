"""Semiring-valued Hennessy-Milner logic.

A formula evaluates at a state to a carrier value: ``<a>phi`` sums
``k * phi`` over the ``a``-moves and ``[a]phi`` takes their greatest lower
bound, so an empty diamond is bottom and an empty box is top.
"""

from __future__ import annotations

from dataclasses import dataclass

from qsec.equiv import Verdict
from qsec.errors import MixedSemirings, NegationUndefined, QsecSyntaxError, StateNotFound
from qsec.lexer import Lexer, parse_weight_tokens
from qsec.mlts import Mlts, build_mlts, derivatives
from qsec.process import ProcessEnv, Term, sort


class Formula:
    __slots__ = ()

    def __str__(self):
        return format_formula(self)


@dataclass(frozen=True, eq=True, slots=True)
class Const(Formula):
    value: object


@dataclass(frozen=True, eq=True, slots=True)
class Plus(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=True, slots=True)
class Times(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=True, slots=True)
class Glb(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=True, slots=True)
class Diamond(Formula):
    action: str
    body: Formula


@dataclass(frozen=True, eq=True, slots=True)
class Box(Formula):
    action: str
    body: Formula


@dataclass(frozen=True, eq=True, slots=True)
class Neg(Formula):
    body: Formula


BINARY = (Plus, Times, Glb)
MODAL = (Diamond, Box)


def children(phi):
    if isinstance(phi, BINARY):
        return (phi.left, phi.right)
    if isinstance(phi, (Diamond, Box, Neg)):
        return (phi.body,)
    return ()


def formula_size(phi) -> int:
    """Number of nodes, counting shared subterms once per occurrence."""
    memo = {}

    def go(f):
        key = id(f)
        if key not in memo:
            memo[key] = 1 + sum(go(c) for c in children(f))
        return memo[key]

    return go(phi)


def formula_depth(phi) -> int:
    """Height of the syntax tree; a constant has depth 1."""
    memo = {}

    def go(f):
        key = id(f)
        if key not in memo:
            memo[key] = 1 + max((go(c) for c in children(f)), default=0)
        return memo[key]

    return go(phi)


def formula_actions(phi) -> set:
    out = set()
    stack = [phi]
    while stack:
        f = stack.pop()
        if isinstance(f, MODAL):
            out.add(f.action)
        stack.extend(children(f))
    return out


def check_formula(phi, spec):
    """Validate every constant against ``spec`` and reject unsupported negation."""
    stack = [phi]
    seen = set()
    while stack:
        f = stack.pop()
        if id(f) in seen:
            continue
        seen.add(id(f))
        if isinstance(f, Const):
            spec.check(f.value)
        elif isinstance(f, Neg) and not spec.has_negation:
            raise NegationUndefined(f"the {spec.name} semiring has no negation operator")
        stack.extend(children(f))
    return phi


# -- printing ---------------------------------------------------------------------

_PLUS, _GLB, _TIMES, _UNARY, _ATOM = range(5)
_BIN_LEVEL = {Plus: (_PLUS, "+"), Glb: (_GLB, "&"), Times: (_TIMES, "*")}


def format_formula(phi, spec=None) -> str:
    """Render ``phi`` in the concrete syntax with minimal parentheses."""
    fmt = spec.format if spec is not None else _format_const
    return _fmt(phi, _PLUS, fmt)


def _format_const(v):
    from qsec.semiring import format_weight

    return format_weight(v)


def _fmt(f, need, fmt):
    if isinstance(f, Const):
        return fmt(f.value)
    if isinstance(f, BINARY):
        level, op = _BIN_LEVEL[type(f)]
        text = f"{_fmt(f.left, level, fmt)} {op} {_fmt(f.right, level + 1, fmt)}"
    elif isinstance(f, Diamond):
        level, text = _UNARY, f"<{f.action}>{_fmt(f.body, _UNARY, fmt)}"
    elif isinstance(f, Box):
        level, text = _UNARY, f"[{f.action}]{_fmt(f.body, _UNARY, fmt)}"
    elif isinstance(f, Neg):
        level, text = _UNARY, f"!{_fmt(f.body, _UNARY, fmt)}"
    else:
        raise TypeError(f"not a formula: {f!r}")
    return f"({text})" if level < need else text


# -- parsing ----------------------------------------------------------------------


def parse_formula(text: str, spec, defs: dict | None = None) -> Formula:
    """Parse a formula; ``defs`` maps names to previously declared formulas."""
    lex = Lexer(text)
    phi = parse_formula_tokens(lex, spec, defs)
    lex.expect_end()
    return phi


def parse_formula_tokens(lex: Lexer, spec, defs=None) -> Formula:
    return _FormulaParser(lex, spec, defs or {}).plus()


class _FormulaParser:
    def __init__(self, lex, spec, defs):
        self.lex = lex
        self.spec = spec
        self.defs = defs

    def _chain(self, sub, op, cls):
        left = sub()
        while self.lex.accept(op):
            left = cls(left, sub())
        return left

    def plus(self):
        return self._chain(self.glb, "+", Plus)

    def glb(self):
        return self._chain(self.times, "&", Glb)

    def times(self):
        return self._chain(self.unary, "*", Times)

    def unary(self):
        lex = self.lex
        if lex.accept("<"):
            a = self._action()
            lex.expect(">")
            return Diamond(a, self.unary())
        if lex.accept("["):
            a = self._action()
            lex.expect("]")
            return Box(a, self.unary())
        if lex.at("!"):
            if not self.spec.has_negation:
                raise NegationUndefined(f"the {self.spec.name} semiring has no negation operator")
            lex.next()
            return Neg(self.unary())
        return self.atom()

    def _action(self):
        if self.lex.at("tau"):
            self.lex.error("modalities range over visible actions; tau is not allowed")
        return self.lex.expect_name()

    def atom(self):
        lex = self.lex
        tok = lex.peek()
        if tok.text == "(":
            if getattr(self.spec, "parts", None) is not None:
                mark = lex.i
                try:
                    return Const(parse_weight_tokens(lex, self.spec))
                except (QsecSyntaxError, MixedSemirings):
                    lex.i = mark
            lex.next()
            phi = self.plus()
            lex.expect(")")
            return phi
        if tok.kind == "name" and tok.text in self.defs and tok.text not in ("top", "bot"):
            lex.next()
            return self.defs[tok.text]
        if tok.kind in ("name", "number"):
            return Const(parse_weight_tokens(lex, self.spec))
        lex.error(f"expected a formula, found {tok.text or 'end of input'!r}")


# -- evaluation -------------------------------------------------------------------


def evaluate(phi: Formula, m: Mlts, s: int | None = None):
    """Value of ``phi`` at state ``s`` (default: the initial state)."""
    s = m.initial if s is None else s
    return state_table(phi, m, [s])[(id(phi), s)]


def state_table(phi: Formula, m: Mlts, states=None) -> dict:
    """Values ``{(id(subformula), state): weight}`` computed for ``states``."""
    spec = m.spec
    check_formula(phi, spec)
    if states is None:
        states = range(m.n_states)
    plus, times, glb = spec._plus, spec._times, spec._glb
    bot, top = spec.bot, spec.top
    memo = {}

    def ev(f, s):
        key = (id(f), s)
        hit = memo.get(key)
        if hit is not None or key in memo:
            return hit
        if isinstance(f, Const):
            v = f.value
        elif isinstance(f, Plus):
            v = plus(ev(f.left, s), ev(f.right, s))
        elif isinstance(f, Times):
            v = times(ev(f.left, s), ev(f.right, s))
        elif isinstance(f, Glb):
            v = glb(ev(f.left, s), ev(f.right, s))
        elif isinstance(f, Diamond):
            v = bot
            for a, t, w in m.succ[s]:
                if a == f.action:
                    v = plus(v, times(w, ev(f.body, t)))
        elif isinstance(f, Box):
            v = top
            for a, t, w in m.succ[s]:
                if a == f.action:
                    v = glb(v, times(w, ev(f.body, t)))
        elif isinstance(f, Neg):
            v = spec._negate(ev(f.body, s))
        else:
            raise TypeError(f"not a formula: {f!r}")
        memo[key] = v
        return v

    for s in states:
        if not 0 <= s < m.n_states:
            raise StateNotFound(f"state {s} not in the MLTS")
        ev(phi, s)
    return memo


def state_values_of(phi: Formula, m: Mlts) -> list:
    """Value of ``phi`` at every state, in state order."""
    table = state_table(phi, m)
    return [table[(id(phi), s)] for s in range(m.n_states)]


# -- projection and threshold satisfaction ----------------------------------------------


def project(m: Mlts, p: Term, env: ProcessEnv | None = None) -> Mlts:
    """Restrict ``m`` to the derivatives of ``p`` and the actions ``p`` can perform.

    ``m`` must be built from process terms (its state labels are normalised
    terms).  Kept actions are the syntactic sort of ``p`` together with the
    labels ``p`` itself produces, which covers the ``tau`` steps introduced
    by hiding.  The projection starts at ``p`` when ``p`` is a state of
    ``m`` and at the initial state of ``m`` otherwise; unreachable states are
    pruned.
    """
    env = env if env is not None else ProcessEnv()
    own = build_mlts(p, m.spec, env)
    index = {lab: i for i, lab in enumerate(m.labels)}
    der = {own.labels[i] for i in derivatives(own)}
    keep = {index[lab] for lab in der if lab in index}
    if not keep:
        raise StateNotFound(f"no derivative of {p} is a state of the MLTS")
    root = index.get(own.labels[own.initial], m.initial)
    keep.add(root)
    acts = set(sort(p, env)) | set(own.actions)
    edges = [
        (s, a, t, w)
        for (s, a, t), w in m.transitions.items()
        if s in keep and t in keep and a in acts
    ]
    return Mlts.from_edges(m.spec, edges, initial=root, labels=m.labels)


def satisfies(process: Term, phi: Formula, threshold, spec, env: ProcessEnv | None = None,
              universe: Mlts | None = None, state_limit: int | None = None) -> Verdict:
    """Threshold satisfaction: ``threshold <= value of phi`` on the projection.

    Without ``universe`` the MLTS of ``process`` itself is used, which is its
    own projection.
    """
    spec.check(threshold)
    if universe is not None and universe.spec != spec:
        raise MixedSemirings(f"universe is over {universe.spec.name}, query over {spec.name}")
    if universe is None:
        kwargs = {} if state_limit is None else {"state_limit": state_limit}
        m = build_mlts(process, spec, env, **kwargs)
    else:
        m = project(universe, process, env)
    value = evaluate(phi, m, m.initial)
    holds = spec._leq(threshold, value)
    details = {"threshold": threshold, "states": m.n_states}
    return Verdict(holds, "sat", None, value, details, None if holds else ("value", value))
