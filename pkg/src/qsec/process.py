"""GPA process terms: abstract syntax, canonical forms, parser and printer.

Concrete syntax::

    term := "0" | "(" action "," weight ")" "." term | term "+" term
          | term "|[" names "]|" term | term "\\" "{" names "}"
          | term "/" "{" names "}" | IDENT | "(" term ")"

Prefix binds tighter than the postfix hide/restrict operators, which bind
tighter than ``+``, which binds tighter than parallel composition.  The
internal action is written ``tau`` and may only appear as a prefix action.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from qsec.errors import QsecSyntaxError, UnboundVariable, UnguardedRecursion
from qsec.lexer import Lexer, parse_name_set, parse_weight_tokens
from qsec.semiring import format_weight

TAU = "tau"


class Term:
    """Base class of process terms; hash and printed form are cached."""

    def _fields(self):
        raise NotImplementedError

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((type(self).__name__,) + self._fields())
            object.__setattr__(self, "_hash", h)
        return h

    def __str__(self):
        s = self._str
        if s is None:
            s = format_process(self)
            object.__setattr__(self, "_str", s)
        return s


def _cache():
    return field(default=None, init=False, repr=False, compare=False)


@dataclass(frozen=True, eq=True)
class Nil(Term):
    _hash: int = _cache()
    _str: str = _cache()

    def _fields(self):
        return ()

    __hash__ = Term.__hash__


@dataclass(frozen=True, eq=True)
class Prefix(Term):
    action: str
    weight: object
    cont: Term
    _hash: int = _cache()
    _str: str = _cache()

    def _fields(self):
        return (self.action, self.weight, self.cont)

    __hash__ = Term.__hash__


@dataclass(frozen=True, eq=True)
class Choice(Term):
    branches: tuple
    _hash: int = _cache()
    _str: str = _cache()

    def _fields(self):
        return self.branches

    __hash__ = Term.__hash__


@dataclass(frozen=True, eq=True)
class Parallel(Term):
    sync: frozenset
    left: Term
    right: Term
    _hash: int = _cache()
    _str: str = _cache()

    def _fields(self):
        return (self.sync, self.left, self.right)

    __hash__ = Term.__hash__


@dataclass(frozen=True, eq=True)
class Hide(Term):
    actions: frozenset
    body: Term
    _hash: int = _cache()
    _str: str = _cache()

    def _fields(self):
        return (self.actions, self.body)

    __hash__ = Term.__hash__


@dataclass(frozen=True, eq=True)
class Restrict(Term):
    actions: frozenset
    body: Term
    _hash: int = _cache()
    _str: str = _cache()

    def _fields(self):
        return (self.actions, self.body)

    __hash__ = Term.__hash__


@dataclass(frozen=True, eq=True)
class Var(Term):
    name: str
    _hash: int = _cache()
    _str: str = _cache()

    def _fields(self):
        return (self.name,)

    __hash__ = Term.__hash__


NIL = Nil()


def _check_action_set(actions):
    if TAU in actions:
        raise ValueError("tau may not appear in a synchronisation, hiding or restriction set")
    return frozenset(actions)


def prefix(action, weight, cont=NIL):
    return Prefix(action, weight, cont)


def choice(*branches):
    return Choice(tuple(branches))


def parallel(sync, left, right):
    return Parallel(_check_action_set(sync), left, right)


def hide(actions, body):
    return Hide(_check_action_set(actions), body)


def restrict(actions, body):
    return Restrict(_check_action_set(actions), body)


# -- canonical forms ---------------------------------------------------------------


def normalize(term: Term, _memo=None) -> Term:
    """Canonical representative used as MLTS state.

    Choices are flattened, stripped of ``0`` branches, deduplicated and sorted;
    hiding/restriction of ``0`` or by the empty set disappears.
    """
    memo = {} if _memo is None else _memo
    return _normalize(term, memo)


def _normalize(t, memo):
    hit = memo.get(t)
    if hit is not None:
        return hit
    if isinstance(t, (Nil, Var)):
        out = t
    elif isinstance(t, Prefix):
        cont = _normalize(t.cont, memo)
        out = t if cont is t.cont else Prefix(t.action, t.weight, cont)
    elif isinstance(t, Choice):
        flat = {}
        for b in t.branches:
            nb = _normalize(b, memo)
            parts = nb.branches if isinstance(nb, Choice) else (nb,)
            for p in parts:
                if not isinstance(p, Nil):
                    flat[p] = None
        items = sorted(flat, key=str)
        if not items:
            out = NIL
        elif len(items) == 1:
            out = items[0]
        else:
            out = Choice(tuple(items))
    elif isinstance(t, Parallel):
        out = Parallel(t.sync, _normalize(t.left, memo), _normalize(t.right, memo))
    elif isinstance(t, (Hide, Restrict)):
        body = _normalize(t.body, memo)
        if not t.actions or isinstance(body, Nil):
            out = body
        else:
            out = type(t)(t.actions, body)
    else:
        raise TypeError(f"not a process term: {t!r}")
    memo[t] = out
    return out


# -- environments -------------------------------------------------------------------


class ProcessEnv:
    """Named co-recursive definitions ``X = P``."""

    def __init__(self, definitions=None):
        self._defs = dict(definitions or {})

    def define(self, name, term):
        if name == TAU:
            raise ValueError("tau is not a legal process name")
        self._defs[name] = term

    def __getitem__(self, name):
        try:
            return self._defs[name]
        except KeyError:
            raise UnboundVariable(f"process variable {name!r} is not defined") from None

    def __contains__(self, name):
        return name in self._defs

    def __iter__(self):
        return iter(self._defs)

    def __len__(self):
        return len(self._defs)

    def items(self):
        return self._defs.items()

    def copy(self):
        return ProcessEnv(self._defs)

    def check(self, *roots):
        """Reject dangling identifiers and unguarded recursion."""
        for term in list(self._defs.values()) + list(roots):
            for name in free_variables(term):
                self[name]
        graph = {name: _unguarded_vars(body) for name, body in self._defs.items()}
        state = {}

        def visit(name, path):
            mark = state.get(name)
            if mark == "done":
                return
            if mark == "open":
                cycle = path[path.index(name) :] + [name]
                raise UnguardedRecursion("unguarded recursion: " + " -> ".join(cycle))
            state[name] = "open"
            for nxt in sorted(graph.get(name, ())):
                visit(nxt, path + [name])
            state[name] = "done"

        for name in sorted(graph):
            visit(name, [])


def _unguarded_vars(t):
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, (Nil, Prefix)):
        return set()
    if isinstance(t, Choice):
        return set().union(*(_unguarded_vars(b) for b in t.branches))
    if isinstance(t, Parallel):
        return _unguarded_vars(t.left) | _unguarded_vars(t.right)
    return _unguarded_vars(t.body)


def free_variables(t) -> set:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Nil):
        return set()
    if isinstance(t, Prefix):
        return free_variables(t.cont)
    if isinstance(t, Choice):
        return set().union(*(free_variables(b) for b in t.branches))
    if isinstance(t, Parallel):
        return free_variables(t.left) | free_variables(t.right)
    return free_variables(t.body)


def sort(term: Term, env: ProcessEnv | None = None) -> frozenset:
    """Action names occurring syntactically in ``term`` (tau excluded).

    Variables are followed through ``env`` when it is given.
    """
    seen_vars = set()
    out = set()
    stack = [term]
    while stack:
        t = stack.pop()
        if isinstance(t, Prefix):
            if t.action != TAU:
                out.add(t.action)
            stack.append(t.cont)
        elif isinstance(t, Choice):
            stack.extend(t.branches)
        elif isinstance(t, Parallel):
            out |= t.sync
            stack.extend((t.left, t.right))
        elif isinstance(t, (Hide, Restrict)):
            out |= t.actions
            stack.append(t.body)
        elif isinstance(t, Var) and env is not None and t.name not in seen_vars:
            seen_vars.add(t.name)
            stack.append(env[t.name])
    return frozenset(out)


def term_depth(t) -> int:
    """Longest chain of nested prefixes."""
    if isinstance(t, (Nil, Var)):
        return 0
    if isinstance(t, Prefix):
        return 1 + term_depth(t.cont)
    if isinstance(t, Choice):
        return max(term_depth(b) for b in t.branches)
    if isinstance(t, Parallel):
        return max(term_depth(t.left), term_depth(t.right))
    return term_depth(t.body)


# -- printing -----------------------------------------------------------------------

_PAR, _SUM, _POST, _PREFIX, _ATOM = range(5)


def _names(actions):
    return ",".join(sorted(actions))


def format_process(t: Term) -> str:
    return _fmt(t, _PAR)


def _level(t):
    if isinstance(t, Parallel):
        return _PAR
    if isinstance(t, Choice):
        return _SUM
    if isinstance(t, (Hide, Restrict)):
        return _POST
    if isinstance(t, Prefix):
        return _PREFIX
    return _ATOM


def _fmt(t, need):
    if isinstance(t, Nil):
        s = "0"
    elif isinstance(t, Var):
        s = t.name
    elif isinstance(t, Prefix):
        s = f"({t.action},{format_weight(t.weight)}).{_fmt(t.cont, _PREFIX)}"
    elif isinstance(t, Choice):
        s = " + ".join(_fmt(b, _POST) for b in t.branches)
    elif isinstance(t, Parallel):
        s = f"{_fmt(t.left, _PAR)} |[{_names(t.sync)}]| {_fmt(t.right, _SUM)}"
    elif isinstance(t, Hide):
        s = f"{_fmt(t.body, _POST)} \\ {{{_names(t.actions)}}}"
    elif isinstance(t, Restrict):
        s = f"{_fmt(t.body, _POST)} / {{{_names(t.actions)}}}"
    else:
        raise TypeError(f"not a process term: {t!r}")
    if _level(t) < need:
        return f"({s})"
    return s


# -- parsing ------------------------------------------------------------------------


def parse_process(text: str, spec, env: ProcessEnv | None = None, *, check=True) -> Term:
    """Parse ``text`` into a :class:`Term` with weights in ``spec``.

    With ``env`` given (and ``check`` true) every variable must be defined.
    """
    lex = Lexer(text)
    term = parse_process_tokens(lex, spec)
    lex.expect_end()
    if env is not None and check:
        for name in sorted(free_variables(term)):
            env[name]
    return term


def parse_process_tokens(lex: Lexer, spec) -> Term:
    return _Parser(lex, spec).parallel()


class _Parser:
    def __init__(self, lex, spec):
        self.lex = lex
        self.spec = spec

    def parallel(self):
        left = self.sum()
        while self.lex.accept("|["):
            names = []
            if not self.lex.at("]|"):
                names.append(self._action_name(allow_tau=False))
                while self.lex.accept(","):
                    names.append(self._action_name(allow_tau=False))
            self.lex.expect("]|")
            right = self.sum()
            left = Parallel(frozenset(names), left, right)
        return left

    def sum(self):
        branches = [self.postfix()]
        while self.lex.accept("+"):
            branches.append(self.postfix())
        if len(branches) == 1:
            return branches[0]
        return Choice(tuple(branches))

    def postfix(self):
        t = self.prefix()
        while self.lex.at("\\") or self.lex.at("/"):
            op = self.lex.next().text
            pos = self.lex.peek().pos
            names = parse_name_set(self.lex)
            if TAU in names:
                raise QsecSyntaxError("tau may not be hidden or restricted", pos, self.lex.text)
            t = Hide(names, t) if op == "\\" else Restrict(names, t)
        return t

    def prefix(self):
        lex = self.lex
        if lex.at("(") and lex.peek(1).kind == "name" and lex.at(",", 2):
            lex.next()
            action = self._action_name(allow_tau=True)
            lex.expect(",")
            weight = parse_weight_tokens(lex, self.spec)
            lex.expect(")")
            lex.expect(".")
            return Prefix(action, weight, self.prefix())
        return self.atom()

    def atom(self):
        lex = self.lex
        tok = lex.peek()
        if tok.kind == "number" and tok.text == "0":
            lex.next()
            return NIL
        if tok.kind == "name":
            if tok.text == TAU:
                lex.error("tau is only legal as a prefix action")
            lex.next()
            return Var(tok.text)
        if lex.accept("("):
            t = self.parallel()
            lex.expect(")")
            return t
        lex.error(f"expected a process term, found {tok.text or 'end of input'!r}")

    def _action_name(self, allow_tau):
        tok = self.lex.peek()
        name = self.lex.expect_name()
        if name == TAU and not allow_tau:
            raise QsecSyntaxError("tau may not be a synchronisation action", tok.pos, self.lex.text)
        return name
