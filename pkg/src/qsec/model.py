"""Line-oriented model files.

::

    semiring tropical
    process P = (open,5).(close,4).0
    formula phi = [open]<close> top
    check eval: P
    check trace: P depth 5
    check equiv: P ~eps-trace(1) Q
    check sat: P |= phi ? 11
    check pmc-theorem: phi // P on {open} against Q
    check gndc: P with H={h}, alpha=hideH, rel=wtrace, depth=2, palette={top}

``#`` starts a comment.  Process definitions may refer to each other in any
order; a formula may use formulas declared above it.  Checks are numbered
from 1 in file order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from qsec.chm import check_formula, parse_formula_tokens
from qsec.equiv import NEEDS_EPS, relation_tag
from qsec.errors import QsecError, QsecSyntaxError
from qsec.lexer import Lexer, parse_name_set, parse_weight_tokens
from qsec.process import ProcessEnv, Term, free_variables, parse_process_tokens
from qsec.semiring import semiring_from_name

CHECK_KINDS = ("eval", "trace", "equiv", "sat", "pmc-theorem", "gndc")
RESERVED = {"top", "bot", "tau", "inf", "true", "false"}


class ModelError(QsecError):
    """A declaration in a model file is malformed; carries its line and column."""

    def __init__(self, message, line, column=None):
        self.message = message
        self.line = line
        self.column = column
        where = f"line {line}" + (f", column {column}" if column is not None else "")
        super().__init__(f"{where}: {message}")


@dataclass
class Check:
    id: int
    line: int
    kind: str
    source: str
    args: dict = field(default_factory=dict)
    error: ModelError | None = None


@dataclass
class Model:
    spec: object
    env: ProcessEnv
    processes: dict
    formulas: dict
    checks: list
    path: str | None = None

    def check(self, check_id: int) -> Check:
        from qsec.errors import UnknownCheck

        for c in self.checks:
            if c.id == check_id:
                return c
        raise UnknownCheck(f"no check with id {check_id} (the file has {len(self.checks)})")


def _strip_comment(line):
    pos = line.find("#")
    return line if pos < 0 else line[:pos]


def _syntax(exc: QsecSyntaxError, lineno):
    col = None if exc.position is None else exc.position + 1
    return ModelError(exc.message, lineno, col)


def parse_model(text: str, path: str | None = None) -> Model:
    """Parse a model file.

    Declaration errors raise :class:`ModelError`; a malformed check is kept
    with its ``error`` set so the remaining checks can still run.
    """
    spec = None
    raw_processes = []
    formula_lines = []
    check_lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).rstrip()
        body = line.lstrip()
        if not body:
            continue
        col = len(line) - len(body)
        word = body.split(None, 1)[0]
        rest_col = col + len(word)
        rest = line[rest_col:]
        if word == "semiring":
            if spec is not None:
                raise ModelError("only one semiring declaration is allowed", lineno)
            try:
                spec = semiring_from_name(rest.strip())
            except QsecSyntaxError as exc:
                raise ModelError(exc.message, lineno, col + 1) from None
        elif word in ("process", "formula", "check"):
            if spec is None:
                raise ModelError("the semiring must be declared first", lineno, col + 1)
            target = {"process": raw_processes, "formula": formula_lines, "check": check_lines}[word]
            target.append((lineno, rest, rest_col))
        else:
            raise ModelError(f"unknown declaration {word!r}", lineno, col + 1)
    if spec is None:
        raise ModelError("missing semiring declaration", 1)

    env = ProcessEnv()
    processes = {}
    for lineno, rest, off in raw_processes:
        try:
            lex = Lexer(rest, off)
            name = _declared_name(lex, processes)
            term = parse_process_tokens(lex, spec)
            lex.expect_end()
        except QsecSyntaxError as exc:
            raise _syntax(exc, lineno) from None
        processes[name] = (term, lineno)
        env.define(name, term)
    for name, (term, lineno) in processes.items():
        for var in sorted(free_variables(term)):
            if var not in processes:
                raise ModelError(f"process variable {var!r} is not defined", lineno)
    try:
        env.check()
    except QsecError as exc:
        raise ModelError(str(exc), raw_processes[0][0] if raw_processes else 1) from None

    formulas = {}
    for lineno, rest, off in formula_lines:
        try:
            lex = Lexer(rest, off)
            name = _declared_name(lex, formulas)
            phi = parse_formula_tokens(lex, spec, formulas)
            lex.expect_end()
            check_formula(phi, spec)
        except QsecSyntaxError as exc:
            raise _syntax(exc, lineno) from None
        except QsecError as exc:
            raise ModelError(str(exc), lineno) from None
        formulas[name] = phi

    model = Model(spec, env, {k: v[0] for k, v in processes.items()}, formulas, [], path)
    for i, (lineno, rest, off) in enumerate(check_lines, start=1):
        model.checks.append(_parse_check(model, i, lineno, rest, off))
    return model


def _declared_name(lex, seen):
    tok = lex.peek()
    name = lex.expect_name()
    if name in RESERVED:
        raise QsecSyntaxError(f"{name!r} is reserved", tok.pos, lex.text)
    if name in seen:
        raise QsecSyntaxError(f"{name!r} is declared twice", tok.pos, lex.text)
    lex.expect("=")
    return name


def _parse_check(model, check_id, lineno, rest, off) -> Check:
    source = rest.split(":", 1)[1].strip() if ":" in rest else rest.strip()
    kind = ""
    try:
        lex = Lexer(rest, off)
        kind = lex.expect_name()
        while lex.accept("-"):
            kind += "-" + lex.expect_name()
        if kind not in CHECK_KINDS:
            raise QsecSyntaxError(f"unknown check kind {kind!r}", lex.tokens[0].pos, rest)
        lex.expect(":")
        args = _CHECK_PARSERS[kind](model, lex)
        lex.expect_end()
        _check_vars(model, args)
        return Check(check_id, lineno, kind, source, args)
    except QsecSyntaxError as exc:
        return Check(check_id, lineno, kind, source, error=_syntax(exc, lineno))
    except (QsecError, ValueError) as exc:
        return Check(check_id, lineno, kind, source, error=ModelError(str(exc), lineno))


def _check_vars(model, args):
    for key, value in args.items():
        terms = value if isinstance(value, list) else [value]
        for t in terms:
            if isinstance(t, Term):
                for var in sorted(free_variables(t)):
                    if var not in model.processes:
                        raise QsecSyntaxError(f"process {var!r} is not defined")


def _term(model, lex):
    return parse_process_tokens(lex, model.spec)


def _formula(model, lex):
    phi = parse_formula_tokens(lex, model.spec, model.formulas)
    check_formula(phi, model.spec)
    return phi


def _int(lex):
    tok = lex.peek()
    if tok.kind != "number" or not tok.text.isdigit():
        lex.error(f"expected a non-negative integer, found {tok.text or 'end of input'!r}")
    return int(lex.next().text)


def _relation(model, lex):
    """``wtrace``, ``bisim``, ``eps-trace(W)`` or ``eps-bisim(W)``."""
    name = lex.expect_name()
    while lex.accept("-"):
        name += "-" + lex.expect_name()
    try:
        tag = relation_tag(name)
    except ValueError as exc:
        lex.i -= 1
        lex.error(str(exc))
    eps = None
    if tag in NEEDS_EPS:
        lex.expect("(")
        eps = parse_weight_tokens(lex, model.spec)
        lex.expect(")")
    return name, eps


def _check_eval(model, lex):
    return {"term": _term(model, lex)}


def _check_trace(model, lex):
    term = _term(model, lex)
    depth = None
    if lex.accept("depth"):
        depth = _int(lex)
        if depth <= 0:
            lex.error("depth must be positive")
    return {"term": term, "depth": depth}


def _check_equiv(model, lex):
    left = _term(model, lex)
    lex.expect("~")
    relation, eps = _relation(model, lex)
    right = _term(model, lex)
    return {"left": left, "right": right, "relation": relation, "eps": eps}


def _check_sat(model, lex):
    term = _term(model, lex)
    lex.expect("|=")
    phi = _formula(model, lex)
    lex.expect("?")
    threshold = parse_weight_tokens(lex, model.spec)
    return {"term": term, "formula": phi, "threshold": threshold}


def _check_pmc(model, lex):
    phi = _formula(model, lex)
    lex.expect("//")
    p = _term(model, lex)
    lex.expect("on")
    sync = parse_name_set(lex)
    lex.expect("against")
    q = _term(model, lex)
    rule = "guarded"
    if lex.accept("rule"):
        rule = lex.expect_name()
        if rule not in ("guarded", "literal"):
            lex.i -= 1
            lex.error("rule must be 'guarded' or 'literal'")
    return {"formula": phi, "p": p, "sync": sync, "q": q, "rule": rule}


def _check_gndc(model, lex):
    p = _term(model, lex)
    lex.expect("with")
    args = {"p": p}
    while True:
        tok = lex.peek()
        key = lex.expect_name()
        lex.expect("=")
        if key in args:
            raise QsecSyntaxError(f"duplicate option {key!r}", tok.pos, lex.text)
        if key == "H":
            args["H"] = parse_name_set(lex)
        elif key == "alpha":
            args["alpha"] = lex.expect_name()
        elif key == "rel":
            args["rel"] = _relation(model, lex)
        elif key == "depth":
            args["depth"] = _int(lex)
        elif key == "cap":
            args["cap"] = _int(lex)
        elif key == "palette":
            lex.expect("{")
            vals = [parse_weight_tokens(lex, model.spec)]
            while lex.accept(","):
                vals.append(parse_weight_tokens(lex, model.spec))
            lex.expect("}")
            args["palette"] = vals
        elif key == "envs":
            lex.expect("{")
            envs = []
            if not lex.at("}"):
                envs.append(_term(model, lex))
                while lex.accept(";"):
                    envs.append(_term(model, lex))
            lex.expect("}")
            args["envs"] = envs
        else:
            raise QsecSyntaxError(f"unknown gndc option {key!r}", tok.pos, lex.text)
        if not lex.accept(","):
            break
    if "H" not in args:
        lex.error("gndc checks need H={...}")
    if ("envs" in args) == ("depth" in args or "palette" in args):
        lex.error("give either envs={...} or depth=N with palette={...}")
    if "depth" in args:
        args.setdefault("palette", [model.spec.top])
    args.setdefault("alpha", "hideH")
    args.setdefault("rel", ("wtrace", None))
    return args


_CHECK_PARSERS = {
    "eval": _check_eval,
    "trace": _check_trace,
    "equiv": _check_equiv,
    "sat": _check_sat,
    "pmc-theorem": _check_pmc,
    "gndc": _check_gndc,
}
