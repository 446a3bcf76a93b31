"""Command-line driver: ``qsec run``, ``qsec explain`` and ``qsec theorem-check``.

Exit codes: 0 when every check holds, 1 when some check fails, 2 on errors.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time

from qsec.chm import evaluate, format_formula, satisfies, state_table
from qsec.equiv import NEEDS_EPS, compare, min_epsilon, relation_tag
from qsec.errors import QsecError
from qsec.generate import random_formula, random_process
from qsec.gndc import GndcSpec, alpha_apply, check_qgndc, composed, environments_of
from qsec.mlts import (
    DEFAULT_DEPTH_LIMIT,
    DEFAULT_STATE_LIMIT,
    Mlts,
    build_mlts,
    maximal_traces,
    state_values,
    weak_run_weight,
    strong_run_weight,
    trace_label,
    weak_trace_set,
)
from qsec.model import Model, ModelError, parse_model
from qsec.qpmc import PmcContext, pmc_transform, shrink_counterexample, simplify, verify_theorem
from qsec.semiring import semiring_from_name

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


class Options:
    def __init__(self, state_limit=DEFAULT_STATE_LIMIT, depth_limit=None, timing=False):
        self.state_limit = state_limit
        self.depth_limit = depth_limit
        self.timing = timing


# -- serialisation ------------------------------------------------------------------


def _w(spec, value):
    return spec.format(value)


def _seq(seq):
    return ".".join(seq) if seq else "ε"


# -- running checks ------------------------------------------------------------------


def _build(model, term, opts):
    return build_mlts(term, model.spec, model.env, state_limit=opts.state_limit)


def _run_eval(model, args, opts):
    m = _build(model, args["term"], opts)
    weak = state_values(m)
    strong = state_values(m, strong=True)
    spec = model.spec
    return True, {
        "states": m.n_states,
        "transitions": len(m.transitions),
        "weak_eval": _w(spec, weak[m.initial]),
        "strong_eval": _w(spec, strong[m.initial]),
    }


def _run_trace(model, args, opts):
    m = _build(model, args["term"], opts)
    depth = args["depth"] or opts.depth_limit or DEFAULT_DEPTH_LIMIT
    observable, trunc_obs = weak_trace_set(m, depth)
    maximal, trunc_max = maximal_traces(m, depth)
    spec = model.spec
    obs = sorted(observable, key=lambda s: (len(s), s))
    mx = sorted(maximal, key=lambda t: (len(t), trace_label(t), repr(t)))
    return True, {
        "depth": depth,
        "truncated": trunc_obs or trunc_max,
        "observable": [_seq(s) for s in obs],
        "maximal": [
            {
                "trace": " ".join(f"({a},{_w(spec, k)})" for a, k in t) or "ε",
                "weak": _w(spec, weak_run_weight(t, spec)),
                "strong": _w(spec, strong_run_weight(t, spec)),
            }
            for t in mx
        ],
    }


def _verdict_result(spec, verdict):
    out = {}
    for key in ("weak_eval", "strong_eval"):
        if key in verdict.details:
            out[key] = [_w(spec, v) for v in verdict.details[key]]
    if "failed_condition" in verdict.details:
        out["failed_condition"] = verdict.details["failed_condition"]
    w = verdict.witness
    if w is not None:
        if isinstance(w, tuple) and w and isinstance(w[0], str) and w[0] in ("weak_eval", "strong_eval"):
            out["witness"] = f"{w[0]} {_w(spec, w[1])} vs {_w(spec, w[2])}"
        elif isinstance(w, tuple) and all(isinstance(a, str) for a in w):
            out["witness"] = "trace " + _seq(w)
        elif isinstance(w, tuple):
            out["witness"] = "states " + " vs ".join(str(x) for x in w)
        else:
            out["witness"] = str(w)
    return out


def _run_equiv(model, args, opts):
    spec = model.spec
    p = _build(model, args["left"], opts)
    q = _build(model, args["right"], opts)
    verdict = compare(p, q, args["relation"], args["eps"])
    result = {"relation": relation_tag(args["relation"])}
    if args["eps"] is not None:
        result["epsilon"] = _w(spec, args["eps"])
    result.update(_verdict_result(spec, verdict))
    tag = relation_tag(args["relation"])
    if tag in NEEDS_EPS and spec.totally_ordered:
        best = min_epsilon(p, q, "trace" if tag == "eps_trace" else "bisim")
        result["tightest_epsilon"] = None if best is None else _w(spec, best)
    return verdict.holds, result


def _run_sat(model, args, opts):
    spec = model.spec
    verdict = satisfies(args["term"], args["formula"], args["threshold"], spec, model.env,
                        state_limit=opts.state_limit)
    return verdict.holds, {
        "value": _w(spec, verdict.value),
        "threshold": _w(spec, args["threshold"]),
        "states": verdict.details["states"],
    }


def _run_pmc(model, args, opts):
    spec = model.spec
    check = verify_theorem(args["formula"], args["p"], args["q"], args["sync"], spec, model.env,
                           box_rule=args["rule"], state_limit=opts.state_limit)
    return check.equal, {
        "lhs": _w(spec, check.lhs),
        "rhs": _w(spec, check.rhs),
        "equal": check.equal,
        "rule": args["rule"],
        "residual": format_formula(simplify(check.residual, spec), spec),
    }


def _gndc_spec(model, args):
    relation, eps = args["rel"]
    return GndcSpec(
        H=args["H"],
        alpha=args["alpha"],
        relation=relation,
        eps=eps,
        environments=args.get("envs"),
        depth=args.get("depth", 1),
        palette=tuple(args.get("palette", ())),
        cap=args.get("cap", 10_000),
    )


def _run_gndc(model, args, opts):
    spec = model.spec
    gspec = _gndc_spec(model, args)
    verdict = check_qgndc(args["p"], gspec, spec, model.env, state_limit=opts.state_limit)
    result = {
        "relation": relation_tag(gspec.relation),
        "environments": verdict.details["environments"],
        "scope": verdict.details["scope"],
    }
    if gspec.eps is not None:
        result["epsilon"] = _w(spec, gspec.eps)
    if not verdict.holds:
        result["witness"] = str(verdict.witness)
        result["inner"] = _verdict_result(spec, verdict.details["inner"])
    return verdict.holds, result


_RUNNERS = {
    "eval": _run_eval,
    "trace": _run_trace,
    "equiv": _run_equiv,
    "sat": _run_sat,
    "pmc-theorem": _run_pmc,
    "gndc": _run_gndc,
}


def run_check(model: Model, check, opts: Options) -> dict:
    entry = {"id": check.id, "line": check.line, "kind": check.kind, "source": check.source}
    start = time.perf_counter()
    if check.error is not None:
        entry.update(status="error", holds=None, error=str(check.error))
    else:
        try:
            holds, result = _RUNNERS[check.kind](model, check.args, opts)
            entry.update(status="pass" if holds else "fail", holds=holds, result=result)
        except (QsecError, ValueError, RecursionError) as exc:
            name = type(exc).__name__
            entry.update(status="error", holds=None, error=f"line {check.line}: {name}: {exc}")
    if opts.timing:
        entry["time_ms"] = round((time.perf_counter() - start) * 1000, 3)
    return entry


def run_model(model: Model, opts: Options) -> dict:
    checks = [run_check(model, c, opts) for c in model.checks]
    summary = {
        "total": len(checks),
        "passed": sum(c["status"] == "pass" for c in checks),
        "failed": sum(c["status"] == "fail" for c in checks),
        "errors": sum(c["status"] == "error" for c in checks),
    }
    return {"file": model.path, "semiring": model.spec.name, "checks": checks, "summary": summary,
            "exit_code": exit_code(summary)}


def exit_code(summary) -> int:
    if summary["errors"]:
        return EXIT_ERROR
    if summary["failed"]:
        return EXIT_FAIL
    return EXIT_OK


def error_report(path, exc) -> dict:
    summary = {"total": 0, "passed": 0, "failed": 0, "errors": 1}
    return {"file": path, "semiring": None, "checks": [], "summary": summary,
            "exit_code": EXIT_ERROR, "error": str(exc)}


def run_file(path: str, opts: Options | None = None) -> dict:
    """Parse and run a model file; returns the report dictionary."""
    opts = opts or Options()
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        model = parse_model(text, path)
    except (OSError, ModelError) as exc:
        return error_report(path, exc)
    return run_model(model, opts)


# -- text output ---------------------------------------------------------------------


def _format_result(result):
    parts = []
    for key, value in result.items():
        if isinstance(value, list):
            if value and isinstance(value[0], dict):
                value = "; ".join(" ".join(f"{k}={v}" for k, v in item.items()) for item in value)
            else:
                value = ", ".join(str(v) for v in value)
            parts.append(f"{key}=[{value}]")
        elif isinstance(value, dict):
            parts.append(f"{key}={{" + ", ".join(f"{k}={v}" for k, v in value.items()) + "}")
        else:
            parts.append(f"{key}={value}")
    return parts


def format_text(report) -> str:
    lines = []
    if "error" in report:
        lines.append(f"error: {report['error']}")
    if report.get("semiring"):
        lines.append(f"semiring {report['semiring']}")
    for c in report["checks"]:
        lines.append(f"[{c['id']}] {c['kind']} (line {c['line']}): {c['source']}")
        if c["status"] == "error":
            lines.append(f"    ERROR {c['error']}")
        else:
            lines.append(f"    {c['status'].upper()}")
            for part in _format_result(c["result"]):
                lines.append(f"      {part}")
        if "time_ms" in c:
            lines.append(f"      time_ms={c['time_ms']}")
    s = report["summary"]
    lines.append(f"summary: {s['passed']} passed, {s['failed']} failed, {s['errors']} errors")
    return "\n".join(lines) + "\n"


def emit(report, as_json, out):
    if as_json:
        out.write(json.dumps(report, indent=2, ensure_ascii=False) + "\n")
    else:
        out.write(format_text(report))


# -- explain -------------------------------------------------------------------------


def _values_table(m: Mlts):
    spec = m.spec
    weak = state_values(m)
    strong = state_values(m, strong=True)
    lines = ["evaluation values (weak / strong):"]
    for s in range(m.n_states):
        lines.append(f"  s{s}: {spec.format(weak[s])} / {spec.format(strong[s])}")
    return lines


def explain_check(model: Model, check_id: int, opts: Options | None = None) -> str:
    """Intermediate artefacts of one check as text."""
    opts = opts or Options()
    check = model.check(check_id)
    spec = model.spec
    lines = [f"check {check.id} ({check.kind}, line {check.line}): {check.source}"]
    if check.error is not None:
        lines.append(f"error: {check.error}")
        return "\n".join(lines) + "\n"
    a = check.args
    if check.kind in ("eval", "trace"):
        m = _build(model, a["term"], opts)
        lines += [m.describe()] + _values_table(m)
        if check.kind == "trace":
            depth = a["depth"] or opts.depth_limit or DEFAULT_DEPTH_LIMIT
            obs, trunc = weak_trace_set(m, depth)
            lines.append("observable traces: " + ", ".join(_seq(s) for s in sorted(obs, key=lambda s: (len(s), s))))
            if trunc:
                lines.append(f"(truncated at depth {depth})")
    elif check.kind == "equiv":
        p = _build(model, a["left"], opts)
        q = _build(model, a["right"], opts)
        for title, m in (("left", p), ("right", q)):
            lines += [f"{title}:", m.describe()] + _values_table(m)
        verdict = compare(p, q, a["relation"], a["eps"])
        result = _verdict_result(spec, verdict)
        lines.append("difference:")
        if "witness" in result:
            lines.append(f"  condition {result.get('failed_condition')}: {result['witness']}")
        lines.append(f"verdict: {'holds' if verdict.holds else 'fails'}")
    elif check.kind == "sat":
        m = build_mlts(a["term"], spec, model.env, state_limit=opts.state_limit)
        phi = a["formula"]
        table = state_table(phi, m)
        lines += [m.describe(), f"values of {format_formula(phi, spec)}:"]
        for s in range(m.n_states):
            lines.append(f"  s{s}: {spec.format(table[(id(phi), s)])}")
        value = evaluate(phi, m, m.initial)
        holds = spec._leq(a["threshold"], value)
        lines.append(f"value {spec.format(value)}, threshold {spec.format(a['threshold'])}: "
                     f"{'holds' if holds else 'fails'}")
    elif check.kind == "pmc-theorem":
        ctx = PmcContext(a["p"], a["sync"], spec, model.env, opts.state_limit)
        residual = pmc_transform(a["formula"], ctx, box_rule=a["rule"])
        lines += ["component:", ctx.mlts.describe()]
        lines.append(f"residual: {format_formula(residual, spec)}")
        lines.append(f"simplified: {format_formula(simplify(residual, spec), spec)}")
        check_ = verify_theorem(a["formula"], a["p"], a["q"], a["sync"], spec, model.env,
                                box_rule=a["rule"], state_limit=opts.state_limit)
        lines.append(f"lhs (composition) = {spec.format(check_.lhs)}")
        lines.append(f"rhs (residual on partner) = {spec.format(check_.rhs)}")
        lines.append(f"equal: {check_.equal}")
    elif check.kind == "gndc":
        gspec = _gndc_spec(model, a)
        family = environments_of(gspec)
        lines.append(f"alpha(P) = {alpha_apply(gspec, a['p'])}")
        lines.append(f"environments ({len(family)}):")
        lines += [f"  {e}" for e in family]
        verdict = check_qgndc(a["p"], gspec, spec, model.env, state_limit=opts.state_limit)
        if verdict.holds:
            lines.append("holds for every environment listed")
        else:
            lines.append(f"witness environment: {verdict.witness}")
            m = build_mlts(composed(a["p"], verdict.witness, gspec.H), spec, model.env,
                           state_limit=opts.state_limit)
            lines += ["composition with the witness:", m.describe()]
            inner = _verdict_result(spec, verdict.details["inner"])
            lines.append(f"inner relation: {inner}")
        lines.append(f"note: {verdict.details['scope']}")
    return "\n".join(lines) + "\n"


# -- randomized theorem check --------------------------------------------------------------


def theorem_check(spec, count, seed, depth=4, formula_depth=4, actions=("a", "b", "c"),
                  box_rule="guarded"):
    """Random instances of the partial model checking theorem; returns counterexamples."""
    rng = random.Random(seed)
    failures = []
    for i in range(count):
        p = random_process(rng, spec, actions, depth)
        q = random_process(rng, spec, actions, depth)
        sync = frozenset(rng.sample(list(actions), rng.randint(0, 2)))
        phi = random_formula(rng, spec, actions, formula_depth, negation=spec.has_negation)
        if not verify_theorem(phi, p, q, sync, spec, box_rule=box_rule).equal:
            small = shrink_counterexample(phi, p, q, sync, spec, box_rule=box_rule)
            failures.append((i, sync, small))
    return failures


# -- entry point -------------------------------------------------------------------------


def _parser():
    ap = argparse.ArgumentParser(prog="qsec", description="Quantitative security checks over weighted processes.")
    sub = ap.add_subparsers(dest="command", required=True)

    def limits(p):
        p.add_argument("--limit-states", type=int, default=DEFAULT_STATE_LIMIT, metavar="N",
                       help="maximum number of states explored per system")
        p.add_argument("--limit-depth", type=int, default=None, metavar="N",
                       help="default depth for trace enumeration")

    run = sub.add_parser("run", help="run every check of a model file")
    run.add_argument("file")
    run.add_argument("--json", action="store_true", help="structured output")
    run.add_argument("--explain", type=int, metavar="ID", help="also explain check ID")
    run.add_argument("--timing", action="store_true", help="report wall time per check")
    limits(run)

    ex = sub.add_parser("explain", help="show intermediate artefacts of one check")
    ex.add_argument("file")
    ex.add_argument("id", type=int)
    limits(ex)

    th = sub.add_parser("theorem-check", help="randomized check of the partial model checking theorem")
    th.add_argument("--semiring", default="tropical")
    th.add_argument("--count", type=int, default=200)
    th.add_argument("--seed", type=int, default=0)
    th.add_argument("--depth", type=int, default=4)
    th.add_argument("--formula-depth", type=int, default=4)
    th.add_argument("--rule", choices=("guarded", "literal"), default="guarded")
    th.add_argument("--json", action="store_true")
    return ap


def _positive(value, name):
    if value is not None and value <= 0:
        raise SystemExit(f"qsec: {name} must be positive")


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = _parser().parse_args(argv)
    if args.command in ("run", "explain"):
        _positive(args.limit_states, "--limit-states")
        _positive(args.limit_depth, "--limit-depth")
        opts = Options(args.limit_states, args.limit_depth, getattr(args, "timing", False))
    if args.command == "run":
        report = run_file(args.file, opts)
        emit(report, args.json, out)
        code = report["exit_code"]
        if args.explain is not None:
            code = max(code, _explain(args.file, args.explain, opts, out))
        return code
    if args.command == "explain":
        return _explain(args.file, args.id, opts, out)
    try:
        spec = semiring_from_name(args.semiring)
    except QsecError as exc:
        out.write(f"error: {exc}\n")
        return EXIT_ERROR
    failures = theorem_check(spec, args.count, args.seed, args.depth, args.formula_depth, box_rule=args.rule)
    if args.json:
        payload = {
            "semiring": spec.name,
            "count": args.count,
            "seed": args.seed,
            "rule": args.rule,
            "counterexamples": [
                {"index": i, "sync": sorted(sync), "formula": format_formula(f, spec), "p": str(p), "q": str(q)}
                for i, sync, (f, p, q) in failures
            ],
        }
        out.write(json.dumps(payload, indent=2) + "\n")
    else:
        out.write(f"{spec.name}: {args.count} instances, seed {args.seed}, rule {args.rule}: "
                  f"{len(failures)} counterexamples\n")
        for i, sync, (f, p, q) in failures:
            names = ",".join(sorted(sync))
            out.write(f"  #{i}: phi = {format_formula(f, spec)}; P = {p}; Q = {q}; L = {{{names}}}\n")
    return EXIT_FAIL if failures else EXIT_OK


def _explain(path, check_id, opts, out) -> int:
    try:
        with open(path, encoding="utf-8") as fh:
            model = parse_model(fh.read(), path)
        out.write(explain_check(model, check_id, opts))
    except (OSError, QsecError, ValueError) as exc:
        out.write(f"error: {exc}\n")
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
