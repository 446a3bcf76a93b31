"""Quantitative behavioural relations between MLTSs.

Four relations are provided: weak-trace equivalence, epsilon-trace
equivalence, quantitative weak bisimulation and weak epsilon-bisimulation.
The epsilon variants compare weights through residuation: ``x`` tolerates
``y`` at level ``eps`` when ``divide(x, eps) >= y``.  At ``eps = top`` this is
plain ``x >= y``; lower values of ``eps`` loosen the comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from qsec.errors import TruncatedComparison, UnsupportedPartialOrder
from qsec.mlts import (
    DEFAULT_DEPTH_LIMIT,
    Mlts,
    observable_actions,
    same_semiring,
    state_values,
    trace_set_difference,
    weak_trace_set,
)
from qsec.process import TAU
from qsec.semiring import matrix_closure, matrix_product, value_key

WTRACE = "wtrace"
EPS_TRACE = "eps_trace"
QWEAK_BISIM = "qweak_bisim"
WEAK_EPS_BISIM = "weak_eps_bisim"
RELATIONS = (WTRACE, EPS_TRACE, QWEAK_BISIM, WEAK_EPS_BISIM)

# pseudo-action naming the tau-closure component of a signature
TSTAR = "tau*"


@dataclass
class Verdict:
    """Outcome of a check.

    ``details`` holds the computed weights and, on failure, the index of the
    violated condition; ``witness`` a distinguishing trace, state pair or
    environment.
    """

    holds: bool
    relation: str
    epsilon: object = None
    value: object = None
    details: dict = field(default_factory=dict)
    witness: object = None


@dataclass
class WeakWeightMatrix:
    """Aggregated weak-move weights ``W_a = T* M_a T*`` and the tau closure ``T*``."""

    spec: object
    tstar: list
    moves: dict  # action -> matrix

    def actions(self):
        return sorted(self.moves)

    def matrix(self, action):
        return self.tstar if action == TSTAR else self.moves[action]


def weak_weight_matrix(m: Mlts, actions=None) -> WeakWeightMatrix:
    spec = m.spec
    tstar = matrix_closure(m.action_matrix(TAU), spec)
    if actions is None:
        actions = observable_actions(m)
    moves = {}
    for a in actions:
        left = matrix_product(tstar, m.action_matrix(a), spec)
        moves[a] = matrix_product(left, tstar, spec)
    return WeakWeightMatrix(spec, tstar, moves)


def disjoint_union(p: Mlts, q: Mlts):
    """One MLTS holding both systems; returns ``(union, p_initial, q_initial)``.

    The union's own initial state is ``p``'s; every state of ``q`` is kept
    even though it is unreachable from there.
    """
    same_semiring(p, q)
    off = p.n_states
    labels = [("P", lab) for lab in p.labels] + [("Q", lab) for lab in q.labels]
    trans = dict(p.transitions)
    for (s, a, t), w in q.transitions.items():
        trans[(s + off, a, t + off)] = w
    return Mlts(p.spec, labels, trans, p.initial), p.initial, q.initial + off


def _eps_tolerates(spec, x, y, eps):
    """``divide(x, eps) >= y`` and ``divide(y, eps) >= x``."""
    return spec._leq(y, spec._divide(x, eps)) and spec._leq(x, spec._divide(y, eps))


# -- trace relations ------------------------------------------------------------------


def _trace_witness(p, q, depth_limit):
    """Distinguishing observable sequence, or ``None`` when the trace sets agree."""
    if depth_limit is None:
        return trace_set_difference(p, q)
    tp, trunc_p = weak_trace_set(p, depth_limit)
    tq, trunc_q = weak_trace_set(q, depth_limit)
    if trunc_p or trunc_q:
        raise TruncatedComparison(f"weak trace sets exceed depth {depth_limit}")
    diff = sorted(tp ^ tq, key=lambda s: (len(s), s))
    return diff[0] if diff else None


def _values(m):
    return state_values(m)[m.initial], state_values(m, strong=True)[m.initial]


def _trace_common(p, q, relation, eps, depth_limit):
    spec = same_semiring(p, q)
    weak_p, strong_p = _values(p)
    weak_q, strong_q = _values(q)
    details = {
        "weak_eval": (weak_p, weak_q),
        "strong_eval": (strong_p, strong_q),
    }
    witness = _trace_witness(p, q, depth_limit)
    if witness is not None:
        details["failed_condition"] = 1
        return spec, details, Verdict(False, relation, eps, None, details, witness)
    if not spec._incomparable_or_equal(strong_p, strong_q):
        details["failed_condition"] = 2
        return spec, details, Verdict(False, relation, eps, None, details, ("strong_eval", strong_p, strong_q))
    return spec, details, None


def weak_trace_equiv(p: Mlts, q: Mlts, depth_limit: int | None = None) -> Verdict:
    """Equal weak trace sets and equal-or-incomparable strong and weak evaluations.

    Trace sets are compared exactly through a subset construction.  Passing
    ``depth_limit`` switches to bounded enumeration, which raises
    :class:`TruncatedComparison` when a set does not fit.
    """
    spec, details, failed = _trace_common(p, q, WTRACE, None, depth_limit)
    if failed is not None:
        return failed
    weak_p, weak_q = details["weak_eval"]
    if not spec._incomparable_or_equal(weak_p, weak_q):
        details["failed_condition"] = 3
        return Verdict(False, WTRACE, None, None, details, ("weak_eval", weak_p, weak_q))
    return Verdict(True, WTRACE, None, None, details)


def eps_trace_equiv(p: Mlts, q: Mlts, eps, depth_limit: int | None = None) -> Verdict:
    """Weak-trace equivalence with the weak evaluations compared up to ``eps``."""
    p.spec.check(eps)
    spec, details, failed = _trace_common(p, q, EPS_TRACE, eps, depth_limit)
    if failed is not None:
        return failed
    weak_p, weak_q = details["weak_eval"]
    if not _eps_tolerates(spec, weak_p, weak_q, eps):
        details["failed_condition"] = 3
        return Verdict(False, EPS_TRACE, eps, None, details, ("weak_eval", weak_p, weak_q))
    return Verdict(True, EPS_TRACE, eps, None, details)


# -- bisimulations --------------------------------------------------------------------


def _signatures(ww, labels, blocks, n):
    """Per state, the block-aggregated weights for every label, as one tuple."""
    plus, bot = ww.spec._plus, ww.spec.bot
    sig = [[] for _ in range(n)]
    for lab in labels:
        mat = ww.matrix(lab)
        for block in blocks:
            for s in range(n):
                row = mat[s]
                acc = bot
                for d in block:
                    w = row[d]
                    if w != bot:
                        acc = plus(acc, w)
                sig[s].append(acc)
    return [tuple(x) for x in sig]


def _compatible(spec, a, b):
    return all(spec._incomparable_or_equal(x, y) for x, y in zip(a, b))


def bisim_partition(m: Mlts, ww: WeakWeightMatrix | None = None, generic: bool = False):
    """Coarsest partition stable under block-aggregated weak weights.

    Each block is split by grouping states whose signatures agree up to
    incomparability.  For totally ordered semirings that is signature
    equality and the result is the coarsest stable partition; for products
    the grouping is greedy in state order.  Totally ordered instances run on
    integer ranks unless ``generic`` is set.
    """
    spec = m.spec
    ww = ww or weak_weight_matrix(m)
    labels = ww.actions() + [TSTAR]
    n = m.n_states
    blocks = [list(range(n))]
    ranked = _Ranked(ww, labels) if spec.totally_ordered and not generic else None
    while True:
        if ranked is not None:
            rows = ranked.signatures(blocks)
            sig = [tuple(r) for r in rows.tolist()]
        else:
            sig = _signatures(ww, labels, blocks, n)
        refined = []
        for block in blocks:
            groups = []
            if ranked is not None:
                by_sig = {}
                for s in block:
                    by_sig.setdefault(sig[s], []).append(s)
                groups = list(by_sig.values())
            else:
                for s in block:
                    for g in groups:
                        if all(_compatible(spec, sig[s], sig[t]) for t in g):
                            g.append(s)
                            break
                    else:
                        groups.append([s])
            refined.extend(groups)
        if len(refined) == len(blocks):
            if ranked is not None:
                sig = [ranked.decode(row) for row in sig]
            return refined, sig
        blocks = refined


def quant_weak_bisim(p: Mlts, q: Mlts) -> Verdict:
    """Quantitative weak bisimulation of the two initial states."""
    union, s0, t0 = disjoint_union(p, q)
    blocks, sig = bisim_partition(union)
    where = {s: i for i, b in enumerate(blocks) for s in b}
    details = {"blocks": len(blocks)}
    if where[s0] == where[t0]:
        return Verdict(True, QWEAK_BISIM, None, None, details)
    details["failed_condition"] = 1
    return Verdict(False, QWEAK_BISIM, None, None, details, (union.labels[s0][1], union.labels[t0][1]))


def _components(n, pairs):
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for s, t in pairs:
        rs, rt = find(s), find(t)
        if rs != rt:
            parent[max(rs, rt)] = min(rs, rt)
    groups = {}
    for s in range(n):
        groups.setdefault(find(s), []).append(s)
    return list(groups.values())


def eps_bisim_relation(m: Mlts, eps, ww: WeakWeightMatrix | None = None, generic: bool = False):
    """Greatest relation whose pairs satisfy the eps-tolerant transfer conditions.

    Blocks are the connected components of the current relation; pairs
    violating the conditions for some block are deleted until nothing
    changes.  Returns the set of unordered pairs ``(s, t)`` with ``s < t``.
    """
    spec = m.spec
    ww = ww or weak_weight_matrix(m)
    labels = ww.actions() + [TSTAR]
    n = m.n_states
    if spec.totally_ordered and not generic:
        return _eps_relation_ranked(ww, labels, n, eps)
    pairs = {(s, t) for s in range(n) for t in range(s + 1, n)}
    while True:
        blocks = _components(n, pairs)
        sig = _signatures(ww, labels, blocks, n)
        kept = {
            (s, t)
            for s, t in pairs
            if all(_eps_tolerates(spec, x, y, eps) for x, y in zip(sig[s], sig[t]))
        }
        if len(kept) == len(pairs):
            return kept
        pairs = kept


class _Ranked:
    """Weak weight matrices as integer ranks along a total order.

    On a total order the semiring sum is the maximum, so block aggregation
    becomes a row maximum over the block's columns.
    """

    def __init__(self, ww, labels, extra=()):
        spec = ww.spec
        mats = [ww.matrix(lab) for lab in labels]
        unique = {value_key(v): v for mat in mats for row in mat for v in row}
        for v in (spec.bot, spec.top, *extra):
            unique[value_key(v)] = v
        self.values = sorted(unique.values(), key=spec.order_key)
        self.rank = {value_key(v): i for i, v in enumerate(self.values)}
        n = len(mats[0])
        self.mats = [
            np.array([[self.rank[value_key(v)] for v in row] for row in mat], dtype=np.int64).reshape(n, n)
            for mat in mats
        ]

    def signatures(self, blocks):
        cols = [mat[:, block].max(axis=1) for mat in self.mats for block in blocks]
        return np.stack(cols, axis=1)

    def decode(self, row):
        return tuple(self.values[i] for i in row)


def _eps_relation_ranked(ww, labels, n, eps, chunk=64):
    spec = ww.spec
    base = {value_key(v): v for lab in labels for row in ww.matrix(lab) for v in row}
    quotients = {k: spec._divide(v, eps) for k, v in base.items()}
    ranked = _Ranked(ww, labels, extra=quotients.values())
    # aggregates are always matrix entries, so only those need a quotient rank
    to_quotient = np.array(
        [ranked.rank[value_key(quotients[value_key(v)])] if value_key(v) in quotients else -1
         for v in ranked.values],
        dtype=np.int64,
    )
    rel = np.ones((n, n), dtype=bool)
    np.fill_diagonal(rel, False)
    while True:
        pairs = zip(*np.nonzero(np.triu(rel)))
        blocks = _components(n, pairs)
        sig = ranked.signatures(blocks)
        quot = to_quotient[sig]
        # within[s, t]: every aggregate of t is tolerated by s
        within = np.empty((n, n), dtype=bool)
        for lo in range(0, n, chunk):
            within[lo:lo + chunk] = (sig[None, :, :] <= quot[lo:lo + chunk, None, :]).all(axis=2)
        kept = rel & within & within.T
        if (kept == rel).all():
            s_idx, t_idx = np.nonzero(np.triu(kept))
            return {(int(s), int(t)) for s, t in zip(s_idx, t_idx)}
        rel = kept


def weak_eps_bisim(p: Mlts, q: Mlts, eps) -> Verdict:
    """Weak eps-bisimulation of the two initial states."""
    p.spec.check(eps)
    union, s0, t0 = disjoint_union(p, q)
    rel = eps_bisim_relation(union, eps)
    details = {"pairs": len(rel)}
    if s0 == t0 or (min(s0, t0), max(s0, t0)) in rel:
        return Verdict(True, WEAK_EPS_BISIM, eps, None, details)
    details["failed_condition"] = 1
    return Verdict(False, WEAK_EPS_BISIM, eps, None, details, (union.labels[s0][1], union.labels[t0][1]))


# -- dispatch ---------------------------------------------------------------------------

# surface names used by model files, mapped to the internal relation tags
RELATION_NAMES = {
    "wtrace": WTRACE,
    "eps-trace": EPS_TRACE,
    "bisim": QWEAK_BISIM,
    "eps-bisim": WEAK_EPS_BISIM,
}
NEEDS_EPS = {EPS_TRACE, WEAK_EPS_BISIM}


def relation_tag(name: str) -> str:
    """Resolve ``wtrace``, ``eps-trace``, ``bisim``, ``eps-bisim`` or an internal tag."""
    key = name.replace("_", "-")
    if key in RELATION_NAMES:
        return RELATION_NAMES[key]
    if name in RELATIONS:
        return name
    raise ValueError(f"unknown relation {name!r}")


def compare(p: Mlts, q: Mlts, relation: str, eps=None) -> Verdict:
    """Run the named relation on two systems."""
    tag = relation_tag(relation)
    if (tag in NEEDS_EPS) != (eps is not None):
        raise ValueError(f"relation {relation!r} {'needs' if tag in NEEDS_EPS else 'takes no'} epsilon")
    if tag == WTRACE:
        return weak_trace_equiv(p, q)
    if tag == EPS_TRACE:
        return eps_trace_equiv(p, q, eps)
    if tag == QWEAK_BISIM:
        return quant_weak_bisim(p, q)
    return weak_eps_bisim(p, q, eps)


# -- tightest epsilon -----------------------------------------------------------------


def _candidates(spec, values):
    values = set(values) | {spec.top, spec.bot}
    cands = set(values)
    for x in values:
        for y in values:
            cands.add(spec._divide(x, y))
    # best first: top, then downwards
    return sorted(cands, key=spec.order_key, reverse=True)


def min_epsilon(p: Mlts, q: Mlts, kind: str = "trace"):
    """Tightest ``eps`` (closest to top) for which the eps-relation holds.

    Returns ``None`` when the relation fails even at bottom.  The relations
    only loosen as ``eps`` decreases, and on a total order the tightest value
    is a quotient of two weights that occur in the comparison, so a binary
    search over those quotients is exact.
    """
    spec = same_semiring(p, q)
    if not spec.totally_ordered:
        raise UnsupportedPartialOrder(f"min_epsilon needs a totally ordered semiring, not {spec.name}")
    if kind == "trace":
        values = [state_values(p)[p.initial], state_values(q)[q.initial]]

        def holds(e):
            return eps_trace_equiv(p, q, e).holds

    elif kind == "bisim":
        union, _, _ = disjoint_union(p, q)
        ww = weak_weight_matrix(union)
        values = {w for a in ww.actions() + [TSTAR] for row in ww.matrix(a) for w in row}

        def holds(e):
            return weak_eps_bisim(p, q, e).holds

    else:
        raise ValueError(f"kind must be 'trace' or 'bisim', not {kind!r}")
    cands = _candidates(spec, values)
    if not holds(cands[-1]):
        return None
    lo, hi = 0, len(cands) - 1  # cands[hi] holds
    while lo < hi:
        mid = (lo + hi) // 2
        if holds(cands[mid]):
            hi = mid
        else:
            lo = mid + 1
    return cands[lo]


__all__ = [
    "RELATIONS",
    "TSTAR",
    "Verdict",
    "WeakWeightMatrix",
    "bisim_partition",
    "compare",
    "relation_tag",
    "disjoint_union",
    "eps_bisim_relation",
    "eps_trace_equiv",
    "min_epsilon",
    "quant_weak_bisim",
    "weak_eps_bisim",
    "weak_trace_equiv",
    "weak_weight_matrix",
    "DEFAULT_DEPTH_LIMIT",
]
