"""Multi-labelled transition systems built from GPA terms.

``build_mlts`` applies the structural operational rules of GPA: weights of
choice branches reaching the same derivative are summed, synchronised steps
multiply, hidden labels become ``tau`` (merged with any existing ``tau`` step
to the same target by semiring sum) and restricted labels are dropped.
"""

from __future__ import annotations

from collections import deque

from qsec.errors import ExplosionGuard, MixedSemirings, NonConvergent, StateLimitExceeded, StateNotFound
from qsec.process import (
    TAU,
    Choice,
    Hide,
    Nil,
    Parallel,
    Prefix,
    ProcessEnv,
    Restrict,
    Term,
    Var,
    normalize,
)

DEFAULT_STATE_LIMIT = 100_000
DEFAULT_DEPTH_LIMIT = 10_000
DEFAULT_TRACE_CAP = 1_000_000


class Mlts:
    """Finite MLTS ``(S, Act, K, T, s0)`` with states numbered ``0..n-1``.

    ``transitions`` maps ``(source, action, target)`` to a non-bottom weight.
    ``labels[i]`` describes state ``i`` (the process term for built systems).
    """

    def __init__(self, spec, labels, transitions, initial=0):
        self.spec = spec
        self.labels = tuple(labels)
        self.initial = initial
        n = len(self.labels)
        if not 0 <= initial < n:
            raise StateNotFound(f"initial state {initial} out of range")
        succ = [[] for _ in range(n)]
        clean = {}
        for (s, a, t), w in transitions.items():
            spec.check(w)
            if w == spec.bot:
                continue
            clean[(s, a, t)] = w
            succ[s].append((a, t, w))
        self.transitions = clean
        self.succ = tuple(tuple(sorted(edges, key=lambda e: (e[0], e[1]))) for edges in succ)
        self.actions = frozenset(a for (_, a, _) in clean)

    @classmethod
    def from_edges(cls, spec, edges, initial=0, labels=None):
        """Build from ``(src, action, dst, weight)`` tuples over arbitrary state names.

        Parallel edges are merged with semiring sum, bottom weights dropped and
        unreachable states pruned; states are renumbered in BFS order.
        """
        merged = {}
        for s, a, t, w in edges:
            spec.check(w)
            key = (s, a, t)
            merged[key] = spec._plus(merged[key], w) if key in merged else w
        out = {}
        for (s, a, t), w in merged.items():
            if w != spec.bot:
                out.setdefault(s, []).append((a, t, w))
        order = [initial]
        index = {initial: 0}
        queue = deque([initial])
        while queue:
            s = queue.popleft()
            for a, t, _ in sorted(out.get(s, ()), key=lambda e: (e[0], str(e[1]))):
                if t not in index:
                    index[t] = len(order)
                    order.append(t)
                    queue.append(t)
        trans = {}
        for s in order:
            for a, t, w in out.get(s, ()):
                trans[(index[s], a, index[t])] = w
        names = [labels[s] if labels else s for s in order]
        return cls(spec, names, trans, 0)

    @property
    def n_states(self):
        return len(self.labels)

    def state_of(self, label):
        for i, lab in enumerate(self.labels):
            if lab == label:
                return i
        raise StateNotFound(f"no state labelled {label!s}")

    def is_terminal(self, s):
        return not self.succ[s]

    def action_matrix(self, action):
        """Dense one-step matrix for ``action``."""
        bot = self.spec.bot
        n = self.n_states
        m = [[bot] * n for _ in range(n)]
        for (s, a, t), w in self.transitions.items():
            if a == action:
                m[s][t] = w
        return m

    def describe(self):
        lines = [f"MLTS over {self.spec.name}: {self.n_states} states, initial s{self.initial}"]
        for i, lab in enumerate(self.labels):
            lines.append(f"  s{i} = {lab}")
        for s in range(self.n_states):
            for a, t, w in self.succ[s]:
                lines.append(f"  s{s} --({a},{self.spec.format(w)})--> s{t}")
        return "\n".join(lines)

    def __repr__(self):
        return f"<Mlts {self.spec.name} states={self.n_states} transitions={len(self.transitions)}>"


def same_semiring(*systems):
    spec = systems[0].spec
    for m in systems[1:]:
        if m.spec != spec:
            raise MixedSemirings(f"cannot combine {spec.name} and {m.spec.name} systems")
    return spec


class Semantics:
    """Memoised one-step transition function of GPA terms."""

    def __init__(self, spec, env: ProcessEnv | None = None):
        self.spec = spec
        self.env = env if env is not None else ProcessEnv()
        self._norm_memo = {}
        self._steps = {}

    def norm(self, t):
        return normalize(t, self._norm_memo)

    def step(self, t: Term) -> dict:
        """``{(action, target): weight}`` for a normalised term ``t``."""
        hit = self._steps.get(t)
        if hit is not None:
            return hit
        out = self._step(t)
        self._steps[t] = out
        return out

    def _add(self, out, key, w):
        if w == self.spec.bot:
            return
        old = out.get(key)
        out[key] = w if old is None else self.spec._plus(old, w)

    def _step(self, t):
        out = {}
        if isinstance(t, Nil):
            return out
        if isinstance(t, Prefix):
            self._add(out, (t.action, self.norm(t.cont)), t.weight)
        elif isinstance(t, Choice):
            for b in t.branches:
                for key, w in self.step(b).items():
                    self._add(out, key, w)
        elif isinstance(t, Var):
            return self.step(self.norm(self.env[t.name]))
        elif isinstance(t, Parallel):
            sync = t.sync
            left, right = self.step(t.left), self.step(t.right)
            for (a, l2), k in left.items():
                if a not in sync:
                    self._add(out, (a, Parallel(sync, l2, t.right)), k)
            for (a, r2), k in right.items():
                if a not in sync:
                    self._add(out, (a, Parallel(sync, t.left, r2)), k)
            if sync:
                times = self.spec._times
                for (a, l2), k in left.items():
                    if a not in sync:
                        continue
                    for (b, r2), l in right.items():
                        if a == b:
                            self._add(out, (a, Parallel(sync, l2, r2)), times(k, l))
        elif isinstance(t, Hide):
            for (a, p2), k in self.step(t.body).items():
                label = TAU if a in t.actions else a
                self._add(out, (label, self.norm(Hide(t.actions, p2))), k)
        elif isinstance(t, Restrict):
            for (a, p2), k in self.step(t.body).items():
                if a not in t.actions:
                    self._add(out, (a, self.norm(Restrict(t.actions, p2))), k)
        else:
            raise TypeError(f"not a process term: {t!r}")
        return out


def build_mlts(term: Term, spec, env: ProcessEnv | None = None,
               state_limit: int = DEFAULT_STATE_LIMIT, semantics: Semantics | None = None) -> Mlts:
    """Explore all derivatives of ``term`` and return its MLTS."""
    if state_limit <= 0:
        raise ValueError("state_limit must be positive")
    env = env if env is not None else ProcessEnv()
    env.check(term)
    sem = semantics or Semantics(spec, env)
    root = sem.norm(term)
    index = {root: 0}
    order = [root]
    trans = {}
    queue = deque([root])
    while queue:
        t = queue.popleft()
        s = index[t]
        moves = sorted(sem.step(t).items(), key=lambda kv: (kv[0][0], str(kv[0][1])))
        for (a, target), w in moves:
            j = index.get(target)
            if j is None:
                if len(order) >= state_limit:
                    raise StateLimitExceeded(f"more than {state_limit} states reachable from {term}")
                j = index[target] = len(order)
                order.append(target)
                queue.append(target)
            trans[(s, a, j)] = w
    return Mlts(spec, order, trans, 0)


def derivatives(m: Mlts) -> set:
    """All states reachable from the initial state (every state of a built MLTS)."""
    seen = {m.initial}
    stack = [m.initial]
    while stack:
        s = stack.pop()
        for _, t, _ in m.succ[s]:
            if t not in seen:
                seen.add(t)
                stack.append(t)
    return seen


# -- traces -------------------------------------------------------------------------


def trace_label(trace) -> tuple:
    return tuple(a for a, _ in trace)


def weak_run_weight(trace, spec):
    w = spec.top
    for _, k in trace:
        w = spec._times(w, k)
    return w


def strong_run_weight(trace, spec):
    w = spec.top
    for a, k in trace:
        if a != TAU:
            w = spec._times(w, k)
    return w


def maximal_traces(m: Mlts, depth_limit: int = DEFAULT_DEPTH_LIMIT, cap: int = DEFAULT_TRACE_CAP):
    """Traces from the initial state to a deadlocked state.

    Returns ``(traces, truncated)``; ``truncated`` is true when some path was
    cut at ``depth_limit`` steps without reaching a deadlock.  More than
    ``cap`` explored paths raise :class:`ExplosionGuard`.
    """
    if depth_limit <= 0:
        raise ValueError("depth_limit must be positive")
    traces = set()
    truncated = False
    stack = [(m.initial, ())]
    explored = 0
    while stack:
        s, tr = stack.pop()
        explored += 1
        if explored > cap:
            raise ExplosionGuard(f"more than {cap} trace prefixes explored")
        edges = m.succ[s]
        if not edges:
            traces.add(tr)
            continue
        if len(tr) >= depth_limit:
            truncated = True
            continue
        for a, t, w in edges:
            stack.append((t, tr + ((a, w),)))
    return traces, truncated


def tau_closure(m: Mlts, states) -> frozenset:
    seen = set(states)
    stack = list(states)
    while stack:
        s = stack.pop()
        for a, t, _ in m.succ[s]:
            if a == TAU and t not in seen:
                seen.add(t)
                stack.append(t)
    return frozenset(seen)


def _post(m, states, action):
    return {t for s in states for a, t, _ in m.succ[s] if a == action}


def observable_actions(m: Mlts):
    return sorted(a for a in m.actions if a != TAU)


def weak_trace_set(m: Mlts, depth_limit: int = DEFAULT_DEPTH_LIMIT, cap: int = DEFAULT_TRACE_CAP):
    """Prefix-closed set of observable label sequences; ``(traces, truncated)``."""
    if depth_limit <= 0:
        raise ValueError("depth_limit must be positive")
    acts = observable_actions(m)
    start = tau_closure(m, {m.initial})
    traces = {()}
    truncated = False
    queue = deque([(start, ())])
    while queue:
        states, seq = queue.popleft()
        for a in acts:
            nxt = _post(m, states, a)
            if not nxt:
                continue
            if len(seq) >= depth_limit:
                truncated = True
                continue
            seq2 = seq + (a,)
            traces.add(seq2)
            if len(traces) > cap:
                raise ExplosionGuard(f"more than {cap} observable traces")
            queue.append((tau_closure(m, nxt), seq2))
    return traces, truncated


def trace_set_difference(p: Mlts, q: Mlts, state_limit: int = DEFAULT_STATE_LIMIT):
    """Shortest observable sequence in exactly one weak trace set, or ``None``.

    Works on the subset constructions of both systems, so cyclic systems are
    compared exactly.
    """
    acts = sorted(set(observable_actions(p)) | set(observable_actions(q)))
    start = (tau_closure(p, {p.initial}), tau_closure(q, {q.initial}))
    seen = {start}
    queue = deque([(start, ())])
    while queue:
        (sp, sq), seq = queue.popleft()
        for a in acts:
            np_, nq = _post(p, sp, a), _post(q, sq, a)
            if bool(np_) != bool(nq):
                return seq + (a,)
            if not np_:
                continue
            pair = (tau_closure(p, np_), tau_closure(q, nq))
            if pair not in seen:
                if len(seen) >= state_limit:
                    raise StateLimitExceeded("subset construction exceeded the state limit")
                seen.add(pair)
                queue.append((pair, seq + (a,)))
    return None


# -- evaluation values ----------------------------------------------------------------


def state_values(m: Mlts, strong=False, max_rounds=None):
    """Best value-to-termination of every state.

    Least fixpoint of ``v(s) = sum_{s -(a,k)-> t} k * v(t)`` with deadlocked
    states pinned at top; ``strong`` treats tau weights as top.
    """
    spec = m.spec
    plus, times, bot, top = spec._plus, spec._times, spec.bot, spec.top
    n = m.n_states
    if max_rounds is None:
        max_rounds = n * max(len(m.transitions), 1) + 1
    values = [top if not m.succ[s] else bot for s in range(n)]
    for _ in range(max_rounds):
        changed = False
        for s in range(n):
            edges = m.succ[s]
            if not edges:
                continue
            acc = bot
            for a, t, w in edges:
                vt = values[t]
                if vt == bot:
                    continue
                acc = plus(acc, vt if strong and a == TAU else times(w, vt))
            if acc != values[s]:
                values[s] = acc
                changed = True
        if not changed:
            return values
    raise NonConvergent(f"evaluation did not stabilise within {max_rounds} rounds")


def weak_eval(m: Mlts):
    """Sum over maximal traces of their full run-weight."""
    return state_values(m)[m.initial]


def strong_eval(m: Mlts):
    """Sum over maximal traces of their run-weight without tau steps."""
    return state_values(m, strong=True)[m.initial]
