"""Quantitative GNDC: ``(P |[H]| E) \\ H`` related to ``alpha(P)`` for every environment ``E``.

The family of environments is finite (explicit or generated up to a depth),
so a positive answer only covers that family.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb

from qsec.equiv import NEEDS_EPS, Verdict, compare, relation_tag
from qsec.errors import ExplosionGuard, UnknownAlpha
from qsec.mlts import DEFAULT_STATE_LIMIT, build_mlts
from qsec.process import NIL, TAU, Choice, Hide, Parallel, Prefix, ProcessEnv, Term, normalize, sort

DEFAULT_CAP = 10_000
ALPHAS = ("id", "hideH")
_ALPHA_ALIASES = {"id": "id", "identity": "id", "hideH": "hideH", "hide_H": "hideH", "hide": "hideH"}

SCOPE_NOTE = "relative to the checked family of environments only, not a proof for every environment"


@dataclass
class GndcSpec:
    """Environmental actions, expected behaviour and relation of one check.

    Either ``environments`` is given explicitly or they are generated from
    ``depth`` and ``palette``.
    """

    H: frozenset
    alpha: str = "hideH"
    relation: str = "wtrace"
    eps: object = None
    environments: list | None = None
    depth: int = 1
    palette: tuple = ()
    cap: int = DEFAULT_CAP
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.H = frozenset(self.H)
        if TAU in self.H:
            raise ValueError("tau cannot be an environmental action")
        if self.alpha not in _ALPHA_ALIASES:
            raise UnknownAlpha(f"unknown alpha {self.alpha!r}; expected one of {', '.join(ALPHAS)}")
        self.alpha = _ALPHA_ALIASES[self.alpha]
        tag = relation_tag(self.relation)
        if (tag in NEEDS_EPS) != (self.eps is not None):
            raise ValueError(f"relation {self.relation!r} and epsilon do not match")


def _subset_count(n, limit):
    total = 0
    for k in range(n + 1):
        total += comb(n, k)
        if total > limit:
            break
    return total


def generate_environments(H, palette, depth: int, cap: int = DEFAULT_CAP) -> list:
    """All sums of prefixes ``(h, w).E`` with ``h`` in ``H`` and ``w`` in ``palette``.

    Depth counts nested prefixes; a sum is as deep as its deepest branch.
    Sums are sets, so reordered or repeated branches are not listed twice.
    """
    H = sorted(frozenset(H))
    palette = list(dict.fromkeys(palette))
    if depth < 0:
        raise ValueError("depth must be non-negative")
    if TAU in H:
        raise ValueError("tau cannot be an environmental action")
    if not palette and depth > 0:
        raise ValueError("palette must be non-empty")
    level = [NIL]
    for _ in range(depth):
        prefixes = sorted({normalize(Prefix(h, w, e)) for h in H for w in palette for e in level}, key=str)
        count = _subset_count(len(prefixes), cap)
        if count > cap:
            raise ExplosionGuard(f"more than {cap} environments at depth {depth}")
        out = []
        for k in range(len(prefixes) + 1):
            for combo in combinations(prefixes, k):
                out.append(normalize(Choice(combo)) if k > 1 else (combo[0] if k else NIL))
        level = out
    return sorted(level, key=lambda t: (len(str(t)), str(t)))


def alpha_apply(spec: GndcSpec, p: Term) -> Term:
    if spec.alpha == "id":
        return p
    if spec.alpha == "hideH":
        return Hide(spec.H, p)
    raise UnknownAlpha(f"unknown alpha {spec.alpha!r}")


def composed(p: Term, e: Term, H) -> Term:
    """``(P |[H]| E) \\ H``."""
    H = frozenset(H)
    return Hide(H, Parallel(H, p, e))


def environments_of(spec: GndcSpec) -> list:
    if spec.environments is not None:
        return list(spec.environments)
    return generate_environments(spec.H, spec.palette, spec.depth, spec.cap)


def check_qgndc(p: Term, spec: GndcSpec, semiring, env: ProcessEnv | None = None,
                state_limit: int = DEFAULT_STATE_LIMIT) -> Verdict:
    """Check the schema for every environment of the family, in order.

    The witness is the first environment for which the relation fails; its
    inner verdict is attached as ``details["inner"]``.
    """
    env = env if env is not None else ProcessEnv()
    family = environments_of(spec)
    for e in family:
        extra = sort(e, env) - spec.H
        if extra:
            raise ValueError(f"environment {e} uses non-environmental actions {sorted(extra)}")
    expected = build_mlts(alpha_apply(spec, p), semiring, env, state_limit=state_limit)
    details = {"environments": len(family), "scope": SCOPE_NOTE}
    for i, e in enumerate(family):
        actual = build_mlts(composed(p, e, spec.H), semiring, env, state_limit=state_limit)
        inner = compare(actual, expected, spec.relation, spec.eps)
        if not inner.holds:
            details.update(failed_index=i, inner=inner)
            return Verdict(False, "gndc", spec.eps, None, details, e)
    return Verdict(True, "gndc", spec.eps, None, details)
