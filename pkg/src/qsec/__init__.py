"""Quantitative security checks over c-semirings.

Weighted process terms are compiled to multi-labelled transition systems
which can be compared with quantitative trace and bisimulation relations,
checked against semiring-valued Hennessy-Milner formulas, or partially
model checked against one parallel component.
"""

from qsec.chm import (
    Box,
    Const,
    Diamond,
    Formula,
    Glb,
    Neg,
    Plus,
    Times,
    evaluate,
    format_formula,
    parse_formula,
    project,
    satisfies,
)
from qsec.equiv import (
    Verdict,
    WeakWeightMatrix,
    eps_trace_equiv,
    min_epsilon,
    quant_weak_bisim,
    weak_eps_bisim,
    weak_trace_equiv,
    weak_weight_matrix,
)
from qsec.errors import (
    ExplosionGuard,
    MixedSemirings,
    NegationUndefined,
    NonConvergent,
    QsecError,
    QsecSyntaxError,
    StateLimitExceeded,
    StateNotFound,
    TruncatedComparison,
    UnboundVariable,
    UnguardedRecursion,
    UnknownAlpha,
    UnknownCheck,
    UnsupportedPartialOrder,
)
from qsec.gndc import GndcSpec, alpha_apply, check_qgndc, generate_environments
from qsec.mlts import (
    Mlts,
    build_mlts,
    derivatives,
    maximal_traces,
    strong_eval,
    strong_run_weight,
    trace_label,
    weak_eval,
    weak_run_weight,
    weak_trace_set,
)
from qsec.process import NIL, TAU, ProcessEnv, format_process, parse_process, sort
from qsec.qpmc import PmcContext, pmc_transform, simplify, verify_theorem
from qsec.semiring import (
    BOOLEAN,
    BOTTLENECK,
    FUZZY,
    INF,
    PROBABILISTIC,
    TROPICAL,
    SemiringSpec,
    matrix_closure,
    product,
    semiring_from_name,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
