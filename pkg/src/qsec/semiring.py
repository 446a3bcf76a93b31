"""c-semiring instances, the induced order, residuation and matrix closure.

Weights are plain Python values interpreted against a :class:`SemiringSpec`:

=============  =======================================  ==========
kind           carrier                                  literal
=============  =======================================  ==========
boolean        ``bool``                                 true/false
fuzzy          ``Fraction`` in [0, 1]                   0.25, 1/3
probabilistic  ``Fraction`` in [0, 1]                   0.25, 1/3
tropical       ``int`` >= 0 or ``INF``                  3, inf
bottleneck     ``Fraction`` >= 0 or ``INF``             2.5, inf
product        ``tuple`` of component weights           (3,0.5)
=============  =======================================  ==========

The public operations (``plus``, ``times``, ``leq`` ...) validate their
arguments and raise :class:`MixedSemirings` for foreign values.  The
underscore variants skip validation and are what the rest of the package
uses in its inner loops.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import reduce

from qsec.errors import MixedSemirings, NegationUndefined, QsecSyntaxError

INF = math.inf



def value_key(value):
    """Cheap hashable stand-in for a carrier value.

    Hashing a ``Fraction`` computes a modular inverse, which dominates the
    rank tables built for large matrices.
    """
    if type(value) is Fraction:
        return (value.numerator, value.denominator)
    return value


_NUMBER = re.compile(r"^\d+(\.\d+)?(/\d+)?$")


def _to_fraction(text):
    if "/" in text:
        num, den = text.split("/")
        if int(den) == 0:
            raise QsecSyntaxError(f"zero denominator in {text!r}")
        return Fraction(Fraction(num), int(den))
    return Fraction(text)


def format_weight(value):
    """Render a carrier value in the literal syntax accepted by the parsers."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return "(" + ",".join(format_weight(v) for v in value) + ")"
    if value == INF:
        return "inf"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Fraction):
        return _format_fraction(value)
    return str(value)


def _format_fraction(q):
    den = q.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{q.numerator}/{q.denominator}"
    places = max(twos, fives, 1)
    scaled = q * 10**places
    digits = str(scaled.numerator).rjust(places + 1, "0")
    text = digits[:-places] + "." + digits[-places:]
    return text


class SemiringSpec:
    """Descriptor of one c-semiring instance.

    Subclasses define the raw operations; this base class derives the order,
    the n-ary folds and the checked public surface from them.
    """

    kind: str = ""
    has_negation = False
    times_idempotent = False
    totally_ordered = True
    # fast-path encoding understood by qsec.kernels ("minplus", "maxmin" or None)
    kernel = None

    bot = None
    top = None

    @property
    def name(self):
        return self.kind

    def __repr__(self):
        return f"SemiringSpec({self.name})"

    def __eq__(self, other):
        return isinstance(other, SemiringSpec) and other.name == self.name

    def __hash__(self):
        return hash(self.name)

    # -- raw operations, overridden per instance ------------------------------

    def contains(self, value) -> bool:
        raise NotImplementedError

    def _plus(self, a, b):
        raise NotImplementedError

    def _times(self, a, b):
        raise NotImplementedError

    def _glb(self, a, b):
        raise NotImplementedError

    def _divide(self, a, b):
        raise NotImplementedError

    def _negate(self, a):
        raise NegationUndefined(f"the {self.name} semiring has no negation operator")

    def _leq(self, a, b):
        return self._plus(a, b) == b

    def atom(self, text):
        """Convert a single literal token (not ``top``/``bot``) to a carrier value."""
        raise NotImplementedError

    def order_key(self, value):
        """Sort key increasing along the order; only for totally ordered instances."""
        raise NotImplementedError

    # -- checked public surface ------------------------------------------------

    def check(self, value):
        if not self.contains(value):
            raise MixedSemirings(
                f"{format_weight(value)!s} ({type(value).__name__}) is not in the "
                f"carrier of the {self.name} semiring"
            )
        return value

    def plus(self, a, b):
        return self._plus(self.check(a), self.check(b))

    def times(self, a, b):
        return self._times(self.check(a), self.check(b))

    def leq(self, a, b) -> bool:
        return self._leq(self.check(a), self.check(b))

    def geq(self, a, b) -> bool:
        return self.leq(b, a)

    def glb(self, a, b):
        return self._glb(self.check(a), self.check(b))

    def divide(self, a, b):
        """Residuation: the greatest ``x`` with ``b * x <= a``."""
        return self._divide(self.check(a), self.check(b))

    def negate(self, a):
        return self._negate(self.check(a))

    def incomparable_or_equal(self, a, b) -> bool:
        self.check(a)
        self.check(b)
        return self._incomparable_or_equal(a, b)

    def _incomparable_or_equal(self, a, b):
        return a == b or (not self._leq(a, b) and not self._leq(b, a))

    def big_plus(self, values):
        return reduce(self._plus, (self.check(v) for v in values), self.bot)

    def big_glb(self, values):
        return reduce(self._glb, (self.check(v) for v in values), self.top)

    def parse(self, text):
        """Parse a weight literal such as ``3``, ``inf``, ``top`` or ``(3,0.5)``."""
        from qsec.lexer import Lexer, parse_weight_tokens

        lex = Lexer(text)
        value = parse_weight_tokens(lex, self)
        lex.expect_end()
        return value

    def format(self, value):
        return format_weight(value)


class BooleanSemiring(SemiringSpec):
    kind = "boolean"
    has_negation = True
    times_idempotent = True
    kernel = "maxmin"
    bot = False
    top = True

    def contains(self, value):
        return isinstance(value, bool)

    def _plus(self, a, b):
        return a or b

    def _times(self, a, b):
        return a and b

    _glb = _times

    def _divide(self, a, b):
        return (not b) or a

    def _negate(self, a):
        return not a

    def atom(self, text):
        if text == "true":
            return True
        if text == "false":
            return False
        raise QsecSyntaxError(f"{text!r} is not a boolean weight")

    def order_key(self, value):
        return int(value)


class _UnitInterval(SemiringSpec):
    has_negation = True
    bot = Fraction(0)
    top = Fraction(1)

    def contains(self, value):
        return isinstance(value, Fraction) and 0 <= value <= 1

    def _plus(self, a, b):
        return a if a >= b else b

    def _glb(self, a, b):
        return a if a <= b else b

    def _leq(self, a, b):
        return a <= b

    def _negate(self, a):
        return 1 - a

    def atom(self, text):
        if not _NUMBER.match(text):
            raise QsecSyntaxError(f"{text!r} is not a {self.name} weight")
        value = _to_fraction(text)
        if value > 1:
            raise QsecSyntaxError(f"{self.name} weights lie in [0,1], got {text}")
        return value

    def order_key(self, value):
        return value


class FuzzySemiring(_UnitInterval):
    kind = "fuzzy"
    times_idempotent = True
    kernel = "maxmin"

    def _times(self, a, b):
        return a if a <= b else b

    def _divide(self, a, b):
        return self.top if b <= a else a


class ProbabilisticSemiring(_UnitInterval):
    kind = "probabilistic"

    def _times(self, a, b):
        return a * b

    def _divide(self, a, b):
        if b <= a:
            return self.top
        return a / b


class TropicalSemiring(SemiringSpec):
    kind = "tropical"
    kernel = "minplus"
    bot = INF
    top = 0

    def contains(self, value):
        if isinstance(value, bool):
            return False
        return (isinstance(value, int) and value >= 0) or (
            isinstance(value, float) and value == INF
        )

    def _plus(self, a, b):
        return a if a <= b else b

    def _times(self, a, b):
        return a + b

    def _glb(self, a, b):
        return a if a >= b else b

    def _leq(self, a, b):
        return b <= a

    def _divide(self, a, b):
        if b == INF:
            return 0
        if a == INF:
            return INF
        return a - b if a > b else 0

    def atom(self, text):
        if text == "inf":
            return INF
        if not text.isdigit():
            raise QsecSyntaxError(f"{text!r} is not a tropical weight (natural number or inf)")
        return int(text)

    def order_key(self, value):
        return -value


class BottleneckSemiring(SemiringSpec):
    kind = "bottleneck"
    times_idempotent = True
    kernel = "maxmin"
    bot = Fraction(0)
    top = INF

    def contains(self, value):
        return (isinstance(value, Fraction) and value >= 0) or (
            isinstance(value, float) and value == INF
        )

    def _plus(self, a, b):
        return a if a >= b else b

    def _times(self, a, b):
        return a if a <= b else b

    _glb = _times

    def _leq(self, a, b):
        return a <= b

    def _divide(self, a, b):
        return self.top if b <= a else a

    def atom(self, text):
        if text == "inf":
            return INF
        if not _NUMBER.match(text):
            raise QsecSyntaxError(f"{text!r} is not a bottleneck weight")
        return _to_fraction(text)

    def order_key(self, value):
        return value


class ProductSemiring(SemiringSpec):
    """Cartesian product; every operation acts componentwise."""

    kind = "product"
    totally_ordered = False

    def __init__(self, left: SemiringSpec, right: SemiringSpec):
        self.left = left
        self.right = right
        self.parts = (left, right)
        self.bot = (left.bot, right.bot)
        self.top = (left.top, right.top)
        self.has_negation = left.has_negation and right.has_negation
        self.times_idempotent = left.times_idempotent and right.times_idempotent

    @property
    def name(self):
        return f"product({self.left.name},{self.right.name})"

    def contains(self, value):
        return (
            isinstance(value, tuple)
            and len(value) == 2
            and self.left.contains(value[0])
            and self.right.contains(value[1])
        )

    def _plus(self, a, b):
        return (self.left._plus(a[0], b[0]), self.right._plus(a[1], b[1]))

    def _times(self, a, b):
        return (self.left._times(a[0], b[0]), self.right._times(a[1], b[1]))

    def _glb(self, a, b):
        return (self.left._glb(a[0], b[0]), self.right._glb(a[1], b[1]))

    def _leq(self, a, b):
        return self.left._leq(a[0], b[0]) and self.right._leq(a[1], b[1])

    def _divide(self, a, b):
        return (self.left._divide(a[0], b[0]), self.right._divide(a[1], b[1]))

    def _negate(self, a):
        if not self.has_negation:
            super()._negate(a)
        return (self.left._negate(a[0]), self.right._negate(a[1]))

    def atom(self, text):
        raise QsecSyntaxError(f"product weights are written as (w1,w2), got {text!r}")


BOOLEAN = BooleanSemiring()
FUZZY = FuzzySemiring()
PROBABILISTIC = ProbabilisticSemiring()
TROPICAL = TropicalSemiring()
BOTTLENECK = BottleneckSemiring()

BASE_SEMIRINGS = {s.kind: s for s in (BOOLEAN, FUZZY, PROBABILISTIC, TROPICAL, BOTTLENECK)}


def product(left: SemiringSpec, right: SemiringSpec) -> ProductSemiring:
    return ProductSemiring(left, right)


def semiring_from_name(text: str) -> SemiringSpec:
    """Resolve ``tropical``, ``product(tropical,fuzzy)`` and friends."""
    text = text.replace(" ", "")
    if text in BASE_SEMIRINGS:
        return BASE_SEMIRINGS[text]
    if text.startswith("product(") and text.endswith(")"):
        inner = text[len("product(") : -1]
        depth = 0
        for i, ch in enumerate(inner):
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            elif ch == "," and depth == 0:
                return product(semiring_from_name(inner[:i]), semiring_from_name(inner[i + 1 :]))
    raise QsecSyntaxError(f"unknown semiring {text!r}")


# -- matrices --------------------------------------------------------------------


def identity_matrix(n, spec):
    bot, top = spec.bot, spec.top
    return [[top if i == j else bot for j in range(n)] for i in range(n)]


def _check_matrix(m, spec):
    n = len(m)
    for row in m:
        if len(row) != n:
            raise ValueError("matrix must be square")
        for v in row:
            spec.check(v)
    return n


def matrix_closure(m, spec: SemiringSpec, backend="auto"):
    """Kleene closure ``M* = I + M + M^2 + ...`` of a square matrix.

    c-semirings are absorptive, so ``a* = top`` for every entry and the
    Floyd-Warshall elimination is exact.  ``backend`` is ``"auto"``,
    ``"python"`` (generic object arithmetic) or ``"kernel"`` (encoded fast
    path; raises ``ValueError`` if the semiring has none).
    """
    n = _check_matrix(m, spec)
    if backend != "python":
        from qsec import kernels

        fast = kernels.closure(m, spec, force=backend == "kernel")
        if fast is not None:
            return fast
        if backend == "kernel":
            raise ValueError(f"no kernel encoding for the {spec.name} semiring")
    return _closure_python(m, spec, n)


def _closure_python(m, spec, n):
    bot = spec.bot
    plus, times = spec._plus, spec._times
    d = [list(row) for row in m]
    for k in range(n):
        dk = d[k]
        cols = [j for j in range(n) if dk[j] != bot]
        if not cols:
            continue
        for i in range(n):
            di = d[i]
            dik = di[k]
            if dik == bot:
                continue
            for j in cols:
                di[j] = plus(di[j], times(dik, dk[j]))
    top = spec.top
    for i in range(n):
        d[i][i] = plus(d[i][i], top)
    return d


def matrix_product(a, b, spec: SemiringSpec, backend="auto"):
    """Semiring matrix product of two square matrices of equal size."""
    n = len(a)
    if backend != "python":
        from qsec import kernels

        fast = kernels.matmul(a, b, spec, force=backend == "kernel")
        if fast is not None:
            return fast
    bot = spec.bot
    plus, times = spec._plus, spec._times
    out = [[bot] * n for _ in range(n)]
    for i in range(n):
        ai = a[i]
        oi = out[i]
        for k in range(n):
            aik = ai[k]
            if aik == bot:
                continue
            bk = b[k]
            for j in range(n):
                bkj = bk[j]
                if bkj != bot:
                    oi[j] = plus(oi[j], times(aik, bkj))
    return out


def matrix_plus(a, b, spec: SemiringSpec):
    plus = spec._plus
    return [[plus(x, y) for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]
