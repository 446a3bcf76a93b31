"""Backend selection for the integer-encoded closure kernels.

The compiled extension ``qsec._kernels`` is used when it was built; otherwise
(or when ``QSEC_PURE_PYTHON=1``) the numpy implementation in
``qsec._kernels_py`` takes over.  Only semirings whose ``kernel`` attribute is
set are encoded; every other instance stays on the generic object path.
"""

import os

import numpy as np

from qsec import _kernels_py
from qsec.semiring import INF, value_key

if os.environ.get("QSEC_PURE_PYTHON") == "1":
    _compiled = None
else:
    try:
        from qsec import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"

# smaller matrices are cheaper on the generic object path
MIN_KERNEL_SIZE = 12

# finite tropical costs sit well below the sentinel so that two of them
# never overflow int64 when added
INF_SENTINEL = 2**61
_MAX_FINITE = 2**60


def _impl(name, backend=None):
    backend = backend or BACKEND
    if backend == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available")
        return getattr(_compiled, name)
    return getattr(_kernels_py, name)


class _Encoding:
    """Order-preserving map between carrier values and int64 codes."""

    def __init__(self, spec, values):
        self.spec = spec
        if spec.kernel == "minplus":
            finite = [v for v in values if v != INF]
            limit = max(finite, default=0) * max(len(values), 1)
            self.ok = limit < _MAX_FINITE
        else:
            unique = {value_key(v): v for v in values}
            for v in (spec.bot, spec.top):
                unique[value_key(v)] = v
            ranks = sorted(unique.values(), key=spec.order_key)
            self.to_code = {value_key(v): i for i, v in enumerate(ranks)}
            self.from_code = ranks
            self.top_code = len(ranks) - 1
            self.ok = True

    def encode(self, m):
        if self.spec.kernel == "minplus":
            return np.array(
                [[INF_SENTINEL if v == INF else v for v in row] for row in m], dtype=np.int64
            )
        code = self.to_code
        return np.array([[code[value_key(v)] for v in row] for row in m], dtype=np.int64)

    def decode(self, arr):
        if self.spec.kernel == "minplus":
            return [[INF if v >= INF_SENTINEL else int(v) for v in row] for row in arr.tolist()]
        back = self.from_code
        return [[back[v] for v in row] for row in arr.tolist()]


def _values(*matrices):
    return [v for m in matrices for row in m for v in row]


def closure(m, spec, force=False, backend=None):
    """Encoded Kleene closure, or ``None`` when the fast path does not apply."""
    if spec.kernel is None or (not force and len(m) < MIN_KERNEL_SIZE):
        return None
    enc = _Encoding(spec, _values(m))
    if not enc.ok:
        return None
    arr = enc.encode(m)
    if spec.kernel == "minplus":
        out = _impl("closure_minplus", backend)(arr, INF_SENTINEL)
    else:
        out = _impl("closure_maxmin", backend)(arr, enc.top_code)
    return enc.decode(out)


def matmul(a, b, spec, force=False, backend=None):
    if spec.kernel is None or (not force and len(a) < MIN_KERNEL_SIZE):
        return None
    enc = _Encoding(spec, _values(a, b))
    if not enc.ok:
        return None
    if spec.kernel == "minplus":
        out = _impl("matmul_minplus", backend)(enc.encode(a), enc.encode(b), INF_SENTINEL)
    else:
        out = _impl("matmul_maxmin", backend)(enc.encode(a), enc.encode(b))
    return enc.decode(out)
