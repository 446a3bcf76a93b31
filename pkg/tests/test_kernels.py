import os
import random
import subprocess
import sys
from fractions import Fraction

import pytest

from oracles import REFERENCE, closure
from qsec import BOTTLENECK, FUZZY, INF, TROPICAL, matrix_closure
from qsec import kernels
from qsec.semiring import matrix_product


def random_matrix(rng, spec, n, density=0.3):
    def w():
        if rng.random() > density:
            return spec.bot
        if spec is TROPICAL:
            return rng.randint(0, 50)
        return Fraction(rng.randint(0, 20), 20) if spec is FUZZY else Fraction(rng.randint(0, 40), 2)

    return [[w() for _ in range(n)] for _ in range(n)]


BACKENDS = ["python"] + (["compiled"] if kernels.BACKEND == "compiled" else [])


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("spec", [TROPICAL, FUZZY, BOTTLENECK], ids=lambda s: s.name)
def test_closure_agrees(spec, backend):
    rng = random.Random(7)
    for n in (1, 2, 5, 13, 20):
        m = random_matrix(rng, spec, n)
        fast = kernels.closure(m, spec, force=True, backend=backend)
        assert fast == matrix_closure(m, spec, backend="python")
        if n <= 13:
            assert fast == closure(m, REFERENCE[spec.kind])


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("spec", [TROPICAL, FUZZY], ids=lambda s: s.name)
def test_matmul_agrees(spec, backend):
    rng = random.Random(8)
    for n in (1, 4, 16):
        a, b = random_matrix(rng, spec, n, 0.6), random_matrix(rng, spec, n, 0.6)
        assert kernels.matmul(a, b, spec, force=True, backend=backend) == matrix_product(
            a, b, spec, backend="python")


def test_huge_costs_fall_back():
    m = [[INF, 2**62], [INF, INF]]
    assert kernels.closure(m, TROPICAL, force=True) is None
    assert matrix_closure(m, TROPICAL) == [[0, 2**62], [INF, 0]]


def test_pure_python_switch():
    code = "from qsec import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, QSEC_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
