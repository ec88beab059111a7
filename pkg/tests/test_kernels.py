import numpy as np
import pytest

from midsub import _kernels_py as pure
from midsub import kernels

compiled = pytest.importorskip("midsub._kernels")


def _matrix(rng, n=30):
    M = rng.random((n, n))
    return M / M.sum(axis=1, keepdims=True)


def test_backends_agree_on_power_iteration(rng):
    M = _matrix(rng) * 0.7
    x0 = rng.standard_normal(30) + 0j
    a = pure.power_iteration(M, x0.copy(), 1e-12, 10000)
    b = compiled.power_iteration(M, x0.copy(), 1e-12, 10000)
    assert a[0] == pytest.approx(b[0], abs=1e-12)
    assert a[3] and b[3]
    assert a[0] == pytest.approx(0.7, abs=1e-10)


def test_stall_is_reported(rng):
    # a rotation has no dominant eigenvalue
    R = np.array([[0.0, -1.0], [1.0, 0.0]])
    for mod in (pure, compiled):
        lam, x, it, conv, res = mod.power_iteration(R, np.array([1.0, 0.3]) + 0j, 1e-12, 5000, 50)
        assert not conv and it < 5000


@pytest.mark.parametrize("mod", [pure, compiled])
def test_positive_column(mod):
    P = np.eye(4, dtype=np.uint8)
    assert mod.reachable_positive_column(P, 10) is None
    C = np.roll(np.eye(4), 1, axis=1).astype(np.uint8)
    C[:, 0] = 1
    assert mod.reachable_positive_column(C, 10) == 1
    chain = np.eye(4, k=1, dtype=np.uint8) + np.eye(4, dtype=np.uint8)
    chain[3, 0] = 1
    assert mod.reachable_positive_column(chain, 10) == pure.reachable_positive_column(chain, 10)


def test_backend_name():
    assert kernels.BACKEND in ("python", "cython")


def test_pure_switch():
    import os
    import subprocess
    import sys

    env = dict(os.environ, MIDSUB_PURE="1")
    out = subprocess.run([sys.executable, "-c", "from midsub import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
