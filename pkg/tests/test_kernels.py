import os
import subprocess
import sys

import numpy as np
import pytest

from holoq import _backend, _kernels_py
from holoq.numkit import herm_propagator, random_hermitian, unitarity_defect


def _stack(rng, m):
    return np.array([random_hermitian(rng) for _ in range(m)])


def _sequential(b, dt):
    u = np.eye(3, dtype=complex)
    for h in b:
        u = herm_propagator(h, dt, atol=1e-10) @ u
    return u


@pytest.mark.parametrize("m", [1, 2, 7, 64])
def test_python_kernel_matches_sequential_product(rng, m):
    b = _stack(rng, m)
    u, traj = _kernels_py.expm_product(b, 0.05)
    assert traj is None
    assert np.allclose(u, _sequential(b, 0.05), atol=1e-13)


def test_python_kernel_trajectory(rng):
    b = _stack(rng, 12)
    u, traj = _kernels_py.expm_product(b, 0.1, stride=3)
    assert traj.shape == (5, 3, 3)
    assert np.allclose(traj[0], np.eye(3))
    assert np.allclose(traj[2], _sequential(b[:6], 0.1), atol=1e-13)
    assert np.allclose(traj[-1], u, atol=1e-14)


def test_python_kernel_rejects_bad_shape():
    with pytest.raises(ValueError):
        _kernels_py.expm_product(np.zeros((4, 2, 2)), 0.1)



@pytest.mark.skipif(_backend.BACKEND != "cython", reason="compiled extension not built")
@pytest.mark.parametrize("stride", [0, 2, 5])
def test_backends_agree(rng, stride):
    b = _stack(rng, 1000)
    uc, tc = _backend.get_kernel("cython")(b, 0.01, stride)
    up, tp = _backend.get_kernel("python")(b, 0.01, stride)
    assert np.allclose(uc, up, atol=1e-12)
    assert unitarity_defect(uc) < 1e-13
    if stride:
        assert np.allclose(tc, tp, atol=1e-12)
    else:
        assert tc is None and tp is None


def test_get_kernel_unknown():
    with pytest.raises(ValueError):
        _backend.get_kernel("fortran")


def test_env_var_forces_python_backend():
    env = dict(os.environ, HOLOQ_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", "from holoq import _backend; print(_backend.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
