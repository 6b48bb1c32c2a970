import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sinhlab import _kernels_py, kernels
from sinhlab.conformal import b_of, build_curve, scriptJ_of, vstar_of

try:
    from sinhlab import _ckernels
except ImportError:  # extension not built
    _ckernels = None

needs_ext = pytest.mark.skipif(_ckernels is None, reason="compiled extension not built")


@needs_ext
def test_extension_selected_by_default():
    assert kernels.BACKEND == "cython"


def test_pure_python_switch():
    code = "from sinhlab import kernels, BACKEND; print(kernels.BACKEND, BACKEND)"
    env = {**os.environ, "SINHLAB_PURE_PYTHON": "1"}
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env)
    assert out.returncode == 0 and out.stdout.split() == ["python", "python"]


@needs_ext
@given(st.floats(0.05, 40.0))
def test_gamma1_backends_agree(x):
    y = b_of(x) * np.linspace(0.01, 0.99, 17)
    vs = vstar_of(x)
    a = _kernels_py.gamma1_solve(x, vs, y)
    c = _ckernels.gamma1_solve(x, vs, y)
    assert np.max(np.abs(a - c) / np.abs(a)) < 1e-13
    assert np.max(np.abs(scriptJ_of(x, c) - y) / y) < 1e-12


@needs_ext
def test_log_kernel_backends_agree():
    curve = build_curve(2.0, n_nodes=64)
    ys = curve.b * np.linspace(0.05, 0.95, 7)
    us = curve.b * np.linspace(0.02, 0.98, 31)
    sq_x = np.sqrt(np.asarray(curve.boundary_values(ys)[0]))
    sq_u = np.tile(np.sqrt(np.asarray(curve.boundary_values(us)[0])), (7, 1))
    weights = np.full((7, 31), 1.0 / 31)
    a = _kernels_py.log_kernel_sums(sq_u, weights, sq_x)
    c = _ckernels.log_kernel_sums(sq_u, weights, sq_x)
    assert np.max(np.abs(a - c) / np.abs(a)) < 1e-13


def test_scaled_arctanh_series():
    s = np.array([1e4, -1e4 + 1j, 3.0 + 4.0j])
    want = 1 / s + 1 / (3 * s ** 2) + 1 / (5 * s ** 3)
    assert np.allclose(kernels.scaled_arctanh(s)[:2], want[:2], rtol=1e-10)
    assert abs(kernels.scaled_arctanh(s[2]) * np.sqrt(s[2]) - np.arctanh(1 / np.sqrt(s[2]))) < 1e-15
