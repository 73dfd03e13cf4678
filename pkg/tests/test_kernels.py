"""Compiled and pure-Python kernels must agree value for value."""
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from apwcert import _kernels

py = _kernels.python_backend
cy = _kernels.compiled_backend
needs_compiled = pytest.mark.skipif(cy is None, reason="compiled extension not built")


@needs_compiled
def test_backend_selected_is_compiled():
    assert _kernels.BACKEND == "cython"


def test_env_var_forces_python_backend():
    code = "from apwcert import _kernels; print(_kernels.BACKEND)"
    env = dict(os.environ, APWCERT_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@needs_compiled
@pytest.mark.parametrize("l, E", [(0, -0.3), (3, 2.0), (12, 5.5)])
def test_numerov_backends_agree(l, E):
    h = 0.01
    r = h * np.arange(501)
    g = np.zeros_like(r)
    g[1:] = l * (l + 1) / r[1:] ** 2 - 1.0 - E
    a = py.numerov_outward(g, h, 1e-200, 2.0 ** (l + 1) * 1e-200)
    b = cy.numerov_outward(g, h, 1e-200, 2.0 ** (l + 1) * 1e-200)
    np.testing.assert_allclose(a / np.max(np.abs(a)), b / np.max(np.abs(b)), rtol=1e-13, atol=1e-300)


@needs_compiled
@pytest.mark.parametrize("x", [0.0, 1e-9, 0.3, 3.0, 17.5, 80.0, 250.0])
def test_bessel_backends_agree(x):
    np.testing.assert_allclose(py.sph_jn_array(40, x), cy.sph_jn_array(40, x), rtol=1e-13, atol=1e-300)
    np.testing.assert_allclose(py.sph_in_scaled_array(40, x), cy.sph_in_scaled_array(40, x), rtol=1e-13, atol=1e-300)


@needs_compiled
def test_legendre_backends_agree(rng):
    t = rng.uniform(0, math.pi, 50)
    np.testing.assert_allclose(py.legendre_table(25, np.cos(t), np.sin(t)),
                               cy.legendre_table(25, np.cos(t), np.sin(t)), rtol=1e-13, atol=1e-300)


def test_numerov_reproduces_harmonic_solution():
    # y'' = -y with y(0) = 0 is sin(r); the fourth-order scheme error scales as h^4
    errs = []
    for n in (20, 40):
        h = math.pi / n
        r = h * np.arange(n + 1)
        y = _kernels.numerov_outward(-np.ones_like(r), h, math.sin(h), math.sin(2 * h))
        errs.append(np.max(np.abs(y - np.sin(r))))
    assert errs[0] / errs[1] == pytest.approx(16.0, rel=0.1)


def test_benchmark_script_runs():
    import pathlib
    import subprocess
    import sys

    script = pathlib.Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"
    proc = subprocess.run([sys.executable, str(script), "--repeat", "1"], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "numerov_outward" in proc.stdout
