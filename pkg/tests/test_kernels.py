import json
import os
import subprocess
import sys

import numpy as np
import pytest

from covertjam import _kernels as k
from covertjam.geometry import draw_fading_batch


@pytest.fixture
def batch(rng):
    return draw_fading_batch(rng, 8, 3000)


@pytest.mark.parametrize("n_d", [1, 3, 8])
def test_gain_kernels_agree(batch, n_d):
    h_ab, h_ae, _, _ = batch
    np.testing.assert_allclose(k.topk_gain_jit(h_ab, n_d), k.topk_gain_numpy(h_ab, n_d), rtol=1e-13)
    np.testing.assert_allclose(k.eve_gain_jit(h_ab, h_ae, n_d), k.eve_gain_numpy(h_ab, h_ae, n_d), rtol=1e-12)


def test_topk_ties_pick_lowest_index():
    h = np.array([[1.0, 2.0, 2.0, 1.0]], dtype=complex)
    h_ae = np.array([[0.0, 1.0, 0.0, 0.0]], dtype=complex)
    # two antennas tie for first; the lower index wins so only antenna 1 is used
    assert k.eve_gain_jit(h, h_ae, 1)[0] == pytest.approx(1.0)
    assert k.eve_gain_numpy(h, h_ae, 1)[0] == pytest.approx(1.0)


def test_error_counting_agrees(rng):
    s0, s1 = rng.exponential(size=(2, 5000))
    assert tuple(k.count_errors_jit(s0, s1, 0.7)) == tuple(k.count_errors_numpy(s0, s1, 0.7))
    assert tuple(k.count_errors_numpy(np.array([1.0]), np.array([1.0]), 1.0)) == (1, 1)


def _dc_inputs(rng, n=2000):
    a = 10 ** rng.uniform(-2, 5, n)
    b = 10 ** rng.uniform(0, 4, n)
    c = 10 ** rng.uniform(-3, 5, n)
    hi = rng.uniform(0.05, 1.0, n)
    return a, b, c, hi, 0.5 * hi


def test_dc_batch_paths_agree(rng):
    args = _dc_inputs(rng)
    x1, r1, i1, ok1 = k.dc_batch_numpy(*args, 100, 1e-9, 1e-8)
    x2, r2, i2, ok2 = k.dc_batch_jit(*args, 100, 1e-9, 1e-8)
    np.testing.assert_array_equal(i1, i2)
    np.testing.assert_array_equal(ok1, ok2)
    done = ok1.astype(bool)
    np.testing.assert_allclose(x1[done], x2[done], atol=1e-12)
    # runs that exhaust the budget crawl along a flat rate; ulp-level
    # differences between the two golden searches accumulate in alpha only
    np.testing.assert_allclose(x1[~done], x2[~done], atol=1e-5)
    np.testing.assert_allclose(r1, r2, atol=1e-9)


def test_dc_batch_matches_scalar_core(rng):
    a, b, c, hi, x0 = _dc_inputs(rng, 50)
    xb, rb, _, _ = k.dc_batch(a, b, c, hi, x0, 100, 1e-9, 1e-8)
    for j in range(50):
        x, r, _, _, trace = k.dc_core(a[j], b[j], c[j], hi[j], x0[j], 100, 1e-9, 1e-8)
        assert x == pytest.approx(xb[j], abs=1e-12)
        assert r == pytest.approx(rb[j], abs=1e-12)
        assert np.all(np.diff(trace[:, 3]) >= 0)


def test_scalar_core_python_and_compiled_agree(rng):
    a, b, c, hi, x0 = _dc_inputs(rng, 20)
    for j in range(20):
        out = []
        for fn in (k.dc_core_py, k.dc_core_jit):
            trace = np.empty((101, 4))
            out.append(fn(a[j], b[j], c[j], hi[j], x0[j], 100, 1e-9, 1e-8, trace)[:2])
        np.testing.assert_allclose(out[0], out[1], atol=1e-12)


_CHILD = """
import json
import numpy as np
from covertjam import _kernels
from covertjam.experiments import ExperimentConfig, run_power_sweep
cfg = ExperimentConfig(n_fading=300, p_points=4, nd_list=(1, 4), seed=3)
t = run_power_sweep(cfg)
print(json.dumps({"numba": _kernels.USE_NUMBA, "rates": t.column("rate_mean")}))
"""


def _run_child(flag):
    env = dict(os.environ, COVERTJAM_DISABLE_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", _CHILD], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


@pytest.mark.slow
def test_env_flag_selects_numpy_fallback():
    fallback = _run_child("1")
    assert fallback["numba"] is False
    compiled = _run_child("0")
    assert compiled["numba"] is k.HAS_NUMBA
    np.testing.assert_allclose(fallback["rates"], compiled["rates"], rtol=1e-12)
