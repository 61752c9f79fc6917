import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from procal import _backend
from procal.seeding import derive_rng

BACKENDS = _backend.available()
needs_both = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled kernels not built")


def test_fallback_always_available():
    assert "python" in BACKENDS


@needs_both
@settings(max_examples=40, deadline=None)
@given(st.integers(1, 24), st.integers(0, 2**31))
def test_jacobi_bit_identical(n, seed):
    b = derive_rng(seed, "j").standard_normal((n, n))
    a = np.ascontiguousarray(b @ b.T)
    outs = [BACKENDS[k].jacobi_eigh(a, 1e-12, 100) for k in ("python", "cython")]
    assert outs[0][2] == outs[1][2] and outs[0][3] == outs[1][3]
    assert np.array_equal(outs[0][0], outs[1][0])
    assert np.array_equal(outs[0][1], outs[1][1])


@needs_both
@settings(max_examples=40, deadline=None)
@given(st.integers(1, 80), st.integers(1, 5), st.integers(2, 9), st.integers(0, 2**31))
def test_group_by_size_identical(m, n, kprime, seed):
    rng = derive_rng(seed, "g")
    x = np.round(rng.standard_normal((m, n)), 1)
    u = rng.random(-(-m // kprime))
    a = BACKENDS["python"].group_by_size(x, kprime, u)
    b = BACKENDS["cython"].group_by_size(x, kprime, u)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


@needs_both
@settings(max_examples=40, deadline=None)
@given(st.integers(1, 80), st.integers(1, 5), st.integers(1, 9), st.integers(0, 2**31))
def test_assign_nearest_identical(m, n, k, seed):
    rng = derive_rng(seed, "a")
    x = np.round(rng.standard_normal((m, n)), 1)
    c = np.ascontiguousarray(x[rng.integers(m, size=k)])
    a = BACKENDS["python"].assign_nearest(x, c)
    b = BACKENDS["cython"].assign_nearest(x, c)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_env_switch_forces_fallback():
    env = dict(os.environ, PROCAL_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import procal; print(procal.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@needs_both
def test_end_to_end_outputs_identical():
    code = ("import hashlib, procal\n"
            "from procal.dataset import make_blobs\n"
            "from procal.perturb import PerturbConfig, perturb_static\n"
            "d = make_blobs(600, 5, seed=1)\n"
            "for mode, k in (('by_group_size', 20), ('by_cluster_count', 8)):\n"
            "    p = perturb_static(d, PerturbConfig.create(mode, k, 3))\n"
            "    print(hashlib.sha256(p.data.values.tobytes()).hexdigest())\n")
    digests = []
    for flag in ("0", "1"):
        env = dict(os.environ, PROCAL_PURE_PYTHON=flag)
        digests.append(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                                      text=True, check=True).stdout)
    assert digests[0] == digests[1]
