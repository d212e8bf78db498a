"""numba and numpy kernels must agree bit for bit."""
import os
import subprocess
import sys

import numpy as np
import pytest

from essimage import _accel, kernels

needs_numba = pytest.mark.skipif(not _accel.NUMBA_AVAILABLE, reason="numba not installed")


def _random_values(rng, n, hi=1 << 20):
    return rng.integers(0, hi, size=n, dtype=np.int64)


def _naive_join(values):
    n = len(values)
    out = []
    for m in range(1 << n):
        acc = 0
        for i in range(n):
            if m >> i & 1:
                acc |= int(values[i])
        out.append(acc)
    return out


@needs_numba
@pytest.mark.parametrize("n", [0, 1, 3, 7, 10])
def test_join_and_sum_agree(n):
    rng = np.random.default_rng(n)
    vals = _random_values(rng, n)
    a = kernels.join_table(vals, backend="numba")
    b = kernels.join_table(vals, backend="numpy")
    assert a.dtype == b.dtype == np.uint64
    assert np.array_equal(a, b)
    assert a.tolist() == _naive_join(vals)
    s1 = kernels.sum_table(vals, backend="numba")
    s2 = kernels.sum_table(vals, backend="numpy")
    assert np.array_equal(s1, s2)
    assert s1[-1] == vals.sum()


@needs_numba
@pytest.mark.parametrize("seed", range(6))
def test_orbit_unions_agree(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 9))
    f = rng.integers(0, n, size=n)
    table = kernels.join_table([1 << int(t) for t in f])
    for p, q in [(1, 1), (2, 3), (4, 1)]:
        u1, l1 = kernels.orbit_unions(table, p, q, backend="numba")
        u2, l2 = kernels.orbit_unions(table, p, q, backend="numpy")
        assert np.array_equal(u1, u2) and np.array_equal(l1, l2)
        assert np.all((l1 & ~u1) == 0)


def test_orbit_unions_small_case():
    # rotation of three atoms: every nonempty set sweeps the whole space
    table = kernels.join_table([0b010, 0b100, 0b001], backend="numpy")
    union, lim = kernels.orbit_unions(table, 1, 3, backend="numpy")
    assert union.tolist() == [0] + [0b111] * 7
    assert lim.tolist() == union.tolist()
    with pytest.raises(ValueError):
        kernels.orbit_unions(table, 0, 3)


@needs_numba
@pytest.mark.parametrize("n", [0, 1, 4, 9])
def test_subset_or_agree(n):
    rng = np.random.default_rng(100 + n)
    vals = rng.integers(0, 1 << 30, size=1 << n).astype(np.uint64)
    a = kernels.subset_or(vals, backend="numba")
    b = kernels.subset_or(vals, backend="numpy")
    assert np.array_equal(a, b)
    for m in range(1 << n):
        want = 0
        for s in range(1 << n):
            if s & ~m == 0:
                want |= int(vals[s])
        assert int(a[m]) == want
        if m > 40:
            break


def test_subset_or_rejects_bad_length():
    with pytest.raises(ValueError):
        kernels.subset_or(np.zeros(6, dtype=np.uint64))


def test_size_cap_and_unknown_backend():
    with pytest.raises(ValueError):
        kernels.join_table(np.zeros(kernels.MAX_TABLE_ATOMS + 1))
    with pytest.raises(ValueError):
        kernels.join_table([1, 2], backend="cuda")


def test_env_flag_selects_numpy():
    code = "from essimage import _accel; print(_accel.DEFAULT_BACKEND)"
    env = dict(os.environ, ESSIMAGE_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                         text=True, check=True)
    assert out.stdout.strip() == "numpy"


@needs_numba
def test_default_backend_is_numba_without_flag():
    code = "from essimage import _accel; print(_accel.DEFAULT_BACKEND)"
    env = {k: v for k, v in os.environ.items() if k != _accel.DISABLE_ENV}
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                         text=True, check=True)
    assert out.stdout.strip() == "numba"


def test_cli_output_independent_of_backend():
    code = ("import io; from essimage import cli; o=io.StringIO(); "
            "cli.run(['analyze','GRID3'], o, io.StringIO()); print(o.getvalue(), end='')")
    runs = []
    for flag in ("1", "0"):
        env = dict(os.environ, ESSIMAGE_DISABLE_NUMBA=flag)
        runs.append(subprocess.run([sys.executable, "-c", code], env=env,
                                   capture_output=True, text=True, check=True).stdout)
    assert runs[0] == runs[1] and "system: GRID3" in runs[0]
