"""Bitmask kernels over the full lattice of atom-unions.

A measurable set of a space with ``n`` atoms is an integer mask below
``2**n``.  The operators used throughout the package (essential image,
preimage, measure) are determined by their values on single atoms, so
their tables over all ``2**n`` masks can be filled in one sweep.

Every kernel has a numba implementation and a vectorised numpy
implementation; they must agree bit for bit (see ``tests/test_kernels.py``
and ``benchmarks/bench_kernels.py``).
"""
import numpy as np

from ._accel import njit, resolve

MAX_TABLE_ATOMS = 24


def _check_size(n):
    if n > MAX_TABLE_ATOMS:
        raise ValueError(f"table over 2**{n} masks exceeds the {MAX_TABLE_ATOMS}-atom cap")


# -- join / sum tables -------------------------------------------------------

@njit
def _join_table_nb(values, n):
    size = 1 << n
    out = np.zeros(size, dtype=np.uint64)
    for mask in range(1, size):
        low = mask & (-mask)
        bit = 0
        while (low >> bit) != 1:
            bit += 1
        out[mask] = out[mask ^ low] | values[bit]
    return out


def _join_table_np(values, n):
    masks = np.arange(1 << n, dtype=np.uint64)
    out = np.zeros(1 << n, dtype=np.uint64)
    for bit in range(n):
        hit = ((masks >> np.uint64(bit)) & np.uint64(1)).astype(bool)
        out[hit] |= np.uint64(values[bit])
    return out


@njit
def _sum_table_nb(values, n):
    size = 1 << n
    out = np.zeros(size, dtype=np.int64)
    for mask in range(1, size):
        low = mask & (-mask)
        bit = 0
        while (low >> bit) != 1:
            bit += 1
        out[mask] = out[mask ^ low] + values[bit]
    return out


def _sum_table_np(values, n):
    masks = np.arange(1 << n, dtype=np.uint64)
    out = np.zeros(1 << n, dtype=np.int64)
    for bit in range(n):
        hit = ((masks >> np.uint64(bit)) & np.uint64(1)).astype(bool)
        out[hit] += np.int64(values[bit])
    return out


def join_table(values, backend=None):
    """Table of ``OR_{i in mask} values[i]`` for every mask."""
    values = np.asarray(values, dtype=np.uint64)
    n = len(values)
    _check_size(n)
    if resolve(backend) == "numba":
        return _join_table_nb(values, n)
    return _join_table_np(values, n)


def sum_table(values, backend=None):
    """Table of ``sum_{i in mask} values[i]`` (int64) for every mask."""
    values = np.asarray(values, dtype=np.int64)
    n = len(values)
    _check_size(n)
    if resolve(backend) == "numba":
        return _sum_table_nb(values, n)
    return _sum_table_np(values, n)


# -- orbit unions ------------------------------------------------------------

@njit
def _orbit_unions_nb(table, start, stop, lim_from):
    size = table.shape[0]
    union = np.zeros(size, dtype=np.uint64)
    limsup = np.zeros(size, dtype=np.uint64)
    for mask in range(size):
        cur = np.uint64(mask)
        acc = np.uint64(0)
        lim = np.uint64(0)
        for k in range(1, stop):
            cur = table[cur]
            if k >= start:
                acc |= cur
            if k >= lim_from:
                lim |= cur
        union[mask] = acc
        limsup[mask] = lim
    return union, limsup


def _orbit_unions_np(table, start, stop, lim_from):
    cur = np.arange(table.shape[0], dtype=np.uint64)
    union = np.zeros_like(cur)
    limsup = np.zeros_like(cur)
    for k in range(1, stop):
        cur = table[cur]
        if k >= start:
            union |= cur
        if k >= lim_from:
            limsup |= cur
    return union, limsup


def orbit_unions(table, preperiod, period, backend=None):
    """Union and lim sup of ``table**k[mask]`` over ``k >= 1``, for every mask.

    ``preperiod``/``period`` describe the operator sequence ``table**k``
    (``k >= 1``): ``table**(k + period) == table**k`` for ``k >= preperiod``.
    Every value of the sequence then occurs for some ``k < preperiod + period``
    and the lim sup is the union over ``preperiod <= k < preperiod + period``.
    """
    table = np.asarray(table, dtype=np.uint64)
    if preperiod < 1 or period < 1:
        raise ValueError("preperiod and period must be >= 1")
    stop = preperiod + period
    if resolve(backend) == "numba":
        return _orbit_unions_nb(table, 1, stop, preperiod)
    return _orbit_unions_np(table, 1, stop, preperiod)


# -- subset closure ----------------------------------------------------------

@njit
def _subset_or_nb(values, n):
    out = values.copy()
    for bit in range(n):
        step = 1 << bit
        for mask in range(out.shape[0]):
            if mask & step:
                out[mask] |= out[mask ^ step]
    return out


def _subset_or_np(values, n):
    out = values.copy()
    for bit in range(n):
        shaped = out.reshape(-1, 2, 1 << bit)
        shaped[:, 1, :] |= shaped[:, 0, :]
    return out


def subset_or(values, backend=None):
    """Zeta transform under OR: ``out[M] = OR_{A subset of M} values[A]``."""
    values = np.asarray(values, dtype=np.uint64)
    n = int(values.shape[0]).bit_length() - 1
    if values.shape[0] != 1 << n:
        raise ValueError("subset_or needs a table of length 2**n")
    if resolve(backend) == "numba":
        return _subset_or_nb(values, n)
    return _subset_or_np(values, n)
