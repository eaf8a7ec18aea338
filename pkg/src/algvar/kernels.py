"""Hot loops: partition and preorder refinement, idempotent powers, table search.

Every kernel has a numba implementation and a numpy implementation with the
same signature.  The public names dispatch on ``ALGVAR_KERNELS`` (read at
import time, see ``_accel``); the suffixed variants stay importable so the
tests and the benchmark can compare both.

Element indices are *global*: sorts are laid out one after another, and a
successor table ``succ[i, k]`` holds the image of element ``i`` under the
``k``-th unary map leaving its sort, or ``-1`` as padding.
"""

import numpy as np

from ._accel import njit, requested_backend

# ---------------------------------------------------------------------------
# row relabelling


def relabel_rows_numpy(rows):
    rows = np.ascontiguousarray(rows, dtype=np.int64)
    n = rows.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    if rows.shape[1] == 0:
        return np.zeros(n, dtype=np.int64)
    _, first, inverse = np.unique(rows, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.reshape(-1)
    # renumber classes by first occurrence
    rank = np.empty(first.shape[0], dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(first.shape[0])
    return rank[inverse]


@njit(cache=True)
def _row_hash(rows, i):
    h = np.uint64(1469598103934665603)
    for k in range(rows.shape[1]):
        h = (h ^ np.uint64(rows[i, k] + 7)) * np.uint64(1099511628211)
    return h


@njit(cache=True)
def _rows_equal(rows, i, j):
    for k in range(rows.shape[1]):
        if rows[i, k] != rows[j, k]:
            return False
    return True


@njit(cache=True)
def relabel_rows_numba(rows):
    n = rows.shape[0]
    labels = np.full(n, -1, dtype=np.int64)
    if n == 0:
        return labels
    hashes = np.empty(n, dtype=np.uint64)
    for i in range(n):
        hashes[i] = _row_hash(rows, i)
    order = np.argsort(hashes, kind="mergesort")
    # group id per element, only equal rows share a group
    group = np.full(n, -1, dtype=np.int64)
    ngroups = 0
    start = 0
    while start < n:
        stop = start
        while stop < n and hashes[order[stop]] == hashes[order[start]]:
            stop += 1
        for a in range(start, stop):
            i = order[a]
            if group[i] >= 0:
                continue
            group[i] = ngroups
            for b in range(a + 1, stop):
                j = order[b]
                if group[j] < 0 and _rows_equal(rows, i, j):
                    group[j] = ngroups
            ngroups += 1
        start = stop
    # renumber by first occurrence
    remap = np.full(ngroups, -1, dtype=np.int64)
    nxt = 0
    for i in range(n):
        g = group[i]
        if remap[g] < 0:
            remap[g] = nxt
            nxt += 1
        labels[i] = remap[g]
    return labels


# ---------------------------------------------------------------------------
# partition refinement


def refine_partition_numpy(init, succ):
    labels = relabel_rows_numpy(np.asarray(init, dtype=np.int64).reshape(-1, 1))
    succ = np.asarray(succ, dtype=np.int64)
    n, k = succ.shape
    count = int(labels.max()) + 1 if n else 0
    while True:
        padded = np.append(labels, -1)
        rows = np.empty((n, k + 1), dtype=np.int64)
        rows[:, 0] = labels
        rows[:, 1:] = padded[succ]  # -1 indexes the padding slot
        new = relabel_rows_numpy(rows)
        new_count = int(new.max()) + 1 if n else 0
        labels = new
        if new_count == count:
            return labels
        count = new_count


@njit(cache=True)
def refine_partition_numba(init, succ):
    n = succ.shape[0]
    k = succ.shape[1]
    first = np.empty((n, 1), dtype=np.int64)
    for i in range(n):
        first[i, 0] = init[i]
    labels = relabel_rows_numba(first)
    count = 0
    for i in range(n):
        if labels[i] + 1 > count:
            count = labels[i] + 1
    rows = np.empty((n, k + 1), dtype=np.int64)
    while True:
        for i in range(n):
            rows[i, 0] = labels[i]
            for c in range(k):
                j = succ[i, c]
                rows[i, c + 1] = labels[j] if j >= 0 else -1
        labels = relabel_rows_numba(rows)
        new_count = 0
        for i in range(n):
            if labels[i] + 1 > new_count:
                new_count = labels[i] + 1
        if new_count == count:
            return labels
        count = new_count


# ---------------------------------------------------------------------------
# preorder refinement


def refine_preorder_numpy(init, succ):
    rel = np.array(init, dtype=bool)
    succ = np.asarray(succ, dtype=np.int64)
    n, k = succ.shape
    # slot n is a padding element related to itself only
    big = np.zeros((n + 1, n + 1), dtype=bool)
    big[n, n] = True
    idx = np.where(succ >= 0, succ, n)
    while True:
        big[:n, :n] = rel
        new = rel.copy()
        for c in range(k):
            col = idx[:, c]
            new &= big[np.ix_(col, col)]
        if np.array_equal(new, rel):
            return rel
        rel = new


@njit(cache=True)
def refine_preorder_numba(init, succ):
    n = succ.shape[0]
    k = succ.shape[1]
    rel = init.copy()
    changed = True
    while changed:
        changed = False
        for i in range(n):
            for j in range(n):
                if not rel[i, j]:
                    continue
                for c in range(k):
                    a = succ[i, c]
                    b = succ[j, c]
                    if a < 0 and b < 0:
                        continue
                    if a < 0 or b < 0 or not rel[a, b]:
                        rel[i, j] = False
                        changed = True
                        break
    return rel


# ---------------------------------------------------------------------------
# idempotent powers


def idempotent_powers_numpy(table):
    table = np.asarray(table, dtype=np.int64)
    n = table.shape[0]
    out = np.full(n, -1, dtype=np.int64)
    power = np.arange(n, dtype=np.int64)
    pending = np.ones(n, dtype=bool)
    base = np.arange(n, dtype=np.int64)
    for _ in range(2 * n + 1):
        if not pending.any():
            break
        idem = table[power, power] == power
        hit = pending & idem
        out[hit] = power[hit]
        pending &= ~idem
        power = table[power, base]
    return out


@njit(cache=True)
def idempotent_powers_numba(table):
    n = table.shape[0]
    out = np.full(n, -1, dtype=np.int64)
    for x in range(n):
        p = x
        for _ in range(2 * n + 1):
            if table[p, p] == p:
                out[x] = p
                break
            p = table[p, x]
    return out


# ---------------------------------------------------------------------------
# enumeration of associative tables


def _assoc_ok(table, n):
    for x in range(n):
        for y in range(n):
            xy = table[x, y]
            if xy < 0:
                continue
            for z in range(n):
                yz = table[y, z]
                if yz < 0:
                    continue
                left = table[xy, z]
                right = table[x, yz]
                if left >= 0 and right >= 0 and left != right:
                    return False
    return True


def _assoc_search(n, unit, out, fill):
    table = np.full((n, n), -1, dtype=np.int64)
    if unit:
        for i in range(n):
            table[0, i] = i
            table[i, 0] = i
    first = 1 if unit else 0
    m = n - first
    cells = np.empty((m * m, 2), dtype=np.int64)
    k = 0
    for i in range(first, n):
        for j in range(first, n):
            cells[k, 0] = i
            cells[k, 1] = j
            k += 1
    ncells = m * m
    found = 0
    if ncells == 0:
        if fill:
            out[0] = table
        return 1
    pos = 0
    while pos >= 0:
        i = cells[pos, 0]
        j = cells[pos, 1]
        v = table[i, j] + 1
        placed = False
        while v < n:
            table[i, j] = v
            if _assoc_ok(table, n):
                placed = True
                break
            v += 1
        if not placed:
            table[i, j] = -1
            pos -= 1
            continue
        if pos == ncells - 1:
            if fill:
                out[found] = table
            found += 1
        else:
            pos += 1
    return found


_assoc_ok_numba = njit(cache=True)(_assoc_ok)


@njit(cache=True)
def _assoc_search_numba(n, unit, out, fill):
    table = np.full((n, n), -1, dtype=np.int64)
    if unit:
        for i in range(n):
            table[0, i] = i
            table[i, 0] = i
    first = 1 if unit else 0
    m = n - first
    cells = np.empty((m * m, 2), dtype=np.int64)
    k = 0
    for i in range(first, n):
        for j in range(first, n):
            cells[k, 0] = i
            cells[k, 1] = j
            k += 1
    ncells = m * m
    found = 0
    if ncells == 0:
        if fill:
            out[0] = table
        return 1
    pos = 0
    while pos >= 0:
        i = cells[pos, 0]
        j = cells[pos, 1]
        v = table[i, j] + 1
        placed = False
        while v < n:
            table[i, j] = v
            if _assoc_ok_numba(table, n):
                placed = True
                break
            v += 1
        if not placed:
            table[i, j] = -1
            pos -= 1
            continue
        if pos == ncells - 1:
            if fill:
                out[found] = table
            found += 1
        else:
            pos += 1
    return found


def associative_tables_numpy(n, unit):
    """All associative ``n × n`` tables (with ``0`` as unit when ``unit``), lexicographic."""
    if n == 0:
        return np.zeros((0, 0, 0), dtype=np.int64)
    dummy = np.zeros((1, n, n), dtype=np.int64)
    count = _assoc_search(n, unit, dummy, False)
    out = np.zeros((count, n, n), dtype=np.int64)
    _assoc_search(n, unit, out, True)
    return out


def associative_tables_numba(n, unit):
    if n == 0:
        return np.zeros((0, 0, 0), dtype=np.int64)
    dummy = np.zeros((1, n, n), dtype=np.int64)
    count = _assoc_search_numba(n, bool(unit), dummy, False)
    out = np.zeros((count, n, n), dtype=np.int64)
    _assoc_search_numba(n, bool(unit), out, True)
    return out


# ---------------------------------------------------------------------------
# dispatch

BACKEND = requested_backend()

if BACKEND == "numba":
    def relabel_rows(rows):
        return relabel_rows_numba(np.ascontiguousarray(rows, dtype=np.int64))

    def refine_partition(init, succ):
        return refine_partition_numba(
            np.ascontiguousarray(init, dtype=np.int64),
            np.ascontiguousarray(succ, dtype=np.int64).reshape(len(init), -1),
        )

    def refine_preorder(init, succ):
        return refine_preorder_numba(
            np.ascontiguousarray(init, dtype=np.bool_),
            np.ascontiguousarray(succ, dtype=np.int64).reshape(len(init), -1),
        )

    def idempotent_powers(table):
        return idempotent_powers_numba(np.ascontiguousarray(table, dtype=np.int64))

    associative_tables = associative_tables_numba
else:
    relabel_rows = relabel_rows_numpy

    def refine_partition(init, succ):
        return refine_partition_numpy(init, np.asarray(succ).reshape(len(init), -1))

    def refine_preorder(init, succ):
        return refine_preorder_numpy(init, np.asarray(succ).reshape(len(init), -1))

    idempotent_powers = idempotent_powers_numpy
    associative_tables = associative_tables_numpy
