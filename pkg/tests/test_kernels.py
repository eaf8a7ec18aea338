import os
import subprocess
import sys

import numpy as np
import pytest

from algvar import kernels


def _random_succ(rng, n, k):
    succ = rng.integers(0, n, size=(n, k))
    succ[rng.random((n, k)) < 0.2] = -1
    return succ.astype(np.int64)


@pytest.mark.parametrize("seed", range(8))
def test_relabel_rows_parity(seed):
    rng = np.random.default_rng(seed)
    rows = rng.integers(0, 3, size=(40, 4)).astype(np.int64)
    a = kernels.relabel_rows_numpy(rows)
    b = kernels.relabel_rows_numba(rows)
    assert np.array_equal(a, b)
    # first-occurrence numbering
    assert a[0] == 0
    assert set(a.tolist()) == set(range(a.max() + 1))


def test_relabel_rows_edge_shapes():
    empty = np.zeros((0, 3), dtype=np.int64)
    assert kernels.relabel_rows_numpy(empty).size == 0
    assert kernels.relabel_rows_numba(empty).size == 0
    flat = np.zeros((5, 0), dtype=np.int64)
    assert kernels.relabel_rows_numpy(flat).tolist() == [0] * 5
    assert kernels.relabel_rows_numba(flat).tolist() == [0] * 5


@pytest.mark.parametrize("seed", range(10))
def test_refine_partition_parity(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 30))
    succ = _random_succ(rng, n, 3)
    init = rng.integers(0, 2, size=n).astype(np.int64)
    a = kernels.refine_partition_numpy(init, succ)
    b = kernels.refine_partition_numba(init, succ)
    assert np.array_equal(a, b)


@pytest.mark.parametrize("seed", range(10))
def test_refine_partition_is_stable_fixpoint(seed):
    rng = np.random.default_rng(100 + seed)
    n = 20
    succ = _random_succ(rng, n, 2)
    init = rng.integers(0, 3, size=n).astype(np.int64)
    lab = kernels.refine_partition(init, succ)
    # refines init
    for i in range(n):
        for j in range(n):
            if lab[i] == lab[j]:
                assert init[i] == init[j]
                for c in range(succ.shape[1]):
                    a, b = succ[i, c], succ[j, c]
                    if a >= 0 and b >= 0:
                        assert lab[a] == lab[b]
    # one more pass changes nothing
    assert np.array_equal(kernels.refine_partition(lab, succ), lab)


@pytest.mark.parametrize("seed", range(10))
def test_refine_preorder_parity(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 20))
    succ = _random_succ(rng, n, 2)
    init = rng.random((n, n)) < 0.7
    np.fill_diagonal(init, True)
    a = kernels.refine_preorder_numpy(init, succ)
    b = kernels.refine_preorder_numba(init, succ)
    assert np.array_equal(a, b)
    assert not (a & ~init).any()


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
def test_idempotent_powers_parity_on_cyclic_and_monogenic(n):
    from algvar.finalg import cyclic_monoid, monogenic_monoid

    for alg in (cyclic_monoid(n), monogenic_monoid(2, n)):
        tab = alg.tables[1]
        a = kernels.idempotent_powers_numpy(tab)
        b = kernels.idempotent_powers_numba(tab)
        assert np.array_equal(a, b)
        assert all(tab[e, e] == e for e in a)


def test_idempotent_power_brute_force():
    from algvar.finalg import monoids_of_order

    for alg in monoids_of_order(3):
        tab = alg.tables[1]
        got = kernels.idempotent_powers(tab)
        for x in range(3):
            p = x
            seen = []
            while True:
                if tab[p, p] == p:
                    break
                seen.append(p)
                p = tab[p, x]
            assert got[x] == p


@pytest.mark.parametrize("n,unit,count", [(1, True, 1), (2, True, 2), (3, True, 11), (4, True, 156),
                                          (1, False, 1), (2, False, 8), (3, False, 113)])
def test_associative_table_counts(n, unit, count):
    a = kernels.associative_tables_numba(n, unit)
    assert len(a) == count
    if n <= 3:
        b = kernels.associative_tables_numpy(n, unit)
        assert np.array_equal(a, b)


def test_associative_tables_are_associative_and_sorted():
    tabs = kernels.associative_tables(3, False)
    flat = [tuple(t.reshape(-1)) for t in tabs]
    assert flat == sorted(flat)
    for t in tabs:
        assert np.array_equal(t[t, :][np.arange(3)[:, None, None], np.arange(3)[None, :, None]],
                              t[t, :][np.arange(3)[:, None, None], np.arange(3)[None, :, None]])
        for x in range(3):
            for y in range(3):
                for z in range(3):
                    assert t[t[x, y], z] == t[x, t[y, z]]


def test_backend_env_flag_selects_numpy():
    code = "from algvar import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, ALGVAR_KERNELS="numpy")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


def test_backend_env_flag_rejects_garbage():
    code = "import algvar.kernels"
    env = dict(os.environ, ALGVAR_KERNELS="fortran")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.returncode != 0
    assert "ALGVAR_KERNELS" in out.stderr
