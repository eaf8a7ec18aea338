import itertools
import os
import random

import numpy as np
import pytest

from algvar import formats
from algvar.finalg import FiniteAlgebra, monoid_signature

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def fixture_path(name):
    return os.path.join(FIXTURES, name)


@pytest.fixture
def fixtures_dir():
    return FIXTURES


_ACCEPTANCE = {}


@pytest.fixture
def acceptance_log():
    """Collects one verdict line per acceptance criterion for the session summary."""
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[key])


@pytest.fixture
def ab_star_dfa():
    return formats.parse_input(fixture_path("ab_star.dfa"))


# ---------------------------------------------------------------------------
# brute-force oracles shared by several test modules


def words(alphabet, n):
    for k in range(n + 1):
        yield from itertools.product(alphabet, repeat=k)


def word_congruence_classes(accepts, alphabet, max_len=6, ctx_len=3):
    """Classes of the two-sided syntactic congruence on words of length <= max_len,
    separated by contexts (x, y) with |x|, |y| <= ctx_len."""
    ctx = list(words(alphabet, ctx_len))
    sig = {}
    for u in words(alphabet, max_len):
        key = tuple(accepts(x + u + y) for x in ctx for y in ctx)
        sig.setdefault(key, u)
    return len(sig)


def dfa_congruence_classes(dfa, max_len=6, ctx_len=3):
    """Same oracle for a DFA: runs are split at the context boundaries."""
    ctx = list(words(dfa.alphabet, ctx_len))

    def run(q, w):
        for a in w:
            q = int(dfa.delta[q, dfa.alphabet.index(a)])
        return q

    starts = sorted({run(dfa.initial, x) for x in ctx})
    x_start = [run(dfa.initial, x) for x in ctx]
    ends = {q: tuple(run(q, y) in dfa.finals for y in ctx) for q in range(len(dfa.states))}
    sig = set()
    for u in words(dfa.alphabet, max_len):
        after = {q: run(q, u) for q in starts}
        sig.add(tuple(ends[after[q]] for q in x_start))
    return len(sig)


def random_monoid(rng, n):
    """A random monoid of order n from the exhaustive enumeration (small n only)."""
    pool = _monoid_pool(n)
    return pool[rng.randrange(len(pool))]


_POOL = {}


def _monoid_pool(n):
    if n not in _POOL:
        from algvar.finalg import monoids_of_order

        _POOL[n] = list(monoids_of_order(n))
    return _POOL[n]


def transformation_monoid(maps):
    """Monoid generated by the given maps of {0..k-1}; (f*g) = first f, then g."""
    k = len(maps[0])
    ident = tuple(range(k))
    elems = [ident]
    index = {ident: 0}
    head = 0
    while head < len(elems):
        f = elems[head]
        for g in maps:
            h = tuple(g[x] for x in f)
            if h not in index:
                index[h] = len(elems)
                elems.append(h)
        head += 1
    n = len(elems)
    tab = np.empty((n, n), dtype=np.int64)
    for i, f in enumerate(elems):
        for j, g in enumerate(elems):
            tab[i, j] = index[tuple(g[x] for x in f)]
    alg = FiniteAlgebra(monoid_signature(), (n,), (np.array(0), tab))
    return alg, [index[tuple(g)] for g in maps]


def seeded(seed):
    return random.Random(seed)


def ramsey_oracle(prefix, period, tab, images, bound=8):
    """Lexicographically least cuts <= bound over all idempotent targets, by search on raw positions.

    A cut position extends to an infinite factorization iff a chain of
    ``len(prefix) + len(period) + 1`` e-blocks starts there: among the cuts
    past the prefix two share a residue mod the period, and the segment
    between them can be repeated forever.
    """
    p, q = len(prefix), len(period)
    n = tab.shape[0]
    span = (p + q) * (n + 1) + 1  # longest block ever needed
    depth = p + q + 1
    horizon = bound + (depth + 1) * span + 1
    x = [images[a] for a in prefix] + [images[period[(i - p) % q]] for i in range(p, horizon)]
    idem = sorted({e for e in range(n) if tab[e, e] == e})
    best = None
    for e in idem:
        memo = {}

        def chain(i, d):
            if d == 0:
                return True
            key = (i, d)
            if key in memo:
                return memo[key]
            v = None
            ok = False
            for j in range(i + 1, min(i + span, horizon - 1) + 1):
                a = x[j - 1]
                v = a if v is None else int(tab[v, a])
                if v == e and chain(j, d - 1):
                    ok = True
                    break
            memo[key] = ok
            return ok

        cuts = []
        pos = None
        for i in range(bound + 1):
            if chain(i, depth):
                pos = i
                break
        if pos is None:
            continue
        cuts.append(pos)
        while True:
            v = None
            nxt = None
            for j in range(pos + 1, bound + 1):
                a = x[j - 1]
                v = a if v is None else int(tab[v, a])
                if v == e and chain(j, depth):
                    nxt = j
                    break
            if nxt is None:
                break
            cuts.append(nxt)
            pos = nxt
        # a cut past the bound compares larger than any cut inside it
        key = tuple(cuts) + (bound + 1,)
        if best is None or key < best[0]:
            best = (key, e)
    return None if best is None else (best[0][:-1], best[1])
