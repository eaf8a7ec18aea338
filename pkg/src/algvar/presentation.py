"""Recognizers, unary presentations, syntactic algebras and reduction.

A presentation is stored as explicit maps on the recognizer's finite carrier
(the lifted operations), so every closure below is finite.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import kernels
from .finalg import (
    AlgebraError,
    Congruence,
    FiniteAlgebra,
    Morphism,
    StablePreorder,
    generated_subalgebra,
    identity_morphism,
    quotient_by,
)


class RecognizerError(ValueError):
    pass


# ---------------------------------------------------------------------------
# recognizers


@dataclass(frozen=True, eq=False)
class Recognizer:
    """Letter map into a finite algebra plus accepting subsets per sort.

    ``letters`` is a tuple of ``(name, sort)`` pairs; ``letter_map`` gives the
    element index of each letter in its sort.
    """

    algebra: FiniteAlgebra
    letters: tuple
    letter_map: tuple
    accept: tuple

    def __post_init__(self):
        alg = self.algebra
        letters = tuple((str(n), str(s)) for n, s in self.letters)
        if len({n for n, _ in letters}) != len(letters):
            raise RecognizerError("duplicate letter")
        lm = tuple(int(x) for x in self.letter_map)
        if len(lm) != len(letters):
            raise RecognizerError("one image per letter required")
        for (name, sort), x in zip(letters, lm):
            if not 0 <= x < alg.size(sort):
                raise RecognizerError(f"image of letter {name} is outside sort {sort}")
        acc = tuple(np.array(a, dtype=bool).reshape(-1) for a in self.accept)
        if tuple(a.size for a in acc) != alg.sizes:
            raise RecognizerError("accept sets do not match the carrier")
        if alg.ordered:
            for s, a in enumerate(acc):
                o = alg.order[s]
                lo, hi = np.nonzero(o)
                if (a[lo] & ~a[hi]).any():
                    raise RecognizerError(f"accept set on sort {alg.signature.sorts[s]} is not an up-set")
        for a in acc:
            a.setflags(write=False)
        object.__setattr__(self, "letters", letters)
        object.__setattr__(self, "letter_map", lm)
        object.__setattr__(self, "accept", acc)

    @property
    def alphabet(self):
        return tuple(n for n, _ in self.letters)

    @property
    def signature(self):
        return self.algebra.signature

    def letter(self, name):
        for (n, s), x in zip(self.letters, self.letter_map):
            if n == name:
                return self.algebra.signature.sort_index(s), x
        raise RecognizerError(f"unknown letter {name!r}")

    def generators(self):
        gens = [[] for _ in self.algebra.sizes]
        for (_, s), x in zip(self.letters, self.letter_map):
            gens[self.algebra.signature.sort_index(s)].append(x)
        return gens

    def is_generated(self):
        sub, _ = generated_subalgebra(self.algebra, self.generators())
        return sub.sizes == self.algebra.sizes

    def reachable(self):
        """Restriction to the subalgebra generated by the letters, with its inclusion."""
        sub, inc = generated_subalgebra(self.algebra, self.generators())
        back = [dict(zip(m.tolist(), range(m.size))) for m in inc.maps]
        lm = tuple(back[self.algebra.signature.sort_index(s)][x] for (_, s), x in zip(self.letters, self.letter_map))
        acc = tuple(a[m] for a, m in zip(self.accept, inc.maps))
        return Recognizer(sub, self.letters, lm, acc), inc

    def with_accept(self, accept):
        return Recognizer(self.algebra, self.letters, self.letter_map, accept)

    def with_algebra(self, algebra, letter_map=None, accept=None):
        return Recognizer(algebra, self.letters, self.letter_map if letter_map is None else letter_map,
                          self.accept if accept is None else accept)

    def accepted(self, sort, i):
        return bool(self.accept[self.algebra._si(sort)][i])

    def accept_key(self):
        return tuple(a.tobytes() for a in self.accept)

    def transport(self, e):
        """Push letter map and accept sets along a surjective morphism ``e``.

        Raises when the accept sets are not saturated by the kernel of ``e``.
        """
        alg = self.algebra
        lm = tuple(int(e.maps[alg.signature.sort_index(s)][x]) for (_, s), x in zip(self.letters, self.letter_map))
        acc = []
        for s, (a, m) in enumerate(zip(self.accept, e.maps)):
            n = e.target.sizes[s]
            pos = np.zeros(n, dtype=bool)
            neg = np.zeros(n, dtype=bool)
            pos[m[a]] = True
            neg[m[~a]] = True
            if (pos & neg).any():
                raise RecognizerError("the quotient does not respect the accepting set")
            acc.append(pos)
        return Recognizer(e.target, self.letters, lm, tuple(acc))

    def __repr__(self):
        return f"Recognizer({self.algebra!r}, letters={self.alphabet})"


def flip_order(rec):
    """Dual order with complemented accept sets (recognizes the complement)."""
    alg = rec.algebra
    if not alg.ordered:
        raise RecognizerError("flip_order needs an ordered recognizer")
    dual = FiniteAlgebra(alg.signature, alg.sizes, alg.tables, tuple(o.T for o in alg.order), alg.labels)
    return Recognizer(dual, rec.letters, rec.letter_map, tuple(~a for a in rec.accept))


# ---------------------------------------------------------------------------
# unary operations and presentations


@dataclass(frozen=True, eq=False)
class UnaryOp:
    source: int
    target: int
    map: np.ndarray
    label: str = ""

    def __post_init__(self):
        m = np.array(self.map, dtype=np.int64).reshape(-1)
        m.setflags(write=False)
        object.__setattr__(self, "map", m)

    def key(self):
        return (self.source, self.target, self.map.tobytes())

    def __call__(self, x):
        return int(self.map[x])


@dataclass(frozen=True, eq=False)
class Presentation:
    algebra: FiniteAlgebra
    ops: tuple
    closed: bool = False

    def __post_init__(self):
        for u in self.ops:
            if u.map.size != self.algebra.sizes[u.source]:
                raise AlgebraError(f"unary op {u.label} does not fit the carrier")
            if u.map.size and u.map.max() >= self.algebra.sizes[u.target]:
                raise AlgebraError(f"unary op {u.label} leaves its target sort")
        object.__setattr__(self, "ops", tuple(self.ops))

    def __len__(self):
        return len(self.ops)

    def between(self, source, target):
        s = self.algebra._si(source)
        t = self.algebra._si(target)
        return [u for u in self.ops if u.source == s and u.target == t]

    def is_closed(self):
        keys = {u.key() for u in self.ops}
        for s, n in enumerate(self.algebra.sizes):
            if (s, s, np.arange(n, dtype=np.int64).tobytes()) not in keys:
                return False
        for f in self.ops:
            for g in self.ops:
                if g.source == f.target and (f.source, g.target, g.map[f.map].tobytes()) not in keys:
                    return False
        return True

    def successor_table(self):
        """Global successor table for the refinement kernels."""
        alg = self.algebra
        offs = alg.offsets()
        per_sort = [[u for u in self.ops if u.source == s] for s in range(len(alg.sizes))]
        width = max((len(p) for p in per_sort), default=0)
        n = alg.total_size()
        succ = np.full((n, max(width, 1)), -1, dtype=np.int64)
        for s, ops in enumerate(per_sort):
            lo = offs[s]
            for k, u in enumerate(ops):
                succ[lo:lo + alg.sizes[s], k] = u.map + offs[u.target]
        return succ


def _dedup(ops):
    seen = set()
    out = []
    for u in ops:
        if u.key() not in seen:
            seen.add(u.key())
            out.append(u)
    return out


def elementary_translations(rec):
    """Every map ``a -> γ(c1, .., a, .., cn)`` for each op, position and context tuple."""
    alg = rec.algebra if isinstance(rec, Recognizer) else rec
    sig = alg.signature
    ops = []
    for k, op in enumerate(sig.ops):
        tab = alg.tables[k]
        t = sig.sort_index(op.output)
        for pos, sname in enumerate(op.inputs):
            s = sig.sort_index(sname)
            moved = np.moveaxis(tab, pos, -1)
            others = [sig.sort_index(x) for i, x in enumerate(op.inputs) if i != pos]
            for ctx in itertools.product(*[range(alg.sizes[o]) for o in others]):
                args = [alg.label(o, c) for o, c in zip(others, ctx)]
                args.insert(pos, "_")
                ops.append(UnaryOp(s, t, moved[ctx], f"{op.name}({','.join(args)})"))
    return Presentation(alg, tuple(_dedup(ops)))


def omega_presentation(rec):
    """Left/right multiplications, mixed products, omega power and the left action on omega."""
    alg = rec.algebra if isinstance(rec, Recognizer) else rec
    sig = alg.signature
    try:
        p = sig.sort_index("plus")
        w = sig.sort_index("omega")
        prod = alg.table("*", ("plus", "plus"))
        mix = alg.table("*", ("plus", "omega"))
        power = alg.table("pow", ("plus",))
    except AlgebraError as exc:
        raise AlgebraError(f"not a Wilke-form omega-semigroup: {exc}") from None
    np_, nw = alg.sizes[p], alg.sizes[w]
    ops = [UnaryOp(p, p, np.arange(np_), "1*_"), UnaryOp(w, w, np.arange(nw), "1*_")]
    for y in range(np_):
        ops.append(UnaryOp(p, p, prod[y, :], f"{alg.label(p, y)}*_"))
        ops.append(UnaryOp(p, p, prod[:, y], f"_*{alg.label(p, y)}"))
    for z in range(nw):
        ops.append(UnaryOp(p, w, mix[:, z], f"_*{alg.label(w, z)}"))
    ops.append(UnaryOp(p, w, power, "pow(_)"))
    for y in range(np_):
        ops.append(UnaryOp(w, w, mix[y, :], f"{alg.label(p, y)}*_"))
    return Presentation(alg, tuple(_dedup(ops)))


def composition_closure(p, limit=None):
    """Least superset of ``p`` closed under composition and containing identities."""
    alg = p.algebra
    found = {}
    queue = []
    for s, n in enumerate(alg.sizes):
        u = UnaryOp(s, s, np.arange(n), f"id[{alg.signature.sorts[s]}]")
        found[u.key()] = u
        queue.append(u)
    gens = list(p.ops)
    for g in gens:
        if g.key() not in found:
            found[g.key()] = g
            queue.append(g)
    head = 0
    while head < len(queue):
        f = queue[head]
        head += 1
        for g in gens:
            if g.source != f.target:
                continue
            h = UnaryOp(f.source, g.target, g.map[f.map], f"{g.label}.{f.label}")
            if h.key() not in found:
                found[h.key()] = h
                queue.append(h)
                if limit is not None and len(found) > limit:
                    raise AlgebraError(f"composition closure exceeds {limit} maps")
    return Presentation(alg, tuple(queue), closed=True)


def lift_unary(e, u):
    """The op ``u_B`` with ``e ∘ u = u_B ∘ e`` (None when u breaks the kernel of e)."""
    src = e.maps[u.source]
    tgt = e.maps[u.target]
    n = e.target.sizes[u.source]
    lifted = np.full(n, -1, dtype=np.int64)
    lifted[src] = tgt[u.map]
    if (lifted < 0).any():
        raise AlgebraError("lift_unary needs a surjective morphism")
    if not np.array_equal(lifted[src], tgt[u.map]):
        return None
    return UnaryOp(u.source, u.target, lifted, u.label)


# ---------------------------------------------------------------------------
# syntactic refinement


def _split_global(alg, labels):
    offs = alg.offsets()
    return tuple(labels[offs[s]:offs[s + 1]] for s in range(len(alg.sizes)))


def _split_matrix(alg, rel):
    offs = alg.offsets()
    return tuple(rel[offs[s]:offs[s + 1], offs[s]:offs[s + 1]] for s in range(len(alg.sizes)))


def _sort_of_global(alg):
    return np.repeat(np.arange(len(alg.sizes)), alg.sizes)


def refine(p, init_labels=None, init_relation=None):
    """Coarsest p-stable congruence below ``init_labels`` (or preorder below ``init_relation``)."""
    alg = p.algebra
    n = alg.total_size()
    succ = p.successor_table()
    if init_relation is not None:
        if n == 0:
            return StablePreorder(alg, tuple(np.zeros((0, 0), dtype=bool) for _ in alg.sizes))
        rel = kernels.refine_preorder(np.asarray(init_relation, dtype=bool), succ)
        return StablePreorder(alg, _split_matrix(alg, rel))
    if n == 0:
        return Congruence(alg, tuple(np.zeros(0, dtype=np.int64) for _ in alg.sizes))
    labels = kernels.refine_partition(np.asarray(init_labels, dtype=np.int64), succ)
    return Congruence(alg, _split_global(alg, labels))


def syntactic_refinement(rec, p=None):
    """Syntactic congruence (or stable preorder, for ordered algebras) of ``rec``.

    Elements are identified when every composite of ``p``'s operations (the
    identity included) sends them to equally accepted elements; ordered
    algebras relate ``a ⪯ a'`` when acceptance of ``u(a)`` implies acceptance of
    ``u(a')``.  Refining against the generators already yields the closure's
    fixpoint, so ``p`` does not need to be composition-closed.
    """
    alg = rec.algebra
    if p is None:
        p = elementary_translations(alg)
    if p.algebra is not alg and p.algebra.sizes != alg.sizes:
        raise AlgebraError("presentation lives on a different algebra")
    acc = np.concatenate(rec.accept) if rec.accept else np.zeros(0, dtype=bool)
    sorts = _sort_of_global(alg)
    if alg.ordered:
        same = sorts[:, None] == sorts[None, :]
        init = same & (~acc[:, None] | acc[None, :])
        return refine(p, init_relation=init)
    return refine(p, init_labels=sorts * 2 + acc)


def syntactic_algebra(rec, presentation=elementary_translations):
    """Syntactic recognizer of ``rec``'s language and the projection onto it.

    ``presentation`` is a Presentation on ``rec.algebra`` or a factory taking an
    algebra.  The recognizer is first restricted to the letter-generated part;
    the projection's source is that restricted algebra.
    """
    if isinstance(presentation, Presentation):
        if not rec.is_generated():
            raise RecognizerError("restrict the recognizer to its generated part before passing a presentation")
        sub = rec
        p = presentation
    else:
        sub, _ = rec.reachable()
        p = presentation(sub.algebra)
    rel = syntactic_refinement(sub, p)
    _, proj = quotient_by(sub.algebra, rel)
    return sub.transport(proj), proj


# ---------------------------------------------------------------------------
# reduction


def _s0_indices(alg, s0):
    if isinstance(s0, (str, int)):
        s0 = [s0]
    idx = sorted({alg._si(s) for s in s0})
    if not idx:
        raise AlgebraError("S0 must be nonempty")
    return idx


def reduction_relation(alg, p, s0, e=None):
    """``≡_e`` (or ``⪯_e``): related iff every composite into an S0 sort agrees under ``e``."""
    s0 = _s0_indices(alg, s0)
    if e is None:
        e = identity_morphism(alg)
    sorts = _sort_of_global(alg)
    if alg.ordered or e.target.ordered:
        n = alg.total_size()
        init = sorts[:, None] == sorts[None, :]
        offs = alg.offsets()
        init = init.copy()
        for s in s0:
            m = e.maps[s]
            lo, hi = offs[s], offs[s + 1]
            init[lo:hi, lo:hi] = e.target.order_matrix(s)[np.ix_(m, m)]
        if n == 0:
            return refine(p, init_relation=np.zeros((0, 0), dtype=bool))
        return refine(p, init_relation=init)
    labels = []
    base = 0
    for s, n in enumerate(alg.sizes):
        if s in s0:
            labels.append(base + e.maps[s])
            base += e.target.sizes[s]
        else:
            labels.append(np.full(n, base, dtype=np.int64))
            base += 1
    return refine(p, init_labels=np.concatenate(labels) if labels else np.zeros(0, dtype=np.int64))


def reduce_quotient(rec, p=None, s0=None, e=None):
    """Reduced quotient ``e_R`` of ``rec`` with respect to the sorts ``s0``.

    Returns ``(reduced recognizer, projection)``.  Acceptance outside S0 is
    dropped (reduced languages are empty there); on S0 it must be saturated
    by the kernel of ``e``.
    """
    alg = rec.algebra
    if p is None:
        p = elementary_translations(alg)
    if s0 is None:
        s0 = alg.signature.sorts
    rel = reduction_relation(alg, p, s0, e)
    _, proj = quotient_by(alg, rel)
    keep = set(_s0_indices(alg, s0))
    acc = tuple(a if s in keep else np.zeros_like(a) for s, a in enumerate(rec.accept))
    return rec.with_accept(acc).transport(proj), proj


def downarrow_kernel(alg, s0, e=None):
    """Kernel of ``e_↓``: ``e`` on S0 sorts, everything identified elsewhere."""
    s0 = _s0_indices(alg, s0)
    if e is None:
        e = identity_morphism(alg)
    if alg.ordered:
        rel = []
        for s, n in enumerate(alg.sizes):
            if s in s0:
                m = e.maps[s]
                rel.append(e.target.order_matrix(s)[np.ix_(m, m)])
            else:
                rel.append(np.ones((n, n), dtype=bool))
        return StablePreorder(alg, tuple(rel))
    return Congruence(alg, tuple(e.maps[s] if s in s0 else np.zeros(n, dtype=np.int64)
                                 for s, n in enumerate(alg.sizes)))


@dataclass(frozen=True)
class ReducedReport:
    reduced: bool
    separators: dict
    unseparated: tuple

    def __bool__(self):
        return self.reduced


def is_reduced(rec, p=None, s0=None):
    """Check that distinct elements outside S0 are separated by composites into S0.

    ``separators`` maps ``(sort, a, a')`` to the label sequence of a separating
    composite (applied left to right); ``unseparated`` lists the failures.
    """
    alg = rec.algebra if isinstance(rec, Recognizer) else rec
    if p is None:
        p = elementary_translations(alg)
    if s0 is None:
        s0 = alg.signature.sorts
    s0i = _s0_indices(alg, s0)
    nsorts = len(alg.sizes)
    ordered = alg.ordered
    # dist[s][a, b]: some composite into S0 sends (a, b) to a non-related pair
    dist = []
    how = []
    for s, n in enumerate(alg.sizes):
        if s in s0i:
            d = ~alg.order_matrix(s) if ordered else ~np.eye(n, dtype=bool)
        else:
            d = np.zeros((n, n), dtype=bool)
        dist.append(d.copy())
        how.append(np.full((n, n), -1, dtype=np.int64))
    ops = list(p.ops)
    changed = True
    while changed:
        changed = False
        for k, u in enumerate(ops):
            s, t = u.source, u.target
            pulled = dist[t][np.ix_(u.map, u.map)]
            fresh = pulled & ~dist[s]
            if fresh.any():
                dist[s] |= fresh
                how[s][fresh] = k
                changed = True

    def path(s, a, b):
        labels = []
        while how[s][a, b] >= 0:
            u = ops[how[s][a, b]]
            labels.append(u.label)
            s, a, b = u.target, int(u.map[a]), int(u.map[b])
        return tuple(labels)

    separators = {}
    failures = []
    for s in range(nsorts):
        if s in s0i:
            continue
        n = alg.sizes[s]
        for a in range(n):
            for b in range(n):
                if a == b or (ordered and alg.order[s][a, b]):
                    continue
                if not ordered and b < a:
                    continue
                if dist[s][a, b]:
                    separators[(alg.signature.sorts[s], a, b)] = path(s, a, b)
                else:
                    failures.append((alg.signature.sorts[s], a, b))
    return ReducedReport(not failures, separators, tuple(failures))


def quotient_recognizer(rec, c):
    """Quotient of ``rec`` by a congruence/preorder plus whether it still recognizes the language."""
    _, proj = quotient_by(rec.algebra, c)
    try:
        return rec.transport(proj), proj
    except RecognizerError:
        return None, proj


def is_stable_under(p, relation):
    """Whether a congruence or preorder on ``p.algebra`` is stable under every op of ``p``."""
    rels = relation.relations()
    for u in p.ops:
        src, tgt = rels[u.source], rels[u.target]
        lo, hi = np.nonzero(src)
        if not tgt[u.map[lo], u.map[hi]].all():
            return False
    return True


# ---------------------------------------------------------------------------
# joint recognizers


def joint_recognizer(parts, letters):
    """Letter-generated subalgebra of a product, built by closure over tuples.

    ``parts`` is a sequence of ``(algebra, letter_map)`` pairs sharing the
    signature and the ``letters`` (``(name, sort)`` pairs).  Returns a
    recognizer with empty accept sets and the projections onto each part.
    The full product is never materialized.
    """
    parts = list(parts)
    if not parts:
        raise RecognizerError("no recognizers to combine")
    sig = parts[0][0].signature
    for alg, _ in parts:
        if alg.signature.sorts != sig.sorts or alg.signature.ops != sig.ops:
            raise RecognizerError("recognizers have different signatures")
    letters = tuple((str(n), str(s)) for n, s in letters)
    nsorts = len(sig.sorts)
    k = len(parts)
    elems = [[] for _ in range(nsorts)]
    index = [{} for _ in range(nsorts)]

    def add(s, tup):
        if tup not in index[s]:
            index[s][tup] = len(elems[s])
            elems[s].append(tup)
        return index[s][tup]

    for k_op, op in enumerate(sig.ops):
        if op.arity == 0:
            add(sig.sort_index(op.output), tuple(int(a.tables[k_op][()]) for a, _ in parts))
    letter_map = []
    for j, (_, sname) in enumerate(letters):
        s = sig.sort_index(sname)
        letter_map.append(add(s, tuple(int(lm[j]) for _, lm in parts)))
    changed = True
    while changed:
        changed = False
        for k_op, op in enumerate(sig.ops):
            if op.arity == 0:
                continue
            ins = [sig.sort_index(x) for x in op.inputs]
            out = sig.sort_index(op.output)
            if any(not elems[s] for s in ins):
                continue
            arrs = [np.array(elems[s], dtype=np.int64).reshape(-1, k) for s in ins]
            grid = np.indices(tuple(a.shape[0] for a in arrs)).reshape(len(ins), -1)
            comps = np.empty((grid.shape[1], k), dtype=np.int64)
            for f, (alg, _) in enumerate(parts):
                comps[:, f] = alg.tables[k_op][tuple(arrs[p][grid[p], f] for p in range(len(ins)))]
            before = len(elems[out])
            for row in map(tuple, comps.tolist()):
                add(out, row)
            changed |= len(elems[out]) != before
    sizes = tuple(len(e) for e in elems)
    coords = [np.array(e, dtype=np.int64).reshape(-1, k) for e in elems]
    tables = []
    for k_op, op in enumerate(sig.ops):
        out = sig.sort_index(op.output)
        if op.arity == 0:
            tables.append(np.array(index[out][tuple(int(a.tables[k_op][()]) for a, _ in parts)]))
            continue
        ins = [sig.sort_index(x) for x in op.inputs]
        shape = tuple(sizes[s] for s in ins)
        if int(np.prod(shape)) == 0:
            tables.append(np.zeros(shape, dtype=np.int64))
            continue
        grid = np.indices(shape).reshape(len(ins), -1)
        comps = np.empty((grid.shape[1], k), dtype=np.int64)
        for f, (alg, _) in enumerate(parts):
            comps[:, f] = alg.tables[k_op][tuple(coords[s][grid[p], f] for p, s in enumerate(ins))]
        tables.append(np.array([index[out][row] for row in map(tuple, comps.tolist())],
                               dtype=np.int64).reshape(shape))
    order = None
    if all(alg.ordered for alg, _ in parts):
        order = []
        for s in range(nsorts):
            o = np.ones((sizes[s], sizes[s]), dtype=bool)
            for f, (alg, _) in enumerate(parts):
                c = coords[s][:, f]
                o &= alg.order[s][np.ix_(c, c)]
            order.append(o)
        order = tuple(order)
    labels = []
    for s in range(nsorts):
        if k == 1:
            labels.append(tuple(parts[0][0].label(s, int(t[0])) for t in elems[s]))
        else:
            labels.append(tuple("(" + ",".join(alg.label(s, int(x)) for (alg, _), x in zip(parts, t)) + ")"
                                for t in elems[s]))
    sig_out = sig if order is not None else sig.with_order(False)
    alg = FiniteAlgebra(sig_out, sizes, tuple(tables), order, tuple(labels))
    rec = Recognizer(alg, letters, tuple(letter_map), tuple(np.zeros(n, dtype=bool) for n in sizes))
    projections = []
    for f, (palg, _) in enumerate(parts):
        maps = tuple(coords[s][:, f].copy() for s in range(nsorts))
        projections.append(Morphism(alg, palg, maps))
    return rec, projections
