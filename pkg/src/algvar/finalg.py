"""Multi-sorted finite algebras given by operation tables.

Carriers are index ranges ``0..n-1`` per sort; an element is the pair
``(sort, index)``.  Operation tables are numpy integer arrays with one axis
per argument (a constant has a 0-d table).  Ordered algebras carry one
boolean matrix per sort with ``order[s][i, j]`` meaning ``i <= j``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import kernels
from .terms import Law, Power, Var, declared_sorts, parse_law


class AlgebraError(ValueError):
    """Malformed signature, table or order."""


class StabilityError(AlgebraError):
    """A relation handed to ``quotient_by`` is not compatible with the operations."""


class LawError(AlgebraError):
    """A law does not fit the signature (unknown op, sort mismatch, unbound variable)."""


@dataclass(frozen=True)
class OpSymbol:
    name: str
    inputs: tuple
    output: str

    @property
    def arity(self):
        return len(self.inputs)


@dataclass(frozen=True)
class Signature:
    sorts: tuple
    ops: tuple
    ordered: bool = False

    def __post_init__(self):
        object.__setattr__(self, "sorts", tuple(self.sorts))
        object.__setattr__(self, "ops", tuple(OpSymbol(o.name, tuple(o.inputs), o.output) if isinstance(o, OpSymbol)
                                              else OpSymbol(o[0], tuple(o[1]), o[2]) for o in self.ops))
        if len(set(self.sorts)) != len(self.sorts):
            raise AlgebraError(f"duplicate sort names in {self.sorts}")
        seen = set()
        for op in self.ops:
            for s in op.inputs + (op.output,):
                if s not in self.sorts:
                    raise AlgebraError(f"operation {op.name} uses undeclared sort {s!r}")
            key = (op.name, op.inputs)
            if key in seen:
                raise AlgebraError(f"operation {op.name}{op.inputs} declared twice")
            seen.add(key)

    def sort_index(self, sort):
        try:
            return self.sorts.index(sort)
        except ValueError:
            raise AlgebraError(f"unknown sort {sort!r}") from None

    def resolve(self, name, arg_sorts):
        """Index of the operation ``name`` taking ``arg_sorts``."""
        arg_sorts = tuple(arg_sorts)
        for k, op in enumerate(self.ops):
            if op.name == name and op.inputs == arg_sorts:
                return k
        if not any(op.name == name for op in self.ops):
            raise LawError(f"undeclared operation {name!r}")
        raise LawError(f"operation {name!r} is not declared for argument sorts {arg_sorts}")

    def constants(self):
        return tuple(op.name for op in self.ops if op.arity == 0)

    def with_order(self, ordered=True):
        return Signature(self.sorts, self.ops, ordered)


def monoid_signature(ordered=False):
    return Signature(("m",), (OpSymbol("1", (), "m"), OpSymbol("*", ("m", "m"), "m")), ordered)


def semigroup_signature(ordered=False):
    return Signature(("m",), (OpSymbol("*", ("m", "m"), "m"),), ordered)


@dataclass(frozen=True, eq=False)
class FiniteAlgebra:
    signature: Signature
    sizes: tuple
    tables: tuple
    order: tuple | None = None
    labels: tuple | None = None

    def __post_init__(self):
        sig = self.signature
        sizes = tuple(int(n) for n in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        if len(sizes) != len(sig.sorts):
            raise AlgebraError("one carrier size per sort required")
        if len(self.tables) != len(sig.ops):
            raise AlgebraError("one table per operation required")
        tables = []
        for op, tab in zip(sig.ops, self.tables):
            tab = np.array(tab, dtype=np.int64)
            shape = tuple(sizes[sig.sort_index(s)] for s in op.inputs)
            if tab.shape != shape:
                raise AlgebraError(f"table of {op.name} has shape {tab.shape}, expected {shape}")
            out_n = sizes[sig.sort_index(op.output)]
            if tab.size and (tab.min() < 0 or tab.max() >= out_n):
                raise AlgebraError(f"table of {op.name} leaves the carrier of sort {op.output}")
            tab.setflags(write=False)
            tables.append(tab)
        object.__setattr__(self, "tables", tuple(tables))
        if sig.ordered:
            if self.order is None:
                order = tuple(np.eye(n, dtype=bool) for n in sizes)
            else:
                order = tuple(np.array(o, dtype=bool) for o in self.order)
            for s, (n, o) in enumerate(zip(sizes, order)):
                if o.shape != (n, n):
                    raise AlgebraError(f"order on sort {sig.sorts[s]} has wrong shape")
                if not is_partial_order(o):
                    raise AlgebraError(f"order on sort {sig.sorts[s]} is not a partial order")
                o.setflags(write=False)
            object.__setattr__(self, "order", order)
            bad = self.monotonicity_violation()
            if bad is not None:
                raise AlgebraError(f"operation {bad} is not monotone")
        elif self.order is not None:
            raise AlgebraError("order given for an unordered signature")
        if self.labels is not None:
            labels = tuple(tuple(str(x) for x in ls) for ls in self.labels)
            for n, ls in zip(sizes, labels):
                if len(ls) != n or len(set(ls)) != n:
                    raise AlgebraError("labels must be distinct and one per element")
            object.__setattr__(self, "labels", labels)

    # -- basic access -------------------------------------------------------

    @property
    def ordered(self):
        return self.signature.ordered

    def size(self, sort):
        return self.sizes[self._si(sort)]

    def _si(self, sort):
        return sort if isinstance(sort, int) else self.signature.sort_index(sort)

    def table(self, name, arg_sorts=None):
        sig = self.signature
        if arg_sorts is None:
            matches = [k for k, op in enumerate(sig.ops) if op.name == name]
            if len(matches) != 1:
                raise AlgebraError(f"operation name {name!r} is ambiguous or undeclared; pass arg_sorts")
            return self.tables[matches[0]]
        return self.tables[sig.resolve(name, arg_sorts)]

    def leq(self, sort, i, j):
        s = self._si(sort)
        if not self.ordered:
            return i == j
        return bool(self.order[s][i, j])

    def order_matrix(self, sort):
        s = self._si(sort)
        if self.ordered:
            return self.order[s]
        return np.eye(self.sizes[s], dtype=bool)

    def label(self, sort, i):
        s = self._si(sort)
        if self.labels is not None:
            return self.labels[s][i]
        return f"s{s}#{i}"

    def element_name(self, sort, i):
        """Canonical ``s<sort>#<index>`` name, with the user label when there is one."""
        s = self._si(sort)
        canon = f"s{s}#{i}"
        if self.labels is not None and self.labels[s][i] != canon:
            return f"{canon}({self.labels[s][i]})"
        return canon

    def index_of(self, sort, label):
        s = self._si(sort)
        if self.labels is not None and label in self.labels[s]:
            return self.labels[s].index(label)
        if isinstance(label, str) and label.startswith(f"s{s}#"):
            return int(label.split("#", 1)[1])
        raise AlgebraError(f"no element {label!r} in sort {self.signature.sorts[s]}")

    def offsets(self):
        return np.concatenate([[0], np.cumsum(self.sizes)]).astype(np.int64)

    def total_size(self):
        return int(sum(self.sizes))

    def monotonicity_violation(self):
        if not self.ordered:
            return None
        sig = self.signature
        for op, tab in zip(sig.ops, self.tables):
            out = self.order[sig.sort_index(op.output)]
            for pos, s in enumerate(op.inputs):
                o = self.order[sig.sort_index(s)]
                lo, hi = np.nonzero(o)
                moved = np.moveaxis(tab, pos, 0)
                if moved.size and not out[moved[lo], moved[hi]].all():
                    return op.name
        return None

    def is_ordered_monotone(self):
        return self.monotonicity_violation() is None

    def with_labels(self, labels):
        return FiniteAlgebra(self.signature, self.sizes, self.tables, self.order, labels)

    def as_ordered(self, order=None):
        """Same algebra in the ordered regime (discrete order by default)."""
        if self.ordered and order is None:
            return self
        return FiniteAlgebra(self.signature.with_order(True), self.sizes, self.tables, order, self.labels)

    def as_unordered(self):
        if not self.ordered:
            return self
        return FiniteAlgebra(self.signature.with_order(False), self.sizes, self.tables, None, self.labels)

    def identical(self, other):
        """Equal signature, tables, order and labels (no renaming)."""
        if self.signature != other.signature or self.sizes != other.sizes:
            return False
        if any(not np.array_equal(a, b) for a, b in zip(self.tables, other.tables)):
            return False
        if self.ordered and any(not np.array_equal(a, b) for a, b in zip(self.order, other.order)):
            return False
        return self.labels == other.labels

    def __repr__(self):
        parts = ", ".join(f"{s}:{n}" for s, n in zip(self.signature.sorts, self.sizes))
        return f"FiniteAlgebra({parts}{', ordered' if self.ordered else ''})"


def is_partial_order(mat):
    mat = np.asarray(mat, dtype=bool)
    n = mat.shape[0]
    if not mat.diagonal().all():
        return False
    if (mat & mat.T & ~np.eye(n, dtype=bool)).any():
        return False
    return is_transitive(mat)


def is_transitive(mat):
    m = mat.astype(np.int64)
    return not ((m @ m > 0) & ~mat).any()


def transitive_closure(mat):
    mat = np.array(mat, dtype=bool)
    n = mat.shape[0]
    for k in range(n):
        mat |= mat[:, k:k + 1] & mat[k:k + 1, :]
    return mat


# ---------------------------------------------------------------------------
# morphisms


@dataclass(frozen=True, eq=False)
class Morphism:
    source: FiniteAlgebra
    target: FiniteAlgebra
    maps: tuple

    def __post_init__(self):
        maps = tuple(np.array(m, dtype=np.int64).reshape(-1) for m in self.maps)
        if len(maps) != len(self.source.sizes):
            raise AlgebraError("one map per sort required")
        for s, m in enumerate(maps):
            if m.shape[0] != self.source.sizes[s]:
                raise AlgebraError(f"map on sort {s} has the wrong length")
            if m.size and (m.min() < 0 or m.max() >= self.target.sizes[s]):
                raise AlgebraError(f"map on sort {s} leaves the target carrier")
            m.setflags(write=False)
        object.__setattr__(self, "maps", maps)

    def __call__(self, sort, i):
        s = self.source._si(sort)
        return int(self.maps[s][i])

    def is_homomorphism(self):
        return homomorphism_violation(self.source, self.target, self.maps) is None

    def is_surjective(self):
        return all(np.unique(m).size == n for m, n in zip(self.maps, self.target.sizes))

    def is_injective(self):
        return all(np.unique(m).size == m.size for m in self.maps)

    def is_monotone(self):
        if not self.source.ordered:
            return True
        for s, m in enumerate(self.maps):
            lo, hi = np.nonzero(self.source.order[s])
            if not self.target.order_matrix(s)[m[lo], m[hi]].all():
                return False
        return True

    def is_order_reflecting(self):
        for s, m in enumerate(self.maps):
            tgt = self.target.order_matrix(s)[np.ix_(m, m)]
            if (tgt & ~self.source.order_matrix(s)).any():
                return False
        return True

    def compose(self, other):
        """``other ∘ self`` (first self, then other)."""
        if other.source is not self.target and other.source.sizes != self.target.sizes:
            raise AlgebraError("morphisms do not compose")
        return Morphism(self.source, other.target, tuple(o[m] for m, o in zip(self.maps, other.maps)))

    def kernel(self):
        """Kernel congruence (unordered) or ordered kernel (ordered source)."""
        if self.source.ordered:
            rel = tuple(self.target.order_matrix(s)[np.ix_(m, m)] for s, m in enumerate(self.maps))
            return StablePreorder(self.source, rel)
        return Congruence(self.source, self.maps)


def homomorphism_violation(src, tgt, maps):
    """First operation whose table does not commute with ``maps``, else None."""
    sig = src.signature
    for k, op in enumerate(sig.ops):
        out = sig.sort_index(op.output)
        tab_src = src.tables[k]
        tab_tgt = tgt.tables[k]
        if op.arity == 0:
            if maps[out][tab_src[()]] != tab_tgt[()]:
                return op.name
            continue
        if tab_src.size == 0:
            continue
        idx = np.indices(tab_src.shape).reshape(op.arity, -1)
        lhs = maps[out][tab_src.reshape(-1)]
        mapped = tuple(maps[sig.sort_index(s)][idx[p]] for p, s in enumerate(op.inputs))
        rhs = tab_tgt[mapped]
        if not np.array_equal(lhs, rhs):
            return op.name
    return None


def identity_morphism(alg):
    return Morphism(alg, alg, tuple(np.arange(n) for n in alg.sizes))


# ---------------------------------------------------------------------------
# congruences and stable preorders


def _canonical_labels(labels):
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if labels.size == 0:
        return labels.copy()
    return kernels.relabel_rows_numpy(labels.reshape(-1, 1))


@dataclass(frozen=True, eq=False)
class Congruence:
    """Sorted partition, stored as canonical block labels (numbered by first occurrence)."""

    base: FiniteAlgebra
    partition: tuple

    def __post_init__(self):
        parts = tuple(_canonical_labels(p) for p in self.partition)
        if tuple(p.size for p in parts) != self.base.sizes:
            raise AlgebraError("partition does not match the carrier sizes")
        for p in parts:
            p.setflags(write=False)
        object.__setattr__(self, "partition", parts)

    def key(self):
        return tuple(p.tobytes() for p in self.partition)

    def __eq__(self, other):
        return isinstance(other, Congruence) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def block_counts(self):
        return tuple(int(p.max()) + 1 if p.size else 0 for p in self.partition)

    def related(self, sort, i, j):
        s = self.base._si(sort)
        return self.partition[s][i] == self.partition[s][j]

    def relation(self, s):
        p = self.partition[s]
        return p[:, None] == p[None, :]

    def relations(self):
        return tuple(self.relation(s) for s in range(len(self.partition)))

    def is_stable(self):
        return stability_violation(self.base, self.relations()) is None

    def contains(self, other):
        """``other ⊆ self`` as relations."""
        return all((b & ~a).sum() == 0 for a, b in zip(self.relations(), other.relations()))

    def meet(self, other):
        parts = []
        for a, b in zip(self.partition, other.partition):
            parts.append(kernels.relabel_rows_numpy(np.stack([a, b], axis=1)) if a.size else a)
        return Congruence(self.base, tuple(parts))

    @classmethod
    def identity(cls, alg):
        return cls(alg, tuple(np.arange(n) for n in alg.sizes))

    @classmethod
    def total(cls, alg):
        return cls(alg, tuple(np.zeros(n, dtype=np.int64) for n in alg.sizes))

    @classmethod
    def from_blocks(cls, alg, blocks_per_sort):
        parts = []
        for n, blocks in zip(alg.sizes, blocks_per_sort):
            lab = np.full(n, -1, dtype=np.int64)
            for b, block in enumerate(blocks):
                for x in block:
                    lab[x] = b
            if (lab < 0).any():
                raise AlgebraError("blocks do not cover the carrier")
            parts.append(lab)
        return cls(alg, tuple(parts))

    def blocks(self, sort):
        s = self.base._si(sort)
        p = self.partition[s]
        return [tuple(int(x) for x in np.nonzero(p == b)[0]) for b in range(self.block_counts()[s])]


@dataclass(frozen=True, eq=False)
class StablePreorder:
    base: FiniteAlgebra
    relation: tuple

    def __post_init__(self):
        rel = tuple(np.array(r, dtype=bool) for r in self.relation)
        for n, r in zip(self.base.sizes, rel):
            if r.shape != (n, n):
                raise AlgebraError("relation does not match the carrier sizes")
            r.setflags(write=False)
        object.__setattr__(self, "relation", rel)

    def key(self):
        return tuple(np.packbits(r).tobytes() + bytes([r.shape[0] % 256]) for r in self.relation)

    def __eq__(self, other):
        return isinstance(other, StablePreorder) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def relations(self):
        return self.relation

    def is_preorder(self):
        return all(r.diagonal().all() and is_transitive(r) for r in self.relation)

    def contains_base_order(self):
        return all(not (self.base.order_matrix(s) & ~r).any() for s, r in enumerate(self.relation))

    def is_stable(self):
        return (self.is_preorder() and self.contains_base_order()
                and stability_violation(self.base, self.relation) is None)

    def contains(self, other):
        return all(not (b & ~a).any() for a, b in zip(self.relation, other.relations()))

    def meet(self, other):
        return StablePreorder(self.base, tuple(a & b for a, b in zip(self.relation, other.relations())))

    def equivalence(self):
        return Congruence(self.base, tuple(_classes_of_preorder(r) for r in self.relation))

    def block_counts(self):
        return self.equivalence().block_counts()

    @classmethod
    def identity(cls, alg):
        return cls(alg, tuple(alg.order_matrix(s).copy() for s in range(len(alg.sizes))))

    @classmethod
    def total(cls, alg):
        return cls(alg, tuple(np.ones((n, n), dtype=bool) for n in alg.sizes))


def _classes_of_preorder(rel):
    rel = np.asarray(rel, dtype=bool)
    if rel.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    eq = rel & rel.T
    return kernels.relabel_rows_numpy(eq.astype(np.int64))


def stability_violation(alg, relations):
    """First (op, position) where related inputs give unrelated outputs, else None."""
    sig = alg.signature
    for k, op in enumerate(sig.ops):
        tab = alg.tables[k]
        out_rel = relations[sig.sort_index(op.output)]
        for pos, s in enumerate(op.inputs):
            lo, hi = np.nonzero(relations[sig.sort_index(s)])
            moved = np.moveaxis(tab, pos, 0)
            if moved.size and not out_rel[moved[lo], moved[hi]].all():
                return op.name, pos
    return None


def kernel_of(e):
    return e.kernel()


def relation_leq(k0, k1):
    """``ker k1 ⊆ ker k0``: the quotient with kernel k0 is below the one with kernel k1."""
    return all(not (b & ~a).any() for a, b in zip(k0.relations(), k1.relations()))


# ---------------------------------------------------------------------------
# quotients


def quotient_by(alg, c):
    """Quotient algebra ``alg/c`` and its projection."""
    if c.base.sizes != alg.sizes:
        raise AlgebraError("relation lives on a different algebra")
    if isinstance(c, StablePreorder):
        if not c.is_stable():
            raise StabilityError("relation is not a stable preorder containing the order")
        classes = c.equivalence().partition
    else:
        bad = stability_violation(alg, c.relations())
        if bad is not None:
            raise StabilityError(f"partition is not stable under {bad[0]} (argument {bad[1]})")
        classes = c.partition
    sig = alg.signature
    sizes = tuple(int(p.max()) + 1 if p.size else 0 for p in classes)
    reps = []
    for p, n in zip(classes, sizes):
        rep = np.zeros(n, dtype=np.int64)
        # first element of each class
        rep[p[::-1]] = np.arange(p.size)[::-1]
        reps.append(rep)
    tables = []
    for k, op in enumerate(sig.ops):
        tab = alg.tables[k]
        out = classes[sig.sort_index(op.output)]
        if op.arity == 0:
            tables.append(np.array(out[tab[()]]))
            continue
        grids = np.meshgrid(*[reps[sig.sort_index(s)] for s in op.inputs], indexing="ij")
        tables.append(out[tab[tuple(grids)]] if all(g.size for g in grids) else
                      np.zeros(tuple(sizes[sig.sort_index(s)] for s in op.inputs), dtype=np.int64))
    order = None
    if sig.ordered:
        rel = c.relation if isinstance(c, StablePreorder) else tuple(alg.order_matrix(s) for s in range(len(sizes)))
        order = tuple(r[np.ix_(rep, rep)] for r, rep in zip(rel, reps))
        if not isinstance(c, StablePreorder):
            order = tuple(transitive_closure(o) for o in order)
    labels = None
    if alg.labels is not None:
        labels = tuple(tuple(alg.labels[s][int(r)] for r in rep) for s, rep in enumerate(reps))
    quo = FiniteAlgebra(sig, sizes, tuple(tables), order, labels)
    return quo, Morphism(alg, quo, classes)


# ---------------------------------------------------------------------------
# subalgebras, products


def generated_subalgebra(alg, gens):
    """Least subalgebra containing ``gens`` (per sort: iterable of indices)."""
    sig = alg.signature
    members = [np.zeros(n, dtype=bool) for n in alg.sizes]
    for s, g in enumerate(gens):
        for x in g:
            members[s][x] = True
    changed = True
    while changed:
        changed = False
        for k, op in enumerate(sig.ops):
            out = sig.sort_index(op.output)
            tab = alg.tables[k]
            if op.arity == 0:
                vals = np.array([tab[()]])
            else:
                sel = tuple(np.nonzero(members[sig.sort_index(s)])[0] for s in op.inputs)
                if any(x.size == 0 for x in sel):
                    continue
                vals = tab[np.ix_(*sel)].reshape(-1)
            fresh = ~members[out][vals]
            if fresh.any():
                members[out][vals] = True
                changed = True
    keep = [np.nonzero(m)[0] for m in members]
    return restrict(alg, keep)


def restrict(alg, keep):
    """Subalgebra on the given (closed) sorted index sets, with its inclusion."""
    sig = alg.signature
    new_index = []
    for n, kp in zip(alg.sizes, keep):
        idx = np.full(n, -1, dtype=np.int64)
        idx[kp] = np.arange(len(kp))
        new_index.append(idx)
    tables = []
    for k, op in enumerate(sig.ops):
        out = sig.sort_index(op.output)
        tab = alg.tables[k]
        if op.arity == 0:
            sub = np.array(new_index[out][tab[()]])
        else:
            sel = [keep[sig.sort_index(s)] for s in op.inputs]
            sub = new_index[out][tab[np.ix_(*sel)]] if all(len(x) for x in sel) else \
                np.zeros(tuple(len(x) for x in sel), dtype=np.int64)
        if (np.asarray(sub) < 0).any():
            raise AlgebraError("subset is not closed under the operations")
        tables.append(sub)
    order = None
    if sig.ordered:
        order = tuple(o[np.ix_(kp, kp)] for o, kp in zip(alg.order, keep))
    labels = None
    if alg.labels is not None:
        labels = tuple(tuple(alg.labels[s][i] for i in kp) for s, kp in enumerate(keep))
    sub = FiniteAlgebra(sig, tuple(len(k) for k in keep), tuple(tables), order, labels)
    return sub, Morphism(sub, alg, tuple(np.asarray(k, dtype=np.int64) for k in keep))


@dataclass(frozen=True, eq=False)
class Product:
    algebra: FiniteAlgebra
    projections: tuple


def direct_product(algs):
    """Direct product with componentwise tables/order; elements in lexicographic order."""
    algs = list(algs)
    if not algs:
        raise AlgebraError("empty product")
    sig = algs[0].signature
    if any(a.signature != sig for a in algs):
        raise AlgebraError("signature mismatch")
    nsorts = len(sig.sorts)
    factor_sizes = [tuple(a.sizes[s] for a in algs) for s in range(nsorts)]
    sizes = tuple(int(np.prod(fs)) for fs in factor_sizes)
    # coordinates[s][f] = component of each product element in factor f
    coords = []
    for s in range(nsorts):
        if sizes[s]:
            coords.append(np.unravel_index(np.arange(sizes[s]), factor_sizes[s]))
        else:
            coords.append(tuple(np.zeros(0, dtype=np.int64) for _ in algs))
    tables = []
    for k, op in enumerate(sig.ops):
        out = sig.sort_index(op.output)
        in_sorts = [sig.sort_index(s) for s in op.inputs]
        shape = tuple(sizes[s] for s in in_sorts)
        if op.arity == 0:
            comps = tuple(a.tables[k][()] for a in algs)
            tables.append(np.array(np.ravel_multi_index(comps, factor_sizes[out])))
            continue
        if int(np.prod(shape)) == 0:
            tables.append(np.zeros(shape, dtype=np.int64))
            continue
        grid = np.indices(shape).reshape(op.arity, -1)
        comps = []
        for f, a in enumerate(algs):
            args = tuple(coords[s][f][grid[p]] for p, s in enumerate(in_sorts))
            comps.append(a.tables[k][args])
        tables.append(np.ravel_multi_index(tuple(comps), factor_sizes[out]).reshape(shape))
    order = None
    if sig.ordered:
        order = []
        for s in range(nsorts):
            o = np.ones((sizes[s], sizes[s]), dtype=bool)
            for f, a in enumerate(algs):
                c = coords[s][f]
                o &= a.order[s][np.ix_(c, c)]
            order.append(o)
        order = tuple(order)
    prod = FiniteAlgebra(sig, sizes, tuple(tables), order)
    projections = tuple(Morphism(prod, a, tuple(coords[s][f] for s in range(nsorts))) for f, a in enumerate(algs))
    return Product(prod, projections)


def subdirect_product(e0, e1):
    """Least common upper bound of two quotients of the same algebra."""
    if e0.source is not e1.source and not e0.source.identical(e1.source):
        raise AlgebraError("quotients have different sources")
    k = e0.kernel().meet(e1.kernel())
    _, proj = quotient_by(e0.source, k)
    return proj


def factor_through(e, f):
    """The unique ``g`` with ``g ∘ e = f``, or None when the kernel condition fails."""
    if e.source is not f.source and not e.source.identical(f.source):
        raise AlgebraError("morphisms have different sources")
    maps = []
    for s, (em, fm) in enumerate(zip(e.maps, f.maps)):
        n = e.target.sizes[s]
        g = np.full(n, -1, dtype=np.int64)
        g[em] = fm
        if (g < 0).any():
            raise AlgebraError("factor_through needs a surjective first argument")
        if not np.array_equal(g[em], fm):
            return None
        if e.source.ordered or e.target.ordered:
            eo = e.target.order_matrix(s)[np.ix_(em, em)]
            fo = f.target.order_matrix(s)[np.ix_(fm, fm)]
            if (eo & ~fo).any():
                return None
        maps.append(g)
    return Morphism(e.target, f.target, tuple(maps))


def quotient_leq(e0, e1):
    """``e0 ≤ e1``: e0 factors through e1."""
    if isinstance(e0, (Congruence, StablePreorder)) or isinstance(e1, (Congruence, StablePreorder)):
        k0 = e0 if isinstance(e0, (Congruence, StablePreorder)) else e0.kernel()
        k1 = e1 if isinstance(e1, (Congruence, StablePreorder)) else e1.kernel()
        return relation_leq(k0, k1)
    if e0.source is not e1.source and not e0.source.identical(e1.source):
        raise AlgebraError("quotients have different sources")
    return factor_through(e1, e0) is not None


def same_quotient(e0, e1):
    return quotient_leq(e0, e1) and quotient_leq(e1, e0)


# ---------------------------------------------------------------------------
# homomorphism search, isomorphism, division


def _translations(alg):
    """Elementary translations as (source sort, target sort, map) triples."""
    sig = alg.signature
    out = []
    seen = set()
    for k, op in enumerate(sig.ops):
        tab = alg.tables[k]
        t = sig.sort_index(op.output)
        for pos, s in enumerate(op.inputs):
            s = sig.sort_index(s)
            moved = np.moveaxis(tab, pos, -1)
            rest = moved.shape[:-1]
            for ctx in itertools.product(*[range(n) for n in rest]):
                m = np.array(moved[ctx], dtype=np.int64)
                key = (s, t, m.tobytes())
                if key not in seen:
                    seen.add(key)
                    out.append((s, t, m))
    return out


def homomorphisms(src, tgt, surjective=False, injective=False):
    """All homomorphisms ``src -> tgt`` in lexicographic order of the sorted maps."""
    sig = src.signature
    if sig.sorts != tgt.signature.sorts or sig.ops != tgt.signature.ops:
        raise AlgebraError("signature mismatch")
    slots = [(s, i) for s in range(len(src.sizes)) for i in range(src.sizes[s])]
    # constraints: each table entry becomes checkable once its inputs are assigned
    checks = [[] for _ in slots]
    pos_of = {slot: n for n, slot in enumerate(slots)}
    for k, op in enumerate(sig.ops):
        in_sorts = [sig.sort_index(s) for s in op.inputs]
        out = sig.sort_index(op.output)
        tab = src.tables[k]
        for args in itertools.product(*[range(src.sizes[s]) for s in in_sorts]):
            res = int(tab[args]) if args else int(tab[()])
            deps = [pos_of[(s, a)] for s, a in zip(in_sorts, args)] + [pos_of[(out, res)]]
            checks[max(deps)].append((k, tuple(zip(in_sorts, args)), (out, res)))
    ordered = src.ordered and tgt.ordered
    assign = {}
    used = [set() for _ in src.sizes]

    def ok(n):
        for k, ins, (out, res) in checks[n]:
            img = tuple(assign[x] for x in ins)
            if int(tgt.tables[k][img] if img else tgt.tables[k][()]) != assign[(out, res)]:
                return False
        if ordered:
            s, i = slots[n]
            o_src = src.order[s]
            o_tgt = tgt.order[s]
            for j in range(i):
                if o_src[j, i] and not o_tgt[assign[(s, j)], assign[(s, i)]]:
                    return False
                if o_src[i, j] and not o_tgt[assign[(s, i)], assign[(s, j)]]:
                    return False
        return True

    def rec(n):
        if n == len(slots):
            maps = tuple(np.array([assign[(s, i)] for i in range(src.sizes[s])], dtype=np.int64)
                         for s in range(len(src.sizes)))
            if surjective and any(len(set(m.tolist())) != tgt.sizes[s] for s, m in enumerate(maps)):
                return
            yield Morphism(src, tgt, maps)
            return
        s, i = slots[n]
        remaining = src.sizes[s] - i
        for v in range(tgt.sizes[s]):
            if injective and v in used[s]:
                continue
            if surjective and tgt.sizes[s] - len(used[s] | {v}) > remaining - 1:
                continue
            assign[(s, i)] = v
            fresh = v not in used[s]
            if fresh:
                used[s].add(v)
            if ok(n):
                yield from rec(n + 1)
            if fresh:
                used[s].discard(v)
            del assign[(s, i)]

    if surjective and any(t > n for t, n in zip(tgt.sizes, src.sizes)):
        return
    if injective and any(t < n for t, n in zip(tgt.sizes, src.sizes)):
        return
    yield from rec(0)


def find_isomorphism(a, b):
    if a.sizes != b.sizes or a.signature.sorts != b.signature.sorts or a.signature.ops != b.signature.ops:
        return None
    for h in homomorphisms(a, b, injective=True):
        if h.is_order_reflecting():
            return h
    return None


def is_isomorphic(a, b):
    return find_isomorphism(a, b) is not None


def subalgebras(alg):
    """All subalgebras, deduplicated, in order of their least generating bitmask."""
    seen = set()
    total = alg.total_size()
    offs = alg.offsets()
    for mask in range(1 << total):
        gens = [[i for i in range(alg.sizes[s]) if mask >> (offs[s] + i) & 1] for s in range(len(alg.sizes))]
        sub, inc = generated_subalgebra(alg, gens)
        key = tuple(m.tobytes() for m in inc.maps)
        if key in seen:
            continue
        seen.add(key)
        yield sub, inc


@dataclass(frozen=True, eq=False)
class Division:
    inclusion: Morphism
    surjection: Morphism


def divides(a, b):
    """``a`` divides ``b`` (is a quotient of a subalgebra of ``b``); witness or None."""
    if a.signature.sorts != b.signature.sorts or a.signature.ops != b.signature.ops:
        raise AlgebraError("signature mismatch")
    for sub, inc in subalgebras(b):
        if any(x < y for x, y in zip(sub.sizes, a.sizes)):
            continue
        for h in homomorphisms(sub, a, surjective=True):
            return Division(inc, h)
    return None


# ---------------------------------------------------------------------------
# congruence / stable preorder enumeration


def _closure_relation(alg, rel, trans, ordered):
    """Least congruence (resp. stable preorder) containing ``rel``."""
    rel = [r.copy() for r in rel]
    while True:
        changed = False
        for s, t, m in trans:
            lo, hi = np.nonzero(rel[s])
            need = ~rel[t][m[lo], m[hi]]
            if need.any():
                rel[t][m[lo][need], m[hi][need]] = True
                changed = True
        for s in range(len(rel)):
            r = rel[s]
            if not ordered:
                r |= r.T
            c = transitive_closure(r)
            if not np.array_equal(c, r):
                rel[s] = c
                changed = True
        if not changed:
            return rel


def enumerate_quotients(alg, limit=None):
    """Every congruence (unordered) or stable preorder (ordered) of ``alg``.

    Generated from the identity by adding one pair and closing, so the result
    is complete; ``limit`` caps the number returned.
    """
    trans = _translations(alg)
    ordered = alg.ordered
    start = [alg.order_matrix(s).copy() for s in range(len(alg.sizes))]
    make = (lambda rel: StablePreorder(alg, tuple(rel))) if ordered else \
        (lambda rel: Congruence(alg, tuple(_classes_of_preorder(r) for r in rel)))
    first = make(start)
    found = {first.key(): first}
    queue = [start]
    while queue:
        rel = queue.pop(0)
        for s in range(len(alg.sizes)):
            for i in range(alg.sizes[s]):
                for j in range(alg.sizes[s]):
                    if rel[s][i, j]:
                        continue
                    new = [r.copy() for r in rel]
                    new[s][i, j] = True
                    new = _closure_relation(alg, new, trans, ordered)
                    q = make(new)
                    if q.key() not in found:
                        found[q.key()] = q
                        queue.append(new)
                        if limit is not None and len(found) >= limit:
                            return list(found.values())
    return list(found.values())


# ---------------------------------------------------------------------------
# law evaluation


class _Evaluator:
    """Vectorized evaluation of terms over arrays of assignments."""

    def __init__(self, alg, law):
        self.alg = alg
        self.sig = alg.signature
        self.law = law
        self.var_sorts = {}
        declared = declared_sorts(law)
        default = self.sig.sorts[0]
        for name, sort in declared.items():
            sort = sort if sort is not None else default
            self.var_sorts[name] = self.sig.sort_index(sort)
        self._powers = {}

    def sort_of(self, term):
        if isinstance(term, Var):
            return self.var_sorts[term.name]
        if isinstance(term, Power):
            return self.sort_of(term.arg)
        arg_sorts = tuple(self.sig.sorts[self.sort_of(a)] for a in term.args)
        k = self.sig.resolve(term.op, arg_sorts)
        return self.sig.sort_index(self.sig.ops[k].output)

    def powers(self, sort):
        if sort not in self._powers:
            self._powers[sort] = idempotent_power_table(self.alg, sort)
        return self._powers[sort]

    def eval(self, term, env):
        if isinstance(term, Var):
            if term.name not in env:
                raise LawError(f"unbound variable {term.name}")
            return env[term.name]
        if isinstance(term, Power):
            val = self.eval(term.arg, env)
            return self.powers(self.sort_of(term.arg))[val]
        arg_sorts = tuple(self.sig.sorts[self.sort_of(a)] for a in term.args)
        k = self.sig.resolve(term.op, arg_sorts)
        tab = self.alg.tables[k]
        if not term.args:
            return tab[()]
        vals = tuple(self.eval(a, env) for a in term.args)
        return tab[vals]


@dataclass(frozen=True)
class LawReport:
    ok: bool
    law: Law | None = None
    witness: dict | None = None
    checked: int = 0

    def __bool__(self):
        return self.ok

    def describe(self, alg=None):
        if self.ok:
            return "pass"
        env = ", ".join(f"{k}={v}" for k, v in self.witness.items())
        return f"fail: {self.law} at {env}"


def _as_law(law, alg):
    if isinstance(law, str):
        return parse_law(law, constants=alg.signature.constants())
    return law


def check_law(alg, law):
    """Exhaustive check of one law; the witness is the lexicographically first failure."""
    law = _as_law(law, alg)
    ev = _Evaluator(alg, law)
    if law.relation == "<=" and not alg.ordered:
        raise LawError("inequations need an ordered algebra")
    names = law.variables()
    for name in names:
        if name not in ev.var_sorts:
            raise LawError(f"unbound variable {name}")
    shape = tuple(alg.sizes[ev.var_sorts[n]] for n in names)
    count = int(np.prod(shape)) if names else 1
    if count == 0:
        return LawReport(True, law, None, 0)
    grid = np.indices(shape).reshape(len(names), -1) if names else np.zeros((0, 1), dtype=np.int64)
    env = {n: grid[i] for i, n in enumerate(names)}
    try:
        mask = np.ones(count, dtype=bool)
        for lhs, rhs in law.premises:
            if ev.sort_of(lhs) != ev.sort_of(rhs):
                raise LawError("premise sides have different sorts")
            mask &= np.broadcast_to(ev.eval(lhs, env) == ev.eval(rhs, env), (count,))
        s = ev.sort_of(law.lhs)
        if s != ev.sort_of(law.rhs):
            raise LawError("law sides have different sorts")
        left = np.broadcast_to(ev.eval(law.lhs, env), (count,))
        right = np.broadcast_to(ev.eval(law.rhs, env), (count,))
    except KeyError as exc:
        raise LawError(f"unbound variable {exc.args[0]}") from None
    if law.relation == "=":
        good = left == right
    else:
        good = alg.order_matrix(s)[left, right]
    bad = np.nonzero(mask & ~good)[0]
    if bad.size:
        i = int(bad[0])
        witness = {n: alg.label(ev.var_sorts[n], int(grid[j][i])) for j, n in enumerate(names)}
        return LawReport(False, law, witness, count)
    return LawReport(True, law, None, count)


def validate_laws(alg, laws):
    """Check laws in order; report the first failing law with its witness."""
    total = 0
    for law in laws:
        rep = check_law(alg, law)
        total += rep.checked
        if not rep.ok:
            return LawReport(False, rep.law, rep.witness, total)
    return LawReport(True, None, None, total)


def eval_term(alg, term, env):
    """Evaluate ``term`` under ``env`` (variable name -> element index)."""
    from .terms import parse_term
    if isinstance(term, str):
        term = parse_term(term, constants=alg.signature.constants())
    law = Law(term, term)
    ev = _Evaluator(alg, law)
    for name, val in env.items():
        if name in ev.var_sorts and not 0 <= val < alg.sizes[ev.var_sorts[name]]:
            raise LawError(f"value of {name} is outside its sort")
    for name in law.variables():
        if name not in env:
            raise LawError(f"unbound variable {name}")
    try:
        return int(ev.eval(term, {k: np.int64(v) for k, v in env.items()}))
    except KeyError as exc:  # pragma: no cover - guarded above
        raise LawError(str(exc)) from None


def binary_product_index(alg, sort):
    """Index of the binary operation ``sort × sort -> sort`` (``*`` preferred)."""
    sig = alg.signature
    name = sig.sorts[alg._si(sort)]
    cands = [k for k, op in enumerate(sig.ops) if op.inputs == (name, name) and op.output == name]
    if not cands:
        raise AlgebraError(f"no binary product on sort {name}")
    star = [k for k in cands if sig.ops[k].name == "*"]
    return (star or cands)[0]


def idempotent_power_table(alg, sort):
    s = alg._si(sort)
    tab = alg.tables[binary_product_index(alg, s)]
    if tab.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    out = kernels.idempotent_powers(tab)
    if (out < 0).any():
        raise AlgebraError("product is not associative: some element has no idempotent power")
    return out


# ---------------------------------------------------------------------------
# presets


def _laws(lines, constants=("1",)):
    return tuple(parse_law(line, constants) for line in lines)


MONOID_LAWS = _laws([
    "(x * y) * z = x * (y * z)",
    "1 * x = x",
    "x * 1 = x",
])

SEMIGROUP_LAWS = _laws(["(x * y) * z = x * (y * z)"])


def omega_laws(plus_size):
    """Wilke identities; the power identity runs up to ``plus_size``."""
    lines = [
        "(x:plus * y:plus) * z:plus = x * (y * z)",
        "(x:plus * y:plus) * z:omega = x * (y * z)",
        "x:plus * pow(y:plus * x) = pow(x * y)",
    ]
    for k in range(2, max(plus_size, 1) + 1):
        power = " * ".join(["x:plus"] + ["x"] * (k - 1))
        lines.append(f"pow({power}) = pow(x:plus)")
    return _laws(lines)


TREE_LAWS = _laws([
    "sigma(sigma(p:c, q:c), r:c) = sigma(p, sigma(q, r))",
    "eta(sigma(p:c, q:c), t:t) = eta(p, eta(q, t))",
    "eta(lambda(a:l, s:t), t:t) = kappa(a, t, s)",
    "eta(rho(a:l, s:t), t:t) = kappa(a, s, t)",
])

STABILIZATION_LAWS = _laws([
    "(s * t) * (s * t) = s * t & (t * s) * (t * s) = t * s => (s * t)^# * s = s * (t * s)^#",
    "e * e = e => (e^#)^# = e^#",
    "e * e = e => e^# * e = e^#",
    "e * e = e => e * e^# = e^#",
    "e * e = e => e^# <= e",
    "x = 1 => x^# = x",
    "x * x = x => x^w = x",
])

PRESETS = {
    "semigroup": SEMIGROUP_LAWS,
    "monoid": MONOID_LAWS,
    "tree": TREE_LAWS,
    "stabilization": MONOID_LAWS + STABILIZATION_LAWS,
}


def preset_laws(name, alg=None):
    if name == "omega":
        return omega_laws(alg.size("plus") if alg is not None else 1)
    try:
        return PRESETS[name]
    except KeyError:
        raise AlgebraError(f"unknown preset {name!r}; known: {sorted(PRESETS) + ['omega']}") from None


# ---------------------------------------------------------------------------
# exhaustive enumeration


def monoids_of_order(n):
    """Every monoid on ``{0, .., n-1}`` with unit 0, in lexicographic table order."""
    for tab in kernels.associative_tables(n, True):
        yield FiniteAlgebra(monoid_signature(), (n,), (np.array(0), tab))


def semigroups_of_order(n):
    """Every semigroup on ``{0, .., n-1}``, in lexicographic table order."""
    for tab in kernels.associative_tables(n, False):
        yield FiniteAlgebra(semigroup_signature(), (n,), (tab,))


def cyclic_monoid(n):
    """``Z_n`` with generator 1."""
    i = np.arange(n)
    return FiniteAlgebra(monoid_signature(), (n,), (np.array(0), (i[:, None] + i[None, :]) % n))


def monogenic_monoid(index, period):
    """Monoid ``{1, a, .., a^(index+period-1)}`` with ``a^(index+period) = a^index``."""
    n = index + period
    def red(k):
        return k if k < n else index + (k - index) % period
    tab = np.array([[red(i + j) for j in range(n)] for i in range(n)], dtype=np.int64)
    return FiniteAlgebra(monoid_signature(), (n,), (np.array(0), tab))
