"""Laws with omega powers, local pseudovarieties, language families, round trips.

Everything is materialized over one *source* recognizer ``F``: a
letter-generated algebra that all generators (or languages) factor through.
A local pseudovariety is a set of congruences (stable preorders in the
ordered regime) on ``F``; a language family is a set of accept-set tuples
on ``F``, one bitmask per sort.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import kernels
from .finalg import (
    AlgebraError,
    Congruence,
    LawError,
    StablePreorder,
    check_law,
    enumerate_quotients,
    identity_morphism,
    idempotent_power_table,
    quotient_by,
)
from .presentation import (
    Recognizer,
    RecognizerError,
    elementary_translations,
    joint_recognizer,
    syntactic_refinement,
)
from .terms import Law
from .words import SubstitutionSpec, words_up_to

ProfiniteLaw = Law
DEFAULT_BOUND = 6
BOUND_ENV = "ALGVAR_BOUND"
SOURCE_LIMIT = 4096
MEMBER_LIMIT = 1 << 16


class ClosureError(ValueError):
    pass


class _Oversize(Exception):
    """A closure step would list more members than the limit allows."""


def default_bound():
    raw = os.environ.get(BOUND_ENV)
    if raw is None:
        return DEFAULT_BOUND
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{BOUND_ENV} must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValueError(f"{BOUND_ENV} must be at least 1")
    return value


# ---------------------------------------------------------------------------
# laws


def idempotent_power(alg, x, sort=0):
    """The idempotent in the cyclic subsemigroup generated by ``x``."""
    return int(idempotent_power_table(alg, sort)[x])


def satisfies_profinite_law(alg, law):
    """Exhaustive check over all assignments; the witness is the first failure."""
    return check_law(alg, law)


# ---------------------------------------------------------------------------
# helpers on relations


def _as_recognizer(x):
    if isinstance(x, Recognizer):
        return x
    rec = getattr(x, "rec", None)
    if isinstance(rec, Recognizer):
        return rec
    raise TypeError(f"expected a recognizer, got {type(x).__name__}")


def _pullback(rel, proj):
    """Relation on ``proj.source`` induced by ``rel`` on ``proj.target``."""
    if isinstance(rel, StablePreorder):
        return StablePreorder(proj.source, tuple(r[np.ix_(m, m)] for r, m in zip(rel.relation, proj.maps)))
    return Congruence(proj.source, tuple(p[m] for p, m in zip(rel.partition, proj.maps)))


def _total(alg):
    return StablePreorder.total(alg) if alg.ordered else Congruence.total(alg)


def _classes(rel):
    return rel.block_counts()


def _within(rel, bound):
    return max(_classes(rel), default=0) <= bound


def _sort_key(rel):
    return (sum(_classes(rel)), rel.key())


def _common_source(a, b):
    """Joint recognizer of two sources and the projections onto each."""
    if a.letters != b.letters:
        raise RecognizerError("objects live over different alphabets")
    if a is b:
        ident = identity_morphism(a.algebra)
        return a, ident, ident
    joint, (p0, p1) = joint_recognizer([(a.algebra, a.letter_map), (b.algebra, b.letter_map)], a.letters)
    return joint, p0, p1


# ---------------------------------------------------------------------------
# local pseudovarieties


@dataclass(frozen=True, eq=False)
class LocalPseudovariety:
    """Finite ideal of quotients of the source recognizer ``F``."""

    source: Recognizer
    members: tuple
    bound: int
    truncated: bool = False

    @property
    def alphabet(self):
        return self.source.alphabet

    def __len__(self):
        return len(self.members)

    def keys(self):
        return frozenset(m.key() for m in self.members)

    def quotients(self):
        """``(algebra, projection)`` for every member, smallest first."""
        for m in self.members:
            yield quotient_by(self.source.algebra, m)

    def sizes(self):
        return [tuple(_classes(m)) for m in self.members]

    def contains(self, rel):
        """Membership of a congruence/preorder on the source."""
        return rel.key() in self.keys()

    def rebase(self, source, proj):
        """The same ideal seen from a larger source ``proj: source -> self.source``."""
        if proj.target.sizes != self.source.algebra.sizes:
            raise AlgebraError("projection does not land on the source")
        members = tuple(sorted((_pullback(m, proj) for m in self.members), key=_sort_key))
        return LocalPseudovariety(source, members, self.bound, self.truncated)

    def same_as(self, other):
        joint, p0, p1 = _common_source(self.source, other.source)
        return self.rebase(joint, p0).keys() == other.rebase(joint, p1).keys()

    def issubset(self, other):
        joint, p0, p1 = _common_source(self.source, other.source)
        return self.rebase(joint, p0).keys() <= other.rebase(joint, p1).keys()


def _empty_accept(alg):
    return tuple(np.zeros(n, dtype=bool) for n in alg.sizes)


def _ideal(source, gen_kernels, bound):
    """Least ideal of quotients of ``source`` containing ``gen_kernels``, within ``bound``."""
    alg = source.algebra
    gen_kernels = list(gen_kernels)
    top = _total(alg)
    for k in gen_kernels:
        top = top.meet(k)
    if _within(top, bound):
        quo, proj = quotient_by(alg, top)
        members = [_pullback(q, proj) for q in enumerate_quotients(quo)]
        return LocalPseudovariety(source, tuple(sorted(members, key=_sort_key)), bound, False)
    # the full ideal does not fit: grow from the generators that do
    truncated = True
    found = {}
    queue = []
    for k in gen_kernels:
        if _within(k, bound) and k.key() not in found:
            found[k.key()] = k
            queue.append(k)
    if not found:
        t = _total(alg)
        found[t.key()] = t
        queue.append(t)
    while queue:
        k = queue.pop(0)
        quo, proj = quotient_by(alg, k)
        fresh = [_pullback(q, proj) for q in enumerate_quotients(quo)]
        fresh += [k.meet(other) for other in list(found.values())]
        for m in fresh:
            if m.key() in found or not _within(m, bound):
                continue
            found[m.key()] = m
            queue.append(m)
    return LocalPseudovariety(source, tuple(sorted(found.values(), key=_sort_key)), bound, truncated)


def generate_local_pseudovariety(gens, bound=None):
    """Ideal generated by Σ-generated recognizers (or algebras with letter maps).

    ``gens`` are recognizers over one alphabet; their accept sets are ignored.
    The source is the letter-generated part of their product.
    """
    bound = default_bound() if bound is None else bound
    recs = [_as_recognizer(g) for g in gens]
    if not recs:
        raise ClosureError("at least one generator is required")
    letters = recs[0].letters
    for r in recs:
        if r.letters != letters:
            raise RecognizerError("generators use different alphabets")
    joint, projs = joint_recognizer([(r.algebra, r.letter_map) for r in recs], letters)
    return _ideal(joint, [p.kernel() for p in projs], bound)


# ---------------------------------------------------------------------------
# language families


def _mask_of(arr):
    out = 0
    for i in np.nonzero(arr)[0]:
        out |= 1 << int(i)
    return out


def _array_of(mask, n):
    return np.array([(mask >> i) & 1 for i in range(n)], dtype=bool)


def _is_upset(mask, order):
    arr = _array_of(mask, order.shape[0])
    lo, hi = np.nonzero(order)
    return not (arr[lo] & ~arr[hi]).any()


@dataclass(frozen=True, eq=False)
class LanguageFamily:
    """Languages recognized by the shared source recognizer.

    Each member is a tuple of per-sort bitmasks over the source carrier.
    """

    source: Recognizer
    members: frozenset
    ordered: bool = False
    truncated: bool = False

    @property
    def alphabet(self):
        return self.source.alphabet

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(sorted(self.members))

    def __contains__(self, lang):
        return tuple(lang) in self.members

    def accept_of(self, member):
        return tuple(_array_of(m, n) for m, n in zip(member, self.source.algebra.sizes))

    def recognizer(self, member):
        return self.source.with_accept(self.accept_of(member))

    def rebase(self, source, proj):
        """The same family seen from a larger source ``proj: source -> self.source``."""
        members = frozenset(
            tuple(_mask_of(_array_of(m, n)[pm]) for m, n, pm in zip(mem, self.source.algebra.sizes, proj.maps))
            for mem in self.members
        )
        return LanguageFamily(source, members, self.ordered, self.truncated)

    def same_as(self, other):
        joint, p0, p1 = _common_source(self.source, other.source)
        return self.rebase(joint, p0).members == other.rebase(joint, p1).members

    def issubset(self, other):
        joint, p0, p1 = _common_source(self.source, other.source)
        return self.rebase(joint, p0).members <= other.rebase(joint, p1).members

    def components(self):
        """Per-sort sets of components."""
        return tuple(frozenset(m[s] for m in self.members) for s in range(len(self.source.algebra.sizes)))


def family_from(langs, ordered=None):
    """Family with the given languages as members, on their joint recognizer."""
    recs = [_as_recognizer(x) for x in langs]
    if not recs:
        raise ClosureError("at least one language is required")
    letters = recs[0].letters
    for r in recs:
        if r.letters != letters:
            raise RecognizerError("languages use different alphabets")
    joint, projs = joint_recognizer([(r.algebra, r.letter_map) for r in recs], letters)
    members = set()
    for r, p in zip(recs, projs):
        members.add(tuple(_mask_of(a[m]) for a, m in zip(r.accept, p.maps)))
    if ordered is None:
        ordered = joint.algebra.ordered
    return LanguageFamily(joint, frozenset(members), ordered)


def languages_of(v):
    """All languages recognized by members of ``v`` (up-set accept sets when ordered)."""
    alg = v.source.algebra
    ordered = alg.ordered
    found = set()
    for quo, proj in v.quotients():
        per_sort = []
        for s, n in enumerate(quo.sizes):
            choices = []
            for mask in range(1 << n):
                if ordered and not _is_upset(mask, quo.order[s]):
                    continue
                choices.append(_mask_of(_array_of(mask, n)[proj.maps[s]]))
            per_sort.append(choices)
        found.update(itertools.product(*per_sort))
    return LanguageFamily(v.source, frozenset(found), ordered, v.truncated)


# ---------------------------------------------------------------------------
# morphism classes


@dataclass(frozen=True)
class MorphismClass:
    name: str
    predicate: Callable = field(compare=False)

    def __call__(self, g):
        return bool(self.predicate(g))

    def check_closure(self, alphabet, max_len=2):
        """Identities are members and members compose; returns a failing pair or None."""
        ident = SubstitutionSpec(tuple(alphabet), tuple(alphabet), tuple((a,) for a in alphabet))
        if not self(ident):
            return (ident, None)
        specs = [g for g in substitutions(alphabet, max_len) if self(g)]
        for g in specs:
            for h in specs:
                if not self(g.compose(h)):
                    return (g, h)
        return None


ALL = MorphismClass("all", lambda g: True)
NON_ERASING = MorphismClass("non-erasing", lambda g: g.is_non_erasing())
LENGTH_PRESERVING = MorphismClass("length-preserving", lambda g: g.is_length_preserving())
MORPHISM_CLASSES = {c.name: c for c in (ALL, NON_ERASING, LENGTH_PRESERVING)}


def morphism_class(name):
    if isinstance(name, MorphismClass):
        return name
    try:
        return MORPHISM_CLASSES[name]
    except KeyError:
        raise ClosureError(f"unknown morphism class {name!r}; known: {sorted(MORPHISM_CLASSES)}") from None


def substitutions(alphabet, max_len=2):
    """Every substitution ``Σ → Σ^{≤ max_len}`` in a fixed order."""
    alphabet = tuple(alphabet)
    images = list(words_up_to(alphabet, max_len))
    for choice in itertools.product(images, repeat=len(alphabet)):
        yield SubstitutionSpec(alphabet, alphabet, choice)


# ---------------------------------------------------------------------------
# closure


def _eval_word_in(alg, letter_map, letters, word):
    """Image of a finite word in a monoid recognizer (unit for the empty word)."""
    tab = alg.table("*", ("m", "m"))
    x = int(alg.table("1", ())[()])
    pos = {name: i for i, (name, _) in enumerate(letters)}
    for a in word:
        x = int(tab[x, letter_map[pos[a]]])
    return x


def _subsets_of_blocks(labels):
    """Every union of blocks of a partition, as bitmasks."""
    labels = np.asarray(labels)
    nblocks = int(labels.max()) + 1 if labels.size else 0
    out = [0]
    for b in range(nblocks):
        block = _mask_of(labels == b)
        out += [m | block for m in out]
    return set(out)


def _close_components(p, comps, mode, ordered, limit=None):
    """Least per-sort families containing ``comps`` closed under the set ops and derivatives.

    In boolean mode the family on each sort is the set of unions of atoms,
    and the atoms are obtained by partition refinement.  Returns the families
    and a set whose unions give each family (the atoms, or every member).
    Raises ``_Oversize`` when the family would have more than ``limit`` members.
    """
    alg = p.algebra
    sizes = alg.sizes
    if mode == "boolean":
        # membership signature of every element, then refine under the ops
        sigs = []
        for s, n in enumerate(sizes):
            members = sorted(set(comps[s]))
            rows = np.array([[(m >> i) & 1 for m in members] for i in range(n)], dtype=np.int64).reshape(n, -1)
            sigs.append(rows)
        width = max((r.shape[1] for r in sigs), default=0)
        init = []
        for s, r in enumerate(sigs):
            pad = np.full((r.shape[0], width + 1), -1, dtype=np.int64)
            pad[:, 0] = s
            pad[:, 1:1 + r.shape[1]] = r
            init.append(pad)
        rows = np.concatenate(init) if init else np.zeros((0, 1), dtype=np.int64)
        if rows.shape[0] == 0:
            return [set([0]) for _ in sizes], [set() for _ in sizes]
        start = kernels.relabel_rows(rows)
        labels = kernels.refine_partition(start, p.successor_table())
        offs = alg.offsets()
        parts = [labels[offs[s]:offs[s + 1]] for s in range(len(sizes))]
        if limit is not None:
            bits = sum(len(np.unique(x)) for x in parts)
            if bits > limit.bit_length() - 1:
                raise _Oversize
        return [_subsets_of_blocks(x) for x in parts], [
            {_mask_of(x == b) for b in np.unique(x)} for x in parts]
    # positive mode: a family of sets closed under unions and intersections
    # (with the empty and the full set) is the family of up-sets of the
    # preorder "every member containing i contains j"; closure under
    # derivatives makes that preorder stable, so refine it
    offs = alg.offsets()
    total = alg.total_size()
    init = np.zeros((total, total), dtype=bool)
    for s, n in enumerate(sizes):
        block = np.ones((n, n), dtype=bool)
        for m in comps[s]:
            x = _array_of(m, n)
            block &= ~x[:, None] | x[None, :]
        init[offs[s]:offs[s + 1], offs[s]:offs[s + 1]] = block
    rel = kernels.refine_preorder(init, p.successor_table()) if total else init
    sets = []
    gens = []
    budget = limit
    for s, n in enumerate(sizes):
        r = rel[offs[s]:offs[s + 1], offs[s]:offs[s + 1]]
        ups = _upsets(r, budget)
        if budget is not None:
            budget = budget // max(len(ups), 1)
        sets.append(ups)
        gens.append({_mask_of(r[i]) for i in range(n)})
    if ordered:
        for s in range(len(sizes)):
            order = alg.order_matrix(s)
            for x in gens[s]:
                if not _is_upset(x, order):
                    raise ClosureError("closure produced a non-up-set; the presentation is not monotone")
    return sets, gens


def _upsets(rel, limit=None):
    """Every up-set of the preorder ``rel`` (``rel[i, j]``: i in S forces j in S), as bitmasks."""
    n = rel.shape[0]
    above = [_mask_of(rel[i]) for i in range(n)]
    # one representative per class, larger classes first
    reps = sorted({above[i]: i for i in range(n)}.values(), key=lambda i: bin(above[i]).count("1"))
    out = [0]
    for i in reps:
        up = above[i]
        out += [m | up for m in out if m & up == up & ~_class_mask(rel, i)]
        if limit is not None and len(out) > limit:
            raise _Oversize
    return set(out)


def _class_mask(rel, i):
    return _mask_of(rel[i] & rel[:, i])


def _components_on(sets, sizes, proj):
    """Per-sort components pulled back along ``proj``."""
    return tuple(frozenset(_mask_of(_array_of(x, n)[pm]) for x in sets[s])
                 for s, (n, pm) in enumerate(zip(sizes, proj.maps)))


def close_language_family(langs, mode="boolean", presentation=elementary_translations,
                          preimage_class=None, max_image=2, source_limit=SOURCE_LIMIT,
                          member_limit=MEMBER_LIMIT):
    """Least family containing ``langs`` closed under the set operations of ``mode``,
    derivatives by the operations of ``presentation`` and diagonals; with a
    ``preimage_class`` also under preimages of the class's substitutions
    (images of length at most ``max_image``, same alphabet).

    Preimage steps that would grow the source past ``source_limit`` elements
    or the family past ``member_limit`` members are skipped and the result is
    flagged as truncated.
    """
    family = langs if isinstance(langs, LanguageFamily) else family_from(langs)
    if mode not in ("boolean", "positive"):
        raise ClosureError(f"mode must be 'boolean' or 'positive', got {mode!r}")
    ordered = family.source.algebra.ordered
    if ordered and mode == "boolean":
        raise ClosureError("boolean closure is not available in the ordered regime")
    cls = None if preimage_class in (None, "off") else morphism_class(preimage_class)
    source = family.source
    truncated = family.truncated

    def close(src, comps):
        return _close_components(presentation(src.algebra), comps, mode, ordered, member_limit)

    # preimages commute with unions, so it is enough to pull back a set of
    # members whose unions give the whole family
    try:
        sets, gens = close(source, family.components())
    except _Oversize:
        raise ClosureError(f"the closure has more than {member_limit} members") from None
    if cls is not None and (source.algebra.signature.sorts != ("m",)
                            or source.algebra.signature.constants() != ("1",)):
        raise ClosureError("preimage closure is implemented for word languages (monoid recognizers)")
    skipped = set()
    while cls is not None:
        alg = source.algebra
        grown = False
        extra = set()
        for g in substitutions(source.alphabet, max_image):
            if not cls(g) or g in skipped:
                continue
            lm = tuple(_eval_word_in(alg, source.letter_map, source.letters, w) for w in g.images)
            if lm == source.letter_map:
                continue
            joint, (p0, p1) = joint_recognizer([(alg, source.letter_map), (alg, lm)], source.letters)
            if joint.algebra.sizes != alg.sizes:
                if joint.algebra.total_size() > source_limit:
                    truncated = True
                    skipped.add(g)
                    continue
                # grow the source: current generators plus their preimages
                here = _components_on(gens, alg.sizes, p0)
                there = _components_on(gens, alg.sizes, p1)
                try:
                    new_sets, new_gens = close(joint, tuple(a | b for a, b in zip(here, there)))
                except _Oversize:
                    truncated = True
                    skipped.add(g)
                    continue
                source, sets, gens = joint, new_sets, new_gens
                skipped.clear()
                grown = True
                break
            # p0 is a bijection: express the preimages on the current source
            inv = np.empty(alg.sizes[0], dtype=np.int64)
            inv[p0.maps[0]] = np.arange(alg.sizes[0])
            via = p1.maps[0][inv]
            for x in gens[0]:
                y = _mask_of(_array_of(x, alg.sizes[0])[via])
                if y not in sets[0]:
                    extra.add(y)
        if grown:
            continue
        if not extra:
            break
        try:
            sets, gens = close(source, (frozenset(gens[0] | extra),))
        except _Oversize:
            truncated = True
            break
    members = frozenset(itertools.product(*[sorted(s) for s in sets]))
    return LanguageFamily(source, members, ordered, truncated)


def straubing_filter(langs, cls, **kwargs):
    """Closure whose preimages are restricted to the morphism class ``cls``."""
    return close_language_family(langs, preimage_class=morphism_class(cls), **kwargs)


# ---------------------------------------------------------------------------
# the correspondence


def syntactic_kernel(family, member, presentation=elementary_translations):
    """Syntactic congruence (or preorder) of one member, on the family's source."""
    rec = family.recognizer(member)
    return syntactic_refinement(rec, presentation(rec.algebra))


def family_to_pseudovariety(f, bound=None, presentation=elementary_translations):
    """Ideal generated by the syntactic quotients of the members of ``f``."""
    bound = default_bound() if bound is None else bound
    kernels = {}
    for member in f:
        k = syntactic_kernel(f, member, presentation)
        kernels.setdefault(k.key(), k)
    v = _ideal(f.source, kernels.values(), bound)
    if f.truncated and not v.truncated:
        v = LocalPseudovariety(v.source, v.members, v.bound, True)
    return v


@dataclass
class RoundtripReport:
    ok: bool
    inconclusive: bool
    ideal_size: int
    family_size: int
    checks: dict
    witnesses: list


def roundtrip_check(seed, bound=None, mode=None, presentation=elementary_translations,
                    preimage_class=None, kind=None):
    """Check that the two constructions are mutually inverse on closed objects.

    ``seed`` is a LocalPseudovariety, a list of generator recognizers
    (``kind="generators"``) or a list of languages (``kind="languages"``,
    the default for lists).
    """
    bound = default_bound() if bound is None else bound
    witnesses = []
    if isinstance(seed, LocalPseudovariety) or kind == "generators":
        v = seed if isinstance(seed, LocalPseudovariety) else generate_local_pseudovariety(seed, bound)
        ordered = v.source.algebra.ordered
        mode = mode or ("positive" if ordered else "boolean")
        w = languages_of(v)
        v2 = family_to_pseudovariety(w, bound, presentation)
        w2 = languages_of(v2)
        closed = close_language_family(w, mode, presentation, preimage_class)
        checks = {
            "ideal -> languages -> ideal": v2.same_as(v),
            "languages -> ideal -> languages": w2.same_as(w),
            "languages are closed": closed.same_as(w),
        }
    else:
        fam = seed if isinstance(seed, LanguageFamily) else family_from(seed)
        ordered = fam.source.algebra.ordered
        mode = mode or ("positive" if ordered else "boolean")
        w = close_language_family(fam, mode, presentation, preimage_class)
        v = family_to_pseudovariety(w, bound, presentation)
        w2 = languages_of(v)
        v2 = family_to_pseudovariety(w2, bound, presentation)
        checks = {
            "languages -> ideal -> languages": w2.same_as(w),
            "ideal -> languages -> ideal": v2.same_as(v),
        }
    for name, good in checks.items():
        if not good:
            witnesses.append(name)
    inconclusive = v.truncated or w.truncated or v2.truncated
    return RoundtripReport(not witnesses and not inconclusive, inconclusive, len(v), len(w), checks, witnesses)


__all__ = [
    "ALL",
    "BOUND_ENV",
    "ClosureError",
    "LENGTH_PRESERVING",
    "LanguageFamily",
    "LawError",
    "LocalPseudovariety",
    "MEMBER_LIMIT",
    "MorphismClass",
    "NON_ERASING",
    "ProfiniteLaw",
    "RoundtripReport",
    "close_language_family",
    "default_bound",
    "family_from",
    "family_to_pseudovariety",
    "generate_local_pseudovariety",
    "idempotent_power",
    "languages_of",
    "morphism_class",
    "roundtrip_check",
    "satisfies_profinite_law",
    "straubing_filter",
    "substitutions",
    "syntactic_kernel",
]
