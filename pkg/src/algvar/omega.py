"""Infinite words: finite omega-semigroups in Wilke form, lassos, Ramsey cuts."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .finalg import (
    AlgebraError,
    FiniteAlgebra,
    OpSymbol,
    Signature,
    binary_product_index,
    idempotent_power_table,
    omega_laws,
    validate_laws,
)
from .presentation import Recognizer, RecognizerError, omega_presentation, reduce_quotient, syntactic_algebra

PLUS = "plus"
OMEGA = "omega"
DERIVATIVE_KINDS = ("+left", "+right", "+mix", "+omega", "wleft")


class OmegaError(ValueError):
    pass


def wilke_signature(ordered=False):
    return Signature(
        (PLUS, OMEGA),
        (
            OpSymbol("*", (PLUS, PLUS), PLUS),
            OpSymbol("*", (PLUS, OMEGA), OMEGA),
            OpSymbol("pow", (PLUS,), OMEGA),
        ),
        ordered,
    )


def wilke_algebra(prod, mix, power, labels=None, order=None):
    """Two-sorted algebra from its product, mixed product and omega-power tables."""
    prod = np.asarray(prod, dtype=np.int64)
    mix = np.asarray(mix, dtype=np.int64)
    power = np.asarray(power, dtype=np.int64)
    sizes = (prod.shape[0], mix.shape[1] if mix.ndim == 2 else 0)
    return FiniteAlgebra(wilke_signature(order is not None), sizes, (prod, mix, power), order, labels)


def validate_wilke(alg):
    """Report for the Wilke identities on ``alg``."""
    return validate_laws(alg, omega_laws(alg.size(PLUS)))


@dataclass(frozen=True, eq=False)
class OmegaRecognizer:
    """Recognizer over a Wilke algebra; letters live in the ``plus`` sort."""

    rec: Recognizer

    def __post_init__(self):
        alg = self.rec.algebra
        if alg.signature.sorts != (PLUS, OMEGA):
            raise OmegaError("an omega recognizer needs the sorts plus and omega")
        for name, sort in self.rec.letters:
            if sort != PLUS:
                raise OmegaError(f"letter {name} must be in sort plus")

    @property
    def algebra(self):
        return self.rec.algebra

    @property
    def alphabet(self):
        return self.rec.alphabet

    @property
    def omega_only(self):
        """True when acceptance lives on the omega sort alone (omega-language mode)."""
        return not self.rec.accept[0].any()

    def accepts(self, lasso):
        return lasso_membership(self, lasso)


def omega_recognizer(alg, letters, letter_map, accept_plus, accept_omega):
    rec = Recognizer(alg, tuple((a, PLUS) for a in letters), tuple(letter_map),
                     (np.asarray(accept_plus, dtype=bool), np.asarray(accept_omega, dtype=bool)))
    return OmegaRecognizer(rec)


def infinitely_many_a():
    """Recognizer for ω-words over {a, b} with infinitely many a."""
    prod = [[0, 0], [0, 1]]  # c = contains a, n = no a
    mix = [[0, 1], [0, 1]]   # x·z = z
    power = [0, 1]
    alg = wilke_algebra(prod, mix, power, labels=(("c", "n"), ("C", "N")))
    return omega_recognizer(alg, ("a", "b"), (0, 1), [False, False], [True, False])


# ---------------------------------------------------------------------------
# lasso words


@dataclass(frozen=True)
class LassoWord:
    """The ultimately periodic word ``spoke · loop^ω``."""

    spoke: tuple
    loop: tuple

    def __post_init__(self):
        object.__setattr__(self, "spoke", tuple(self.spoke))
        object.__setattr__(self, "loop", tuple(self.loop))
        if not self.loop:
            raise OmegaError("the loop of a lasso word must be nonempty")

    @classmethod
    def parse(cls, text):
        """``"u;v"`` with letters written consecutively (``";ab"`` has an empty spoke)."""
        if ";" not in text:
            raise OmegaError(f"expected 'spoke;loop', got {text!r}")
        u, v = text.split(";", 1)
        return cls(tuple(u.strip()), tuple(v.strip()))

    def letter(self, i):
        if i < len(self.spoke):
            return self.spoke[i]
        return self.loop[(i - len(self.spoke)) % len(self.loop)]

    def __str__(self):
        return f"{''.join(self.spoke)};{''.join(self.loop)}"


def evaluate_plus(rec, word):
    """Image of a nonempty finite word in the plus sort."""
    if not word:
        raise OmegaError("finite words in the plus sort are nonempty")
    r = rec.rec if isinstance(rec, OmegaRecognizer) else rec
    prod = r.algebra.table("*", (PLUS, PLUS))
    x = None
    for a in word:
        _, y = r.letter(a)
        x = y if x is None else int(prod[x, y])
    return x


def evaluate_lasso(rec, lasso):
    """Image of ``u·v^ω`` in the omega sort."""
    alg = rec.algebra
    v = evaluate_plus(rec, lasso.loop)
    z = int(alg.table("pow", (PLUS,))[v])
    if lasso.spoke:
        u = evaluate_plus(rec, lasso.spoke)
        z = int(alg.table("*", (PLUS, OMEGA))[u, z])
    return z


def lasso_membership(rec, lasso):
    if isinstance(lasso, str):
        lasso = LassoWord.parse(lasso)
    return bool(rec.rec.accept[1][evaluate_lasso(rec, lasso)])


# ---------------------------------------------------------------------------
# Ramsey factorization


@dataclass(frozen=True)
class RamseyCuts:
    cuts: tuple
    idempotent: int


def _word_images(target, letter_images):
    if hasattr(target, "rec"):  # a WordLanguage
        rec = target.rec
        alg = rec.algebra
        images = {a: rec.letter(a)[1] for a in rec.alphabet}
    else:
        alg = target
        images = dict(letter_images)
    return alg, alg.tables[binary_product_index(alg, 0)], images


def ramsey_factorize(prefix, period, target, letter_images=None, count=5):
    """Lexicographically least cuts ``k0 < k1 < ...`` of ``prefix·period^ω``.

    Every block ``x[k_i : k_{i+1}]`` maps to the same idempotent of the
    target monoid (given as a monoid algebra with ``letter_images`` or as a
    word language).  The first ``count`` cuts are returned.
    """
    prefix, period = tuple(prefix), tuple(period)
    if not period:
        raise OmegaError("the period must be nonempty")
    if count < 2:
        raise OmegaError("request at least two cuts")
    alg, tab, images = _word_images(target, letter_images)
    try:
        letters = [images[a] for a in prefix + period]
    except KeyError as exc:
        raise OmegaError(f"unknown letter {exc.args[0]!r}") from None
    p, q = len(prefix), len(period)
    npos = p + q
    nxt = np.array([i + 1 if i + 1 < npos else p for i in range(npos)])
    n = alg.sizes[0]
    powers = idempotent_power_table(alg, 0)
    idempotents = sorted({int(e) for e in powers})
    best = None
    for e in idempotents:
        good = _extendable_starts(letters, nxt, tab, n, e)
        if not good.any():
            continue
        cuts = []
        pos = 0
        while not good[_cls(pos, p, q)]:
            pos += 1
        cuts.append(pos)
        while len(cuts) < count:
            v = None
            j = pos
            while True:
                a = letters[_cls(j, p, q)]
                v = a if v is None else int(tab[v, a])
                j += 1
                if v == e and good[_cls(j, p, q)]:
                    break
            cuts.append(j)
            pos = j
        if best is None or tuple(cuts) < best.cuts:
            best = RamseyCuts(tuple(cuts), e)
    assert best is not None  # a finite monoid always admits a factorization
    return best


def _cls(i, p, q):
    return i if i < p else p + (i - p) % q


def _extendable_starts(letters, nxt, tab, n, e):
    """Positions (as classes) from which infinitely many ``e``-blocks can follow.

    Nodes are ``(position class, partial block value)`` with value ``n``
    meaning "block just started"; an edge is a cut when the block value
    reaches ``e``.  A start is good when it reaches a cycle through a cut.
    """
    npos = len(letters)
    start = n
    width = n + 1

    def node(c, v):
        return c * width + v

    total = npos * width
    succ = [[] for _ in range(total)]
    cut_edges = []
    for c in range(npos):
        a = letters[c]
        c2 = int(nxt[c])
        for v in range(width):
            w = a if v == start else int(tab[v, a])
            succ[node(c, v)].append(node(c2, w))
            if w == e:
                succ[node(c, v)].append(node(c2, start))
                cut_edges.append((node(c, v), node(c2, start)))
    pred = [[] for _ in range(total)]
    for u, outs in enumerate(succ):
        for w in outs:
            pred[w].append(u)

    def reach(src, adj):
        seen = np.zeros(total, dtype=bool)
        seen[src] = True
        dq = deque([src])
        while dq:
            u = dq.popleft()
            for w in adj[u]:
                if not seen[w]:
                    seen[w] = True
                    dq.append(w)
        return seen

    recurrent = np.zeros(total, dtype=bool)
    for u, w in cut_edges:
        if not recurrent[u] and reach(w, succ)[u]:
            recurrent[u] = True
    good_nodes = np.zeros(total, dtype=bool)
    for u in np.nonzero(recurrent)[0]:
        if not good_nodes[u]:
            good_nodes |= reach(int(u), pred)
    return np.array([good_nodes[node(c, start)] for c in range(npos)])


# ---------------------------------------------------------------------------
# derivatives


def _ctx_plus(rec, y):
    if isinstance(y, (int, np.integer)):
        raise OmegaError("this derivative takes a finite word, not an omega element")
    return None if len(y) == 0 else evaluate_plus(rec, tuple(y))


def _ctx_omega(rec, z):
    alg = rec.algebra
    if isinstance(z, (int, np.integer)):
        if not 0 <= z < alg.size(OMEGA):
            raise OmegaError("omega element out of range")
        return int(z)
    if isinstance(z, str):
        try:
            return alg.index_of(OMEGA, z)
        except (AlgebraError, ValueError, KeyError):
            pass
    raise OmegaError("the +mix derivative takes an element of the omega sort")


def omega_derivative(rec, kind, ctx):
    """Derivative of the recognized language by one of the omega unary operations.

    ``+left``/``+right`` (finite word y): ``y⁻¹L``, ``Ly⁻¹`` on finite words;
    ``+mix`` (omega element z): ``{x : xz ∈ L}``; ``+omega``: ``{x : x^ω ∈ L}``;
    ``wleft`` (finite word y): ``{z : yz ∈ L}`` on infinite words.
    The sort that is not derived accepts nothing.
    """
    alg = rec.algebra
    acc_p, acc_w = rec.rec.accept
    prod = alg.table("*", (PLUS, PLUS))
    mix = alg.table("*", (PLUS, OMEGA))
    power = alg.table("pow", (PLUS,))
    empty_p = np.zeros_like(acc_p)
    empty_w = np.zeros_like(acc_w)
    if kind == "+left":
        y = _ctx_plus(rec, ctx)
        new = (acc_p.copy() if y is None else acc_p[prod[y, :]], empty_w)
    elif kind == "+right":
        y = _ctx_plus(rec, ctx)
        new = (acc_p.copy() if y is None else acc_p[prod[:, y]], empty_w)
    elif kind == "+mix":
        z = _ctx_omega(rec, ctx)
        new = (acc_w[mix[:, z]], empty_w)
    elif kind == "+omega":
        if ctx not in (None, "", ()):
            raise OmegaError("the +omega derivative takes no context")
        new = (acc_w[power], empty_w)
    elif kind in ("wleft", "ωleft"):
        y = _ctx_plus(rec, ctx)
        new = (empty_p, acc_w.copy() if y is None else acc_w[mix[y, :]])
    else:
        raise OmegaError(f"unknown derivative kind {kind!r}; expected one of {DERIVATIVE_KINDS}")
    return OmegaRecognizer(rec.rec.with_accept(new))


# ---------------------------------------------------------------------------
# syntactic and reduced constructions


def _require_axioms(alg):
    rep = validate_wilke(alg)
    if not rep.ok:
        raise OmegaError(f"not an omega-semigroup: {rep.describe()}")


def syntactic_omega_semigroup(rec):
    """Syntactic omega-semigroup and the projection from the letter-generated part."""
    _require_axioms(rec.algebra)
    syn, proj = syntactic_algebra(rec.rec, omega_presentation)
    return OmegaRecognizer(syn), proj


def syntactic_reduced_omega(rec):
    """Reduced syntactic algebra of an omega-language (acceptance on sort omega only)."""
    if rec.rec.accept[0].any():
        raise OmegaError("reduction expects acceptance on the omega sort only")
    syn, proj = syntactic_omega_semigroup(rec)
    red, rproj = reduce_quotient(syn.rec, omega_presentation(syn.algebra), (OMEGA,))
    return OmegaRecognizer(red), proj.compose(rproj)


def is_complete(alg):
    """Every omega element is ``t^ω`` or ``s·t^ω``."""
    power = alg.table("pow", (PLUS,))
    mix = alg.table("*", (PLUS, OMEGA))
    hit = np.zeros(alg.size(OMEGA), dtype=bool)
    hit[power] = True
    if power.size:
        hit[mix[:, power].reshape(-1)] = True
    return bool(hit.all())


def lassos_up_to(alphabet, max_spoke, max_loop):
    """All lasso words with ``|u| <= max_spoke`` and ``1 <= |v| <= max_loop``."""
    from .words import words_up_to

    spokes = list(words_up_to(alphabet, max_spoke))
    loops = [w for w in words_up_to(alphabet, max_loop) if w]
    for u in spokes:
        for v in loops:
            yield LassoWord(u, v)


__all__ = [
    "DERIVATIVE_KINDS",
    "LassoWord",
    "OmegaError",
    "OmegaRecognizer",
    "RamseyCuts",
    "RecognizerError",
    "evaluate_lasso",
    "evaluate_plus",
    "infinitely_many_a",
    "is_complete",
    "lasso_membership",
    "lassos_up_to",
    "omega_derivative",
    "omega_recognizer",
    "ramsey_factorize",
    "syntactic_omega_semigroup",
    "syntactic_reduced_omega",
    "validate_wilke",
    "wilke_algebra",
    "wilke_signature",
]
