"""Finite words: DFAs, transition monoids, derivatives, preimages, syntactic monoids."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .finalg import FiniteAlgebra, binary_product_index, idempotent_power_table, monoid_signature
from .presentation import Recognizer, RecognizerError, elementary_translations, syntactic_algebra


class DfaError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Dfa:
    """Complete DFA; ``delta[q, k]`` is the successor of state q on ``alphabet[k]``."""

    states: tuple
    alphabet: tuple
    delta: np.ndarray
    initial: int
    finals: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        states = tuple(str(s) for s in self.states)
        alphabet = tuple(str(a) for a in self.alphabet)
        if len(set(states)) != len(states) or len(set(alphabet)) != len(alphabet):
            raise DfaError("duplicate state or letter")
        delta = np.array(self.delta, dtype=np.int64).reshape(len(states), len(alphabet))
        if delta.size and (delta.min() < 0 or delta.max() >= len(states)):
            raise DfaError("transition leaves the state set")
        if not 0 <= self.initial < len(states):
            raise DfaError("initial state out of range")
        finals = frozenset(int(f) for f in self.finals)
        if any(not 0 <= f < len(states) for f in finals):
            raise DfaError("final state out of range")
        delta.setflags(write=False)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "initial", int(self.initial))
        object.__setattr__(self, "finals", finals)

    @classmethod
    def from_transitions(cls, states, alphabet, transitions, initial, finals):
        """Build from ``{(state, letter): state}`` using names."""
        states = list(states)
        alphabet = list(alphabet)
        delta = np.full((len(states), len(alphabet)), -1, dtype=np.int64)
        for (q, a), r in transitions.items():
            delta[states.index(q), alphabet.index(a)] = states.index(r)
        if (delta < 0).any():
            q, k = map(int, np.argwhere(delta < 0)[0])
            raise DfaError(f"missing transition from {states[q]} on {alphabet[k]}")
        return cls(tuple(states), tuple(alphabet), delta, states.index(initial),
                   frozenset(states.index(f) for f in finals))

    def run(self, word):
        q = self.initial
        for a in word:
            try:
                q = self.delta[q, self.alphabet.index(a)]
            except ValueError:
                raise DfaError(f"unknown letter {a!r}") from None
        return int(q)

    def accepts(self, word):
        return self.run(word) in self.finals


@dataclass(frozen=True, eq=False)
class WordLanguage:
    rec: Recognizer
    ordered: bool = False

    @property
    def monoid(self):
        return self.rec.algebra

    @property
    def alphabet(self):
        return self.rec.alphabet

    def accepts(self, word):
        return membership(self, word)

    def accept_set(self):
        return self.rec.accept[0]


@dataclass(frozen=True)
class SubstitutionSpec:
    """Monoid morphism Δ* → Σ* given by the images of the letters of Δ."""

    source: tuple
    target: tuple
    images: tuple  # one word (tuple of letters) per source letter

    def __post_init__(self):
        src = tuple(self.source)
        tgt = tuple(self.target)
        imgs = tuple(tuple(w) for w in self.images)
        if len(imgs) != len(src):
            raise ValueError("one image per source letter required")
        for w in imgs:
            for a in w:
                if a not in tgt:
                    raise ValueError(f"image letter {a!r} not in the target alphabet")
        object.__setattr__(self, "source", src)
        object.__setattr__(self, "target", tgt)
        object.__setattr__(self, "images", imgs)

    @classmethod
    def parse(cls, mapping, target):
        """``mapping``: iterable of strings like ``"c=ab"`` (``"c="`` erases c)."""
        src, imgs = [], []
        for item in mapping:
            if "=" not in item:
                raise ValueError(f"expected letter=word, got {item!r}")
            a, w = item.split("=", 1)
            src.append(a.strip())
            imgs.append(tuple(w.strip()))
        return cls(tuple(src), tuple(target), tuple(imgs))

    def apply(self, word):
        out = []
        for a in word:
            out.extend(self.images[self.source.index(a)])
        return tuple(out)

    def compose(self, other):
        """``self ∘ other``: apply ``other`` first."""
        if other.target != self.source:
            raise ValueError("substitutions do not compose")
        return SubstitutionSpec(other.source, self.target, tuple(self.apply(w) for w in other.images))

    def is_length_preserving(self):
        return all(len(w) == 1 for w in self.images)

    def is_non_erasing(self):
        return all(len(w) >= 1 for w in self.images)


def words_up_to(alphabet, n):
    for k in range(n + 1):
        yield from itertools.product(alphabet, repeat=k)


# ---------------------------------------------------------------------------


def transition_monoid(dfa):
    """Letter transformations closed under composition, identity first, BFS order.

    Returns ``(algebra, letter images)``; elements are labelled by their
    shortlex-least word (``1`` for the identity).
    """
    n = len(dfa.states)
    ident = tuple(range(n))
    letters = [tuple(int(x) for x in dfa.delta[:, k]) for k in range(len(dfa.alphabet))]
    index = {ident: 0}
    elems = [ident]
    names = ["1"]
    head = 0
    while head < len(elems):
        f = elems[head]
        for k, g in enumerate(letters):
            h = tuple(g[q] for q in f)  # f then g
            if h not in index:
                index[h] = len(elems)
                elems.append(h)
                names.append((names[head] if head else "") + dfa.alphabet[k])
        head += 1
    arr = np.array(elems, dtype=np.int64).reshape(len(elems), n)
    m = len(elems)
    table = np.empty((m, m), dtype=np.int64)
    for i in range(m):
        composed = arr[:, arr[i]] if n else np.zeros((m, 0), dtype=np.int64)
        # composed[j] = arr[j] ∘ arr[i]  (first i, then j)
        for j in range(m):
            table[i, j] = index[tuple(composed[j].tolist())]
    alg = FiniteAlgebra(monoid_signature(), (m,), (np.array(0), table), labels=(tuple(names),))
    return alg, arr, [index[g] for g in letters]


def compile_dfa(dfa, ordered=False):
    alg, arr, images = transition_monoid(dfa)
    finals = np.zeros(len(dfa.states), dtype=bool)
    finals[list(dfa.finals)] = True
    accept = finals[arr[:, dfa.initial]] if len(dfa.states) else np.zeros(alg.sizes[0], dtype=bool)
    rec = Recognizer(alg, tuple((a, "m") for a in dfa.alphabet), tuple(images), (accept,))
    return WordLanguage(rec, ordered)


def monoid_language(monoid, alphabet, images, accept, ordered=False):
    """Word language recognized by an explicit monoid algebra."""
    rec = Recognizer(monoid, tuple((a, "m") for a in alphabet), tuple(images), (np.asarray(accept, dtype=bool),))
    return WordLanguage(rec, ordered)


def evaluate_word(lang, word):
    alg = lang.monoid
    tab = alg.tables[1]
    x = int(alg.tables[0][()])
    for a in word:
        _, y = lang.rec.letter(a)
        x = int(tab[x, y])
    return x


def membership(lang, word):
    return bool(lang.rec.accept[0][evaluate_word(lang, word)])


def derivative(lang, side, y):
    """``y⁻¹L`` (side='left') or ``Ly⁻¹`` (side='right') on the same monoid."""
    tab = lang.monoid.tables[1]
    yi = evaluate_word(lang, y)
    acc = lang.rec.accept[0]
    if side == "left":
        new = acc[tab[yi, :]]
    elif side == "right":
        new = acc[tab[:, yi]]
    else:
        raise ValueError("side must be 'left' or 'right'")
    return WordLanguage(lang.rec.with_accept((new,)), lang.ordered)


def preimage(lang, g):
    """``g⁻¹L`` for a substitution ``g: Δ* → Σ*``; same monoid, new letter map."""
    if any(a not in lang.alphabet for a in g.target):
        raise RecognizerError("substitution targets letters outside the language's alphabet")
    images = tuple(evaluate_word(lang, w) for w in g.images)
    rec = Recognizer(lang.monoid, tuple((a, "m") for a in g.source), images, lang.rec.accept)
    return WordLanguage(rec, lang.ordered)


def syntactic_monoid(lang, ordered=None):
    """Syntactic (ordered) monoid recognizer and the projection from the reachable monoid."""
    ordered = lang.ordered if ordered is None else ordered
    rec = lang.rec
    if ordered and not rec.algebra.ordered:
        rec = rec.with_algebra(rec.algebra.as_ordered())
    syn, proj = syntactic_algebra(rec, elementary_translations)
    return WordLanguage(syn, ordered), proj


def aperiodicity_witness(monoid):
    """First element with ``x^ω·x ≠ x^ω``, or None."""
    powers = idempotent_power_table(monoid, 0)
    tab = monoid.tables[binary_product_index(monoid, 0)]
    for x in range(monoid.sizes[0]):
        e = powers[x]
        if tab[e, x] != e:
            return x
    return None


def is_aperiodic(monoid):
    return aperiodicity_witness(monoid) is None
