import random

import numpy as np
import pytest

from algvar.finalg import cyclic_monoid, divides, is_isomorphic
from algvar.words import (
    Dfa,
    DfaError,
    SubstitutionSpec,
    aperiodicity_witness,
    compile_dfa,
    derivative,
    is_aperiodic,
    membership,
    monoid_language,
    preimage,
    syntactic_monoid,
    transition_monoid,
    words_up_to,
)

from conftest import dfa_congruence_classes, word_congruence_classes


def random_dfa(rng, n, alphabet=("a", "b")):
    delta = [[rng.randrange(n) for _ in alphabet] for _ in range(n)]
    finals = frozenset(q for q in range(n) if rng.random() < 0.4)
    return Dfa(tuple(f"q{i}" for i in range(n)), alphabet, np.array(delta), 0, finals)


def complement(d):
    return Dfa(d.states, d.alphabet, d.delta, d.initial, frozenset(range(len(d.states))) - d.finals)


def test_dfa_validation():
    with pytest.raises(DfaError):
        Dfa(("q0",), ("a",), np.array([[1]]), 0, frozenset())
    with pytest.raises(DfaError):
        Dfa.from_transitions(["p", "q"], ["a"], {("p", "a"): "q"}, "p", [])
    with pytest.raises(DfaError):
        Dfa(("q0", "q0"), ("a",), np.array([[0], [0]]), 0, frozenset())


def test_transition_monoid_of_ab_star(ab_star_dfa):
    alg, arr, images = transition_monoid(ab_star_dfa)
    assert alg.sizes == (6,)
    assert alg.labels[0] == ("1", "a", "b", "aa", "ab", "ba")
    assert images == [1, 2]


def test_membership_matches_dfa(ab_star_dfa):
    lang = compile_dfa(ab_star_dfa)
    for w in words_up_to("ab", 6):
        assert membership(lang, w) == ab_star_dfa.accepts(w)


@pytest.mark.parametrize("seed", range(15))
def test_syntactic_size_matches_congruence_oracle(seed):
    rng = random.Random(seed)
    d = random_dfa(rng, rng.randrange(1, 4))
    syn, _ = syntactic_monoid(compile_dfa(d))
    # every element of a 3-state transition monoid has a word of length <= 8
    oracle = dfa_congruence_classes(d, max_len=8, ctx_len=4)
    assert syn.monoid.sizes[0] == oracle
    if seed < 3:
        assert word_congruence_classes(d.accepts, "ab", 5, 3) == dfa_congruence_classes(d, 5, 3)


@pytest.mark.parametrize("seed", range(15))
def test_complement_has_same_syntactic_monoid(seed):
    rng = random.Random(100 + seed)
    d = random_dfa(rng, rng.randrange(1, 5))
    a, _ = syntactic_monoid(compile_dfa(d))
    b, _ = syntactic_monoid(compile_dfa(complement(d)))
    assert is_isomorphic(a.monoid, b.monoid)


@pytest.mark.parametrize("seed", range(10))
def test_syntactic_monoid_divides_transition_monoid(seed):
    rng = random.Random(200 + seed)
    d = random_dfa(rng, 3)
    lang = compile_dfa(d)
    syn, proj = syntactic_monoid(lang)
    assert proj.is_homomorphism() and proj.is_surjective()
    if lang.monoid.sizes[0] <= 12:
        assert divides(syn.monoid, lang.monoid) is not None


def test_derivatives(ab_star_dfa):
    lang = compile_dfa(ab_star_dfa)
    left = derivative(lang, "left", "a")
    assert [w for w in words_up_to("ab", 4) if membership(left, w)] == [("b",), ("b", "a", "b")]
    right = derivative(lang, "right", "b")
    assert [w for w in words_up_to("ab", 3) if membership(right, w)] == [("a",), ("a", "b", "a")]
    with pytest.raises(ValueError):
        derivative(lang, "middle", "a")


@pytest.mark.parametrize("seed", range(10))
def test_derivative_semantics(seed):
    rng = random.Random(300 + seed)
    d = random_dfa(rng, 3)
    lang = compile_dfa(d)
    for y in [("a",), ("b", "a"), ()]:
        left = derivative(lang, "left", y)
        right = derivative(lang, "right", y)
        for w in words_up_to("ab", 4):
            assert membership(left, w) == d.accepts(y + w)
            assert membership(right, w) == d.accepts(w + y)


def test_preimage(ab_star_dfa):
    lang = compile_dfa(ab_star_dfa)
    g = SubstitutionSpec.parse(["c=ab"], ("a", "b"))
    pre = preimage(lang, g)
    assert pre.alphabet == ("c",)
    assert all(membership(pre, w) for w in words_up_to("c", 5))
    g = SubstitutionSpec.parse(["a=ba", "b="], ("a", "b"))
    pre = preimage(lang, g)
    for w in words_up_to("ab", 4):
        assert membership(pre, w) == ab_star_dfa.accepts(g.apply(w))


def test_substitution_compose_and_classes():
    g = SubstitutionSpec.parse(["a=ab", "b=b"], ("a", "b"))
    h = SubstitutionSpec.parse(["c=a", "d="], ("a", "b"))
    gh = g.compose(h)
    assert gh.images == (("a", "b"), ())
    assert g.is_non_erasing() and not g.is_length_preserving()
    assert not h.is_non_erasing()
    with pytest.raises(ValueError):
        SubstitutionSpec.parse(["a=z"], ("a", "b"))


def test_named_sizes():
    # (ab)* -> 6, (aa)* -> 2, everything -> 1
    ab = Dfa.from_transitions(["0", "1", "2"], ["a", "b"],
                              {("0", "a"): "1", ("0", "b"): "2", ("1", "a"): "2", ("1", "b"): "0",
                               ("2", "a"): "2", ("2", "b"): "2"}, "0", ["0"])
    aa = Dfa.from_transitions(["0", "1"], ["a"], {("0", "a"): "1", ("1", "a"): "0"}, "0", ["0"])
    top = Dfa.from_transitions(["0"], ["a", "b"], {("0", "a"): "0", ("0", "b"): "0"}, "0", ["0"])
    assert [syntactic_monoid(compile_dfa(d))[0].monoid.sizes[0] for d in (ab, aa, top)] == [6, 2, 1]


def test_ordered_syntactic_monoid_is_ordered(ab_star_dfa):
    syn, _ = syntactic_monoid(compile_dfa(ab_star_dfa, ordered=True))
    assert syn.monoid.ordered and syn.monoid.sizes == (6,)
    acc = syn.rec.accept[0]
    lo, hi = np.nonzero(syn.monoid.order[0])
    assert not (acc[lo] & ~acc[hi]).any()


def test_aperiodicity():
    assert aperiodicity_witness(cyclic_monoid(2)) == 1
    assert not is_aperiodic(cyclic_monoid(3))
    assert is_aperiodic(cyclic_monoid(1))


def test_monoid_language():
    lang = monoid_language(cyclic_monoid(2), ("a",), (1,), [True, False])
    assert membership(lang, "aa") and not membership(lang, "a")
