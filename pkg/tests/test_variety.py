import numpy as np
import pytest

from algvar.finalg import cyclic_monoid, monogenic_monoid
from algvar.presentation import Recognizer, RecognizerError
from algvar.variety import (
    ALL,
    LENGTH_PRESERVING,
    NON_ERASING,
    ClosureError,
    close_language_family,
    default_bound,
    family_from,
    family_to_pseudovariety,
    generate_local_pseudovariety,
    idempotent_power,
    languages_of,
    morphism_class,
    roundtrip_check,
    satisfies_profinite_law,
    straubing_filter,
    substitutions,
)
from algvar.words import Dfa, compile_dfa, membership, words_up_to


def unary_rec(alg, accept=()):
    acc = np.zeros(alg.sizes[0], dtype=bool)
    acc[list(accept)] = True
    return Recognizer(alg, (("a", "m"),), (1,), (acc,))


def epsilon_only():
    return compile_dfa(Dfa.from_transitions(["e", "x"], ["a", "b"],
                                            {("e", "a"): "x", ("e", "b"): "x", ("x", "a"): "x",
                                             ("x", "b"): "x"}, "e", ["e"]))


def test_idempotent_power():
    alg = monogenic_monoid(2, 3)  # 1, a, a2, a3, a4 with a5 = a2
    e = idempotent_power(alg, 1)
    tab = alg.tables[1]
    assert tab[e, e] == e
    assert idempotent_power(cyclic_monoid(5), 2) == 0


def test_profinite_law_on_z2():
    rep = satisfies_profinite_law(cyclic_monoid(2), "x^w * x = x^w")
    assert not rep.ok and rep.witness == {"x": "s0#1"}
    assert satisfies_profinite_law(monogenic_monoid(3, 1), "x^w * x = x^w").ok


def test_z2_ideal():
    v = generate_local_pseudovariety([unary_rec(cyclic_monoid(2))], 6)
    assert len(v) == 2 and not v.truncated


def test_z2_z3_ideal_and_truncation():
    gens = [unary_rec(cyclic_monoid(2)), unary_rec(cyclic_monoid(3))]
    v = generate_local_pseudovariety(gens, 6)
    assert len(v) == 4 and not v.truncated
    assert sorted(s[0] for s in v.sizes()) == [1, 2, 3, 6]
    small = generate_local_pseudovariety(gens, 4)
    assert small.truncated and len(small) == 3


def test_generators_must_share_alphabet():
    a = unary_rec(cyclic_monoid(2))
    b = Recognizer(cyclic_monoid(2), (("b", "m"),), (1,), (np.zeros(2, dtype=bool),))
    with pytest.raises(RecognizerError):
        generate_local_pseudovariety([a, b], 4)


def test_languages_of_z2_ideal():
    v = generate_local_pseudovariety([unary_rec(cyclic_monoid(2))], 6)
    w = languages_of(v)
    assert len(w) == 4
    seen = set()
    for member in w:
        rec = w.recognizer(member)
        seen.add(tuple(bool(rec.accept[0][k % 2]) for k in range(2)))
    assert seen == {(False, False), (True, False), (False, True), (True, True)}


def test_boolean_and_positive_closure(ab_star_dfa):
    lang = compile_dfa(ab_star_dfa)
    boolean = close_language_family([lang], "boolean")
    positive = close_language_family([lang], "positive")
    assert len(boolean) == 64
    assert len(positive) == 21
    assert positive.issubset(boolean) and not boolean.issubset(positive)


def test_closure_contains_derivatives(ab_star_dfa):
    lang = compile_dfa(ab_star_dfa)
    fam = close_language_family([lang], "positive")
    from algvar.words import derivative

    for y in ["a", "b", "ab", "ba"]:
        for side in ("left", "right"):
            d = derivative(lang, side, y)
            extra = family_from([d])
            assert extra.issubset(fam)


def test_boolean_closure_needs_unordered():
    from algvar.words import compile_dfa

    dfa = Dfa.from_transitions(["0", "1"], ["a"], {("0", "a"): "1", ("1", "a"): "1"}, "0", ["1"])
    lang = compile_dfa(dfa, ordered=True)
    rec = lang.rec.with_algebra(lang.rec.algebra.as_ordered())
    with pytest.raises(ClosureError):
        close_language_family([rec], "boolean")
    assert len(close_language_family([rec], "positive")) >= 2


def test_family_to_pseudovariety(ab_star_dfa):
    fam = close_language_family([compile_dfa(ab_star_dfa)], "boolean")
    v = family_to_pseudovariety(fam, 6)
    assert len(v) == 3


def test_roundtrip_languages(ab_star_dfa):
    rep = roundtrip_check([compile_dfa(ab_star_dfa)], 6)
    assert rep.ok and not rep.inconclusive
    assert all(rep.checks.values())


def test_roundtrip_generators():
    rep = roundtrip_check([unary_rec(cyclic_monoid(2))], 4, kind="generators")
    assert rep.ok


def test_roundtrip_flags_truncation():
    gens = [unary_rec(cyclic_monoid(2)), unary_rec(cyclic_monoid(3))]
    rep = roundtrip_check(gens, 4, kind="generators")
    assert rep.inconclusive and not rep.ok


def test_straubing_classes_on_epsilon():
    lang = epsilon_only()
    full = straubing_filter([lang], "all")
    non_erasing = straubing_filter([lang], "non-erasing")
    lp = straubing_filter([lang], "length-preserving")
    plain = close_language_family([lang])
    assert len(full) == 16
    assert len(lp) == 4 and len(non_erasing) == 4 and len(plain) == 4
    assert lp.issubset(full) and not full.issubset(lp)


def test_preimage_closure_contains_preimages(ab_star_dfa):
    from algvar.words import SubstitutionSpec, preimage

    lang = compile_dfa(ab_star_dfa)
    fam = straubing_filter([lang], "length-preserving")
    g = SubstitutionSpec(("a", "b"), ("a", "b"), (("b",), ("a",)))
    assert family_from([preimage(lang, g)]).issubset(fam)


def test_morphism_classes_are_closed():
    for cls in (ALL, NON_ERASING, LENGTH_PRESERVING):
        assert cls.check_closure("ab", 2) is None
    with pytest.raises(ClosureError):
        morphism_class("bijective")


def test_substitutions_count():
    assert len(list(substitutions("ab", 2))) == 7 ** 2


def test_family_members_agree_with_languages(ab_star_dfa):
    lang = compile_dfa(ab_star_dfa)
    fam = family_from([lang])
    (member,) = list(fam)
    rec = fam.recognizer(member)
    from algvar.words import WordLanguage

    for w in words_up_to("ab", 5):
        assert membership(WordLanguage(rec), w) == membership(lang, w)


def test_bound_env(monkeypatch):
    monkeypatch.setenv("ALGVAR_BOUND", "3")
    assert default_bound() == 3
    monkeypatch.setenv("ALGVAR_BOUND", "zero")
    with pytest.raises(ValueError):
        default_bound()
    monkeypatch.delenv("ALGVAR_BOUND")
    assert default_bound() == 6


def _naive_closure(rec, mode):
    """Pairwise unions, intersections (and complements) plus one-letter derivatives until nothing changes."""
    from algvar.presentation import elementary_translations

    n = rec.algebra.sizes[0]
    full = (1 << n) - 1
    start = sum(1 << i for i in np.nonzero(rec.accept[0])[0])
    fam = {0, full, start}
    maps = [[int(x) for x in u.map] for u in elementary_translations(rec.algebra).ops]
    while True:
        new = set(fam)
        for x in fam:
            for m in maps:
                new.add(sum(1 << i for i, j in enumerate(m) if (x >> j) & 1))
            if mode == "boolean":
                new.add(full & ~x)
            for y in fam:
                new.update((x | y, x & y))
        if new == fam:
            return fam
        fam = new


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("mode", ["boolean", "positive"])
def test_closure_matches_naive_closure(seed, mode):
    import random

    rng = random.Random(seed)
    while True:
        dfa = Dfa.from_transitions(["p", "q", "r"], ["a", "b"],
                                   {(s, x): rng.choice("pqr") for s in "pqr" for x in "ab"}, "p",
                                   [s for s in "pqr" if rng.random() < 0.5])
        seed_family = family_from([compile_dfa(dfa)])
        if seed_family.source.algebra.sizes[0] <= 10:
            break
    fam = close_language_family(seed_family, mode)
    naive = _naive_closure(seed_family.recognizer(next(iter(seed_family))), mode)
    assert {m[0] for m in fam.members} == naive


def test_member_limit_flags_truncation(ab_star_dfa):
    lang = compile_dfa(ab_star_dfa)
    fam = straubing_filter([lang], "all")
    assert fam.truncated and len(fam) <= 1 << 16
    assert not straubing_filter([lang], "all", mode="positive").truncated
    with pytest.raises(ClosureError):
        close_language_family([lang], member_limit=8)


def test_positive_preimage_closure_sizes(ab_star_dfa):
    lang = compile_dfa(ab_star_dfa)
    sizes = [len(straubing_filter([lang], c, mode="positive")) for c in ("length-preserving", "non-erasing", "all")]
    assert sizes == [46, 1646, 4840]
    assert len(close_language_family([lang], "positive")) == 21
