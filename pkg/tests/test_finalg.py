import numpy as np
import pytest

from algvar.finalg import (
    AlgebraError,
    Congruence,
    FiniteAlgebra,
    LawError,
    MONOID_LAWS,
    OpSymbol,
    Signature,
    StabilityError,
    check_law,
    cyclic_monoid,
    direct_product,
    divides,
    enumerate_quotients,
    factor_through,
    generated_subalgebra,
    homomorphisms,
    identity_morphism,
    monogenic_monoid,
    monoid_signature,
    monoids_of_order,
    quotient_by,
    quotient_leq,
    relation_leq,
    semigroups_of_order,
    subalgebras,
    validate_laws,
)


def test_signature_rejects_undeclared_sort():
    with pytest.raises(AlgebraError):
        Signature(("m",), (OpSymbol("*", ("m", "x"), "m"),))


def test_signature_rejects_duplicate_op():
    with pytest.raises(AlgebraError):
        Signature(("m",), (OpSymbol("*", ("m", "m"), "m"), OpSymbol("*", ("m", "m"), "m")))


def test_table_shape_and_range_checked():
    sig = monoid_signature()
    with pytest.raises(AlgebraError):
        FiniteAlgebra(sig, (2,), (np.array(0), np.zeros((2, 3), dtype=int)))
    with pytest.raises(AlgebraError):
        FiniteAlgebra(sig, (2,), (np.array(0), np.full((2, 2), 2)))


def test_order_must_be_monotone():
    sig = monoid_signature(ordered=True)
    tab = np.array([[0, 1], [1, 0]])  # Z2 is not monotone for 0 <= 1
    with pytest.raises(AlgebraError):
        FiniteAlgebra(sig, (2,), (np.array(0), tab), (np.array([[True, True], [False, True]]),))


def test_order_must_be_partial_order():
    sig = monoid_signature(ordered=True)
    tab = np.array([[0, 1], [1, 1]])
    with pytest.raises(AlgebraError):
        FiniteAlgebra(sig, (2,), (np.array(0), tab), (np.ones((2, 2), dtype=bool),))


def test_labels_distinct():
    with pytest.raises(AlgebraError):
        cyclic_monoid(2).with_labels((("1", "1"),))


def test_cyclic_congruences_match_divisors():
    for n, count in [(1, 1), (2, 2), (4, 3), (6, 4), (5, 2)]:
        assert len(enumerate_quotients(cyclic_monoid(n))) == count


def test_quotient_by_non_congruence_raises():
    alg = monogenic_monoid(1, 2)  # {1, a, a^2 = ... }
    c = Congruence.from_blocks(alg, [[[0, 1], [2]]])
    with pytest.raises(StabilityError):
        quotient_by(alg, c)


def test_quotient_by_identity_and_total():
    alg = cyclic_monoid(4)
    q, proj = quotient_by(alg, Congruence.identity(alg))
    assert q.sizes == (4,)
    q, proj = quotient_by(alg, Congruence.total(alg))
    assert q.sizes == (1,)
    assert proj.is_homomorphism() and proj.is_surjective()


def test_meet_and_leq():
    alg = cyclic_monoid(6)
    qs = enumerate_quotients(alg)
    by_size = {tuple(q.block_counts()): q for q in qs}
    two, three = by_size[(2,)], by_size[(3,)]
    m = two.meet(three)
    assert m.block_counts() == (6,)
    assert relation_leq(two, m) and relation_leq(three, m)
    assert not relation_leq(two, three)


def test_factor_through_and_quotient_leq():
    alg = cyclic_monoid(4)
    qs = {tuple(q.block_counts()): quotient_by(alg, q)[1] for q in enumerate_quotients(alg)}
    g = factor_through(qs[(4,)], qs[(2,)])
    assert g is not None and g.is_homomorphism()
    assert factor_through(qs[(2,)], qs[(4,)]) is None
    assert quotient_leq(qs[(2,)], qs[(4,)])
    assert not quotient_leq(qs[(4,)], qs[(2,)])


def test_direct_product_projections():
    p = direct_product([cyclic_monoid(2), cyclic_monoid(3)])
    assert p.algebra.sizes == (6,)
    for pr in p.projections:
        assert pr.is_homomorphism() and pr.is_surjective()
    assert validate_laws(p.algebra, MONOID_LAWS).ok


def test_generated_subalgebra():
    p = direct_product([cyclic_monoid(2), cyclic_monoid(2)]).algebra
    sub, inc = generated_subalgebra(p, [[3]])  # the diagonal (1,1)
    assert sub.sizes == (2,)
    assert inc.is_injective() and inc.is_homomorphism()


def test_homomorphism_counts():
    assert len(list(homomorphisms(cyclic_monoid(2), cyclic_monoid(2)))) == 2
    assert len(list(homomorphisms(cyclic_monoid(3), cyclic_monoid(2)))) == 1
    assert len(list(homomorphisms(cyclic_monoid(4), cyclic_monoid(2), surjective=True))) == 1


def test_subalgebras_of_z4():
    subs = sorted(s.sizes[0] for s, _ in subalgebras(cyclic_monoid(4)))
    assert subs == [1, 2, 4]


def test_divides():
    assert divides(cyclic_monoid(2), cyclic_monoid(4)) is not None
    assert divides(cyclic_monoid(3), cyclic_monoid(4)) is None
    assert divides(cyclic_monoid(2), direct_product([cyclic_monoid(3), cyclic_monoid(2)]).algebra) is not None


def test_identity_morphism():
    alg = cyclic_monoid(3)
    e = identity_morphism(alg)
    assert e.is_homomorphism() and e.is_injective() and e.is_surjective()


def test_enumerations_are_associative():
    for alg in semigroups_of_order(2):
        assert check_law(alg, "(x * y) * z = x * (y * z)").ok
    for alg in monoids_of_order(3):
        assert validate_laws(alg, MONOID_LAWS).ok


def test_check_law_witness_is_first_failure():
    rep = check_law(cyclic_monoid(2), "x^w * x = x^w")
    assert not rep.ok
    assert rep.witness == {"x": "s0#1"}
    assert rep.checked == 2


def test_check_law_vectorized_matches_loop():
    alg = monogenic_monoid(2, 2)
    law = "x * y = y * x"
    assert check_law(alg, law).ok
    law = "x * x = x"
    tab = alg.tables[1]
    bad = [x for x in range(4) if tab[x, x] != x]
    rep = check_law(alg, law)
    assert not rep.ok and rep.witness == {"x": f"s0#{bad[0]}"}


def test_inequation_needs_order():
    with pytest.raises(LawError):
        check_law(cyclic_monoid(2), "x <= x * x")


def test_unknown_operation_is_an_error():
    with pytest.raises(LawError):
        check_law(cyclic_monoid(2), "f(x) = x")


def test_variables_in_empty_sorts_are_vacuous():
    sig = Signature(("a", "b"), (OpSymbol("f", ("b",), "b"),))
    empty = FiniteAlgebra(sig, (1, 0), (np.zeros(0, dtype=int),))
    rep = check_law(empty, "f(x:b) = x")
    assert rep.ok and rep.checked == 0


def test_quasi_law():
    alg = monogenic_monoid(1, 2)
    assert check_law(alg, "x * x = x => x^w = x").ok
    assert check_law(alg, "x * x = x * x * x => x = x * x").ok
    alg = monogenic_monoid(2, 1)
    assert not check_law(alg, "x * x = x * x * x => x = x * x").ok
