from fractions import Fraction
import itertools

import pytest

from symred import involutions as inv
from symred.oracles import (
    oracle_inclusion_defect,
    oracle_neg_slack,
    oracle_oplus,
    oracle_squared_class,
    oracle_two_conjugates,
)
from symred.perm import Permutation, compose, conjugate, cycle_type, from_cycles, hamming, identity


def all_involutions(n):
    for p in itertools.permutations(range(n)):
        q = Permutation(p)
        if q.is_involution():
            yield q


def test_class_basics():
    C = inv.InvolutionClass(6, 2)
    assert C.d1 == Fraction(2, 3)
    assert C.representative().image == (1, 0, 3, 2, 4, 5)
    members = list(C.members())
    assert len(members) == 45 == len(set(members))
    assert all(len(m.support()) == 4 and m.is_involution() for m in members)
    assert inv.class_of(Permutation([0, 2, 1])) == inv.InvolutionClass(3, 1)
    with pytest.raises(ValueError):
        inv.InvolutionClass(3, 2)


@pytest.mark.parametrize("n,t", [(n, t) for n in range(1, 7) for t in range(n // 2 + 1)])
def test_squared_class_matches_oracle(n, t):
    assert set(inv.squared_class(inv.InvolutionClass(n, t))) == oracle_squared_class(n, t)


def test_squared_class_frozen_values():
    assert inv.squared_class(inv.InvolutionClass(4, 2)) == {(), (2, 2)}
    assert inv.squared_class(inv.InvolutionClass(4, 1)) == {(), (3,), (2, 2)}
    assert inv.squared_class(inv.InvolutionClass(6, 3)) == {(), (2, 2), (3, 3)}


@pytest.mark.parametrize("n", range(1, 7))
def test_oplus_matches_oracle(n):
    for t1 in range(n // 2 + 1):
        for t2 in range(n // 2 + 1):
            C1, C2 = inv.InvolutionClass(n, t1), inv.InvolutionClass(n, t2)
            assert inv.oplus_empirical(C1, C2) == oracle_oplus(n, t1, t2)


def test_oplus_predicted_is_truncated_sum():
    C1, C2 = inv.InvolutionClass(7, 2), inv.InvolutionClass(7, 3)
    assert inv.oplus_predicted(C1, C2) == 1
    assert inv.oplus_predicted(inv.InvolutionClass(7, 1), inv.InvolutionClass(7, 1)) == Fraction(4, 7)


@pytest.mark.parametrize("n", range(2, 7))
def test_inclusion_defect_matches_oracle(n):
    for t1 in range(n // 2 + 1):
        for t2 in range(n // 2 + 1):
            got = inv.inclusion_defect(inv.InvolutionClass(n, t1), inv.InvolutionClass(n, t2))
            assert got.value == oracle_inclusion_defect(n, t1, t2)


def test_sym4_inclusion_failure():
    res = inv.inclusion_defect(inv.InvolutionClass(4, 1), inv.InvolutionClass(4, 2))
    assert res.value == Fraction(3, 4)
    assert cycle_type(res.witness) == (3,)


@pytest.mark.parametrize("n", range(1, 7))
def test_neg_witness_slack_is_optimal(n):
    for a in all_involutions(n):
        w = inv.neg_witness(a, Fraction(1))
        assert w.slack == oracle_neg_slack(a)
        assert w.b.is_involution() and compose(a, w.b) == compose(w.b, a)
        assert w.slack == Fraction(len(a.fixed_points()) % 2, n)


def test_neg_witness_parity_obstruction():
    a = Permutation([1, 0, 2, 3, 4])
    assert not inv.neg_witness(a, Fraction(1, 10)).feasible
    assert inv.neg_witness(a, Fraction(1, 5)).feasible
    with pytest.raises(ValueError):
        inv.neg_witness(Permutation([1, 2, 0]), Fraction(1))


def test_factor_range():
    # a 5-cycle: even, no fixed-point pairs beyond the cycle itself
    assert inv.factor_range(from_cycles(5, [[0, 1, 2, 3, 4]])) == (True, 2, 2)
    # identity on 6 points is a product of any two equal involutions
    assert inv.factor_range(identity(6)) == (True, 0, 3)
    assert inv.factor_range(from_cycles(4, [[0, 1]]))[0] is False


@pytest.mark.parametrize("n", range(1, 7))
def test_two_conjugates_agrees_with_oracle(n):
    for p in itertools.permutations(range(n)):
        b = Permutation(p)
        for t in range(n // 2 + 1):
            err, _, _ = oracle_two_conjugates(b, t)
            res = inv.two_conjugates(b, t, Fraction(0))
            assert res.feasible == (err == 0)
            if res.feasible:
                a = inv.InvolutionClass(n, t).representative()
                x, y = conjugate(res.g, a), conjugate(res.h, a)
                assert compose(x, y) == b
                assert len(x.support()) == len(y.support()) == 2 * t
            else:
                assert err >= res.error_lower_bound


def test_two_conjugates_odd_correction():
    b = from_cycles(6, [[0, 1]])
    res = inv.two_conjugates(b, 2, Fraction(2, 6))
    assert res.feasible
    assert res.error == Fraction(2, 6)
    assert hamming(res.product(), b).value == res.error


def test_class_pair_table_shape():
    rows = inv.class_pair_table(4)
    assert len(rows) == sum((n // 2 + 1) ** 2 for n in range(1, 5))
    row = next(r for r in rows if (r.n, r.t1, r.t2) == (4, 1, 2))
    assert row.inclusion_defect == Fraction(3, 4) and row.witness_type == (3,)
    assert inv.class_pair_csv(rows).splitlines()[0].startswith("n,t1,t2")
