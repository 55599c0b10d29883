from fractions import Fraction
import itertools

import pytest
from hypothesis import given, strategies as st

from symred.perm import (
    HammingValue,
    Permutation,
    compose,
    conjugate,
    cycle_decomposition,
    cycle_type,
    direct_sum,
    format_cycles,
    format_image,
    from_cycles,
    hamming,
    identity,
    inverse,
    parse,
    random_involution,
    random_permutation,
    transposition,
)


def perms(max_n=9):
    return st.integers(1, max_n).flatmap(
        lambda n: st.permutations(range(n)).map(lambda p: Permutation(p))
    )


def same_degree_pair(max_n=9):
    return st.integers(1, max_n).flatmap(
        lambda n: st.tuples(*[st.permutations(range(n)).map(Permutation)] * 3)
    )


def test_rejects_non_bijection():
    with pytest.raises(ValueError):
        Permutation([0, 0, 1])
    with pytest.raises(ValueError):
        Permutation([1, 2])


def test_compose_applies_right_factor_first():
    p = Permutation([1, 2, 0])
    q = Permutation([1, 0, 2])
    assert compose(p, q).image == (2, 1, 0)
    assert (p * q)(0) == p(q(0))


def test_hamming_value_is_exact():
    d = hamming(Permutation([1, 0, 2, 3]), identity(4))
    assert (d.numerator, d.denominator) == (2, 4)
    assert d.value == Fraction(1, 2)
    assert d == Fraction(1, 2)
    assert HammingValue(1, 3) < HammingValue(1, 2)


def test_hamming_sum_over_sym4():
    # 4! * (expected number of non-fixed points = 4 - 1) = 72
    total = sum(hamming(Permutation(p), identity(4)).numerator for p in itertools.permutations(range(4)))
    assert total == 72


def test_degree_mismatch_raises():
    with pytest.raises(ValueError):
        hamming(identity(3), identity(4))


@given(same_degree_pair())
def test_hamming_is_bi_invariant_metric(triple):
    p, q, r = triple
    assert hamming(p, q) == hamming(q, p)
    assert (hamming(p, q).numerator == 0) == (p == q)
    assert hamming(p, r).value <= hamming(p, q).value + hamming(q, r).value
    assert hamming(r * p, r * q) == hamming(p, q)
    assert hamming(p * r, q * r) == hamming(p, q)


@given(perms())
def test_inverse_and_conjugation(p):
    n = len(p)
    assert (p * inverse(p)).is_identity()
    assert conjugate(p, identity(n)).is_identity()
    s = random_permutation(n, 3)
    assert conjugate(p, s) == p * s * ~p


@given(perms())
def test_cycle_decomposition_roundtrip(p):
    cycles = cycle_decomposition(p)
    assert from_cycles(len(p), cycles) == p
    assert sorted((len(c) for c in cycles), reverse=True) == list(cycle_type(p))
    assert all(c[0] == min(c) for c in cycles)


@given(perms())
def test_text_formats_roundtrip(p):
    assert parse(format_image(p)) == p
    assert parse(f"{len(p)}: " + format_cycles(p)) == p


def test_parse_one_based():
    assert parse("3: 2 3 1").image == (1, 2, 0)
    assert parse("4: (1 2)(3 4)").image == (1, 0, 3, 2)


def test_parse_rejects_garbage():
    for bad in ["3: 1 1 2", "2: (1 3)", "x y", "3: (1 2)(2 3)"]:
        with pytest.raises(ValueError):
            parse(bad)


def test_direct_sum_and_power():
    p = direct_sum(Permutation([1, 0]), Permutation([1, 2, 0]))
    assert cycle_type(p) == (3, 2)
    assert (p**6).is_identity()
    assert p**-1 == ~p


def test_random_involution_has_t_transpositions():
    for t in range(4):
        a = random_involution(8, t, seed=t)
        assert a.is_involution()
        assert len(a.support()) == 2 * t


def test_sign():
    assert transposition(5, 0, 3).sign() == -1
    assert Permutation([1, 2, 0]).sign() == 1
