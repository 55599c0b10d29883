from fractions import Fraction
import itertools

import pytest

from symred import reduced_product as rp
from symred.cut_lift import cut, lift
from symred.oracles import oracle_hom_defect, oracle_surj_defect
from symred.perm import Permutation, hamming, identity, random_permutation


def one_stage(k, l, fn):
    return rp.StageMap(rp.ShapeSequence((k,)), rp.ShapeSequence((l,)), lambda _, x: fn(x))


def brute_iso(fn, k):
    G = [Permutation(p) for p in itertools.permutations(range(k))]
    return max(abs(hamming(x, y).value - hamming(fn(x), fn(y)).value) for x in G for y in G)


class TestShapes:
    def test_tail_rules(self):
        assert rp.ShapeSequence.parse("affine 1 2", 4).prefix == (2, 3, 4, 5)
        assert rp.ShapeSequence.parse("geometric 1 2", 5).prefix == (1, 2, 4, 8, 16)
        s = rp.ShapeSequence.parse("affine 1 2", 3)
        assert s[10] == 12
        assert s.extend(6).prefix == (2, 3, 4, 5, 6, 7)

    def test_explicit_prefix_has_no_tail(self):
        s = rp.ShapeSequence.parse("3 5 7")
        with pytest.raises(IndexError):
            s[3]
        with pytest.raises(ValueError):
            s.require_unbounded()

    def test_bounded_rule_refused(self):
        s = rp.ShapeSequence.from_rule("affine 0 5", 4)
        with pytest.raises(ValueError):
            s.require_unbounded()
        rp.ShapeSequence.from_rule("geometric 1 3/2", 4).require_unbounded()

    def test_element_text_roundtrip(self):
        shape = rp.ShapeSequence.parse("affine 1 2", 5)
        e = rp.TruncatedElement(shape, tuple(random_permutation(k, k) for k in shape))
        back = rp.TruncatedElement.loads(e.dumps())
        # the text format records the degrees, not the rule that made them
        assert back.shape.prefix == shape.prefix
        assert back.stages == e.stages

    def test_element_degree_mismatch(self):
        with pytest.raises(ValueError):
            rp.TruncatedElement(rp.ShapeSequence((2, 3)), (identity(2), identity(2)))
        with pytest.raises(ValueError):
            rp.TruncatedElement.loads("shape: 2 3\n2: 2 1\n")


class TestIndexSets:
    def test_finite_sets_refused(self):
        shape = rp.ShapeSequence((3, 3, 3))
        e = rp.TruncatedElement.identity(shape)
        with pytest.raises(ValueError):
            rp.d_S_profile(e, e, rp.IndexSet.explicit([0, 1]))

    def test_membership(self):
        assert rp.IndexSet.evens().within(7) == [0, 2, 4, 6]
        assert rp.IndexSet.periodic([1, 4], 5).within(12) == [1, 4, 6, 9, 11]

    def test_profile_is_suffix_sup_over_members(self):
        shape = rp.ShapeSequence((4,) * 8)
        a = rp.TruncatedElement.identity(shape)
        stages = list(a.stages)
        stages[1] = Permutation([1, 0, 2, 3])          # distance 1/2, odd stage
        stages[6] = Permutation([1, 2, 0, 3])          # distance 3/4, even stage
        b = rp.TruncatedElement(shape, tuple(stages))
        evens = rp.d_S_profile(a, b, rp.IndexSet.evens())
        assert evens.values == (Fraction(3, 4),) * 7 + (0,)
        odds = rp.d_S_profile(a, b, rp.IndexSet.odds())
        assert odds.values[:2] == (Fraction(1, 2),) * 2 and set(odds.values[2:]) == {0}
        assert evens.window_starts == (0, 2, 4, 6)
        assert evens.limsup_estimate == Fraction(3, 4)


class TestAlmostPermutations:
    def test_shift_and_identity(self):
        f = rp.AlmostPermutation.shift(2, 6)
        assert [f(n) for n in range(8)] == [2, 3, 4, 5, 6, 7, 8, 9]
        assert f.co_range == {0, 1}
        assert not f.violations()
        assert not rp.AlmostPermutation.identity(5).violations()

    def test_negative_shift_declares_exceptions(self):
        f = rp.AlmostPermutation.shift(-2, 6)
        assert f.exceptional == {0, 1}
        assert not f.violations()

    def test_violation_detected(self):
        f = rp.AlmostPermutation((0, 0, 2))
        assert f.violations()
        g = rp.AlmostPermutation((0, 2, 3))
        assert any("missed" in v for v in g.violations())

    def test_composition(self):
        f, g = rp.AlmostPermutation.shift(1, 10), rp.AlmostPermutation.shift(2, 6)
        fg = f.compose(g)
        assert fg.images == (3, 4, 5, 6, 7, 8)
        assert fg.tail_shift == 3


class TestPsi:
    def test_identity_f_is_updown(self):
        shape = rp.ShapeSequence.parse("affine 1 3", 5)
        a = rp.TruncatedElement(shape, tuple(random_permutation(k, k) for k in shape))
        res = rp.psi_f(a, rp.AlmostPermutation.identity(5), shape)
        assert res.element == a
        assert res.flagged == ()
        assert res.ratio_certificate == 0

    def test_shift_flags_out_of_horizon(self):
        shape = rp.ShapeSequence.parse("affine 1 2", 6)
        a = rp.TruncatedElement(shape, tuple(random_permutation(k, k) for k in shape))
        res = rp.psi_f(a, rp.AlmostPermutation.shift(1, 6), shape)
        assert res.flagged == ((5, "out-of-horizon"),)
        assert res.element[5].is_identity()
        assert res.element[0] == cut(a[1], 2)
        # worst ratio is k_1 / l_0 = 3/2
        assert res.ratio_certificate == Fraction(1, 2)

    def test_exceptional_stages_flagged(self):
        shape = rp.ShapeSequence((3, 3, 3))
        a = rp.TruncatedElement.identity(shape)
        f = rp.AlmostPermutation((0, 0, 2), exceptional=frozenset({1}))
        res = rp.psi_f(a, f, shape)
        assert res.flagged == ((1, "exceptional"),)


class TestDefects:
    @pytest.mark.parametrize("k", [2, 3, 4, 5])
    def test_cut_by_one_matches_oracle(self, k):
        h = one_stage(k, k - 1, lambda x: cut(x, k - 1))
        assert rp.hom_defect(h, 0, "exhaustive").value == oracle_hom_defect(lambda x: cut(x, k - 1), k)
        assert rp.surj_defect(h, 0, "exhaustive").value == oracle_surj_defect(lambda x: cut(x, k - 1), k, k - 1)
        assert rp.iso_defect(h, 0, "exhaustive").value == brute_iso(lambda x: cut(x, k - 1), k)

    @pytest.mark.parametrize("k", [2, 3, 4, 5])
    def test_lift_by_one(self, k):
        h = one_stage(k, k + 1, lambda x: lift(x, k + 1))
        assert rp.hom_defect(h, 0, "exhaustive").value == 0
        # the new point must be fixed, which costs a transposition's worth
        assert rp.surj_defect(h, 0, "exhaustive").value == Fraction(2, k + 1)
        assert rp.surj_defect(h, 0, "exhaustive").value == oracle_surj_defect(lambda x: lift(x, k + 1), k, k + 1)
        assert rp.iso_defect(h, 0, "exhaustive").value == Fraction(1, k + 1)

    def test_constant_map(self):
        h = rp.constant_family(rp.ShapeSequence((4,)), rp.ShapeSequence((4,)))
        assert rp.hom_defect(h, 0).value == 0
        assert rp.surj_defect(h, 0).value == 1

    def test_sampled_is_lower_bound(self):
        h = rp.cut_family(rp.ShapeSequence((5,)))
        exact = rp.hom_defect(h, 0, "exhaustive")
        sampled = rp.hom_defect(h, 0, "sampled", samples=300, seed=4)
        assert exact.bound == "exact" and sampled.bound == "lower"
        assert sampled.value <= exact.value

    def test_exhaustive_cap(self):
        h = rp.cut_family(rp.ShapeSequence((9,)))
        with pytest.raises(ValueError):
            rp.hom_defect(h, 0, "exhaustive")

    def test_report_tail_sup_and_outputs(self):
        shape = rp.ShapeSequence.parse("affine 1 2", 5)
        rep = rp.defect_report(rp.cut_family(shape), range(5), "auto", samples=100, seed=1)
        hs = [max(r.hom.value, r.surj.value) for r in rep.per_stage]
        assert rep.tail_sup == [max(hs[j:]) for j in range(5)]
        assert rep.to_csv().splitlines()[0].startswith("stage,hom,surj,iso,tail_sup")
        threaded = rp.defect_report(rp.cut_family(shape), range(5), "auto", samples=100, seed=1, threads=4)
        assert threaded.to_csv() == rep.to_csv()
