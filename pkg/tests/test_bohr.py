import math
from fractions import Fraction

import pytest

from monoball.errors import CapExceededError, HypothesisError
from monoball.groups import GroupSubset, cyclic_group, dihedral_group, heisenberg_group
from monoball.harmonic import LinearCharacter, linear_characters
from monoball.bohr import (
    CharSet,
    bohr_norm,
    char_span,
    charset_sum,
    cor53_check,
    kfold_charset,
    linbohr,
    linbohr_squared,
    phase_norm,
    prop51_check,
)
from monoball.metric import ball_dimension, validate_norm
from monoball.setops import set_predicates


def _lin_by_phase(group, phase_at_one):
    for lam in linear_characters(group):
        if lam.phases[1] == phase_at_one:
            return lam
    raise AssertionError("missing character")


def _trivial(group):
    return LinearCharacter(group, (Fraction(0),) * group.order)


def test_phase_norm_exact():
    assert phase_norm(Fraction(0)) == 0
    assert phase_norm(Fraction(1, 4)) == Fraction(1, 4)
    assert phase_norm(Fraction(3, 4)) == Fraction(1, 4)
    assert phase_norm(Fraction(1, 2)) == Fraction(1, 2)
    assert phase_norm(Fraction(7, 5)) == Fraction(2, 5)


def test_charset_dedup_and_flags():
    g = cyclic_group(8)
    lam = _lin_by_phase(g, Fraction(1, 8))
    s = CharSet.build(g, [lam, lam, lam.negate(), _trivial(g)])
    assert len(s) == 3
    assert s.symmetric and s.contains_identity
    t = CharSet.build(g, [lam])
    assert not t.symmetric and not t.contains_identity


def test_bohr_norm_canonical_cyclic36():
    g = cyclic_group(36)
    canon = _lin_by_phase(g, Fraction(1, 36))
    rho = bohr_norm(CharSet.build(g, [canon]))
    for x in range(36):
        assert rho.values[x] == min(Fraction(x, 36), 1 - Fraction(x, 36))
    assert validate_norm(rho).valid


def test_bohr_norm_trivial_and_empty():
    g = heisenberg_group(3)
    assert all(v == 0 for v in bohr_norm(CharSet.trivial(g)).values)
    assert all(v == 0 for v in bohr_norm(CharSet.empty(g)).values)


def test_bohr_norm_two_character_sup():
    g = cyclic_group(12)
    a = _lin_by_phase(g, Fraction(1, 12))
    b = _lin_by_phase(g, Fraction(5, 12))
    rho_a = bohr_norm(CharSet.build(g, [a]))
    rho_b = bohr_norm(CharSet.build(g, [b]))
    rho = bohr_norm(CharSet.build(g, [a, b]))
    for x in range(12):
        assert rho.values[x] == max(rho_a.values[x], rho_b.values[x])


def test_linbohr_cyclic36():
    g = cyclic_group(36)
    canon = _lin_by_phase(g, Fraction(1, 36))
    b = linbohr(CharSet.build(g, [canon]), Fraction(1, 10))
    assert len(b) == 7
    assert b.indices() == (0, 1, 2, 3, 33, 34, 35)
    assert len(linbohr(CharSet.build(g, [canon]), Fraction(1, 2))) == 36
    assert len(linbohr(CharSet.empty(g), 0)) == 36


def test_linbohr_is_symmetric_normal_identity():
    for g in (dihedral_group(12), heisenberg_group(3)):
        lams = linear_characters(g)
        s = CharSet.build(g, lams[:2])
        for delta in (Fraction(1, 10), Fraction(1, 4), Fraction(1, 3)):
            preds = set_predicates(linbohr(s, delta))
            assert preds.symmetric and preds.normal and preds.contains_identity


def test_linbohr_monotonicity():
    g = cyclic_group(30)
    a = _lin_by_phase(g, Fraction(1, 30))
    b = _lin_by_phase(g, Fraction(7, 30))
    small_set = CharSet.build(g, [a])
    big_set = CharSet.build(g, [a, b])
    assert linbohr(big_set, Fraction(1, 8)).is_subset_of(linbohr(small_set, Fraction(1, 8)))
    assert linbohr(small_set, Fraction(1, 10)).is_subset_of(linbohr(small_set, Fraction(1, 8)))


def test_linbohr_squared_agrees_on_rational_radii():
    g = cyclic_group(36)
    canon = _lin_by_phase(g, Fraction(1, 36))
    s = CharSet.build(g, [canon])
    for delta in (Fraction(1, 10), Fraction(1, 5), Fraction(2, 7)):
        assert linbohr_squared(s, delta ** 2).mask == linbohr(s, delta).mask


def test_char_span_examples():
    g = cyclic_group(12)
    assert len(char_span(CharSet.empty(g))) == 1
    lam = _lin_by_phase(g, Fraction(1, 12))
    sp1 = char_span(CharSet.build(g, [lam]))
    assert sorted(c.phases[1] for c in sp1) == [Fraction(0), Fraction(1, 12), Fraction(11, 12)]
    sp2 = char_span(CharSet.build(g, [lam, _lin_by_phase(g, Fraction(4, 12))]))
    assert len(sp2) == 9


def test_char_span_guard():
    g = cyclic_group(128)
    lams = linear_characters(g)
    with pytest.raises(CapExceededError):
        char_span(CharSet.build(g, lams[1:23]))


def test_kfold_charset():
    g = cyclic_group(10)
    lam = CharSet.build(g, [_trivial(g), _lin_by_phase(g, Fraction(1, 10))])
    assert kfold_charset(lam, 1).chars == lam.chars
    k3 = kfold_charset(lam, 3)
    assert sorted(c.phases[1] for c in k3) == [Fraction(0), Fraction(1, 10),
                                               Fraction(2, 10), Fraction(3, 10)]
    only_triv = CharSet.trivial(g)
    assert kfold_charset(only_triv, 5).chars == only_triv.chars


def test_triangle_containment():
    g = cyclic_group(36)
    lam = CharSet.build(g, [_trivial(g), _lin_by_phase(g, Fraction(1, 36))])
    for k in (1, 2, 3, 5):
        lhs = linbohr(lam, Fraction(1, 20))
        rhs = linbohr(kfold_charset(lam, k), k * Fraction(1, 20))
        assert lhs.is_subset_of(rhs)


def test_cor53_trivial_lambda():
    g = cyclic_group(18)
    rep = cor53_check(CharSet.trivial(g), 4, Fraction(1, 20))
    assert rep.hypothesis_ok and rep.equal
    assert rep.lhs_size == 18


def test_cor53_cyclic36():
    g = cyclic_group(36)
    lam = CharSet.build(g, [_trivial(g), _lin_by_phase(g, Fraction(1, 36))])
    rep = cor53_check(lam, 3, Fraction(1, 10))
    assert rep.hypothesis_ok and rep.equal and rep.forward_inclusion


def test_cor53_dihedral12():
    g = dihedral_group(12)
    sign = [l for l in linear_characters(g) if not l.is_trivial][0]
    lam = CharSet.build(g, [_trivial(g), sign])
    rep = cor53_check(lam, 2, Fraction(1, 8))
    assert rep.hypothesis_ok and rep.equal


def test_cor53_descriptive_on_hypothesis_violation():
    g = cyclic_group(36)
    # k*delta = 3 * (1/6) = 1/2 >= 1/3: corollary no longer applies
    lam = CharSet.build(g, [_trivial(g), _lin_by_phase(g, Fraction(1, 36))])
    rep = cor53_check(lam, 3, Fraction(1, 6))
    assert not rep.hypothesis_ok
    assert rep.forward_inclusion
    # equality may fail here; the report carries a witness if it does
    if not rep.equal:
        assert rep.witness is not None


def test_cor53_random_fixtures_exact():
    fixtures = []
    for n in (20, 24, 36, 48):
        g = cyclic_group(n)
        lam = CharSet.build(g, [_trivial(g), _lin_by_phase(g, Fraction(1, n))])
        for k, delta in ((2, Fraction(1, 7)), (3, Fraction(1, 10)), (4, Fraction(1, 13))):
            if k * delta < Fraction(1, 3):
                fixtures.append((lam, k, delta))
    assert len(fixtures) >= 10
    for lam, k, delta in fixtures:
        rep = cor53_check(lam, k, delta)
        assert rep.equal


def test_prop51_trivial():
    g = cyclic_group(20)
    triv = CharSet.trivial(g)
    rep = prop51_check(triv, triv, Fraction(1, 32))
    assert rep.hypothesis_ok and rep.ratio == 1 and rep.ratio_ok
    assert rep.all_inclusions_ok


def test_prop51_cyclic101():
    g = cyclic_group(101)
    g1 = _lin_by_phase(g, Fraction(1, 101))
    g2 = _lin_by_phase(g, Fraction(2, 101))
    gamma = CharSet.build(g, [_trivial(g), g1, g1.negate()])
    x = CharSet.build(g, [g2])
    rep = prop51_check(gamma, x, Fraction(1, 32))
    assert rep.hypothesis_ok
    assert rep.all_inclusions_ok
    assert rep.ratio_ok and rep.ratio <= rep.ratio_bound
    assert rep.t_size <= rep.t_bound


def test_prop51_heisenberg():
    g = heisenberg_group(3)
    lam = [l for l in linear_characters(g) if not l.is_trivial][0]
    gamma = char_span(CharSet.build(g, [lam]))
    x = CharSet.build(g, [lam])
    rep = prop51_check(gamma, x, Fraction(1, 32))
    assert rep.hypothesis_ok and rep.ratio_ok and rep.all_inclusions_ok


def test_prop51_reports_hypothesis_failure():
    g = cyclic_group(101)
    g1 = _lin_by_phase(g, Fraction(1, 101))
    g40 = _lin_by_phase(g, Fraction(40, 101))
    gamma = CharSet.build(g, [_trivial(g), g1, g1.negate()])
    x = CharSet.build(g, [g40])
    rep = prop51_check(gamma, x, Fraction(1, 32))
    assert not rep.hypothesis_ok
    assert rep.hypothesis_witness is not None


def test_prop51_rejects_bad_preconditions():
    g = cyclic_group(20)
    lam = _lin_by_phase(g, Fraction(1, 20))
    asym = CharSet.build(g, [_trivial(g), lam])
    with pytest.raises(HypothesisError):
        prop51_check(asym, CharSet.trivial(g), Fraction(1, 32))
    with pytest.raises(HypothesisError):
        prop51_check(CharSet.trivial(g), CharSet.trivial(g), Fraction(1, 8))


def test_bohr_dimension_bound():
    # doubling exponent of a Bohr ball is at most 2 per character
    cases = [
        (cyclic_group(36), [Fraction(1, 36)]),
        (cyclic_group(30), [Fraction(1, 30), Fraction(7, 30)]),
        (dihedral_group(16), None),
    ]
    for g, phases in cases:
        if phases is None:
            chars = [l for l in linear_characters(g) if not l.is_trivial][:2]
        else:
            chars = [_lin_by_phase(g, p) for p in phases]
        s = CharSet.build(g, chars)
        rho = bohr_norm(s)
        for delta in (Fraction(1, 16), Fraction(1, 8), Fraction(1, 4)):
            d, _ = ball_dimension(rho, delta)
            assert d <= 2 * len(s) + 1e-12


def test_charset_sum():
    g = cyclic_group(10)
    a = CharSet.build(g, [_lin_by_phase(g, Fraction(1, 10))])
    b = CharSet.build(g, [_lin_by_phase(g, Fraction(3, 10))])
    s = charset_sum(a, b)
    assert len(s) == 1
    assert s.chars[0].phases[1] == Fraction(4, 10) % 1
