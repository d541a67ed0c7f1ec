import math
from fractions import Fraction

import numpy as np
import pytest

from fpcount.errors import CapacityError, DomainError
from fpcount.services import oracles
from fpcount.services.counts import count_kth_powers, new_query, weighted_psi
from fpcount.services.expsum import (
    MINOR,
    Major,
    Minor,
    TrigPoly,
    arc_entries,
    box_representation_count,
    build_arcs,
    build_F,
    build_f,
    classify,
    eval_h,
    eval_v,
    frequency_matched_count,
    gauss_S,
    integral_abs_h,
    major_h_probe,
    major_integral_quadrature,
    minor_integral_quadrature,
    minor_sup_probe,
    rho,
    trig_product_integral,
    v_bound_ratio,
    window_integral_quadrature,
)
from fpcount.services.semigroup import new_semigroup


def test_build_f_three_five(tables):
    f = build_f(new_query(3, 5, 1), tables)
    expected = {2: math.log(2), 3: math.log(3), 4: math.log(2), 5: math.log(5), 7: math.log(7)}
    assert f.as_dict() == pytest.approx(expected)
    assert f(0.0).real == pytest.approx(math.log(2 * 3 * 2 * 5 * 7))


def test_build_f_at_zero_is_psi(tables):
    q = new_query(97, 1009, 2)
    f = build_f(q, tables)
    assert f(Fraction(0)).real == pytest.approx(math.fsum(tables.lam[:q.root + 1].tolist()), rel=1e-12)
    assert f(1.0) == pytest.approx(f(0.0))


def test_build_f_streams_without_tables(tables):
    q = new_query(101, 997, 1)
    assert build_f(q).as_dict() == pytest.approx(build_f(q, tables).as_dict())


def test_build_F():
    F = build_F(new_query(3, 5, 2))
    assert F.freqs.tolist() == [0, 1, 4]
    q = new_query(101, 103, 3)
    F = build_F(q)
    assert len(F) == q.root + 1
    assert F(0.0).real == pytest.approx(q.root + 1)


def test_period_one(tables, rng):
    f = build_f(new_query(53, 101, 1), tables)
    alphas = rng.random(50)
    assert np.allclose(f.evaluate(alphas), f.evaluate(alphas + 1.0), atol=1e-9)
    for alpha in (Fraction(1, 3), Fraction(22, 7)):
        assert f(alpha) == pytest.approx(f(alpha + 1), abs=1e-12)


def test_exact_and_float_evaluation_agree(tables):
    f = build_f(new_query(53, 101, 1), tables)
    assert f(Fraction(5, 17)) == pytest.approx(f(5 / 17), abs=1e-9)


def test_trig_poly_helpers():
    poly = TrigPoly.from_dict({3: 2.0, 1: 1.0, 5: 0.0})
    assert poly.freqs.tolist() == [1, 3]
    assert poly.scaled(2).as_dict() == {1: 2 + 0j, 3: 4 + 0j}
    assert TrigPoly.from_dict({})(0.5) == 0j
    assert poly(0.5) == pytest.approx(-1 + 2 * np.exp(3j * np.pi))


def test_h_examples():
    sg = new_semigroup(3, 5)
    assert eval_h(0.0, sg) == pytest.approx(24)
    assert eval_h(Fraction(0), sg) == 24
    assert abs(eval_h(Fraction(1, 2), sg)) < 1e-12
    assert abs(eval_h(0.5, sg)) < 1e-12


def test_h_matches_double_sum(coprime_pairs, rng):
    for c, d in coprime_pairs(50, 10**4):
        sg = new_semigroup(c, d)
        for _ in range(100):
            den = int(rng.integers(1, 1000))
            alpha = Fraction(int(rng.integers(-den, den)), den)
            closed, direct = eval_h(alpha, sg), oracles.direct_h(c, d, alpha)
            assert abs(closed - direct) <= 1e-9 * (c + 1) * (d + 1)


def test_h_geometric_bound(rng):
    sg = new_semigroup(7, 11)
    alphas = rng.random(500)
    values = np.abs(eval_h(alphas, sg))

    def bound(m, count):
        dist = np.abs(alphas * m - np.round(alphas * m))
        return np.minimum(count, 1 / (2 * np.maximum(dist, 1e-300)))

    assert np.all(values <= bound(7, 12) * bound(11, 8) * (1 + 1e-9))


def test_gauss_sums():
    assert gauss_S(1, 1, 3) == pytest.approx(1)
    assert abs(gauss_S(5, 2, 1)) < 1e-12
    assert gauss_S(4, 1, 2) == pytest.approx((1 + 1j) / 2)
    with pytest.raises(DomainError):
        gauss_S(4, 2, 2)


def test_eval_v():
    q = new_query(31, 37, 1)
    assert eval_v(0.0, q) == pytest.approx(q.sg.g)
    q2 = new_query(31, 37, 2)
    betas = np.linspace(0.001, 0.5, 40)
    assert all(abs(eval_v(b, q2)) <= abs(eval_v(0.0, q2)) + 1e-9 for b in betas)
    assert v_bound_ratio(q, betas) <= 2.0
    assert v_bound_ratio(q2, betas) <= 2.0


def test_eval_v_capacity(monkeypatch):
    from fpcount.services import expsum
    monkeypatch.setattr(expsum, "V_DIRECT_LIMIT", 100)
    with pytest.raises(CapacityError):
        eval_v(0.1, new_query(31, 37, 1))


def test_trig_product_integral_examples(tables):
    q = new_query(3, 5, 1)
    assert trig_product_integral(build_f(q, tables), q.sg) == pytest.approx(math.log(15))
    assert trig_product_integral(TrigPoly.from_dict({}), q.sg) == 0.0
    q2 = new_query(3, 5, 2)
    assert trig_product_integral(build_f(q2, tables), q2.sg) == 0.0
    with pytest.raises(DomainError):
        trig_product_integral(TrigPoly.from_dict({8: 1.0}), q.sg)


def test_box_representation_count():
    sg = new_semigroup(3, 5)
    r = box_representation_count(sg, np.arange(0, 31))
    assert r[:8].tolist() == [1, 0, 0, 1, 0, 1, 1, 0]
    assert r[15] == 2
    assert r[30] == 1
    brute = [
        sum(1 for x in range(6) for y in range(4) if 3 * x + 5 * y == m) for m in range(31)
    ]
    assert r.tolist() == brute


@pytest.mark.parametrize("k", [1, 2, 3])
def test_orthogonality(tables, coprime_pairs, k):
    for c, d in coprime_pairs(15, 10**5):
        q = new_query(c, d, k)
        integral = trig_product_integral(build_f(q, tables), q.sg)
        assert integral == pytest.approx(weighted_psi(q, tables), rel=1e-9, abs=1e-12)
        assert frequency_matched_count(q) == count_kth_powers(q)


def test_build_arcs_examples():
    arcs = build_arcs(1, 7)
    assert [(a.q, a.a) for a in arcs.arcs] == [(1, 1)]
    assert arcs.arcs[0].half_width == Fraction(1, 7)
    assert not arcs.warning
    arcs = build_arcs(3, 10**4)
    assert len(arcs.arcs) == 4
    assert arcs.disjoint and arcs.contained and not arcs.warning
    centers = sorted(a.center for a in arcs.arcs)
    assert min(b - a for a, b in zip(centers, centers[1:])) >= Fraction(1, 9)
    assert build_arcs(10, 100).warning
    with pytest.raises(DomainError):
        build_arcs(0, 100)


def test_arc_entries_serialise_exactly():
    entries = arc_entries(build_arcs(2, 50))
    assert entries == [
        {"q": 1, "a": 1, "center": "1/1", "half_width": "2/50"},
        {"q": 2, "a": 1, "center": "1/2", "half_width": "2/100"},
    ]


def test_overlapping_arcs_detected():
    arcs = build_arcs(10, 100)
    assert not arcs.disjoint


def test_arc_geometry_random(rng):
    for _ in range(60):
        g = int(rng.integers(16, 10**6))
        q_max = int(rng.integers(1, round(((g - 1) / 2) ** (1 / 3)) + 1))
        if 2 * q_max ** 3 >= g:
            continue
        arcs = build_arcs(q_max, g)
        assert arcs.disjoint and arcs.contained and not arcs.warning


def test_classify_examples():
    g = 10**4
    arcs = build_arcs(2, g)
    assert classify(Fraction(1, 2), arcs) == Major(2, 1)
    assert classify(Fraction(1, 2) + Fraction(1, g), arcs) == Major(2, 1)
    assert classify(Fraction(1, 2) + Fraction(2, g), arcs) == MINOR
    assert classify(Fraction(0), arcs) == Major(1, 1)
    assert classify(Fraction(3), arcs) == Major(1, 1)
    # 89/144 is a golden-ratio convergent, far from every a/q with q <= 10
    arcs = build_arcs(10, 10**4)
    assert isinstance(classify(Fraction(89, 144), arcs), Minor)


def test_classify_partition_against_scan(rng):
    arcs = build_arcs(6, 5000)
    for _ in range(2000):
        den = int(rng.integers(1, 10**5))
        alpha = Fraction(int(rng.integers(-den, 2 * den)), den)
        shifted = alpha - math.floor(alpha - arcs.window_start)
        hits = [a for a in arcs.arcs if abs(shifted - a.center) <= a.half_width]
        assert len(hits) <= 1
        verdict = classify(alpha, arcs)
        if hits:
            assert verdict == Major(hits[0].q, hits[0].a)
            assert abs(shifted - Fraction(verdict.a, verdict.q)) <= Fraction(arcs.q_max, verdict.q * arcs.g)
        else:
            assert verdict == MINOR


def _psi_to_root(q, tables):
    return math.fsum(tables.lam[:q.root + 1].tolist())


def test_minor_sup_probe(tables):
    q = new_query(101, 997, 1)
    arcs = build_arcs(10, q.sg.g)
    probe = minor_sup_probe(q, arcs, 500, tables)
    assert 0 < probe.ratio_to_f0 <= 1
    assert probe.minor_points <= 500
    assert probe.sup_abs == pytest.approx(probe.ratio_to_f0 * _psi_to_root(q, tables))
    F_probe = minor_sup_probe(q, arcs, 200, poly=build_F(q))
    assert 0 < F_probe.ratio_to_f0 <= 1


def test_minor_sup_probe_errors(tables):
    q = new_query(3, 5, 1)
    with pytest.raises(DomainError):
        minor_sup_probe(q, build_arcs(1, 7), 0, tables)


def test_window_quadrature_is_exact(tables):
    for c, d in [(3, 5), (7, 11), (13, 29)]:
        q = new_query(c, d, 1)
        assert window_integral_quadrature(q, 64, tables) == pytest.approx(weighted_psi(q, tables), abs=1e-9)


@pytest.mark.parametrize("c,d", [(2, 3), (2, 5), (2, 7), (3, 4), (3, 5)])
def test_window_quadrature_small_step_does_not_alias(tables, c, d):
    # 4g <= 2cd for these pairs
    q = new_query(c, d, 1)
    assert window_integral_quadrature(q, 4, tables) == pytest.approx(weighted_psi(q, tables), abs=1e-9)


def test_major_plus_minor_is_psi(tables):
    q = new_query(31, 97, 1)
    arcs = build_arcs(3, q.sg.g)
    major, minor, window = minor_integral_quadrature(q, arcs, 64, tables)
    assert major + minor == pytest.approx(weighted_psi(q, tables), abs=1e-3)
    assert window == pytest.approx(weighted_psi(q, tables), abs=1e-3)


def test_major_quadrature_linear(tables):
    q = new_query(31, 97, 1)
    arcs = build_arcs(3, q.sg.g)
    f = build_f(q, tables)
    single = major_integral_quadrature(q, arcs, 8, poly=f)
    double = major_integral_quadrature(q, arcs, 8, poly=f.scaled(2))
    assert double == pytest.approx(2 * single, rel=1e-12)


def test_quadrature_limits(tables, monkeypatch):
    q = new_query(31, 97, 1)
    arcs = build_arcs(3, q.sg.g)
    with pytest.raises(DomainError):
        major_integral_quadrature(q, arcs, 2, tables)
    from fpcount.services import expsum
    monkeypatch.setattr(expsum, "QUADRATURE_LIMIT", 100)
    with pytest.raises(CapacityError):
        major_integral_quadrature(q, arcs, 8, tables)


def test_integral_abs_h():
    sg = new_semigroup(3, 5)
    value = integral_abs_h(sg, 64)
    assert value >= 1 - 1e-9
    assert value / math.log(7) ** 2 <= 4.0


def test_integral_abs_h_independent_of_threads():
    sg = new_semigroup(211, 463)
    assert integral_abs_h(sg, 8, threads=1) == integral_abs_h(sg, 8, threads=4)


def test_major_h_probe():
    sg = new_semigroup(101, 1009)
    assert major_h_probe(sg, build_arcs(5, sg.g)) <= 2.0


def test_rho():
    assert rho(2) == Fraction(1, 8)
    assert rho(3) == Fraction(1, 14)
    assert rho(5) == Fraction(1, 48)
    with pytest.raises(DomainError):
        rho(1)
