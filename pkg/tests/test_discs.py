"""Weierstrass data, linearization-disc certificates, boundary periodic
points, and the resonance-exponent maximization."""

from fractions import Fraction

import pytest

from lindisc import (
    FieldParams,
    LaurentSeries,
    PowerSeriesMap,
    classify_linearization_disc,
    degree_on_sigma,
    delta_exponent,
    disc_profile,
    find_periodic_point,
    make_disc,
    mult_profile,
    parse_series,
    ps_eval,
    ps_gauge,
    solve_sfe,
    verify_indifferent,
    weierstrass_data,
)
from lindisc.discs import LEVEL_EXACT, LEVEL_EXTENDED, LEVEL_GENERIC
from lindisc.errors import HypothesisError, PrecisionError

F2 = FieldParams(2)
F3 = FieldParams(3)
F4 = FieldParams(2, 2)


def test_weierstrass_basic_example():
    h = {1: parse_series("1", F2), 2: parse_series("T^-1", F2)}
    wd = weierstrass_data(h, 1)
    assert (wd.v_s.value, wd.d, wd.d_prime) == (1, 2, 1)
    assert not wd.certified_tail


def test_weierstrass_linear():
    wd = weierstrass_data({1: parse_series("1", F3)}, Fraction(5, 2))
    assert wd.d == wd.d_prime == 1


def test_weierstrass_tie_reports_both_minimizers():
    # v(c_1) + 1 = 1 and v(c_3) + 3 = 0 + 3·? pick v_r = 1/2: c_3 gives 3/2
    h = {
        1: parse_series("T", F2),
        2: parse_series("T", F2),
        3: parse_series("1", F2),
    }
    wd = weierstrass_data(h, 1)  # values: 2, 3, 3 -> min 2 at k=1
    assert (wd.d, wd.d_prime) == (1, 1)
    wd = weierstrass_data(h, Fraction(1, 2))  # 3/2, 2, 3/2 -> tie {1, 3}
    assert (wd.d, wd.d_prime) == (3, 1)


def test_weierstrass_precision_guard():
    h = {1: parse_series("T^4", F2), 2: LaurentSeries.zero(F2, 1, 2)}
    with pytest.raises(PrecisionError):
        weierstrass_data(h, 1)


def test_weierstrass_tail_certification():
    h = {1: parse_series("1", F2), 2: parse_series("T", F2)}
    rising = (lambda k: Fraction(k, 1), 2)
    wd = weierstrass_data(h, 1, rising)
    assert wd.certified_tail
    falling = (lambda k: Fraction(-2 * k, 1), 2)
    wd = weierstrass_data(h, 1, falling)
    assert not wd.certified_tail


def test_degree_dichotomy_instances():
    cases = [
        ("1+T", F2, 2),  # (p, m) = (2, 1)
        ("b+T", F4, 4),  # (p, m) = (2, 3)
        ("2+T", F3, 3),  # (p, m) = (3, 2)
    ]
    for lam_lit, field, kp in cases:
        lam = parse_series(lam_lit, field)
        f = PowerSeriesMap({1: lam, kp: parse_series("1", field)})
        g = solve_sfe(f, 4 * kp + 8)
        gauge = ps_gauge(f)
        dp = disc_profile(g.profile, gauge)
        assert degree_on_sigma(g, dp, gauge) == (1, kp)


def test_degree_drops_when_lowest_degree_exceeds_k_prime():
    for lam_lit, field, kp in [("1+T", F2, 2), ("b+T", F4, 4), ("2+T", F3, 3)]:
        lam = parse_series(lam_lit, field)
        pr = mult_profile(lam)
        i0 = kp + pr.m * field.p
        f = PowerSeriesMap({1: lam, i0: parse_series("1", field)})
        g = solve_sfe(f, 4 * i0)
        gauge = ps_gauge(f)
        dp = disc_profile(pr, gauge)
        assert degree_on_sigma(g, dp, gauge) == (1, 1)


def test_classify_exact_char2_quadratic():
    f = PowerSeriesMap({1: parse_series("1+T", F2), 2: parse_series("1", F2)})
    report = classify_linearization_disc(f)
    assert report.level == LEVEL_EXACT
    assert report.disc.v_radius == 1
    assert report.disc.boundary == "open"
    assert report.disc.rationality == "rational-in-K"
    assert (report.degree_open, report.degree_closed) == (1, 2)
    pp = report.periodic_point
    assert pp is not None and pp.kappa == 1
    assert pp.point.agrees_with(parse_series("T", F2, prec=100))
    assert pp.multiplier.agrees_with(parse_series("1+T", F2, prec=16))


def test_classify_extended_rho():
    f = PowerSeriesMap({1: parse_series("1+T", F2), 4: parse_series("1", F2)})
    report = classify_linearization_disc(f)
    assert report.level == LEVEL_EXTENDED
    assert report.disc.v_radius.value == Fraction(1, 2)
    assert report.degree_closed == 1


def test_classify_generic_sigma():
    # v(a_2) = 1 > (k'-1)·A = 0 with witness at degree 4: bound strict at k'
    f = PowerSeriesMap(
        {1: parse_series("1+T", F2), 2: parse_series("T", F2), 4: parse_series("1", F2)}
    )
    report = classify_linearization_disc(f)
    assert report.level == LEVEL_GENERIC
    assert report.degree_closed == 1


def test_classify_rejects_non_family_maps():
    f = PowerSeriesMap({1: parse_series("1+T", F3), 2: parse_series("1", F3)})
    with pytest.raises(HypothesisError):
        classify_linearization_disc(f)


def test_classify_exact_in_extension_tower():
    lam = parse_series("b+T", F4)
    f = PowerSeriesMap({1: lam, 4: parse_series("1", F4)})
    report = classify_linearization_disc(f)
    assert report.level == LEVEL_EXACT
    assert report.disc.rationality == "rational-in-extension(3)"
    pp = report.periodic_point
    assert pp is not None
    assert pp.tower == (2, 3)
    # family-F multiplier along the orbit is λ^κ exactly
    lam_tower = lam.ramify(3)
    assert pp.multiplier.agrees_with(lam_tower**pp.kappa)


def test_periodic_point_fixed_point_algebra():
    """Fixed points of λx + a x^{k'} solve x^{k'-1} = (1-λ)/a."""
    lam = parse_series("2+T", F3)
    f = PowerSeriesMap({1: lam, 3: parse_series("1", F3)})
    report = classify_linearization_disc(f)
    pp = report.periodic_point
    assert pp is not None
    fe = f
    if pp.point.ram != 1 or pp.point.field != F3:
        from lindisc.discs import _embed_map

        fe = _embed_map(f, pp.point.field, pp.point.ram)
    orbit = pp.point
    for _ in range(pp.kappa):
        orbit = ps_eval(fe, orbit)
    assert (orbit - pp.point).is_zero_as_known


def test_periodic_point_not_found_for_linear_map():
    f = PowerSeriesMap({1: parse_series("1+T", F2)})
    sphere = make_disc(Fraction(1), "closed")
    assert find_periodic_point(f, 3, sphere, tower=(2, 1)) is None


def test_verify_indifferent_detects_wrong_point():
    f = PowerSeriesMap({1: parse_series("1+T", F2), 2: parse_series("1", F2)})
    good = parse_series("T+O(T^40)", F2)
    residual, mult = verify_indifferent(f, good, 1)
    assert residual.is_infinite
    assert mult.lead == 0
    bad = parse_series("T+T^2+O(T^40)", F2)
    residual, _ = verify_indifferent(f, bad, 1)
    assert not residual.is_infinite
    assert residual.value > 0


def test_delta_maximized_exactly_at_k_prime():
    for lam_lit, field in [("1+T", F2), ("b+T", F4), ("2+T", F3), ("1+T", F3)]:
        pr = mult_profile(parse_series(lam_lit, field))
        kp, step = pr.k_prime, pr.m * field.p
        values = {k: delta_exponent(pr, k) for k in range(2, kp + 10 * step + 1)}
        peak = max(values.values())
        assert [k for k, v in values.items() if v == peak] == [kp]


def test_disc_rationality_bookkeeping():
    assert make_disc(Fraction(3), "open").rationality == "rational-in-K"
    assert make_disc(Fraction(1, 3), "closed").rationality == "rational-in-extension(3)"
    with pytest.raises(HypothesisError):
        make_disc(LaurentSeries.zero(F2, 1, 4).valuation(), "open")
