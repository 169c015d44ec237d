"""Conjugacy solvers, structural lemmas on their coefficients,
divergence certificates, and residual checks."""

import random
from fractions import Fraction

import pytest

from lindisc import (
    FieldParams,
    PowerSeriesMap,
    certify_divergence,
    check_bkprime_zero_extension,
    check_coefficient_bound,
    check_structural_zeros,
    disc_profile,
    full_conjugacy_residual,
    mult_profile,
    parse_series,
    ps_compose,
    ps_gauge,
    semiconjugacy_residual,
    solve_sfe,
    solve_sfe_multinomial,
    solve_specialized_p_plus_1,
)
from lindisc.errors import HypothesisError, RootOfUnityError
from lindisc.schroder import COMPUTED_ZERO, NONZERO, STRUCTURAL

F2 = FieldParams(2)
F3 = FieldParams(3)
F4 = FieldParams(2, 2)
F5 = FieldParams(5)


def conjugacies_agree(g1, g2, upto):
    for k in range(1, upto + 1):
        a, b = g1.coefficient(k), g2.coefficient(k)
        if a.is_zero_as_known or b.is_zero_as_known:
            if not (a.is_zero_as_known and b.is_zero_as_known):
                return False
        elif not a.agrees_with(b):
            return False
    return True


def test_first_coefficient_formula():
    lam = parse_series("1+T", F2)
    a2 = parse_series("1", F2)
    g = solve_sfe(PowerSeriesMap({1: lam, 2: a2}), 6)
    one = parse_series("1", F2)
    expected = a2 / (lam * (one - lam))
    assert g.coefficient(2).agrees_with(expected)
    assert g.valuation(2) == -1


def test_lowest_degree_formula_general():
    """b_{i0} = a_{i0} / (λ(1 - λ^{i0-1})) with zeros below i0."""
    rng = random.Random(3)
    for field in (F2, F3, F5):
        lam = parse_series("1+T", field)
        one = parse_series("1", field)
        i0 = rng.randrange(3, 7)
        a = parse_series(f"2*T^2" if field.p > 2 else "T^2", field)
        g = solve_sfe(PowerSeriesMap({1: lam, i0: a}), i0 + 2)
        expected = a / (lam * (one - lam ** (i0 - 1)))
        assert g.coefficient(i0).agrees_with(expected)
        for k in range(2, i0):
            assert g.zero_kind[k] == STRUCTURAL


def test_linear_map_gives_identity_conjugacy():
    g = solve_sfe(PowerSeriesMap({1: parse_series("1+T", F2)}), 8)
    assert g.valuation(1) == 0
    for k in range(2, 9):
        assert g.zero_kind[k] == STRUCTURAL


def test_root_of_unity_multiplier_rejected():
    f = PowerSeriesMap({1: parse_series("1", F2), 2: parse_series("1", F2)})
    with pytest.raises(RootOfUnityError):
        solve_sfe(f, 4)


def random_map(field, rng, max_degree=8, family=False):
    lam = parse_series(f"1+T^{rng.randrange(1, 3)}", field)
    coeffs = {1: lam}
    degrees = range(field.p, max_degree + 1, field.p) if family else range(2, max_degree + 1)
    for d in rng.sample(list(degrees), min(3, len(list(degrees)))):
        c = rng.randrange(1, field.p)
        coeffs[d] = parse_series(f"{c}*T^{rng.randrange(0, 3)}", field)
    return PowerSeriesMap(coeffs)


def test_term_matching_equals_multinomial():
    rng = random.Random(11)
    for _ in range(8):
        field = rng.choice([F2, F3])
        f = random_map(field, rng)
        D = 14
        g1 = solve_sfe(f, D)
        g2 = solve_sfe_multinomial(f, D)
        assert conjugacies_agree(g1, g2, D)


def test_specialized_matches_term_matching():
    for field, a_lit in [(F2, "1"), (F3, "2"), (F2, "T")]:
        p = field.p
        f = PowerSeriesMap(
            {1: parse_series("1+T", field), p + 1: parse_series(a_lit, field)}
        )
        D = 3 * p + 1
        g1 = solve_sfe(f, D)
        g2 = solve_specialized_p_plus_1(f, 3)
        assert conjugacies_agree(g1, g2, D)


def test_specialized_requires_shape():
    f = PowerSeriesMap({1: parse_series("1+T", F2), 2: parse_series("1", F2)})
    with pytest.raises(HypothesisError):
        solve_specialized_p_plus_1(f, 3)


def test_sfe_defect_is_zero_to_precision():
    """The defining relation: every degree of g∘f − λ·g vanishes."""
    rng = random.Random(19)
    for _ in range(5):
        field = rng.choice([F2, F3])
        f = random_map(field, rng)
        D = 12
        g = solve_sfe(f, D, window=24)
        table = {k: s for k, s in g.coeffs.items() if not s.is_zero_as_known}
        gof = ps_compose(table, f, D, window=24)
        lam = f.multiplier
        for k in range(1, D + 1):
            lhs = gof.get(k)
            rhs = lam * g.coefficient(k)
            if lhs is None:
                assert rhs.is_zero_as_known
            else:
                assert (lhs - rhs).is_zero_as_known, k


def test_structural_zeros_family():
    lam = parse_series("1+T", F2)
    one = parse_series("1", F2)
    f = PowerSeriesMap({1: lam, 4: one, 6: one})
    g = solve_sfe(f, 100)
    report = check_structural_zeros(g, f)
    assert report.applicable
    assert report.violations == []
    for k in range(2, 101):
        if k % 2:
            assert g.zero_kind[k] == STRUCTURAL


def test_structural_zeros_not_applicable_outside_family():
    f = PowerSeriesMap({1: parse_series("1+T", F3), 2: parse_series("1", F3)})
    g = solve_sfe(f, 8)
    assert not check_structural_zeros(g, f).applicable


def test_coefficient_bound_saturates_at_k_prime():
    """f = λx + a_{k'} x^{k'} attains equality in the estimate."""
    for lam_lit, field, kp in [("1+T", F2, 2), ("b+T", F4, 4), ("2+T", F3, 3)]:
        lam = parse_series(lam_lit, field)
        f = PowerSeriesMap({1: lam, kp: parse_series("1", field)})
        g = solve_sfe(f, 4 * kp)
        gauge = ps_gauge(f)
        report = check_coefficient_bound(g, gauge, f)
        assert report.applicable
        assert report.violations == []
        assert report.margins[kp] == 0
        assert g.valuation(kp).value == (kp - 1) * gauge.A - g.profile.v_m.value


def test_rescaling_covariance():
    """a_{p+1} -> t·a_{p+1} rescales b_{jp+1} by exactly t^j."""
    lam = parse_series("1+T", F3)
    a = parse_series("1+2*T", F3)
    t = parse_series("T^2", F3)
    f1 = PowerSeriesMap({1: lam, 4: a})
    f2 = PowerSeriesMap({1: lam, 4: t * a})
    J = 9
    g1 = solve_specialized_p_plus_1(f1, J)
    g2 = solve_specialized_p_plus_1(f2, J)
    for j in range(1, J + 1):
        k = 3 * j + 1
        scaled = g1.coefficient(k) * t**j
        assert g2.coefficient(k).agrees_with(scaled)


def test_divergence_certificate_p2():
    f = PowerSeriesMap({1: parse_series("1+T", F2), 3: parse_series("1", F2)})
    cert = certify_divergence(f, 3)
    assert cert.verdict == "diverges"
    assert [(N, k, c) for N, k, c, _ in cert.entries] == [
        (1, 3, Fraction(-2)),
        (2, 5, Fraction(-6)),
        (3, 9, Fraction(-16)),
    ]
    assert all(c == p for _, _, c, p in cert.entries)
    assert cert.slopes == sorted(cert.slopes, reverse=True)


def test_divergence_certificate_p3():
    f = PowerSeriesMap({1: parse_series("1+T", F3), 4: parse_series("1", F3)})
    cert = certify_divergence(f, 2)
    assert [(N, k, c) for N, k, c, _ in cert.entries] == [
        (1, 4, Fraction(-3)),
        (2, 10, Fraction(-15)),
    ]


def test_divergence_conjectural_for_m_greater_one():
    f = PowerSeriesMap({1: parse_series("b+T", F4), 3: parse_series("1", F4)})
    cert = certify_divergence(f, 2)
    assert cert.conjectural
    assert cert.verdict == "conjectural"
    assert all(p is None for _, _, _, p in cert.entries)
    assert "conjectural" in cert.csv()


def test_certificate_csv_format():
    f = PowerSeriesMap({1: parse_series("1+T", F2), 3: parse_series("1", F2)})
    cert = certify_divergence(f, 2)
    lines = cert.csv().strip().splitlines()
    assert lines[0] == "N,k,v_num,v_den,predicted_num,predicted_den"
    assert lines[1] == "1,3,-2,1,-2,1"


def test_conjugacy_csv_format():
    f = PowerSeriesMap({1: parse_series("1+T", F2), 2: parse_series("1", F2)})
    g = solve_sfe(f, 4)
    lines = g.csv().strip().splitlines()
    assert lines[0] == "k,v_num,v_den,zero_kind"
    assert lines[1] == "1,0,1,nonzero"
    assert lines[2] == "2,-1,1,nonzero"
    assert lines[3].startswith("3,inf,1,")


def test_residuals_inside_discs():
    lam = parse_series("1+T", F2)
    f = PowerSeriesMap({1: lam, 2: parse_series("1", F2)})
    g = solve_sfe(f, 24, window=48)
    dp = disc_profile(mult_profile(lam), ps_gauge(f))
    for lit in ("T^2+O(T^40)", "T^2+T^3+O(T^40)", "T^5+O(T^40)"):
        x = parse_series(lit, F2)
        semi = semiconjugacy_residual(f, g, x, dp)
        full = full_conjugacy_residual(f, g, x, dp)
        assert semi.is_infinite and semi.zero_to_precision
        assert full.is_infinite and full.zero_to_precision


def test_residual_rejects_points_outside_disc():
    lam = parse_series("1+T", F2)
    f = PowerSeriesMap({1: lam, 2: parse_series("1", F2)})
    g = solve_sfe(f, 12)
    dp = disc_profile(mult_profile(lam), ps_gauge(f))
    x = parse_series("1+O(T^20)", F2)  # v = 0, outside both discs
    with pytest.raises(HypothesisError):
        semiconjugacy_residual(f, g, x, dp)
    with pytest.raises(HypothesisError):
        full_conjugacy_residual(f, g, x, dp)


def test_residual_linear_map_is_exact_zero():
    lam = parse_series("2+T", F3)
    f = PowerSeriesMap({1: lam})
    g = solve_sfe(f, 6)
    x = parse_series("T+O(T^30)", F3)
    assert semiconjugacy_residual(f, g, x).is_infinite


def test_bkprime_zero_extension():
    lam = parse_series("1+T", F2)
    # k' = 2, mp = 2: lowest degree k' + mp = 4 forces b_2 = 0
    f = PowerSeriesMap({1: lam, 4: parse_series("1", F2)})
    g = solve_sfe(f, 40)
    dp = disc_profile(mult_profile(lam), ps_gauge(f))
    verdict = check_bkprime_zero_extension(g, dp)
    assert verdict.applicable and verdict.holds
    assert verdict.first_resonant_after == 4
    # with a_{k'} present the check does not apply
    f2 = PowerSeriesMap({1: lam, 2: parse_series("1", F2)})
    g2 = solve_sfe(f2, 12)
    assert not check_bkprime_zero_extension(g2, dp).applicable
