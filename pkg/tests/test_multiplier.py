"""Multiplier resonance data: m, k', closed-form small divisors, the
product formula, resonance counting, and disc radii."""

import random
from fractions import Fraction

import pytest

from lindisc import (
    FieldParams,
    PowerSeriesMap,
    count_resonant,
    disc_profile,
    mult_profile,
    parse_series,
    product_small_divisors,
    ps_gauge,
    small_divisor_direct,
    small_divisor_valuation,
)
from lindisc.errors import HypothesisError, RootOfUnityError

F2 = FieldParams(2)
F3 = FieldParams(3)
F4 = FieldParams(2, 2)
F5 = FieldParams(5)


def test_profile_examples():
    pr = mult_profile(parse_series("1+T", F2))
    assert (pr.m, pr.v_m.value, pr.k_prime) == (1, 1, 2)
    pr = mult_profile(parse_series("b+T", F4))
    assert (pr.m, pr.v_m.value, pr.k_prime) == (3, 1, 4)
    pr = mult_profile(parse_series("2+T", F3))
    assert (pr.m, pr.v_m.value, pr.k_prime) == (2, 1, 3)


def test_profile_invariants():
    rng = random.Random(31)
    fields = [F2, F3, F4, F5, FieldParams(3, 2)]
    for _ in range(40):
        field = rng.choice(fields)
        c0 = rng.choice([e for e in field.elements() if not e.is_zero])
        j = rng.randrange(1, 4)
        lam = parse_series("1", field).scale(c0) + parse_series(f"T^{j}", field)
        pr = mult_profile(lam)
        assert pr.m % field.p != 0
        assert pr.k_prime % field.p == 0
        assert (pr.k_prime - 1) % pr.m == 0
        assert pr.k_prime - 1 < pr.m * field.p
        assert pr.v_m > 0
        assert (field.q - 1) % pr.m == 0


def test_root_of_unity_screening_tri_state():
    with pytest.raises(RootOfUnityError) as exc:
        mult_profile(parse_series("1", F2))
    assert not exc.value.undetermined
    with pytest.raises(RootOfUnityError) as exc:
        mult_profile(parse_series("b", F4))
    assert not exc.value.undetermined
    with pytest.raises(RootOfUnityError) as exc:
        mult_profile(parse_series("1+O(T^8)", F2))
    assert exc.value.undetermined
    # a known non-constant part settles the question
    mult_profile(parse_series("1+T+O(T^8)", F2))


def test_non_unit_multiplier_rejected():
    with pytest.raises(HypothesisError):
        mult_profile(parse_series("T", F2))


def test_small_divisor_closed_form_examples():
    pr = mult_profile(parse_series("1+T", F2))
    assert small_divisor_valuation(pr, 6) == 2
    assert small_divisor_valuation(pr, 8) == 8
    pr4 = mult_profile(parse_series("b+T", F4))
    assert small_divisor_valuation(pr4, 5) == 0
    assert small_divisor_valuation(pr4, 3) == 1
    assert small_divisor_valuation(pr4, 12) == 4


def test_small_divisor_direct_examples():
    lam = parse_series("1+T", F2)
    assert small_divisor_direct(lam, 2) == 2  # Frobenius: (1+T)^2 = 1+T^2
    assert small_divisor_direct(lam, 1) == 1
    assert small_divisor_direct(parse_series("b+T", F4), 3) == 1


def test_closed_form_matches_direct_oracle():
    profiles = [
        parse_series("1+T", F2),
        parse_series("1+T^3", F2),
        parse_series("b+T", F4),
        parse_series("2+T", F3),
        parse_series("1+2*T^2", F3),
        parse_series("2+T", F5),
    ]
    for lam in profiles:
        pr = mult_profile(lam)
        for n in range(1, 200):
            assert small_divisor_valuation(pr, n) == small_divisor_direct(lam, n), (
                lam.render(),
                n,
            )


def test_product_formula_examples():
    pr2 = mult_profile(parse_series("1+T", F2))
    assert product_small_divisors(pr2, 3) == 16
    assert product_small_divisors(pr2, 1) == 2
    pr3 = mult_profile(parse_series("1+T", F3))
    assert product_small_divisors(pr3, 2) == 15


def test_product_formula_matches_direct_series():
    for field in (F2, F3):
        lam = parse_series("1+T", field)
        pr = mult_profile(lam)
        p = field.p
        for N in range(1, 4):
            direct = sum(
                small_divisor_direct(lam, i * p).value
                for i in range(1, p ** (N - 1) + 1)
            )
            assert product_small_divisors(pr, N) == direct


def test_product_formula_requires_m_one():
    pr = mult_profile(parse_series("b+T", F4))
    with pytest.raises(HypothesisError):
        product_small_divisors(pr, 2)


def test_count_resonant_against_brute_force():
    for lam, field in [
        (parse_series("1+T", F2), F2),
        (parse_series("b+T", F4), F4),
        (parse_series("2+T", F3), F3),
        (parse_series("2+T^2", F5), F5),
    ]:
        pr = mult_profile(lam)
        p, m = field.p, pr.m
        for k in range(2, 10 * m * p + 1):
            brute = sum(
                1 for l in range(2, k + 1) if l % p == 0 and (l - 1) % m == 0
            )
            assert count_resonant(pr, k) == brute
        assert count_resonant(pr, pr.k_prime - 1) == 0
        assert count_resonant(pr, pr.k_prime) == 1
        assert count_resonant(pr, pr.k_prime + m * p) == 2


def test_disc_profile_examples():
    lam = parse_series("1+T", F2)
    f = PowerSeriesMap({1: lam, 2: parse_series("1", F2)})
    dp = disc_profile(mult_profile(lam), ps_gauge(f))
    assert dp.v_sigma.value == 1 and dp.v_rho.value == Fraction(1, 2)

    lam4 = parse_series("b+T", F4)
    f4 = PowerSeriesMap({1: lam4, 4: parse_series("1", F4)})
    dp4 = disc_profile(mult_profile(lam4), ps_gauge(f4))
    assert dp4.v_rho.value == Fraction(1, 6) and dp4.v_sigma.value == Fraction(1, 3)

    # gauge shift: a_2 = T moves both radii down by A = 1
    f_shift = PowerSeriesMap({1: lam, 2: parse_series("T", F2)})
    dp_s = disc_profile(mult_profile(lam), ps_gauge(f_shift))
    assert dp_s.v_sigma.value == 0 and dp_s.v_rho.value == Fraction(-1, 2)


def test_disc_profile_ordering_invariant():
    rng = random.Random(47)
    for _ in range(30):
        field = rng.choice([F2, F3, F5])
        lam = parse_series(f"1+T^{rng.randrange(1, 3)}", field)
        coeffs = {1: lam}
        for d in rng.sample(range(2, 10), 3):
            coeffs[d] = parse_series(f"T^{rng.randrange(-1, 3)}", field)
        f = PowerSeriesMap(coeffs)
        gauge = ps_gauge(f)
        dp = disc_profile(mult_profile(lam), gauge)
        assert dp.v_sigma.value > dp.v_rho.value > -gauge.A


def test_report_serialization():
    pr = mult_profile(parse_series("b+T", F4))
    rep = pr.report_dict()
    assert rep == {"p": 2, "r": 2, "m": 3, "v_m": "1/1", "k_prime": 4}
