"""Formal solutions g of g∘f = λ·g (normalized g(0) = 0, g'(0) = 1),
their structural and valuation properties, divergence certificates for
the degree-(p+1) family, and conjugacy residual checks at sample points.

Three independent solvers are provided: term matching against the
accumulated powers of f (the workhorse), the multinomial recurrence
(partition enumeration, small degrees), and the specialized recurrence
for f = λx + a_{p+1} x^{p+1} whose conjugacy is supported on degrees
j·p + 1.  Dividing by the small divisor 1 − λ^{k-1} never destroys the
justified horizon: the multiplier is an exact literal, so the divisor is
exact and its reciprocal is expanded to the full working width; its
valuation is asserted against the closed form each time.
"""

from dataclasses import dataclass
from fractions import Fraction

from ._dense import DensePoly
from .errors import HypothesisError, PrecisionError
from .laurent import LaurentSeries, Valuation
from .multiplier import (
    count_resonant,
    mult_profile,
    product_small_divisors,
    small_divisor_valuation,
)
from .powerseries import binomial_mod_p, ps_eval

STRUCTURAL = "structural"
COMPUTED_ZERO = "computed-zero"
NONZERO = "nonzero"


@dataclass(frozen=True)
class Conjugacy:
    """Coefficients b_k of the normalized formal conjugacy up to degree D,
    each tagged with how its vanishing (or not) is known."""

    coeffs: dict
    zero_kind: dict
    profile: object
    source: str
    D: int

    def coefficient(self, k):
        if k > self.D:
            raise HypothesisError(f"degree {k} beyond solved bound {self.D}")
        return self.coeffs[k]

    def valuation(self, k):
        return self.coefficient(k).valuation()

    def table(self):
        """Coefficient table for evaluation (zero entries dropped)."""
        return {k: s for k, s in self.coeffs.items() if not s.is_zero_as_known}

    def csv(self):
        lines = ["k,v_num,v_den,zero_kind"]
        for k in range(1, self.D + 1):
            v = self.valuation(k)
            if v.is_infinite:
                num, den = "inf", "1"
            else:
                num, den = str(v.value.numerator), str(v.value.denominator)
            lines.append(f"{k},{num},{den},{self.zero_kind[k]}")
        return "\n".join(lines) + "\n"


def _divisor_series(lam_pow, lam, profile, k, ram):
    """λ(1 − λ^{k-1}) exactly, with the closed-form valuation assert."""
    one = LaurentSeries.constant(lam.field, 1, ram)
    div = (one - lam_pow) * lam
    expected = small_divisor_valuation(profile, k - 1)
    if div.is_zero_as_known:
        raise PrecisionError(f"divisor 1 - lambda^{k-1} vanished; root of unity?")
    if Fraction(div.lead, ram) != expected.value:
        raise AssertionError(
            f"divisor valuation {Fraction(div.lead, ram)} != closed form "
            f"{expected} at k = {k}"
        )
    return div


def solve_sfe(f, D, window=32):
    """Degree-by-degree term matching: b_k = [x^k](Σ_{l<k} b_l f^l)
    divided by λ(1 − λ^{k-1}).

    When every nonlinear degree of f is divisible by p, coefficients of
    degree k > 1 with p ∤ k are proven zero and short-circuited.
    """
    lam = f.multiplier
    profile = mult_profile(lam)
    field_, ram = f.field, f.ram
    one = LaurentSeries.constant(field_, 1, ram)
    exact_zero = LaurentSeries.zero(field_, ram, 0, exact=True)
    p = field_.p
    family = f.divisible_degrees() and not f.is_linear

    coeffs = {1: one}
    kinds = {1: NONZERO}
    acc = DensePoly(field_, ram, D, window)
    fpow = DensePoly(field_, ram, D, window)
    for i, a in f.coeffs.items():
        if i <= D:
            fpow.set_column(i, a)
    acc.add_scaled(one, fpow)  # Σ so far = b_1 f^1
    lam_pow = lam  # λ^{k-1}
    for k in range(2, D + 1):
        s_k = acc.column(k)
        if family and k % p != 0:
            if not s_k.is_zero_as_known:
                raise AssertionError(
                    f"degree {k} should vanish for p-divisible maps, got {s_k}"
                )
            b_k, kind = exact_zero, STRUCTURAL
        elif s_k.is_exact_zero:
            b_k, kind = exact_zero, STRUCTURAL
        else:
            div = _divisor_series(lam_pow, lam, profile, k, ram)
            inv = div.truncate_relative(window).inverse()
            b_k = s_k * inv
            kind = COMPUTED_ZERO if b_k.is_zero_as_known else NONZERO
        coeffs[k] = b_k
        kinds[k] = kind
        if k < D:
            fpow = fpow.mul_by_map(f)
            acc.add_scaled(b_k, fpow)
            lam_pow = lam_pow * lam
    return Conjugacy(coeffs, kinds, profile, "term-matching", D)


def _multinomial_mod_p(l, alphas, p):
    """l! / Π α_i! mod p via iterated Lucas binomials."""
    result = 1
    s = 0
    for a in alphas:
        s += a
        result = result * binomial_mod_p(s, a, p) % p
        if result == 0:
            return 0
    assert s == l
    return result


def _index_solutions(degrees, l, k):
    """All maps degree -> multiplicity with Σα = l and Σ(degree·α) = k."""
    degrees = sorted(degrees, reverse=True)

    def rec(idx, rem_l, rem_k, current):
        if idx == len(degrees):
            if rem_l == 0 and rem_k == 0:
                yield dict(current)
            return
        d = degrees[idx]
        if idx == len(degrees) - 1 and d == 1:
            # degree 1 absorbs the remainder when consistent
            if rem_l == rem_k and rem_l >= 0:
                current[d] = rem_l
                yield dict(current)
                current.pop(d, None)
            return
        max_a = min(rem_l, rem_k // d)
        for a in range(max_a + 1):
            current[d] = a
            yield from rec(idx + 1, rem_l - a, rem_k - a * d, current)
        current.pop(d, None)

    yield from rec(0, l, k, {})


def solve_sfe_multinomial(f, D, window=32):
    """Independent solver enumerating the index equations
    Σα_i = l, Σ i·α_i = k with multinomial factors reduced mod p.

    Exponential in the support size; intended for small D as a
    cross-oracle of solve_sfe.
    """
    lam = f.multiplier
    profile = mult_profile(lam)
    field_, ram = f.field, f.ram
    p = field_.p
    one = LaurentSeries.constant(field_, 1, ram)
    exact_zero = LaurentSeries.zero(field_, ram, 0, exact=True)
    degrees = sorted(f.coeffs)
    power_cache = {}

    def a_power(i, n):
        if n == 0:
            return one
        key = (i, n)
        if key not in power_cache:
            power_cache[key] = f.coeffs[i] ** n
        return power_cache[key]

    coeffs = {1: one}
    kinds = {1: NONZERO}
    lam_pow = lam
    for k in range(2, D + 1):
        total = None
        for l in range(1, k):
            b_l = coeffs[l]
            if b_l.is_exact_zero:
                continue
            for alpha in _index_solutions(degrees, l, k):
                mult = _multinomial_mod_p(
                    l, [alpha.get(i, 0) for i in degrees], p
                )
                if mult == 0:
                    continue
                term = one.scale(mult)
                for i in degrees:
                    if alpha.get(i, 0):
                        term = term * a_power(i, alpha[i])
                term = term * b_l
                total = term if total is None else total + term
        if total is None or total.is_exact_zero:
            b_k, kind = exact_zero, STRUCTURAL
        else:
            div = _divisor_series(lam_pow, lam, profile, k, ram)
            b_k = total * div.truncate_relative(window).inverse()
            kind = COMPUTED_ZERO if b_k.is_zero_as_known else NONZERO
        coeffs[k] = b_k
        kinds[k] = kind
        lam_pow = lam_pow * lam
    return Conjugacy(coeffs, kinds, profile, "multinomial", D)


def _p_plus_1_shape(f):
    """The single nonlinear coefficient a_{p+1} of f = λx + a x^{p+1}."""
    p = f.field.p
    degs = f.nonlinear_degrees
    if degs != [p + 1]:
        raise HypothesisError(
            f"expected the single nonlinear degree p+1 = {p + 1}, got {degs}"
        )
    return f.coeffs[p + 1]


def solve_specialized_p_plus_1(f, Jmax, window=32):
    """Conjugacy of f = λx + a x^{p+1} via the closed recurrence on the
    supported degrees jp + 1:

    b_{jp+1} = (Σ_{i=⌈(j-1)/(p+1)⌉}^{j-1} b_{ip+1}·C(ip+1, j-i)·
               λ^{ip+1-(j-i)}·a^{j-i}) / (λ(1 − λ^{jp}))

    with binomials mod p by Lucas.  All other degrees are structural
    zeros.  Solves up to degree D = Jmax·p + 1.
    """
    a = _p_plus_1_shape(f)
    lam = f.multiplier
    profile = mult_profile(lam)
    field_, ram = f.field, f.ram
    p = field_.p
    D = Jmax * p + 1
    one = LaurentSeries.constant(field_, 1, ram)
    exact_zero = LaurentSeries.zero(field_, ram, 0, exact=True)

    lam_powers = [one]  # λ^n, built incrementally as needed
    def lam_power(n):
        while len(lam_powers) <= n:
            lam_powers.append(lam_powers[-1] * lam)
        return lam_powers[n]

    a_powers = [one]
    def a_power(n):
        while len(a_powers) <= n:
            a_powers.append(a_powers[-1] * a)
        return a_powers[n]

    b = {0: one}  # indexed by j: b[j] = b_{jp+1}
    for j in range(1, Jmax + 1):
        total = None
        for i in range((j - 1 + p) // (p + 1), j):
            c = binomial_mod_p(i * p + 1, j - i, p)
            if c == 0:
                continue
            term = b[i].scale(c) * lam_power(i * p + 1 - (j - i)) * a_power(j - i)
            total = term if total is None else total + term
        if total is None:
            b[j] = exact_zero
            continue
        div = _divisor_series(lam_power(j * p), lam, profile, j * p + 1, ram)
        b[j] = total * div.truncate_relative(window).inverse()
    coeffs = {}
    kinds = {}
    for k in range(1, D + 1):
        if (k - 1) % p == 0:
            j = (k - 1) // p
            coeffs[k] = b[j]
            if b[j].is_exact_zero:
                kinds[k] = STRUCTURAL
            elif b[j].is_zero_as_known:
                kinds[k] = COMPUTED_ZERO
            else:
                kinds[k] = NONZERO
        else:
            coeffs[k] = exact_zero
            kinds[k] = STRUCTURAL
    return Conjugacy(coeffs, kinds, profile, "specialized", D)


@dataclass(frozen=True)
class ZeroReport:
    applicable: bool
    violations: list


def check_structural_zeros(g, f):
    """For p-divisible maps, every b_k with k > 1 and p ∤ k must vanish."""
    if not f.divisible_degrees() or f.is_linear:
        return ZeroReport(False, [])
    p = f.field.p
    violations = [
        k
        for k in range(2, g.D + 1)
        if k % p != 0 and g.zero_kind[k] == NONZERO
    ]
    return ZeroReport(True, violations)


@dataclass(frozen=True)
class BoundReport:
    applicable: bool
    margins: dict  # k -> Fraction margin, or None when b_k vanishes
    violations: list
    indeterminate: list  # zero-to-precision entries whose horizon is too low


def check_coefficient_bound(g, gauge, f=None):
    """v(b_k) >= (k-1)·A − v_m·count_resonant(k) for p-divisible maps."""
    if gauge.is_linear:
        return BoundReport(False, {}, [], [])
    if f is not None and not f.divisible_degrees():
        return BoundReport(False, {}, [], [])
    profile = g.profile
    A = gauge.A
    v_m = profile.v_m.value
    ram = g.coeffs[1].ram
    margins, violations, indeterminate = {}, [], []
    for k in range(2, g.D + 1):
        bound = (k - 1) * A - v_m * count_resonant(profile, k)
        b_k = g.coeffs[k]
        if b_k.is_zero_as_known:
            if not b_k.exact and Fraction(b_k.prec, ram) < bound:
                indeterminate.append(k)
            margins[k] = None
            continue
        margin = Fraction(b_k.lead, ram) - bound
        margins[k] = margin
        if margin < 0:
            violations.append(k)
    return BoundReport(True, margins, violations, indeterminate)


@dataclass(frozen=True)
class DivergenceCertificate:
    """Exact valuations of b_{p^N + 1} against the predicted closed form.

    ``conjectural`` marks the m > 1 regime where the dominant-term
    argument is not available: growth data only, no divergence claim.
    """

    entries: list  # (N, degree, computed: Fraction, predicted: Fraction|None)
    slopes: list  # Fraction v(b_k)/k per entry
    verdict: str
    conjectural: bool
    profile: object

    def csv(self):
        tag = ",conjectural" if self.conjectural else ""
        lines = ["N,k,v_num,v_den,predicted_num,predicted_den" + (",note" if tag else "")]
        for N, k, computed, predicted in self.entries:
            pred = (
                f"{predicted.numerator},{predicted.denominator}"
                if predicted is not None
                else ","
            )
            lines.append(
                f"{N},{k},{computed.numerator},{computed.denominator},{pred}{tag}"
            )
        return "\n".join(lines) + "\n"


def certify_divergence(f, Nmax, window=32):
    """Certificate that f = λx + a x^{p+1} with m(λ) = 1 is not
    analytically linearizable: v(b_{p^N+1}) is checked against
    p^{N-1}·v(a) − v_1·p^N·(1 + (p-1)(N-1)/p) for N = 1..Nmax, and the
    slope v(b_k)/k decreases without bound.

    For m > 1 growth data is returned with verdict "conjectural"; the
    exact-modulus formula need not hold there.
    """
    a = _p_plus_1_shape(f)
    lam = f.multiplier
    profile = mult_profile(lam)
    p = f.field.p
    ram = f.ram
    Jmax = p ** (Nmax - 1)
    g = solve_specialized_p_plus_1(f, Jmax, window)
    v_a = Fraction(a.lead, ram)
    entries, slopes = [], []
    conjectural = profile.m != 1
    for N in range(1, Nmax + 1):
        j = p ** (N - 1)
        k = j * p + 1
        b = g.coeffs[k]
        if b.is_zero_as_known:
            raise PrecisionError(f"b_{k} vanished to precision; cannot certify")
        computed = Fraction(b.lead, ram)
        if conjectural:
            predicted = None
        else:
            divisor_sum = sum(
                small_divisor_valuation(profile, i * p).value for i in range(1, j + 1)
            )
            predicted = j * v_a - divisor_sum
            closed = j * v_a - product_small_divisors(profile, N).value
            if not (computed == predicted == closed):
                raise AssertionError(
                    f"divergence valuation mismatch at N={N}: computed {computed}, "
                    f"term sum {predicted}, closed form {closed}"
                )
        entries.append((N, k, computed, predicted))
        slopes.append(Fraction(computed, k))
    if not conjectural:
        for prev, nxt in zip(slopes, slopes[1:]):
            if not nxt < prev:
                raise AssertionError("divergence slope failed to decrease")
        verdict = "diverges"
    else:
        verdict = "conjectural"
    return DivergenceCertificate(entries, slopes, verdict, conjectural, profile)


def eval_table(table, x):
    """Evaluate a coefficient table (a polynomial in x) at a point."""
    degs = sorted(table, reverse=True)
    if not degs:
        return LaurentSeries.zero(x.field, x.ram, x.prec)
    acc = table[degs[0]]
    for prev, nxt in zip(degs, degs[1:]):
        acc = acc * (x ** (prev - nxt)) + table[nxt]
    return acc * (x ** degs[-1])


def semiconjugacy_residual(f, g, x, dp=None):
    """v(g(f(x)) − λ·g(x)); expected beyond the horizon inside D_ρ."""
    if dp is not None and not x.valuation() > dp.v_rho:
        raise HypothesisError(
            f"sample point v = {x.valuation()} not inside the semi-disc "
            f"(need v > {dp.v_rho})"
        )
    table = g.table()
    lhs = eval_table(table, ps_eval(f, x))
    rhs = f.multiplier * eval_table(table, x)
    return (lhs - rhs).valuation()


def invert_at_point(g, x, max_iter=64):
    """Solve g(y) = x by Newton iteration from y = x (g is tangent to the
    identity, so convergence is quadratic inside the linearization disc)."""
    table = g.table()
    p = x.field.p
    dtable = {}
    for d, s in table.items():
        factor = d % p
        if d >= 1 and factor:
            dtable[d - 1] = s.scale(factor) if factor != 1 else s
    y = x
    for _ in range(max_iter):
        resid = eval_table(table, y) - x
        if resid.is_zero_as_known:
            return y
        deriv = eval_table(dtable, y)
        y = y - resid * deriv.inverse()
    raise PrecisionError("point inversion of the conjugacy did not converge")


def full_conjugacy_residual(f, g, x, dp=None):
    """v(g(f(g^{-1}(x))) − λ·x); expected beyond the horizon inside D_σ."""
    if dp is not None and not x.valuation() > dp.v_sigma:
        raise HypothesisError(
            f"sample point v = {x.valuation()} not inside the linearization "
            f"disc (need v > {dp.v_sigma})"
        )
    y = invert_at_point(g, x)
    value = eval_table(g.table(), ps_eval(f, y))
    return (value - f.multiplier * x).valuation()


@dataclass(frozen=True)
class ExtensionVerdict:
    applicable: bool
    holds: bool
    checked_through: int
    first_resonant_after: int


def check_bkprime_zero_extension(g, dp):
    """When b_{k'} vanishes, the one-to-one radius of g extends from σ to
    ρ: verify v(b_k) + k·v_rho > v_rho strictly for every computed k >= 2."""
    profile = g.profile
    kp = profile.k_prime
    k_second = kp + profile.m * profile.p
    if kp > g.D or not g.coeffs[kp].is_zero_as_known:
        return ExtensionVerdict(False, False, g.D, k_second)
    v_rho = dp.v_rho.value
    ram = g.coeffs[1].ram
    for k in range(2, g.D + 1):
        b_k = g.coeffs[k]
        if b_k.is_zero_as_known:
            continue
        if not Fraction(b_k.lead, ram) + k * v_rho > v_rho:
            return ExtensionVerdict(True, False, g.D, k_second)
    return ExtensionVerdict(True, True, g.D, k_second)
