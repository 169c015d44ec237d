"""Arithmetic of the multiplier λ: root-of-unity screening, the order m
of its reduction, the resonance threshold k', closed-form small-divisor
valuations, the geometric product formula, and the radii ρ and σ.

In characteristic p the roots of unity of F_q((T)) are exactly the
nonzero constants: any root of unity is integral, and u = λ/λ̄ with
constant term 1 satisfies u^{n·p^s} = 1 for suitable s, forcing
(u − 1)^{n·p^s} = 0 by Frobenius, so u = 1.  The screen therefore checks
the non-constant part of λ, with a tri-state answer when that part is
merely zero to the justified horizon.
"""

from dataclasses import dataclass
from fractions import Fraction

from .errors import HypothesisError, PrecisionError, RootOfUnityError
from .laurent import LaurentSeries, Valuation


@dataclass(frozen=True)
class MultiplierProfile:
    """Exact resonance data of a unit multiplier.

    m is the least n >= 1 with v(1 - λ^n) > 0 (the multiplicative order
    of the reduction λ̄); k' the least k with p | k and m | k - 1.
    Over a finite residue field every unit non-root-of-unity multiplier
    falls into category 2 (some power is congruent to 1), so category is
    always 2 here; the field is kept for API totality.
    """

    lam: LaurentSeries
    category: int
    m: int
    v_m: Valuation
    k_prime: int
    root_of_unity_flag: str

    @property
    def p(self):
        return self.lam.field.p

    def report_dict(self):
        return {
            "p": self.lam.field.p,
            "r": self.lam.field.r,
            "m": self.m,
            "v_m": str(self.v_m),
            "k_prime": self.k_prime,
        }


@dataclass(frozen=True)
class DiscProfile:
    """Radii of the semi-conjugacy disc (ρ) and the linearization disc
    (σ) as exact rational valuations: v_rho = v_m/(mp) - A and
    v_sigma = v_m/(k'-1) - A."""

    A: Valuation
    v_rho: Valuation
    v_sigma: Valuation

    def report_dict(self):
        return {
            "A": str(self.A),
            "v_rho": str(self.v_rho),
            "v_sigma": str(self.v_sigma),
        }


def screen_root_of_unity(lam):
    """Raise RootOfUnityError when λ is a root of unity (it equals its
    constant term) or cannot be distinguished from one at the available
    precision (flag ``undetermined``)."""
    if lam.is_zero_as_known or lam.lead != 0:
        raise HypothesisError(f"multiplier must be a unit, got v = {lam.valuation()}")
    nonconstant = lam.coeffs.shape[0] > 1
    if nonconstant:
        return "no"
    if lam.exact:
        raise RootOfUnityError(
            "multiplier is a nonzero constant, hence a root of unity"
        )
    raise RootOfUnityError(
        f"non-constant part of the multiplier is zero to O(U^{lam.prec}); "
        "cannot rule out a root of unity",
        undetermined=True,
    )


def mult_profile(lam):
    """Resonance profile of the multiplier λ (valuation 0 required)."""
    flag = screen_root_of_unity(lam)
    p = lam.field.p
    m = lam.residue().multiplicative_order()
    if m % p == 0:
        raise HypothesisError("order of the reduction cannot be divisible by p")
    v_m = small_divisor_direct(lam, m)
    if v_m.is_infinite:
        raise PrecisionError(
            f"v(1 - lambda^{m}) exceeds the horizon; raise the working precision"
        )
    if not v_m > 0:
        raise HypothesisError("reduction order m must make |1 - lambda^m| < 1")
    k_prime = None
    for k in range(p, m * p + 1, p):
        if (k - 1) % m == 0:
            k_prime = k
            break
    if k_prime is None or not k_prime - 1 < m * p:
        raise HypothesisError("no resonant degree k <= mp; impossible when p does not divide m")
    return MultiplierProfile(lam, 2, m, v_m, k_prime, flag)


def small_divisor_valuation(profile, n):
    """Closed-form v(1 - λ^n): 0 when m does not divide n, otherwise
    v_m · p^j where p^j is the largest power of p dividing n."""
    if n < 1:
        raise HypothesisError("exponent must be >= 1")
    if n % profile.m:
        return Valuation(0)
    p = profile.p
    j = 0
    while n % p == 0:
        n //= p
        j += 1
    return Valuation(profile.v_m.value * p**j)


def small_divisor_direct(lam, n):
    """v(1 - λ^n) by square-and-multiply in the series field: the
    independent oracle for the closed form."""
    one = LaurentSeries.constant(lam.field, 1, lam.ram)
    return (one - lam**n).valuation()


def count_resonant(profile, k):
    """Number of l <= k with p | l and m | l - 1 (an arithmetic
    progression of step mp starting at k')."""
    if k < profile.k_prime:
        return 0
    return (k - profile.k_prime) // (profile.m * profile.p) + 1


def product_small_divisors(profile, N):
    """Σ_{i=1}^{p^{N-1}} v(1 - λ^{ip}) for m = 1, both term by term and
    via the closed form v_1 · p^N · ((p-1)(N-1)/p + 1); asserts equality."""
    if profile.m != 1:
        raise HypothesisError("the product formula requires m = 1 (|1 - lambda| < 1)")
    if N < 1:
        raise HypothesisError("N must be >= 1")
    p = profile.p
    v1 = profile.v_m.value
    total = Fraction(0)
    for i in range(1, p ** (N - 1) + 1):
        j = 1
        while i % p == 0:
            i //= p
            j += 1
        total += v1 * p**j
    closed = v1 * p**N * (Fraction(p - 1, p) * (N - 1) + 1)
    if total != closed:
        raise AssertionError(
            f"product formula mismatch at N={N}: terms {total} != closed {closed}"
        )
    return Valuation(closed)


def disc_profile(profile, gauge):
    """Radii v_rho = v_m/(mp) - A and v_sigma = v_m/(k'-1) - A."""
    if gauge.is_linear:
        raise HypothesisError("disc radii are undefined for a linear map")
    A = gauge.A
    v_m = profile.v_m.value
    v_rho = Fraction(v_m, profile.m * profile.p) - A
    v_sigma = Fraction(v_m, profile.k_prime - 1) - A
    if not (v_sigma > v_rho > -A):
        raise AssertionError(
            f"radius ordering violated: v_sigma={v_sigma}, v_rho={v_rho}, -A={-A}"
        )
    return DiscProfile(Valuation(A), Valuation(v_rho), Valuation(v_sigma))
