"""Power-series maps f(x) = λx + Σ a_i x^i with Laurent-series
coefficients: evaluation, iteration, composition, derivative,
compositional inversion, and the contraction gauge.

Input maps are finite coefficient tables (polynomials), so the gauge
minimum min_{i>=2} v(a_i)/(i-1) is always attained.  Integer factors
(derivative multipliers, binomials) are reduced through the prime field,
never through machine integers.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from ._dense import DensePoly
from .errors import HypothesisError, IncompatibleFieldError
from .laurent import LaurentSeries, Valuation


class PowerSeriesMap:
    """Immutable finite table degree -> coefficient, degree 1 mandatory.

    The linear coefficient is the multiplier λ and must be a unit
    (valuation zero): the origin is an indifferent fixed point.
    """

    __slots__ = ("field", "ram", "coeffs")

    def __init__(self, coeffs):
        coeffs = dict(coeffs)
        if 1 not in coeffs:
            raise HypothesisError("a power-series map needs a linear term (degree 1)")
        lam = coeffs[1]
        field, ram = lam.field, lam.ram
        if lam.is_zero_as_known or lam.lead != 0:
            raise HypothesisError(
                f"multiplier must be a unit (valuation 0), got v = {lam.valuation()}"
            )
        cleaned = {}
        for i, a in coeffs.items():
            i = int(i)
            if i < 1:
                raise HypothesisError(f"coefficient degree {i} < 1: origin must be fixed")
            if a.field != field or a.ram != ram:
                raise IncompatibleFieldError("map coefficients in different fields")
            if not a.exact:
                raise HypothesisError("map coefficients must be exact finite tables")
            if a.is_zero_as_known and i != 1:
                continue
            cleaned[i] = a
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "ram", ram)
        object.__setattr__(self, "coeffs", cleaned)

    def __setattr__(self, *_):
        raise AttributeError("PowerSeriesMap is immutable")

    @property
    def multiplier(self):
        return self.coeffs[1]

    @property
    def degree_bound(self):
        return max(self.coeffs)

    @property
    def nonlinear_degrees(self):
        return sorted(i for i in self.coeffs if i >= 2)

    @property
    def is_linear(self):
        return not self.nonlinear_degrees

    def divisible_degrees(self):
        """True when every nonlinear degree is divisible by p (the family
        whose conjugacies converge)."""
        p = self.field.p
        return all(i % p == 0 for i in self.nonlinear_degrees)

    def coefficient(self, i):
        return self.coeffs.get(
            i, LaurentSeries.zero(self.field, self.ram, 0, exact=True)
        )

    def __repr__(self):
        parts = [f"x^{i}: {a}" for i, a in sorted(self.coeffs.items())]
        return "PowerSeriesMap({" + ", ".join(parts) + "})"


@dataclass(frozen=True)
class Gauge:
    """A = min over i >= 2 of v(a_i)/(i-1), with the witness degree.

    For a linear map there is nothing to take the minimum over and the
    gauge is the empty marker (A is None).
    """

    A: object
    attained_at: object

    @property
    def is_linear(self):
        return self.A is None

    def valuation(self):
        return Valuation(self.A) if self.A is not None else Valuation.infinite()


def ps_gauge(f):
    """Contraction gauge of the map: guarantees v(a_i) >= (i-1)A for all i."""
    best = None
    witness = None
    for i in f.nonlinear_degrees:
        v = f.coeffs[i].valuation()
        cand = Fraction(v.value, i - 1)
        if best is None or cand < best:
            best, witness = cand, i
    return Gauge(best, witness)


def ps_eval(f, x):
    """Σ a_i x^i by sparse Horner over the supported degrees."""
    degs = sorted(f.coeffs, reverse=True)
    acc = f.coeffs[degs[0]]
    for prev, nxt in zip(degs, degs[1:]):
        acc = acc * (x ** (prev - nxt)) + f.coeffs[nxt]
    return acc * (x ** degs[-1])


def ps_iterate(f, n, x):
    """n-fold iterate f(f(...f(x)...))."""
    if n < 0:
        raise HypothesisError("iteration count must be >= 0")
    for _ in range(n):
        x = ps_eval(f, x)
    return x


def ps_derivative_at(f, x):
    """f'(x) = Σ i a_i x^(i-1), the integer factors reduced mod p."""
    acc = None
    for i, a in sorted(f.coeffs.items()):
        factor = i % f.field.p
        if factor == 0:
            continue
        term = a.scale(factor) if factor != 1 else a
        if i > 1:
            term = term * (x ** (i - 1))
        acc = term if acc is None else acc + term
    if acc is None:
        return LaurentSeries.zero(f.field, f.ram, x.prec)
    return acc


def default_window(tables, minimum=8):
    """Window width covering the known spans of all given coefficient
    tables (iterables of LaurentSeries)."""
    w = minimum
    for table in tables:
        for s in table:
            if s.is_zero_as_known:
                continue
            span = s.coeffs.shape[0] if s.exact else s.prec - s.lead
            w = max(w, int(span))
    return w


def ps_compose(outer, inner, D, window=None):
    """Coefficient table of g(f(x)) for degrees <= D.

    ``outer`` is a table degree -> LaurentSeries (degrees >= 0 allowed),
    ``inner`` a PowerSeriesMap.  Powers of the inner map accumulate in the
    dense engine, so precision follows the pessimistic minimum rule.
    """
    field, ram = inner.field, inner.ram
    if window is None:
        window = default_window([outer.values(), inner.coeffs.values()])
    acc = DensePoly(field, ram, D, window)
    fpow = DensePoly(field, ram, D, window)
    fpow.set_column(0, LaurentSeries.constant(field, 1, ram))
    level = 0
    for l in sorted(outer):
        if l > D:
            break
        while level < l:
            fpow = fpow.mul_by_map(inner)
            level += 1
        acc.add_scaled(outer[l], fpow)
    result = {}
    for d in range(D + 1):
        col = acc.column(d)
        if not col.is_exact_zero:
            result[d] = col
    return result


def table_compose(outer, inner, D):
    """g(h(x)) for two coefficient tables (h(0) = 0), truncated at degree D.

    Plain Horner over LaurentSeries polynomials; slower than ps_compose
    but accepts an inexact inner table.
    """
    acc = {}
    for l in range(max(outer), -1, -1):
        acc = _table_mul(acc, inner, D)
        if l in outer:
            acc[0] = acc[0] + outer[l] if 0 in acc else outer[l]
    return {d: s for d, s in acc.items() if not s.is_exact_zero}


def _table_mul(a, b, D):
    """Product of two x-polynomials with series coefficients, degree <= D."""
    out = {}
    for i, s in a.items():
        for j, t in b.items():
            d = i + j
            if d > D:
                continue
            prod = s * t
            out[d] = out[d] + prod if d in out else prod
    return out


def _table_add(a, b):
    out = dict(a)
    for d, s in b.items():
        out[d] = out[d] + s if d in out else s
    return out


def _table_neg(a):
    return {d: -s for d, s in a.items()}


def _table_derivative(a, p):
    out = {}
    for d, s in a.items():
        if d == 0:
            continue
        factor = d % p
        if factor == 0:
            continue
        out[d - 1] = s.scale(factor) if factor != 1 else s
    return out


def _table_inverse_unit(u, D):
    """Reciprocal of an x-polynomial with unit constant coefficient,
    truncated at degree D (back-substitution in x)."""
    v0 = u[0].inverse()
    v = {0: v0}
    for k in range(1, D + 1):
        s = None
        for j, uj in u.items():
            if 1 <= j <= k and (k - j) in v:
                term = uj * v[k - j]
                s = term if s is None else s + term
        if s is None:
            continue
        v[k] = -(v0 * s)
    return v


def ps_invert(g, D):
    """Compositional inverse of a table with g(0) = 0 and unit linear
    coefficient: returns h with g(h(x)) ≡ x mod x^(D+1).

    Newton iteration doubling the trusted degree each step:
    h <- h - (g∘h - x) / (g'∘h).
    """
    g = {d: s for d, s in g.items() if d >= 1 and not s.is_exact_zero}
    if 1 not in g or g[1].is_zero_as_known or g[1].lead != 0:
        raise HypothesisError("compositional inversion needs a unit linear term")
    field = g[1].field
    p = field.p
    h = {1: g[1].inverse()}
    gprime = _table_derivative(g, p)
    trusted = 1
    while trusted < D:
        trusted = min(2 * trusted, D)
        goh = table_compose(g, h, trusted)
        goh[1] = goh[1] - LaurentSeries.constant(field, 1, g[1].ram)
        gpoh = table_compose(gprime, h, trusted)
        inv = _table_inverse_unit(gpoh, trusted)
        corr = _table_mul(goh, inv, trusted)
        h = _table_add(h, _table_neg(corr))
        h = {d: s for d, s in h.items() if d <= trusted and not s.is_exact_zero}
    return h


@lru_cache(maxsize=None)
def binomial_mod_p(n, k, p):
    """Binomial coefficient mod p by Lucas' theorem."""
    if k < 0 or k > n:
        return 0
    result = 1
    while n or k:
        nd, kd = n % p, k % p
        if kd > nd:
            return 0
        num = den = 1
        for t in range(kd):
            num = num * (nd - t) % p
            den = den * (t + 1) % p
        result = result * num * pow(den, p - 2, p) % p
        n //= p
        k //= p
    return result
