"""Truncated formal Laurent series over F_q with exact valuations.

A series lives in F_q((U)) where the uniformizer U satisfies U^e = T for
the ramification index e >= 1 (e = 1 is the base field F_q((T))).  Each
series carries

* ``lead`` -- the exponent (in U-units) of its first known coefficient,
* ``coeffs`` -- a numpy array of shape (L, r) of polynomial-basis
  coordinates, row j holding the coefficient of U^(lead+j),
* ``prec`` -- the justified horizon M: coefficients at exponents >= M are
  unknown, the series is known modulo O(U^M),
* ``exact`` -- True when the series is a finite table known in full (a
  parsed literal, for instance); the tail of an exact series is genuinely
  zero, so its horizon may be raised freely.

Valuations are exact rationals lead/e; absolute values are never
materialised as floats.  All precision propagation is pessimistic: a
result's horizon is the minimum horizon its inputs justify.
"""

import math
import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    IncompatibleFieldError,
    NotIntegralError,
    ParseError,
    PrecisionError,
    ZeroDivisionFieldError,
)
from .field import FieldParams, FqElement


class Valuation:
    """Exact rational valuation, or +infinity for (apparent) zero.

    ``zero_to_precision`` distinguishes "all *known* coefficients vanish"
    from a structurally zero element.
    """

    __slots__ = ("value", "zero_to_precision")

    def __init__(self, value, zero_to_precision=False):
        if value is not None:
            value = Fraction(value)
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "zero_to_precision", bool(zero_to_precision))

    def __setattr__(self, *_):
        raise AttributeError("Valuation is immutable")

    @classmethod
    def infinite(cls, zero_to_precision=False):
        return cls(None, zero_to_precision)

    @property
    def is_infinite(self):
        return self.value is None

    def _key(self):
        return math.inf if self.value is None else self.value

    def __eq__(self, other):
        if isinstance(other, Valuation):
            return self._key() == other._key()
        if isinstance(other, (int, Fraction)):
            return self._key() == other
        return NotImplemented

    def __lt__(self, other):
        other_key = other._key() if isinstance(other, Valuation) else other
        return self._key() < other_key

    def __le__(self, other):
        other_key = other._key() if isinstance(other, Valuation) else other
        return self._key() <= other_key

    def __gt__(self, other):
        return not self <= other

    def __ge__(self, other):
        return not self < other

    def __hash__(self):
        return hash(self._key())

    def __add__(self, other):
        other_value = other.value if isinstance(other, Valuation) else Fraction(other)
        if self.value is None or other_value is None:
            return Valuation.infinite(
                self.zero_to_precision
                or (isinstance(other, Valuation) and other.zero_to_precision)
            )
        return Valuation(self.value + other_value)

    __radd__ = __add__

    def __neg__(self):
        if self.value is None:
            raise ZeroDivisionFieldError("cannot negate an infinite valuation")
        return Valuation(-self.value)

    def __repr__(self):
        if self.value is None:
            tag = " (zero to precision)" if self.zero_to_precision else ""
            return f"Valuation(+inf{tag})"
        return f"Valuation({self.value})"

    def __str__(self):
        if self.value is None:
            return "inf"
        return f"{self.value.numerator}/{self.value.denominator}"


@dataclass(frozen=True)
class PrecisionPolicy:
    """Initial horizon, cap, and whether pipelines may retry at doubled
    horizons after a precision failure."""

    initial: int = 32
    maximum: int = 1024
    auto_retry: bool = True

    def __post_init__(self):
        if not (0 < self.initial <= self.maximum):
            raise ValueError("require 0 < initial horizon <= max horizon")

    def horizons(self):
        m = self.initial
        while True:
            yield m
            if m >= self.maximum or not self.auto_retry:
                return
            m = min(2 * m, self.maximum)


def _convolve(params, a, b):
    """Convolution of two coefficient arrays of shape (La, r), (Lb, r),
    multiplying coefficients in F_{p^r}."""
    p, r = params.p, params.r
    if r == 1:
        out = np.convolve(a[:, 0], b[:, 0]) % p
        return out.reshape(-1, 1)
    la, lb = a.shape[0], b.shape[0]
    raw = np.zeros((la + lb - 1, 2 * r - 1), dtype=np.int64)
    for s1 in range(r):
        col = a[:, s1]
        if not col.any():
            continue
        for s2 in range(r):
            if not b[:, s2].any():
                continue
            raw[:, s1 + s2] += np.convolve(col, b[:, s2])
    raw %= p
    out = raw[:, :r].copy()
    rows = params._reduction_rows
    for t in range(r - 1):
        c = raw[:, r + t]
        if c.any():
            out += c[:, None] * rows[t][None, :]
    return out % p


class LaurentSeries:
    """Immutable truncated Laurent series over F_q((U)), U^e = T."""

    __slots__ = ("field", "ram", "lead", "coeffs", "prec", "exact")

    def __init__(self, field, ram, lead, coeffs, prec, exact=False):
        if ram < 1:
            raise ValueError("ramification index must be >= 1")
        coeffs = np.asarray(coeffs, dtype=np.int64).reshape(-1, field.r) % field.p
        lead = int(lead)
        prec = int(prec)
        # drop rows at or beyond the horizon (unless the series is exact,
        # where the stored support is genuine knowledge)
        if not exact and lead + coeffs.shape[0] > prec:
            coeffs = coeffs[: max(prec - lead, 0)]
        # normalise: leading coefficient nonzero
        nz = np.flatnonzero(coeffs.any(axis=1))
        if nz.size == 0:
            coeffs = coeffs[:0]
            lead = prec
        else:
            first, last = int(nz[0]), int(nz[-1])
            lead += first
            coeffs = coeffs[first : last + 1]
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "ram", int(ram))
        object.__setattr__(self, "lead", lead)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "prec", prec)
        object.__setattr__(self, "exact", bool(exact))
        self.coeffs.setflags(write=False)

    def __setattr__(self, *_):
        raise AttributeError("LaurentSeries is immutable")

    # -- constructors ---------------------------------------------------------

    @classmethod
    def zero(cls, field, ram=1, prec=0, exact=False):
        return cls(field, ram, prec, np.zeros((0, field.r)), prec, exact)

    @classmethod
    def monomial(cls, field, exponent, coeff=1, ram=1, prec=None, exact=True):
        """coeff * U^exponent, exact by default."""
        coeff = field.element(coeff)
        if prec is None:
            prec = exponent + 1
        return cls(field, ram, exponent, [coeff.coeffs], prec, exact)

    @classmethod
    def constant(cls, field, coeff, ram=1, prec=None, exact=True):
        return cls.monomial(field, 0, coeff, ram, prec, exact)

    # -- bookkeeping ----------------------------------------------------------

    @property
    def is_zero_as_known(self):
        return self.coeffs.shape[0] == 0

    @property
    def is_exact_zero(self):
        return self.is_zero_as_known and self.exact

    def _effective_prec(self):
        return math.inf if self.exact else self.prec

    def _check(self, other):
        if not isinstance(other, LaurentSeries):
            raise TypeError(f"expected LaurentSeries, got {type(other).__name__}")
        if other.field != self.field:
            raise IncompatibleFieldError("series over different coefficient fields")
        if other.ram != self.ram:
            raise IncompatibleFieldError("series in different ramified towers")

    def valuation(self):
        if self.is_zero_as_known:
            return Valuation.infinite(zero_to_precision=not self.exact)
        return Valuation(Fraction(self.lead, self.ram))

    def coefficient(self, exponent):
        """Coefficient of U^exponent as an FqElement."""
        if exponent >= self._effective_prec():
            raise PrecisionError(
                f"coefficient of U^{exponent} is beyond the horizon O(U^{self.prec})"
            )
        j = exponent - self.lead
        if j < 0 or j >= self.coeffs.shape[0]:
            return self.field.zero()
        return FqElement(self.field, list(self.coeffs[j]))

    def with_prec(self, new_prec):
        """Re-declare the horizon.  Raising it requires exactness."""
        new_prec = int(new_prec)
        if new_prec > self.prec and not self.exact:
            raise PrecisionError(
                f"cannot raise horizon {self.prec} -> {new_prec} of inexact series"
            )
        exact = self.exact and new_prec >= self.lead + self.coeffs.shape[0]
        return LaurentSeries(self.field, self.ram, self.lead, self.coeffs, new_prec, exact)

    def truncate_relative(self, digits):
        """Declare exactly `digits` known coefficients past the lead.

        An exact series justifies any horizon, so this also *raises* the
        declared precision; that is what lets reciprocals of exact
        divisors be expanded to the full working width.
        """
        if self.is_zero_as_known:
            return self
        if self.exact:
            return self.with_prec(self.lead + digits)
        new_prec = min(self.prec, self.lead + digits)
        if new_prec >= self.prec:
            return self
        return LaurentSeries(
            self.field, self.ram, self.lead, self.coeffs, new_prec, exact=False
        )

    # -- field operations -----------------------------------------------------

    def __add__(self, other):
        self._check(other)
        prec = min(self._effective_prec(), other._effective_prec())
        if math.isinf(prec):
            prec, exact = max(self.prec, other.prec), True
        else:
            exact = False
        la, lb = self.lead, other.lead
        if self.is_zero_as_known and other.is_zero_as_known:
            return LaurentSeries.zero(self.field, self.ram, prec, exact)
        lead = min(
            la if not self.is_zero_as_known else lb,
            lb if not other.is_zero_as_known else la,
        )
        top = max(la + self.coeffs.shape[0], lb + other.coeffs.shape[0])
        out = np.zeros((top - lead, self.field.r), dtype=np.int64)
        if self.coeffs.shape[0]:
            out[la - lead : la - lead + self.coeffs.shape[0]] += self.coeffs
        if other.coeffs.shape[0]:
            out[lb - lead : lb - lead + other.coeffs.shape[0]] += other.coeffs
        return LaurentSeries(self.field, self.ram, lead, out % self.field.p, prec, exact)

    def __neg__(self):
        return LaurentSeries(
            self.field,
            self.ram,
            self.lead,
            (-self.coeffs) % self.field.p,
            self.prec,
            self.exact,
        )

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, FqElement):
            return self.scale(other)
        if isinstance(other, int):
            return self.scale(self.field.element(other))
        self._check(other)
        if self.is_zero_as_known or other.is_zero_as_known:
            prec = min(
                self._effective_prec() + other.lead, other._effective_prec() + self.lead
            )
            if math.isinf(prec):
                return LaurentSeries.zero(self.field, self.ram, 0, exact=True)
            return LaurentSeries.zero(self.field, self.ram, int(prec))
        prec = min(
            self._effective_prec() + other.lead, other._effective_prec() + self.lead
        )
        if math.isinf(prec):
            prec, exact = max(self.prec + other.lead, other.prec + self.lead), True
        else:
            prec, exact = int(prec), False
        conv = _convolve(self.field, self.coeffs, other.coeffs)
        return LaurentSeries(
            self.field, self.ram, self.lead + other.lead, conv, prec, exact
        )

    __rmul__ = __mul__

    def scale(self, coeff):
        """Multiply by a field scalar."""
        coeff = self.field.element(coeff)
        if coeff.is_zero:
            return LaurentSeries.zero(self.field, self.ram, self.prec, self.exact)
        if self.field.r == 1:
            out = (self.coeffs * coeff.coeffs[0]) % self.field.p
        else:
            out = (self.coeffs @ coeff.mul_matrix().T) % self.field.p
        return LaurentSeries(self.field, self.ram, self.lead, out, self.prec, self.exact)

    def shift(self, exponent):
        """Multiply by U^exponent."""
        return LaurentSeries(
            self.field,
            self.ram,
            self.lead + exponent,
            self.coeffs,
            self.prec + exponent,
            self.exact,
        )

    def inverse(self):
        """Multiplicative inverse modulo the justified horizon."""
        if self.is_zero_as_known:
            if self.exact:
                raise ZeroDivisionFieldError("inversion of the exact zero series")
            raise PrecisionError(
                f"inversion of a series that is zero to precision O(U^{self.prec})"
            )
        digits = self._effective_prec() - self.lead
        if math.isinf(digits):
            digits = max(self.prec - self.lead, self.coeffs.shape[0], 1)
        digits = int(digits)
        unit = self.coeffs[:digits]
        inv_unit = _invert_unit(self.field, unit, digits)
        return LaurentSeries(
            self.field, self.ram, -self.lead, inv_unit, digits - self.lead, False
        )

    def __truediv__(self, other):
        self._check(other)
        return self * other.inverse()

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        result = LaurentSeries.constant(self.field, 1, self.ram, prec=self.prec)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- residue and ramification ----------------------------------------------

    def residue(self):
        """Image of the constant term in the residue field F_q."""
        if self.is_zero_as_known:
            if not self.exact and self.prec <= 0:
                raise PrecisionError("constant term is beyond the justified horizon")
            return self.field.zero()
        if self.lead < 0:
            raise NotIntegralError(
                f"negative valuation {Fraction(self.lead, self.ram)}: not integral"
            )
        if self.lead > 0:
            return self.field.zero()
        return FqElement(self.field, list(self.coeffs[0]))

    def ramify(self, e):
        """Reinterpret in the tower with U^e = T (only from ram = 1)."""
        if e < 1:
            raise ValueError("ramification index must be >= 1")
        if self.ram != 1:
            raise IncompatibleFieldError("ramify expects a base-field series (ram 1)")
        if e == 1:
            return self
        if self.is_zero_as_known:
            return LaurentSeries.zero(self.field, e, self.prec * e, self.exact)
        out = np.zeros(((self.coeffs.shape[0] - 1) * e + 1, self.field.r), dtype=np.int64)
        out[::e] = self.coeffs
        return LaurentSeries(self.field, e, self.lead * e, out, self.prec * e, self.exact)

    def extend_residue_field(self, target):
        """Re-coefficient over a residue extension.  Only the canonical
        embedding of a prime field (r = 1) and the identity are supported."""
        if target == self.field:
            return self
        if self.field.r != 1 or target.p != self.field.p:
            raise IncompatibleFieldError(
                "only prime-field coefficients embed into a residue extension"
            )
        out = np.zeros((self.coeffs.shape[0], target.r), dtype=np.int64)
        out[:, 0] = self.coeffs[:, 0]
        return LaurentSeries(target, self.ram, self.lead, out, self.prec, self.exact)

    # -- comparison and rendering -----------------------------------------------

    def agrees_with(self, other):
        """True when the two series coincide on their common horizon."""
        self._check(other)
        horizon = min(self._effective_prec(), other._effective_prec())
        if math.isinf(horizon):
            return self.lead == other.lead and np.array_equal(self.coeffs, other.coeffs)
        horizon = int(horizon)
        a = self._window(horizon)
        b = other._window(horizon)
        return a == b

    def _window(self, horizon):
        rows = {}
        for j in range(self.coeffs.shape[0]):
            if self.lead + j >= horizon:
                break
            if self.coeffs[j].any():
                rows[self.lead + j] = tuple(int(c) for c in self.coeffs[j])
        return rows

    def __eq__(self, other):
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        return (
            self.field == other.field
            and self.ram == other.ram
            and self.lead == other.lead
            and np.array_equal(self.coeffs, other.coeffs)
        )

    def __repr__(self):
        return f"LaurentSeries({self})"

    def __str__(self):
        return self.render()

    def render(self, horizon=True):
        var = "T" if self.ram == 1 else "U"
        terms = []
        for j in range(self.coeffs.shape[0]):
            row = self.coeffs[j]
            if not row.any():
                continue
            c = FqElement(self.field, list(row))
            terms.append(_render_term(c, self.lead + j, var))
        body = " + ".join(terms) if terms else ""
        if horizon:
            tail = f"O({var}^{self.prec})"
            body = f"{body} + {tail}" if body else tail
        return body if body else "0"


def _render_term(coeff, exponent, var):
    cs = str(coeff)
    needs_parens = "+" in cs or "-" in cs
    if needs_parens:
        cs = f"({cs})"
    if exponent == 0:
        return cs
    vs = var if exponent == 1 else f"{var}^{exponent}"
    if cs == "1":
        return vs
    return f"{cs}*{vs}"


def _invert_unit(params, unit, digits):
    """Inverse of a unit-part coefficient array to the given number of
    digits, by Newton doubling: the error 1 - u*v squares each step."""
    p = params.p
    c0 = FqElement(params, list(unit[0]))
    v = np.array([c0.inverse().coeffs], dtype=np.int64)
    k = 1
    while k < digits:
        k = min(2 * k, digits)
        uv = _convolve(params, unit[:k], v)[:k]
        correction = _convolve(params, v, uv)[:k]
        width = max(v.shape[0], correction.shape[0], k)
        out = np.zeros((width, params.r), dtype=np.int64)
        out[: v.shape[0]] += 2 * v
        out[: correction.shape[0]] -= correction
        v = out[:k] % p
    return v[:digits]


# -- parsing ---------------------------------------------------------------------

_TERM_RE = re.compile(
    r"""^\s*
    (?:
        (?P<coeff>\([^()]*\)|[0-9]+|b(?:\^\d+)?(?:\s*\*\s*)?|[0-9]+\s*\*\s*b(?:\^\d+)?)
        \s*\*?\s*
    )?
    (?:(?P<var>[TU])(?:\^(?P<exp>-?\d+))?)?
    \s*$""",
    re.VERBOSE,
)


def parse_series(text, field, ram=1, prec=16):
    """Parse a series literal such as ``1+T``, ``T^-1+1``, ``(b+1)*T^2``.

    Exponents are in T-units (scaled by the ramification index
    internally); ``U`` is accepted for ram > 1 with exponents in U-units.
    The result is exact with the given horizon.
    """
    coeffs = {}
    declared_prec = None
    for sign, term, pos in _split_terms(text):
        term = term.strip()
        if not term:
            raise ParseError("empty term", pos)
        om = re.match(r"^O\(\s*([TU])\^?(-?\d+)?\s*\)$", term)
        if om:
            exp = int(om.group(2)) if om.group(2) else 1
            if om.group(1) == "T":
                exp *= ram
            declared_prec = exp
            continue
        coeff, exponent = _parse_series_term(term, field, ram, pos)
        if sign < 0:
            coeff = -coeff
        if exponent in coeffs:
            coeffs[exponent] = coeffs[exponent] + coeff
        else:
            coeffs[exponent] = coeff
    # an explicit O(...) term declares an unknown tail; otherwise the
    # literal is a finite table known in full
    exact = declared_prec is None
    prec_u = declared_prec if declared_prec is not None else prec * ram
    coeffs = {e: c for e, c in coeffs.items() if not c.is_zero}
    if not coeffs:
        return LaurentSeries.zero(field, ram, prec_u, exact=exact)
    lead = min(coeffs)
    top = max(coeffs)
    arr = np.zeros((top - lead + 1, field.r), dtype=np.int64)
    for e, c in coeffs.items():
        arr[e - lead] = c.coeffs
    return LaurentSeries(field, ram, lead, arr, prec_u, exact=exact)


def _split_terms(text):
    """Yield (sign, term, position) for top-level +/- separated terms."""
    depth = 0
    sign = 1
    start = 0
    i = 0
    if not text.strip():
        raise ParseError("empty series literal")
    while i <= len(text):
        ch = text[i] if i < len(text) else "+"
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise ParseError("unbalanced parenthesis", i)
        elif ch in "+-" and depth == 0:
            # a sign directly after '^' or at the very start of a term is
            # part of an exponent / leading sign, not a separator
            prev = text[start:i].strip()
            if prev == "":
                if ch == "-":
                    sign = -sign
                start = i + 1
                i += 1
                continue
            if prev.endswith("^"):
                i += 1
                continue
            yield sign, text[start:i], start
            sign = -1 if ch == "-" else 1
            start = i + 1
        i += 1
    if depth != 0:
        raise ParseError("unbalanced parenthesis", len(text))


def _parse_series_term(term, field, ram, pos):
    m = _TERM_RE.match(term)
    if not m or (m.group("coeff") is None and m.group("var") is None):
        raise ParseError(f"cannot parse term {term!r}", pos)
    coeff_text = m.group("coeff")
    if coeff_text is None:
        coeff = field.one()
    else:
        coeff_text = coeff_text.strip().rstrip("*").strip()
        if coeff_text.startswith("("):
            coeff_text = coeff_text[1:-1]
        coeff = field.parse_element(coeff_text)
    var = m.group("var")
    if var is None:
        exponent = 0
    else:
        exp = int(m.group("exp")) if m.group("exp") is not None else 1
        if var == "U":
            if ram == 1:
                raise ParseError("U is only valid in a ramified tower (ram > 1)", pos)
            exponent = exp
        else:
            exponent = exp * ram
    return coeff, exponent
