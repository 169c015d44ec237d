"""Exact arithmetic in small finite fields F_{p^r}.

Elements are represented in the polynomial basis: an element is a vector
of r integers in [0, p), the coordinates with respect to 1, b, ..., b^{r-1}
where b is a root of the defining modulus.  The modulus is a monic
irreducible polynomial of degree r over F_p, either taken from the built-in
table below or supplied explicitly (it is then re-checked for
irreducibility by trial division).

These fields serve as residue fields of the Laurent series fields handled
by :mod:`lindisc.laurent`; elements are immutable value types and safe to
share.
"""

from functools import lru_cache

import numpy as np

from .errors import (
    FieldConstructionError,
    IncompatibleFieldError,
    ParseError,
    ZeroDivisionFieldError,
)

# Fixed monic irreducible moduli (coefficient lists, constant term first)
# for the small fields the periodic-point search actually visits.  Keeping
# a fixed table makes runs reproducible; any other monic irreducible
# modulus is accepted as well.
BUILTIN_MODULI = {
    (2, 1): [0, 1],
    (2, 2): [1, 1, 1],
    (2, 3): [1, 1, 0, 1],
    (2, 4): [1, 1, 0, 0, 1],
    (3, 1): [0, 1],
    (3, 2): [2, 2, 1],
    (3, 3): [1, 2, 0, 1],
    (3, 4): [2, 0, 0, 2, 1],
    (5, 1): [0, 1],
    (5, 2): [2, 4, 1],
    (5, 3): [3, 3, 0, 1],
    (5, 4): [2, 4, 4, 0, 1],
    (7, 1): [0, 1],
    (7, 2): [3, 6, 1],
    (7, 3): [4, 0, 6, 1],
    (7, 4): [3, 4, 5, 0, 1],
}


def _is_prime(n):
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def _poly_mod(num, den, p):
    """Remainder of num modulo den over F_p (coefficient lists, monic den)."""
    num = list(num)
    dd = len(den) - 1
    for i in range(len(num) - 1, dd - 1, -1):
        c = num[i] % p
        if c:
            for j, dc in enumerate(den):
                num[i - dd + j] = (num[i - dd + j] - c * dc) % p
    return [c % p for c in num[:dd]]


def _monic_polys(degree, p):
    """All monic polynomials of the given degree over F_p."""
    if degree == 0:
        yield [1]
        return
    for idx in range(p**degree):
        coeffs = []
        t = idx
        for _ in range(degree):
            coeffs.append(t % p)
            t //= p
        coeffs.append(1)
        yield coeffs


def _is_irreducible(modulus, p):
    """Trial division by all monic polynomials of degree <= r/2."""
    r = len(modulus) - 1
    if r < 1 or modulus[-1] != 1:
        return False
    if r == 1:
        return True
    for d in range(1, r // 2 + 1):
        for cand in _monic_polys(d, p):
            if not any(_poly_mod(modulus, cand, p)):
                return False
    return True


class FieldParams:
    """Parameters of a finite field F_{p^r} in polynomial basis.

    Shared immutably by all its elements; comparing two elements first
    checks that they carry the same params.
    """

    __slots__ = ("p", "r", "modulus", "_reduction_rows")

    def __init__(self, p, r=1, modulus=None):
        if not _is_prime(p):
            raise FieldConstructionError(f"p = {p} is not prime")
        if r < 1:
            raise FieldConstructionError(f"extension degree r = {r} must be >= 1")
        if modulus is None:
            try:
                modulus = BUILTIN_MODULI[(p, r)]
            except KeyError:
                raise FieldConstructionError(
                    f"no built-in modulus for (p, r) = ({p}, {r}); supply one"
                ) from None
        modulus = [int(c) % p for c in modulus]
        if len(modulus) != r + 1:
            raise FieldConstructionError(
                f"modulus must have degree {r} (got {len(modulus) - 1})"
            )
        if modulus[-1] != 1:
            raise FieldConstructionError("modulus must be monic")
        if not _is_irreducible(modulus, p):
            raise FieldConstructionError(f"modulus {modulus} is reducible over F_{p}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "modulus", tuple(modulus))
        # rows[t] = coordinates of b^(r+t) for t = 0 .. r-2, used to fold
        # products back into the polynomial basis
        rows = []
        power = [0] * r + [1]
        for _ in range(max(r - 1, 0)):
            row = _poly_mod(power, modulus, p)
            rows.append(row)
            power = [0] + power
        object.__setattr__(
            self, "_reduction_rows", np.array(rows, dtype=np.int64).reshape(-1, r)
        )

    def __setattr__(self, *_):
        raise AttributeError("FieldParams is immutable")

    @property
    def q(self):
        return self.p**self.r

    def __eq__(self, other):
        return (
            isinstance(other, FieldParams)
            and self.p == other.p
            and self.r == other.r
            and self.modulus == other.modulus
        )

    def __hash__(self):
        return hash((self.p, self.r, self.modulus))

    def __repr__(self):
        if self.r == 1:
            return f"F_{self.p}"
        return f"F_{self.p}^{self.r}"

    # -- element constructors ------------------------------------------------

    def element(self, coeffs):
        """Element from an integer (r = 1 embeds F_p) or coordinate list."""
        if isinstance(coeffs, FqElement):
            if coeffs.params != self:
                raise IncompatibleFieldError("element belongs to a different field")
            return coeffs
        if isinstance(coeffs, int):
            vec = [coeffs % self.p] + [0] * (self.r - 1)
            return FqElement(self, vec)
        return FqElement(self, list(coeffs))

    def zero(self):
        return self.element(0)

    def one(self):
        return self.element(1)

    def gen(self):
        """The basis generator b (only meaningful for r > 1)."""
        vec = [0] * self.r
        if self.r == 1:
            vec[0] = 1
        else:
            vec[1] = 1
        return FqElement(self, vec)

    def elements(self):
        """All q elements, in lexicographic coordinate order."""
        for idx in range(self.q):
            vec = []
            t = idx
            for _ in range(self.r):
                vec.append(t % self.p)
                t //= self.p
            yield FqElement(self, vec)

    def parse_element(self, text):
        """Parse an element literal: an integer for r = 1, a polynomial in
        the generator ``b`` (e.g. ``b+1``, ``2*b^2+b``) for r > 1."""
        s = text.strip()
        if not s:
            raise ParseError("empty element literal")
        vec = [0] * self.r
        pos = 0
        sign = 1
        if s[0] in "+-":
            sign = -1 if s[0] == "-" else 1
            pos = 1
        while pos <= len(s):
            # find the end of this term
            end = pos
            while end < len(s) and s[end] not in "+-":
                end += 1
            term = s[pos:end].strip()
            if not term:
                raise ParseError("empty term in element literal", pos)
            coeff, power = _parse_element_term(term, pos)
            if power >= self.r:
                raise ParseError(
                    f"power b^{power} exceeds field degree r = {self.r}", pos
                )
            vec[power] = (vec[power] + sign * coeff) % self.p
            if end >= len(s):
                break
            sign = -1 if s[end] == "-" else 1
            pos = end + 1
        return FqElement(self, vec)


def _parse_element_term(term, pos):
    """Split one element term into (integer coefficient, power of b)."""
    term = term.replace(" ", "")
    if "b" not in term:
        try:
            return int(term), 0
        except ValueError:
            raise ParseError(f"bad coefficient {term!r}", pos) from None
    head, _, tail = term.partition("b")
    head = head.rstrip("*")
    coeff = 1 if head == "" else None
    if coeff is None:
        try:
            coeff = int(head)
        except ValueError:
            raise ParseError(f"bad coefficient {head!r}", pos) from None
    if tail == "":
        power = 1
    elif tail.startswith("^"):
        try:
            power = int(tail[1:])
        except ValueError:
            raise ParseError(f"bad exponent {tail[1:]!r}", pos) from None
    else:
        raise ParseError(f"unexpected trailing {tail!r}", pos)
    if power < 0:
        raise ParseError("negative powers of b are not field elements", pos)
    return coeff, power


class FqElement:
    """Immutable element of F_{p^r} in polynomial-basis coordinates."""

    __slots__ = ("params", "coeffs")

    def __init__(self, params, coeffs):
        p, r = params.p, params.r
        if len(coeffs) != r:
            raise FieldConstructionError(
                f"coordinate vector must have length {r} (got {len(coeffs)})"
            )
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "coeffs", tuple(int(c) % p for c in coeffs))

    def __setattr__(self, *_):
        raise AttributeError("FqElement is immutable")

    def _check(self, other):
        if not isinstance(other, FqElement):
            raise TypeError(f"expected FqElement, got {type(other).__name__}")
        if other.params != self.params:
            raise IncompatibleFieldError("elements of different fields")

    @property
    def is_zero(self):
        return not any(self.coeffs)

    def __bool__(self):
        return not self.is_zero

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.params.element(other)
        if not isinstance(other, FqElement):
            return NotImplemented
        return self.params == other.params and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.params, self.coeffs))

    def __add__(self, other):
        self._check(other)
        p = self.params.p
        return FqElement(
            self.params, [(a + b) % p for a, b in zip(self.coeffs, other.coeffs)]
        )

    def __neg__(self):
        p = self.params.p
        return FqElement(self.params, [(-a) % p for a in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            p = self.params.p
            c = other % p
            return FqElement(self.params, [(a * c) % p for a in self.coeffs])
        self._check(other)
        params = self.params
        p, r = params.p, params.r
        prod = [0] * (2 * r - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    prod[i + j] = (prod[i + j] + a * b) % p
        vec = prod[:r]
        for t in range(r - 1):
            c = prod[r + t]
            if c:
                row = params._reduction_rows[t]
                vec = [(v + c * int(w)) % p for v, w in zip(vec, row)]
        return FqElement(params, vec)

    __rmul__ = __mul__

    def inverse(self):
        """Multiplicative inverse by extended Euclid on polynomials."""
        if self.is_zero:
            raise ZeroDivisionFieldError("inversion of zero field element")
        p = self.params.p
        # extended Euclid over F_p[X] between the modulus and this element
        r0, r1 = list(self.params.modulus), list(self.coeffs)
        s0, s1 = [0], [1]
        while any(r1):
            q, rem = _poly_divmod(r0, r1, p)
            r0, r1 = r1, rem
            s0, s1 = s1, _poly_sub(s0, _poly_mul(q, s1, p), p)
        # r0 is now a nonzero constant gcd
        c = next(x for x in r0 if x)
        cinv = pow(c, p - 2, p)
        vec = [(cinv * x) % p for x in s0]
        vec = (vec + [0] * self.params.r)[: self.params.r]
        return FqElement(self.params, vec)

    def __truediv__(self, other):
        self._check(other)
        return self * other.inverse()

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        result = self.params.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def multiplicative_order(self):
        """Least n >= 1 with self^n = 1; divides q - 1."""
        if self.is_zero:
            raise ZeroDivisionFieldError("zero has no multiplicative order")
        n = self.params.q - 1
        for prime in _prime_factors(n):
            while n % prime == 0 and (self ** (n // prime)) == self.params.one():
                n //= prime
        return n

    def mul_matrix(self):
        """r x r integer matrix M with (vec @ M.T) % p = coordinates of
        self * element(vec); used for vectorised series arithmetic."""
        params = self.params
        r = params.r
        cols = []
        for j in range(r):
            basis = [0] * r
            basis[j] = 1
            cols.append((self * FqElement(params, basis)).coeffs)
        return np.array(cols, dtype=np.int64).T

    def __repr__(self):
        return f"FqElement({self.params!r}, {self})"

    def __str__(self):
        if self.params.r == 1:
            return str(self.coeffs[0])
        terms = []
        for power in range(self.params.r - 1, -1, -1):
            c = self.coeffs[power]
            if not c:
                continue
            if power == 0:
                terms.append(str(c))
            else:
                var = "b" if power == 1 else f"b^{power}"
                terms.append(var if c == 1 else f"{c}*{var}")
        return "+".join(terms) if terms else "0"


def _poly_divmod(num, den, p):
    num = list(num)
    dd = _poly_degree(den)
    lead_inv = pow(den[dd], p - 2, p)
    quot = [0] * max(len(num) - dd, 1)
    for i in range(len(num) - 1, dd - 1, -1):
        c = (num[i] * lead_inv) % p
        if c:
            quot[i - dd] = c
            for j in range(dd + 1):
                num[i - dd + j] = (num[i - dd + j] - c * den[j]) % p
    return quot, num[:dd] if dd > 0 else [0]


def _poly_degree(poly):
    for i in range(len(poly) - 1, -1, -1):
        if poly[i]:
            return i
    return 0


def _poly_mul(a, b, p):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return out


def _poly_sub(a, b, p):
    n = max(len(a), len(b))
    a = a + [0] * (n - len(a))
    b = b + [0] * (n - len(b))
    return [(x - y) % p for x, y in zip(a, b)]


@lru_cache(maxsize=None)
def _prime_factors(n):
    factors = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            factors.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        factors.append(n)
    return tuple(factors)
