"""Discs, Weierstrass degrees, linearization-disc classification, and
boundary periodic points.

The Weierstrass degree of h on a closed disc of radius r is the largest
k minimizing v(c_k) + k·v_r (the valuation of max|c_k| r^k); on the open
disc it is the smallest minimizer.  Tail certification beyond the
computed degrees uses a caller-supplied lower bound that is affine along
an arithmetic progression, so positivity of one period's increment
certifies the whole tail.

Periodic points on a sphere are found by scaling the sphere to the unit
circle in a ramified tower F_{p^r}((T^{1/e})), reducing to the residue
field, and Hensel-lifting simple residue roots by Newton iteration.
"""

from dataclasses import dataclass
from fractions import Fraction

from .errors import HypothesisError, PrecisionError
from .field import BUILTIN_MODULI, FieldParams
from .laurent import LaurentSeries, Valuation
from .multiplier import count_resonant, disc_profile, mult_profile
from .powerseries import PowerSeriesMap, ps_derivative_at, ps_eval, ps_gauge, _table_mul
from .schroder import (
    NONZERO,
    STRUCTURAL,
    check_coefficient_bound,
    check_structural_zeros,
    eval_table,
    solve_sfe,
)

LEVEL_GENERIC = "GENERIC-SIGMA"
LEVEL_EXTENDED = "EXTENDED-RHO"
LEVEL_EXACT = "EXACT-SIGMA"


@dataclass(frozen=True)
class Disc:
    v_radius: Valuation
    boundary: str  # "open" | "closed"
    rationality: str

    def report_dict(self):
        return {
            "v_radius": str(self.v_radius),
            "boundary": self.boundary,
            "rationality": self.rationality,
        }


def make_disc(v_radius, boundary):
    """Disc with rationality read off the denominator of its radius
    valuation: denominator e > 1 means the radius is attained only in
    the tower with uniformizer T^(1/e)."""
    if isinstance(v_radius, Valuation):
        value = v_radius.value
    else:
        value = Fraction(v_radius)
        v_radius = Valuation(value)
    if value is None:
        raise HypothesisError("a disc needs a finite radius valuation")
    den = value.denominator
    rationality = "rational-in-K" if den == 1 else f"rational-in-extension({den})"
    return Disc(v_radius, boundary, rationality)


@dataclass(frozen=True)
class WeierstrassData:
    v_s: Valuation
    d: int
    d_prime: int
    certified_tail: bool


def weierstrass_data(coeffs, v_r, tail_bound=None):
    """Exact minimization of v(c_k) + k·v_r over the computed degrees.

    ``tail_bound`` is an optional pair (fn, period): fn(k) is a lower
    bound on v(c_k) for k beyond the table, and fn(k) + k·v_r has a
    constant increment over each ``period`` once k exceeds the table.
    Without it the result is flagged best-effort (certified_tail False).
    """
    if isinstance(v_r, Valuation):
        v_r = v_r.value
    v_r = Fraction(v_r)
    D = max(coeffs)
    best = None
    minimizers = []
    for k in sorted(coeffs):
        c = coeffs[k]
        if c.is_zero_as_known:
            continue
        t = Fraction(c.lead, c.ram) + k * v_r
        if best is None or t < best:
            best, minimizers = t, [k]
        elif t == best:
            minimizers.append(k)
    if best is None:
        raise HypothesisError("all coefficients vanish; no Weierstrass data")
    for k, c in coeffs.items():
        # a coefficient that vanishes only to precision must provably sit
        # above the minimum, or the minimizers are not justified
        if c.is_zero_as_known and not c.exact:
            if Fraction(c.prec, c.ram) + k * v_r <= best:
                raise PrecisionError(
                    f"coefficient {k} is zero only to precision and could "
                    f"attain the Weierstrass minimum"
                )
    certified = False
    if tail_bound is not None:
        fn, period = tail_bound
        window = [fn(k) + k * v_r for k in range(D + 1, D + period + 1)]
        increment = (fn(D + period + 1) + (D + period + 1) * v_r) - window[0]
        certified = all(t > best for t in window) and increment > 0
    return WeierstrassData(Valuation(best), max(minimizers), min(minimizers), certified)


def _bound_tail(profile, gauge):
    """Lemma bound on v(b_k) as a tail-bound pair for weierstrass_data."""
    A = gauge.A

    def fn(k):
        return (k - 1) * A - profile.v_m.value * count_resonant(profile, k)

    return fn, profile.m * profile.p


def degree_on_sigma(g, dp, gauge):
    """Weierstrass degree of the conjugacy on the open and closed discs
    of radius σ: (1, k') exactly when v(b_{k'}) attains the Lemma bound,
    (1, 1) otherwise."""
    profile = g.profile
    if g.D < profile.k_prime:
        raise HypothesisError(
            f"conjugacy solved to degree {g.D} < k' = {profile.k_prime}"
        )
    wd = weierstrass_data(dict(g.coeffs), dp.v_sigma, _bound_tail(profile, gauge))
    if not wd.certified_tail:
        raise AssertionError("sigma-disc tail bound failed to certify")
    deg_open, deg_closed = wd.d_prime, wd.d
    # cross-check against the coefficient criterion at k'
    kp = profile.k_prime
    b_kp = g.coeffs[kp]
    saturated = (
        not b_kp.is_zero_as_known
        and Fraction(b_kp.lead, b_kp.ram)
        == (kp - 1) * gauge.A - profile.v_m.value
    )
    expected_closed = kp if saturated else 1
    if (deg_open, deg_closed) != (1, expected_closed):
        raise AssertionError(
            f"degree pattern ({deg_open}, {deg_closed}) contradicts the "
            f"coefficient criterion (expected (1, {expected_closed}))"
        )
    return deg_open, deg_closed


@dataclass(frozen=True)
class PeriodicPoint:
    point: LaurentSeries
    kappa: int
    multiplier: LaurentSeries
    tower: tuple  # (r, e)

    def report_dict(self):
        return {
            "point": self.point.render(),
            "kappa": self.kappa,
            "multiplier": self.multiplier.render(),
            "tower_r": self.tower[0],
            "tower_e": self.tower[1],
        }


@dataclass(frozen=True)
class LinearizationReport:
    level: str
    disc: Disc
    degree_open: int
    degree_closed: int
    periodic_point: object  # PeriodicPoint | None
    notes: tuple
    profile: object
    disc_profile: object

    def report_dict(self):
        out = {
            "certificate": self.level,
            "disc": self.disc.report_dict(),
            "degree_open_sigma": self.degree_open,
            "degree_closed_sigma": self.degree_closed,
        }
        out.update(self.profile.report_dict())
        out.update(self.disc_profile.report_dict())
        if self.periodic_point is not None:
            out["periodic_point"] = self.periodic_point.report_dict()
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def _embed_map(f, target_field, e):
    """Re-coefficient f into the tower F_{p^r}((T^(1/e))) (series ram e)."""
    if e % f.ram:
        raise HypothesisError("tower ramification must extend the map's")
    coeffs = {}
    for i, a in f.coeffs.items():
        s = a if a.ram == e else a.ramify(e // f.ram) if f.ram == 1 else None
        if s is None:
            raise HypothesisError("cannot re-ramify an already ramified map")
        coeffs[i] = s.extend_residue_field(target_field)
    return PowerSeriesMap(coeffs)


def _tower_fields(base, r_max):
    """Residue fields reachable from the map's: extensions of a prime
    field, or only the field itself when it is already an extension."""
    if base.r != 1:
        return [base]
    fields = []
    for r in range(1, r_max + 1):
        if r == 1:
            fields.append(base)
        elif (base.p, r) in BUILTIN_MODULI:
            fields.append(FieldParams(base.p, r))
    return fields


def find_periodic_point(f, kappa_max, sphere, tower=(4, 1), horizon=128):
    """Search the sphere for a periodic point of period κ <= kappa_max.

    ``tower`` caps the residue extension degree r and fixes the
    ramification e; the sphere radius must be integral in that tower.
    Returns a PeriodicPoint or None (not-found-in-tower: existence in
    the completed algebraic closure is not decided by this search).
    """
    r_max, e = tower
    v_radius = sphere.v_radius.value
    exponent = v_radius * e
    if exponent.denominator != 1:
        raise HypothesisError(
            f"sphere radius valuation {v_radius} is not integral in a tower "
            f"with e = {e}"
        )
    exponent = int(exponent)
    deg_cap = 4096
    for kappa in range(1, kappa_max + 1):
        if f.degree_bound**kappa > deg_cap:
            break
        for res_field in _tower_fields(f.field, r_max):
            fe = _embed_map(f, res_field, e)
            pi = LaurentSeries.monomial(res_field, exponent, 1, ram=e)
            found = _periodic_in_tower(fe, kappa, pi, horizon * e)
            if found is not None:
                u_hat = found
                x_hat = pi * u_hat
                mult = _orbit_multiplier(fe, x_hat, kappa)
                return PeriodicPoint(x_hat, kappa, mult, (res_field.r, e))
    return None


def _periodic_in_tower(f, kappa, pi, horizon):
    """Root u (a unit) of f^∘κ(π·u) − π·u = 0, or None."""
    field_ = f.field
    # G(u) = f^∘κ(π u) − π u as a polynomial in u with exact coefficients
    x_table = {1: pi}
    for _ in range(kappa):
        new = {}
        power = {0: LaurentSeries.constant(field_, 1, pi.ram)}
        deg = 0
        for i in sorted(f.coeffs):
            while deg < i:
                power = _table_mul(power, x_table, 10**9)
                deg += 1
            for d, s in power.items():
                term = f.coeffs[i] * s
                new[d] = new[d] + term if d in new else term
        x_table = {d: s for d, s in new.items() if not s.is_zero_as_known}
    g_table = dict(x_table)
    g_table[1] = g_table[1] - pi if 1 in g_table else -pi
    g_table = {d: s for d, s in g_table.items() if not s.is_zero_as_known}
    if not g_table:
        return None
    mu = min(s.lead for s in g_table.values())
    residue_poly = {}
    for d, s in g_table.items():
        shifted = s.shift(-mu)
        residue_poly[d] = shifted.residue()
    dpoly = {
        d - 1: c * (d % field_.p)
        for d, c in residue_poly.items()
        if d >= 1 and d % field_.p
    }
    for u_bar in field_.elements():
        if u_bar.is_zero:
            continue
        if _eval_fq_poly(residue_poly, u_bar).is_zero:
            if _eval_fq_poly(dpoly, u_bar).is_zero:
                continue  # multiple residue root: lifting not certified
            lifted = _hensel_lift(g_table, u_bar, pi.field, pi.ram, horizon)
            if lifted is not None:
                return lifted
    return None


def _eval_fq_poly(poly, x):
    acc = x.params.zero()
    prev = None
    for d in sorted(poly, reverse=True):
        if prev is not None:
            acc = acc * x ** (prev - d)
        acc = acc + poly[d]
        prev = d
    if prev is None:
        return acc
    return acc * x**prev


def _hensel_lift(g_table, u_bar, field_, ram, horizon):
    """Newton iteration from a simple residue root to the horizon."""
    p = field_.p
    dtable = {}
    for d, s in g_table.items():
        factor = d % p
        if d >= 1 and factor:
            dtable[d - 1] = s.scale(factor) if factor != 1 else s
    u = LaurentSeries.constant(field_, u_bar, ram, prec=horizon, exact=False)
    for _ in range(2 * horizon.bit_length() + 8):
        resid = eval_table(g_table, u)
        if resid.is_zero_as_known:
            return u
        deriv = eval_table(dtable, u)
        if deriv.is_zero_as_known or deriv.lead != 0:
            return None  # derivative not a unit: simple-root criterion failed
        step = resid * deriv.inverse()
        if step.lead <= 0:
            return None  # not converging inside the unit sphere
        u = u - step
    raise PrecisionError("periodic-point lifting did not converge")


def _orbit_multiplier(f, x_hat, kappa):
    """(f^∘κ)'(x̂) = Π f'(f^∘i(x̂)) along the orbit."""
    mult = None
    point = x_hat
    for _ in range(kappa):
        d = ps_derivative_at(f, point)
        mult = d if mult is None else mult * d
        point = ps_eval(f, point)
    return mult


def verify_indifferent(f, point, kappa):
    """Residual valuation of periodicity and the orbit multiplier."""
    orbit_end = point
    for _ in range(kappa):
        orbit_end = ps_eval(f, orbit_end)
    residual = (orbit_end - point).valuation()
    mult = _orbit_multiplier(f, point, kappa)
    return residual, mult


def classify_linearization_disc(
    f, D=None, window=32, kappa_max=None, r_max=4, horizon=128
):
    """Full certification pipeline for a p-divisible map.

    GENERIC-SIGMA: full conjugacy certified on the open disc of radius σ.
    EXTENDED-RHO:  b_{k'} proven zero, one-to-one radius extends to ρ.
    EXACT-SIGMA:   deg(g, closed σ-disc) = k'; D_σ is the linearization
                   disc and the boundary sphere is searched for an
                   indifferent periodic point of period κ <= k'.
    """
    if not f.divisible_degrees() or f.is_linear:
        raise HypothesisError(
            "classification requires every nonlinear degree divisible by p"
        )
    profile = mult_profile(f.multiplier)
    gauge = ps_gauge(f)
    dp = disc_profile(profile, gauge)
    kp = profile.k_prime
    step = profile.m * profile.p
    if D is None:
        D = max(4 * kp, kp + 4 * step, 2 * f.degree_bound, 16)
    g = solve_sfe(f, D, window)
    notes = []
    zeros = check_structural_zeros(g, f)
    if zeros.violations:
        raise AssertionError(f"structural zero violations at {zeros.violations}")
    bounds = check_coefficient_bound(g, gauge, f)
    if bounds.violations:
        raise AssertionError(f"coefficient bound violations at {bounds.violations}")
    deg_open, deg_closed = degree_on_sigma(g, dp, gauge)
    b_kp = g.coeffs[kp]
    periodic = None
    if deg_closed == kp and kp > 1:
        level = LEVEL_EXACT
        disc = make_disc(dp.v_sigma, "open")
        e = dp.v_sigma.value.denominator * f.ram
        sphere = make_disc(dp.v_sigma, "closed")
        periodic = find_periodic_point(
            f, kappa_max or kp, sphere, tower=(r_max, e), horizon=horizon
        )
        if periodic is None:
            notes.append(
                "periodic point exists in the completed algebraic closure "
                f"but was not found in towers up to r={r_max}, e={e}"
            )
        else:
            residual, mult = verify_indifferent(
                _embed_map(f, periodic.point.field, periodic.point.ram),
                periodic.point,
                periodic.kappa,
            )
            if not residual.is_infinite or mult.lead != 0:
                raise AssertionError("periodic point failed verification")
    elif b_kp.is_exact_zero and g.zero_kind[kp] == STRUCTURAL:
        level = LEVEL_EXTENDED
        disc = make_disc(dp.v_rho, "open")
        notes.append("b_{k'} = 0: full conjugacy extends to the semi-disc")
    else:
        level = LEVEL_GENERIC
        disc = make_disc(dp.v_sigma, "open")
        if g.zero_kind[kp] != NONZERO:
            notes.append(
                "b_{k'} vanishes only to the working precision; extension "
                "to the semi-disc is not certified"
            )
    return LinearizationReport(
        level, disc, deg_open, deg_closed, periodic, tuple(notes), profile, dp
    )


def delta_exponent(profile, k):
    """δ(k) = count_resonant(k)/(k−1); maximal exactly at k = k'."""
    if k < 2:
        raise HypothesisError("delta is defined for k >= 2")
    return Fraction(count_resonant(profile, k), k - 1)
