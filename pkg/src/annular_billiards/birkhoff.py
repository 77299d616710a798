"""Nonlinear stability of the tangent-table orbit: reduced map, order-3 Taylor
data, and the first Birkhoff (twist) coefficient.

The full period map factors as the square of the reflection-composed half
period ``M = reflection o exit o entry o disk``; its fixed point is the
detuned orbit's initial state.  The twist pipeline is

    reduced map --(jet arithmetic)--> TaylorJet3 --(c-terms)--> A,

with a high-precision central-difference oracle auditing every Taylor
coefficient, and the closed-form leading order of A available independently.

Rotation-number convention: the twist formula and reports use
mu = arctan(v/u) with lambda = u + i*v the upper eigenvalue of the linearized
half-period map.  For the near-parabolic tangent orbits u < 0, so mu is a
small *negative* angle tending to 0 with the detuning, while the principal
argument of lambda itself sits near pi; both are reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .billiard_map import (
    FLOAT_BACKEND,
    JET_BACKEND,
    BirkhoffCoords,
    MPBackend,
    half_period_formula,
)
from .errors import (
    ClassificationError,
    DomainError,
    NoCollisionError,
    NonEllipticNormalizationError,
    PrecisionError,
    ResonanceError,
)
from .geometry import tangency_radius_b
from .jets import MONOMIALS, Jet2

#: tolerance on |lambda^m - 1| below which a low-order resonance is declared
RESONANCE_TOL = 1e-8

#: relative disagreement between jet and finite-difference coefficients that
#: voids the extraction
CROSS_CHECK_TOL = 1e-5

_COEFF_KEYS = tuple((i, j) for (i, j) in MONOMIALS if 1 <= i + j <= 3)


@dataclass(frozen=True)
class TaylorJet3:
    """Taylor coefficients of a planar map about a fixed point, degree <= 3.

    a[(i, j)] multiplies ds^i dr^j in the first output, b[(i, j)] in the
    second; factorials are included in the coefficients.
    """

    a: dict[tuple[int, int], float]
    b: dict[tuple[int, int], float]

    def linear(self) -> np.ndarray:
        return np.array(
            [[self.a[(1, 0)], self.a[(0, 1)]], [self.b[(1, 0)], self.b[(0, 1)]]]
        )

    def trace(self) -> float:
        return self.a[(1, 0)] + self.b[(0, 1)]

    def det_defect(self) -> float:
        return abs(float(np.linalg.det(self.linear())) - 1.0)

    @staticmethod
    def from_jets(s_jet: Jet2, r_jet: Jet2) -> "TaylorJet3":
        return TaylorJet3(
            a={k: s_jet.coeff(*k) for k in _COEFF_KEYS},
            b={k: r_jet.coeff(*k) for k in _COEFF_KEYS},
        )

    def max_rel_disagreement(self, other: "TaylorJet3") -> float:
        worst = 0.0
        for k in _COEFF_KEYS:
            for mine, theirs in ((self.a[k], other.a[k]), (self.b[k], other.b[k])):
                worst = max(worst, abs(mine - theirs) / max(abs(mine), abs(theirs), 1.0))
        return worst


@dataclass(frozen=True)
class BirkhoffReport:
    """First twist coefficient and the quantities entering it."""

    A: float
    im_c21: float
    abs_c20_sq: float
    abs_c02_sq: float
    mu: float  # arctan-convention rotation number used in the twist formula
    mu_arg: float  # principal argument of the upper eigenvalue, in (0, pi)
    resonant3: bool
    resonant4: bool


class ReducedMap:
    """The reflection-composed half-period map of a tangent table in (s, r).

    Callable on ``BirkhoffCoords`` (or a plain pair); ``apply`` evaluates the
    same composition in any math backend (floats, truncated Taylor jets,
    mpmath), and ``fixed_point`` is the detuned orbit's initial state.
    """

    def __init__(self, n: int, epsilon: float):
        if n < 3:
            raise DomainError(f"need n >= 3, got {n}")
        if epsilon <= 0.0:
            raise DomainError(f"need epsilon > 0, got {epsilon}")
        self.n = n
        self.epsilon = epsilon
        self.R = tangency_radius_b(n, epsilon)
        self.theta0 = math.pi / n + epsilon
        self.s0 = -math.pi + math.pi / n + epsilon * (1.0 - n)
        self.r0 = math.cos(self.theta0)

    @property
    def fixed_point(self) -> BirkhoffCoords:
        return BirkhoffCoords(self.s0, self.r0)

    def apply(self, s, r, lib=FLOAT_BACKEND):
        return half_period_formula(s, r, self.n, self.R, lib)

    def __call__(self, point) -> BirkhoffCoords:
        s, r = point
        return BirkhoffCoords(*self.apply(s, r))

    def full_period(self, point) -> BirkhoffCoords:
        return self(self(point))


def taylor_jet(
    rmap: ReducedMap,
    fixed_point: BirkhoffCoords | None = None,
    cross_check: bool = False,
) -> TaylorJet3:
    """Order-3 Taylor data of the reduced map at its fixed point.

    Primary extraction pushes degree-3 truncated polynomials through the map
    composition (exact up to rounding).  With ``cross_check`` the
    high-precision central-difference oracle re-derives every coefficient and
    a disagreement beyond 1e-5 relative raises ``PrecisionError``.
    """
    fp = fixed_point if fixed_point is not None else rmap.fixed_point
    s_jet = Jet2.variable(fp.s, 0)
    r_jet = Jet2.variable(fp.r, 1)
    s_out, r_out = rmap.apply(s_jet, r_jet, JET_BACKEND)
    residual = max(abs(s_out.value - fp.s), abs(r_out.value - fp.r))
    if residual > 1e-9:
        raise DomainError(f"point is not fixed (residual {residual:.3g})")
    jet = TaylorJet3.from_jets(s_out, r_out)
    if cross_check:
        audit = fd_taylor_jet(rmap, fp)
        worst = jet.max_rel_disagreement(audit)
        if worst > CROSS_CHECK_TOL:
            raise PrecisionError(
                f"jet and finite-difference coefficients disagree by {worst:.3g}"
            )
    return jet


# five-point central stencils: first/second derivatives at O(h^4),
# third at O(h^2) (one Richardson level pushes it to O(h^4))
_STENCILS = {
    0: (0.0, 0.0, 1.0, 0.0, 0.0),
    1: (1.0, -8.0, 0.0, 8.0, -1.0),
    2: (-1.0, 16.0, -30.0, 16.0, -1.0),
    3: (-1.0, 2.0, 0.0, -2.0, 1.0),
}
_STENCIL_SCALE = {0: 1.0, 1: 12.0, 2: 12.0, 3: 2.0}


def _fd_partials(rmap: ReducedMap, fp, h, mp) -> dict:
    lib = MPBackend(mp)
    s0, r0 = mp.mpf(fp.s), mp.mpf(fp.r)
    grid = {}
    for i in range(-2, 3):
        for j in range(-2, 3):
            grid[(i, j)] = rmap.apply(s0 + i * h, r0 + j * h, lib)
    out = {}
    for (di, dj) in _COEFF_KEYS:
        acc = [mp.mpf(0), mp.mpf(0)]
        for p in range(5):
            wp = _STENCILS[di][p]
            if wp == 0.0:
                continue
            for q in range(5):
                wq = _STENCILS[dj][q]
                if wq == 0.0:
                    continue
                for comp in (0, 1):
                    acc[comp] += wp * wq * grid[(p - 2, q - 2)][comp]
        denom = (
            _STENCIL_SCALE[di]
            * _STENCIL_SCALE[dj]
            * h ** di
            * h ** dj
        )
        out[(di, dj)] = (acc[0] / denom, acc[1] / denom)
    return out


def fd_taylor_jet(
    rmap: ReducedMap,
    fixed_point: BirkhoffCoords | None = None,
    h: float = 1e-6,
    dps: int = 50,
) -> TaylorJet3:
    """Audit oracle: central differences with one Richardson level, evaluated
    in high-precision arithmetic on the bit-identical map.

    The base step follows the local curvature scale of the chart (the maps
    stay analytic at O(1) distances from the fixed point, so h = 1e-6 puts
    the truncation error near 1e-12 while the working precision removes the
    cancellation noise that double-precision differencing would suffer).
    """
    from mpmath import mp

    fp = fixed_point if fixed_point is not None else rmap.fixed_point
    old = mp.dps
    try:
        mp.dps = dps
        coarse = _fd_partials(rmap, fp, mp.mpf(h), mp)
        fine = _fd_partials(rmap, fp, mp.mpf(h) / 2, mp)
        a: dict = {}
        b: dict = {}
        for key in _COEFF_KEYS:
            order = 4 if max(key) < 3 else 2
            w = 2**order
            fact = math.factorial(key[0]) * math.factorial(key[1])
            a[key] = float((w * fine[key][0] - coarse[key][0]) / (w - 1)) / fact
            b[key] = float((w * fine[key][1] - coarse[key][1]) / (w - 1)) / fact
    finally:
        mp.dps = old
    return TaylorJet3(a=a, b=b)


# ---------------------------------------------------------------------------
# angle-parametrized Taylor data and the chain-rule conversion layer
# ---------------------------------------------------------------------------


def theta_taylor_jet(rmap: ReducedMap) -> tuple[Jet2, Jet2]:
    """Jets of the half-period map parametrized by (s, theta) instead of
    (s, r): returns (s_out, theta_out) as degree-3 jets in the displacements
    (ds0, dtheta0)."""
    from .billiard_map import half_period_theta_formula

    s_jet = Jet2.variable(rmap.s0, 0)
    th_jet = Jet2.variable(rmap.theta0, 1)
    return half_period_theta_formula(s_jet, th_jet, rmap.n, rmap.R, JET_BACKEND)


def theta_jet_to_birkhoff(s_jet: Jet2, th_jet: Jet2, theta0: float) -> TaylorJet3:
    """Convert angle-parametrized Taylor data to (s, r = cos theta) data.

    Implements the chain-rule identities for r0 = cos(theta0) on the input
    side and r = cos(theta) on the output side, through third order.  Used as
    a cross-check against the jets computed directly in (s, r).
    """
    st0, ct0 = math.sin(theta0), math.cos(theta0)
    th = th_jet.value
    stf, ctf = math.sin(th), math.cos(th)

    def d(jet: Jet2, i: int, j: int) -> float:
        return jet.partial(i, j)

    s_p: dict[tuple[int, int], float] = {}
    s_p[(1, 0)] = d(s_jet, 1, 0)
    s_p[(2, 0)] = d(s_jet, 2, 0)
    s_p[(3, 0)] = d(s_jet, 3, 0)
    s_p[(0, 1)] = -d(s_jet, 0, 1) / st0
    s_p[(1, 1)] = -d(s_jet, 1, 1) / st0
    s_p[(0, 2)] = (d(s_jet, 0, 2) - (ct0 / st0) * d(s_jet, 0, 1)) / st0**2
    s_p[(2, 1)] = -d(s_jet, 2, 1) / st0
    s_p[(0, 3)] = (
        -(1.0 / st0**3 + 3.0 * ct0**2 / st0**5) * d(s_jet, 0, 1)
        + (3.0 * ct0 / st0**4) * d(s_jet, 0, 2)
        - d(s_jet, 0, 3) / st0**3
    )
    s_p[(1, 2)] = (d(s_jet, 1, 2) - (ct0 / st0) * d(s_jet, 1, 1)) / st0**2

    t10 = d(th_jet, 1, 0)
    t01 = d(th_jet, 0, 1)
    t20 = d(th_jet, 2, 0)
    t11 = d(th_jet, 1, 1)
    t02 = d(th_jet, 0, 2)
    t30 = d(th_jet, 3, 0)
    t21 = d(th_jet, 2, 1)
    t12 = d(th_jet, 1, 2)
    t03 = d(th_jet, 0, 3)

    r_p: dict[tuple[int, int], float] = {}
    r_p[(1, 0)] = -stf * t10
    r_p[(0, 1)] = (stf / st0) * t01
    r_p[(2, 0)] = -ctf * t10**2 - stf * t20
    r_p[(0, 2)] = (
        -(ctf / st0**2) * t01**2
        + (ct0 * stf / st0**3) * t01
        - (stf / st0**2) * t02
    )
    r_p[(1, 1)] = (ctf / st0) * t10 * t01 + (stf / st0) * t11
    r_p[(3, 0)] = stf * t10**3 - 3.0 * ctf * t10 * t20 - stf * t30
    r_p[(2, 1)] = (stf / st0) * (t21 - t10**2 * t01) + (ctf / st0) * (
        t20 * t01 + 2.0 * t10 * t11
    )
    r_p[(1, 2)] = (
        (-stf / st0**2) * (t12 - t01**2 * t10)
        + (ct0 / st0**3) * (stf * t11 + ctf * t10 * t01)
        - (ctf / st0**2) * (2.0 * t11 * t01 + t10 * t02)
    )
    r_p[(0, 3)] = (
        (stf / st0**3) * (-(t01**3) + t03)
        - (3.0 * ct0 / st0**4) * (ctf * t01**2 + stf * t02)
        + (3.0 * ctf / st0**3) * t02 * t01
        + (stf / st0**4) * t01 * (st0 + 3.0 * ct0**2 / st0)
    )

    fact = lambda i, j: math.factorial(i) * math.factorial(j)
    return TaylorJet3(
        a={k: s_p[k] / fact(*k) for k in _COEFF_KEYS},
        b={k: r_p[k] / fact(*k) for k in _COEFF_KEYS},
    )


def birkhoff_jet_to_theta(jet: TaylorJet3, theta0: float, theta_out: float) -> tuple[Jet2, Jet2]:
    """Reverse conversion: rebuild the angle-parametrized jets from (s, r)
    Taylor data by substituting r0 = cos(theta0 + dtheta) and composing the
    output with arccos."""
    from .jets import jet_acos, jet_cos, polyval2

    ds = Jet2.variable(0.0, 0)
    dth = Jet2.variable(0.0, 1)
    dr = jet_cos(dth + theta0) - math.cos(theta0)
    s_coeffs = np.zeros(len(MONOMIALS))
    r_coeffs = np.zeros(len(MONOMIALS))
    for idx, mono in enumerate(MONOMIALS):
        if mono in jet.a:
            s_coeffs[idx] = jet.a[mono]
            r_coeffs[idx] = jet.b[mono]
    # displacement polynomials composed with the input substitution
    s_out = polyval2(Jet2(s_coeffs), ds, dr)
    r_out = polyval2(Jet2(r_coeffs), ds, dr)
    theta_jet = jet_acos(r_out + math.cos(theta_out))
    return s_out, theta_jet


# ---------------------------------------------------------------------------
# twist coefficient
# ---------------------------------------------------------------------------


def c_terms(jet: TaylorJet3) -> tuple[float, float, float]:
    """The real normal-form combinations (Im c21, |c20|^2, |c02|^2).

    Requires a01*b10 < 0 so the normalization square roots are real.
    """
    a, b = jet.a, jet.b
    a10, a01 = a[(1, 0)], a[(0, 1)]
    b10 = b[(1, 0)]
    if not a01 * b10 < 0.0:
        raise NonEllipticNormalizationError(
            f"need a01*b10 < 0, got a01={a01!r}, b10={b10!r}"
        )
    im_c21 = (
        a10
        * (
            -a[(1, 2)]
            + 3.0 * b10 * a[(0, 3)] / a01
            - 3.0 * a01 * b[(3, 0)] / b10
            + b[(1, 2)]
        )
        - b10
        * (
            a[(1, 2)]
            - 3.0 * a01 * a[(3, 0)] / b10
            - a01 * b[(2, 1)] / b10
            + 3.0 * b[(0, 3)]
        )
    ) / 8.0
    sq_ab = math.sqrt(-a01 / b10)
    sq_ba = math.sqrt(-b10 / a01)
    plus_a = (b10 / a01) * a[(0, 2)] + a[(2, 0)] + b[(1, 1)]
    plus_b = (a01 / b10) * b[(2, 0)] + b[(0, 2)] + a[(1, 1)]
    minus_a = (b10 / a01) * a[(0, 2)] + a[(2, 0)] - b[(1, 1)]
    minus_b = (a01 / b10) * b[(2, 0)] + b[(0, 2)] - a[(1, 1)]
    abs_c20_sq = (sq_ab * plus_a**2 + sq_ba * plus_b**2) / 16.0
    abs_c02_sq = (sq_ab * minus_a**2 + sq_ba * minus_b**2) / 16.0
    return im_c21, abs_c20_sq, abs_c02_sq


def _rotation_angles(trace: float) -> tuple[float, float]:
    """(arctan-convention mu, principal argument) for an elliptic trace."""
    u = trace / 2.0
    v = math.sqrt(max(1.0 - u * u, 0.0))
    mu_arg = math.atan2(v, u)
    mu = math.atan(v / u) if u != 0.0 else math.pi / 2.0
    return mu, mu_arg


def twist_from_c_terms(
    im_c21: float, abs_c20_sq: float, abs_c02_sq: float, mu: float
) -> float:
    """The twist combination

        Im c21 + sin(mu)/(cos(mu) - 1) * (3 |c20|^2
            + (2 cos(mu) - 1)/(2 cos(mu) + 1) * |c02|^2).
    """
    cm, sm = math.cos(mu), math.sin(mu)
    return im_c21 + sm / (cm - 1.0) * (
        3.0 * abs_c20_sq + (2.0 * cm - 1.0) / (2.0 * cm + 1.0) * abs_c02_sq
    )


def birkhoff_A(jet: TaylorJet3) -> BirkhoffReport:
    """First Birkhoff coefficient of an elliptic, nonresonant fixed point
    with the given Taylor data (see ``twist_from_c_terms``)."""
    tr = jet.trace()
    if abs(tr) >= 2.0 - 1e-12:
        raise ClassificationError(
            f"twist coefficient needs an elliptic linear part, trace = {tr!r}"
        )
    mu, mu_arg = _rotation_angles(tr)
    lam = complex(math.cos(mu_arg), math.sin(mu_arg))
    res3 = abs(lam**3 - 1.0) < RESONANCE_TOL
    res4 = abs(lam**4 - 1.0) < RESONANCE_TOL
    if res3 or res4:
        raise ResonanceError(
            f"eigenvalue argument {mu_arg!r} sits on a low-order resonance"
        )
    im_c21, c20_sq, c02_sq = c_terms(jet)
    A = twist_from_c_terms(im_c21, c20_sq, c02_sq, mu)
    return BirkhoffReport(
        A=A,
        im_c21=im_c21,
        abs_c20_sq=c20_sq,
        abs_c02_sq=c02_sq,
        mu=mu,
        mu_arg=mu_arg,
        resonant3=res3,
        resonant4=res4,
    )


def birkhoff_report(n: int, epsilon: float, cross_check: bool = False) -> BirkhoffReport:
    """Full numeric pipeline: reduced map -> Taylor jet -> twist coefficient."""
    rmap = ReducedMap(n, epsilon)
    return birkhoff_A(taylor_jet(rmap, cross_check=cross_check))


def twist_nonzero_threshold(epsilon: float) -> float:
    """Scale below which a computed |A| is treated as numerically zero."""
    return 1e-6 / (epsilon * epsilon)


def rotation_number(n: int, epsilon: float) -> float:
    """Rotation number (arctan convention) of the linearized reduced map.

    Tends to 0 like -sqrt(epsilon); ``rotation_number_leading`` gives the
    closed-form coefficient.
    """
    rmap = ReducedMap(n, epsilon)
    jet = taylor_jet(rmap)
    tr = jet.trace()
    if abs(tr) >= 2.0:
        raise ClassificationError(f"not elliptic: reduced trace {tr!r}")
    return _rotation_angles(tr)[0]


def rotation_number_leading(n: int, epsilon: float) -> float:
    """Leading order of ``rotation_number``:

        -sqrt(2 eps)/sin(pi/n) * sqrt(n (n sin(2 pi/n)
            - (1 + 2 cos(pi/n) + cos(2 pi/n))))
    """
    c = math.pi / n
    rad = n * (n * math.sin(2.0 * c) - (1.0 + 2.0 * math.cos(c) + math.cos(2.0 * c)))
    return -math.sqrt(2.0 * epsilon) / math.sin(c) * math.sqrt(rad)


# ---------------------------------------------------------------------------
# closed-form leading order of the twist coefficient
# ---------------------------------------------------------------------------


def twist_limit(n: int) -> float:
    """The detuning-free part of the twist coefficient, lim eps^2 * A(n, eps):

        5 csc^5(pi/2n) sec^3(pi/2n) sin^(5/2)(pi/n) (cos(pi/2n) - n sin(pi/2n))^2
        / (192 n^2 sqrt(n sin(2pi/n) - (1 + 2cos(pi/n) + cos(2pi/n))))
        * sqrt(sin(2pi/n) / (n sin(pi/n) - (1 + cos(pi/n))))
    """
    if n < 3:
        raise DomainError(f"undefined for n < 3, got {n}")
    h = math.pi / (2.0 * n)
    c = math.pi / n
    num = (
        5.0
        * math.sin(h) ** -5
        * math.cos(h) ** -3
        * math.sin(c) ** 2.5
        * (math.cos(h) - n * math.sin(h)) ** 2
    )
    den = 192.0 * n * n * math.sqrt(
        n * math.sin(2.0 * c) - (1.0 + 2.0 * math.cos(c) + math.cos(2.0 * c))
    )
    tail = math.sqrt(
        math.sin(2.0 * c) / (n * math.sin(c) - (1.0 + math.cos(c)))
    )
    return num / den * tail


def closed_form_A(n: int, epsilon: float) -> float:
    """Leading-order twist coefficient, twist_limit(n)/epsilon^2."""
    if epsilon == 0.0:
        raise DomainError("epsilon must be nonzero")
    return twist_limit(n) / (epsilon * epsilon)


def closed_form_A_large_n(n: int, epsilon: float) -> float:
    """Large-n expansion 5/(24 eps^2) * ((pi-2)/pi^2 + (pi-1)/(6 n^2))."""
    return (
        5.0
        / (24.0 * epsilon * epsilon)
        * ((math.pi - 2.0) / math.pi**2 + (math.pi - 1.0) / (6.0 * n * n))
    )


# ---------------------------------------------------------------------------
# island evidence sampler
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IslandReport:
    """Outcome of iterating the full period map near the fixed point."""

    max_excursion: float
    iterations_run: int
    escaped: bool
    escape_seed: int | None = None
    escape_iteration: int | None = None
    seeds: int = 0
    radius: float = 0.0


def island_sampler(
    n: int,
    epsilon: float,
    radius: float,
    iterations: int,
    seeds: int = 8,
    seed: int = 0,
    collect: bool = False,
) -> IslandReport | tuple[IslandReport, np.ndarray]:
    """Iterate the full period map from a ring of initial conditions.

    Starts ``seeds`` points on a circle of the given radius around the fixed
    point in (s, r), applies the squared reduced map ``iterations`` times and
    tracks the maximal distance from the fixed point.  Leaving the chart (a
    ray missing the scatterer) is recorded as an escape.  With ``collect``
    the visited (s, r) iterates are returned for plotting.
    """
    rmap = ReducedMap(n, epsilon)
    fp = np.array(rmap.fixed_point)
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2.0 * math.pi, size=seeds) if radius > 0.0 else [0.0]
    max_exc = 0.0
    esc_seed = esc_iter = None
    cloud = []
    for si, phase in enumerate(phases):
        z = fp + radius * np.array([math.cos(phase), math.sin(phase)])
        for it in range(iterations):
            try:
                z = np.array(rmap.full_period(z))
            except (NoCollisionError, ValueError):
                if esc_seed is None:
                    esc_seed, esc_iter = si, it
                break
            max_exc = max(max_exc, float(np.hypot(*(z - fp))))
            if collect:
                cloud.append(z.copy())
    report = IslandReport(
        max_excursion=max_exc,
        iterations_run=iterations,
        escaped=esc_seed is not None,
        escape_seed=esc_seed,
        escape_iteration=esc_iter,
        seeds=len(phases),
        radius=radius,
    )
    if collect:
        return report, np.array(cloud) if cloud else np.empty((0, 2))
    return report
