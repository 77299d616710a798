"""Twist-coefficient pipeline: jets, c-terms, closed forms, island evidence."""

import math

import numpy as np
import pytest

from annular_billiards.billiard_map import (
    PhasePoint,
    Wall,
    generic_step,
    wrap_pi,
)
from annular_billiards.birkhoff import (
    BirkhoffReport,
    ReducedMap,
    TaylorJet3,
    birkhoff_A,
    birkhoff_report,
    c_terms,
    closed_form_A,
    closed_form_A_large_n,
    fd_taylor_jet,
    island_sampler,
    rotation_number,
    rotation_number_leading,
    taylor_jet,
    theta_jet_to_birkhoff,
    theta_taylor_jet,
    birkhoff_jet_to_theta,
    twist_from_c_terms,
    twist_limit,
)
from annular_billiards.errors import (
    ClassificationError,
    DomainError,
    NonEllipticNormalizationError,
    PrecisionError,
    ResonanceError,
)
from annular_billiards.jets import Jet2
from annular_billiards.linear_stability import (
    bounce_jacobian_birkhoff,
    epsilon_star,
    monodromy,
)
from annular_billiards.orbits import build_type_b

#: frozen reference values of the closed-form twist limit
TWIST_LIMIT_N3 = 0.0338912
TWIST_LIMIT_INF = 5 * (math.pi - 2) / (24 * math.pi**2)  # ~0.0240974


def richardson(values):
    """Extrapolate a halving ladder assuming integer-power remainders."""
    level = list(values)
    order = 1
    while len(level) > 1:
        w = 2.0**order
        level = [(w * level[i + 1] - level[i]) / (w - 1.0) for i in range(len(level) - 1)]
        order += 1
    return level[0]


def scaled_ladder(n, base=1e-3, ref=3):
    """Detuning ladder shrunk with the stability window ~ n^-3."""
    b = base * (ref / n) ** 3
    return [b, b / 2, b / 4]


class TestReducedMap:
    def test_fixed_point(self):
        rmap = ReducedMap(3, 0.01)
        out = rmap(rmap.fixed_point)
        assert out.s == pytest.approx(rmap.s0, abs=1e-10)
        assert out.r == pytest.approx(rmap.r0, abs=1e-10)

    def test_square_equals_full_period(self):
        rmap = ReducedMap(4, 0.01)
        orbit = build_type_b(4, 0.01)
        rng = np.random.default_rng(11)
        for _ in range(20):
            ds, dr = rng.normal(scale=1e-3, size=2)
            s, r = rmap.s0 + ds, rmap.r0 + dr
            got = rmap.full_period((s, r))
            p = PhasePoint(Wall.OUTER, wrap_pi(s), math.acos(r))
            for _ in range(orbit.period):
                p = generic_step(p, orbit.pose).point
            assert wrap_pi(got.s - p.s) == pytest.approx(0.0, abs=1e-10)
            assert got.r == pytest.approx(math.cos(p.theta), abs=1e-10)

    def test_linear_trace_against_monodromy(self):
        # trace of the full-period product equals t^2 - 2 for the half map
        for (n, eps) in [(3, 0.01), (5, 0.002)]:
            rmap = ReducedMap(n, eps)
            t_half = taylor_jet(rmap).trace()
            orbit = build_type_b(n, eps)
            t_full = float(np.trace(monodromy(orbit)))
            assert t_half**2 - 2.0 == pytest.approx(t_full, abs=1e-9)

    def test_trace_approaches_minus_two(self):
        prev_gap = None
        for eps in (1e-2, 1e-3, 1e-4):
            tr = taylor_jet(ReducedMap(3, eps)).trace()
            assert -2.0 < tr < 0.0
            gap = tr + 2.0
            if prev_gap is not None:
                assert gap < prev_gap
            prev_gap = gap

    def test_domain_guards(self):
        with pytest.raises(DomainError):
            ReducedMap(2, 0.01)
        with pytest.raises(DomainError):
            ReducedMap(3, 0.0)


class TestTaylorJet:
    def test_linear_part_from_bounce_product(self):
        # the jet's linear block equals minus the product of the per-bounce
        # unit-determinant Jacobians along the half orbit (the mirror
        # symmetry contributes -identity)
        n, eps = 3, 0.01
        rmap = ReducedMap(n, eps)
        orbit = build_type_b(n, eps)
        L = np.eye(2)
        for i in range(n + 1):
            j = i + 1
            L = (
                bounce_jacobian_birkhoff(
                    orbit.flights[i],
                    orbit.curvatures[i],
                    orbit.curvatures[j],
                    orbit.points[i].theta,
                    orbit.points[j].theta,
                )
                @ L
            )
        jet = taylor_jet(rmap)
        np.testing.assert_allclose(jet.linear(), -L, atol=1e-9)

    def test_unit_determinant(self):
        for (n, eps) in [(3, 1e-3), (4, 1e-3), (10, 1e-4)]:
            jet = taylor_jet(ReducedMap(n, eps))
            assert jet.det_defect() < 1e-8

    @pytest.mark.parametrize("n,eps", [(3, 0.01), (4, 0.005), (5, 1e-3), (10, 1e-4)])
    def test_matches_high_precision_differences(self, n, eps):
        rmap = ReducedMap(n, eps)
        jet = taylor_jet(rmap)
        audit = fd_taylor_jet(rmap)
        assert jet.max_rel_disagreement(audit) < 1e-6

    def test_cross_check_passes_on_good_map(self):
        taylor_jet(ReducedMap(3, 0.01), cross_check=True)

    def test_cross_check_detects_corruption(self, monkeypatch):
        import annular_billiards.birkhoff as bk

        good = fd_taylor_jet(ReducedMap(3, 0.01))
        bad = TaylorJet3(
            a={k: v * (1.0 + 1e-3) for k, v in good.a.items()},
            b=dict(good.b),
        )
        monkeypatch.setattr(bk, "fd_taylor_jet", lambda *a, **kw: bad)
        with pytest.raises(PrecisionError):
            taylor_jet(ReducedMap(3, 0.01), cross_check=True)

    def test_rejects_non_fixed_point(self):
        from annular_billiards.billiard_map import BirkhoffCoords

        rmap = ReducedMap(3, 0.01)
        with pytest.raises(DomainError):
            taylor_jet(rmap, fixed_point=BirkhoffCoords(rmap.s0 + 0.01, rmap.r0))

    def test_mirror_map_jet(self):
        # the mirror symmetry alone: linear part -identity, no higher terms
        s = Jet2.variable(0.0, 0)
        r = Jet2.variable(0.0, 1)
        jet = TaylorJet3.from_jets(-s, -r)
        assert jet.a[(1, 0)] == -1.0
        assert jet.b[(0, 1)] == -1.0
        assert jet.a[(0, 1)] == 0.0
        assert jet.b[(1, 0)] == 0.0
        for key, val in {**{k: jet.a[k] for k in jet.a}, }.items():
            if sum(key) > 1:
                assert val == 0.0


class TestConversionLayer:
    @pytest.mark.parametrize("n,eps", [(3, 0.01), (5, 2e-3)])
    def test_angle_data_converts_to_birkhoff_data(self, n, eps):
        rmap = ReducedMap(n, eps)
        direct = taylor_jet(rmap)
        s_t, th_t = theta_taylor_jet(rmap)
        converted = theta_jet_to_birkhoff(s_t, th_t, rmap.theta0)
        assert direct.max_rel_disagreement(converted) < 1e-8

    def test_round_trip_back_to_angle_data(self):
        rmap = ReducedMap(3, 0.01)
        direct = taylor_jet(rmap)
        s_t, th_t = theta_taylor_jet(rmap)
        s_back, th_back = birkhoff_jet_to_theta(direct, rmap.theta0, th_t.value)
        for i in range(4):
            for j in range(4):
                if not 1 <= i + j <= 3:
                    continue
                assert s_back.partial(i, j) == pytest.approx(
                    s_t.partial(i, j), rel=1e-8, abs=1e-8
                )
                assert th_back.partial(i, j) == pytest.approx(
                    th_t.partial(i, j), rel=1e-8, abs=1e-8
                )


def make_jet(a_extra=None, b_extra=None, a10=0.0, a01=1.0, b10=-1.0, b01=0.0):
    keys = [(i, j) for i in range(4) for j in range(4) if 1 <= i + j <= 3]
    a = {k: 0.0 for k in keys}
    b = {k: 0.0 for k in keys}
    a[(1, 0)], a[(0, 1)], b[(1, 0)], b[(0, 1)] = a10, a01, b10, b01
    for k, v in (a_extra or {}).items():
        a[k] = v
    for k, v in (b_extra or {}).items():
        b[k] = v
    return TaylorJet3(a=a, b=b)


class TestCTerms:
    def test_pure_linear_gives_zero(self):
        assert c_terms(make_jet()) == (0.0, 0.0, 0.0)

    def test_single_quadratic_coefficient(self):
        a02 = 0.7
        a10, a01, b10 = 0.0, 1.0, -1.0
        jet = make_jet(a_extra={(0, 2): a02})
        im_c21, c20_sq, c02_sq = c_terms(jet)
        want = (1.0 / 16.0) * math.sqrt(-a01 / b10) * (b10 * a02 / a01) ** 2
        assert im_c21 == 0.0
        assert c20_sq == pytest.approx(want, abs=1e-15)
        assert c02_sq == pytest.approx(want, abs=1e-15)

    def test_sign_precondition(self):
        with pytest.raises(NonEllipticNormalizationError):
            c_terms(make_jet(a01=1.0, b10=1.0, a10=0.5, b01=0.5))


class TestTwistFormula:
    def test_c20_only_near_right_angle(self):
        mu = 1.47  # near pi/2 but safely off the 4-resonance
        want = 3.0 * math.sin(mu) / (math.cos(mu) - 1.0)
        assert twist_from_c_terms(0.0, 1.0, 0.0, mu) == pytest.approx(want, rel=1e-15)

    def test_report_fields(self):
        rep = birkhoff_report(3, 0.01)
        assert isinstance(rep, BirkhoffReport)
        assert rep.mu < 0.0 and 0.0 < rep.mu_arg < math.pi
        assert rep.mu_arg == pytest.approx(math.pi + rep.mu, abs=1e-12)
        assert not rep.resonant3 and not rep.resonant4
        assert rep.abs_c20_sq > 0.0 and rep.abs_c02_sq > 0.0

    def test_hyperbolic_rejected(self):
        eps = 2.0 * epsilon_star(4)
        rmap = ReducedMap(4, eps)
        jet = taylor_jet(rmap)
        assert abs(jet.trace()) > 2.0
        with pytest.raises(ClassificationError):
            birkhoff_A(jet)

    def test_resonance_guard(self):
        # tune the detuning so the reduced trace hits 2*cos(2*pi/3) = -1,
        # putting the eigenvalue exactly on the cube-root resonance
        lo, hi = 0.05, 0.1
        f = lambda e: taylor_jet(ReducedMap(3, e)).trace() + 1.0
        assert f(lo) < 0.0 < f(hi)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if f(mid) < 0.0:
                lo = mid
            else:
                hi = mid
        eps_res = 0.5 * (lo + hi)
        jet = taylor_jet(ReducedMap(3, eps_res))
        assert jet.trace() == pytest.approx(-1.0, abs=1e-12)
        with pytest.raises(ResonanceError):
            birkhoff_A(jet)


class TestTwistValues:
    def test_limit_value_n3(self):
        assert twist_limit(3) == pytest.approx(TWIST_LIMIT_N3, abs=1e-6)
        exact = -5 * (-2 + math.sqrt(3)) / (54 * (-1 + math.sqrt(3)))
        assert twist_limit(3) == pytest.approx(exact, rel=1e-12)

    def test_limit_approaches_asymptote(self):
        assert twist_limit(1000) == pytest.approx(TWIST_LIMIT_INF, abs=1e-3)
        assert closed_form_A_large_n(1000, 1e-3) * 1e-6 == pytest.approx(
            twist_limit(1000), rel=1e-4
        )

    def test_closed_form_scales_inverse_square(self):
        assert closed_form_A(7, 1e-3) == pytest.approx(twist_limit(7) * 1e6, rel=1e-12)
        with pytest.raises(DomainError):
            closed_form_A(2, 1e-3)

    @pytest.mark.parametrize("n", [3, 5, 10])
    def test_pipeline_extrapolates_to_closed_form(self, n):
        ladder = scaled_ladder(n)
        vals = [e * e * birkhoff_report(n, e).A for e in ladder]
        extrap = richardson(vals)
        assert extrap == pytest.approx(twist_limit(n), rel=2e-3)

    @pytest.mark.parametrize("n", [3, 4, 5, 10])
    def test_scaling_law_constancy(self, n):
        # eps^2 * A constant within 2% once the detuning sits deep inside
        # the stability window
        ladder = scaled_ladder(n, base=2.5e-5)
        vals = [e * e * birkhoff_report(n, e).A for e in ladder]
        spread = (max(vals) - min(vals)) / abs(np.mean(vals))
        assert spread < 0.02, (n, vals)

    def test_twist_positive_on_scan_grid(self):
        for n in range(3, 60):
            assert twist_limit(n) > 0.0
        for n, eps in [(3, 1e-3), (4, 1e-3), (5, 1e-3), (10, 1e-4)]:
            rep = birkhoff_report(n, eps)
            assert rep.A > 1e-6 / eps**2

    def test_conclusion_stable_under_detuning_perturbation(self):
        for n in (3, 5, 10):
            base = scaled_ladder(n)[0]
            signs = set()
            for fac in (0.9, 1.0, 1.1):
                signs.add(math.copysign(1.0, birkhoff_report(n, base * fac).A))
            assert signs == {1.0}

    def test_limit_curve_decreases_to_asymptote(self):
        ns = np.unique(np.geomspace(3, 1000, 60).astype(int))
        vals = [twist_limit(int(n)) for n in ns]
        assert all(a > b for a, b in zip(vals, vals[1:]))
        assert vals[-1] == pytest.approx(TWIST_LIMIT_INF, abs=1e-3)


class TestRotationNumber:
    def test_tends_to_zero(self):
        vals = [abs(rotation_number(3, e)) for e in (1e-2, 1e-3, 1e-4)]
        assert vals[0] > vals[1] > vals[2]
        assert vals[2] < 0.05

    @pytest.mark.parametrize("n", [3, 5, 10])
    def test_sqrt_scaling_matches_closed_form(self, n):
        base = min(1e-3, epsilon_star(n) / 500.0)
        ratios = []
        for eps in (base, base / 4):
            mu = rotation_number(n, eps)
            coeff = rotation_number_leading(n, eps) / math.sqrt(eps)
            ratios.append(mu / math.sqrt(eps) / coeff)
        assert ratios[0] == pytest.approx(1.0, abs=1e-2)
        assert ratios[1] == pytest.approx(1.0, abs=1e-2)
        assert abs(ratios[0] - ratios[1]) < 1e-2

    def test_hyperbolic_rejected(self):
        with pytest.raises(ClassificationError):
            rotation_number(4, 2.0 * epsilon_star(4))


class TestIslandSampler:
    def test_zero_radius_stays_put(self):
        rep = island_sampler(3, 0.02, 0.0, 100)
        assert rep.max_excursion < 1e-12
        assert not rep.escaped

    def test_bounded_cloud_in_elliptic_regime(self):
        rep = island_sampler(3, 0.02, 1e-4, 10_000, seed=1)
        assert not rep.escaped
        assert rep.max_excursion <= 10.0 * 1e-4

    def test_divergence_in_hyperbolic_regime(self):
        eps = 2.0 * epsilon_star(4)
        rep = island_sampler(4, eps, 1e-4, 1000, seed=1)
        assert rep.escaped or rep.max_excursion > 1e3 * 1e-4

    def test_collect_returns_cloud(self):
        rep, cloud = island_sampler(3, 0.02, 1e-4, 200, seeds=2, collect=True)
        assert cloud.shape[1] == 2
        assert len(cloud) > 0
