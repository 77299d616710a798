"""Closed-form table geometry against independent Cartesian reconstructions."""

import math

import numpy as np
import pytest

from annular_billiards.errors import DomainError, InvalidTableError
from annular_billiards.geometry import (
    TableConfig,
    TableParams,
    caustic_radius,
    chord_lines,
    clearance_from_other_chords,
    max_radius,
    max_radius_delta,
    max_radius_star,
    scatterer_pose,
    tangency_radius_b,
    tangency_radius_simple,
)


class TestTangencyRadiusSimple:
    def test_n3_exact(self):
        assert tangency_radius_simple(3) == pytest.approx(0.5, abs=1e-15)

    def test_n4_exact(self):
        assert tangency_radius_simple(4) == pytest.approx(1.0 - math.sqrt(2) / 2, abs=1e-15)

    def test_n10_internal_tangency(self):
        # oracle: the circle of radius v centered at distance 1 - v is
        # internally tangent to the unit circle
        v = tangency_radius_simple(10)
        center = np.array([1.0 - v, 0.0])
        assert np.hypot(*center) == pytest.approx(1.0 - v, abs=1e-14)
        assert np.hypot(*center) + v == pytest.approx(1.0, abs=1e-14)

    def test_domain_error(self):
        with pytest.raises(DomainError):
            tangency_radius_simple(2)

    def test_decreasing_in_n(self):
        vals = [tangency_radius_simple(n) for n in range(3, 60)]
        assert all(0.0 < v < 1.0 for v in vals)
        assert all(a > b for a, b in zip(vals, vals[1:]))


class TestMaxRadiusDelta:
    def test_delta_zero_reduces_to_tangency(self):
        assert max_radius_delta(4, 0.0) == pytest.approx(tangency_radius_simple(4), abs=1e-15)

    def test_displaced_value(self):
        # oracle: 1 minus the distance from the origin to the displaced center
        got = max_radius_delta(4, 0.1)
        center = np.array([-math.cos(math.pi / 4), 0.1])
        assert got == pytest.approx(1.0 - np.hypot(*center), abs=1e-14)
        assert got == pytest.approx(0.285857157145715, abs=1e-14)

    def test_limiting_degeneracy(self):
        eps = 1e-9
        assert max_radius_delta(3, math.sin(math.pi / 3) - eps) == pytest.approx(0.0, abs=1e-8)
        with pytest.raises(DomainError):
            max_radius_delta(3, math.sin(math.pi / 3))


class TestMaxRadiusStar:
    def test_symmetric_value(self):
        want = 2.0 * math.cos(2 * math.pi / 5) * math.sin(math.pi / 5) ** 2
        assert max_radius_star(5, 2, 0.0) == pytest.approx(want, abs=1e-15)

    def test_geometric_oracle(self):
        # oracle: distance from the displaced chord midpoint to the nearest
        # other chord line of the star polygon
        for (n, k, delta) in [(5, 2, 0.0), (7, 3, 0.01), (9, 4, 0.005)]:
            want = max_radius_star(n, k, delta)
            r = math.cos(k * math.pi / n)
            lines = chord_lines(n, k)
            cx, cy = -r, delta
            dists = [abs(ux * cx + uy * cy - c) for ux, uy, c in lines[:-1]]
            assert min(dists) == pytest.approx(want, abs=1e-12), (n, k, delta)

    def test_limiting_degeneracy(self):
        cap = math.cos(3 * math.pi / 7) * math.tan(math.pi / 7)
        assert max_radius_star(7, 3, cap * (1 - 1e-12)) == pytest.approx(0.0, abs=1e-11)

    def test_decreasing_in_delta(self):
        base = max_radius_star(5, 2, 0.0)
        for delta in (0.01, 0.05, 0.1):
            assert max_radius_star(5, 2, delta) < base

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            max_radius_star(4, 2, 0.0)  # gcd(2, 4) != 1
        with pytest.raises(DomainError):
            max_radius_star(5, 1, 0.0)  # k must exceed 1


class TestCausticRadius:
    def test_exact_values(self):
        assert caustic_radius(4, 1) == pytest.approx(math.sqrt(2) / 2, abs=1e-15)
        assert caustic_radius(5, 2) == pytest.approx(math.cos(2 * math.pi / 5), abs=1e-15)

    def test_chord_distance_oracle(self):
        # distance from the origin to the line through consecutive collision
        # points equals the caustic radius
        from annular_billiards.orbits import build_type_a

        for (n, k) in [(4, 1), (5, 2), (7, 3)]:
            params = TableParams.type_a(n, k, 0.4 * max_radius(n, k, 0.0), 0.0)
            orbit = build_type_a(params)
            pts = orbit.cartesian_points()
            a, b = pts[0], pts[1]
            t = b - a
            t /= np.hypot(*t)
            dist = abs(a[0] * t[1] - a[1] * t[0])
            assert dist == pytest.approx(caustic_radius(n, k), abs=1e-12)

    def test_gcd_guard(self):
        with pytest.raises(DomainError):
            caustic_radius(6, 2)


class TestTangencyRadiusB:
    def test_zero_detuning_limit(self):
        for n in (3, 4, 7, 20):
            assert tangency_radius_b(n, 0.0) == pytest.approx(
                tangency_radius_simple(n), abs=1e-14
            )

    @pytest.mark.parametrize("n,eps", [(3, 0.01), (4, 0.005)])
    def test_tangency_oracle(self, n, eps):
        params = TableParams.type_b(n, eps)
        pose = scatterer_pose(params)
        assert abs(pose.interiority_defect()) < 1e-12

    def test_singular_configuration(self):
        from annular_billiards.errors import SingularConfigurationError

        # push n*theta0 to pi/2 where the formula degenerates
        n = 3
        eps = math.pi / (2 * n) - math.pi / n
        with pytest.raises(SingularConfigurationError):
            tangency_radius_b(n, eps)


class TestScattererPose:
    def test_type_a_symmetric_placement(self):
        params = TableParams.type_a(4, 1, 0.2, 0.0)
        pose = scatterer_pose(params)
        assert pose.center[0] == pytest.approx(-math.cos(math.pi / 4), abs=1e-15)
        assert pose.center[1] == pytest.approx(0.0, abs=1e-15)
        assert pose.center_distance == pytest.approx(math.cos(math.pi / 4), abs=1e-14)

    def test_type_b_tangency_residual(self):
        pose = scatterer_pose(TableParams.type_b(3, 0.01))
        assert abs(pose.interiority_defect()) < 1e-12

    def test_cusp_pose_matches_type_b_limit(self):
        n = 5
        r0 = tangency_radius_simple(n)
        pose_a = scatterer_pose(TableParams.type_a(n, 1, r0, 0.0))
        assert abs(pose_a.interiority_defect()) < 1e-12
        assert pose_a.center[0] == pytest.approx(-(1.0 - r0), abs=1e-14)

    def test_oversized_radius_rejected(self):
        with pytest.raises(InvalidTableError):
            TableParams.type_a(4, 1, max_radius_delta(4, 0.1) + 1e-6, 0.1)

    def test_every_pose_interior(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            n = int(rng.integers(3, 12))
            ks = [k for k in range(1, n // 2 + 1) if math.gcd(k, n) == 1]
            k = int(rng.choice(ks))
            delta = float(rng.uniform(0.0, 0.2)) * math.sin(math.pi / n)
            try:
                cap = max_radius(n, k, delta)
            except DomainError:
                continue
            R = float(rng.uniform(0.1, 1.0)) * cap
            pose = scatterer_pose(TableParams.type_a(n, k, R, delta))
            assert pose.interiority_defect() <= 1e-12


class TestChordClearance:
    def test_star_orbit_segments_avoid_scatterer(self):
        # numerical verification that the admissible radius keeps the other
        # orbit segments clear of the scatterer
        for (n, k) in [(5, 2), (7, 2), (7, 3), (9, 2), (9, 4)]:
            for delta in (0.0, 0.005):
                cap = max_radius_star(n, k, delta)
                params = TableParams.type_a(n, k, 0.999 * cap, delta)
                clearance = clearance_from_other_chords(params)
                assert clearance >= params.R - 1e-12


class TestTableParams:
    def test_type_b_requires_positive_detuning(self):
        with pytest.raises(InvalidTableError):
            TableParams.type_b(3, 0.0)

    def test_type_b_radius_is_derived(self):
        params = TableParams.type_b(3, 0.01)
        assert params.R == pytest.approx(tangency_radius_b(3, 0.01), abs=1e-15)
        assert params.config is TableConfig.TYPE_B
        assert params.theta0 == pytest.approx(math.pi / 3 + 0.01, abs=1e-15)

    def test_coprimality_enforced(self):
        with pytest.raises(InvalidTableError):
            TableParams.type_a(6, 2, 0.05, 0.0)

    def test_radius_bounds_enforced(self):
        with pytest.raises(InvalidTableError):
            TableParams.type_a(3, 1, 0.0, 0.0)
        with pytest.raises(InvalidTableError):
            TableParams.type_a(3, 1, 0.75, 0.0)  # past the cusp radius
