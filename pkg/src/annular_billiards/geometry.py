"""Closed-form geometry of the annular table.

The table is the unit disk with a small circular scatterer inside.  All
lengths are in units of the outer radius.  The canonical Cartesian frame
puts the disk center at the origin and the scatterer on the chord joining
the last and first outer collision points of the reference orbit; that
chord is vertical at x = -cos(k*pi/n), so a symmetric table is literally
invariant under y -> -y and the tangent configuration has its scatterer
center on the negative x-axis.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InvalidTableError, SingularConfigurationError

#: absolute tolerance for interiority/tangency comparisons on the unit disk
GEOM_TOL = 1e-12


class TableConfig(enum.Enum):
    """Which family a table belongs to.

    TYPE_A: scatterer perpendicular to one chord of the inscribed (star)
    polygon traced with reflection angle k*pi/n, optionally displaced by
    delta along the chord.  TYPE_B: scatterer tangent to the outer circle,
    perpendicular to the chord of the detuned angle pi/n + epsilon.
    """

    TYPE_A = "type_a"
    TYPE_B = "type_b"


def tangency_radius_simple(n: int) -> float:
    """Scatterer radius at which the symmetric k=1 configuration forms a cusp.

    For the polygonal orbit with reflection angle pi/n, the chord sits at
    distance cos(pi/n) from the center, so the scatterer centered on the
    chord midpoint touches the unit circle exactly when R = 1 - cos(pi/n).
    """
    if n < 3:
        raise DomainError(f"need n >= 3, got {n}")
    return 1.0 - math.cos(math.pi / n)


def max_radius_delta(n: int, delta: float) -> float:
    """Largest admissible radius for a k=1 scatterer displaced by delta.

    The displaced center sits at distance sqrt(delta^2 + cos^2(pi/n)) from
    the origin; interiority of the scatterer gives
    R_delta = 1 - sqrt(delta^2 + cos^2(pi/n)).
    """
    if n < 3:
        raise DomainError(f"need n >= 3, got {n}")
    if not 0.0 <= delta < math.sin(math.pi / n):
        raise DomainError(f"need 0 <= delta < sin(pi/n), got delta={delta}")
    return 1.0 - math.sqrt(delta * delta + math.cos(math.pi / n) ** 2)


def max_radius_star(n: int, k: int, delta: float) -> float:
    """Largest radius keeping a star-orbit scatterer clear of the other chords.

    For k >= 2 the binding constraint is the nearest other chord of the star
    polygon, at distance sin(2*pi/n) * (cos(k*pi/n)*tan(pi/n) - delta) from
    the displaced chord midpoint.  At delta = 0 this reduces to
    2*cos(k*pi/n)*sin^2(pi/n).
    """
    if n < 5 or k < 2 or 2 * k > n:
        raise DomainError(f"need n >= 5 and 2 <= k <= n/2, got n={n}, k={k}")
    if math.gcd(k, n) != 1:
        raise DomainError(f"need gcd(k, n) = 1, got n={n}, k={k}")
    cap = math.cos(k * math.pi / n) * math.tan(math.pi / n)
    if not 0.0 <= delta < cap:
        raise DomainError(
            f"need 0 <= delta < cos(k pi/n) tan(pi/n) = {cap:.6g}, got {delta}"
        )
    return math.sin(2.0 * math.pi / n) * (cap - delta)


def max_radius(n: int, k: int, delta: float) -> float:
    """Binding admissible radius for either orbit family (k = 1 or star)."""
    if k == 1:
        return max_radius_delta(n, delta)
    return min(max_radius_star(n, k, delta), max_radius_delta_star_disk(n, k, delta))


def max_radius_delta_star_disk(n: int, k: int, delta: float) -> float:
    """Interiority bound for a star-orbit scatterer (usually not binding)."""
    return 1.0 - math.sqrt(delta * delta + math.cos(k * math.pi / n) ** 2)


def caustic_radius(n: int, k: int) -> float:
    """Radius cos(k*pi/n) of the circle tangent to every chord of the orbit."""
    if n < 3 or k < 1 or 2 * k > n:
        raise DomainError(f"need n >= 3 and 1 <= k <= n/2, got n={n}, k={k}")
    if math.gcd(k, n) != 1:
        raise DomainError(f"need gcd(k, n) = 1, got n={n}, k={k}")
    return math.cos(k * math.pi / n)


def tangency_radius_b(n: int, epsilon: float) -> float:
    """Scatterer radius keeping tangency when the angle is detuned to pi/n + eps.

    With theta0 = pi/n + epsilon the chord of the detuned orbit crosses the
    negative x-axis at distance cos(theta0)/cos(n*epsilon) from the origin,
    which yields R_b = 1 + cos(theta0)/cos(n*theta0).
    """
    if n < 3:
        raise DomainError(f"need n >= 3, got {n}")
    theta0 = math.pi / n + epsilon
    cn = math.cos(n * theta0)
    if abs(cn) < 1e-9:
        raise SingularConfigurationError(
            f"cos(n*theta0) ~ 0 at n={n}, epsilon={epsilon}"
        )
    r = 1.0 + math.cos(theta0) / cn
    if not 0.0 < r < 1.0:
        raise SingularConfigurationError(
            f"tangency radius {r:.6g} outside (0, 1) at n={n}, epsilon={epsilon}"
        )
    return r


@dataclass(frozen=True)
class TableParams:
    """Full parametrization of one annular table / orbit family.

    n        number of outer-wall reflection slots (n >= 3)
    k        winding number (1 <= k <= n/2, coprime with n)
    R        scatterer radius
    delta    displacement of the scatterer along the orbit chord, toward the
             collision point indexed n-1 (type (a) only)
    epsilon  reflection-angle detuning (type (b) only)
    config   TYPE_A or TYPE_B
    """

    n: int
    k: int
    R: float
    delta: float
    epsilon: float
    config: TableConfig

    @staticmethod
    def type_a(n: int, k: int, R: float, delta: float = 0.0) -> "TableParams":
        p = TableParams(n=n, k=k, R=R, delta=delta, epsilon=0.0, config=TableConfig.TYPE_A)
        p.validate()
        return p

    @staticmethod
    def type_b(n: int, epsilon: float) -> "TableParams":
        if epsilon <= 0.0:
            raise InvalidTableError(f"type (b) needs epsilon > 0, got {epsilon}")
        r = tangency_radius_b(n, epsilon)
        p = TableParams(n=n, k=1, R=r, delta=0.0, epsilon=epsilon, config=TableConfig.TYPE_B)
        p.validate()
        return p

    @property
    def theta0(self) -> float:
        """Reflection angle of the reference orbit on the outer wall."""
        if self.config is TableConfig.TYPE_B:
            return math.pi / self.n + self.epsilon
        return self.k * math.pi / self.n

    def validate(self) -> None:
        n, k = self.n, self.k
        if n < 3:
            raise InvalidTableError(f"need n >= 3, got {n}")
        if k < 1 or 2 * k > n or math.gcd(k, n) != 1:
            raise InvalidTableError(f"need 1 <= k <= n/2 coprime with n, got k={k}, n={n}")
        if not 0.0 < self.R < 1.0:
            raise InvalidTableError(f"need 0 < R < 1, got R={self.R}")
        if self.config is TableConfig.TYPE_B:
            if k != 1 or self.delta != 0.0 or self.epsilon <= 0.0:
                raise InvalidTableError("type (b) requires k=1, delta=0, epsilon>0")
            r = tangency_radius_b(n, self.epsilon)
            if abs(r - self.R) > GEOM_TOL:
                raise InvalidTableError(
                    f"type (b) radius must equal the tangency radius {r!r}, got {self.R!r}"
                )
            return
        if self.delta < 0.0:
            raise InvalidTableError(f"need delta >= 0, got {self.delta}")
        cap = max_radius(n, k, self.delta)
        if self.R > cap + GEOM_TOL:
            raise InvalidTableError(
                f"R={self.R:.6g} exceeds the admissible maximum {cap:.6g} "
                f"for n={n}, k={k}, delta={self.delta:.6g}"
            )


@dataclass(frozen=True)
class ScattererPose:
    """Scatterer circle in the unit-disk Cartesian frame."""

    center: np.ndarray = field(repr=False)
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))

    @property
    def center_distance(self) -> float:
        return float(np.hypot(self.center[0], self.center[1]))

    def interiority_defect(self) -> float:
        """|center| + radius - 1; <= 0 means interior, 0 means tangent."""
        return self.center_distance + self.radius - 1.0


def scatterer_pose(params: TableParams) -> ScattererPose:
    """Place the scatterer for the given table in the canonical frame.

    Type (a): center on the vertical chord x = -cos(k*pi/n), displaced by
    delta toward the upper endpoint (the collision point indexed n-1).
    Type (b): center on the negative x-axis at distance 1 - R_b (tangent to
    the unit circle at (-1, 0)).
    """
    params.validate()
    if params.config is TableConfig.TYPE_B:
        pose = ScattererPose(center=(-(1.0 - params.R), 0.0), radius=params.R)
    else:
        x = -math.cos(params.k * math.pi / params.n)
        pose = ScattererPose(center=(x, params.delta), radius=params.R)
    if pose.interiority_defect() > GEOM_TOL:
        raise InvalidTableError(
            f"scatterer pokes out of the disk by {pose.interiority_defect():.3g}"
        )
    return pose


def chord_lines(n: int, k: int) -> list[tuple[float, float, float]]:
    """The n chord lines of the reference polygon as (ux, uy, c): points P on
    the line satisfy <P, u> = c, with u the unit normal through the caustic
    touch point."""
    out = []
    r = math.cos(k * math.pi / n)
    # chord j joins the outer points at angles s0 + 2jk*pi/n and s0 + 2(j+1)k*pi/n
    s0 = -math.pi + k * math.pi / n
    for j in range(n):
        a = s0 + (2 * j + 1) * k * math.pi / n
        out.append((math.cos(a), math.sin(a), r))
    return out


def clearance_from_other_chords(params: TableParams) -> float:
    """Distance from the scatterer center to the nearest chord it does not sit on.

    Numerical check of the claim behind ``max_radius_star``: the returned
    clearance must be >= R for the orbit segments to miss the scatterer.
    """
    pose = scatterer_pose(params)
    cx, cy = pose.center
    lines = chord_lines(params.n, params.k)
    # the scatterer's own chord is the last one (joining collisions n-1 and 0)
    own = lines[-1]
    best = math.inf
    for ux, uy, c in lines[:-1]:
        d = abs(ux * cx + uy * cy - c)
        best = min(best, d)
    # guard: confirm the pose really sits on its own chord
    ux, uy, c = own
    if abs(ux * cx + uy * cy - c) > 1e-9:
        raise InvalidTableError("scatterer center is off its own chord")
    return best
