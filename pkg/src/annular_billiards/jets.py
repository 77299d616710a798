"""Truncated bivariate Taylor arithmetic (total degree <= 3).

A :class:`Jet2` carries the Taylor coefficients of a smooth function of two
variables about a base point, truncated at total degree 3.  Pushing jets
through the elementary operations of a map yields the map's Taylor
coefficients exactly (up to rounding), which is what the twist-coefficient
pipeline needs: no finite-difference truncation error, no symbolic algebra.

Coefficients are stored densely in the monomial order

    1, x, y, x^2, xy, y^2, x^3, x^2 y, x y^2, y^3

and are plain Taylor *coefficients* (factorials included), so the partial
derivative d^(i+j) f / dx^i dy^j equals ``coeff(i, j) * i! * j!``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: monomial exponents in storage order
MONOMIALS: tuple[tuple[int, int], ...] = (
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
)

_INDEX = {m: i for i, m in enumerate(MONOMIALS)}
_N = len(MONOMIALS)

# Precomputed (ia, ib, iout) triples for truncated polynomial multiplication.
_MUL_TABLE: list[tuple[int, int, int]] = []
for _a, (_i, _j) in enumerate(MONOMIALS):
    for _b, (_p, _q) in enumerate(MONOMIALS):
        if _i + _j + _p + _q <= 3:
            _MUL_TABLE.append((_a, _b, _INDEX[(_i + _p, _j + _q)]))


@dataclass(frozen=True)
class Jet2:
    """Degree-3 truncated Taylor expansion of a scalar function of two variables."""

    c: np.ndarray

    # -- constructors ------------------------------------------------------

    @staticmethod
    def constant(value: float) -> "Jet2":
        c = np.zeros(_N)
        c[0] = value
        return Jet2(c)

    @staticmethod
    def variable(value: float, index: int) -> "Jet2":
        """Jet of the coordinate function ``value + dx_index``."""
        if index not in (0, 1):
            raise ValueError("variable index must be 0 or 1")
        c = np.zeros(_N)
        c[0] = value
        c[1 + index] = 1.0
        return Jet2(c)

    # -- ring operations ---------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Jet2):
            return Jet2(self.c + other.c)
        c = self.c.copy()
        c[0] += other
        return Jet2(c)

    __radd__ = __add__

    def __neg__(self):
        return Jet2(-self.c)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet2) else -float(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet2):
            return Jet2(self.c * other)
        out = np.zeros(_N)
        a, b = self.c, other.c
        for ia, ib, io in _MUL_TABLE:
            out[io] += a[ia] * b[ib]
        return Jet2(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet2):
            return self * other._reciprocal()
        return Jet2(self.c / other)

    def __rtruediv__(self, other):
        return self._reciprocal() * other

    def _reciprocal(self) -> "Jet2":
        u = self.c[0]
        if u == 0.0:
            raise ZeroDivisionError("jet with zero constant term")
        return self.compose_univariate((1.0 / u, -1.0 / u**2, 2.0 / u**3, -6.0 / u**4))

    # -- composition with univariate functions ------------------------------

    def compose_univariate(self, derivs: tuple[float, float, float, float]) -> "Jet2":
        """Compose ``f(self)`` given ``f`` and its first three derivatives at
        the jet's constant term."""
        f0, f1, f2, f3 = derivs
        h = Jet2(np.concatenate(([0.0], self.c[1:])))  # self minus constant part
        h2 = h * h
        h3 = h2 * h
        return f0 + f1 * h + (f2 / 2.0) * h2 + (f3 / 6.0) * h3

    # -- coefficient access --------------------------------------------------

    def coeff(self, i: int, j: int) -> float:
        return float(self.c[_INDEX[(i, j)]])

    def partial(self, i: int, j: int) -> float:
        """Partial derivative d^(i+j)/dx^i dy^j at the base point."""
        return self.coeff(i, j) * math.factorial(i) * math.factorial(j)

    @property
    def value(self) -> float:
        return float(self.c[0])


def jet_sin(x: Jet2) -> Jet2:
    u = x.value
    s, c = math.sin(u), math.cos(u)
    return x.compose_univariate((s, c, -s, -c))


def jet_cos(x: Jet2) -> Jet2:
    u = x.value
    s, c = math.sin(u), math.cos(u)
    return x.compose_univariate((c, -s, -c, s))


def jet_sqrt(x: Jet2) -> Jet2:
    u = x.value
    if u <= 0.0:
        raise ValueError("jet_sqrt needs a positive constant term")
    r = math.sqrt(u)
    return x.compose_univariate((r, 0.5 / r, -0.25 / r**3, 0.375 / r**5))


def jet_acos(x: Jet2) -> Jet2:
    u = x.value
    if not -1.0 < u < 1.0:
        raise ValueError("jet_acos needs |constant term| < 1")
    w = 1.0 - u * u
    return x.compose_univariate(
        (
            math.acos(u),
            -w**-0.5,
            -u * w**-1.5,
            -(1.0 + 2.0 * u * u) * w**-2.5,
        )
    )


def jet_atan(x: Jet2) -> Jet2:
    u = x.value
    w = 1.0 + u * u
    return x.compose_univariate(
        (math.atan(u), 1.0 / w, -2.0 * u / w**2, (6.0 * u * u - 2.0) / w**3)
    )


def polyval2(jet: Jet2, x: Jet2, y: Jet2) -> Jet2:
    """Evaluate the polynomial of ``jet`` at jet-valued arguments.

    ``x`` and ``y`` must have zero constant term (they play the role of the
    displacement variables), otherwise truncation would lose terms.
    """
    if abs(x.value) > 0.0 or abs(y.value) > 0.0:
        raise ValueError("polyval2 arguments must have zero constant term")
    xp = [Jet2.constant(1.0), x, x * x, x * x * x]
    yp = [Jet2.constant(1.0), y, y * y, y * y * y]
    out = Jet2.constant(0.0)
    for idx, (i, j) in enumerate(MONOMIALS):
        coef = jet.c[idx]
        if coef != 0.0:
            out = out + coef * (xp[i] * yp[j])
    return out
