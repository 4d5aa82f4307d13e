"""Numeric integration of piecewise fields and the numeric displacement map.

Two integrators: scipy's DOP853 with event location (double precision), and a
Taylor-series integrator in mpmath for high-precision half-maps of quadratic
fields.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import mpmath
import numpy as np
from scipy.integrate import solve_ivp

from .algebra import ParamPoly
from .systems import HORIZONTAL, PiecewiseSystem, PlanarPolySystem, horizontal_frame

STATE = ("x", "y")


class IntegrationError(RuntimeError):
    """Numeric failure; ``tag`` is one of step-underflow, sliding, no-return."""

    def __init__(self, tag: str, message: str):
        super().__init__(f"{tag}: {message}")
        self.tag = tag


def _terms(poly: ParamPoly, point: Mapping | None) -> list:
    p = poly.subs(point) if point else poly
    extra = p.variables() - set(STATE)
    if extra:
        raise ValueError(f"unbound parameters: {sorted(extra)}")
    return [(i, j, c) for (i, j), c in ((k, v.constant_term()) for k, v in p.split(STATE).items())]


@dataclass
class NumericField:
    """A polynomial planar field with numeric coefficients."""

    dx: list
    dy: list

    @classmethod
    def from_system(cls, z: PlanarPolySystem, point: Mapping | None = None) -> "NumericField":
        return cls(_terms(z.dx, point), _terms(z.dy, point))

    def __call__(self, x: float, y: float) -> tuple[float, float]:
        fx = sum(float(c) * x ** i * y ** j for i, j, c in self.dx)
        fy = sum(float(c) * x ** i * y ** j for i, j, c in self.dy)
        return fx, fy

    def degree(self) -> int:
        return max(i + j for i, j, _ in self.dx + self.dy)


# -- scipy integration with switching events --------------------------------------

@dataclass
class Trajectory:
    t: list
    states: list
    events: list = field(default_factory=list)
    zones: list = field(default_factory=list)

    @property
    def end(self):
        return self.states[-1]


def _axis_index(pw: PiecewiseSystem) -> int:
    return 1 if pw.axis == HORIZONTAL else 0


def _entry_zone(f1: NumericField, f2: NumericField, state, k: int) -> int:
    """Zone entered from a point on the switching line (Filippov crossing rule)."""
    v1 = f1(*state)[k]
    v2 = f2(*state)[k]
    if v1 > 0 and v2 > 0:
        return 1
    if v1 < 0 and v2 < 0:
        return 2
    if v1 * v2 < 0:
        raise IntegrationError("sliding", f"sliding or escaping point reached at {tuple(state)}")
    # tangential: use whichever field is not tangent
    if v1 > 0 or v2 > 0:
        return 1
    if v1 < 0 or v2 < 0:
        return 2
    raise IntegrationError("sliding", f"both fields tangent at {tuple(state)}")


def integrate_piecewise(pw: PiecewiseSystem, x0, t_max: float = 2 * math.pi, point: Mapping | None = None,
                        max_events: int = 1000, rtol: float = 1e-12, atol: float = 1e-14,
                        direction: int = 1, stop_after_events: int | None = None) -> Trajectory:
    """DOP853 integration switching fields on the axis.  ``direction=-1`` runs
    backward in time.  Crossings are located to |h| <= 1e-12 and the state is
    snapped onto the line."""
    f1 = NumericField.from_system(pw.zone1, point)
    f2 = NumericField.from_system(pw.zone2, point)
    k = _axis_index(pw)
    state = np.array([float(v) for v in x0], dtype=float)
    t = 0.0
    sign = 1.0 if direction >= 0 else -1.0
    traj = Trajectory([0.0], [tuple(state)])
    h = state[k]
    if h > 0:
        zone = 1
    elif h < 0:
        zone = 2
    else:
        # crossing rule in the chosen time direction
        zone = _entry_zone(_scaled(f1, sign), _scaled(f2, sign), state, k)
    while t < t_max and len(traj.events) < max_events:
        fld = f1 if zone == 1 else f2

        def rhs(_t, s, fld=fld):
            fx, fy = fld(s[0], s[1])
            return [sign * fx, sign * fy]

        def hit(_t, s):
            return s[k]

        hit.terminal = True
        hit.direction = -1.0 if zone == 1 else 1.0
        sol = solve_ivp(rhs, (t, t_max), state, method="DOP853", rtol=rtol, atol=atol,
                        events=hit, dense_output=False)
        if sol.status == -1:
            raise IntegrationError("step-underflow", sol.message)
        traj.zones.append(zone)
        if sol.status == 1 and len(sol.t_events[0]):
            te = float(sol.t_events[0][0])
            se = np.array(sol.y_events[0][0], dtype=float)
            if abs(se[k]) > 1e-12:
                raise IntegrationError("step-underflow", "crossing not localized")
            se[k] = 0.0
            t = te
            state = se
            traj.events.append((t, tuple(state)))
            traj.t.append(t)
            traj.states.append(tuple(state))
            if stop_after_events is not None and len(traj.events) >= stop_after_events:
                break
            zone = _entry_zone(_scaled(f1, sign), _scaled(f2, sign), state, k)
        else:
            t = float(sol.t[-1])
            state = sol.y[:, -1]
            traj.t.append(t)
            traj.states.append(tuple(state))
            break
    return traj


def _scaled(f: NumericField, sign: float) -> NumericField:
    if sign > 0:
        return f
    return NumericField([(i, j, -c) for i, j, c in f.dx], [(i, j, -c) for i, j, c in f.dy])


# -- half maps ---------------------------------------------------------------------

def _half_map_float(fld: NumericField, r0: float, backward: bool, rtol=1e-13, atol=1e-16,
                    t_max: float = 50.0) -> float:
    sign = -1.0 if backward else 1.0

    def rhs(_t, s):
        fx, fy = fld(s[0], s[1])
        return [sign * fx, sign * fy]

    def hit(_t, s):
        return s[1]

    hit.terminal = True
    # upper branch forward leaves through y=0 going down; lower branch backward also comes back up
    hit.direction = 1.0 if backward else -1.0
    sol = solve_ivp(rhs, (0.0, t_max), [r0, 0.0], method="DOP853", rtol=rtol, atol=atol, events=hit)
    if sol.status != 1 or not len(sol.t_events[0]):
        raise IntegrationError("no-return", "orbit did not return to the axis")
    x_end = float(sol.y_events[0][0][0])
    if x_end >= 0:
        raise IntegrationError("no-return", "orbit returned on the wrong side")
    return -x_end


def _taylor_coeffs(terms_x, terms_y, x0, y0, N):
    """Taylor coefficients of a polynomial field solution through order N (mpmath)."""
    X = [x0]
    Y = [y0]
    # power tables x^i y^j as series, built on demand for degree <= 2
    for n in range(N):
        def cauchy(a, b):
            return mpmath.fsum(a[i] * b[n - i] for i in range(n + 1))

        cache = {}

        def mono(i, j):
            key = (i, j)
            if key in cache:
                return cache[key]
            if i == 0 and j == 0:
                v = mpmath.mpf(1) if n == 0 else mpmath.mpf(0)
            elif (i, j) == (1, 0):
                v = X[n]
            elif (i, j) == (0, 1):
                v = Y[n]
            elif (i, j) == (2, 0):
                v = cauchy(X, X)
            elif (i, j) == (1, 1):
                v = cauchy(X, Y)
            elif (i, j) == (0, 2):
                v = cauchy(Y, Y)
            else:
                raise ValueError("Taylor integrator supports degree <= 2 only")
            cache[key] = v
            return v

        fx = mpmath.fsum(c * mono(i, j) for i, j, c in terms_x)
        fy = mpmath.fsum(c * mono(i, j) for i, j, c in terms_y)
        X.append(fx / (n + 1))
        Y.append(fy / (n + 1))
    return X, Y


def _poly_eval(c, h):
    acc = mpmath.mpf(0)
    for a in reversed(c):
        acc = acc * h + a
    return acc


def _half_map_mp(fld: NumericField, r0, backward: bool, digits: int = 40, order: int | None = None,
                 t_max: float = 50.0):
    """High-precision half-map by Taylor series stepping in time."""
    N = order or max(20, int(digits * 0.9))
    with mpmath.workdps(digits + 10):
        sign = -1 if backward else 1
        tx = [(i, j, mpmath.mpf(c.numerator) / c.denominator * sign) for i, j, c in fld.dx]
        ty = [(i, j, mpmath.mpf(c.numerator) / c.denominator * sign) for i, j, c in fld.dy]
        x, y = mpmath.mpf(r0), mpmath.mpf(0)
        t = mpmath.mpf(0)
        tol = mpmath.mpf(10) ** (-(digits + 5))
        first = True
        while t < t_max:
            X, Y = _taylor_coeffs(tx, ty, x, y, N)
            rho = None
            for c in (X, Y):
                for k in (N - 1, N):
                    if c[k] != 0:
                        r = abs(c[k]) ** (-mpmath.mpf(1) / k)
                        rho = r if rho is None else min(rho, r)
            if rho is None:
                raise IntegrationError("no-return", "stationary point")
            h = rho * tol ** (mpmath.mpf(1) / N)
            y_end = _poly_eval(Y, h)
            crossed = (y_end < 0) if not backward else (y_end > 0)
            if first:
                crossed = False
                first = False
            elif y == 0:
                crossed = False
            if crossed and _poly_eval(X, h) < 0:
                # Newton on the Taylor polynomial of y
                dY = [k * Y[k] for k in range(1, len(Y))]
                s = h * y / (y - y_end)
                for _ in range(100):
                    step = _poly_eval(Y, s) / _poly_eval(dY, s)
                    s -= step
                    if abs(step) < tol * (1 + abs(s)):
                        break
                return -_poly_eval(X, s)
            x, y = _poly_eval(X, h), y_end
            t += h
        raise IntegrationError("no-return", "orbit did not return to the axis")


def half_maps(pw: PiecewiseSystem, r0, point: Mapping | None = None, digits: int | None = None):
    """(Pi_plus(r0), Pi_minus^{-1}(r0)) in the horizontal frame."""
    up, low = horizontal_frame(pw)
    fu = NumericField.from_system(up, point)
    fl = NumericField.from_system(low, point)
    if digits is None:
        return _half_map_float(fu, float(r0), False), _half_map_float(fl, float(r0), True)
    return _half_map_mp(fu, r0, False, digits), _half_map_mp(fl, r0, True, digits)


def delta_numeric(pw: PiecewiseSystem, r0, point: Mapping | None = None, digits: int | None = None):
    """Pi_plus(r0) - Pi_minus^{-1}(r0); float by default, mpmath with ``digits``."""
    if not 0 < float(r0) < 0.5:
        raise ValueError("r0 must lie in (0, 1/2)")
    plus, minus_inv = half_maps(pw, r0, point, digits)
    return plus - minus_inv
