"""Transversality, jets at weak foci, unfolding schedules and cycle counting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import brentq

from .algebra import ParamPoly, PiPoly, Truncation, as_rational
from .lyapunov import (CoefficientRing, LyapunovList, displacement_series, first_order_trace_term,
                       pi_sign)
from .numeric import delta_numeric
from .systems import VERTICAL, PiecewiseSystem, add_constant_perturbation, build_family

TRACE_SYMBOLS = ("d", "d1", "d2")


# -- transversality ----------------------------------------------------------------

def _det(rows: list[list[PiPoly]]) -> PiPoly:
    n = len(rows)
    if n == 1:
        return rows[0][0]
    total = PiPoly()
    for j in range(n):
        if rows[0][j].is_zero():
            continue
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        term = rows[0][j] * _det(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def transversality_det(W: LyapunovList | Mapping[int, PiPoly] | Sequence[PiPoly], vars: Sequence[str],
                       at: Mapping | None = None, orders: Sequence[int] | None = None) -> PiPoly:
    """det of d(W_k)/d(var) for the chosen W's, then substituted with ``at``.

    ``W`` may be a LyapunovList (use ``orders`` to pick quantities) or a plain
    list of PiPolys.
    """
    if isinstance(W, LyapunovList):
        W = W.W
    if isinstance(W, Mapping):
        ks = list(orders) if orders is not None else sorted(W)
        quantities = [W[k] for k in ks]
    else:
        quantities = list(W)
    if len(quantities) != len(vars):
        raise ValueError("need as many quantities as variables")
    rows = [[w.map(lambda c, v=v: c.diff(v)) for v in vars] for w in quantities]
    det = _det(rows)
    return det.subs(at) if at else det


# -- expansion frames --------------------------------------------------------------

def _rank_det(matrix: list[list[Fraction]]) -> Fraction:
    m = [row[:] for row in matrix]
    n = len(m)
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if m[r][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            det = -det
        det *= m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            if f:
                m[r] = [a - f * b for a, b in zip(m[r], m[c])]
    return det


@dataclass
class ExpansionFrame:
    """Base point plus one local coordinate per perturbed symbol.

    ``directions`` pairs a family symbol with its coordinate (``eps1``...).
    ``dependent`` expresses eliminated symbols through the others; it is
    applied after the base/direction substitution.  ``reparam`` optionally
    writes every direction coordinate as a rational linear form in new
    coordinates (``u1``...); it must be square and invertible.
    """

    base: dict
    directions: list
    dependent: dict = field(default_factory=dict)
    reparam: dict | None = None

    def validate(self):
        if self.reparam is None:
            return
        coords = [c for _, c in self.directions]
        if set(self.reparam) != set(coords):
            raise ValueError("reparametrization must define every direction coordinate")
        new = sorted({u for form in self.reparam.values() for u in form})
        if len(new) != len(coords):
            raise ValueError(f"non-invertible reparametrization: {len(coords)} coordinates "
                             f"written through {len(new)} new ones")
        mat = [[Fraction(as_rational(self.reparam[c].get(u, 0))) for u in new] for c in coords]
        if _rank_det(mat) == 0:
            raise ValueError("non-invertible reparametrization: zero determinant")

    def coordinates(self) -> list[str]:
        if self.reparam is None:
            return [c for _, c in self.directions]
        return sorted({u for form in self.reparam.values() for u in form})

    def bindings(self) -> dict:
        self.validate()
        out = {name: ParamPoly.const(as_rational(v)) for name, v in self.base.items()}
        for sym, coord in self.directions:
            if self.reparam is not None:
                local = sum((ParamPoly.var(u) * as_rational(c) for u, c in self.reparam[coord].items()),
                            ParamPoly())
            else:
                local = ParamPoly.var(coord)
            out[sym] = out.get(sym, ParamPoly()) + local
        for sym, expr in self.dependent.items():
            out[sym] = ParamPoly.coerce(expr).subs(out)
        return out


def f1_frame() -> ExpansionFrame:
    """Local coordinates eps1..eps5 around F1 (vertical family, zero traces);
    n1 is fixed by W2 = 0."""
    q = as_rational
    base = {"d1": 0, "d2": 0, "m1": 0, "m2": 0, "l1": q("-13/4"), "l2": q("-3/2"), "n2": q("-1/2")}
    dirs = [("m1", "eps1"), ("m2", "eps2"), ("l1", "eps3"), ("l2", "eps4"), ("n2", "eps5")]
    dep = {"n1": ParamPoly.parse("-2*l1 + 2*l2 + n2")}
    return ExpansionFrame(base, dirs, dep)


# printed change of coordinates eps -> u at F1; it is not square (see tests)
F1_PRINTED_U_MAP = {
    "eps1": {"u7": "5/4", "u6": "5/8", "u4": "3215/672"},
    "eps2": {"u7": "25/8", "u6": "25/16", "u4": "14635/1344"},
    "eps3": {"u1": "14/3", "u3": "64/35"},
    "eps4": {"u3": "-208/3", "u5": "-512/35"},
    "eps5": {"u7": "1"},
}


def f1_u_frame() -> ExpansionFrame:
    fr = f1_frame()
    fr.reparam = {k: {u: as_rational(c) for u, c in v.items()} for k, v in F1_PRINTED_U_MAP.items()}
    return fr


def expand_at_point(pw: PiecewiseSystem, frame: ExpansionFrame, degree: int, orders: Sequence[int],
                    stretch: bool = False) -> dict[int, PiPoly]:
    """Exact jets (total degree <= ``degree`` in the frame coordinates) of W_k.

    Degree 3 is the expensive case and must be requested with ``stretch=True``.
    """
    if degree not in (0, 1, 2, 3):
        raise ValueError("degree must be 0, 1, 2 or 3")
    if degree == 3 and not stretch:
        raise ValueError("degree-3 jets are gated; pass stretch=True")
    sub = pw.subs(frame.bindings())
    ring = CoefficientRing(trunc=Truncation(frame.coordinates(), degree))
    out = {}
    higher = [k for k in orders if k >= 2]
    if higher:
        series = displacement_series(sub, max(higher), ring)
        for k in higher:
            out[k] = series[k - 1]
    if 1 in orders:
        out[1] = ring.reduce_pi(first_order_trace_term(sub))
    return out


def restricted_jet(jets: Mapping[int, PiPoly], zero_orders: Sequence[int], target: int,
                   free: str, coords: Sequence[str], degree: int = 3) -> list:
    """Taylor coefficients (in ``free``) of W_target along {W_k = 0, k in zero_orders}.

    The remaining coordinates are solved as power series in ``free`` order by
    order.  Coefficients live in Q(pi); this uses sympy for the linear solves.
    """
    import sympy as sp

    names = [c for c in coords if c != free]
    if len(names) != len(zero_orders):
        raise ValueError("need one equation per eliminated coordinate")
    syms = {c: sp.Symbol(c) for c in coords}
    t = sp.Symbol("t")

    def to_sym(w: PiPoly):
        return sp.expand(sum(sp.sympify(c.to_str().replace("^", "**"), locals=syms) * sp.pi ** i
                             for i, c in enumerate(w.coeffs)))

    eqs = {k: to_sym(jets[k]) for k in list(zero_orders) + [target]}
    unknown = {c: [sp.Symbol(f"{c}_{j}") for j in range(1, degree + 1)] for c in names}
    curve = {syms[c]: sum(unknown[c][j - 1] * t ** j for j in range(1, degree + 1)) for c in names}
    curve[syms[free]] = t
    solved = {}
    for j in range(1, degree + 1):
        lin = [sp.expand(eqs[k].subs(curve).subs(solved)).coeff(t, j) for k in zero_orders]
        sol = sp.solve(lin, [unknown[c][j - 1] for c in names], dict=True)
        if not sol:
            raise ValueError("elimination failed: singular linear part")
        solved.update({a: sp.simplify(b) for a, b in sol[0].items()})
    w = sp.expand(eqs[target].subs(curve).subs(solved))
    return [sp.simplify(w.coeff(t, j)) for j in range(0, degree + 1)]


# -- unfolding schedules -----------------------------------------------------------

def _point_values(family: str, point: Mapping, top: int) -> dict[int, PiPoly]:
    """W_1 (trace term) and raw W_2..W_top of a numeric point."""
    W = {1: first_order_trace_term(build_family(family, point))}
    flat = build_family(family, {k: (0 if k in TRACE_SYMBOLS else v) for k, v in point.items()})
    series = displacement_series(flat, top)
    for k in range(2, top + 1):
        W[k] = series[k - 1]
    return W


def _float(w: PiPoly) -> float:
    return w.to_float()


def _alternates(W: Mapping[int, PiPoly], top: int, low: int) -> bool:
    signs = [pi_sign(W[k]) for k in range(top, low - 1, -1)]
    return all(s != 0 for s in signs) and all(a == -b for a, b in zip(signs, signs[1:]))


@dataclass
class Schedule:
    points: list  # list of dict symbol -> Fraction; points[0] is the base point
    controls: list  # (order, symbol) used at each step
    values: list  # exact W's at each point
    radii: list  # target cycle amplitudes

    def to_json(self) -> dict:
        return {"controls": [[k, s] for k, s in self.controls],
                "radii": self.radii,
                "points": [{k: str(v) for k, v in p.items()} for p in self.points],
                "signs": [{str(k): pi_sign(w) for k, w in vals.items()} for vals in self.values]}


def unfold_schedule(family: str, base: Mapping, controls: Sequence[tuple[int, str]], top: int | None = None,
                    ratio=Fraction(1, 100), first_radius=Fraction(1, 20)) -> Schedule:
    """Perturb a weak focus of order ``top`` step by step.

    ``controls`` lists (order k, symbol) from k = top-1 down; the symbol moves
    W_k to the sign opposite W_{k+1} with |W_k| about radius*|W_{k+1}|, the
    radii shrinking geometrically by ``ratio``.  The last control should be a
    trace (order 1).
    """
    point = {k: Fraction(as_rational(v)) for k, v in base.items()}
    if top is None:
        top = controls[0][0] + 1 if controls else 2
    W = _point_values(family, point, top)
    for k in range(1, top):
        if not W[k].is_zero():
            raise ValueError(f"base point is not a weak focus of order {top}: W_{k} != 0")
    if W[top].is_zero():
        raise ValueError(f"W_{top} vanishes at the base point")
    sched = Schedule([dict(point)], [], [W], [])
    radius = Fraction(first_radius)
    full = build_family(family)
    for k, sym in controls:
        if k == 1:
            grad = first_order_trace_term(full).map(lambda c: c.diff(sym))
        else:
            if k not in _symbolic_cache(family, top):
                raise ValueError(f"no symbolic W_{k} available")
            grad = _symbolic_cache(family, top)[k].map(lambda c: c.diff(sym))
        g = _float(grad.subs(point))
        if g == 0:
            raise ValueError(f"transversality failure: dW_{k}/d{sym} vanishes")
        target = -math.copysign(1.0, _float(W[k + 1])) * float(radius) * abs(_float(W[k + 1]))
        delta = Fraction(target / g).limit_denominator(10 ** 12)
        for _ in range(60):
            trial = dict(point)
            trial[sym] = trial.get(sym, Fraction(0)) + delta
            Wt = _point_values(family, trial, top)
            if _alternates(Wt, top, k):
                break
            delta /= 2
        else:
            raise ValueError(f"could not alternate signs at order {k}")
        point = trial
        W = Wt
        sched.points.append(dict(point))
        sched.controls.append((k, sym))
        sched.values.append(W)
        sched.radii.append(float(radius))
        radius *= Fraction(ratio)
    return sched


_SYMBOLIC: dict = {}


def _symbolic_cache(family: str, top: int) -> dict:
    key = (family, top)
    if key not in _SYMBOLIC:
        pw = build_family(family)
        flat = pw.subs({s: 0 for s in TRACE_SYMBOLS if s in pw.parameters()})
        series = displacement_series(flat, top)
        _SYMBOLIC[key] = {k: series[k - 1] for k in range(2, top + 1)}
    return _SYMBOLIC[key]


# -- cycle counting ----------------------------------------------------------------

@dataclass
class CycleReport:
    count: int
    cycles: list  # (r0, residual, stability) with stability +1 unstable / -1 stable
    notes: str = ""

    def to_json(self) -> dict:
        return {"count": self.count,
                "cycles": [{"r0": r, "residual": res, "stability": s} for r, res, s in self.cycles],
                "notes": self.notes}


def count_cycles(pw: PiecewiseSystem, r_range=(1e-4, 0.2), grid: int = 400, tol: float = 1e-12,
                 point: Mapping | None = None, noise: float = 1e-12) -> CycleReport:
    """Sign changes of the numeric displacement on a log grid, refined by Brent's method.

    Samples with |Delta| <= noise * r0 carry no sign (integration round-off),
    so a center reports no cycles.
    """
    lo, hi = r_range
    if not (0 < lo < hi < 0.5):
        raise ValueError("range must lie inside (0, 1/2)")
    rs = np.geomspace(lo, hi, grid)

    def f(r):
        return delta_numeric(pw, float(r), point)

    signed = []
    for r in rs:
        v = f(r)
        if abs(v) > noise * r:
            signed.append((float(r), v))
    cycles = []
    for (a, fa), (b, fb) in zip(signed, signed[1:]):
        if fa * fb < 0:
            root = brentq(f, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
            res = f(root)
            if abs(res) > tol:
                continue
            # outer side of the cycle: Delta > 0 outside means orbits leave it
            stab = 1 if fb > 0 else -1
            cycles.append((float(root), float(res), stab))
    return CycleReport(len(cycles), cycles,
                       f"log grid of {grid} points on [{lo}, {hi}], noise floor {noise:g}*r0")


def delta_samples(pw: PiecewiseSystem, r_range=(1e-3, 0.1), grid: int = 50, point=None) -> list:
    return [(float(r), delta_numeric(pw, float(r), point)) for r in np.geomspace(*r_range, grid)]


# -- pseudo-Hopf -------------------------------------------------------------------

@dataclass
class SlidingReport:
    kind: str | None
    endpoints: tuple | None

    @property
    def length(self) -> float:
        if self.endpoints is None:
            return 0.0
        return abs(self.endpoints[1] - self.endpoints[0])


def _nearest_root(poly: ParamPoly) -> float:
    """Root of a univariate polynomial in y closest to 0."""
    coeffs = poly.split(["y"])
    deg = max(e[0] for e in coeffs)
    c = [float(coeffs.get((deg - i,), ParamPoly()).constant_term()) for i in range(deg + 1)]
    roots = [r.real for r in np.roots(c) if abs(r.imag) < 1e-14]
    if not roots:
        return math.inf
    return min(roots, key=abs)


def sliding_segment(pw: PiecewiseSystem) -> SlidingReport:
    """Sliding or escaping segment of the vertical switching line near the origin."""
    if pw.axis != VERTICAL:
        raise ValueError("vertical switching line expected")
    ends = []
    for zone in (pw.zone1, pw.zone2):
        on = zone.dx.subs({"x": 0})
        ends.append(0.0 if on.constant_term() == 0 else _nearest_root(on))
    if ends[0] == ends[1]:
        return SlidingReport(None, None)
    a, b = sorted(ends)
    from .systems import classify_boundary_point

    mid = Fraction((a + b) / 2).limit_denominator(10 ** 15)
    kind = classify_boundary_point(pw, (0, mid))
    return SlidingReport(kind, (a, b))


def pseudo_hopf_perturb(pw: PiecewiseSystem, eps0) -> tuple[PiecewiseSystem, SlidingReport]:
    if pw.axis != VERTICAL:
        raise ValueError("a constant in the first component breaks the chosen canonical form "
                         "for the horizontal switching line")
    out = add_constant_perturbation(pw, as_rational(eps0)) if as_rational(eps0) != 0 else pw
    return out, sliding_segment(out)
