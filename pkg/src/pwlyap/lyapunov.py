"""Half-return maps, their reversion, and the Lyapunov quantities W_k.

The displacement map is taken as  Delta(r0) = Pi_plus(r0) - Pi_minus^{-1}(r0),
so W_k > 0 at the first nonzero order means the focus is unstable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from gmpy2 import mpq

from .algebra import ParamPoly, PiPoly, Truncation, _raw_mul, as_rational
from .systems import PiecewiseSystem, PolarData, ZonePolar, polar_form
from .trig import TrigPoly, trig_integrate, trig_mul

_HALF = mpq(1, 2)


class CoefficientRing:
    """Hooks applied to every coefficient product: an optional jet truncation
    and an optional quadratic relation ``symbol**2 = square``."""

    def __init__(self, trunc: Truncation | None = None, relation: tuple | None = None):
        self.trunc = trunc
        self.relation = relation

    def reduce_dict(self, terms: dict) -> dict:
        if self.relation is not None:
            name, square = self.relation
            terms = ParamPoly._wrap(terms).reduce_square(name, square)._terms
        if self.trunc is not None:
            terms = self.trunc.apply(terms)
        return terms

    def reduce(self, p: ParamPoly) -> ParamPoly:
        return ParamPoly._wrap(self.reduce_dict(p._terms))

    def reduce_pi(self, w: PiPoly) -> PiPoly:
        return w.map(self.reduce)

    @property
    def trivial(self) -> bool:
        return self.trunc is None and self.relation is None

    def mul(self, f: TrigPoly, g: TrigPoly) -> TrigPoly:
        if self.trivial:
            return trig_mul(f, g)
        return trig_mul(f, g, self.trunc, self.reduce_dict)

    def pimul(self, a: PiPoly, b: PiPoly) -> PiPoly:
        return self.reduce_pi(a * b)


PLAIN = CoefficientRing()


@dataclass
class ReturnSeries:
    """Coefficients of r0^1 .. r0^K of a half-return map (index 0 is r0^1)."""

    coefficients: list

    @property
    def K(self) -> int:
        return len(self.coefficients)

    def coeff(self, k: int) -> PiPoly:
        return self.coefficients[k - 1]

    def __eq__(self, other):
        return isinstance(other, ReturnSeries) and self.coefficients == other.coefficients


def solution_series(zp: ZonePolar, K: int, ring: CoefficientRing = PLAIN) -> list[TrigPoly]:
    """u_1 .. u_K of r(theta, r0) = sum u_k(theta) r0^k with r(0) = r0.

    Uses  r' (1 + Theta_2 r) = R_2 r^2, i.e.  u_k' = R_2 A_k - Theta_2 A_k' / 2
    with A_k the r0^k coefficient of r^2.
    """
    if not zp.trace_free:
        raise ValueError("the linear part must be the rotation (-y, x); set the traces to zero")
    if set(zp.R) != {2} or set(zp.Theta) != {2}:
        raise ValueError("only quadratic fields are supported")
    R2 = zp.R[2]
    half_T2 = zp.Theta[2].scale(-_HALF)
    u = [None, TrigPoly.const(1)]
    for k in range(2, K + 1):
        A = TrigPoly()
        for i in range(1, k // 2 + 1):
            j = k - i
            if i == 1:
                prod = u[j]
            else:
                prod = ring.mul(u[i], u[j])
            A = A + (prod if i == j else prod.scale(2))
        du = ring.mul(R2, A) + ring.mul(half_T2, A.derivative())
        u.append(trig_integrate(du))
    return u[1:]


def half_return_series(polar: PolarData | ZonePolar, branch: str = "upper", K: int = 6,
                       ring: CoefficientRing = PLAIN) -> ReturnSeries:
    """Taylor coefficients of the half-return map across the upper or lower half-plane."""
    if isinstance(polar, PolarData):
        zp = polar.upper if branch == "upper" else polar.lower
    else:
        zp = polar
    if branch == "lower":
        zp = zp.shifted()
    elif branch != "upper":
        raise ValueError("branch must be 'upper' or 'lower'")
    u = solution_series(zp, K, ring)
    return ReturnSeries([ring.reduce_pi(uk.eval_special(2)) for uk in u])


def compose(s: ReturnSeries, t: ReturnSeries, ring: CoefficientRing = PLAIN) -> ReturnSeries:
    """(s o t) truncated to the common order."""
    K = min(s.K, t.K)
    tp = _power_table(t.coefficients, K, ring)
    out = []
    for k in range(1, K + 1):
        acc = PiPoly()
        for j in range(1, k + 1):
            acc = acc + ring.pimul(s.coeff(j), tp[j][k])
        out.append(acc)
    return ReturnSeries(out)


def _power_table(t: Sequence[PiPoly], K: int, ring: CoefficientRing):
    """tp[j][m] = coefficient of r^m in t(r)^j, for 1 <= j <= m <= K."""
    tp = [[PiPoly()] * (K + 1) for _ in range(K + 1)]
    for m in range(1, K + 1):
        tp[1][m] = t[m - 1]
    for j in range(2, K + 1):
        for m in range(j, K + 1):
            acc = PiPoly()
            for i in range(1, m - j + 2):
                if not t[i - 1].is_zero() and not tp[j - 1][m - i].is_zero():
                    acc = acc + ring.pimul(t[i - 1], tp[j - 1][m - i])
            tp[j][m] = acc
    return tp


def series_invert(s: ReturnSeries, ring: CoefficientRing = PLAIN) -> ReturnSeries:
    """Compositional inverse of a series tangent to the identity."""
    if s.coeff(1) != PiPoly([1]):
        raise ValueError("leading coefficient must be 1; handle the trace before inverting")
    K = s.K
    t: list = [PiPoly([1])]
    # tp[j][m] for the partially known inverse, filled column by column
    tp = {1: {1: PiPoly([1])}}
    for k in range(2, K + 1):
        for j in range(2, k + 1):
            acc = PiPoly()
            for i in range(1, k - j + 2):
                prev = tp.get(j - 1, {}).get(k - i)
                if prev is not None and not prev.is_zero() and not t[i - 1].is_zero():
                    acc = acc + ring.pimul(t[i - 1], prev)
            tp.setdefault(j, {})[k] = acc
        tk = PiPoly()
        for j in range(2, k + 1):
            if not s.coeff(j).is_zero():
                tk = tk - ring.pimul(s.coeff(j), tp[j][k])
        t.append(tk)
        tp[1][k] = tk
    return ReturnSeries(t)


# -- trails and Lyapunov lists ---------------------------------------------

@dataclass(frozen=True)
class TrailStep:
    """Substitution applied to every W_k with k >= start."""

    start: int
    bindings: tuple
    label: str = ""

    @classmethod
    def make(cls, start: int, bindings: Mapping, label: str = "") -> "TrailStep":
        items = tuple(sorted((k, ParamPoly.coerce(v) if not isinstance(v, ParamPoly) else v)
                             for k, v in bindings.items()))
        if not label:
            label = ", ".join(f"{k}={v}" for k, v in items)
        return cls(start, items, label)

    def as_dict(self) -> dict:
        return dict(self.bindings)


def _zero_traces(names: Iterable[str]) -> TrailStep:
    return TrailStep.make(1, {n: 0 for n in names}, ", ".join(f"{n}=0" for n in names))


def reduced_trail(family: str) -> list[TrailStep]:
    """The successive eliminations used when displaying each family's W_k."""
    l1, l2, n2 = (ParamPoly.var(s) for s in ("l1", "l2", "n2"))
    if family == "Hc":
        return [_zero_traces(["d"]),
                TrailStep.make(3, {"m1": ParamPoly.var("m2")}, "m1=m2")]
    if family == "H":
        return [_zero_traces(["d1", "d2"]),
                TrailStep.make(3, {"m1": ParamPoly.var("m2")}, "m1=m2"),
                TrailStep.make(4, {"n1": -l1 - l2 - n2}, "n1=-l1-l2-n2"),
                TrailStep.make(5, {"n2": -(3 * l1 + l2) / 4}, "n2=-(3*l1+l2)/4")]
    if family == "Vc":
        return [_zero_traces(["d1", "d2"]),
                TrailStep.make(3, {"l1": l2}, "l1=l2")]
    if family == "V":
        return [_zero_traces(["d1", "d2"]),
                TrailStep.make(3, {"n1": -2 * l1 + 2 * l2 + n2}, "n1=-2*l1+2*l2+n2")]
    return raw_trail(family)


def raw_trail(family: str) -> list[TrailStep]:
    if family == "Hc":
        return [_zero_traces(["d"])]
    return [_zero_traces(["d1", "d2"])]


@dataclass
class LyapunovList:
    """W_1 .. W_K as PiPolys together with the reduction trail that produced them.

    ``W[1]`` is the first-order part in the traces, pi (d1 + d2) / 2 (pi d for
    the continuous horizontal family); its exact value is
    :func:`first_lyapunov_exact`.
    """

    W: dict
    trail: list = field(default_factory=list)
    relation: tuple | None = None

    def __getitem__(self, k: int) -> PiPoly:
        return self.W[k]

    @property
    def K(self) -> int:
        return max(self.W)

    def to_json(self) -> dict:
        return {
            "W": {str(k): self.W[k].to_str() for k in sorted(self.W)},
            "trail": [{"from_order": s.start, "substitution": s.label} for s in self.trail],
            **({"relation": f"{self.relation[0]}^2 = {self.relation[1]}"} if self.relation else {}),
        }


def first_order_trace_term(pw: PiecewiseSystem) -> PiPoly:
    """Linear part of W_1 in the trace parameters: pi/2 times the sum of traces."""
    total = ParamPoly()
    for z in (pw.zone1, pw.zone2):
        trace = z.dx.diff("x") + z.dy.diff("y")
        total = total + trace.subs({"x": 0, "y": 0})
    return PiPoly([0, total / 2])


def first_lyapunov_exact(d1: float, d2: float) -> float:
    """Exact coefficient of r0 in Delta for traces d1 (upper) and d2 (lower).

    A linear focus with trace d and determinant 1 maps a ray to the opposite
    ray in time pi/beta, scaling by exp(pi d / (2 beta)), beta = sqrt(1 - d^2/4).
    """
    def mult(d):
        return math.exp(math.pi * d / (2.0 * math.sqrt(1.0 - d * d / 4.0)))

    return mult(d1) - 1.0 / mult(d2)


def _stages(trail: Sequence[TrailStep], K: int):
    """Group orders 2..K by the cumulative substitution in force."""
    starts = sorted({1} | {s.start for s in trail if s.start <= K})
    for idx, start in enumerate(starts):
        end = starts[idx + 1] - 1 if idx + 1 < len(starts) else K
        steps = [s for s in trail if s.start <= start]
        yield max(start, 1), end, steps


def _apply_steps(obj, steps):
    for s in steps:
        obj = obj.subs(s.as_dict())
    return obj


def displacement_series(pw: PiecewiseSystem, K: int, ring: CoefficientRing = PLAIN) -> list[PiPoly]:
    """Coefficients of r0^1..r0^K of Delta = Pi_plus - Pi_minus^{-1} (traces must vanish)."""
    polar = polar_form(pw, K)
    plus = half_return_series(polar, "upper", K, ring)
    minus = half_return_series(polar, "lower", K, ring)
    minus_inv = series_invert(minus, ring)
    return [ring.reduce_pi(plus.coeff(k) - minus_inv.coeff(k)) for k in range(1, K + 1)]


def displacement_coeffs(pw: PiecewiseSystem, K: int, trail: Sequence[TrailStep] | str | None = "raw",
                        ring: CoefficientRing | None = None, relation: tuple | None = None) -> LyapunovList:
    """W_1..W_K of a piecewise system under a reduction trail.

    ``trail`` is a list of :class:`TrailStep`, or ``"raw"``/``"reduced"`` for the
    family's built-in trails.  Orders sharing the same cumulative substitution
    are computed together; each W_k is exact.
    """
    if K < 2:
        raise ValueError("K must be >= 2")
    if isinstance(trail, str) or trail is None:
        trail = reduced_trail(pw.family) if trail in ("reduced", "paper") else raw_trail(pw.family)
    trail = list(trail)
    if ring is None:
        ring = CoefficientRing(relation=relation) if relation else PLAIN
    W = {}
    W[1] = ring.reduce_pi(_apply_steps(first_order_trace_term(pw), [s for s in trail if s.start <= 1
                                                                       and not _is_trace_step(s)]))
    for start, end, steps in _stages(trail, K):
        if end < 2:
            continue
        sub = _apply_steps(pw, steps)
        _require_trace_free(sub)
        series = displacement_series(sub, end, ring)
        for k in range(max(start, 2), end + 1):
            W[k] = series[k - 1]
    return LyapunovList(W, trail, ring.relation)


def _is_trace_step(step: TrailStep) -> bool:
    return all(name in ("d", "d1", "d2") for name, _ in step.bindings)


def _require_trace_free(pw: PiecewiseSystem):
    for z in (pw.zone1, pw.zone2):
        lin = (z.dx.diff("x") + z.dy.diff("y")).subs({"x": 0, "y": 0})
        if not lin.is_zero():
            raise ValueError("traces must vanish beyond W_1; put d=0 in the trail")


def _sign(w: PiPoly) -> int:
    """Sign of a pi-polynomial with rational coefficients."""
    import mpmath

    with mpmath.workdps(60):
        val = mpmath.mpf(0)
        for i, c in enumerate(w.coeffs):
            q = c.constant_term()
            val += mpmath.mpf(q.numerator) / q.denominator * mpmath.pi ** i
        if val == 0:
            return 0
        return 1 if val > 0 else -1


@dataclass
class WeakFocusResult:
    order: int | None
    value: PiPoly | None
    sign: int
    kmax: int
    center_up_to: int | None = None

    def to_json(self) -> dict:
        if self.order is None:
            return {"center_up_to": self.center_up_to}
        return {"order": self.order, "W": self.value.to_str(), "sign": self.sign}


def weak_focus_order(pw: PiecewiseSystem, kmax: int = 12) -> WeakFocusResult:
    """First nonvanishing W_k at a fully numeric parameter point."""
    if pw.parameters():
        raise ValueError(f"all parameters must be numeric; free: {sorted(pw.parameters())}")
    w1 = first_order_trace_term(pw)
    if not w1.is_zero():
        return WeakFocusResult(1, w1, _sign(w1), kmax)
    series = displacement_series(pw, kmax)
    for k in range(2, kmax + 1):
        w = series[k - 1]
        if not w.is_zero():
            return WeakFocusResult(k, w, _sign(w), kmax)
    return WeakFocusResult(None, None, 0, kmax, center_up_to=kmax)


def pi_sign(w: PiPoly) -> int:
    """Sign of a numeric pi-polynomial (exact up to 60 digits)."""
    return _sign(w)


# -- symbolic Picard route (independent check of the fast recursion) ---------

def picard_half_map(S: Mapping[int, TrigPoly], K: int) -> list[PiPoly]:
    """Half-return coefficients from  u_k' = [r0^k] sum_m S_m (sum_j u_j r0^j)^m."""
    u = [None, TrigPoly.const(1)]
    powers = {1: {1: TrigPoly.const(1)}}  # powers[m][k] = [r0^k] r^m
    for k in range(2, K + 1):
        for m in range(2, k + 1):
            acc = TrigPoly()
            for i in range(1, k - m + 2):
                prev = powers.get(m - 1, {}).get(k - i)
                if prev is not None:
                    acc = acc + u[i] * prev
            powers.setdefault(m, {})[k] = acc
        du = TrigPoly()
        for m in range(2, k + 1):
            if m in S:
                du = du + S[m] * powers[m][k]
        u.append(trig_integrate(du))
        powers[1][k] = u[k]
    return [uk.eval_special(2) for uk in u[1:]]
