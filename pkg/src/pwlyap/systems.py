"""Piecewise planar quadratic systems with an invariant straight line.

Zone convention: zone j occupies {(-1)^j h < 0}, so zone 1 is y > 0 for the
horizontal switching line y = 0 and x > 0 for the vertical line x = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .algebra import ParamPoly, as_rational
from .trig import TrigPoly, cos_sin_power

X = ParamPoly.var("x")
Y = ParamPoly.var("y")
STATE = ("x", "y")

HORIZONTAL = "horizontal"
VERTICAL = "vertical"

FAMILY_ALPHABETS = {
    "H": ("d1", "d2", "l1", "l2", "m1", "m2", "n1", "n2", "b"),
    "Hc": ("d", "l", "m1", "m2", "n1", "n2", "b"),
    "V": ("d1", "d2", "l1", "l2", "m1", "m2", "n1", "n2", "b", "eps0"),
    "Vc": ("d1", "d2", "l1", "l2", "m1", "m2", "n", "b", "eps0"),
}
FAMILY_AXIS = {"H": HORIZONTAL, "Hc": HORIZONTAL, "V": VERTICAL, "Vc": VERTICAL}

BOUNDARY_TAGS = (
    "crossing", "sliding", "escaping",
    "tangential-visible", "tangential-invisible", "boundary-equilibrium",
)


@dataclass(frozen=True)
class PlanarPolySystem:
    """Polynomial vector field (dx, dy) in the state variables x, y."""

    dx: ParamPoly
    dy: ParamPoly

    def __post_init__(self):
        for comp in (self.dx, self.dy):
            if comp.degree(STATE) > 2:
                raise ValueError("only fields of degree <= 2 are supported")

    def subs(self, bindings) -> "PlanarPolySystem":
        return PlanarPolySystem(self.dx.subs(bindings), self.dy.subs(bindings))

    def lie(self, f: ParamPoly) -> ParamPoly:
        """Directional derivative X f = dx * f_x + dy * f_y."""
        return self.dx * f.diff("x") + self.dy * f.diff("y")

    def parameters(self) -> set[str]:
        return (self.dx.variables() | self.dy.variables()) - set(STATE)

    def homogeneous(self, k: int) -> tuple[ParamPoly, ParamPoly]:
        return self.dx.homogeneous_part(STATE, k), self.dy.homogeneous_part(STATE, k)

    def evaluate(self, px, py, point: Mapping | None = None):
        pt = dict(point or {})
        pt["x"], pt["y"] = px, py
        return self.dx.evaluate(pt), self.dy.evaluate(pt)


@dataclass(frozen=True)
class PiecewiseSystem:
    """Two planar fields separated by a coordinate axis.

    ``zone1`` lives on y > 0 (horizontal) or x > 0 (vertical); ``zone2`` on the
    other side.
    """

    zone1: PlanarPolySystem
    zone2: PlanarPolySystem
    axis: str = HORIZONTAL
    family: str = "raw"
    bindings: tuple = ()

    def __post_init__(self):
        if self.axis not in (HORIZONTAL, VERTICAL):
            raise ValueError(f"unknown axis {self.axis!r}")

    @property
    def upper(self):
        return self.zone1

    @property
    def lower(self):
        return self.zone2

    def subs(self, bindings) -> "PiecewiseSystem":
        merged = dict(self.bindings)
        merged.update({k: ParamPoly.coerce(v) for k, v in bindings.items()})
        return PiecewiseSystem(
            self.zone1.subs(bindings), self.zone2.subs(bindings), self.axis, self.family,
            tuple(sorted(merged.items())),
        )

    def parameters(self) -> set[str]:
        return self.zone1.parameters() | self.zone2.parameters()

    def h(self) -> ParamPoly:
        return Y if self.axis == HORIZONTAL else X

    def zone_sign(self, zone: int) -> int:
        """Sign of h on the given zone."""
        return 1 if zone == 1 else -1


def interchange_zones(pw: PiecewiseSystem) -> PiecewiseSystem:
    """Swap which field acts on which side of the switching line."""
    return PiecewiseSystem(pw.zone2, pw.zone1, pw.axis, pw.family, pw.bindings)


def canonical_zone(d, l, m, n, b=-1) -> PlanarPolySystem:
    d, l, m, n, b = (ParamPoly.coerce(v) for v in (d, l, m, n, b))
    dx = -Y + d * X + l * X * X + m * X * Y + n * Y * Y
    dy = X + b * X * Y
    return PlanarPolySystem(dx, dy)


@dataclass
class FamilySpec:
    """A canonical family tag plus parameter bindings (unbound symbols stay free)."""

    tag: str
    params: dict = field(default_factory=dict)
    epsilon0: object = None
    point: str | None = None

    def __post_init__(self):
        if self.tag not in FAMILY_ALPHABETS:
            raise ValueError(f"unknown family tag {self.tag!r}")
        if self.point is not None and self.tag != "V":
            raise ValueError("named points belong to the vertical family V")

    def relation(self):
        return named_point(self.point).relation if self.point else None


def _symbols(tag):
    v = ParamPoly.var
    if tag in ("H", "V"):
        return [(v("d1"), v("l1"), v("m1"), v("n1")), (v("d2"), v("l2"), v("m2"), v("n2"))]
    if tag == "Hc":
        return [(v("d"), v("l"), v("m1"), v("n1")), (v("d"), v("l"), v("m2"), v("n2"))]
    return [(v("d1"), v("l1"), v("m1"), v("n")), (v("d2"), v("l2"), v("m2"), v("n"))]


def build_family(spec: FamilySpec | str, params: Mapping | None = None) -> PiecewiseSystem:
    """Canonical piecewise system of the requested family.

    The invariant-line coefficient ``b`` defaults to -1.  Bindings may be
    rationals or ParamPolys.
    """
    if isinstance(spec, str):
        spec = FamilySpec(spec, dict(params or {}))
    alphabet = FAMILY_ALPHABETS[spec.tag]
    bindings = {}
    if spec.point is not None:
        bindings.update(named_point(spec.point).as_dict())
    for name, val in spec.params.items():
        if name not in alphabet:
            raise ValueError(f"symbol {name!r} is not a parameter of family {spec.tag}")
        bindings[name] = val if isinstance(val, ParamPoly) else ParamPoly.const(as_rational(val))
    b = bindings.pop("b", ParamPoly.const(-1))
    eps0 = bindings.pop("eps0", None)
    if spec.epsilon0 is not None:
        eps0 = ParamPoly.const(as_rational(spec.epsilon0))
    zones = [canonical_zone(d, l, m, n, b) for d, l, m, n in _symbols(spec.tag)]
    pw = PiecewiseSystem(zones[0], zones[1], FAMILY_AXIS[spec.tag], spec.tag)
    pw = pw.subs(bindings) if bindings else pw
    if eps0 is not None and not eps0.is_zero():
        pw = add_constant_perturbation(pw, eps0)
    return pw


def add_constant_perturbation(pw: PiecewiseSystem, eps0) -> PiecewiseSystem:
    """Add a constant to the first component of zone 1 (vertical families only).

    The line 1 - y = 0 stays invariant; a sliding or escaping segment of
    length |eps0| opens on the switching line.
    """
    if pw.axis != VERTICAL:
        raise ValueError("a constant in the first component breaks the chosen canonical form "
                         "for the horizontal switching line")
    eps0 = ParamPoly.coerce(eps0)
    z1 = PlanarPolySystem(pw.zone1.dx + eps0, pw.zone1.dy)
    return PiecewiseSystem(z1, pw.zone2, pw.axis, pw.family, pw.bindings + (("eps0", eps0),))


def continuity_check(pw: PiecewiseSystem) -> dict:
    """Do both fields agree identically on the switching line?

    Violations are reported as the coefficients (of powers of the line
    coordinate) that fail to vanish; for canonical families they are phrased
    through the family template, e.g. ``"l1 - l2 != 0"``.
    """
    on_line = {"y": 0} if pw.axis == HORIZONTAL else {"x": 0}
    coord = "x" if pw.axis == HORIZONTAL else "y"
    template = None
    if pw.family in FAMILY_ALPHABETS:
        template = build_family(pw.family)
    violated = []
    for comp in ("dx", "dy"):
        diff = getattr(pw.zone1, comp).subs(on_line) - getattr(pw.zone2, comp).subs(on_line)
        for exps, coeff in sorted(diff.split([coord]).items()):
            label = coeff
            if template is not None:
                tdiff = getattr(template.zone1, comp).subs(on_line) - getattr(template.zone2, comp).subs(on_line)
                label = tdiff.split([coord]).get(exps, coeff)
            violated.append(f"{label} != 0")
    return {"continuous": not violated, "violated": violated}


def _numeric_check(poly: ParamPoly, what: str):
    if poly.variables() - set(STATE):
        raise ValueError(f"numeric parameters required ({what} has free symbols "
                         f"{sorted(poly.variables() - set(STATE))})")


def classify_boundary_point(pw: PiecewiseSystem, point) -> str:
    """Filippov classification of a point of the switching line."""
    px, py = (as_rational(c) for c in point)
    if (pw.axis == HORIZONTAL and py != 0) or (pw.axis == VERTICAL and px != 0):
        raise ValueError("point is not on the switching line")
    h = pw.h()
    pt = {"x": px, "y": py}
    zh, z2h, vanish = [], [], []
    for zone in (pw.zone1, pw.zone2):
        for comp in (zone.dx, zone.dy):
            _numeric_check(comp, "system")
        first = zone.lie(h)
        second = zone.lie(first)
        zh.append(first.evaluate(pt))
        z2h.append(second.evaluate(pt))
        vanish.append(zone.dx.evaluate(pt) == 0 and zone.dy.evaluate(pt) == 0)
    if any(vanish):
        return "boundary-equilibrium"
    plus, minus = zh  # zone 1 is the side where h > 0
    prod = plus * minus
    if prod > 0:
        return "crossing"
    if prod < 0:
        return "escaping" if plus > 0 else "sliding"
    invisible = []
    if plus == 0:
        invisible.append(z2h[0] < 0)
    if minus == 0:
        invisible.append(z2h[1] > 0)
    return "tangential-invisible" if all(invisible) else "tangential-visible"


def normalize_b(pw: PiecewiseSystem, b=None) -> PiecewiseSystem:
    """Rescale (x, y) -> (-x/b, -y/b) so that the invariant line becomes y = 1.

    ``b`` is read from the system (coefficient of x*y in the second component
    of zone 1) when not given; it must be a nonzero rational.
    """
    if b is None:
        coeff = pw.zone1.dy.split(STATE).get((1, 1), ParamPoly())
        if coeff.variables():
            raise ValueError("b must be numeric to rescale")
        b = coeff.constant_term()
    b = as_rational(b)
    if b == 0:
        raise ValueError("degenerate canonical form: b = 0")
    scale = {"x": -X / b, "y": -Y / b}

    def rescale(z: PlanarPolySystem) -> PlanarPolySystem:
        return PlanarPolySystem(z.dx.subs(scale) * (-b), z.dy.subs(scale) * (-b))

    return PiecewiseSystem(rescale(pw.zone1), rescale(pw.zone2), pw.axis, pw.family, pw.bindings)


def invariant_line_defect(z: PlanarPolySystem) -> ParamPoly:
    """dy restricted to y = 1; zero iff the line is invariant."""
    return z.dy.subs({"y": 1})


def rotate_to_horizontal(z: PlanarPolySystem) -> PlanarPolySystem:
    """Rotate by -pi/2: new coordinates (X, Y) = (y, -x)."""
    back = {"x": -Y, "y": X}
    return PlanarPolySystem(z.dy.subs(back), -z.dx.subs(back))


def reversibility_check(pw: PiecewiseSystem, kind: str) -> bool:
    """Exact test of the three time-reversal symmetries used for centers.

    ``y-axis-per-zone``: each field invariant under (x, y, t) -> (-x, y, -t).
    ``y-axis-piecewise``: that change maps zone 1's field onto zone 2's.
    ``x-axis-piecewise``: (x, y, t) -> (x, -y, -t) maps zone 1 onto zone 2.
    """
    flip_x = {"x": -X}
    flip_y = {"y": -Y}
    z1, z2 = pw.zone1, pw.zone2
    if kind == "y-axis-per-zone":
        return all(z.dx.subs(flip_x) == z.dx and z.dy.subs(flip_x) == -z.dy for z in (z1, z2))
    if kind == "y-axis-piecewise":
        return z2.dx == z1.dx.subs(flip_x) and z2.dy == -z1.dy.subs(flip_x)
    if kind == "x-axis-piecewise":
        return z2.dx == -z1.dx.subs(flip_y) and z2.dy == z1.dy.subs(flip_y)
    raise ValueError(f"unknown reversibility kind {kind!r}")


# -- polar form --------------------------------------------------------------

def _trig_of(poly: ParamPoly) -> TrigPoly:
    """Substitute x = cos(theta), y = sin(theta) into a polynomial."""
    acc = TrigPoly()
    for (a, b), coeff in poly.split(STATE).items():
        acc = acc + cos_sin_power(a, b).scale(coeff)
    return acc


@dataclass
class ZonePolar:
    """dr/dtheta = sum R_k r^k / (1 + sum Theta_k r^(k-1)) for one half-plane."""

    R: dict
    Theta: dict
    trace_free: bool

    def S(self, K: int) -> dict:
        """Coefficients S_k, k = 2..K, of the expanded right-hand side."""
        S: dict = {}
        top = max(self.R, default=1)
        for k in range(2, K + 1):
            acc = self.R.get(k, TrigPoly()) if k <= top else TrigPoly()
            for j, th in self.Theta.items():
                if 2 <= j and k - j + 1 >= 2:
                    acc = acc - th * S[k - j + 1]
            S[k] = acc
        return S

    def shifted(self) -> "ZonePolar":
        """The same data as functions of theta - pi."""
        return ZonePolar(
            {k: v.shift_half_turn() for k, v in self.R.items()},
            {k: v.shift_half_turn() for k, v in self.Theta.items()},
            self.trace_free,
        )


def zone_polar(z: PlanarPolySystem) -> ZonePolar:
    for comp in (z.dx, z.dy):
        if not comp.homogeneous_part(STATE, 0).is_zero():
            raise ValueError("the origin must be an equilibrium of both fields")
    R, Th = {}, {}
    c, s = TrigPoly.cos(), TrigPoly.sin()
    for k in (1, 2):
        P, Q = z.homogeneous(k)
        Pt, Qt = _trig_of(P), _trig_of(Q)
        R[k] = c * Pt + s * Qt
        Th[k] = c * Qt - s * Pt
    trace_free = R[1].is_zero() and Th[1] == TrigPoly.const(1)
    return ZonePolar({2: R[2]}, {2: Th[2]}, trace_free) if trace_free else ZonePolar(R, Th, False)


@dataclass
class PolarData:
    """Polar data for the half-plane above (theta in (0, pi)) and below."""

    upper: ZonePolar
    lower: ZonePolar
    rotated: bool

    def S(self, K: int) -> dict:
        return {"upper": self.upper.S(K), "lower": self.lower.S(K)}


def horizontal_frame(pw: PiecewiseSystem) -> tuple[PlanarPolySystem, PlanarPolySystem]:
    """(upper, lower) fields in a frame where the switching line is y = 0."""
    if pw.axis == HORIZONTAL:
        return pw.zone1, pw.zone2
    # after rotating by -pi/2 the left zone (zone 2) lies above
    return rotate_to_horizontal(pw.zone2), rotate_to_horizontal(pw.zone1)


def polar_form(pw: PiecewiseSystem, K: int | None = None) -> PolarData:
    up, low = horizontal_frame(pw)
    data = PolarData(zone_polar(up), zone_polar(low), pw.axis == VERTICAL)
    if K is not None and K < 2:
        raise ValueError("K must be >= 2")
    return data


# -- named weak-focus points of the vertical family ----------------------------

@dataclass(frozen=True)
class NamedPoint:
    """Parameter bindings for a distinguished point; ``relation`` = (symbol, square)
    declares symbol**2 = square (a quadratic extension)."""

    name: str
    bindings: tuple
    relation: tuple | None = None

    def as_dict(self) -> dict:
        return dict(self.bindings)


def _vertical_point(name, l1, l2, n2, relation=None):
    l1, l2, n2 = (ParamPoly.coerce(v) for v in (l1, l2, n2))
    n1 = -2 * l1 + 2 * l2 + n2
    b = {"d1": ParamPoly(), "d2": ParamPoly(), "m1": ParamPoly(), "m2": ParamPoly(),
         "l1": l1, "l2": l2, "n1": n1, "n2": n2}
    return NamedPoint(name, tuple(sorted(b.items())), relation)


def named_point(name: str) -> NamedPoint:
    q = as_rational
    if name == "F1":
        return _vertical_point("F1", q("-13/4"), q("-3/2"), q("-1/2"))
    if name == "F2":
        return _vertical_point("F2", q("9/4"), q("1/2"), q("3/2"))
    if name in ("F3+", "F3-"):
        # the two branches are conjugate under f -> -f
        sign = 1 if name == "F3+" else -1
        l2 = ParamPoly.var("l2")
        f = ParamPoly.var("f")
        l1 = (1 + 6 * l2 + sign * f) / 4
        n2 = ParamPoly.const(q("1/2")) + sign * f / 5
        square = 20 * l2 * l2 + 20 * l2 + 10
        return _vertical_point(name, l1, l2, n2, ("f", square))
    raise KeyError(f"unknown point {name!r}; expected F1, F2, F3+ or F3-")


# roots of the leading factors: the F3 families are excluded there
F3_EXCLUDED_L2 = (as_rational("-3/4"), as_rational("-1/4"), as_rational("-3/2"))
