"""Center families and their certificates.

Four certificate kinds are supported: time-reversal symmetry, Darboux first
integrals (with matching on the switching line), the twin polar change for
H3, and exact specialization of an already certified family.  Every family can
also be checked by brute force with :func:`verify_vanishing`.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from .algebra import ParamPoly, QuadExtScalar, as_rational
from .lyapunov import displacement_series, first_order_trace_term
from .systems import PiecewiseSystem, PlanarPolySystem, build_family, reversibility_check, zone_polar
from .trig import TrigPoly

STATE = ("x", "y")
TRACES = {"H": ("d1", "d2"), "V": ("d1", "d2"), "Hc": ("d",), "Vc": ("d1", "d2")}


class NotInvariant(ValueError):
    pass


# -- data types ----------------------------------------------------------------

@dataclass
class ZoneCertificate:
    curves: list
    exponents: list
    D: ParamPoly | None = None

    def subs(self, bindings) -> "ZoneCertificate":
        D = self.D.subs(bindings) if self.D is not None else None
        return ZoneCertificate([c.subs(bindings) for c in self.curves],
                               [e.subs(bindings) for e in self.exponents], D)

    def conj(self) -> "ZoneCertificate":
        return ZoneCertificate([c.conj() for c in self.curves], [e.conj() for e in self.exponents], self.D)


@dataclass
class DarbouxCertificate:
    """First integrals H_j = prod f_{j,i}^lambda_{j,i} for both zones plus the
    factored common restriction to the switching line."""

    zones: list
    boundary: list
    axis: str = "V"

    @property
    def boundary_variable(self) -> str:
        # the switching line is x = 0 for vertical families, y = 0 otherwise
        return "y" if self.axis == "V" else "x"

    def subs(self, bindings) -> "DarbouxCertificate":
        return DarbouxCertificate([z.subs(bindings) for z in self.zones],
                                  [(f.subs(bindings), e.subs(bindings)) for f, e in self.boundary], self.axis)

    def conj(self) -> "DarbouxCertificate":
        return DarbouxCertificate([z.conj() for z in self.zones],
                                  [(f.conj(), e.conj()) for f, e in self.boundary], self.axis)

    def swap_zones(self) -> "DarbouxCertificate":
        return DarbouxCertificate(self.zones[::-1], list(self.boundary), self.axis)


@dataclass
class CenterFamily:
    id: str
    family: str
    constraints: list
    criterion: str
    nondegenerate: list = field(default_factory=list)
    excluded: dict = field(default_factory=dict)
    symmetry: str | None = None
    certificate: DarbouxCertificate | None = None
    parent: str | None = None
    parent_bindings: list = field(default_factory=list)

    @property
    def axis(self) -> str:
        return "V" if self.family.startswith("V") else "H"

    def bindings(self) -> dict:
        """Constraints composed into a single substitution map."""
        out: dict = {}
        for name, expr in self.constraints:
            out = {k: v.subs({name: expr}) for k, v in out.items()}
            out[name] = expr
        return out

    def free_parameters(self) -> list[str]:
        return sorted(self.system().parameters())

    def system(self, extra: dict | None = None) -> PiecewiseSystem:
        """The family's piecewise system with zero traces."""
        pw = build_family(self.family).subs({t: 0 for t in TRACES[self.family]})
        for name, expr in self.constraints:
            pw = pw.subs({name: expr})
        if extra:
            pw = pw.subs(extra)
        return pw


# -- catalog -----------------------------------------------------------------

def _qe(spec, D=None) -> QuadExtScalar:
    if isinstance(spec, str):
        spec = [spec]
    parts = [ParamPoly.parse(s) for s in spec] + [ParamPoly.const(0), ParamPoly.const(1)][len(spec) - 1:]
    a, b, c = parts[0], parts[1], parts[2]
    return QuadExtScalar(a, b, c, D if not b.is_zero() or D is not None else None)


def _parse_certificate(data: dict, axis: str) -> DarbouxCertificate:
    zones = []
    for z in data["zones"]:
        D = ParamPoly.parse(z["D"]) if "D" in z else None
        zones.append(ZoneCertificate([_qe(c, D) for c in z["curves"]],
                                     [_qe(e, D) for e in z["exponents"]], D))
    bd = data["boundary"]
    D = ParamPoly.parse(bd["D"]) if "D" in bd else None
    boundary = [(_qe(f, D), _qe(e, D)) for f, e in bd["factors"]]
    return DarbouxCertificate(zones, boundary, axis)


@lru_cache(maxsize=1)
def _raw_catalog() -> dict:
    text = resources.files("pwlyap.data").joinpath("centers.json").read_text()
    return json.loads(text)


def catalog_list() -> list[CenterFamily]:
    out = []
    for item in _raw_catalog()["families"]:
        axis = "V" if item["family"].startswith("V") else "H"
        fam = CenterFamily(
            id=item["id"],
            family=item["family"],
            constraints=[(k, ParamPoly.parse(v)) for k, v in item["constraints"]],
            criterion=item["criterion"],
            nondegenerate=[ParamPoly.parse(s) for s in item.get("nondegenerate", [])],
            symmetry=item.get("symmetry"),
            parent=item.get("parent"),
            parent_bindings=[(k, ParamPoly.parse(v)) for k, v in item.get("parent_bindings", [])],
        )
        if "certificate" in item:
            fam.certificate = _parse_certificate(item["certificate"], axis)
        out.append(fam)
    return out


def catalog_get(family_id: str) -> CenterFamily:
    for fam in catalog_list():
        if fam.id == family_id:
            return fam
    raise KeyError(f"unknown center family {family_id!r}")


# -- Lyapunov vanishing ----------------------------------------------------------

def verify_vanishing(family: CenterFamily | PiecewiseSystem, Kmax: int = 9) -> bool:
    """W_1 .. W_Kmax vanish identically in the free parameters."""
    pw = family.system() if isinstance(family, CenterFamily) else family
    if not first_order_trace_term(pw).is_zero():
        return False
    return all(w.is_zero() for w in displacement_series(pw, Kmax))


# -- invariant curves ------------------------------------------------------------

def _as_qe(f, D=None) -> QuadExtScalar:
    if isinstance(f, QuadExtScalar):
        return f
    return QuadExtScalar(ParamPoly.coerce(f), 0, 1, D)


def _lie(system: PlanarPolySystem, f: QuadExtScalar) -> QuadExtScalar:
    return QuadExtScalar(system.lie(f.a), system.lie(f.b) if not f.b.is_zero() else ParamPoly(), f.c, f.D)


def _state_degree(f: QuadExtScalar) -> int:
    return max(f.a.degree(STATE), f.b.degree(STATE) if not f.b.is_zero() else 0)


def _truncate(f: QuadExtScalar, deg: int) -> QuadExtScalar:
    return QuadExtScalar(f.a.truncate(STATE, deg), f.b.truncate(STATE, deg), f.c, f.D)


def _at_origin(f: QuadExtScalar) -> QuadExtScalar:
    return f.subs({"x": 0, "y": 0})


def normalize_curve(f) -> QuadExtScalar:
    """Scale a curve so that its value at the origin is 1."""
    f = _as_qe(f)
    f0 = _at_origin(f)
    if f0.is_zero():
        raise ValueError("curve passes through the origin; cannot normalize")
    return f / f0


def invariant_curve_cofactor(system: PlanarPolySystem, f) -> QuadExtScalar:
    """Cofactor K with X f = K f, by power-series division and an exact check."""
    f = _as_qe(f)
    if f.is_zero():
        raise ValueError("zero curve")
    f = normalize_curve(f)
    Xf = _lie(system, f)
    q = max(_state_degree(Xf) - _state_degree(f), 0)
    # 1/f = sum (1 - f)^i, truncated at degree q
    g = _truncate(QuadExtScalar(1, 0, 1, f.D) - f, q)
    inv = QuadExtScalar(1, 0, 1, f.D)
    term = QuadExtScalar(1, 0, 1, f.D)
    for _ in range(q):
        term = _truncate(term * g, q)
        inv = inv + term
    K = _truncate(Xf * inv, q)
    if not (Xf - K * f).is_zero():
        raise NotInvariant("not invariant: X f - K f has a nonzero remainder")
    return K


# -- Darboux -------------------------------------------------------------------

@dataclass
class Report:
    family: str
    criterion: str
    passed: bool
    diagnostics: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"family": self.family, "criterion": self.criterion, "pass": self.passed,
                "diagnostics": self.diagnostics}


def zone_fields(pw: PiecewiseSystem) -> tuple[PlanarPolySystem, PlanarPolySystem]:
    return pw.zone1, pw.zone2


def verify_darboux(cert: DarbouxCertificate, pw: PiecewiseSystem, diagnostics: list | None = None) -> bool:
    """All curves invariant and sum lambda_i K_i = 0 in each zone."""
    diag = diagnostics if diagnostics is not None else []
    ok = True
    for j, (zc, field_) in enumerate(zip(cert.zones, zone_fields(pw)), start=1):
        total = QuadExtScalar(0, 0, 1, zc.D)
        for i, (f, lam) in enumerate(zip(zc.curves, zc.exponents), start=1):
            try:
                K = invariant_curve_cofactor(field_, f)
            except NotInvariant:
                diag.append(f"zone {j}: curve {i} is not invariant")
                ok = False
                continue
            total = total + lam * K
        if ok and not total.is_zero():
            diag.append(f"zone {j}: sum of lambda*K is not zero")
            ok = False
    return ok


def _restrict(f: QuadExtScalar, var: str) -> list:
    """Coefficients (QuadExt) of f restricted to the switching line, in ``var``."""
    other = "x" if var == "y" else "y"
    g = f.subs({other: 0})
    top = _state_degree(g)
    coeffs = []
    for e in range(top + 1):
        a = g.a.split([var]).get((e,), ParamPoly())
        b = g.b.split([var]).get((e,), ParamPoly()) if not g.b.is_zero() else ParamPoly()
        coeffs.append(QuadExtScalar(a, b, g.c, g.D if not b.is_zero() else None))
    while len(coeffs) > 1 and coeffs[-1].is_zero():
        coeffs.pop()
    return coeffs


def _divide_out(p: list, f: list):
    """Exact quotient p / f for univariate polynomials with f[0] = 1, or None."""
    if len(f) > len(p):
        return None
    n = len(p) - len(f) + 1
    q = []
    for k in range(n):
        acc = p[k]
        for i in range(1, min(k, len(f) - 1) + 1):
            acc = acc - f[i] * q[k - i]
        q.append(acc)
    # remainder check
    for k in range(len(p)):
        acc = QuadExtScalar(0)
        for i in range(len(f)):
            if 0 <= k - i < len(q):
                acc = acc + f[i] * q[k - i]
        if not (acc - p[k]).is_zero():
            return None
    return q


def _same(a: QuadExtScalar, b: QuadExtScalar) -> bool:
    try:
        return (a - b).is_zero()
    except ValueError:
        # different extensions: equal only if both lie in the base field
        if not a.b.is_zero() or not b.b.is_zero():
            return False
        return (a.a * b.c - b.a * a.c).is_zero()


def boundary_exponents(cert: DarbouxCertificate, zone: int) -> list | None:
    """Exponent of each boundary factor in H_zone restricted to the line, or None
    if some curve does not split over the boundary factors."""
    var = cert.boundary_variable
    factors = [_restrict(normalize_curve(f), var) for f, _ in cert.boundary]
    zc = cert.zones[zone]
    D = zc.D
    exps = [QuadExtScalar(0, 0, 1, D) for _ in factors]
    for f, lam in zip(zc.curves, zc.exponents):
        p = _restrict(normalize_curve(f), var)
        progress = True
        while len(p) > 1 and progress:
            progress = False
            for idx, fac in enumerate(factors):
                q = _divide_out(p, fac)
                if q is not None:
                    exps[idx] = exps[idx] + lam
                    p = q
                    progress = True
                    break
        if len(p) != 1 or not (p[0] - 1).is_zero():
            return None
    return exps


def verify_matching(cert: DarbouxCertificate, diagnostics: list | None = None) -> bool:
    """Both zones restrict to the certificate's common boundary form."""
    diag = diagnostics if diagnostics is not None else []
    for zone in (0, 1):
        exps = boundary_exponents(cert, zone)
        if exps is None:
            diag.append(f"zone {zone + 1}: restriction does not factor over the boundary form")
            return False
        for idx, (got, (_, want)) in enumerate(zip(exps, cert.boundary)):
            if not _same(got, want):
                diag.append(f"zone {zone + 1}: exponent of boundary factor {idx + 1} differs")
                return False
    return True


def boundary_form_str(cert: DarbouxCertificate) -> str:
    parts = []
    for f, e in cert.boundary:
        parts.append(f"({_fmt_qe(f)})^({_fmt_qe(e)})")
    return "*".join(parts)


def _fmt_qe(q: QuadExtScalar) -> str:
    s = q.a.to_str()
    if not q.b.is_zero():
        s = f"{s} + ({q.b.to_str()})*sqrt({q.D.to_str()})"
    if q.c != ParamPoly.const(1):
        s = f"({s})/({q.c.to_str()})"
    return s


_SQUARE = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)]


def spot_check_well_defined(cert: DarbouxCertificate, pw: PiecewiseSystem, samples: int = 5,
                            seed: int = 0, radius: str = "1/20") -> list:
    """At random rational parameters with real square roots, every curve is positive
    on a small disc around the origin (so each H_j is a real analytic function there)."""
    rng = random.Random(seed)
    r = as_rational(radius)
    names = sorted(pw.parameters())
    found = []
    tries = 0
    while len(found) < samples and tries < 500:
        tries += 1
        point = {n: as_rational(f"{rng.randint(-20, 20)}/{rng.randint(1, 10)}") for n in names}
        try:
            good = True
            for zc in cert.zones:
                if zc.D is not None and float(zc.D.evaluate(point)) <= 0:
                    good = False
                    break
                for f in zc.curves:
                    f0 = normalize_curve(f.subs(point))
                    for px, py in _SQUARE:
                        pt = {"x": px * r, "y": py * r}
                        val = _float_qe(f0, pt)
                        if val <= 0:
                            good = False
            if good:
                found.append(point)
        except (ZeroDivisionError, ValueError):
            continue
    return found


def _float_qe(q: QuadExtScalar, pt) -> float:
    import math

    a = float(q.a.evaluate(pt))
    c = float(q.c.evaluate(pt))
    if q.b.is_zero():
        return a / c
    return (a + float(q.b.evaluate(pt)) * math.sqrt(float(q.D.evaluate(pt)))) / c


# -- twin transformation -------------------------------------------------------

def twin_functions(l1, m2, n2) -> tuple[TrigPoly, TrigPoly]:
    l1, m2, n2 = (ParamPoly.coerce(v) for v in (l1, m2, n2))
    c1, s1, c3, s3 = TrigPoly.cos(1), TrigPoly.sin(1), TrigPoly.cos(3), TrigPoly.sin(3)
    A1 = s1.scale(3 - l1 - 3 * n2) + c1.scale(m2) - s3.scale(1 + l1 - n2) - c3.scale(m2)
    A2 = s1.scale(1 + l1 + 3 * n2) + c1.scale(m2) + s3.scale(1 + l1 - n2) - c3.scale(m2)
    return A1, A2


def _series_mul(a: list, b: list, N: int) -> list:
    out = [TrigPoly() for _ in range(N + 1)]
    for i, ai in enumerate(a):
        if ai.is_zero():
            continue
        for j in range(0, N + 1 - i):
            if j < len(b) and not b[j].is_zero():
                out[i + j] = out[i + j] + ai * b[j]
    return out


def transformed_equation(field_: PlanarPolySystem, A: TrigPoly, N: int = 12) -> list:
    """Coefficients G_k(theta), k = 0..N, of dR/dtheta after r = 4R/(4 + A R)."""
    zp = zone_polar(field_)
    S = zp.S(N + 1)
    # r as a series in R: sum_{k>=1} (-A/4)^(k-1) R^k
    r = [TrigPoly() for _ in range(N + 1)]
    step = A.scale(as_rational("-1/4"))
    term = TrigPoly.const(1)
    for k in range(1, N + 1):
        r[k] = term
        term = term * step
    F = [TrigPoly() for _ in range(N + 1)]
    power = r
    for m in range(2, N + 1):
        power = _series_mul(power, r, N)
        if m in S:
            for k in range(N + 1):
                if not power[k].is_zero():
                    F[k] = F[k] + S[m] * power[k]
    factor = [TrigPoly.const(1), A.scale(as_rational("1/2")), (A * A).scale(as_rational("1/16"))]
    G = _series_mul(factor, F, N)
    G[2] = G[2] + A.derivative().scale(as_rational("1/4"))
    return G


def twin_identity(pw: PiecewiseSystem, A1: TrigPoly, A2: TrigPoly, N: int = 12,
                  diagnostics: list | None = None) -> bool:
    """A1 = A2 on the switching line and G2(theta, R) + G1(-theta, R) = 0 to R-order N."""
    diag = diagnostics if diagnostics is not None else []
    for theta0 in (0, 2):
        if A1.eval_special(theta0) != A2.eval_special(theta0):
            diag.append("A1 and A2 differ on the switching line")
            return False
    G1 = transformed_equation(pw.zone1, A1, N)
    G2 = transformed_equation(pw.zone2, A2, N)
    for k in range(N + 1):
        if not (G2[k] + G1[k].reflect()).is_zero():
            diag.append(f"G2(theta, R) + G1(-theta, R) has a nonzero R^{k} term")
            return False
    return True


def verify_twin_H3(params: dict | None = None, N: int = 12, diagnostics: list | None = None,
                   family: str = "H", check_preconditions: bool = True) -> bool:
    """Check the twin polar change for the H3 family through R-order N.

    ``params`` binds any of l1, l2, m1, m2, n1, n2 (l/m1/m2/n1/n2 for the
    continuous family).  Off H3 this raises, unless ``check_preconditions``
    is false, in which case the identity is simply tested (and fails).
    """
    diag = diagnostics if diagnostics is not None else []
    params = {k: ParamPoly.coerce(v) if not isinstance(v, ParamPoly) else v for k, v in (params or {}).items()}
    pw = build_family(family).subs({t: 0 for t in TRACES[family]}).subs(params)
    if family == "Hc":
        l1 = l2 = ParamPoly.var("l").subs(params)
    else:
        l1 = ParamPoly.var("l1").subs(params)
        l2 = ParamPoly.var("l2").subs(params)
    m1, m2, n1, n2 = (ParamPoly.var(s).subs(params) for s in ("m1", "m2", "n1", "n2"))
    on_h3 = (l1 + l2 + 1).is_zero() and (m1 - m2).is_zero() and (n1 + n2 - 1).is_zero()
    if not on_h3:
        if check_preconditions:
            raise ValueError("parameters are not on H3: need l1 + l2 + 1 = m1 - m2 = n1 + n2 - 1 = 0")
        diag.append("parameters are off H3")
    A1, A2 = twin_functions(l1, m2, n2)
    return twin_identity(pw, A1, A2, N, diag)


# -- dispatch ------------------------------------------------------------------

def certify(family: CenterFamily | str) -> Report:
    fam = catalog_get(family) if isinstance(family, str) else family
    diag: list = []
    crit = fam.criterion
    if crit == "reversible":
        ok = reversibility_check(fam.system(), fam.symmetry)
        if not ok:
            diag.append(f"not invariant under the {fam.symmetry} reversal")
        return Report(fam.id, f"reversible:{fam.symmetry}", ok, diag)
    if crit == "darboux":
        pw = fam.system()
        ok = verify_darboux(fam.certificate, pw, diag)
        ok = verify_matching(fam.certificate, diag) and ok
        if ok:
            n = len(spot_check_well_defined(fam.certificate, pw))
            diag.append(f"well-defined near the origin at {n} sampled parameter points")
            if fam.certificate.zones and any(z.D is not None for z in fam.certificate.zones):
                diag.append("square roots are formal where the discriminant is negative")
        return Report(fam.id, "darboux", ok, diag)
    if crit == "twin":
        ok = verify_twin_H3(fam.bindings(), diagnostics=diag, family=fam.family)
        return Report(fam.id, "twin", ok, diag)
    if crit == "specialization":
        parent = catalog_get(fam.parent)
        mine = fam.system()
        theirs = parent.system(dict(fam.parent_bindings))
        same = mine.zone1 == theirs.zone1 and mine.zone2 == theirs.zone2
        if not same:
            diag.append(f"system is not the stated specialization of {parent.id}")
        sub = certify(parent)
        diag.append(f"parent {parent.id}: {'pass' if sub.passed else 'fail'}")
        return Report(fam.id, f"specialization:{parent.id}", same and sub.passed, diag)
    raise ValueError(f"unknown criterion {crit!r}")
