"""Command-line front end.  Exit codes: 0 ok, 1 verification failure, 2 usage or parse error."""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
from dataclasses import dataclass

from .algebra import ParamPoly, as_rational
from .systems import (FAMILY_ALPHABETS, FamilySpec, PiecewiseSystem, PlanarPolySystem, build_family,
                      classify_boundary_point)

_RATIONAL = re.compile(r"^-?\d+(/\d+)?$")
SUBCOMMANDS = ("lyap", "centers", "darboux", "classify", "delta", "cycles", "expand", "unfold")


class SpecError(ValueError):
    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


@dataclass
class RunConfig:
    subcommand: str
    input: str | None = None
    order: int = 6
    trail: str = "raw"
    format: str = "json"
    jobs: int = 1

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise SpecError("subcommand", f"unknown subcommand {self.subcommand!r}")
        if not 2 <= self.order <= 16:
            raise SpecError("--order", "order must lie in [2, 16]")
        if self.trail not in ("raw", "reduced", "paper"):
            raise SpecError("--trail", "trail must be raw or reduced")
        if self.format not in ("json", "csv", "text"):
            raise SpecError("--format", "format must be json, csv or text")


def parse_rational(text, where: str):
    if not isinstance(text, str) or not _RATIONAL.match(text.strip()):
        if isinstance(text, (str, float)) and any(ch in str(text) for ch in ".eE"):
            raise SpecError(where, f"decimal literal {text!r} not allowed; write an integer or p/q string")
        raise SpecError(where, f"expected an integer or p/q string, got {text!r}")
    return as_rational(text.strip())


def _parse_terms(items, where: str) -> ParamPoly:
    if not isinstance(items, list):
        raise SpecError(where, "expected a list of [coef, i, j]")
    total = ParamPoly()
    x, y = ParamPoly.var("x"), ParamPoly.var("y")
    for idx, item in enumerate(items):
        w = f"{where}[{idx}]"
        if not (isinstance(item, list) and len(item) == 3 and all(isinstance(e, int) and e >= 0 for e in item[1:])):
            raise SpecError(w, "expected [coef, i, j] with non-negative integer exponents")
        total = total + x ** item[1] * y ** item[2] * parse_rational(item[0], w + "[0]")
    return total


def _json_where(text: str, key: str) -> str:
    for n, line in enumerate(text.splitlines(), start=1):
        if f'"{key}"' in line:
            return f"line {n}, field {key!r}"
    return f"field {key!r}"


def parse_system_spec(text: str) -> FamilySpec | PiecewiseSystem:
    """Family shorthand ({"family", "params", "point", "epsilon0"}) or raw zones."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"line {exc.lineno}", exc.msg) from None
    if not isinstance(doc, dict):
        raise SpecError("document", "expected a JSON object")
    if "family" in doc:
        unknown = set(doc) - {"family", "params", "point", "epsilon0"}
        if unknown:
            raise SpecError(_json_where(text, sorted(unknown)[0]), "unknown field")
        tag = doc["family"]
        if tag not in FAMILY_ALPHABETS:
            raise SpecError(_json_where(text, "family"), f"unknown family tag {tag!r}")
        params = {}
        for name, val in (doc.get("params") or {}).items():
            where = _json_where(text, name)
            if name not in FAMILY_ALPHABETS[tag] or name == "eps0":
                raise SpecError(where, f"symbol {name!r} is not in the alphabet of {tag}")
            params[name] = parse_rational(val, where)
        eps0 = doc.get("epsilon0")
        if eps0 is not None:
            eps0 = parse_rational(eps0, _json_where(text, "epsilon0"))
        point = doc.get("point")
        try:
            return FamilySpec(tag, params, eps0, point)
        except (ValueError, KeyError) as exc:
            raise SpecError(_json_where(text, "point" if point else "family"), str(exc)) from None
    unknown = set(doc) - {"upper", "lower", "axis"}
    if unknown or not {"upper", "lower"} <= set(doc):
        raise SpecError("document", "expected a family spec or {upper, lower, axis}")
    axis = doc.get("axis", "y")
    if axis not in ("x", "y"):
        raise SpecError(_json_where(text, "axis"), "axis must be 'x' or 'y'")
    zones = []
    for part in ("upper", "lower"):
        z = doc[part]
        if not isinstance(z, dict) or set(z) != {"dx", "dy"}:
            raise SpecError(part, "expected {dx, dy}")
        zones.append(PlanarPolySystem(_parse_terms(z["dx"], f"{part}.dx"), _parse_terms(z["dy"], f"{part}.dy")))
    # "axis" names the switching line: y means the line y = 0
    from .systems import HORIZONTAL, VERTICAL

    return PiecewiseSystem(zones[0], zones[1], HORIZONTAL if axis == "y" else VERTICAL, "raw")


def emit_spec(spec: FamilySpec) -> str:
    doc: dict = {"family": spec.tag}
    if spec.params:
        doc["params"] = {k: str(as_rational(v) if not isinstance(v, ParamPoly) else v.to_str())
                         for k, v in sorted(spec.params.items())}
    if spec.point:
        doc["point"] = spec.point
    if spec.epsilon0 is not None:
        doc["epsilon0"] = str(as_rational(spec.epsilon0))
    return json.dumps(doc, sort_keys=True)


def _system(spec) -> PiecewiseSystem:
    return build_family(spec) if isinstance(spec, FamilySpec) else spec


def _numeric_point(spec):
    pw = _system(spec)
    if pw.parameters():
        raise SpecError("params", f"numeric values required for {sorted(pw.parameters())}")
    return pw


def _write(out, payload, fmt: str):
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(payload["header"])
        writer.writerows(payload["rows"])
        text = buf.getvalue()
    elif fmt == "text" and isinstance(payload, str):
        text = payload + "\n"
    else:
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    out.write(text)


def _read_spec(args):
    if args.spec is None:
        if not args.family:
            raise SpecError("arguments", "give a spec file or --family")
        return FamilySpec(args.family, {}, None, args.point)
    text = sys.stdin.read() if args.spec == "-" else open(args.spec, encoding="utf-8").read()
    spec = parse_system_spec(text)
    if args.point and isinstance(spec, FamilySpec):
        spec = FamilySpec(spec.tag, spec.params, spec.epsilon0, args.point)
    return spec


def _range(text: str):
    a, b = (float(v) for v in text.split(","))
    return a, b


# -- subcommands ---------------------------------------------------------------

def cmd_lyap(args, cfg: RunConfig):
    from .lyapunov import displacement_coeffs

    spec = _read_spec(args)
    pw = _system(spec)
    rel = spec.relation() if isinstance(spec, FamilySpec) else None
    trail = cfg.trail if pw.family in FAMILY_ALPHABETS else None
    L = displacement_coeffs(pw, cfg.order, trail=trail, relation=rel)
    return L.to_json(), 0


def cmd_centers(args, cfg):
    from .centers import catalog_get, catalog_list, certify, verify_vanishing

    fams = [catalog_get(args.family)] if args.family else catalog_list()
    reports = []
    ok = True
    for fam in fams:
        rep = certify(fam).to_json()
        if args.vanishing:
            van = verify_vanishing(fam, cfg.order)
            rep["vanishing"] = {"K": cfg.order, "pass": van}
            ok = ok and van
        ok = ok and rep["pass"]
        reports.append(rep)
    return reports, 0 if ok else 1


def cmd_darboux(args, cfg):
    from .centers import boundary_form_str, catalog_get, verify_darboux, verify_matching

    fam = catalog_get(args.family)
    if fam.certificate is None:
        raise SpecError("family", f"{fam.id} has no Darboux certificate")
    diag: list = []
    ok = verify_darboux(fam.certificate, fam.system(), diag)
    ok = verify_matching(fam.certificate, diag) and ok
    rep = {"family": fam.id, "criterion": "darboux", "pass": ok, "diagnostics": diag,
           "boundary_form": boundary_form_str(fam.certificate)}
    return rep, 0 if ok else 1


def cmd_classify(args, cfg):
    pw = _numeric_point(_read_spec(args))
    pt = tuple(parse_rational(v.strip(), "--at") for v in args.at.split(","))
    return {"point": [str(v) for v in pt], "kind": classify_boundary_point(pw, pt)}, 0


def cmd_delta(args, cfg):
    from .bifurcation import delta_samples

    pw = _numeric_point(_read_spec(args))
    rows = delta_samples(pw, _range(args.range), args.grid)
    if cfg.format == "csv":
        return {"header": ["r0", "delta"], "rows": [[repr(r), repr(d)] for r, d in rows]}, 0
    return [{"r0": r, "delta": d} for r, d in rows], 0


def cmd_cycles(args, cfg):
    from .bifurcation import count_cycles

    pw = _numeric_point(_read_spec(args))
    return count_cycles(pw, _range(args.range), args.grid, args.tol).to_json(), 0


def cmd_expand(args, cfg):
    from .bifurcation import expand_at_point, f1_frame, f1_u_frame

    if args.point != "F1":
        raise SpecError("--point", "local frames are available at F1 only")
    frame = f1_u_frame() if args.frame == "u" else f1_frame()
    orders = [int(k) for k in args.orders.split(",")]
    jets = expand_at_point(build_family("V"), frame, args.degree, orders, stretch=args.stretch)
    return {"point": "F1", "degree": args.degree, "coordinates": frame.coordinates(),
            "W": {str(k): jets[k].to_str() for k in sorted(jets)}}, 0


def cmd_unfold(args, cfg):
    from .bifurcation import unfold_schedule

    spec = _read_spec(args)
    if not isinstance(spec, FamilySpec):
        raise SpecError("spec", "a family spec is required")
    controls = []
    for item in args.controls.split(","):
        k, sym = item.split(":")
        controls.append((int(k), sym.strip()))
    base = {k: as_rational(v) for k, v in spec.params.items()}
    sched = unfold_schedule(spec.tag, base, controls, top=args.top)
    return sched.to_json(), 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pwlyap", description=__doc__)
    sub = p.add_subparsers(dest="subcommand", required=True)

    def common(sp, spec=True):
        if spec:
            sp.add_argument("spec", nargs="?", help="system spec JSON file ('-' for stdin)")
        sp.add_argument("--family")
        sp.add_argument("--point")
        sp.add_argument("--order", type=int, default=6)
        sp.add_argument("--trail", default="raw")
        sp.add_argument("--format", default="json")
        sp.add_argument("--out")

    common(sub.add_parser("lyap", help="Lyapunov quantities W_1..W_K"))
    c = sub.add_parser("centers", help="certify catalog center families")
    common(c, spec=False)
    c.add_argument("--vanishing", action="store_true", help="also check W_k = 0 up to --order")
    common(sub.add_parser("darboux", help="Darboux certificate of one family"), spec=False)
    c = sub.add_parser("classify", help="Filippov class of a point on the switching line")
    common(c)
    c.add_argument("--at", required=True, help="x,y as rationals")
    for name in ("delta", "cycles"):
        c = sub.add_parser(name)
        common(c)
        c.add_argument("--range", default="1e-3,0.1" if name == "delta" else "1e-4,0.2")
        c.add_argument("--grid", type=int, default=50 if name == "delta" else 400)
        if name == "cycles":
            c.add_argument("--tol", type=float, default=1e-12)
    c = sub.add_parser("expand", help="jets of W_k at a weak focus")
    common(c, spec=False)
    c.add_argument("--degree", type=int, default=1)
    c.add_argument("--orders", default="3,4,5,6,7,8")
    c.add_argument("--frame", choices=("eps", "u"), default="eps")
    c.add_argument("--stretch", action="store_true", help="allow degree 3")
    c = sub.add_parser("unfold", help="sign-alternating unfolding schedule")
    common(c)
    c.add_argument("--controls", required=True, help="order:symbol list, e.g. 3:n2,2:m1,1:d")
    c.add_argument("--top", type=int)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    handlers = {"lyap": cmd_lyap, "centers": cmd_centers, "darboux": cmd_darboux, "classify": cmd_classify,
                "delta": cmd_delta, "cycles": cmd_cycles, "expand": cmd_expand, "unfold": cmd_unfold}
    try:
        cfg = RunConfig(args.subcommand, getattr(args, "spec", None), args.order, args.trail, args.format)
        payload, code = handlers[args.subcommand](args, cfg)
    except (SpecError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                _write(fh, payload, cfg.format)
        else:
            _write(sys.stdout, payload, cfg.format)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return code


if __name__ == "__main__":
    sys.exit(main())
