"""Compare computed W_k against reference formulas.

A reference matches literally, up to a positive rational factor, or modulo
the earlier quantities (ideal membership over Q(pi), via sympy Groebner
bases).  Only the comparison lives here; the W_k themselves are computed
with the package's own arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import sympy as sp

from .algebra import PiPoly
from .lyapunov import LyapunovList, _apply_steps

PI = sp.Symbol("pi_")


@dataclass
class Match:
    order: int
    status: str  # literal | factor | modulo-earlier | mismatch
    factor: Fraction | None = None
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.status != "mismatch"

    def to_json(self) -> dict:
        return {"order": self.order, "status": self.status,
                "factor": None if self.factor is None else str(self.factor), "detail": self.detail}


def to_sympy(w: PiPoly | str):
    """PiPoly (or formula text with ``pi`` and ``^``) as a sympy expression in PI."""
    if isinstance(w, str):
        return sp.expand(sp.sympify(w.replace("^", "**"), locals={"pi": PI}))
    total = 0
    for i, c in enumerate(w.coeffs):
        total += sp.sympify(c.to_str().replace("^", "**")) * PI ** i
    return sp.expand(total)


def _positive_rational(expr) -> Fraction | None:
    expr = sp.nsimplify(sp.simplify(expr))
    if expr.is_Rational and expr > 0:
        return Fraction(int(expr.p), int(expr.q))
    return None


def compare_quantity(computed: PiPoly, reference: str, earlier: Sequence[PiPoly] = (), order: int = 0) -> Match:
    c = to_sympy(computed)
    r = to_sympy(reference)
    if sp.expand(c - r) == 0:
        return Match(order, "literal", Fraction(1))
    if r != 0 and c != 0:
        f = _positive_rational(c / r)
        if f is not None:
            return Match(order, "factor", f)
    basis = [to_sympy(w) for w in earlier if not w.is_zero()]
    basis = [b for b in basis if b.free_symbols - {PI}]
    if basis:
        gens = sorted((c.free_symbols | r.free_symbols | set().union(*(b.free_symbols for b in basis))) - {PI},
                      key=str)
        dom = sp.FractionField(sp.QQ, PI)
        G = sp.groebner(basis, *gens, domain=dom, order="grevlex")
        nc = G.reduce(c)[1]
        nr = G.reduce(r)[1]
        if sp.expand(nc - nr) == 0:
            return Match(order, "modulo-earlier", Fraction(1), "difference lies in the ideal of earlier W")
        if nr != 0 and nc != 0:
            f = _positive_rational(sp.cancel(nc / nr))
            if f is not None:
                return Match(order, "modulo-earlier", f, "factor after reduction by earlier W")
        if nr != 0 and nc != 0:
            ratio = sp.cancel(nc / nr)
            return Match(order, "mismatch", None, f"ratio after reduction: {ratio}")
    ratio = sp.cancel(c / r) if r != 0 else None
    return Match(order, "mismatch", None, f"ratio: {ratio}")


def compare_list(W: LyapunovList, references: Mapping[int, str]) -> list[Match]:
    """Each reference W_k against the computed one, reducing by the earlier
    quantities taken under the same cumulative substitution."""
    out = []
    for k in sorted(references):
        steps = [s for s in W.trail if s.start <= k]
        earlier = [_apply_steps(W[j], steps) for j in range(2, k) if j in W.W]
        out.append(compare_quantity(W[k], references[k], earlier, k))
    return out
