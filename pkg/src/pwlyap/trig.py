"""The ring of finite sums  q * theta^j * cos(n theta)  and  q * theta^j * sin(n theta)
with ParamPoly coefficients q, kept in the linear Fourier basis."""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, Mapping

from gmpy2 import mpq

from .algebra import ParamPoly, PiPoly, Truncation, _raw_add_into, _raw_clean, _raw_mul, as_rational

COS, SIN = 0, 1
_KIND_NAME = {COS: "cos", SIN: "sin"}
_HALF = mpq(1, 2)


def _signed_freq(n: int, kind: int):
    """Normalise a possibly negative frequency: returns (n, kind, sign) or None."""
    if n >= 0:
        if n == 0 and kind == SIN:
            return None
        return n, kind, 1
    return -n, kind, (1 if kind == COS else -1)


class TrigPoly:
    """Immutable trigonometric polynomial with polynomial-in-theta coefficients.

    Terms are keyed by ``(j, n, kind)`` where ``j`` is the power of theta,
    ``n >= 0`` the frequency and ``kind`` is ``COS`` or ``SIN``; ``(j, 0, SIN)``
    never occurs.  Values are raw ParamPoly term dicts.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping | None = None):
        self._terms = {}
        if terms:
            for (j, n, kind), c in terms.items():
                c = ParamPoly.coerce(c)
                if c.is_zero():
                    continue
                norm = _signed_freq(n, kind)
                if norm is None:
                    continue
                n, kind, sign = norm
                acc = self._terms.setdefault((j, n, kind), {})
                _raw_add_into(acc, c._terms, None if sign > 0 else mpq(-1))
            self._terms = {k: v for k, v in ((k, _raw_clean(v)) for k, v in self._terms.items()) if v}

    @classmethod
    def _wrap(cls, terms: dict) -> "TrigPoly":
        t = cls.__new__(cls)
        t._terms = terms
        return t

    @classmethod
    def const(cls, c) -> "TrigPoly":
        return cls({(0, 0, COS): c})

    @classmethod
    def cos(cls, n: int = 1, coeff=1) -> "TrigPoly":
        return cls({(0, n, COS): coeff})

    @classmethod
    def sin(cls, n: int = 1, coeff=1) -> "TrigPoly":
        return cls({(0, n, SIN): coeff})

    @classmethod
    def theta(cls, j: int = 1) -> "TrigPoly":
        return cls({(j, 0, COS): 1})

    # -- inspection ----------------------------------------------------------

    def terms(self) -> dict:
        return {k: ParamPoly._wrap(dict(v)) for k, v in self._terms.items()}

    def coefficient(self, j: int, n: int, kind: str | int) -> ParamPoly:
        kind = {"cos": COS, "sin": SIN}.get(kind, kind)
        return ParamPoly._wrap(dict(self._terms.get((j, n, kind), {})))

    def is_zero(self) -> bool:
        return not self._terms

    def max_theta_power(self) -> int:
        return max((j for j, _, _ in self._terms), default=-1)

    def max_frequency(self) -> int:
        return max((n for _, n, _ in self._terms), default=-1)

    def size(self) -> int:
        """Total number of stored monomials across all coefficients."""
        return sum(len(v) for v in self._terms.values())

    def __eq__(self, other):
        if not isinstance(other, TrigPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset((k, frozenset(v.items())) for k, v in self._terms.items()))

    # -- ring operations -----------------------------------------------------

    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        if not isinstance(other, TrigPoly):
            other = TrigPoly.const(other)
        out = {k: dict(v) for k, v in self._terms.items()}
        for k, v in other._terms.items():
            _raw_add_into(out.setdefault(k, {}), v)
        return TrigPoly._wrap({k: c for k, c in ((k, _raw_clean(v)) for k, v in out.items()) if c})

    __radd__ = __add__

    def __neg__(self):
        return TrigPoly._wrap({k: {m: -c for m, c in v.items()} for k, v in self._terms.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, TrigPoly) else TrigPoly.const(-ParamPoly.coerce(other)))

    def scale(self, factor) -> "TrigPoly":
        """Multiply by a rational or a ParamPoly."""
        if isinstance(factor, ParamPoly):
            out = {k: _raw_mul(v, factor._terms) for k, v in self._terms.items()}
            return TrigPoly._wrap({k: v for k, v in out.items() if v})
        q = as_rational(factor)
        if not q:
            return TrigPoly()
        return TrigPoly._wrap({k: {m: q * c for m, c in v.items()} for k, v in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, TrigPoly):
            return trig_mul(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def map_coefficients(self, fn: Callable[[ParamPoly], ParamPoly]) -> "TrigPoly":
        out = {}
        for k, v in self._terms.items():
            c = fn(ParamPoly._wrap(v))
            if not c.is_zero():
                out[k] = c._terms
        return TrigPoly._wrap(out)

    def subs(self, bindings) -> "TrigPoly":
        return self.map_coefficients(lambda c: c.subs(bindings))

    def derivative(self) -> "TrigPoly":
        return trig_derivative(self)

    def integrate(self) -> "TrigPoly":
        return trig_integrate(self)

    def reflect(self) -> "TrigPoly":
        """The function theta -> f(-theta)."""
        out = {}
        for (j, n, kind), v in self._terms.items():
            neg = (j % 2 == 1) ^ (kind == SIN)
            out[(j, n, kind)] = {m: -c for m, c in v.items()} if neg else dict(v)
        return TrigPoly._wrap(out)

    def shift_half_turn(self) -> "TrigPoly":
        """The function theta -> f(theta + pi); only for theta-free inputs."""
        out = {}
        for (j, n, kind), v in self._terms.items():
            if j:
                raise ValueError("half-turn shift of theta-dependent terms leaves the ring")
            out[(j, n, kind)] = {m: -c for m, c in v.items()} if n % 2 else dict(v)
        return TrigPoly._wrap(out)

    def eval_special(self, quarter_turns: int) -> PiPoly:
        return trig_eval_special(self, quarter_turns)

    def evaluate(self, theta: float, point: Mapping[str, object] | None = None) -> float:
        """Float value at an arbitrary angle (numeric helper for tests)."""
        point = point or {}
        total = 0.0
        for (j, n, kind), v in self._terms.items():
            c = float(ParamPoly._wrap(v).evaluate(point))
            f = math.cos(n * theta) if kind == COS else math.sin(n * theta)
            total += c * theta ** j * f
        return total

    def to_str(self) -> str:
        parts = []
        for (j, n, kind) in sorted(self._terms):
            c = ParamPoly._wrap(self._terms[(j, n, kind)]).to_str()
            factors = []
            if j:
                factors.append("theta" if j == 1 else f"theta^{j}")
            if n:
                factors.append(f"{_KIND_NAME[kind]}({n}*theta)" if n > 1 else f"{_KIND_NAME[kind]}(theta)")
            parts.append(f"({c})" + "".join("*" + f for f in factors))
        return " + ".join(parts) if parts else "0"

    __str__ = to_str

    def __repr__(self):
        return f"TrigPoly({self.to_str()!r})"


def trig_mul(f: TrigPoly, g: TrigPoly, trunc: Truncation | None = None,
             reduce: Callable[[dict], dict] | None = None) -> TrigPoly:
    """Product in the linear Fourier basis via product-to-sum rules.

    ``trunc`` discards parameter monomials above a jet bound; ``reduce`` is an
    optional post-processing of each coefficient dict (e.g. a quadratic
    reduction).
    """
    out: dict = {}
    for (j1, n1, k1), c1 in f._terms.items():
        for (j2, n2, k2), c2 in g._terms.items():
            prod = _raw_mul(c1, c2, trunc)
            if not prod:
                continue
            j = j1 + j2
            # 2*x*y expressed as +-cos/sin of (n1 - n2) and (n1 + n2)
            if k1 == COS and k2 == COS:
                targets = ((n1 - n2, COS, 1), (n1 + n2, COS, 1))
            elif k1 == SIN and k2 == SIN:
                targets = ((n1 - n2, COS, 1), (n1 + n2, COS, -1))
            elif k1 == SIN:
                targets = ((n1 + n2, SIN, 1), (n1 - n2, SIN, 1))
            else:
                targets = ((n1 + n2, SIN, 1), (n1 - n2, SIN, -1))
            for n, kind, sign in targets:
                norm = _signed_freq(n, kind)
                if norm is None:
                    continue
                n, kind, s2 = norm
                acc = out.get((j, n, kind))
                if acc is None:
                    acc = out[(j, n, kind)] = {}
                if sign * s2 > 0:
                    _raw_add_into(acc, prod)
                else:
                    get = acc.get
                    for m, c in prod.items():
                        acc[m] = get(m, 0) - c
    result = {}
    for k, v in out.items():
        v = {m: c * _HALF for m, c in v.items() if c}
        if reduce is not None and v:
            v = reduce(v)
        if v:
            result[k] = v
    return TrigPoly._wrap(result)


@lru_cache(maxsize=None)
def _antiderivative(j: int, n: int, kind: int) -> tuple:
    """Antiderivative of theta^j * cos/sin(n theta) as ((coef, (j', n, kind')), ...),
    without the integration constant."""
    if n == 0:
        return ((mpq(1, j + 1), (j + 1, 0, COS)),)
    acc: dict = {}
    inv = mpq(1, n)
    if kind == COS:
        # int t^j cos = t^j sin/n - (j/n) int t^(j-1) sin
        acc[(j, n, SIN)] = inv
        if j:
            for c, key in _antiderivative(j - 1, n, SIN):
                acc[key] = acc.get(key, 0) - j * inv * c
    else:
        # int t^j sin = -t^j cos/n + (j/n) int t^(j-1) cos
        acc[(j, n, COS)] = -inv
        if j:
            for c, key in _antiderivative(j - 1, n, COS):
                acc[key] = acc.get(key, 0) + j * inv * c
    return tuple((c, key) for key, c in acc.items() if c)


def trig_integrate(f: TrigPoly) -> TrigPoly:
    """Antiderivative F with F(0) = 0."""
    out: dict = {}
    for (j, n, kind), v in f._terms.items():
        for c, key in _antiderivative(j, n, kind):
            _raw_add_into(out.setdefault(key, {}), v, c)
    # F(0) is the sum of the theta-free cosine coefficients
    const: dict = {}
    for (j, n, kind), v in out.items():
        if j == 0 and kind == COS:
            _raw_add_into(const, v)
    _raw_add_into(out.setdefault((0, 0, COS), {}), const, mpq(-1))
    return TrigPoly._wrap({k: c for k, c in ((k, _raw_clean(v)) for k, v in out.items()) if c})


def trig_derivative(f: TrigPoly) -> TrigPoly:
    out: dict = {}
    for (j, n, kind), v in f._terms.items():
        if j:
            _raw_add_into(out.setdefault((j - 1, n, kind), {}), v, mpq(j))
        if n:
            if kind == COS:
                _raw_add_into(out.setdefault((j, n, SIN), {}), v, mpq(-n))
            else:
                _raw_add_into(out.setdefault((j, n, COS), {}), v, mpq(n))
    return TrigPoly._wrap({k: c for k, c in ((k, _raw_clean(v)) for k, v in out.items()) if c})


_COS_Q = (1, 0, -1, 0)
_SIN_Q = (0, 1, 0, -1)


def trig_eval_special(f: TrigPoly, quarter_turns: int) -> PiPoly:
    """Exact value at theta = quarter_turns * pi/2, for quarter_turns in 0..4."""
    if quarter_turns not in (0, 1, 2, 3, 4):
        raise ValueError("evaluation only at 0, pi/2, pi, 3pi/2, 2pi")
    scale = mpq(quarter_turns, 2)
    coeffs: dict = {}
    for (j, n, kind), v in f._terms.items():
        q = (n * quarter_turns) % 4
        trig = _COS_Q[q] if kind == COS else _SIN_Q[q]
        if not trig or (j and not scale):
            continue
        factor = trig * scale ** j
        _raw_add_into(coeffs.setdefault(j, {}), v, factor)
    if not coeffs:
        return PiPoly()
    top = max(coeffs)
    return PiPoly(ParamPoly._wrap(_raw_clean(coeffs.get(i, {}))) for i in range(top + 1))


@lru_cache(maxsize=None)
def cos_sin_power(a: int, b: int) -> TrigPoly:
    """cos(theta)^a * sin(theta)^b in the linear basis."""
    if a == 0 and b == 0:
        return TrigPoly.const(1)
    if a:
        return trig_mul(cos_sin_power(a - 1, b), TrigPoly.cos(1))
    return trig_mul(cos_sin_power(a, b - 1), TrigPoly.sin(1))
