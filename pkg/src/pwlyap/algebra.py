"""Exact arithmetic: rationals, sparse parameter polynomials, pi-graded scalars,
quadratic-extension scalars and total-degree jets.

Polynomials live over a fixed alphabet of symbols.  A monomial is stored as a
single Python int whose i-th byte is the exponent of ``VARIABLES[i]``, so
multiplying monomials is integer addition and the total degree is the byte sum.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping

from gmpy2 import mpq

Rational = type(mpq(0))

VARIABLES: tuple[str, ...] = (
    "d1", "d2", "l1", "l2", "m1", "m2", "n1", "n2", "b",
    "d", "l", "n",
    "eps0", "eps1", "eps2", "eps3", "eps4", "eps5", "eps6", "eps7",
    "u1", "u2", "u3", "u4", "u5", "u6", "u7", "v7",
    "f", "x", "y",
)
INDEX = {name: i for i, name in enumerate(VARIABLES)}
_NB = len(VARIABLES)
_MAXEXP = 255
_ZERO = mpq(0)
_ONE = mpq(1)

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")


def as_rational(value) -> Rational:
    """Convert ``value`` to an exact rational.

    Accepts ints, Fractions, mpq, and strings of the form ``"p"`` or ``"p/q"``.
    Floats and decimal strings are rejected: they are not exact.
    """
    if isinstance(value, Rational):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return mpq(value)
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, str):
        m = _RATIONAL_RE.match(value)
        if not m:
            raise ValueError(f"malformed rational literal {value!r}; use 'p' or 'p/q'")
        den = int(m.group(2)) if m.group(2) else 1
        if den == 0:
            raise ZeroDivisionError(f"zero denominator in {value!r}")
        return mpq(int(m.group(1)), den)
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


def format_rational(q) -> str:
    q = as_rational(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


# -- monomial keys -----------------------------------------------------------

def _key_from_exponents(exps: Mapping[str, int]) -> int:
    key = 0
    for name, e in exps.items():
        if e < 0 or e > _MAXEXP:
            raise ValueError(f"exponent {e} of {name} out of range")
        key += e << (8 * INDEX[name])
    return key


def key_exponents(key: int) -> tuple[int, ...]:
    return tuple(key.to_bytes(_NB, "little"))


def key_degree(key: int) -> int:
    return sum(key.to_bytes(_NB, "little"))


def variable_mask(names: Iterable[str]) -> int:
    mask = 0
    for name in names:
        mask |= 0xFF << (8 * INDEX[name])
    return mask


def _grevlex_sort_key(exps: tuple[int, ...]):
    # Descending sort on this key gives graded reverse lexicographic order.
    return (sum(exps), tuple(-e for e in reversed(exps)))


# -- raw dict kernels (hot loops) -------------------------------------------

def _raw_mul(a: dict, b: dict, trunc: "Truncation | None" = None) -> dict:
    if len(a) > len(b):
        a, b = b, a
    out: dict = {}
    get = out.get
    if trunc is None:
        for k1, v1 in a.items():
            for k2, v2 in b.items():
                k = k1 + k2
                out[k] = get(k, _ZERO) + v1 * v2
    else:
        deg = trunc.degree_of
        bound = trunc.degree
        bd = [(deg(k), k, v) for k, v in b.items()]
        for k1, v1 in a.items():
            room = bound - deg(k1)
            if room < 0:
                continue
            for d2, k2, v2 in bd:
                if d2 <= room:
                    k = k1 + k2
                    out[k] = get(k, _ZERO) + v1 * v2
    return {k: v for k, v in out.items() if v}


def _raw_add_into(target: dict, src: dict, scale=None) -> None:
    get = target.get
    if scale is None:
        for k, v in src.items():
            target[k] = get(k, _ZERO) + v
    else:
        for k, v in src.items():
            target[k] = get(k, _ZERO) + scale * v


def _raw_clean(d: dict) -> dict:
    return {k: v for k, v in d.items() if v}


class Truncation:
    """Total-degree bound in a designated subset of the alphabet."""

    __slots__ = ("names", "degree", "mask", "_cache")

    def __init__(self, names: Iterable[str], degree: int):
        if degree < 0:
            raise ValueError("truncation degree must be >= 0")
        self.names = tuple(sorted(set(names), key=INDEX.__getitem__))
        self.degree = degree
        self.mask = variable_mask(self.names)
        self._cache: dict = {}

    def degree_of(self, key: int) -> int:
        d = self._cache.get(key)
        if d is None:
            d = key_degree(key & self.mask)
            self._cache[key] = d
        return d

    def apply(self, terms: dict) -> dict:
        bound = self.degree
        return {k: v for k, v in terms.items() if self.degree_of(k) <= bound}

    def __repr__(self):
        return f"Truncation({list(self.names)}, {self.degree})"


class ParamPoly:
    """Sparse multivariate polynomial with exact rational coefficients.

    Instances are immutable.  Arithmetic with ints, Fractions and mpq is
    supported on either side.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[int, object] | None = None):
        if terms is None:
            self._terms = {}
        else:
            self._terms = {k: as_rational(v) for k, v in terms.items() if v}
        self._hash = None

    @classmethod
    def _wrap(cls, terms: dict) -> "ParamPoly":
        p = cls.__new__(cls)
        p._terms = terms
        p._hash = None
        return p

    @classmethod
    def const(cls, value) -> "ParamPoly":
        q = as_rational(value)
        return cls._wrap({0: q} if q else {})

    @classmethod
    def var(cls, name: str) -> "ParamPoly":
        if name not in INDEX:
            raise KeyError(f"unknown symbol {name!r}")
        return cls._wrap({1 << (8 * INDEX[name]): _ONE})

    @classmethod
    def monomial(cls, exps: Mapping[str, int], coeff=1) -> "ParamPoly":
        q = as_rational(coeff)
        return cls._wrap({_key_from_exponents(exps): q} if q else {})

    @classmethod
    def coerce(cls, value) -> "ParamPoly":
        if isinstance(value, ParamPoly):
            return value
        return cls.const(value)

    # -- inspection ----------------------------------------------------------

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        """Yield ``(exponent dict, coefficient)`` pairs in grevlex order."""
        for key in self._sorted_keys():
            exps = key_exponents(key)
            yield {VARIABLES[i]: e for i, e in enumerate(exps) if e}, self._terms[key]

    def _sorted_keys(self):
        return sorted(self._terms, key=lambda k: _grevlex_sort_key(key_exponents(k)), reverse=True)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and 0 in self._terms)

    def constant_term(self) -> Rational:
        return self._terms.get(0, _ZERO)

    def __len__(self):
        return len(self._terms)

    def degree(self, names: Iterable[str] | None = None) -> int:
        """Total degree, optionally restricted to ``names``; -1 for zero."""
        if not self._terms:
            return -1
        if names is None:
            return max(key_degree(k) for k in self._terms)
        mask = variable_mask(names)
        return max(key_degree(k & mask) for k in self._terms)

    def variables(self) -> set[str]:
        acc = 0
        for k in self._terms:
            acc |= k
        exps = key_exponents(acc)
        return {VARIABLES[i] for i, e in enumerate(exps) if e}

    def coefficient(self, exps: Mapping[str, int]) -> Rational:
        return self._terms.get(_key_from_exponents(exps), _ZERO)

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, ParamPoly):
            try:
                other = ParamPoly.const(other)
            except TypeError:
                return NotImplemented
        out = dict(self._terms)
        _raw_add_into(out, other._terms)
        return ParamPoly._wrap(_raw_clean(out))

    __radd__ = __add__

    def __neg__(self):
        return ParamPoly._wrap({k: -v for k, v in self._terms.items()})

    def __sub__(self, other):
        if not isinstance(other, ParamPoly):
            try:
                other = ParamPoly.const(other)
            except TypeError:
                return NotImplemented
        out = dict(self._terms)
        _raw_add_into(out, other._terms, -_ONE)
        return ParamPoly._wrap(_raw_clean(out))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, ParamPoly):
            return ParamPoly._wrap(_raw_mul(self._terms, other._terms))
        try:
            q = as_rational(other)
        except TypeError:
            return NotImplemented
        if not q:
            return ParamPoly()
        return ParamPoly._wrap({k: q * v for k, v in self._terms.items()})

    __rmul__ = __mul__

    def __truediv__(self, other):
        q = as_rational(other)
        if not q:
            raise ZeroDivisionError("division of a polynomial by zero")
        inv = 1 / q
        return ParamPoly._wrap({k: inv * v for k, v in self._terms.items()})

    def __pow__(self, e: int):
        if not isinstance(e, int) or e < 0:
            raise ValueError("only non-negative integer powers")
        result = ParamPoly.const(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def mul_truncated(self, other: "ParamPoly", trunc: Truncation) -> "ParamPoly":
        return ParamPoly._wrap(_raw_mul(self._terms, other._terms, trunc))

    def __eq__(self, other):
        if isinstance(other, ParamPoly):
            return self._terms == other._terms
        try:
            return self._terms == ParamPoly.const(other)._terms
        except TypeError:
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self._terms)

    # -- transformations -----------------------------------------------------

    def subs(self, bindings: Mapping[str, object]) -> "ParamPoly":
        """Simultaneous substitution of symbols by polynomials or rationals."""
        if not bindings:
            return self
        repl = {INDEX[name]: ParamPoly.coerce(val) for name, val in bindings.items()}
        mask = variable_mask(VARIABLES[i] for i in repl)
        powers: dict = {}

        def power(i, e):
            key = (i, e)
            if key not in powers:
                powers[key] = repl[i] ** e
            return powers[key]

        out: dict = {}
        for key, coeff in self._terms.items():
            if not key & mask:
                out[key] = out.get(key, _ZERO) + coeff
                continue
            rest = key & ~mask
            exps = key_exponents(key & mask)
            factor = ParamPoly._wrap({rest: coeff})
            for i, e in enumerate(exps):
                if e:
                    factor = factor * power(i, e)
            _raw_add_into(out, factor._terms)
        return ParamPoly._wrap(_raw_clean(out))

    def evaluate(self, point: Mapping[str, object]) -> Rational:
        """Exact value at a point; every symbol present must be bound."""
        missing = self.variables() - set(point)
        if missing:
            raise KeyError(f"unbound symbols: {sorted(missing)}")
        vals = [as_rational(point[name]) if name in point else _ZERO for name in VARIABLES]
        total = _ZERO
        for key, coeff in self._terms.items():
            term = coeff
            for i, e in enumerate(key_exponents(key)):
                if e:
                    term *= vals[i] ** e
            total += term
        return total

    def truncate(self, names: Iterable[str], degree: int) -> "ParamPoly":
        return ParamPoly._wrap(Truncation(names, degree).apply(self._terms))

    def homogeneous_part(self, names: Iterable[str], degree: int) -> "ParamPoly":
        mask = variable_mask(names)
        return ParamPoly._wrap({k: v for k, v in self._terms.items() if key_degree(k & mask) == degree})

    def diff(self, name: str) -> "ParamPoly":
        i = INDEX[name]
        shift = 8 * i
        unit = 1 << shift
        out = {}
        for key, coeff in self._terms.items():
            e = (key >> shift) & 0xFF
            if e:
                out[key - unit] = coeff * e
        return ParamPoly._wrap(out)

    def split(self, names: Iterable[str]) -> dict[tuple[int, ...], "ParamPoly"]:
        """Group by exponents of ``names``: maps exponent tuple -> coefficient poly."""
        names = tuple(names)
        idx = [INDEX[n] for n in names]
        mask = variable_mask(names)
        groups: dict = {}
        for key, coeff in self._terms.items():
            exps = key_exponents(key)
            sel = tuple(exps[i] for i in idx)
            groups.setdefault(sel, {})[key & ~mask] = coeff
        return {sel: ParamPoly._wrap(t) for sel, t in groups.items()}

    def reduce_square(self, name: str, square: "ParamPoly") -> "ParamPoly":
        """Rewrite ``name**2`` as ``square`` (quotient by name^2 - square)."""
        i = INDEX[name]
        shift = 8 * i
        if all(((k >> shift) & 0xFF) < 2 for k in self._terms):
            return self
        out: dict = {}
        cache: dict = {}
        for key, coeff in self._terms.items():
            e = (key >> shift) & 0xFF
            if e < 2:
                out[key] = out.get(key, _ZERO) + coeff
                continue
            half, odd = divmod(e, 2)
            base = key - ((e - odd) << shift)
            if half not in cache:
                cache[half] = square ** half
            _raw_add_into(out, _raw_mul({base: coeff}, cache[half]._terms))
        return ParamPoly._wrap(_raw_clean(out))

    # -- text ----------------------------------------------------------------

    def to_str(self) -> str:
        return _format_terms(
            (key_exponents(k), self._terms[k]) for k in self._sorted_keys()
        )

    __str__ = to_str

    def __repr__(self):
        return f"ParamPoly({self.to_str()!r})"

    @classmethod
    def parse(cls, text: str) -> "ParamPoly":
        value = _Parser(text).parse()
        if isinstance(value, PiPoly):
            if value.degree > 0:
                raise ValueError("expression contains pi; use PiPoly.parse")
            return value.coeff(0)
        return value


def _format_monomial(exps, names=VARIABLES, pi_power=0) -> str:
    parts = []
    if pi_power:
        parts.append("pi" if pi_power == 1 else f"pi^{pi_power}")
    for i, e in enumerate(exps):
        if e:
            parts.append(names[i] if e == 1 else f"{names[i]}^{e}")
    return "*".join(parts)


def _format_terms(pairs, pi_power_of=None) -> str:
    out = []
    for exps, coeff in pairs:
        pi_power = 0
        if pi_power_of is not None:
            pi_power, exps = pi_power_of(exps)
        mono = _format_monomial(exps, pi_power=pi_power)
        mag = abs(coeff)
        if mono:
            body = mono if mag == 1 else f"{format_rational(mag)}*{mono}"
        else:
            body = format_rational(mag)
        if not out:
            out.append(body if coeff > 0 else f"-{body}")
        else:
            out.append(("+ " if coeff > 0 else "- ") + body)
    return " ".join(out) if out else "0"


class PiPoly:
    """Polynomial in the formal symbol pi with ParamPoly coefficients."""

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [ParamPoly.coerce(c) for c in coeffs]
        while cs and cs[-1].is_zero():
            cs.pop()
        self._coeffs = tuple(cs)

    @classmethod
    def pi(cls) -> "PiPoly":
        return cls([0, 1])

    @classmethod
    def coerce(cls, value) -> "PiPoly":
        if isinstance(value, PiPoly):
            return value
        return cls([ParamPoly.coerce(value)])

    @property
    def degree(self) -> int:
        return len(self._coeffs) - 1

    @property
    def coeffs(self) -> tuple:
        return self._coeffs

    def coeff(self, i: int) -> ParamPoly:
        if 0 <= i < len(self._coeffs):
            return self._coeffs[i]
        return ParamPoly()

    def is_zero(self) -> bool:
        return not self._coeffs

    def __bool__(self):
        return bool(self._coeffs)

    def __add__(self, other):
        other = PiPoly.coerce(other)
        n = max(len(self._coeffs), len(other._coeffs))
        return PiPoly(self.coeff(i) + other.coeff(i) for i in range(n))

    __radd__ = __add__

    def __neg__(self):
        return PiPoly(-c for c in self._coeffs)

    def __sub__(self, other):
        return self + (-PiPoly.coerce(other))

    def __rsub__(self, other):
        return PiPoly.coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, PiPoly):
            if isinstance(other, ParamPoly):
                return PiPoly(c * other for c in self._coeffs)
            try:
                q = as_rational(other)
            except TypeError:
                return NotImplemented
            return PiPoly(c * q for c in self._coeffs)
        if not self._coeffs or not other._coeffs:
            return PiPoly()
        out = [dict() for _ in range(len(self._coeffs) + len(other._coeffs) - 1)]
        for i, a in enumerate(self._coeffs):
            for j, b in enumerate(other._coeffs):
                _raw_add_into(out[i + j], _raw_mul(a._terms, b._terms))
        return PiPoly(ParamPoly._wrap(_raw_clean(t)) for t in out)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        result = PiPoly([1])
        for _ in range(e):
            result = result * self
        return result

    def __eq__(self, other):
        try:
            other = PiPoly.coerce(other)
        except TypeError:
            return NotImplemented
        return self._coeffs == other._coeffs

    def __hash__(self):
        return hash(self._coeffs)

    def map(self, fn) -> "PiPoly":
        return PiPoly(fn(c) for c in self._coeffs)

    def subs(self, bindings) -> "PiPoly":
        return self.map(lambda c: c.subs(bindings))

    def variables(self) -> set[str]:
        out = set()
        for c in self._coeffs:
            out |= c.variables()
        return out

    def evaluate(self, point: Mapping[str, object]) -> "PiPoly":
        """Exact evaluation of the parameters, keeping pi formal."""
        return PiPoly(ParamPoly.const(c.evaluate(point)) for c in self._coeffs)

    def to_float(self, point: Mapping[str, object] | None = None, pi_value: float | None = None) -> float:
        """Numeric value; all parameters must be bound."""
        import math

        pv = math.pi if pi_value is None else pi_value
        point = point or {}
        total = 0.0
        for i, c in enumerate(self._coeffs):
            total += float(c.evaluate(point)) * pv ** i
        return total

    def constant_value(self) -> "Rational | None":
        """The rational value when this is a plain rational constant."""
        if not self._coeffs:
            return _ZERO
        if len(self._coeffs) == 1 and self._coeffs[0].is_constant():
            return self._coeffs[0].constant_term()
        return None

    def to_str(self) -> str:
        pairs = []
        for power, c in enumerate(self._coeffs):
            for key, v in c._terms.items():
                pairs.append(((power,) + key_exponents(key), v))
        # pi sorts as an extra leading variable
        pairs.sort(key=lambda t: _grevlex_sort_key(t[0]), reverse=True)
        return _format_terms(pairs, pi_power_of=lambda e: (e[0], e[1:]))

    __str__ = to_str

    def __repr__(self):
        return f"PiPoly({self.to_str()!r})"

    @classmethod
    def parse(cls, text: str) -> "PiPoly":
        return PiPoly.coerce(_Parser(text).parse())


def pipoly_eval(w: PiPoly, point: Mapping[str, object], pi_value: float | None = None) -> float:
    """Float value of ``w`` at a fully bound parameter point."""
    return w.to_float(point, pi_value)


def poly_substitute(p, bindings: Mapping[str, object]):
    """Simultaneous substitution on a ParamPoly or PiPoly."""
    return p.subs(bindings)


def jet_truncate(p: ParamPoly, names: Iterable[str], degree: int) -> "JetPoly":
    return JetPoly(p, Truncation(names, degree))


class JetPoly:
    """A ParamPoly known only up to a total degree in some variables."""

    __slots__ = ("poly", "trunc")

    def __init__(self, poly: ParamPoly, trunc: Truncation):
        self.poly = ParamPoly._wrap(trunc.apply(ParamPoly.coerce(poly)._terms))
        self.trunc = trunc

    def _other(self, other) -> ParamPoly:
        if isinstance(other, JetPoly):
            if other.trunc.mask != self.trunc.mask:
                raise ValueError("jets truncated in different variables")
            return other.poly
        return ParamPoly.coerce(other)

    def _bound(self, other):
        if isinstance(other, JetPoly) and other.trunc.degree < self.trunc.degree:
            return other.trunc
        return self.trunc

    def __add__(self, other):
        return JetPoly(self.poly + self._other(other), self._bound(other))

    __radd__ = __add__

    def __sub__(self, other):
        return JetPoly(self.poly - self._other(other), self._bound(other))

    def __neg__(self):
        return JetPoly(-self.poly, self.trunc)

    def __mul__(self, other):
        trunc = self._bound(other)
        return JetPoly(self.poly.mul_truncated(self._other(other), trunc), trunc)

    __rmul__ = __mul__

    def __eq__(self, other):
        return self.poly == self._other(other)

    def value_at_origin(self) -> ParamPoly:
        """The degree-0 part: the polynomial with the jet variables set to 0."""
        return self.poly.subs({n: 0 for n in self.trunc.names})

    def __repr__(self):
        return f"JetPoly({self.poly.to_str()!r}, {self.trunc!r})"


class QuadExtScalar:
    """Element ``(a + b*sqrt(D)) / c`` with a, b, c, D ParamPolys and c != 0.

    The discriminant D is a polynomial; all arithmetic requires equal D.
    """

    __slots__ = ("a", "b", "c", "D")

    def __init__(self, a, b=0, c=1, D=None):
        self.a = ParamPoly.coerce(a)
        self.b = ParamPoly.coerce(b)
        self.c = ParamPoly.coerce(c)
        if self.c.is_zero():
            raise ZeroDivisionError("zero denominator in quadratic-extension scalar")
        self.D = ParamPoly.coerce(D) if D is not None else None
        if self.D is None and not self.b.is_zero():
            raise ValueError("radical part given without discriminant")
        if self.c.is_constant() and self.c.constant_term() != 1:
            inv = 1 / self.c.constant_term()
            self.a, self.b, self.c = self.a * inv, self.b * inv, ParamPoly.const(1)

    @classmethod
    def sqrt(cls, D) -> "QuadExtScalar":
        return cls(0, 1, 1, D)

    def _check(self, other) -> "QuadExtScalar":
        if not isinstance(other, QuadExtScalar):
            return QuadExtScalar(ParamPoly.coerce(other), 0, 1, self.D)
        if self.D is not None and other.D is not None and self.D != other.D:
            raise ValueError("incompatible extension: discriminants differ")
        return other

    def _disc(self, other):
        return self.D if self.D is not None else other.D

    def __add__(self, other):
        other = self._check(other)
        D = self._disc(other)
        if self.c == other.c:
            return QuadExtScalar(self.a + other.a, self.b + other.b, self.c, D)
        return QuadExtScalar(
            self.a * other.c + other.a * self.c,
            self.b * other.c + other.b * self.c,
            self.c * other.c,
            D,
        )

    __radd__ = __add__

    def __neg__(self):
        return QuadExtScalar(-self.a, -self.b, self.c, self.D)

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._check(other)
        D = self._disc(other)
        a = self.a * other.a
        if not self.b.is_zero() and not other.b.is_zero():
            a = a + D * self.b * other.b
        b = self.a * other.b + self.b * other.a
        return QuadExtScalar(a, b, self.c * other.c, D)

    __rmul__ = __mul__

    def conj(self) -> "QuadExtScalar":
        return QuadExtScalar(self.a, -self.b, self.c, self.D)

    def norm_numerator(self) -> ParamPoly:
        """a^2 - D b^2, the numerator of self * conj(self) times c^2."""
        if self.b.is_zero():
            return self.a * self.a
        return self.a * self.a - self.D * self.b * self.b

    def inverse(self) -> "QuadExtScalar":
        n = self.norm_numerator()
        if n.is_zero():
            raise ZeroDivisionError("element has zero norm")
        return QuadExtScalar(self.a * self.c, -self.b * self.c, n, self.D)

    def __truediv__(self, other):
        return self * self._check(other).inverse()

    def is_zero(self) -> bool:
        return self.a.is_zero() and self.b.is_zero()

    def __eq__(self, other):
        try:
            diff = self - other
        except (TypeError, ValueError):
            return NotImplemented
        return diff.is_zero()

    __hash__ = None

    def subs(self, bindings) -> "QuadExtScalar":
        D = self.D.subs(bindings) if self.D is not None else None
        return QuadExtScalar(self.a.subs(bindings), self.b.subs(bindings), self.c.subs(bindings), D)

    def map_parts(self, fn) -> "QuadExtScalar":
        return QuadExtScalar(fn(self.a), fn(self.b), self.c, self.D)

    def rational_part(self):
        return self.a, self.c

    def radical_part(self):
        return self.b, self.c

    def to_float(self, point) -> float:
        import math

        a = float(self.a.evaluate(point))
        c = float(self.c.evaluate(point))
        if self.b.is_zero():
            return a / c
        D = float(self.D.evaluate(point))
        if D < 0:
            raise ValueError("negative discriminant: value is not real")
        return (a + float(self.b.evaluate(point)) * math.sqrt(D)) / c

    def __repr__(self):
        if self.b.is_zero():
            s = f"({self.a})"
        else:
            s = f"({self.a}) + ({self.b})*sqrt({self.D})"
        if self.c != 1:
            s = f"[{s}]/({self.c})"
        return s


def quadext_arith(a: QuadExtScalar, b: QuadExtScalar | None, op: str) -> QuadExtScalar:
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "conj":
        return a.conj()
    raise ValueError(f"unknown operation {op!r}")


# -- parser ------------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\S))")


class _Parser:
    """Recursive-descent parser for polynomial expressions.

    Grammar: sums/differences of products of powers of atoms; atoms are
    integers, symbols, ``pi`` and parenthesised expressions.  ``/`` is only
    allowed with a rational right operand.
    """

    def __init__(self, text: str):
        self.tokens = []
        pos = 0
        text = text.strip()
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if not m or m.end() == pos:
                break
            num, name, op = m.groups()
            if num is not None:
                self.tokens.append(("num", int(num)))
            elif name is not None:
                self.tokens.append(("name", name))
            elif op is not None:
                self.tokens.append(("op", op))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def parse(self):
        if not self.tokens:
            raise ValueError("empty expression")
        value = self.expr()
        if self.i != len(self.tokens):
            raise ValueError(f"unexpected token {self.peek()[1]!r}")
        return value

    def expr(self):
        sign = 1
        if self.peek() == ("op", "-"):
            self.take()
            sign = -1
        elif self.peek() == ("op", "+"):
            self.take()
        value = self.term()
        if sign < 0:
            value = -value
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self):
        value = self.power()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            rhs = self.power()
            if op == "*":
                value = _mul_any(value, rhs)
            else:
                q = _as_constant(rhs)
                value = _mul_any(value, ParamPoly.const(1 / q))
        return value

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            kind, e = self.take()
            if kind != "num":
                raise ValueError("exponent must be a non-negative integer")
            return base ** e
        return base

    def atom(self):
        kind, val = self.take()
        if kind == "num":
            return ParamPoly.const(val)
        if kind == "name":
            if val == "pi":
                return PiPoly.pi()
            if val not in INDEX:
                raise ValueError(f"symbol {val!r} is not in the parameter alphabet")
            return ParamPoly.var(val)
        if val == "(":
            inner = self.expr()
            if self.take() != ("op", ")"):
                raise ValueError("missing ')'")
            return inner
        if val == "-":
            return -self.power()
        raise ValueError(f"unexpected token {val!r}")


def _mul_any(a, b):
    if isinstance(a, PiPoly) or isinstance(b, PiPoly):
        return PiPoly.coerce(a) * PiPoly.coerce(b)
    return a * b


def _as_constant(v) -> Rational:
    if isinstance(v, PiPoly):
        c = v.constant_value()
        if c is None:
            raise ValueError("division by a non-constant")
        v = ParamPoly.const(c)
    if not v.is_constant() or v.is_zero():
        raise ValueError("division by a non-constant or zero")
    return v.constant_term()
