import math
import random
from fractions import Fraction

import pytest

from pwlyap.algebra import ParamPoly as P
from pwlyap.numeric import IntegrationError, NumericField, delta_numeric, half_maps, integrate_piecewise
from pwlyap.systems import PiecewiseSystem, PlanarPolySystem, build_family

R = P.parse
ZERO = {k: 0 for k in ("d1", "d2", "l1", "l2", "m1", "m2", "n1", "n2")}

LINEAR = PiecewiseSystem(PlanarPolySystem(R("-y"), R("x")), PlanarPolySystem(R("-y"), R("x")))


def test_numeric_field_evaluates():
    f = NumericField.from_system(PlanarPolySystem(R("-y + 2*x^2"), R("x - x*y")))
    assert f(1.0, 2.0) == (0.0, -1.0)
    assert f.degree() == 2
    with pytest.raises(ValueError):
        NumericField.from_system(PlanarPolySystem(R("-y + a*x^2"), R("x")))


def test_linear_center_full_turn():
    tr = integrate_piecewise(LINEAR, (0.5, 0.0), t_max=2 * math.pi)
    x, y = tr.end
    assert abs(x - 0.5) < 1e-9 and abs(y) < 1e-9
    for _, (ex, ey) in tr.events:
        assert ey == 0.0


def test_half_turn_single_event():
    pw = build_family("H", dict(ZERO, l1=1, m1=Fraction(1, 3), n2=-1))
    tr = integrate_piecewise(pw, (0.1, 0.0), t_max=20.0, stop_after_events=1)
    assert len(tr.events) == 1
    assert tr.events[0][1][0] < 0
    # in the other direction of time the first crossing is also on the negative side
    tr = integrate_piecewise(pw, (0.1, 0.0), t_max=20.0, stop_after_events=1, direction=-1)
    assert len(tr.events) == 1 and tr.events[0][1][0] < 0


@pytest.mark.parametrize("tag,params", [
    ("H", dict(ZERO, l1=1, l2=-2, m1=1, m2=Fraction(1, 2), n1=Fraction(1, 3), n2=2)),
    ("Hc", {"d": 0, "l": 2, "m1": -1, "m2": 1, "n1": 1, "n2": Fraction(1, 2)}),
    ("V", dict(ZERO, l1=1, l2=-1, m1=1, m2=2, n1=Fraction(1, 2), n2=Fraction(-2, 3))),
])
def test_invariant_line_is_kept(tag, params):
    pw = build_family(tag, params)
    for x0 in (0.3, -0.4):
        tr = integrate_piecewise(pw, (x0, 1.0), t_max=0.5)
        assert all(abs(y - 1.0) <= 1e-10 for _, y in tr.states)


def test_sliding_is_reported():
    # both fields push towards the line: sliding
    pw = PiecewiseSystem(PlanarPolySystem(R("1"), R("-1")), PlanarPolySystem(R("1"), R("1")))
    with pytest.raises(IntegrationError) as err:
        integrate_piecewise(pw, (0.0, 0.5), t_max=2.0)
    assert err.value.tag == "sliding"


def test_no_return_is_reported():
    pw = build_family("H", dict(ZERO))
    up = PiecewiseSystem(PlanarPolySystem(R("1"), R("0")), pw.zone2)
    with pytest.raises(IntegrationError) as err:
        delta_numeric(up, 0.1)
    assert err.value.tag == "no-return"


def test_delta_linear_center():
    assert abs(delta_numeric(LINEAR, 0.1)) < 1e-10
    assert abs(delta_numeric(LINEAR, 0.3)) < 1e-10


def test_delta_symmetric_family():
    rng = random.Random(3)
    for _ in range(3):
        p = dict(ZERO, l1=rng.uniform(-2, 2), l2=rng.uniform(-2, 2), n1=rng.uniform(-2, 2),
                 n2=rng.uniform(-2, 2))
        p = {k: Fraction(v).limit_denominator(100) for k, v in p.items()}
        pw = build_family("H", p)
        for r0 in (0.01, 0.05, 0.1):
            assert abs(delta_numeric(pw, r0)) <= 1e-10


def test_delta_first_quadratic_term():
    pw = build_family("H", dict(ZERO, m1=Fraction(3, 100)))
    d = delta_numeric(pw, 0.01)
    expected = Fraction(2, 3) * Fraction(3, 100) * Fraction(1, 10 ** 4)
    assert math.isclose(d, float(expected), rel_tol=0.1)
    assert d > 0


def test_delta_precondition():
    with pytest.raises(ValueError):
        delta_numeric(LINEAR, 0.6)
    with pytest.raises(ValueError):
        delta_numeric(LINEAR, 0)


def test_mp_and_float_agree():
    pw = build_family("H", dict(ZERO, m1=Fraction(1, 5), l1=1, n2=Fraction(1, 2)))
    a = delta_numeric(pw, 0.05)
    b = delta_numeric(pw, "0.05", digits=30)
    assert abs(a - float(b)) < 1e-12
    p, q = half_maps(pw, "0.05", digits=30)
    assert abs(float(p - q) - float(b)) < 1e-25


def _mirror_reverse(z: PlanarPolySystem) -> PlanarPolySystem:
    # (x, y, t) -> (x, -y, -t)
    m = {"y": R("-y")}
    return PlanarPolySystem(-z.dx.subs(m), z.dy.subs(m))


def test_time_reversal_symmetry():
    rng = random.Random(11)
    monos = ["x^2", "x*y", "y^2"]
    for _ in range(4):
        def rand_zone():
            dx = R("-y") + sum((R(m) * Fraction(rng.randint(-10, 10), 10) for m in monos), P())
            dy = R("x") + sum((R(m) * Fraction(rng.randint(-10, 10), 10) for m in monos), P())
            return PlanarPolySystem(dx, dy)
        pw = PiecewiseSystem(rand_zone(), rand_zone())
        back = PiecewiseSystem(_mirror_reverse(pw.zone2), _mirror_reverse(pw.zone1))
        for r0 in (0.02, 0.08):
            a = delta_numeric(pw, r0)
            b = delta_numeric(back, r0)
            assert abs(abs(a) - abs(b)) < 1e-9
            assert abs(a + b) < 1e-9
