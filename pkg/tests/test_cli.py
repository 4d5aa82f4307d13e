import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from pwlyap.cli import RunConfig, SpecError, emit_spec, main, parse_rational, parse_system_spec
from pwlyap.systems import FAMILY_ALPHABETS, FamilySpec, PiecewiseSystem, build_family


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def spec_file(tmp_path):
    def make(doc):
        p = tmp_path / "spec.json"
        p.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
        return str(p)
    return make


def test_parse_family_spec():
    spec = parse_system_spec('{"family":"H","params":{"m1":"1","m2":"0"}}')
    assert isinstance(spec, FamilySpec)
    assert spec.tag == "H" and spec.params == {"m1": Fraction(1), "m2": Fraction(0)}
    pw = build_family(spec)
    assert "l1" in pw.parameters() and "m1" not in pw.parameters()


def test_parse_named_point():
    spec = parse_system_spec('{"family":"V","point":"F1"}')
    assert spec.point == "F1"
    pw = build_family(spec)
    assert str(pw.zone1.dx.subs({"d1": 0})) != ""
    assert not (pw.parameters() - {"d1", "d2"})


@pytest.mark.parametrize("text,where", [
    ('{"family":"H","params":{"m1":"0.5"}}', "m1"),
    ('{"family":"Q"}', "family"),
    ('{"family":"H","params":{"zz":"1"}}', "zz"),
    ('{"family":"H","colour":"red"}', "colour"),
    ('{"family":"H",', "line"),
])
def test_parse_errors(text, where):
    with pytest.raises(SpecError) as err:
        parse_system_spec(text)
    assert where in str(err.value)


def test_parse_raw_mode():
    doc = {"upper": {"dx": [["-1", 0, 1], ["1/2", 2, 0]], "dy": [["1", 1, 0], ["-1", 1, 1]]},
           "lower": {"dx": [["-1", 0, 1]], "dy": [["1", 1, 0], ["-1", 1, 1]]}, "axis": "y"}
    pw = parse_system_spec(json.dumps(doc))
    assert isinstance(pw, PiecewiseSystem)
    assert pw.zone1.dx.to_str() == "1/2*x^2 - y"
    bad = dict(doc, axis="z")
    with pytest.raises(SpecError):
        parse_system_spec(json.dumps(bad))


def test_parse_rational():
    assert parse_rational("3/2", "f") == Fraction(3, 2)
    assert parse_rational("-4", "f") == -4
    for text in ("1.5", "1e3", "abc", ""):
        with pytest.raises(SpecError):
            parse_rational(text, "f")


def test_runconfig_validation():
    RunConfig("lyap", None, 6, "raw", "json")
    for bad in (dict(order=1), dict(order=17), dict(trail="odd"), dict(fmt="xml")):
        kw = dict(order=6, trail="raw", fmt="json")
        kw.update(bad)
        with pytest.raises(SpecError):
            RunConfig("lyap", None, kw["order"], kw["trail"], kw["fmt"])
    with pytest.raises(SpecError):
        RunConfig("plot", None, 6, "raw", "json")


rationals = st.fractions(min_value=-20, max_value=20, max_denominator=50)


@given(st.sampled_from(sorted(FAMILY_ALPHABETS)), st.data())
def test_emit_roundtrip(tag, data):
    names = [s for s in FAMILY_ALPHABETS[tag] if s not in ("b", "eps0")]
    chosen = data.draw(st.lists(st.sampled_from(names), unique=True, max_size=len(names)))
    params = {k: data.draw(rationals) for k in chosen}
    spec = FamilySpec(tag, params)
    back = parse_system_spec(emit_spec(spec))
    assert back.tag == spec.tag and back.params == spec.params and back.point == spec.point


def test_emit_roundtrip_point_and_eps():
    spec = FamilySpec("V", {"n1": Fraction(1, 3)}, Fraction(1, 100), "F2")
    back = parse_system_spec(emit_spec(spec))
    assert (back.tag, back.params, back.epsilon0, back.point) == ("V", spec.params, Fraction(1, 100), "F2")


def test_lyap_json(capsys, spec_file):
    path = spec_file({"family": "Hc", "params": {"d": "0"}})
    code, out, _ = run(capsys, "lyap", path, "--order", "3")
    assert code == 0
    doc = json.loads(out)
    assert doc["W"]["2"] == "2/3*m1 - 2/3*m2"
    code2, out2, _ = run(capsys, "lyap", path, "--order", "3")
    assert out2 == out


def test_lyap_from_family_flag(capsys):
    code, out, _ = run(capsys, "lyap", "--family", "V", "--point", "F1", "--order", "8")
    assert code == 0
    W = json.loads(out)["W"]
    assert all(W[str(k)] == "0" for k in range(2, 8))
    assert W["8"] == "2/3"


def test_delta_csv(capsys, spec_file, tmp_path):
    path = spec_file({"family": "Hc", "params": {"d": "0", "l": "1", "m1": "1/10", "m2": "0",
                                                  "n1": "0", "n2": "0"}})
    target = tmp_path / "d.csv"
    code, out, _ = run(capsys, "delta", path, "--format", "csv", "--grid", "4", "--out", str(target))
    assert code == 0 and out == ""
    lines = target.read_text().splitlines()
    assert lines[0] == "r0,delta" and len(lines) == 5
    assert all(float(x.split(",")[1]) > 0 for x in lines[1:])


def test_delta_needs_numbers(capsys, spec_file):
    code, _, err = run(capsys, "delta", spec_file({"family": "Hc"}))
    assert code == 2 and "numeric values" in err


def test_cycles_and_classify(capsys, spec_file):
    path = spec_file({"family": "Hc", "params": {"d": "0", "l": "1", "m1": "0", "m2": "0",
                                                  "n1": "1", "n2": "2"}})
    code, out, _ = run(capsys, "cycles", path, "--grid", "20")
    assert code == 0 and json.loads(out)["count"] == 0
    code, out, _ = run(capsys, "classify", path, "--at", "1/10,0")
    assert code == 0 and json.loads(out)["kind"] == "crossing"


def test_centers_and_darboux(capsys):
    code, out, _ = run(capsys, "centers", "--family", "V2", "--vanishing", "--order", "9")
    assert code == 0
    rep = json.loads(out)[0]
    assert rep["pass"] and rep["vanishing"]["pass"]
    code, out, _ = run(capsys, "darboux", "--family", "V2")
    assert code == 0 and json.loads(out)["boundary_form"] == "(-y + 1)^(l2)*(l2*y + 1)^(1)"
    code, _, err = run(capsys, "darboux", "--family", "H1")
    assert code == 2


def test_centers_failure_exit(capsys, monkeypatch):
    import pwlyap.centers as centers

    monkeypatch.setattr(centers, "certify", lambda fam: centers.Report(fam.id, "darboux", False, ["forced"]))
    code, out, _ = run(capsys, "centers", "--family", "V2")
    assert code == 1 and json.loads(out)[0]["pass"] is False


def test_expand(capsys):
    code, out, _ = run(capsys, "expand", "--point", "F1", "--degree", "0", "--orders", "7,8")
    assert code == 0
    doc = json.loads(out)
    assert doc["W"] == {"7": "0", "8": "2/3"}
    code, _, err = run(capsys, "expand", "--point", "F1", "--frame", "u")
    assert code == 2 and "non-invertible" in err
    code, _, err = run(capsys, "expand", "--point", "F1", "--degree", "3", "--orders", "3")
    assert code == 2


def test_unfold(capsys, spec_file):
    path = spec_file({"family": "Hc", "params": {"d": "0", "l": "0", "m1": "1/10", "m2": "0",
                                                  "n1": "0", "n2": "0"}})
    code, out, _ = run(capsys, "unfold", path, "--controls", "1:d", "--top", "2")
    assert code == 0
    doc = json.loads(out)
    assert doc["signs"][-1] == {"1": -1, "2": 1}
    assert all("/" in v or v.lstrip("-").isdigit() for p in doc["points"] for v in p.values())


def test_usage_errors(capsys, spec_file):
    assert run(capsys, "nosuch")[0] == 2
    assert run(capsys, "lyap")[0] == 2
    assert run(capsys, "lyap", "/nonexistent/spec.json")[0] == 2
    bad = spec_file('{"family":"H","params":{"m1":"0.5"}}')
    code, _, err = run(capsys, "lyap", bad)
    assert code == 2 and "decimal" in err
    assert run(capsys, "lyap", "--family", "H", "--order", "40")[0] == 2
