import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from effdyn.errors import ParseError
from effdyn.robotfile import PRESETS, dumps, from_document, load, load_any, load_preset, loads

MINIMAL = """{
  "floating": false,
  "base": {"mass": 1.0},
  "links": [{"mass": 0.5, "length": 0.4}],
  "transmissions": [{"N": 10, "eta_f": 0.9, "tau_max": 2.0}]
}
"""


def test_preset_contents():
    assert PRESETS == ("leg2dof",)
    d = load_preset()
    assert d.name == "leg2dof"
    assert d.model.nb == 3 and d.model.m == 2
    assert [t.gear_ratio for t in d.model.transmissions] == [20.0, 20.0]
    np.testing.assert_allclose([t.backward_efficiency for t in d.model.transmissions],
                               [0.75031133, 0.57234273], atol=1e-8)
    np.testing.assert_allclose(d.state.q, np.radians([60, 60]))
    assert d.model.base.inertia == pytest.approx(5.0 * 0.4 ** 2 / 6)
    with pytest.raises(ValueError):
        load_preset("hexapod")


def test_defaults_are_filled_in():
    d = loads(MINIMAL)
    link = d.model.links[0]
    assert link.com == 0.2 and link.inertia == pytest.approx(0.5 * 0.16 / 12)
    assert d.document["D"] == [[1.0]]
    assert d.document["gravity"] == [0.0, -9.81]
    assert d.document["configuration"] == {"q_b": [], "q": [0.0]}
    assert d.model.transmissions[0].rotor_inertia == 0.0
    assert d.name == "robot"


def test_degrees_become_radians(leg):
    d = leg.with_configuration([30, 90], q_b=[0.1, 0.2, 45])
    np.testing.assert_allclose(d.state.q, [math.pi / 6, math.pi / 2])
    np.testing.assert_allclose(d.state.q_b, [0.1, 0.2, math.pi / 4])
    np.testing.assert_allclose(d.state.phi, 20 * d.state.q)
    assert d.document["configuration"]["q"] == [30.0, 90.0]


def test_round_trip_preset(leg):
    text = dumps(leg)
    again = loads(text)
    assert again.document == leg.document
    assert dumps(again) == text


def test_load_from_path(tmp_path, leg):
    p = tmp_path / "leg.json"
    p.write_text(dumps(leg))
    assert load(p).document == leg.document
    assert load_any(p).document == leg.document
    assert load_any("leg2dof").document == leg.document


positive = st.floats(1e-3, 1e3, allow_nan=False)


@st.composite
def documents(draw):
    m = draw(st.integers(1, 4))
    links = []
    for _ in range(m):
        L = draw(positive)
        links.append({"mass": draw(positive), "length": L, "com": draw(st.floats(0, 1)) * L,
                      "inertia": draw(st.floats(0, 10)), "mount": draw(st.sampled_from(["parent", 0]))})
    trans = [{"N": draw(st.floats(1.5, 200)), "eta_f": draw(st.floats(0.01, 1.0)),
              "rotor_inertia": draw(st.floats(0, 1e-2)), "tau_max": draw(positive)} for _ in range(m)]
    floating = draw(st.booleans())
    q = [draw(st.floats(-180, 180)) for _ in range(m)]
    qb = [draw(st.floats(-5, 5)) for _ in range(3)] if floating else []
    return {"name": draw(st.text(min_size=1, max_size=8)), "floating": floating,
            "base": {"mass": draw(positive), "side": draw(st.floats(0, 2)),
                     "hip_offset": [draw(st.floats(-1, 1)), draw(st.floats(-1, 1))]},
            "links": links, "transmissions": trans, "gravity": [0.0, -draw(st.floats(0, 20))],
            "configuration": {"q_b": qb, "q": q}}


@settings(max_examples=100, deadline=None)
@given(documents())
def test_round_trip_random(doc):
    first = from_document(json.loads(json.dumps(doc)))
    second = loads(dumps(first))
    assert second.document == first.document
    a, b = first.model, second.model
    assert a.base == b.base and a.links == b.links and a.transmissions == b.transmissions
    np.testing.assert_array_equal(a.D, b.D)
    np.testing.assert_array_equal(first.state.s, second.state.s)


def bad(text, fragment, line):
    with pytest.raises(ParseError) as info:
        loads(text)
    assert fragment in str(info.value)
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}: ")


def test_error_lines():
    bad(MINIMAL.replace('"length": 0.4', '"length": -0.4'), "length must be positive", 4)
    bad(MINIMAL.replace('"eta_f": 0.9', '"eta_f": 1.2'), "eta_f must lie in (0, 1]", 5)
    bad(MINIMAL.replace('"N": 10', '"N": 1'), "N must exceed 1", 5)
    bad(MINIMAL.replace('"mass": 1.0', '"mass": 1.0, "color": "red"'), "unknown key 'color'", 3)
    bad(MINIMAL.replace('"mass": 1.0', '"mass": NaN'), "must be finite", 3)
    bad(MINIMAL.replace('"mass": 1.0', '"mass": "heavy"'), "must be a number", 3)
    bad(MINIMAL.replace('"links": [{"mass": 0.5, "length": 0.4}]', '"links": []'),
        "links must be a non-empty array", 4)
    bad(MINIMAL.replace('"tau_max": 2.0}]', '"tau_max": 2.0}, {"N": 5, "eta_f": 1, "tau_max": 1}]'),
        "2 transmissions for 1 links", 5)
    bad(MINIMAL.replace('"floating": false', '"floating": false, "floating": true'), "duplicate key", 2)
    bad(MINIMAL.replace('"length": 0.4}', '"length": 0.4, "mount": 7}'), "mount must be", 4)


def test_syntax_errors_have_lines():
    bad(MINIMAL.replace('"base"', 'base'), "", 3)
    bad(MINIMAL + "{}", "extra data", 7)
    bad("", "expecting a JSON value", 1)
    bad("[1, 2]", "document must be an object", 1)


def test_singular_topology_rejected():
    doc = json.loads(MINIMAL)
    doc["links"].append({"mass": 0.5, "length": 0.4})
    doc["transmissions"].append({"N": 10, "eta_f": 0.9, "tau_max": 2.0})
    doc["D"] = [[1, 1], [1, 1]]
    with pytest.raises(ParseError):
        from_document(doc)


def test_configuration_length_checked():
    with pytest.raises(ParseError, match="must have 1 entries"):
        loads(MINIMAL.replace("\n}", ',\n  "configuration": {"q": [1, 2]}\n}'))
