"""JSON robot description files.

Angles in the file (joint angles and base pitch) are in degrees and are
converted to radians at load. Every validation error carries the line of the
offending entry. The schema is documented in ``docs/robot_schema.json``.
"""
from dataclasses import dataclass
from importlib import resources
import json
from json import decoder, scanner
import math
from types import SimpleNamespace

import numpy as np

from .dynamics import BaseSpec, LinkSpec, RobotModel, RobotState
from .errors import EffdynError, ParseError
from .topology import TransmissionSpec

PRESETS = ("leg2dof",)


class _Obj(dict):
    line = 1
    key_lines: dict


class _Arr(list):
    line = 1
    item_lines: list


def _loads_located(text):
    """``json.loads`` that tags every object/array with source line numbers."""
    frames = []

    def line_at(i):
        return text.count("\n", 0, i) + 1

    def scan(s, idx):
        if frames:
            frames[-1].append(idx)
        return scan_once(s, idx)

    def parse_object(s_and_end, strict, _scan, hook, pairs_hook, memo):
        start = s_and_end[1] - 1
        frames.append([])
        try:
            pairs, end = decoder.JSONObject(s_and_end, strict, scan, None, list, memo)
        finally:
            starts = frames.pop()
        obj = _Obj()
        obj.line = line_at(start)
        obj.key_lines = {}
        for (k, v), i in zip(pairs, starts):
            if k in obj:
                raise ParseError(f"duplicate key {k!r}", line_at(i))
            obj[k] = v
            obj.key_lines[k] = line_at(i)
        return obj, end

    def parse_array(s_and_end, _scan):
        start = s_and_end[1] - 1
        frames.append([])
        try:
            values, end = decoder.JSONArray(s_and_end, scan)
        finally:
            starts = frames.pop()
        arr = _Arr(values)
        arr.line = line_at(start)
        arr.item_lines = [line_at(i) for i in starts]
        return arr, end

    ctx = SimpleNamespace(
        parse_object=parse_object, parse_array=parse_array, parse_string=decoder.scanstring,
        strict=True, parse_float=float, parse_int=int,
        parse_constant=lambda name: float(name.replace("Infinity", "inf")),
        object_hook=None, object_pairs_hook=None, memo={})
    scan_once = scanner.py_make_scanner(ctx)
    ws = decoder.WHITESPACE.match
    try:
        idx = ws(text, 0).end()
        value, end = scan_once(text, idx)
    except StopIteration as exc:
        raise ParseError("expecting a JSON value", line_at(exc.value)) from None
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno) from None
    end = ws(text, end).end()
    if end != len(text):
        raise ParseError("extra data after the document", line_at(end))
    return value


# ---------------------------------------------------------------------------
# field readers


def _line(node, key=None):
    if key is not None and isinstance(node, _Obj) and key in node.key_lines:
        return node.key_lines[key]
    return getattr(node, "line", None)


def _require_obj(node, where, line):
    if not isinstance(node, dict):
        raise ParseError(f"{where} must be an object", line)
    return node


def _check_keys(node, allowed, where):
    for k in node:
        if k not in allowed:
            raise ParseError(f"unknown key {k!r} in {where}", _line(node, k))


def _number(node, key, where, default=None, *, positive=False, nonneg=False, unit=False):
    if key not in node:
        if default is None:
            raise ParseError(f"{where}: missing required key {key!r}", _line(node))
        return default
    v = node[key]
    line = _line(node, key)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParseError(f"{where}.{key} must be a number", line)
    v = float(v)
    if not math.isfinite(v):
        raise ParseError(f"{where}.{key} must be finite", line)
    if positive and not v > 0:
        raise ParseError(f"{where}.{key} must be positive, got {v!r}", line)
    if nonneg and not v >= 0:
        raise ParseError(f"{where}.{key} must be non-negative, got {v!r}", line)
    if unit and not 0 < v <= 1:
        raise ParseError(f"{where}.{key} must lie in (0, 1], got {v!r}", line)
    return v


def _vector(node, key, where, length=None, default=None):
    if key not in node:
        if default is None:
            raise ParseError(f"{where}: missing required key {key!r}", _line(node))
        return list(default)
    v = node[key]
    line = _line(node, key)
    if not isinstance(v, list):
        raise ParseError(f"{where}.{key} must be an array", line)
    out = []
    for i, x in enumerate(v):
        xl = v.item_lines[i] if isinstance(v, _Arr) else line
        if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
            raise ParseError(f"{where}.{key}[{i}] must be a finite number", xl)
        out.append(float(x))
    if length is not None and len(out) != length:
        raise ParseError(f"{where}.{key} must have {length} entries, got {len(out)}", line)
    return out


@dataclass(frozen=True, eq=False)
class RobotDescription:
    """A loaded description: the normalised document plus the built model and state."""

    document: dict
    model: RobotModel
    state: RobotState

    @property
    def name(self):
        return self.document.get("name", "robot")

    def with_configuration(self, q_deg, q_b=None):
        doc = json.loads(json.dumps(self.document))
        doc["configuration"]["q"] = [float(v) for v in q_deg]
        if q_b is not None:
            doc["configuration"]["q_b"] = [float(v) for v in q_b]
        return from_document(doc)


_TOP = ("name", "floating", "base", "links", "transmissions", "D", "gravity", "configuration")
_BASE = ("mass", "inertia", "side", "hip_offset")
_LINK = ("mass", "length", "com", "inertia", "mount")
_TRANS = ("N", "eta_f", "rotor_inertia", "tau_max")
_CONF = ("q_b", "q")


def from_document(doc) -> RobotDescription:
    """Validate a parsed document (as returned by :func:`json.loads` or the
    line-aware loader) and build the model."""
    doc = _require_obj(doc, "document", 1)
    _check_keys(doc, _TOP, "document")
    norm = {}
    if "name" in doc:
        if not isinstance(doc["name"], str):
            raise ParseError("name must be a string", _line(doc, "name"))
        norm["name"] = doc["name"]
    floating = doc.get("floating", True)
    if not isinstance(floating, bool):
        raise ParseError("floating must be true or false", _line(doc, "floating"))
    norm["floating"] = floating

    # base
    if "base" not in doc:
        raise ParseError("missing required key 'base'", _line(doc))
    b = _require_obj(doc["base"], "base", _line(doc, "base"))
    _check_keys(b, _BASE, "base")
    mass = _number(b, "mass", "base", positive=True)
    side = _number(b, "side", "base", 0.0, nonneg=True)
    inertia = _number(b, "inertia", "base", mass * side ** 2 / 6.0, nonneg=True)
    hip = _vector(b, "hip_offset", "base", 2, (0.0, 0.0))
    base = BaseSpec(mass=mass, inertia=inertia, side=side, hip_offset=tuple(hip))
    norm["base"] = {"mass": mass, "inertia": inertia, "side": side, "hip_offset": hip}

    # links
    if "links" not in doc:
        raise ParseError("missing required key 'links'", _line(doc))
    raw_links = doc["links"]
    if not isinstance(raw_links, list) or not raw_links:
        raise ParseError("links must be a non-empty array", _line(doc, "links"))
    m = len(raw_links)
    links, norm_links = [], []
    for i, node in enumerate(raw_links):
        where = f"links[{i}]"
        node = _require_obj(node, where, _line(raw_links))
        _check_keys(node, _LINK, where)
        lm = _number(node, "mass", where, positive=True)
        L = _number(node, "length", where, positive=True)
        com = _number(node, "com", where, L / 2.0, nonneg=True)
        if com > L:
            raise ParseError(f"{where}.com must not exceed the link length", _line(node, "com"))
        inertia = _number(node, "inertia", where, lm * L ** 2 / 12.0, nonneg=True)
        mount = node.get("mount", "parent")
        if mount == "parent":
            mount_idx = -1
        elif isinstance(mount, int) and not isinstance(mount, bool) and 0 <= mount <= m:
            mount_idx = mount
        else:
            raise ParseError(f"{where}.mount must be \"parent\" or a body index in [0, {m}]",
                             _line(node, "mount"))
        links.append(LinkSpec(mass=lm, length=L, com=com, inertia=inertia, mount=mount_idx))
        norm_links.append({"mass": lm, "length": L, "com": com, "inertia": inertia, "mount": mount})
    norm["links"] = norm_links

    # transmissions
    if "transmissions" not in doc:
        raise ParseError("missing required key 'transmissions'", _line(doc))
    raw_tr = doc["transmissions"]
    if not isinstance(raw_tr, list):
        raise ParseError("transmissions must be an array", _line(doc, "transmissions"))
    if len(raw_tr) != m:
        raise ParseError(f"{len(raw_tr)} transmissions for {m} links", _line(doc, "transmissions"))
    trans, norm_tr = [], []
    for i, node in enumerate(raw_tr):
        where = f"transmissions[{i}]"
        node = _require_obj(node, where, _line(raw_tr))
        _check_keys(node, _TRANS, where)
        N = _number(node, "N", where, positive=True)
        if not N > 1:
            raise ParseError(f"{where}.N must exceed 1 (a speed reduction)", _line(node, "N"))
        eta = _number(node, "eta_f", where, unit=True)
        Ir = _number(node, "rotor_inertia", where, 0.0, nonneg=True)
        tau = _number(node, "tau_max", where, positive=True)
        trans.append(TransmissionSpec(gear_ratio=N, forward_efficiency=eta, rotor_inertia=Ir,
                                      torque_limit=tau))
        norm_tr.append({"N": N, "eta_f": eta, "rotor_inertia": Ir, "tau_max": tau})
    norm["transmissions"] = norm_tr

    # topology
    if "D" in doc:
        raw_D = doc["D"]
        line = _line(doc, "D")
        if not isinstance(raw_D, list) or len(raw_D) != m:
            raise ParseError(f"D must be a {m}x{m} array", line)
        rows = []
        for i, row in enumerate(raw_D):
            rl = raw_D.item_lines[i] if isinstance(raw_D, _Arr) else line
            if not isinstance(row, list) or len(row) != m:
                raise ParseError(f"D must be a {m}x{m} array (row {i})", rl)
            rows.append(_vector({"row": row}, "row", f"D[{i}]", m))
        D = rows
    else:
        D = np.eye(m).tolist()
    norm["D"] = D
    gravity = _vector(doc, "gravity", "document", 2, (0.0, -9.81))
    norm["gravity"] = gravity

    # configuration
    nb = 3 if floating else 0
    conf = doc.get("configuration", _Obj())
    conf = _require_obj(conf, "configuration", _line(doc, "configuration"))
    _check_keys(conf, _CONF, "configuration")
    q_deg = _vector(conf, "q", "configuration", m, [0.0] * m)
    qb = _vector(conf, "q_b", "configuration", nb, [0.0] * nb)
    norm["configuration"] = {"q_b": qb, "q": q_deg}

    try:
        model = RobotModel(base=base, links=tuple(links), transmissions=tuple(trans),
                           D=np.array(D), gravity=tuple(gravity), floating=floating)
    except EffdynError as exc:
        raise ParseError(str(exc), _line(doc, "D")) from None
    except ValueError as exc:
        raise ParseError(str(exc), _line(doc)) from None
    y = np.concatenate([qb[:2], np.radians(qb[2:]), np.radians(q_deg)]) if nb else np.radians(q_deg)
    state = RobotState.from_reduced(model, y)
    return RobotDescription(document=norm, model=model, state=state)


def loads(text) -> RobotDescription:
    return from_document(_loads_located(text))


def load(path) -> RobotDescription:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def dumps(desc: RobotDescription) -> str:
    """Serialise; floats use their shortest round-trip repr so reloads are bit-identical."""
    return json.dumps(desc.document, indent=2) + "\n"


def load_preset(name="leg2dof") -> RobotDescription:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    text = resources.files("effdyn").joinpath(f"data/{name}.json").read_text(encoding="utf-8")
    return loads(text)


def load_any(spec) -> RobotDescription:
    """A path to a description file, or the name of a bundled preset."""
    if str(spec) in PRESETS:
        return load_preset(str(spec))
    return load(spec)
