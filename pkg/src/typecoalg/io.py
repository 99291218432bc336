"""Strict JSON manifests for spaces, CPSs, structures, games and morphisms.

Every file is an object with ``format_version`` (currently 1), a ``kind``
and the kind's body fields; unknown fields are errors.  Rationals are
written ``"p/q"`` in lowest terms with ``q > 0``, or as integers.
Serialization is canonical: declaration order is kept, zero weights are
dropped and rationals are reduced, so parse, serialize and parse again
gives the same objects.
"""
from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Any, Dict, List, Mapping, Optional

from .coalg import Coalgebra
from .games import ExtensiveGame, strategies, xi_atoms
from .measure import CPS, ConditionalSpace, MeasureError, ProbabilityMeasure

FORMAT_VERSION = 1
KINDS = ("space", "cps", "structure", "game", "morphism")
_RATIONAL = re.compile(r"^(-?\d+)(?:/(\d+))?$")
_BAD_LABEL = set(",()")
_BAD_ACTION = set(",()/.|:")


class ParseError(ValueError):
    """The input is not a well-formed manifest."""


@dataclass
class MorphismFile:
    maps: Dict[str, Dict[str, str]]
    src: Optional[str] = None      # resolved paths, when the file names them
    dst: Optional[str] = None


@dataclass
class Manifest:
    kind: str
    value: Any
    path: Optional[str] = None


def parse_rational(value, where: str = "value") -> Fraction:
    if isinstance(value, bool) or isinstance(value, float):
        raise ParseError(f"{where}: {value!r} is not a rational (use \"p/q\" or an integer)")
    if isinstance(value, int):
        return Fraction(value)
    if not isinstance(value, str):
        raise ParseError(f"{where}: expected a rational, got {type(value).__name__}")
    m = _RATIONAL.match(value)
    if not m:
        raise ParseError(f"{where}: {value!r} is not of the form p/q")
    p, q = int(m.group(1)), m.group(2)
    if q is None:
        return Fraction(p)
    q = int(q)
    if q == 0:
        raise ParseError(f"{where}: zero denominator in {value!r}")
    if gcd(p, q) != 1:
        raise ParseError(f"{where}: {value!r} is not in lowest terms")
    return Fraction(p, q)


def format_rational(x: Fraction):
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _label(value, where, bad=_BAD_LABEL) -> str:
    if not isinstance(value, str) or not value:
        raise ParseError(f"{where}: expected a nonempty string label, got {value!r}")
    if set(value) & bad:
        raise ParseError(f"{where}: label {value!r} may not contain any of {''.join(sorted(bad))!r}")
    return value


def _fields(obj, where, required, optional=()):
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object")
    unknown = sorted(set(obj) - set(required) - set(optional))
    if unknown:
        raise ParseError(f"{where}: unknown field(s) {', '.join(unknown)}")
    missing = [k for k in required if k not in obj]
    if missing:
        raise ParseError(f"{where}: missing field(s) {', '.join(missing)}")
    return obj


def _list(value, where) -> list:
    if not isinstance(value, list):
        raise ParseError(f"{where}: expected a list")
    return value


def _dict(value, where) -> dict:
    if not isinstance(value, dict):
        raise ParseError(f"{where}: expected an object")
    return value


def _unique(items, where):
    seen = set()
    for x in items:
        if x in seen:
            raise ParseError(f"{where}: duplicate entry {x!r}")
        seen.add(x)
    return items


# --- reading -------------------------------------------------------------

def load(path: str) -> Manifest:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    return loads(text, base_dir=os.path.dirname(os.path.abspath(path)), path=path)


def loads(text: str, base_dir: str = ".", path: Optional[str] = None) -> Manifest:
    try:
        doc = json.loads(text, parse_float=_reject_float)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path or '<input>'}: invalid JSON: {exc}") from None
    except ParseError as exc:
        raise ParseError(f"{path or '<input>'}: {exc}") from None
    return from_document(doc, base_dir, path)


def _reject_float(text):
    raise ParseError(f"float literal {text} is not allowed; write rationals as \"p/q\"")


def from_document(doc, base_dir: str = ".", path: Optional[str] = None) -> Manifest:
    where = path or "<input>"
    doc = _dict(doc, where)
    kind = doc.get("kind")
    if kind not in KINDS:
        raise ParseError(f"{where}: kind must be one of {', '.join(KINDS)}, got {kind!r}")
    version = doc.get("format_version")
    if version != FORMAT_VERSION or isinstance(version, bool):
        raise ParseError(f"{where}: unsupported format_version {version!r}")
    body = {k: v for k, v in doc.items() if k not in ("kind", "format_version")}
    reader = _READERS[kind]
    try:
        value = reader(body, base_dir, where)
    except MeasureError as exc:
        raise ParseError(f"{where}: {exc}") from None
    return Manifest(kind, value, path)


def _space_ref(value, base_dir, where) -> ConditionalSpace:
    if isinstance(value, str):
        ref = os.path.join(base_dir, value)
        m = load(ref)
        if m.kind != "space":
            raise ParseError(f"{where}: {value} is a {m.kind} file, not a space")
        return m.value
    return _read_space(value, base_dir, where + ".space")


def _read_space(body, base_dir, where) -> ConditionalSpace:
    _fields(body, where, ("points", "events"))
    points = _unique([_label(p, f"{where}.points") for p in _list(body["points"], f"{where}.points")],
                     f"{where}.points")
    events = []
    for k, ev in enumerate(_list(body["events"], f"{where}.events")):
        w = f"{where}.events[{k}]"
        _fields(ev, w, ("label", "members"))
        members = _unique([_label(a, w) for a in _list(ev["members"], f"{w}.members")], f"{w}.members")
        events.append((_label(ev["label"], w), members))
    return ConditionalSpace(points, events)


def _read_measure(obj, where, atom) -> ProbabilityMeasure:
    weights = {}
    for key, v in _dict(obj, where).items():
        weights[atom(key, where)] = parse_rational(v, f"{where}[{key}]")
    return ProbabilityMeasure(weights)


def _read_cps(body, base_dir, where) -> CPS:
    _fields(body, where, ("space", "conditionals"))
    space = _space_ref(body["space"], base_dir, where)

    def atom(key, w):
        if key not in space:
            raise ParseError(f"{w}: unknown atom {key!r}")
        return key
    conds = {label: _read_measure(m, f"{where}.conditionals[{label}]", atom)
             for label, m in _dict(body["conditionals"], f"{where}.conditionals").items()}
    return CPS(space, conds)


def parse_belief_key(key: str, width: int, where: str):
    if not (key.startswith("(") and key.endswith(")")):
        raise ParseError(f"{where}: belief key {key!r} must look like (theta,type,...)")
    parts = [p.strip() for p in key[1:-1].split(",")]
    if len(parts) != width + 1 or not all(parts):
        raise ParseError(f"{where}: belief key {key!r} needs a payoff state and {width} opponent type(s)")
    return parts[0], tuple(parts[1:])


def _read_structure(body, base_dir, where) -> Coalgebra:
    _fields(body, where, ("base", "agents"))
    base = _space_ref(body["base"], base_dir, where)
    carriers, raw = {}, {}
    for k, a in enumerate(_list(body["agents"], f"{where}.agents")):
        w = f"{where}.agents[{k}]"
        _fields(a, w, ("id", "types", "beliefs"))
        i = _label(a["id"], f"{w}.id")
        if i in carriers:
            raise ParseError(f"{w}: duplicate agent {i!r}")
        types = _unique([_label(t, f"{w}.types") for t in _list(a["types"], f"{w}.types")], f"{w}.types")
        if not types:
            raise ParseError(f"{w}: agent {i!r} has an empty carrier")
        carriers[i] = types
        raw[i] = _dict(a["beliefs"], f"{w}.beliefs")
    if not carriers:
        raise ParseError(f"{where}: no agents")
    skeleton = Coalgebra(base, carriers, {}, check=False)
    beliefs = {}
    for i in skeleton.agents:
        opp = skeleton.opponents(i)
        space = skeleton.belief_space(i)
        beliefs[i] = {}
        for t, conds in raw[i].items():
            w = f"{where}.beliefs[{i}][{t}]"
            if t not in carriers[i]:
                raise ParseError(f"{w}: unknown type {t!r}")

            def atom(key, w2, opp=opp):
                theta, prof = parse_belief_key(key, len(opp), w2)
                if theta not in base:
                    raise ParseError(f"{w2}: unknown payoff state {theta!r}")
                for j, u in zip(opp, prof):
                    if u not in carriers[j]:
                        raise ParseError(f"{w2}: {u!r} is not a type of agent {j!r}")
                return theta, prof
            beliefs[i][t] = CPS(space, {label: _read_measure(m, f"{w}[{label}]", atom)
                                        for label, m in _dict(conds, w).items()})
    return Coalgebra(base, carriers, beliefs, check=False)


def parse_history(text: str, width: int, where: str):
    if text == "":
        return ()
    out = []
    for prof in text.split("/"):
        acts = tuple(prof.split(","))
        if len(acts) != width or not all(acts):
            raise ParseError(f"{where}: history {text!r} needs {width} actions per profile")
        out.append(acts)
    return tuple(out)


def format_history(x) -> str:
    return "/".join(",".join(p) for p in x)


def parse_xi(text: str, g: ExtensiveGame, where: str):
    parts = text.split("|")
    if len(parts) != len(g.players):
        raise ParseError(f"{where}: {text!r} needs one theta:strategy per player")
    atom = []
    for i, part in zip(g.players, parts):
        theta, sep, strat = part.partition(":")
        if not sep:
            raise ParseError(f"{where}: {part!r} is not theta:strategy")
        atom.append((theta, tuple(strat.split(".")) if strat else ()))
    return tuple(atom)


def _read_game(body, base_dir, where) -> ExtensiveGame:
    _fields(body, where, ("players", "payoff_types", "histories", "actions", "info_sets"), ("utilities",))
    players = tuple(_unique([_label(p, f"{where}.players", _BAD_ACTION)
                             for p in _list(body["players"], f"{where}.players")], f"{where}.players"))
    n = len(players)
    pt = _dict(body["payoff_types"], f"{where}.payoff_types")
    if set(pt) != set(players):
        raise ParseError(f"{where}.payoff_types: keys must be exactly the players")
    payoff_types = {i: tuple(_unique([_label(x, f"{where}.payoff_types[{i}]", _BAD_ACTION)
                                      for x in _list(pt[i], f"{where}.payoff_types[{i}]")],
                                     f"{where}.payoff_types[{i}]")) for i in players}
    hs = tuple(_unique([parse_history(_str(h, f"{where}.histories"), n, f"{where}.histories")
                        for h in _list(body["histories"], f"{where}.histories")], f"{where}.histories"))
    actions = {}
    for h, per in _dict(body["actions"], f"{where}.actions").items():
        w = f"{where}.actions[{h}]"
        per = _dict(per, w)
        if set(per) != set(players):
            raise ParseError(f"{w}: keys must be exactly the players")
        actions[parse_history(h, n, w)] = {
            i: tuple(_unique([_label(a, w, _BAD_ACTION) for a in _list(per[i], w)], w)) for i in players}
    info = {}
    for i, sets in _dict(body["info_sets"], f"{where}.info_sets").items():
        if i not in players:
            raise ParseError(f"{where}.info_sets: unknown player {i!r}")
        info[i] = {}
        for label, xs in _dict(sets, f"{where}.info_sets[{i}]").items():
            w = f"{where}.info_sets[{i}][{label}]"
            _label(label, w, _BAD_ACTION)
            info[i][label] = tuple(parse_history(_str(x, w), n, w) for x in _list(xs, w))
    info = {i: info.get(i, {}) for i in players}
    g = ExtensiveGame(players, payoff_types, hs, actions, info)
    utilities = {}
    for i, table in _dict(body.get("utilities", {}), f"{where}.utilities").items():
        if i not in players:
            raise ParseError(f"{where}.utilities: unknown player {i!r}")
        utilities[i] = {parse_xi(k, g, f"{where}.utilities[{i}]"): parse_rational(v, f"{where}.utilities[{i}][{k}]")
                        for k, v in _dict(table, f"{where}.utilities[{i}]").items()}
    return ExtensiveGame(players, payoff_types, hs, actions, info, utilities)


def _str(value, where) -> str:
    if not isinstance(value, str):
        raise ParseError(f"{where}: expected a string")
    return value


def _read_morphism(body, base_dir, where) -> MorphismFile:
    _fields(body, where, ("maps",), ("src", "dst"))
    maps = {}
    for i, m in _dict(body["maps"], f"{where}.maps").items():
        maps[_label(i, f"{where}.maps")] = {_label(t, f"{where}.maps[{i}]"): _label(u, f"{where}.maps[{i}]")
                                            for t, u in _dict(m, f"{where}.maps[{i}]").items()}
    ref = lambda k: os.path.normpath(os.path.join(base_dir, _str(body[k], f"{where}.{k}"))) if k in body else None
    return MorphismFile(maps, ref("src"), ref("dst"))


_READERS = {"space": _read_space, "cps": _read_cps, "structure": _read_structure,
            "game": _read_game, "morphism": _read_morphism}


# --- writing -------------------------------------------------------------

def _header(kind):
    return {"format_version": FORMAT_VERSION, "kind": kind}


def space_body(space: ConditionalSpace) -> dict:
    return {"points": [str(p) for p in space.points],
            "events": [{"label": e.label, "members": [str(a) for a in space.ordered(e.members)]}
                       for e in space.events]}


def _measure_body(m: ProbabilityMeasure, space: ConditionalSpace, key) -> dict:
    return {key(a): format_rational(m[a]) for a in space.points if m[a]}


def belief_key(atom) -> str:
    theta, prof = atom
    return "(" + ",".join((str(theta),) + tuple(map(str, prof))) + ")"


def serialize(value, src: Optional[str] = None, dst: Optional[str] = None) -> dict:
    if isinstance(value, ConditionalSpace):
        return {**_header("space"), **space_body(value)}
    if isinstance(value, CPS):
        sp = value.space
        return {**_header("cps"), "space": space_body(sp),
                "conditionals": {label: _measure_body(value.given(label), sp, str)
                                 for label in sp.labels if label in value.conditionals}}
    if isinstance(value, Coalgebra):
        agents = []
        for i in value.agents:
            space = value.belief_space(i)
            beliefs = {}
            for t in value.carriers[i]:
                if t in value.beliefs[i]:
                    nu = value.beliefs[i][t]
                    beliefs[str(t)] = {label: _measure_body(nu.given(label), space, belief_key)
                                       for label in space.labels if label in nu.conditionals}
            agents.append({"id": str(i), "types": [str(t) for t in value.carriers[i]], "beliefs": beliefs})
        return {**_header("structure"), "base": space_body(value.base), "agents": agents}
    if isinstance(value, ExtensiveGame):
        return {**_header("game"), **game_body(value)}
    if isinstance(value, MorphismFile):
        src, dst = src or value.src, dst or value.dst
        value = value.maps
    if isinstance(value, Mapping):
        doc = _header("morphism")
        if src is not None:
            doc["src"] = src
        if dst is not None:
            doc["dst"] = dst
        doc["maps"] = {str(i): {str(t): str(u) for t, u in m.items()} for i, m in value.items()}
        return doc
    raise TypeError(f"cannot serialize {type(value).__name__}")


def strategy_label(s) -> str:
    return ".".join(s)


def xi_text(atom) -> str:
    return "|".join(f"{theta}:{strategy_label(s)}" for theta, s in atom)


def game_body(g: ExtensiveGame) -> dict:
    body = {"players": list(g.players),
            "payoff_types": {i: list(g.payoff_types[i]) for i in g.players},
            "histories": [format_history(x) for x in g.histories],
            "actions": {format_history(x): {i: list(g.actions[x][i]) for i in g.players}
                        for x in g.histories if x in g.actions},
            "info_sets": {i: {lab: [format_history(x) for x in xs]
                              for lab, xs in g.information_sets.get(i, {}).items()} for i in g.players}}
    if g.utilities:
        try:
            order = {a: k for k, a in enumerate(xi_atoms(g))}
        except (KeyError, IndexError):   # malformed tree: keep file order
            order = {}
        body["utilities"] = {i: {xi_text(a): format_rational(v)
                                 for a, v in sorted(g.utilities[i].items(), key=lambda kv: order.get(kv[0], 0))}
                             for i in g.players if i in g.utilities}
    return body


def dumps(value, **kw) -> str:
    return json.dumps(serialize(value, **kw), indent=2, ensure_ascii=False) + "\n"


def dump(value, path: str, **kw) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(value, **kw))


def roundtrip(path: str) -> bool:
    """Whether parse, serialize, parse reproduces the file's objects exactly."""
    first = load(path)
    text = dumps(first.value)
    second = loads(text, base_dir=os.path.dirname(os.path.abspath(path)))
    return dumps(second.value) == text and _same(first.value, second.value)


def _same(a, b) -> bool:
    if isinstance(a, (ConditionalSpace, CPS)):
        return a == b
    if isinstance(a, Coalgebra):
        return (a.base == b.base and a.carriers == b.carriers
                and all(a.beliefs[i] == b.beliefs[i] for i in a.agents))
    if isinstance(a, ExtensiveGame):
        return (a.players, dict(a.payoff_types), a.histories, dict(a.actions), dict(a.information_sets),
                dict(a.utilities)) == (b.players, dict(b.payoff_types), b.histories, dict(b.actions),
                                       dict(b.information_sets), dict(b.utilities))
    if isinstance(a, MorphismFile):
        return a.maps == b.maps
    return False


def strategy_listing(g: ExtensiveGame) -> List[str]:
    lines = []
    for i in g.players:
        labels = list(g.information_sets.get(i, {}))
        ss = strategies(g, i)
        lines.append(f"player {i}: {len(ss)} strategies over information sets [{', '.join(labels)}]")
        lines += [f"  {strategy_label(s) or '()'}" for s in ss]
    return lines
