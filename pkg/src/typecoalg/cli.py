"""Batch command line: ``typecoalg <verb> [options] files...``.

Exit codes: 0 success, 1 domain violation, 2 parse or I/O error.
"""
from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Sequence

from . import io
from .coalg import Coalgebra, InvalidStructure, check_coalgebra_morphism
from .games import (GameError, UnreachableInformationSet, allowing_set, conditioning_family, game_events, game_space,
                    relabel_space, validate_game)
from .hierarchy import class_ids, is_non_redundant, refine_to_fixed_point
from .measure import MeasureError, StructureMismatch, validate_cps
from .universal import FragmentError, build_fragment, fragment_transition_checks, quotient, terminal_map

OK, VIOLATION, PARSE = 0, 1, 2


class Failure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def pmap(fn: Callable, items: Iterable, threads: int) -> list:
    """Ordered map, on a thread pool when `threads` > 1."""
    items = list(items)
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _load(path: str, *kinds: str) -> io.Manifest:
    try:
        m = io.load(path)
    except io.ParseError as exc:
        raise Failure(PARSE, str(exc)) from None
    if kinds and m.kind not in kinds:
        raise Failure(PARSE, f"{path}: expected a {' or '.join(kinds)} file, got {m.kind}")
    return m


def _structure(path: str, threads: int = 1) -> Coalgebra:
    s = _load(path, "structure").value
    problems = _structure_problems(s, threads)
    if problems:
        raise Failure(VIOLATION, "\n".join([f"{path}: invalid structure"] + problems))
    return Coalgebra(s.base, s.carriers, s.beliefs, check=False)


def _structure_problems(s: Coalgebra, threads: int) -> List[str]:
    shape = [p for p in s.problems() if "missing belief" in p or "unknown types" in p]
    if shape:
        return shape

    def one(it):
        i, t = it
        rep = validate_cps(s.belief_space(i), s.beliefs[i][t])
        return [f"agent {i}, type {t}: {line}" for line in rep.lines()]
    jobs = [(i, t) for i in s.agents for t in s.carriers[i]]
    return [line for lines in pmap(one, jobs, threads) for line in lines]


def _write(path: str, value, **kw) -> None:
    try:
        io.dump(value, path, **kw)
    except OSError as exc:
        raise Failure(PARSE, f"{path}: {exc.strerror}") from None


def _outdir(args) -> str:
    if not args.out:
        raise Failure(PARSE, f"{args.verb} needs --out <directory>")
    try:
        os.makedirs(args.out, exist_ok=True)
    except OSError as exc:
        raise Failure(PARSE, f"{args.out}: {exc.strerror}") from None
    return args.out


def _rel(target: str, start_dir: str) -> str:
    return os.path.relpath(os.path.abspath(target), os.path.abspath(start_dir))


# --- verbs ---------------------------------------------------------------

def cmd_validate(args, out) -> int:
    m = _load(args.files[0])
    v = m.value
    if m.kind == "space":
        out(f"ok: space with {len(v.points)} points and {len(v.events)} conditioning events")
        return OK
    if m.kind == "cps":
        rep = validate_cps(v.space, v)
        lines = rep.lines()
    elif m.kind == "structure":
        lines = _structure_problems(v, args.threads)
    elif m.kind == "game":
        rep = validate_game(v)
        lines = rep.lines()
        if rep.ok:
            for i in v.players:
                try:
                    conditioning_family(v, i)
                except UnreachableInformationSet as exc:
                    out(f"note: {exc}")
    else:
        return _check_morphism(v, v.src, v.dst, out, args.threads)
    if lines:
        out(f"invalid {m.kind}: {len(lines)} problem(s)")
        for line in lines:
            out(f"  {line}")
        return VIOLATION
    out(f"ok: valid {m.kind}")
    return OK


def cmd_hierarchy(args, out) -> int:
    s = _structure(args.files[0], args.threads)
    part = refine_to_fixed_point(s)
    depth = part.depth if args.depth is None else args.depth
    agents = [a for a in s.agents if args.agent is None or a == args.agent]
    if not agents:
        raise Failure(PARSE, f"unknown agent {args.agent!r}")
    out(f"class ids by level 0..{depth}")
    for i, levels in zip(agents, pmap(lambda i: class_ids(s, i, depth), agents, args.threads)):
        out(f"agent {i}")
        for t in s.carriers[i]:
            out(f"  {t}: {' '.join(str(level[t]) for level in levels)}")
    out(f"stable partition after {part.depth} round(s)")
    for i in agents:
        out(f"  agent {i}: " + " ".join("{" + ", ".join(map(str, b)) + "}" for b in part.blocks[i]))
    verdict = is_non_redundant(s)
    if verdict:
        out("verdict: non-redundant")
    else:
        i, t, u = verdict.witness
        out(f"verdict: redundant (agent {i}: {t} and {u} share every level)")
    return OK


def cmd_quotient(args, out) -> int:
    src = args.files[0]
    s = _structure(src, args.threads)
    d = _outdir(args)
    res = quotient(s)
    q_path = os.path.join(d, "quotient.json")
    p_path = os.path.join(d, "projection.json")
    _write(q_path, res.quotient)
    _write(p_path, res.projection, src=_rel(src, d), dst="quotient.json")
    for i in s.agents:
        out(f"agent {i}: {len(s.carriers[i])} -> {len(res.quotient.carriers[i])} type(s)")
    out(f"wrote {q_path}")
    out(f"wrote {p_path}")
    return OK


def _check_morphism(mf: io.MorphismFile, src: str, dst: str, out, threads: int) -> int:
    if src is None or dst is None:
        raise Failure(PARSE, "the morphism needs source and target structure files")
    source = _structure(src, threads)
    target = _structure(dst, threads)
    try:
        verdict = check_coalgebra_morphism(mf.maps, source, target)
    except StructureMismatch as exc:
        out(f"not a morphism: {exc}")
        return VIOLATION
    if verdict:
        out("ok: the square commutes")
        return OK
    i, t, label, atom, pushed, actual = verdict.witness
    out("not a morphism: the square fails")
    out(f"  agent {i}, type {t}, event {label}, atom {io.belief_key(atom)}: "
        f"pushed-forward mass {io.format_rational(pushed)}, target mass {io.format_rational(actual)}")
    return VIOLATION


def cmd_morphism(args, out) -> int:
    if len(args.files) == 1:
        mf = _load(args.files[0], "morphism").value
        return _check_morphism(mf, mf.src, mf.dst, out, args.threads)
    if len(args.files) != 3:
        raise Failure(PARSE, "morphism takes SRC DST MAP, or a MAP file naming src and dst")
    src, dst, map_path = args.files
    mf = _load(map_path, "morphism").value
    return _check_morphism(mf, src, dst, out, args.threads)


def cmd_fragment(args, out) -> int:
    structures = pmap(lambda p: _structure(p, 1), args.files, args.threads)
    d = _outdir(args)
    try:
        frag = build_fragment(structures, args.depth)
    except (StructureMismatch, FragmentError) as exc:
        out(f"cannot build a fragment: {exc}")
        return VIOLATION
    f_path = os.path.join(d, "fragment.json")
    _write(f_path, frag.as_coalgebra())
    out(f"fragment at depth {frag.depth}: " + ", ".join(
        f"agent {i} {len(frag.elements[i])}" for i in frag.agents))
    maps = pmap(lambda s: terminal_map(s, frag), structures, args.threads)
    for k, (path, m) in enumerate(zip(args.files, maps)):
        m_path = os.path.join(d, f"map-{k}.json")
        _write(m_path, m, src=_rel(path, d), dst="fragment.json")
        out(f"wrote {m_path}")
    out(f"wrote {f_path}")
    report = fragment_transition_checks(frag)
    if report.ok:
        out("transition checks: ok")
        return OK
    out("transition checks: failed")
    for line in report.lines():
        out(f"  {line}")
    return VIOLATION


def cmd_game(args, out) -> int:
    g = _load(args.files[0], "game").value
    rep = validate_game(g)
    if not rep.ok:
        out(f"invalid game: {len(rep.issues)} problem(s)")
        for line in rep.lines():
            out(f"  {line}")
        return VIOLATION
    emit = args.emit or "strategies"
    if emit == "strategies":
        lines = io.strategy_listing(g)
    elif emit == "events":
        lines = _event_table(g, args.threads)
    else:
        try:
            space = relabel_space(game_space(g), io.xi_text)
        except UnreachableInformationSet as exc:
            out(str(exc))
            return VIOLATION
        if args.out:
            _write(args.out, space)
            out(f"wrote {args.out}: {len(space.points)} atoms, {len(space.events)} conditioning events")
            return OK
        out(io.dumps(space).rstrip("\n"))
        return OK
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write("\n".join(lines) + "\n")
        except OSError as exc:
            raise Failure(PARSE, f"{args.out}: {exc.strerror}") from None
        out(f"wrote {args.out}")
    else:
        for line in lines:
            out(line)
    return OK


def _event_table(g, threads: int) -> List[str]:
    lines = []
    fams = pmap(lambda i: _family_or_error(g, i), g.players, threads)
    total = sum(len(f) for f in fams if not isinstance(f, str))
    lines.append(f"{total} conditioning event(s)")
    for i, fam in zip(g.players, fams):
        if isinstance(fam, str):
            lines.append(f"player {i}: {fam}")
            continue
        for ev in fam:
            lines.append(f"event {ev.label} from information set(s) {', '.join(ev.info_sets)}: "
                         f"{len(ev.members)} atom(s)")
            allowed = allowing_set(g, i, ev.info_sets[0])
            for j in g.players:
                if j != i:
                    lines.append(f"  S_{j}: " + " ".join(io.strategy_label(s) or "()" for s in allowed.slices[j]))
    if all(not isinstance(f, str) for f in fams):
        merged = game_events(g)
        lines.append(f"{len(merged)} distinct event(s) in the game space")
        lines += [f"  {label} <- {' '.join(prov)}" for label, _, prov in merged]
    return lines


def _family_or_error(g, i):
    try:
        return conditioning_family(g, i)
    except UnreachableInformationSet as exc:
        return str(exc)


VERBS = {"validate": cmd_validate, "hierarchy": cmd_hierarchy, "quotient": cmd_quotient,
         "morphism": cmd_morphism, "fragment": cmd_fragment, "game": cmd_game}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="typecoalg", description=__doc__.splitlines()[0])
    p.add_argument("verb", choices=sorted(VERBS))
    p.add_argument("files", nargs="+", help="input file(s)")
    p.add_argument("--depth", type=int, help="hierarchy or fragment depth")
    p.add_argument("--agent", help="restrict the hierarchy report to one agent")
    p.add_argument("--out", help="output directory (quotient, fragment) or file (game)")
    p.add_argument("--emit", choices=("space", "strategies", "events"), help="what `game` produces")
    p.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")
    return p


def run(argv: Sequence[str], out: Callable[[str], None] = print) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return PARSE if exc.code else OK
    if args.threads < 1:
        out("error: --threads must be at least 1")
        return PARSE
    if args.depth is not None and args.depth < 0:
        out("error: --depth must be nonnegative")
        return PARSE
    try:
        return VERBS[args.verb](args, out)
    except Failure as exc:
        out(f"error: {exc}" if exc.code == PARSE else str(exc))
        return exc.code
    except (InvalidStructure, MeasureError, GameError) as exc:
        out(str(exc))
        return VIOLATION


def main(argv=None) -> int:
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
