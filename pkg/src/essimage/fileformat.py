"""Line-oriented system and Markov-model files.

::

    # comment
    @space X
    point 0 1
    point 1 0
    @partition X
    atom a: 0 1
    @map [X -> X]
    0 -> 0
    1 -> 0
    @set A1 = 1

A ``@markov`` block holds ``states``, ``init`` and ``row <state>:`` lines.
Weights are integers or ``p/q``; decimals are rejected.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .markov import MarkovModel
from .measure_core import EssImageError, MeasurableMap, MSet, Space, validate

_RAT = re.compile(r"^-?\d+(/\d+)?$")


class FileError(EssImageError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class FileSyntaxError(FileError):
    pass


class UnknownIdentifier(FileError):
    pass


class NotAnAtomUnion(FileError):
    pass


def parse_rat(token: str, line: int) -> Fraction:
    if not _RAT.match(token):
        raise FileSyntaxError(f"expected an integer or p/q rational, got {token!r}", line)
    value = Fraction(token)
    if "/" in token and int(token.split("/")[1]) == 0:
        raise FileSyntaxError("zero denominator", line)
    return value


@dataclass
class _SpaceDraft:
    name: str
    line: int
    points: list = field(default_factory=list)
    weights: list = field(default_factory=list)
    atoms: list = field(default_factory=list)
    atom_names: list = field(default_factory=list)


@dataclass
class SystemFile:
    spaces: dict
    map: Optional[MeasurableMap] = None
    sets: dict = field(default_factory=dict)
    markov: Optional[MarkovModel] = None
    name: str = ""

    @property
    def is_endomap(self) -> bool:
        return self.map is not None and self.map.domain is self.map.codomain

    def set(self, name: str) -> MSet:
        if name not in self.sets:
            raise UnknownIdentifier(f"no set named {name!r}")
        return self.sets[name]


def _resolve_set(space: Space, tokens, set_id: str, line: int) -> MSet:
    by_atom = {n: i for i, n in enumerate(space.atom_names)}
    mask = 0
    pts = []
    for tok in tokens:
        if tok in ("∅", "{}"):
            continue
        if tok in by_atom and (tok not in space.point_index
                               or space.atoms[by_atom[tok]] == (tok,)):
            mask |= 1 << by_atom[tok]
        elif tok in space.point_index:
            pts.append(tok)
        else:
            raise UnknownIdentifier(f"set {set_id!r}: unknown atom or point {tok!r}", line)
    chosen = set(pts)
    for p in pts:
        a = space.atom_of_point[space.point_index[p]]
        if not all(q in chosen for q in space.atoms[a]):
            raise NotAnAtomUnion(f"set {set_id!r} is not a union of atoms "
                                 f"(point {p!r} lies in atom {space.atom_names[a]!r})", line)
        mask |= 1 << a
    return MSet(space, mask)


def parse_system_file(text: str, name: str = "") -> SystemFile:
    drafts = {}
    order = []
    partitions = {}
    map_lines = []
    map_header = None
    set_defs = []
    markov = None
    section = None
    current = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("@"):
            head, _, rest = line.partition(" ")
            rest = rest.strip()
            if head == "@space":
                if not rest or " " in rest:
                    raise FileSyntaxError("@space takes one name", lineno)
                if rest in drafts:
                    raise FileSyntaxError(f"space {rest!r} declared twice", lineno)
                current = drafts[rest] = _SpaceDraft(rest, lineno)
                order.append(rest)
                section = "space"
            elif head == "@partition":
                if rest not in drafts:
                    raise UnknownIdentifier(f"unknown space {rest!r}", lineno)
                current = drafts[rest]
                partitions.setdefault(rest, [])
                section = "partition"
            elif head == "@map":
                if map_header is not None:
                    raise FileSyntaxError("only one @map block is allowed", lineno)
                if rest:
                    m = re.fullmatch(r"\[\s*(\S+)\s*->\s*(\S+)\s*\]", rest)
                    if not m:
                        raise FileSyntaxError("expected @map [<domain> -> <codomain>]", lineno)
                    map_header = (m.group(1), m.group(2), lineno)
                else:
                    map_header = (None, None, lineno)
                section = "map"
            elif head == "@set":
                m = re.fullmatch(r"(\S+)\s*=\s*(.*)", rest)
                if not m:
                    raise FileSyntaxError("expected @set <id> = <atoms or points>", lineno)
                set_defs.append((m.group(1), m.group(2).split(), lineno))
                section = None
            elif head == "@markov":
                markov = {"states": None, "init": None, "rows": {}, "line": lineno}
                section = "markov"
            else:
                raise FileSyntaxError(f"unknown directive {head!r}", lineno)
            continue

        tokens = line.split()
        if section == "space":
            if tokens[0] != "point" or len(tokens) != 3:
                raise FileSyntaxError("expected: point <id> <weight>", lineno)
            current.points.append(tokens[1])
            current.weights.append(parse_rat(tokens[2], lineno))
        elif section == "partition":
            m = re.fullmatch(r"atom\s+(\S+?)\s*:\s*(.*)", line)
            if not m:
                raise FileSyntaxError("expected: atom <id>: <point>...", lineno)
            pts = m.group(2).split()
            for p in pts:
                if p not in current.points:
                    raise UnknownIdentifier(f"unknown point {p!r} in space {current.name!r}", lineno)
            partitions[current.name].append((m.group(1), pts, lineno))
        elif section == "map":
            m = re.fullmatch(r"(\S+)\s*->\s*(\S+)", line)
            if not m:
                raise FileSyntaxError("expected: <point> -> <point>", lineno)
            map_lines.append((m.group(1), m.group(2), lineno))
        elif section == "markov":
            key = tokens[0]
            if key == "states":
                markov["states"] = tokens[1:]
            elif key == "init":
                markov["init"] = [parse_rat(t, lineno) for t in tokens[1:]]
            elif key == "row":
                m = re.fullmatch(r"row\s+(\S+?)\s*:\s*(.*)", line)
                if not m:
                    raise FileSyntaxError("expected: row <state>: <rat>...", lineno)
                markov["rows"][m.group(1)] = ([parse_rat(t, lineno) for t in m.group(2).split()],
                                              lineno)
            else:
                raise FileSyntaxError(f"unexpected {key!r} in @markov block", lineno)
        else:
            raise FileSyntaxError("content outside of a block", lineno)

    spaces = {}
    for sname in order:
        d = drafts[sname]
        atoms = None
        names = None
        if sname in partitions:
            listed = {p for _, pts, _ in partitions[sname] for p in pts}
            atoms, names = [], []
            for aid, pts, _ in partitions[sname]:
                atoms.append(tuple(pts))
                names.append(aid)
            for p in d.points:
                if p not in listed:
                    atoms.append((p,))
                    names.append(p)
            # atoms in order of their first point
            first = {p: i for i, p in enumerate(d.points)}
            ranked = sorted(range(len(atoms)), key=lambda k: min((first[p] for p in atoms[k]),
                                                                 default=-1))
            atoms = [atoms[k] for k in ranked]
            names = [names[k] for k in ranked]
        try:
            sp = Space(sname, d.points, d.weights, atoms, names)
            validate(sp)
        except EssImageError as exc:
            raise FileError(str(exc), d.line) from exc
        spaces[sname] = sp

    result = SystemFile(spaces, name=name)

    if map_header is not None:
        dname, cname, hline = map_header
        if dname is None:
            if len(spaces) != 1:
                raise FileSyntaxError("@map without [domain -> codomain] needs exactly one space", hline)
            dname = cname = order[0]
        for s in (dname, cname):
            if s not in spaces:
                raise UnknownIdentifier(f"unknown space {s!r}", hline)
        dom, cod = spaces[dname], spaces[cname]
        targets = {}
        for src, dst, ln in map_lines:
            if src not in dom.point_index:
                raise UnknownIdentifier(f"unknown point {src!r} of {dname!r}", ln)
            if dst not in cod.point_index:
                raise UnknownIdentifier(f"unknown point {dst!r} of {cname!r}", ln)
            if src in targets:
                raise FileSyntaxError(f"point {src!r} mapped twice", ln)
            targets[src] = dst
        missing = [p for p in dom.points if p not in targets]
        if missing:
            raise FileSyntaxError(f"map is not total: no image for {missing[0]!r}", hline)
        result.map = MeasurableMap(dom, cod, [targets[p] for p in dom.points],
                                   name=name or f"{dname}->{cname}")

    if set_defs:
        if not spaces:
            raise FileSyntaxError("@set needs a declared space", set_defs[0][2])
        home = result.map.domain if result.map is not None else spaces[order[0]]
        for sid, toks, ln in set_defs:
            if sid in result.sets:
                raise FileSyntaxError(f"set {sid!r} defined twice", ln)
            result.sets[sid] = _resolve_set(home, toks, sid, ln)

    if markov is not None:
        if markov["states"] is None or markov["init"] is None:
            raise FileSyntaxError("@markov needs states and init lines", markov["line"])
        states = markov["states"]
        rows = []
        for s in states:
            if s not in markov["rows"]:
                raise FileSyntaxError(f"missing row for state {s!r}", markov["line"])
            rows.append(markov["rows"][s][0])
        for s, (_, ln) in markov["rows"].items():
            if s not in states:
                raise UnknownIdentifier(f"unknown state {s!r}", ln)
        result.markov = MarkovModel(states, markov["init"], rows)
    return result


def parse_density_file(text: str, space: Space) -> tuple:
    """Per-atom rationals, one ``<atom> <rat>`` line each; unlisted atoms get 0.

    The values are densities with respect to the weights of ``space``.
    """
    by_atom = {n: i for i, n in enumerate(space.atom_names)}
    vals = [Fraction(0)] * space.n_atoms
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise FileSyntaxError("expected: <atom> <density>", lineno)
        if tokens[0] not in by_atom:
            raise UnknownIdentifier(f"unknown atom {tokens[0]!r}", lineno)
        vals[by_atom[tokens[0]]] = parse_rat(tokens[1], lineno)
    return tuple(vals)


def parse_terms_file(text: str, space: Space):
    """Corridor terms: ``pre: <set>`` and ``period: <set>`` lines, sets as atom lists."""
    pre, period = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, rest = line.partition(":")
        if not sep or key.strip() not in ("pre", "period"):
            raise FileSyntaxError("expected: pre: <atoms> or period: <atoms>", lineno)
        s = _resolve_set(space, rest.split(), key.strip(), lineno)
        (pre if key.strip() == "pre" else period).append(s)
    if not period:
        raise FileSyntaxError("terms file needs at least one period line")
    return pre, period
