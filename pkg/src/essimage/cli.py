"""Command line front end: ``essimage <command> FILE ...``.

Exit codes: 0 success, 1 a property cross-check failed, 2 invalid input.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import fixtures, oracle
from .dynamics import (
    UNBOUNDED,
    DynSystem,
    classify,
    hull,
    image_size_modulus,
    invariance_check,
    is_wandering,
    nonsingular_chain,
    nonsingular_part,
)
from .fileformat import (
    FileError,
    SystemFile,
    parse_density_file,
    parse_rat,
    parse_system_file,
    parse_terms_file,
)
from .images import Density, ambitious_null_set, essential_image, set_image_report
from .markov import (
    build_cylinder_system,
    cylinder_image,
    invariant_state_sets,
    nonsingular_witness,
    verify_markov_formulas,
)
from .measure_core import (
    EssImageError,
    MeasurableMap,
    MSet,
    PropertyCheckFailure,
    Space,
    as_rat,
    identity_map,
    validate_map,
)
from .orbits import Orbit
from .tail import (
    Corridor,
    corridor_bounds,
    exactness_report,
    is_tail_set,
    remain_separated,
    separation_witnesses,
    tail_algebra,
    tail_hull,
    verify_corridor,
)


def fmt_set(A: MSet) -> str:
    return " ".join(A.names()) or "∅"


def _json_value(v):
    if isinstance(v, MSet):
        return list(v.names())
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    if v is UNBOUNDED:
        return "Unbounded"
    return v


def _text_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, MSet):
        return fmt_set(v)
    if v is None:
        return "none"
    if isinstance(v, (list, tuple)):
        return " | ".join(_text_value(x) for x in v) or "∅"
    if isinstance(v, dict):
        return ", ".join(f"{k}={_text_value(x)}" for k, x in v.items())
    return str(v)


@dataclass
class Report:
    system: str
    headline: list = field(default_factory=list)
    properties: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)
    chains: dict = field(default_factory=dict)
    values: dict = field(default_factory=dict)
    exit_code: int = 0

    def chain(self, key: str, orb: Orbit):
        self.chains[key] = orb

    def to_json(self) -> str:
        data = {
            "system": self.system,
            "properties": dict(self.properties),
            "witnesses": {k: _json_value(v) for k, v in self.witnesses.items()},
            "chains": {k: {"pre": _json_value(list(o.pre)), "period": _json_value(list(o.period))}
                       for k, o in self.chains.items()},
            "values": {k: _json_value(v) for k, v in self.values.items()},
        }
        return json.dumps(data, ensure_ascii=False, indent=2)

    def to_text(self) -> str:
        lines = [f"system: {self.system}"]
        lines += self.headline
        lines += [f"{k}: {_text_value(v)}" for k, v in self.properties.items()]
        lines += [f"{k}: {_text_value(v)}" for k, v in self.values.items()]
        lines += [f"witness {k}: {_text_value(v)}" for k, v in self.witnesses.items()]
        for k, o in self.chains.items():
            pre = " ; ".join(_text_value(x) for x in o.pre) or "-"
            per = " ; ".join(_text_value(x) for x in o.period)
            lines.append(f"chain {k}: pre [{pre}] period [{per}]")
        return "\n".join(lines) + "\n"


# -- input ------------------------------------------------------------------

def load_file(path: str) -> SystemFile:
    p = Path(path)
    if p.is_file():
        return parse_system_file(p.read_text(encoding="utf-8"), name=p.stem)
    stem = p.name.rsplit(".", 1)[0]
    if stem in fixtures.NAMES:
        return fixtures.load(stem)
    raise FileError(f"no such file or shipped fixture: {path}")


def _need_map(f: SystemFile) -> MeasurableMap:
    if f.map is None:
        raise FileError("file has no @map block")
    return f.map


def _need_system(f: SystemFile, normalize: bool = False) -> DynSystem:
    T = _need_map(f)
    if not f.is_endomap:
        raise FileError("this command needs an endomap (one space mapped into itself)")
    if normalize:
        sp = T.domain.normalized()
        T = MeasurableMap(sp, sp, [T.image_point(p) for p in sp.points], name=T.name)
        f.sets = {k: MSet(sp, v.mask) for k, v in f.sets.items()}
    return DynSystem(T, name=f.name or T.domain.name)


def _lookup_set(f: SystemFile, space: Space, spec: str) -> MSet:
    if spec in f.sets:
        return MSet(space, f.sets[spec].mask)
    if spec in ("∅", "{}", ""):
        return space.empty()
    names = [s for s in spec.replace(",", " ").split() if s]
    unknown = [s for s in names if s not in space.atom_index]
    if unknown:
        raise FileError(f"unknown set or atom {unknown[0]!r}")
    return space.set_of(names)


# -- commands ---------------------------------------------------------------

def cmd_validate(args, f: SystemFile) -> Report:
    r = Report(f.name)
    for name, sp in f.spaces.items():
        r.values[f"space {name}"] = f"{len(sp.points)} points, {sp.n_atoms} atoms, total {sp.total}"
    if f.map is not None:
        validate_map(f.map)
        r.properties["measurable"] = True
        r.properties["null_preserving"] = True
        r.properties["endomap"] = f.is_endomap
    if f.markov is not None:
        f.markov.validate()
        r.properties["stationary"] = f.markov.is_stationary()
        r.properties["irreducible"] = f.markov.is_irreducible()
    for k, v in f.sets.items():
        r.values[f"set {k}"] = v
    r.properties["valid"] = True
    return r


def _analyze_map(f: SystemFile) -> Report:
    T = _need_map(f)
    r = Report(f.name)
    r.properties["endomap"] = False
    X = T.domain.full()
    r.values["essential_image_of_X"] = essential_image(T, X)
    amb = ambitious_null_set(T, "find")
    r.properties["ambitious_null_set"] = amb is not None
    if amb is not None:
        r.witnesses["ambitious_null_set"] = amb
    for k, A in f.sets.items():
        rep = set_image_report(T, A)
        r.values[f"set {k}"] = (f"set_image {{{' '.join(rep.set_image_points)}}} "
                                f"measurable={_text_value(rep.is_measurable)} "
                                f"hull={fmt_set(rep.measurable_hull)} "
                                f"essential_image={fmt_set(rep.essential_image)}")
    return r


def cmd_analyze(args, f: SystemFile) -> Report:
    if f.map is not None and not f.is_endomap:
        return _analyze_map(f)
    S = _need_system(f, args.normalize)
    mu = None
    if args.mu:
        text = Path(args.mu).read_text(encoding="utf-8")
        mu = Density(S.space, parse_density_file(text, S.space))
    r = Report(S.name)
    cls = classify(S)
    ex = exactness_report(S, mu=mu)
    r.properties["nonsingular"] = cls.nonsingular
    r.properties["conservative"] = cls.conservative
    r.properties["ergodic"] = cls.ergodic
    r.properties["exact"] = ex.exact
    r.properties["limsup_full"] = ex.limsup_full
    r.properties["separation_criterion"] = ex.noggi_criterion
    amb = ambitious_null_set(S.map, "find")
    r.properties["ambitious_null_set"] = amb is not None

    r.values["total"] = S.space.total
    r.values["nonsingular_part"] = nonsingular_part(S)
    ta = tail_algebra(S)
    r.values["tail_depth"] = ta.depth
    r.values["tail_atoms"] = list(ta.partition)
    r.values["separation_family"] = ex.noggi_family
    r.values["limsup_measure"] = {k: str(v) for k, v in ex.limsup_values.items()}
    if ex.image_growth_limits is not None:
        r.values["image_growth_limits"] = {k: str(v) for k, v in ex.image_growth_limits.items()}

    for k, v in cls.witnesses.items():
        r.witnesses[k] = v
    if amb is not None:
        r.witnesses["ambitious_null_set"] = amb
    if ex.separated_pair is not None:
        r.witnesses["separated_pair"] = list(ex.separated_pair)

    chain = nonsingular_chain(S)
    r.chain("nonsingular", Orbit(tuple(chain[:-1]), (chain[-1],)))
    return r


def cmd_image(args, f: SystemFile) -> Report:
    T = _need_map(f)
    A = _lookup_set(f, T.domain, args.set)
    n = args.power
    if n < 0:
        raise FileError("--power must be nonnegative")
    if n != 1 and not f.is_endomap:
        raise FileError("--power other than 1 needs an endomap")
    Tn = T
    if n == 0:
        Tn = identity_map(T.domain)
    for _ in range(n - 1):
        Tn = T.compose(Tn)
    rep = set_image_report(Tn, A)
    # composition rule: (T^n)^ A equals the n-fold essential image
    it = A
    for _ in range(n):
        it = essential_image(T, it)
    if (it.mask ^ rep.essential_image.mask) & Tn.codomain.positive_mask:
        raise PropertyCheckFailure("essential image of T^n differs from the iterated essential image")
    cod = Tn.codomain
    r = Report(f.name)
    img_pts = "{" + " ".join(rep.set_image_points) + "}"
    r.headline.append(f"set_image: {img_pts} (measure {rep.hull_measure}); "
                      f"essential_image: {fmt_set(rep.essential_image)}")
    r.values["set"] = A
    r.values["power"] = n
    r.values["measure"] = A.space.mask_weight(A.mask)
    r.properties["set_image_measurable"] = rep.is_measurable
    r.values["set_image_points"] = list(rep.set_image_points)
    r.values["measurable_hull"] = rep.measurable_hull
    r.values["hull_measure"] = rep.hull_measure
    r.values["essential_image"] = rep.essential_image
    r.values["essential_image_measure"] = cod.mask_weight(rep.essential_image.mask)
    r.values["normal_version"] = rep.normal_version
    r.values["normal_image"] = list(rep.normal_image_points)
    return r


def cmd_hull(args, f: SystemFile) -> Report:
    S = _need_system(f)
    A = _lookup_set(f, S.space, args.set)
    r = Report(S.name)
    r.values["set"] = A
    r.values["kind"] = args.kind
    if args.kind == "tail":
        H = tail_hull(S, A)
        r.properties["tail_set"] = is_tail_set(S, H)
    else:
        H = hull(S, A, args.kind)
        kind = "forward" if args.kind == "forward" else "full"
        r.properties["forward_invariant" if kind == "forward" else "invariant"] = \
            invariance_check(S, H, kind)
    r.values["hull"] = H
    r.values["hull_measure"] = S.measure(H.mask)
    return r


def cmd_separated(args, f: SystemFile) -> Report:
    S = _need_system(f)
    A = _lookup_set(f, S.space, args.a)
    B = _lookup_set(f, S.space, args.b)
    r = Report(S.name)
    r.values["a"] = A
    r.values["b"] = B
    sep = remain_separated(S, A, B)
    r.properties["remain_separated"] = sep
    r.values["tail_hull_a"] = tail_hull(S, A)
    r.values["tail_hull_b"] = tail_hull(S, B)
    r.chain("images_a", separation_witnesses(S, A))
    r.chain("images_b", separation_witnesses(S, B))
    return r


def cmd_corridor(args, f: SystemFile) -> Report:
    S = _need_system(f)
    A = _lookup_set(f, S.space, args.set)
    r = Report(S.name)
    r.values["entrance"] = A
    if args.verify:
        pre, period = parse_terms_file(Path(args.verify).read_text(encoding="utf-8"), S.space)
        terms = Corridor(A, tuple(pre), tuple(period))
        r.properties["tail_set"] = is_tail_set(S, A)
        r.properties["corridor"] = verify_corridor(S, A, terms)
        r.chain("terms", terms.term_masks().map(S.set))
        return r
    low, high = corridor_bounds(S, A)
    r.properties["tail_set"] = True
    r.chain("smallest", Orbit(low.pre, low.period))
    r.chain("largest", Orbit(high.pre, high.period))
    # (A_{n+1}) is a corridor for A_1 whenever the system is nonsingular
    if low.pre:
        shifted = Corridor(low.term(1), low.pre[1:], low.period)
    else:
        shifted = Corridor(low.term(1), (), low.period[1:] + low.period[:1])
    r.values["shift_entrance"] = low.term(1)
    r.properties["shift_is_corridor"] = verify_corridor(S, low.term(1), shifted)
    return r


def cmd_markov(args, f: SystemFile) -> Report:
    if f.markov is None:
        raise FileError("file has no @markov block")
    M = f.markov
    M.validate()
    C = build_cylinder_system(M, args.depth)
    r = Report(f.name)
    r.properties["stationary"] = M.is_stationary()
    r.properties["irreducible"] = M.is_irreducible()
    w = nonsingular_witness(C)
    r.properties["nonsingular"] = w is None
    if w is not None:
        r.witnesses["missed_cylinder"] = w
        r.values["missed_measure"] = C.codomain.mask_weight(w.mask)
    r.values["depth"] = args.depth
    r.values["domain_weights"] = {n: str(x) for n, x in zip(C.domain.atom_names,
                                                              C.domain.atom_weights)}
    r.values["codomain_weights"] = {n: str(x) for n, x in zip(C.codomain.atom_names,
                                                                C.codomain.atom_weights)}
    r.values["invariant_state_sets"] = ["{" + " ".join(J) + "}" for J in invariant_state_sets(C)]
    if args.cylinder is not None:
        prefix = [s for s in args.cylinder.split(",") if s]
        A = C.cylinder(prefix)
        img = cylinder_image(C, A)
        r.headline.append(f"essential_image: {fmt_set(img)}")
        r.values["cylinder"] = A
        r.values["cylinder_image"] = img
    if args.verify_formulas:
        rows = verify_markov_formulas(M, args.depth)
        r.properties["support_formula"] = all(x.support_ok for x in rows)
        r.properties["coefficients_proportional"] = all(x.proportional for x in rows)
        for x in rows:
            r.values[f"state {x.state} image"] = " ".join(x.image) or "∅"
            r.values[f"state {x.state} exact"] = {k: str(v) for k, v in x.exact_coefficients.items()}
            r.values[f"state {x.state} printed"] = {k: str(v)
                                                    for k, v in x.printed_coefficients.items()}
    return r


def _oracle_compare(S: DynSystem, mode: str, A: MSet = None):
    """Run an oracle mode and the fast path; returns (oracle value, agreement)."""
    pos = S.pos
    full_range = range(1 << S.n)
    if mode == "minimal_support":
        A = A if A is not None else S.space.full()
        got = oracle.minimal_support(S.map, A)
        return got, got == essential_image(S.map, A)
    if mode in ("invariant_sets", "forward_invariant_sets"):
        got = (oracle.invariant_sets if mode == "invariant_sets" else oracle.forward_invariant_sets)(S)
        kind = "full" if mode == "invariant_sets" else "forward"
        fast = {m for m in full_range if invariance_check(S, S.set(m), kind)}
        return got, fast == {x.mask for x in got}
    if mode == "wandering_search":
        got = oracle.wandering_search(S)
        agree = (got is None) == classify(S).conservative
        if got is not None:
            agree = agree and is_wandering(S, got)
        return got, agree
    if mode == "tail_sets":
        got = oracle.tail_sets(S)
        fast = {m for m in full_range if is_tail_set(S, S.set(m))}
        return got, fast == {x.mask for x in got}
    if mode == "separated_pairs":
        got = oracle.separated_pairs(S)
        # every set against the complement of its tail hull, atoms pairwise
        agree = all(int(got.partners[a]) & pos == pos & ~tail_hull(S, S.set(a)).mask
                    for a in full_range if a & pos)
        atoms = [1 << i for i in range(S.n) if pos >> i & 1]
        agree = agree and all(got.separated(a, b) == remain_separated(S, S.set(a), S.set(b))
                              for a in atoms for b in atoms)
        return got, agree
    if mode == "nonsingular_max":
        got = oracle.nonsingular_max(S)
        return got, got == nonsingular_part(S)
    raise FileError(f"unknown oracle mode {mode!r}")


def cmd_oracle(args, f: SystemFile) -> Report:
    r = Report(f.name)
    r.values["mode"] = args.mode
    if args.mode == "minimal_support" and not f.is_endomap:
        T = _need_map(f)
        A = _lookup_set(f, T.domain, args.set) if args.set else T.domain.full()
        got = oracle.minimal_support(T, A)
        agree = got == essential_image(T, A)
    else:
        S = _need_system(f)
        A = _lookup_set(f, S.space, args.set) if args.set else None
        got, agree = _oracle_compare(S, args.mode, A)
    if isinstance(got, oracle.SeparatedPairs):
        pairs = list(got.pairs())
        r.values["separated_pairs"] = len(pairs)
        if pairs:
            r.witnesses["first_pair"] = list(pairs[0])
    elif isinstance(got, tuple):
        r.values["count"] = len(got)
        r.values["sets"] = list(got)
    else:
        r.values["result"] = got
    r.properties["agrees_with_fast_path"] = agree
    if not agree:
        r.exit_code = 1
    return r


def cmd_modulus(args, f: SystemFile) -> Report:
    S = _need_system(f, args.normalize)
    eps = _parse_epsilon(args.epsilon)
    r = Report(S.name)
    r.values["epsilon"] = eps
    delta = image_size_modulus(S, eps)
    r.values["delta"] = "Unbounded" if delta is UNBOUNDED else delta
    return r


def _parse_epsilon(text: str) -> Fraction:
    return as_rat(parse_rat(text, None))


# -- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="essimage",
                                description="Exact essential images of finite null-preserving maps.")
    p.add_argument("--format", choices=("text", "json"), default="text")
    # accepted after the subcommand too; SUPPRESS keeps an earlier value
    fmt = argparse.ArgumentParser(add_help=False)
    fmt.add_argument("--format", choices=("text", "json"), default=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[fmt], help=help_)
        sp.add_argument("file")
        sp.set_defaults(func=func)
        return sp

    add("validate", cmd_validate, "check spaces, map and model")
    sp = add("analyze", cmd_analyze, "classification, nonsingular part, tail algebra, exactness")
    sp.add_argument("--normalize", action="store_true")
    sp.add_argument("--mu", help="density file of an invariant probability")
    sp = add("image", cmd_image, "set image vs essential image")
    sp.add_argument("--set", required=True)
    sp.add_argument("--power", type=int, default=1)
    sp = add("hull", cmd_hull, "forward, invariant or tail hull")
    sp.add_argument("--set", required=True)
    sp.add_argument("--kind", choices=("forward", "invariant", "tail"), required=True)
    sp = add("separated", cmd_separated, "do two sets remain separated")
    sp.add_argument("--a", required=True)
    sp.add_argument("--b", required=True)
    sp = add("corridor", cmd_corridor, "corridor bounds or verification")
    sp.add_argument("--set", required=True)
    sp.add_argument("--verify", help="terms file")
    sp = add("markov", cmd_markov, "cylinder systems of a Markov model")
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--cylinder")
    sp.add_argument("--verify-formulas", action="store_true")
    sp = add("oracle", cmd_oracle, "brute-force audit against the fast paths")
    sp.add_argument("--mode", choices=oracle.MODES, required=True)
    sp.add_argument("--set")
    sp = add("modulus", cmd_modulus, "image-size modulus")
    sp.add_argument("--epsilon", required=True)
    sp.add_argument("--normalize", action="store_true")
    return p


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code if isinstance(exc.code, int) else 2
    try:
        f = load_file(args.file)
        report = args.func(args, f)
    except AssertionError as exc:
        err.write(f"property check failed: {exc}\n")
        return 1
    except (EssImageError, OSError, ValueError, KeyError) as exc:
        err.write(f"error: {type(exc).__name__}: {exc}\n")
        return 2
    out.write(report.to_json() + "\n" if args.format == "json" else report.to_text())
    return getattr(report, "exit_code", 0)


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
