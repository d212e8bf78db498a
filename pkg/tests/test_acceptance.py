"""One recorded pass/fail line per acceptance criterion (see the terminal summary)."""
import itertools
import random
import time
from fractions import Fraction
from pathlib import Path

import pytest

from essimage import cli, fixtures, oracle
from essimage.dynamics import (
    DynSystem,
    classify,
    invariance_check,
    nonsingular_chain,
    nonsingular_part,
)
from essimage.images import ambitious_null_set, essential_image, set_image_report, verify_image_axioms
from essimage.markov import (
    build_cylinder_system,
    cylinder_image,
    nonsingular_witness,
    verify_markov_formulas,
)
from essimage.measure_core import MeasurableMap, Space, measure
from essimage.tail import (
    Corridor,
    corridor_bounds,
    exactness_report,
    is_tail_set,
    remain_separated,
    tail_hull,
    verify_corridor,
)

from helpers import random_stationary_model, random_system
from propsuite import full_suite, image_suite

GOLDEN = Path(__file__).parent / "golden"


# 1 ---------------------------------------------------------------------------

def test_criterion_1_example_1a(record):
    t0 = time.perf_counter()
    f = fixtures.load("EX1A")
    T = f.map
    A = f.set("A1")
    rep = set_image_report(T, A)
    purged = ambitious_null_set(T, "purge")
    got = (measure(A), rep.hull_measure, essential_image(T, A).mask, purged.domain.points)
    want = (Fraction(0), Fraction(1), 0, ("0",))
    dt = time.perf_counter() - t0
    ok = got == want and rep.set_image_points == ("0",) and dt < 1
    record(1, ok, f"EX1A λ(A)={got[0]}, λ(TA)={got[1]}, T̂A=∅:{got[2] == 0}, "
                  f"purge Y={{{','.join(got[3])}}}", dt)
    assert ok


# 2 ---------------------------------------------------------------------------

def _markov_support_ok(M, depth):
    C = build_cylinder_system(M, depth)
    for i, s in enumerate(M.states):
        img = cylinder_image(C, C.cylinder([s]))
        # independent prediction straight from the transition matrix
        want = 0
        k = len(M.states)
        for c, word in enumerate(itertools.product(range(k), repeat=depth - 1)):
            if M.trans[i][word[0]] > 0 and C.codomain.atom_weights[c] > 0:
                want |= 1 << c
        if img.mask != want:
            return False
    return True


def test_criterion_2_markov_formula(record):
    t0 = time.perf_counter()
    rng = random.Random(2024)
    models = [fixtures.load("MARKOV2").markov] + [random_stationary_model(rng) for _ in range(20)]
    failures = [(k, d) for k, M in enumerate(models) for d in (2, 3)
                if not _markov_support_ok(M, d)
                or not all(r.support_ok and r.proportional for r in verify_markov_formulas(M, d))]
    dt = time.perf_counter() - t0
    ok = not failures and dt < 10
    record(2, ok, f"cylinder images match ⋃_(p_ij>0)[j] for {len(models)} models at depths 2, 3; "
                  f"{len(failures)} failures", dt)
    assert ok


# 3 ---------------------------------------------------------------------------

def _grid_chain_by_formula(N):
    """``T̂ⁿX`` from the point formula; counting measure makes set images essential."""
    cur = set(fixtures.grid_points(N))
    chain = [cur]
    while True:
        nxt = {fixtures.grid_image(p) for p in cur}
        if nxt == cur:
            return chain
        chain.append(nxt)
        cur = nxt


def test_criterion_3_nonsingular_part(record):
    t0 = time.perf_counter()
    details = []
    ok = True
    for N in (2, 3, 4):
        S = fixtures.system(f"GRID{N}")
        got = [set(A.names()) for A in nonsingular_chain(S)]
        want = [{f"({m},{n})" for m, n in c} for c in _grid_chain_by_formula(N)]
        strict = all(b < a for a, b in zip(got, got[1:]))
        part = nonsingular_part(S).names()
        ok &= got == want and strict and part == ("(0,0)",)
        details.append(f"GRID{N} chain length {len(got)}")
    C = build_cylinder_system(fixtures.load("CSMC_B").markov, 2)
    w = nonsingular_witness(C)
    ok &= w is not None and w.names() == ("[2]",) and measure(w) == Fraction(1, 3)
    dt = time.perf_counter() - t0
    record(3, ok, f"X_N={{(0,0)}} with strict chains ({', '.join(details)}); "
                  f"CSMC_B witness {w.names() if w else None} of measure {measure(w) if w else None}",
           dt)
    assert ok


# 4 ---------------------------------------------------------------------------

_LITERAL = []


@pytest.fixture(scope="module")
def suite_run():
    t0 = time.perf_counter()
    rng = random.Random(4)
    checks = 0
    fixtures_run = []
    for name in fixtures.SYSTEMS:
        f = fixtures.load(name)
        if f.is_endomap:
            checks += full_suite(DynSystem(f.map, name=name), rng, _LITERAL)
        else:
            checks += image_suite(f.map, rng)
        fixtures_run.append(name)
    for k in range(500):
        S = random_system(rng, max_atoms=10)
        S.name = f"random#{k}"
        checks += full_suite(S, rng, _LITERAL)
    return checks, fixtures_run, time.perf_counter() - t0


def test_criterion_4_proposition_suite(record, suite_run):
    checks, names, dt = suite_run
    ok = dt < 300
    record(4, ok, f"all identities hold on {len(names)} fixtures and 500 random systems "
                  f"({checks} checks; hull-image item in its proved form)", dt)
    assert ok


@pytest.mark.xfail(strict=True, reason="(T̂A)^≀ ⊆̇ T̂(A^≀) is false on singular systems; "
                                       "COUNT2 with A={1} is a counterexample")
def test_criterion_4_literal_hull_image(record, suite_run):
    systems = sorted({s for s, _ in _LITERAL})
    ok = not _LITERAL
    first = _LITERAL[0] if _LITERAL else None
    record("4 (literal (T̂A)^≀ ⊆̇ T̂(A^≀))", ok,
           f"{len(_LITERAL)} violations on {len(systems)} singular systems, first {first}")
    assert ok


def test_literal_hull_image_counterexample_is_genuine():
    """COUNT2, A={1}: oracle tail sets give (T̂A)^≀ = X while T̂(A^≀) = {0}."""
    S = fixtures.system("COUNT2")
    tails = {A.mask for A in oracle.tail_sets(S)}
    assert tails == {0, 0b11}
    A = S.set(0b10)
    img = essential_image(S.map, A).mask
    hull_of_img = min((t for t in tails if img & ~t == 0), key=lambda t: bin(t).count("1"))
    hull_of_a = min((t for t in tails if 0b10 & ~t == 0), key=lambda t: bin(t).count("1"))
    assert hull_of_img == 0b11
    assert essential_image(S.map, S.set(hull_of_a)).mask == 0b01
    assert tail_hull(S, S.set(img)).mask == 0b11


# 5 ---------------------------------------------------------------------------

def _oracle_mismatches(S):
    bad = []
    n, pos = S.n, S.pos
    masks = range(1 << n)
    for A in (S.set(m) for m in masks):
        if oracle.minimal_support(S.map, A) != essential_image(S.map, A):
            bad.append(("essential_image", A.mask))
            break
    if oracle.nonsingular_max(S) != nonsingular_part(S):
        bad.append(("nonsingular_part",))
    inv = {A.mask for A in oracle.invariant_sets(S)}
    fwd = {A.mask for A in oracle.forward_invariant_sets(S)}
    if inv != {m for m in masks if invariance_check(S, S.set(m), "full")}:
        bad.append(("invariant",))
    if fwd != {m for m in masks if invariance_check(S, S.set(m), "forward")}:
        bad.append(("forward_invariant",))
    if {A.mask for A in oracle.tail_sets(S)} != {m for m in masks if is_tail_set(S, S.set(m))}:
        bad.append(("tail_sets",))
    sep = oracle.separated_pairs(S)
    for a in masks:
        if a & pos and int(sep.partners[a]) & pos != pos & ~tail_hull(S, S.set(a)).mask:
            bad.append(("separated", a))
            break
    atoms = [1 << i for i in range(n) if pos >> i & 1]
    for a, b in itertools.product(atoms, atoms):
        if sep.separated(a, b) != remain_separated(S, S.set(a), S.set(b)):
            bad.append(("separated_atoms", a, b))
    w = oracle.wandering_search(S)
    if (w is None) != classify(S).conservative:
        bad.append(("wandering",))
    return bad


def test_criterion_5_oracle_equivalence(record):
    t0 = time.perf_counter()
    rng = random.Random(5)
    systems = [fixtures.system(n) for n in fixtures.SYSTEMS if fixtures.load(n).is_endomap]
    systems += [random_system(rng, max_atoms=12) for _ in range(100)]
    mismatches = []
    for S in systems:
        mismatches += [(S.name,) + b for b in _oracle_mismatches(S)]
    # the two-space fixture: minimal support only
    f = fixtures.load("IDTRIV")
    for m in range(1 << f.map.domain.n_atoms):
        A = f.map.domain.set_of(i for i in range(f.map.domain.n_atoms) if m >> i & 1)
        if oracle.minimal_support(f.map, A) != essential_image(f.map, A):
            mismatches.append(("IDTRIV", "essential_image", m))
    dt = time.perf_counter() - t0
    ok = not mismatches and dt < 300
    record(5, ok, f"oracle agrees on {len(systems) + 1} systems; {len(mismatches)} mismatches", dt)
    assert ok, mismatches[:5]


# 6 ---------------------------------------------------------------------------

def test_criterion_6_axiom_characterization(record):
    t0 = time.perf_counter()
    profiles = [(1, 1), (1, 2), (Fraction(1, 3), Fraction(2, 3))]
    maps = list(itertools.product(range(2), repeat=2))
    failures = 0
    runs = 0
    for weights in profiles:
        for images in maps:
            sp = Space("X", ["0", "1"], weights)
            T = MeasurableMap(sp, sp, [str(i) for i in images]).check()
            ess = [essential_image(T, sp.set_of(i for i in range(2) if m >> i & 1)).mask
                   for m in range(4)]
            passing = []
            for cand in itertools.product(range(4), repeat=4):
                if verify_image_axioms(T, dict(enumerate(cand))).ok:
                    passing.append(cand)
            runs += 1
            failures += passing != [tuple(ess)]
    dt = time.perf_counter() - t0
    ok = failures == 0 and runs == 12 and dt < 30
    record(6, ok, f"{runs} maps x 256 candidates: only T̂ satisfies the axioms "
                  f"({failures} failures)", dt)
    assert ok


# 7 ---------------------------------------------------------------------------

NEGATIVE_GOLDENS = {
    "COUNT2.analyze.txt": ["analyze", "COUNT2"],
    "COUNT2.corridor.txt": ["corridor", "COUNT2", "--set", "ALL"],
    "ROT3.analyze.txt": ["analyze", "ROT3"],
    "ROT3.separated.txt": ["separated", "ROT3", "--a", "A0", "--b", "A1"],
    "COLLAPSE.analyze.txt": ["analyze", "COLLAPSE"],
}


def _cli_text(argv):
    import io

    out, err = io.StringIO(), io.StringIO()
    code = cli.run(argv, out, err)
    return code, out.getvalue()


def test_criterion_7_negative_controls(record):
    t0 = time.perf_counter()
    golden_ok = all(_cli_text(argv) == (0, (GOLDEN / name).read_text(encoding="utf-8"))
                    for name, argv in NEGATIVE_GOLDENS.items())

    S = fixtures.system("COUNT2")
    X = S.space.full()
    img = essential_image(S.map, X)
    count2 = is_tail_set(S, X) and not is_tail_set(S, img)
    low, _ = corridor_bounds(S, X)
    shifted = Corridor(img, low.pre[1:], low.period)
    count2 &= not verify_corridor(S, img, shifted)

    R = fixtures.system("ROT3")
    cr, er = classify(R), exactness_report(R)
    rot3 = cr.conservative and cr.ergodic and not er.exact and \
        remain_separated(R, R.set(1), R.set(2))

    K = fixtures.system("COLLAPSE")
    ck, ek = classify(K), exactness_report(K)
    collapse = ek.exact and not ck.conservative

    dt = time.perf_counter() - t0
    ok = golden_ok and count2 and rot3 and collapse
    record(7, ok, f"goldens {golden_ok}; COUNT2 tail image/shift {count2}; "
                  f"ROT3 CE non-exact {rot3}; COLLAPSE exact non-conservative {collapse}", dt)
    assert ok
