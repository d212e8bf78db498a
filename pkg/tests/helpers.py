"""Random valid systems and Markov models for the test-suite."""
from __future__ import annotations

import random
from fractions import Fraction

import numpy as np

from essimage import kernels
from essimage.dynamics import DynSystem
from essimage.markov import MarkovModel
from essimage.measure_core import MapError, MeasurableMap, Space, validate_map

WEIGHT_CHOICES = [Fraction(0), Fraction(1), Fraction(1, 2), Fraction(1, 3), Fraction(2),
                  Fraction(3, 4), Fraction(5, 7), Fraction(3)]


def random_space(rng: random.Random, n_atoms: int, zero_prob: float = 0.25,
                 max_block: int = 2, name: str = "R") -> Space:
    points, weights, atoms = [], [], []
    for a in range(n_atoms):
        block = []
        for _ in range(rng.randint(1, max_block)):
            p = f"p{len(points)}"
            points.append(p)
            weights.append(Fraction(0) if rng.random() < zero_prob
                           else rng.choice(WEIGHT_CHOICES[1:]))
            block.append(p)
        atoms.append(block)
    if not any(weights):
        weights[rng.randrange(len(weights))] = Fraction(1)
    return Space(name, points, weights, atoms, [f"a{i}" for i in range(n_atoms)])


def _atom_respecting_targets(rng, dom: Space, cod: Space):
    f = [rng.randrange(cod.n_atoms) for _ in range(dom.n_atoms)]
    targets = []
    for p in dom.points:
        a = dom.atom_of_point[dom.point_index[p]]
        targets.append(rng.choice(cod.atoms[f[a]]))
    return targets


def random_map(rng: random.Random, dom: Space, cod: Space, attempts: int = 200) -> MeasurableMap:
    """Random point map, rejected until measurable and null-preserving."""
    for i in range(attempts):
        if rng.random() < 0.2:
            targets = [rng.choice(cod.points) for _ in dom.points]
        else:
            targets = _atom_respecting_targets(rng, dom, cod)
        T = MeasurableMap(dom, cod, targets)
        try:
            validate_map(T)
        except MapError:
            continue
        return T
    # always valid: send everything to one positive codomain atom
    c = cod.atom_of_point[next(i for i, w in enumerate(cod.weights) if w > 0)]
    return MeasurableMap(dom, cod, [cod.atoms[c][0]] * len(dom.points))


def random_system(rng: random.Random, max_atoms: int = 10, min_atoms: int = 1,
                  normalize: bool = False, zero_prob: float = 0.25) -> DynSystem:
    sp = random_space(rng, rng.randint(min_atoms, max_atoms), zero_prob=zero_prob)
    if normalize:
        sp = sp.normalized()
    T = random_map(rng, sp, sp)
    return DynSystem(T, name=f"random{sp.n_atoms}")


def reroute_null_atoms(rng: random.Random, T: MeasurableMap) -> MeasurableMap:
    """Change ``T`` on every weight-0 domain atom (whole atoms, to keep measurability)."""
    dom, cod = T.domain, T.codomain
    targets = [cod.points[t] for t in T.targets]
    for a in range(dom.n_atoms):
        if dom.atom_weights[a] == 0:
            c = rng.randrange(cod.n_atoms)
            for p in dom.atoms[a]:
                targets[dom.point_index[p]] = rng.choice(cod.atoms[c])
    return MeasurableMap(dom, cod, targets).check()


def rescaled_endomap(T: MeasurableMap, factor) -> MeasurableMap:
    sp = T.domain.rescaled(factor)
    return MeasurableMap(sp, sp, [T.image_point(p) for p in sp.points]).check()


def _equivalent_space(rng, sp: Space) -> Space:
    weights = [w and rng.choice(WEIGHT_CHOICES[1:]) for w in sp.weights]
    return Space(sp.name, sp.points, weights, sp.atoms, sp.atom_names)


def reweighted(rng: random.Random, T: MeasurableMap) -> MeasurableMap:
    """Same point map with both measures replaced by random equivalent ones."""
    dom = _equivalent_space(rng, T.domain)
    cod = dom if T.is_endomap else _equivalent_space(rng, T.codomain)
    return MeasurableMap(dom, cod, [T.image_point(p) for p in dom.points]).check()


def power_map(T: MeasurableMap, k: int) -> MeasurableMap:
    out = T
    for _ in range(k - 1):
        out = T.compose(out)
    return out


def random_stationary_model(rng: random.Random, max_states: int = 5) -> MarkovModel:
    """Irreducible chain with small rational entries; init is its stationary law."""
    import sympy

    while True:
        k = rng.randint(1, max_states)
        rows = []
        for i in range(k):
            raw = [rng.choice([0, 0, 1, 1, 2, 3]) for _ in range(k)]
            raw[(i + 1) % k] = max(raw[(i + 1) % k], 1)  # a cycle keeps it irreducible
            s = sum(raw)
            rows.append([Fraction(x, s) for x in raw])
        P = sympy.Matrix(rows)
        ns = (P.T - sympy.eye(k)).nullspace()
        if len(ns) != 1:
            continue
        v = ns[0] / sum(ns[0])
        init = [Fraction(int(x.p), int(x.q)) for x in v]
        M = MarkovModel([str(i) for i in range(k)], init, rows)
        if M.is_irreducible() and M.is_stationary():
            return M


def tables(S: DynSystem):
    """Essential-image and preimage tables as int64 arrays."""
    E = kernels.join_table(S.map.atom_images).astype(np.int64)
    P = kernels.join_table(S.map.atom_preimages).astype(np.int64)
    return E, P
