"""Finite-state Markov measures on cylinder algebras and the drop-first-symbol map."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .images import Density, essential_image, transfer_density
from .measure_core import (
    EssImageError,
    MeasurableMap,
    MSet,
    NotNullPreserving,
    PropertyCheckFailure,
    Space,
    SpaceMismatch,
    as_rat,
    ae_relation,
    preimage,
    validate_map,
)


class InvalidModel(EssImageError):
    pass


class NotStationary(EssImageError):
    pass


class NotIrreducible(EssImageError):
    pass


def word_name(word: Sequence[str]) -> str:
    return "[" + ",".join(word) + "]"


@dataclass(frozen=True)
class MarkovModel:
    states: tuple
    init: tuple
    trans: tuple

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(str(s) for s in self.states))
        object.__setattr__(self, "init", tuple(as_rat(p) for p in self.init))
        object.__setattr__(self, "trans", tuple(tuple(as_rat(p) for p in row) for row in self.trans))

    @property
    def index(self) -> dict:
        return {s: i for i, s in enumerate(self.states)}

    def reachable(self) -> set:
        """States visited with positive probability at some time."""
        seen = {i for i, p in enumerate(self.init) if p > 0}
        stack = list(seen)
        while stack:
            i = stack.pop()
            for j, p in enumerate(self.trans[i]):
                if p > 0 and j not in seen:
                    seen.add(j)
                    stack.append(j)
        return seen

    def validate(self) -> None:
        k = len(self.states)
        if k == 0:
            raise InvalidModel("no states")
        if len(set(self.states)) != k:
            raise InvalidModel("duplicate state names")
        if len(self.init) != k or len(self.trans) != k or any(len(r) != k for r in self.trans):
            raise InvalidModel("init and rows must have one entry per state")
        if any(p < 0 for p in self.init) or any(p < 0 for r in self.trans for p in r):
            raise InvalidModel("negative probability")
        if sum(self.init) != 1:
            raise InvalidModel(f"init sums to {sum(self.init)}, expected 1")
        for i in sorted(self.reachable()):
            if sum(self.trans[i]) != 1:
                raise InvalidModel(f"row {self.states[i]} sums to {sum(self.trans[i])}, expected 1")

    def step_law(self, law: Sequence[Fraction]) -> tuple:
        k = len(self.states)
        return tuple(sum((law[i] * self.trans[i][j] for i in range(k)), Fraction(0))
                     for j in range(k))

    def is_stationary(self) -> bool:
        return self.step_law(self.init) == self.init

    def is_irreducible(self) -> bool:
        k = len(self.states)
        for start in range(k):
            seen = {start}
            stack = [start]
            while stack:
                i = stack.pop()
                for j, p in enumerate(self.trans[i]):
                    if p > 0 and j not in seen:
                        seen.add(j)
                        stack.append(j)
            if len(seen) != k:
                return False
        return True

    def word_weight(self, word: Sequence[int]) -> Fraction:
        if not word:
            return Fraction(1)
        w = self.init[word[0]]
        for i, j in zip(word, word[1:]):
            if w == 0:
                break
            w *= self.trans[i][j]
        return w


def cylinder_space(M: MarkovModel, depth: int, name: str = None) -> Space:
    k = len(M.states)
    words = list(itertools.product(range(k), repeat=depth))
    labels = [word_name([M.states[i] for i in w]) for w in words]
    return Space(name or f"cyl{depth}", labels, [M.word_weight(w) for w in words])


@dataclass(frozen=True)
class CylinderSystem:
    model: MarkovModel
    depth: int
    domain: Space
    codomain: Space
    map: MeasurableMap

    def cylinder(self, prefix: Sequence[str]) -> MSet:
        """All depth-m words starting with ``prefix`` (a depth-m cylinder set)."""
        prefix = [str(s) for s in prefix]
        if len(prefix) > self.depth:
            raise ValueError("cylinder prefix longer than the depth")
        idx = self.model.index
        for s in prefix:
            if s not in idx:
                raise ValueError(f"unknown state {s!r}")
        k = len(self.model.states)
        mask = 0
        for a, word in enumerate(itertools.product(range(k), repeat=self.depth)):
            if [self.model.states[i] for i in word[:len(prefix)]] == prefix:
                mask |= 1 << a
        return MSet(self.domain, mask)

    def codomain_cylinder(self, prefix: Sequence[str]) -> MSet:
        prefix = [str(s) for s in prefix]
        k = len(self.model.states)
        mask = 0
        for a, word in enumerate(itertools.product(range(k), repeat=self.depth - 1)):
            if [self.model.states[i] for i in word[:len(prefix)]] == prefix:
                mask |= 1 << a
        return MSet(self.codomain, mask)

    def words(self, A: MSet) -> tuple:
        return A.names()


def _shift_map(M: MarkovModel, depth: int, dom: Space, cod: Space, drop: str) -> MeasurableMap:
    k = len(M.states)
    targets = []
    for word in itertools.product(range(k), repeat=depth):
        rest = word[1:] if drop == "first" else word[:-1]
        targets.append(word_name([M.states[i] for i in rest]))
    return MeasurableMap(dom, cod, targets, name=f"drop-{drop}")


def build_cylinder_system(M: MarkovModel, depth: int) -> CylinderSystem:
    """Drop-first-symbol map from depth-m cylinders to depth-(m-1) cylinders."""
    M.validate()
    if depth < 2:
        raise InvalidModel("depth must be at least 2 (the depth-0 algebra is trivial)")
    dom = cylinder_space(M, depth, name=f"cyl{depth}")
    cod = cylinder_space(M, depth - 1, name=f"cyl{depth - 1}")
    T = _shift_map(M, depth, dom, cod, "first")
    try:
        validate_map(T)
    except NotNullPreserving as exc:
        raise NotNullPreserving(f"one-step law is not absolutely continuous: {exc}", atom=exc.atom)
    T.check()
    return CylinderSystem(M, depth, dom, cod, T)


def truncation_map(M: MarkovModel, depth: int) -> MeasurableMap:
    """Drop-last-symbol map; always measure preserving (marginal consistency)."""
    M.validate()
    if depth < 2:
        raise InvalidModel("depth must be at least 2")
    dom = cylinder_space(M, depth, name=f"cyl{depth}")
    cod = cylinder_space(M, depth - 1, name=f"cyl{depth - 1}")
    return _shift_map(M, depth, dom, cod, "last").check()


def cylinder_image(C: CylinderSystem, A: MSet) -> MSet:
    if A.space is not C.domain:
        raise SpaceMismatch("set is not a union of depth-m words of this system")
    return essential_image(C.map, A)


def predicted_image(C: CylinderSystem, state: str) -> MSet:
    """``⋃_{j: p_ij > 0} [j]`` in the codomain, restricted to positive words."""
    M = C.model
    i = M.index[str(state)]
    mask = 0
    for j, p in enumerate(M.trans[i]):
        if p > 0:
            mask |= C.codomain_cylinder([M.states[j]]).mask
    return MSet(C.codomain, mask & C.codomain.positive_mask)


def nonsingular_witness(C: CylinderSystem):
    """First positive codomain atom missed by ``T̂X``, or None if the map is nonsingular."""
    img = essential_image(C.map, C.domain.full())
    missing = C.codomain.positive_mask & ~img.mask
    if not missing:
        return None
    return MSet(C.codomain, missing & -missing)


def invariant_state_sets(C: CylinderSystem) -> list:
    """State sets ``J`` whose first-symbol cylinder satisfies ``[J]_m ≐ T⁻¹[J]_{m-1}``."""
    M = C.model
    out = []
    for r in range(len(M.states) + 1):
        for J in itertools.combinations(M.states, r):
            dom_set = MSet(C.domain, 0)
            cod_set = MSet(C.codomain, 0)
            for s in J:
                dom_set = dom_set | C.cylinder([s])
                cod_set = cod_set | C.codomain_cylinder([s])
            if ae_relation(dom_set, preimage(C.map, cod_set), "eq"):
                out.append(J)
    return out


@dataclass(frozen=True)
class StateFormula:
    state: str
    image: tuple
    predicted: tuple
    support_ok: bool
    exact_coefficients: dict
    printed_coefficients: dict
    proportional: bool


def verify_markov_formulas(M: MarkovModel, depth: int = 2) -> list:
    """Compare cylinder images and transfer densities with the Markov prediction.

    Support equality is required.  Coefficients are reported next to
    ``p_ij / p_j``; the exact density is ``p_i p_ij / p_j``, so only
    proportionality (factor ``p_i``) is checked.
    """
    M.validate()
    if not M.is_irreducible():
        raise NotIrreducible("transition matrix is not irreducible")
    if not M.is_stationary():
        raise NotStationary("init is not invariant under the transition matrix")
    if depth < 2:
        raise InvalidModel("depth must be at least 2")
    C = build_cylinder_system(M, depth)
    report = []
    for i, s in enumerate(M.states):
        A = C.cylinder([s])
        img = cylinder_image(C, A)
        pred = predicted_image(C, s)
        dens = transfer_density(C.map, Density.indicator(A))
        exact, printed = {}, {}
        for j, t in enumerate(M.states):
            cyl = C.codomain_cylinder([t]).mask & C.codomain.positive_mask
            vals = {dens.values[c] for c in range(C.codomain.n_atoms) if cyl >> c & 1}
            if len(vals) > 1:
                raise PropertyCheckFailure(f"density not constant on [{t}]")
            exact[t] = vals.pop() if vals else Fraction(0)
            printed[t] = M.trans[i][j] / M.init[j] if M.init[j] else Fraction(0)
        proportional = all(exact[t] == M.init[i] * printed[t] for t in M.states)
        report.append(StateFormula(s, img.names(), pred.names(), img == pred,
                                   exact, printed, proportional))
    return report
