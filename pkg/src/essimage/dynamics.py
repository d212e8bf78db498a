"""Null-preserving endomaps: invariance, hulls, nonsingular part, recurrence."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import lcm

import numpy as np

from . import kernels
from .images import TooManyAtoms
from .measure_core import (
    EssImageError,
    InvalidMap,
    MeasurableMap,
    MSet,
    PropertyCheckFailure,
    Space,
    SpaceMismatch,
    as_rat,
    mask_members,
)
from .orbits import Orbit, function_power_cycle, orbit

MODULUS_ATOM_LIMIT = 20


class NotNonsingular(EssImageError):
    pass


class NotNormalized(EssImageError):
    pass


class InvalidEpsilon(NotNormalized):
    pass


class _Unbounded:
    def __repr__(self):
        return "Unbounded"

    __str__ = __repr__


UNBOUNDED = _Unbounded()


class DynSystem:
    """A validated endomap together with cached atom-level structure."""

    def __init__(self, T: MeasurableMap, name: str = None):
        if T.domain is not T.codomain:
            raise InvalidMap("a dynamical system needs domain == codomain")
        self.map = T.check()
        self.space = T.domain
        self.name = name or self.space.name

    def __repr__(self):
        return f"DynSystem({self.name!r}, {self.space.n_atoms} atoms)"

    @classmethod
    def from_points(cls, space: Space, image_of, name: str = None) -> "DynSystem":
        return cls(MeasurableMap(space, space, image_of), name=name)

    @property
    def n(self) -> int:
        return self.space.n_atoms

    @property
    def pos(self) -> int:
        return self.space.positive_mask

    @property
    def full(self) -> int:
        return self.space.full_mask

    @property
    def atom_map(self) -> tuple:
        return self.map.atom_map

    def img(self, mask: int) -> int:
        return self.map.image_mask(mask)

    def pre(self, mask: int) -> int:
        return self.map.preimage_mask(mask)

    def img_power(self, mask: int, k: int) -> int:
        for _ in range(k):
            mask = self.img(mask)
        return mask

    def pre_power(self, mask: int, k: int) -> int:
        for _ in range(k):
            mask = self.pre(mask)
        return mask

    def set(self, mask: int) -> MSet:
        return MSet(self.space, mask)

    def measure(self, mask: int) -> Fraction:
        return self.space.mask_weight(mask)

    @cached_property
    def power_cycle(self) -> tuple:
        """``(p, q)``: the operators ``T̂^k`` (and ``T^{-k}``) repeat with period q from k = p."""
        return function_power_cycle(self.atom_map)

    # tables over all 2**n masks (desk-scale systems only)
    def image_table(self, backend=None) -> np.ndarray:
        return kernels.join_table(self.map.atom_images, backend=backend)

    def preimage_table(self, backend=None) -> np.ndarray:
        return kernels.join_table(self.map.atom_preimages, backend=backend)

    def image_orbit(self, mask: int) -> Orbit:
        """``T̂^k A`` for ``k >= 0``, with ``A`` taken canonical at ``k = 0``."""
        return orbit(self.img, mask & self.pos)

    def check_set(self, A: MSet) -> int:
        if A.space is not self.space:
            raise SpaceMismatch(f"set lives on {A.space.name!r}, system on {self.space.name!r}")
        return A.mask


def _subseteq(a: int, b: int, pos: int) -> bool:
    return a & ~b & pos == 0


def invariance_check(S: DynSystem, A: MSet, kind: str = "forward") -> bool:
    """Forward invariance ``A ⊆̇ T⁻¹A`` or invariance ``A ≐ T⁻¹A``.

    Both the preimage test and the essential-image test (``T̂A ⊆̇ A``, plus
    ``T̂Aᶜ ⊆̇ Aᶜ`` for full invariance) are evaluated and must agree.
    """
    a = S.check_set(A)
    pos, comp = S.pos, S.full & ~a
    if kind == "forward":
        by_pre = _subseteq(a, S.pre(a), pos)
        by_img = _subseteq(S.img(a), a, pos)
    elif kind == "full":
        by_pre = (a ^ S.pre(a)) & pos == 0
        by_img = _subseteq(S.img(a), a, pos) and _subseteq(S.img(comp), comp, pos)
    else:
        raise ValueError(f"unknown invariance kind {kind!r}")
    if by_pre != by_img:
        raise PropertyCheckFailure(f"{kind} invariance: preimage and image criteria disagree")
    return by_pre


def _forward_hull_mask(S: DynSystem, a: int) -> int:
    cur = a & S.pos
    while True:
        nxt = cur | S.img(cur)
        if nxt == cur:
            return cur
        cur = nxt


def _invariant_hull_mask(S: DynSystem, a: int) -> int:
    cur = _forward_hull_mask(S, a)
    while True:
        nxt = cur | S.pre(cur)
        if nxt == cur:
            return cur & S.pos
        cur = nxt


def hull(S: DynSystem, A: MSet, kind: str = "forward") -> MSet:
    """Forward invariant hull ``⋃ T̂ᵐA`` or invariant hull ``⋃ T⁻ⁿ ⋃ T̂ᵐA``.

    Both are least fixed points of monotone steps on a finite lattice; a step
    that changes nothing is final because the step depends only on the
    current set.
    """
    a = S.check_set(A)
    if kind == "forward":
        return S.set(_forward_hull_mask(S, a))
    if kind == "invariant":
        return S.set(_invariant_hull_mask(S, a))
    raise ValueError(f"unknown hull kind {kind!r}")


def nonsingular_chain(S: DynSystem) -> list:
    """``X, T̂X, T̂²X, …`` up to the first repeat (strictly decreasing after X)."""
    chain = [S.full]
    cur = S.img(S.full)
    while cur != chain[-1]:
        if len(chain) > 1 and cur & ~chain[-1]:
            raise PropertyCheckFailure("T̂ⁿX is not decreasing")
        chain.append(cur)
        cur = S.img(cur)
    return [S.set(m) for m in chain]


def nonsingular_part(S: DynSystem) -> MSet:
    """Stabilised limit of ``T̂ⁿX``: the largest set ``L`` with ``T̂L ≐ L``."""
    chain = nonsingular_chain(S)
    part = chain[-1].mask & S.pos
    if len(chain) > S.n + 1:
        raise PropertyCheckFailure("nonsingular chain longer than the number of atoms")
    if (S.img(part) ^ part) & S.pos:
        raise PropertyCheckFailure("limit of T̂ⁿX is not T̂-invariant")
    return S.set(part)


def _wandering_by_preimage(S: DynSystem, a: int) -> bool:
    orb = orbit(S.pre, S.pre(a))
    return all(v & a & S.pos == 0 for v in orb)


def _wandering_by_image(S: DynSystem, a: int) -> bool:
    orb = orbit(S.img, S.img(a))
    return all(v & a & S.pos == 0 for v in orb)


def is_wandering(S: DynSystem, A: MSet) -> bool:
    """``A ∩ T⁻ⁿA ≐ ∅`` for all n ≥ 1, cross-checked with ``A ∩ T̂ⁿA ≐ ∅``."""
    a = S.check_set(A)
    by_pre = _wandering_by_preimage(S, a)
    if by_pre != _wandering_by_image(S, a):
        raise PropertyCheckFailure("wandering tests via T⁻ⁿ and T̂ⁿ disagree")
    return by_pre


@dataclass(frozen=True)
class Classification:
    nonsingular: bool
    conservative: bool
    ergodic: bool
    witnesses: dict = field(default_factory=dict)


def classify(S: DynSystem) -> Classification:
    """Nonsingularity, conservativity and ergodicity with witnesses.

    Checks run atom by atom: a positive wandering set contains a positive
    wandering atom, and a nontrivial invariant set contains a positive atom
    whose invariant hull is nontrivial.  Witnesses are lowest-index first.
    """
    pos = S.pos
    witnesses = {}

    missing = pos & ~S.img(S.full)
    nonsingular = missing == 0
    if not nonsingular:
        low = missing & -missing
        witnesses["singular_atom"] = S.set(low)

    conservative = True
    for a in mask_members(pos):
        bit = 1 << a
        wandering = _wandering_by_preimage(S, bit)
        returns = 0
        for v in orbit(S.pre, S.pre(bit)):
            returns |= v
        recurrent = _subseteq(bit, returns, pos)
        if wandering != _wandering_by_image(S, bit) or wandering == recurrent:
            raise PropertyCheckFailure(f"wandering/recurrence checks disagree on atom {a}")
        if wandering:
            conservative = False
            witnesses["wandering_atom"] = S.set(bit)
            break

    ergodic = True
    for a in mask_members(pos):
        h = _invariant_hull_mask(S, 1 << a)
        if pos & ~h:
            ergodic = False
            witnesses["invariant_set"] = S.set(h)
            break

    if conservative and not nonsingular:
        raise PropertyCheckFailure("conservative system is not nonsingular")
    return Classification(nonsingular, conservative, ergodic, witnesses)


def image_size_modulus(S: DynSystem, epsilon) -> object:
    """Tight δ for "λ(A) ≥ 1−δ implies λ(T̂A) ≥ 1−ε" on a normalized nonsingular system.

    Returns ``min λ(Aᶜ)`` over sets ``A`` of positive measure with
    ``λ(T̂A) < 1−ε``, or :data:`UNBOUNDED` if there is no such set (then every
    δ < 1 works).
    """
    eps = as_rat(epsilon)
    if not 0 < eps < 1:
        raise InvalidEpsilon(f"epsilon must lie in (0, 1), got {eps}")
    if S.space.total != 1:
        raise NotNormalized(f"total weight is {S.space.total}, expected 1")
    if S.pos & ~S.img(S.full):
        raise NotNonsingular("image-size modulus needs a nonsingular system")
    n = S.n
    if n > MODULUS_ATOM_LIMIT:
        raise TooManyAtoms(f"{n} atoms exceed the limit of {MODULUS_ATOM_LIMIT}")

    weights = S.space.atom_weights
    den = lcm(*(w.denominator for w in weights))
    ints = [int(w * den) for w in weights]
    threshold = (1 - eps) * den
    if den < 2**40 and eps.denominator < 2**20:
        meas = kernels.sum_table(ints)
        img_meas = meas[S.image_table()]
        # img_meas / den < 1 - eps, cleared of denominators
        violating = img_meas * threshold.denominator < threshold.numerator
        violating &= meas > 0
        if not violating.any():
            return UNBOUNDED
        best = int(meas[violating].max())
        return Fraction(den - best, den)
    best = None
    for mask in range(1, 1 << n):
        m = S.measure(mask)
        if m > 0 and S.measure(S.img(mask)) < 1 - eps:
            c = 1 - m
            best = c if best is None or c < best else best
    return UNBOUNDED if best is None else best


def restrict(S: DynSystem, A: MSet, name: str = None) -> DynSystem:
    """Subsystem on ``A``; null sets of ``A`` mapped outside go to a weight-0 sink.

    Raises :class:`InvalidMap` unless a.e. point of ``A`` is mapped into ``A``.
    """
    a = S.check_set(A)
    space = S.space
    fmap = S.atom_map
    escaping = [b for b in mask_members(a) if not a >> fmap[b] & 1]
    if any(space.atom_weights[b] > 0 for b in escaping):
        raise InvalidMap("restriction requires A ⊆̇ T⁻¹A")
    atoms = [space.atoms[b] for b in mask_members(a)]
    names = [space.atom_names[b] for b in mask_members(a)]
    pts = [p for block in atoms for p in block]
    weights = [space.weights[space.point_index[p]] for p in pts]
    inside = set(pts)
    images = [S.map.image_point(p) for p in pts]
    if any(q not in inside for q in images):
        sink = "⊥"
        while sink in inside:
            sink += "'"
        pts.append(sink)
        weights.append(Fraction(0))
        atoms.append((sink,))
        names.append(sink)
        images = [q if q in inside else sink for q in images] + [sink]
    sub = Space(name or f"{space.name}|{'+'.join(names[:len(atoms)]) or '∅'}",
                pts, weights, atoms, names)
    return DynSystem(MeasurableMap(sub, sub, images), name=sub.name)
