"""Tail sigma-algebra, tail hulls, separation, corridors and exactness."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .dynamics import DynSystem, classify
from .images import Density
from .measure_core import EssImageError, MSet, PropertyCheckFailure, as_rat, mask_members
from .orbits import Orbit, orbit

NOGGI_EXHAUSTIVE_SETS = 1 << 10
NOGGI_SAMPLES = 10_000


class NotATailSet(EssImageError):
    pass


class NotInvariant(EssImageError):
    pass


class NotAbsolutelyContinuous(EssImageError):
    pass


class NotAProbability(EssImageError):
    pass


@dataclass(frozen=True)
class TailAlgebra:
    partition: tuple
    depth: int

    def block_masks(self) -> tuple:
        return tuple(b.mask for b in self.partition)


def _lowest(mask: int) -> int:
    return (mask & -mask).bit_length()


def _tail_partition(S: DynSystem):
    blocks = [1 << a for a in range(S.n)]
    depth = 0
    while True:
        nxt = sorted({S.pre(b) for b in blocks} - {0}, key=_lowest)
        if nxt == blocks:
            return blocks, depth
        blocks = nxt
        depth += 1
        if depth > S.n:
            raise PropertyCheckFailure("tail algebra failed to stabilise within #atoms steps")


def tail_algebra(S: DynSystem) -> TailAlgebra:
    """Atoms of ``⋂ T⁻ⁿ𝒜``, obtained by pulling the partition back until it stops changing.

    ``𝒜_{n+1} = T⁻¹𝒜_n`` only depends on ``𝒜_n`` and each step coarsens,
    so the first unchanged step is final and happens within #atoms steps.
    """
    blocks, depth = _tail_partition(S)
    return TailAlgebra(tuple(S.set(b) for b in blocks), depth)


def _hull_by_blocks(S: DynSystem, a: int) -> int:
    blocks, _ = _tail_partition(S)
    out = 0
    for b in blocks:
        if b & a & S.pos:
            out |= b
    return out & S.pos


def _pullback_horizon(S: DynSystem, a: int) -> int:
    """Index ``M`` with ``T⁻ᵐT̂ᵐA`` constant mod λ for ``m >= M``.

    ``B_m = T̂ᵐA`` is periodic from ``p`` with period ``q``.  Along
    ``m = p + kq`` the sets ``T⁻ᵐB_m = T⁻ᵖ(T^{-q})^k B_p`` form an eventually
    periodic sequence in ``k``; being nondecreasing mod λ, they are constant
    once the ``k``-orbit has entered its cycle.
    """
    images = S.image_orbit(a)
    p, q = len(images.pre), len(images.period)
    step_q = lambda c: S.pre_power(c, q)
    back = orbit(step_q, images[p])
    return p + q * len(back)


def _pullbacks(S: DynSystem, a: int):
    horizon = _pullback_horizon(S, a)
    cur_img = a & S.pos
    out = []
    for m in range(horizon + 1):
        out.append(S.pre_power(cur_img, m))
        cur_img = S.img(cur_img)
    return out


def tail_hull(S: DynSystem, A: MSet) -> MSet:
    """Smallest tail set containing ``A`` mod λ, computed two ways.

    Route 1 unions ``T⁻ᵐT̂ᵐA`` over ``m``; route 2 unions the tail-algebra
    blocks meeting ``A`` in positive measure.
    """
    a = S.check_set(A)
    by_blocks = _hull_by_blocks(S, a)
    by_pullback = 0
    for v in _pullbacks(S, a):
        by_pullback |= v
    if (by_pullback ^ by_blocks) & S.pos:
        raise PropertyCheckFailure("tail hull routes disagree")
    return S.set(by_blocks)


def is_tail_set(S: DynSystem, A: MSet) -> bool:
    a = S.check_set(A)
    pos = S.pos
    by_hull = (a ^ tail_hull(S, A).mask) & pos == 0
    by_pullback = all((a ^ v) & pos == 0 for v in _pullbacks(S, a))
    blocks, _ = _tail_partition(S)
    by_algebra = all(b & a & pos in (0, b & pos) for b in blocks)
    if not by_hull == by_pullback == by_algebra:
        raise PropertyCheckFailure("tail-set criteria disagree")
    return by_hull


def _separated(S: DynSystem, a: int, b: int) -> bool:
    pos = S.pos
    pairs = orbit(lambda st: (S.img(st[0]), S.img(st[1])), (a & pos, b & pos))
    return all(x & y == 0 for x, y in pairs)


def remain_separated(S: DynSystem, A: MSet, B: MSet) -> bool:
    """``T̂ⁿA ∩ T̂ⁿB ≐ ∅`` for all n ≥ 0, cross-checked against disjoint tail hulls."""
    a, b = S.check_set(A), S.check_set(B)
    sep = _separated(S, a, b)
    hulls_disjoint = tail_hull(S, A).mask & tail_hull(S, B).mask == 0
    if sep != hulls_disjoint:
        raise PropertyCheckFailure("separation and tail-hull criteria disagree")
    return sep


def separation_witnesses(S: DynSystem, A: MSet) -> Orbit:
    """The sets ``M_n := T̂ⁿA`` that separate ``A`` from any set remaining separated from it."""
    return S.image_orbit(S.check_set(A)).map(S.set)


@dataclass(frozen=True)
class Corridor:
    entrance: MSet
    pre: tuple
    period: tuple

    def term(self, n: int) -> MSet:
        if n < len(self.pre):
            return self.pre[n]
        return self.period[(n - len(self.pre)) % len(self.period)]

    def term_masks(self) -> Orbit:
        return Orbit(tuple(t.mask for t in self.pre), tuple(t.mask for t in self.period))


def _corridor_from_orbit(S, a, orb: Orbit) -> Corridor:
    return Corridor(S.set(a), tuple(S.set(m) for m in orb.pre), tuple(S.set(m) for m in orb.period))


def corridor_bounds(S: DynSystem, A: MSet):
    """Smallest ``(T̂ⁿA)`` and largest ``(T̂ⁿA ∪ (T̂ⁿX)ᶜ)`` corridors with entrance ``A``."""
    a = S.check_set(A)
    if not is_tail_set(S, A):
        raise NotATailSet(f"{A!r} is not a tail set")
    pos, full = S.pos, S.full
    pairs = orbit(lambda st: (S.img(st[0]), S.img(st[1])), (a & pos, full))
    smallest = pairs.map(lambda st: st[0])
    largest = pairs.map(lambda st: (st[0] | (full & ~st[1])) & pos)
    low = _corridor_from_orbit(S, a, smallest)
    high = _corridor_from_orbit(S, a, largest)
    if not S.pos & ~S.img(S.full):
        if any(x != y for x, y in zip(smallest, largest)):
            raise PropertyCheckFailure("nonsingular system with distinct corridor bounds")
    return low, high


def _term_orbit_step(n_pre, n_period):
    def step(idx):
        idx += 1
        if idx >= n_pre + n_period:
            idx = n_pre
        return idx
    return step


def verify_corridor(S: DynSystem, A: MSet, terms: Corridor) -> bool:
    """Decide ``A ≐ T⁻ⁿAₙ`` for every n ≥ 0.

    The pair (position in the eventually periodic term list, ``T^n`` as an
    atom map) evolves deterministically, so one pass over its orbit covers
    every n.  For tail entrances the sandwich characterisation is evaluated
    as well and must agree.
    """
    a = S.check_set(A)
    pos = S.pos
    masks = terms.term_masks()
    n_pre, n_per = len(masks.pre), len(masks.period)
    if n_per == 0:
        raise ValueError("a corridor needs a nonempty period")
    fmap = S.atom_map
    advance = _term_orbit_step(n_pre, n_per)
    states = orbit(lambda st: (advance(st[0]), tuple(fmap[i] for i in st[1])),
                   (0, tuple(range(S.n))))
    term_at = lambda idx: masks.pre[idx] if idx < n_pre else masks.period[idx - n_pre]

    def pull(fn, mask):
        return sum(1 << i for i, c in enumerate(fn) if mask >> c & 1)

    by_definition = all((a ^ pull(fn, term_at(idx))) & pos == 0 for idx, fn in states)
    if not is_tail_set(S, A):
        if by_definition:
            raise PropertyCheckFailure("corridor found for a set that is not a tail set")
        return False
    sandwich_states = orbit(lambda st: (S.img(st[0]), S.img(st[1]), advance(st[2])),
                            (a & pos, S.full, 0))
    by_sandwich = all(
        lo & ~term_at(idx) & pos == 0 and term_at(idx) & ~(lo | (S.full & ~x)) & pos == 0
        for lo, x, idx in sandwich_states)
    if by_sandwich != by_definition:
        raise PropertyCheckFailure("corridor definition and sandwich bounds disagree")
    return by_definition


def corridor(S: DynSystem, A: MSet, action: str = "bounds", terms: Corridor = None):
    if action == "bounds":
        return corridor_bounds(S, A)
    if action == "verify":
        return verify_corridor(S, A, terms)
    raise ValueError(f"unknown corridor action {action!r}")


@dataclass(frozen=True)
class ExactnessReport:
    exact: bool
    limsup_full: bool
    tail_depth: int
    tail_blocks: tuple
    separated_pair: Optional[tuple] = None
    image_growth_limits: Optional[dict] = None
    noggi_criterion: Optional[bool] = None
    noggi_family: str = ""
    limsup_values: dict = field(default_factory=dict)


def _mu_masses(S: DynSystem, mu) -> tuple:
    if isinstance(mu, Density):
        if mu.space is not S.space:
            raise NotAProbability("density lives on another space")
        masses = mu.masses()
    else:
        masses = tuple(as_rat(v) for v in mu)
    if len(masses) != S.n or any(v < 0 for v in masses):
        raise NotAProbability("mu needs one nonnegative mass per atom")
    if sum(masses) != 1:
        raise NotAProbability(f"mu has total mass {sum(masses)}, expected 1")
    weights = S.space.atom_weights
    for c, v in enumerate(masses):
        if v > 0 and weights[c] == 0:
            raise NotAbsolutelyContinuous(f"mu charges the null atom {S.space.atom_names[c]!r}")
    for c in range(S.n):
        pulled = sum(masses[i] for i in mask_members(S.pre(1 << c)))
        if pulled != masses[c]:
            raise NotInvariant(f"mu(T⁻¹{S.space.atom_names[c]}) = {pulled} != {masses[c]}")
    return masses


def _family(S: DynSystem, seed: int = 0):
    size = 1 << S.n
    if size <= NOGGI_EXHAUSTIVE_SETS:
        return range(size), "exhaustive"
    rng = random.Random(seed)
    sample = {1 << a for a in range(S.n)}
    sample.update(rng.getrandbits(S.n) for _ in range(NOGGI_SAMPLES))
    return sorted(sample), "sampled"


def noggi_criterion(S: DynSystem, ergodic: bool = None):
    """Ergodic and no positive ``A`` remains separated from ``T̂A``."""
    if ergodic is None:
        ergodic = classify(S).ergodic
    family, kind = _family(S)
    pos = S.pos
    ok = ergodic and all(a & pos == 0 or not _separated(S, a, S.img(a)) for a in family)
    return ok, kind


def exactness_report(S: DynSystem, mu=None) -> ExactnessReport:
    pos = S.pos
    blocks, depth = _tail_partition(S)
    total = S.measure(S.full)
    exact = all(S.measure(b) == 0 or S.measure(S.full & ~b) == 0 for b in blocks)

    separated_pair = None
    atoms = mask_members(pos)
    for i in atoms:
        for j in atoms:
            if j > i and _separated(S, 1 << i, 1 << j):
                separated_pair = (S.set(1 << i), S.set(1 << j))
                break
        if separated_pair:
            break
    hulls_full = all((_hull_by_blocks(S, 1 << a) ^ S.full) & pos == 0 for a in atoms)
    if not (exact == (separated_pair is None) == hulls_full):
        raise PropertyCheckFailure("exactness criteria disagree")

    limsup_values = {}
    for a in atoms:
        orb = S.image_orbit(1 << a)
        limsup_values[S.space.atom_names[a]] = max(S.measure(m) for m in orb.period) / total
    limsup_full = all(v == 1 for v in limsup_values.values())
    cls = classify(S)
    if limsup_full and not (cls.nonsingular and cls.conservative and exact):
        raise PropertyCheckFailure("lim sup full system is not nonsingular, conservative and exact")

    growth = None
    if mu is not None:
        masses = _mu_masses(S, mu)
        mu_of = lambda m: sum((masses[i] for i in mask_members(m)), Fraction(0))
        growth = {}
        for a in atoms:
            orb = S.image_orbit(1 << a)
            seq = [mu_of(m) for m in orb] + [mu_of(orb.period[0])]
            if any(x > y for x, y in zip(seq, seq[1:])):
                raise PropertyCheckFailure("μ(T̂ⁿA) is not nondecreasing")
            limit = seq[-1]
            if limit != mu_of(_hull_by_blocks(S, 1 << a)):
                raise PropertyCheckFailure("image growth limit differs from μ(tail hull)")
            growth[S.space.atom_names[a]] = limit
        if exact != all(v == 1 for v in growth.values()):
            raise PropertyCheckFailure("exactness and image growth disagree")

    noggi, kind = noggi_criterion(S, cls.ergodic)
    if kind == "exhaustive" and noggi != exact:
        raise PropertyCheckFailure("exactness and the separation criterion disagree")
    if kind == "sampled" and exact and not noggi:
        raise PropertyCheckFailure("exact system fails the sampled separation criterion")

    return ExactnessReport(exact, limsup_full, depth, tuple(S.set(b) for b in blocks),
                           separated_pair, growth, noggi, kind, limsup_values)
