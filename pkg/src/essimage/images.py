"""Essential images, the transfer operator, and comparison with set images."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Optional, Sequence, Union

import numpy as np

from . import kernels
from .measure_core import (
    EssImageError,
    MeasurableMap,
    MSet,
    PropertyCheckFailure,
    Space,
    SpaceMismatch,
    as_rat,
    mask_members,
)


class TableIncomplete(EssImageError):
    pass


class TooManyAtoms(EssImageError):
    pass


AXIOM_ATOM_LIMIT = 16
CODOMAIN_TABLE_LIMIT = 20


def _domain_set(T: MeasurableMap, A: MSet):
    if A.space is not T.domain:
        raise SpaceMismatch(f"set lives on {A.space.name!r}, map starts at {T.domain.name!r}")
    T.check()


def essential_image(T: MeasurableMap, A: MSet) -> MSet:
    """Codomain atoms ``a'`` with ``λ(A ∩ T⁻¹a') > 0``.

    This is the λ'-minimal support of ``λ|_A ∘ T⁻¹``; it never contains a null
    atom because the map is null-preserving.
    """
    _domain_set(T, A)
    return MSet(T.codomain, T.image_mask(A.mask))


@dataclass(frozen=True)
class Density:
    """Per-atom density with respect to the weights of ``space``."""

    space: Space
    values: tuple

    def __post_init__(self):
        vals = tuple(as_rat(v) for v in self.values)
        if len(vals) != self.space.n_atoms:
            raise ValueError("a density needs one value per atom")
        if any(v < 0 for v in vals):
            raise ValueError("densities are nonnegative")
        object.__setattr__(self, "values", vals)

    @classmethod
    def indicator(cls, A: MSet) -> "Density":
        return cls(A.space, tuple(Fraction(A.mask >> a & 1) for a in range(A.space.n_atoms)))

    @classmethod
    def zero(cls, space: Space) -> "Density":
        return cls(space, (Fraction(0),) * space.n_atoms)

    def canonical(self) -> "Density":
        w = self.space.atom_weights
        return Density(self.space, tuple(v if w[a] > 0 else Fraction(0)
                                         for a, v in enumerate(self.values)))

    def integral(self, f: Sequence = None) -> Fraction:
        """``∫ f u dλ`` for a per-atom test function ``f`` (default 1)."""
        w = self.space.atom_weights
        if f is None:
            f = (1,) * self.space.n_atoms
        return sum((as_rat(f[a]) * v * w[a] for a, v in enumerate(self.values)), Fraction(0))

    def support(self) -> MSet:
        w = self.space.atom_weights
        return MSet(self.space, sum(1 << a for a, v in enumerate(self.values) if v > 0 and w[a] > 0))

    def masses(self) -> tuple:
        w = self.space.atom_weights
        return tuple(v * w[a] for a, v in enumerate(self.values))


def transfer_density(T: MeasurableMap, u: Density) -> Density:
    """Density of ``(u·λ) ∘ T⁻¹`` with respect to λ', computed point by point.

    Null codomain atoms get value 0 (the numerator vanishes there).
    """
    if u.space is not T.domain:
        raise SpaceMismatch("density does not live on the domain of the map")
    T.check()
    dom, cod = T.domain, T.codomain
    num = [Fraction(0)] * cod.n_atoms
    for p, t in enumerate(T.targets):
        w = dom.weights[p]
        if w:
            num[cod.atom_of_point[t]] += u.values[dom.atom_of_point[p]] * w
    den = cod.atom_weights
    return Density(cod, tuple(num[c] / den[c] if den[c] > 0 else Fraction(0)
                              for c in range(cod.n_atoms)))


def essential_image_via_transfer(T: MeasurableMap, A: MSet) -> MSet:
    _domain_set(T, A)
    return transfer_density(T, Density.indicator(A)).support()


@dataclass(frozen=True)
class ImageReport:
    set_image_points: tuple
    is_measurable: bool
    measurable_hull: MSet
    essential_image: MSet
    normal_version: MSet
    normal_image_points: tuple
    normal_image_measurable: bool

    @property
    def hull_measure(self) -> Fraction:
        return self.measurable_hull.space.mask_weight(self.measurable_hull.mask)


def _point_image(T: MeasurableMap, mask: int):
    dom, cod = T.domain, T.codomain
    hit = sorted({T.targets[p] for p, a in enumerate(dom.atom_of_point) if mask >> a & 1})
    pts = tuple(cod.points[t] for t in hit)
    hull = 0
    for t in hit:
        hull |= 1 << cod.atom_of_point[t]
    exact = {cod.points[t] for t in hit}
    measurable = all(all(p in exact for p in cod.atoms[c]) for c in mask_members(hull))
    return pts, measurable, hull


def set_image_report(T: MeasurableMap, A: MSet) -> ImageReport:
    """Set image ``T(A)`` next to the essential image and the normal version ``A∘``."""
    _domain_set(T, A)
    cod = T.codomain
    pts, measurable, hull = _point_image(T, A.mask)
    ess = T.image_mask(A.mask)
    normal = A.mask & T.preimage_mask(ess)
    npts, nmeas, nhull = _point_image(T, normal)
    pos_d, pos_c = T.domain.positive_mask, cod.positive_mask

    if ess & ~hull & pos_c:
        raise PropertyCheckFailure("essential image is not inside the hull of the set image")
    if (normal ^ A.mask) & pos_d:
        raise PropertyCheckFailure("normal version differs from A on a positive set")
    if measurable:
        if not nmeas:
            raise PropertyCheckFailure("T(A∘) is not measurable although T(A) is")
        if (nhull ^ ess) & pos_c:
            raise PropertyCheckFailure("T(A∘) is not a version of the essential image")
    return ImageReport(pts, measurable, MSet(cod, hull), MSet(cod, ess), MSet(T.domain, normal),
                       npts, nmeas)


def restrict_domain(T: MeasurableMap, keep: MSet, name: str = None) -> MeasurableMap:
    """Restriction of ``T`` to the points of ``keep``.

    For an endomap whose restriction maps ``keep`` into itself the codomain is
    restricted as well, so the result is again an endomap.
    """
    dom = T.domain
    members = set(keep.members)
    atoms = [dom.atoms[a] for a in sorted(members)]
    names = [dom.atom_names[a] for a in sorted(members)]
    pts = [p for block in atoms for p in block]
    weights = [dom.weights[dom.point_index[p]] for p in pts]
    sub = Space(name or f"{dom.name}|{'+'.join(names) or '∅'}", pts, weights, atoms, names)
    images = [T.image_point(p) for p in pts]
    if T.is_endomap and all(q in set(pts) for q in images):
        return MeasurableMap(sub, sub, images, name=f"{T.name}|{sub.name}")
    return MeasurableMap(sub, T.codomain, images, name=f"{T.name}|{sub.name}")


def ambitious_null_set(T: MeasurableMap, action: str = "find"):
    """``find``: the maximal null set if it is ambitious, else None.

    ``purge``: restriction of ``T`` to the union of positive atoms, which is a
    version of the whole domain without nonempty null sets.
    """
    T.check()
    dom = T.domain
    null = dom.full_mask & ~dom.positive_mask
    if action == "find":
        if not null:
            return None
        _, _, hull = _point_image(T, null)
        if T.codomain.mask_weight(hull) > 0:
            return MSet(dom, null)
        return None
    if action == "purge":
        restricted = restrict_domain(T, MSet(dom, dom.positive_mask), name=f"{dom.name}|Y")
        return restricted.check()
    raise ValueError(f"unknown action {action!r}")


@dataclass(frozen=True)
class AxiomCheck:
    ok: bool
    axiom: Optional[str] = None
    witness: tuple = ()

    def __bool__(self):
        return self.ok


def _candidate_table(T: MeasurableMap, candidate) -> np.ndarray:
    dom = T.domain
    size = 1 << dom.n_atoms
    table = np.zeros(size, dtype=np.uint64)
    if callable(candidate) and not isinstance(candidate, Mapping):
        for mask in range(size):
            out = candidate(MSet(dom, mask))
            table[mask] = out.mask if isinstance(out, MSet) else int(out)
        return table
    lookup = {}
    for key, val in candidate.items():
        k = key.mask if isinstance(key, MSet) else int(key)
        lookup[k] = val.mask if isinstance(val, MSet) else int(val)
    missing = [m for m in range(size) if m not in lookup]
    if missing:
        raise TableIncomplete(f"candidate table misses {len(missing)} sets, first mask {missing[0]}")
    for mask in range(size):
        table[mask] = lookup[mask]
    return table


def verify_image_axioms(T: MeasurableMap, candidate: Union[Mapping, Callable],
                        limit: int = AXIOM_ATOM_LIMIT, backend: str = None) -> AxiomCheck:
    """Check the three axioms characterising ``A ↦ T̂A`` for a candidate operator.

    (1) λ(A) > 0 iff λ'(ŤA) > 0; (2) A ⊆̇ B implies ŤA ⊆̇ ŤB;
    (3) Ť(T⁻¹B') ⊆̇ B'.  Witnesses are the first failures in ascending mask
    order (pairs ordered by B, then A).  A passing candidate is then compared
    with the essential image on every set.
    """
    T.check()
    dom, cod = T.domain, T.codomain
    n = dom.n_atoms
    if n > limit:
        raise TooManyAtoms(f"{n} domain atoms exceed the limit of {limit}")
    if cod.n_atoms > CODOMAIN_TABLE_LIMIT:
        raise TooManyAtoms(f"{cod.n_atoms} codomain atoms exceed {CODOMAIN_TABLE_LIMIT}")
    cand = _candidate_table(T, candidate)
    pos_d, pos_c = np.uint64(dom.positive_mask), np.uint64(cod.positive_mask)
    masks = np.arange(1 << n, dtype=np.uint64)

    lhs = (masks & pos_d) != 0
    rhs = (cand & pos_c) != 0
    bad = np.flatnonzero(lhs != rhs)
    if bad.size:
        return AxiomCheck(False, "positivity", (MSet(dom, int(bad[0])),))

    canon = cand & pos_c
    below = kernels.subset_or(canon, backend=backend)
    null_d = np.uint64(dom.full_mask & ~dom.positive_mask)
    need = below[masks | null_d]
    bad = np.flatnonzero(need & ~canon)
    if bad.size:
        b = int(bad[0])
        closure = b | int(null_d)
        for a in range(1 << n):
            if a & ~closure == 0 and int(canon[a]) & ~int(canon[b]):
                return AxiomCheck(False, "monotonicity", (MSet(dom, a), MSet(dom, b)))
        raise PropertyCheckFailure("monotonicity failure without a witness")

    pre = kernels.join_table(T.atom_preimages, backend=backend)
    cmasks = np.arange(1 << cod.n_atoms, dtype=np.uint64)
    bad = np.flatnonzero(cand[pre] & ~cmasks & pos_c)
    if bad.size:
        return AxiomCheck(False, "preimage", (MSet(cod, int(bad[0])),))

    ess = kernels.join_table(T.atom_images, backend=backend)
    if np.any((ess ^ cand) & pos_c):
        raise PropertyCheckFailure("candidate satisfies the axioms but differs from T̂")
    return AxiomCheck(True)
