"""Finite measure spaces with partition sigma-algebras.

Weights are exact :class:`fractions.Fraction` values.  A measurable set is an
:class:`MSet`, i.e. an integer bitmask over the atoms of its space.  Two sets
are equal mod the measure iff they agree on the positive-weight atoms, so most
relations reduce to mask arithmetic against :attr:`Space.positive_mask`.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

Rat = Fraction


class EssImageError(Exception):
    """Base class for invalid input (CLI exit code 2)."""


class SpaceError(EssImageError):
    pass


class NegativeWeight(SpaceError):
    pass


class PartitionGap(SpaceError):
    pass


class PartitionOverlap(SpaceError):
    pass


class DuplicatePoint(SpaceError):
    pass


class SpaceMismatch(EssImageError):
    pass


class MapError(EssImageError):
    def __init__(self, message, atom=None):
        super().__init__(message)
        self.atom = atom


class NotMeasurable(MapError):
    pass


class NotNullPreserving(MapError):
    pass


class InvalidMap(MapError):
    pass


class PropertyCheckFailure(AssertionError):
    """Two independent computations that must agree did not (CLI exit code 1)."""


def as_rat(value) -> Fraction:
    if isinstance(value, float):
        raise TypeError("floats are not accepted as weights; use Fraction or 'p/q' strings")
    return Fraction(value)


class Space:
    """Finite set of weighted points partitioned into atoms.

    Construction stores the data as given; call :func:`validate` (done by every
    public entry point that builds spaces) before relying on the derived lookups.
    """

    def __init__(self, name: str, points: Sequence[str], weights, atoms=None, atom_names=None):
        self.name = str(name)
        self.points = tuple(str(p) for p in points)
        if isinstance(weights, Mapping):
            weights = [weights[p] for p in self.points]
        self.weights = tuple(as_rat(w) for w in weights)
        if atoms is None:
            atoms = [(p,) for p in self.points]
        self.atoms = tuple(tuple(str(p) for p in block) for block in atoms)
        if atom_names is None:
            atom_names = [block[0] if len(block) == 1 else "{" + " ".join(block) + "}"
                          for block in self.atoms]
        self.atom_names = tuple(str(a) for a in atom_names)

    def __repr__(self):
        return f"Space({self.name!r}, {len(self.points)} points, {len(self.atoms)} atoms)"

    # derived lookups; only meaningful for a validated space
    @cached_property
    def n_atoms(self) -> int:
        return len(self.atoms)

    @cached_property
    def point_index(self) -> dict:
        return {p: i for i, p in enumerate(self.points)}

    @cached_property
    def atom_of_point(self) -> tuple:
        lookup = {}
        for a, block in enumerate(self.atoms):
            for p in block:
                lookup[p] = a
        return tuple(lookup[p] for p in self.points)

    @cached_property
    def atom_index(self) -> dict:
        return {name: a for a, name in enumerate(self.atom_names)}

    @cached_property
    def atom_weights(self) -> tuple:
        out = [Fraction(0)] * self.n_atoms
        for p, a in enumerate(self.atom_of_point):
            out[a] += self.weights[p]
        return tuple(out)

    @cached_property
    def positive_mask(self) -> int:
        return sum(1 << a for a, w in enumerate(self.atom_weights) if w > 0)

    @cached_property
    def full_mask(self) -> int:
        return (1 << self.n_atoms) - 1

    @cached_property
    def total(self) -> Fraction:
        return sum(self.weights, Fraction(0))

    def mask_weight(self, mask: int) -> Fraction:
        w = self.atom_weights
        total = Fraction(0)
        a = 0
        while mask:
            if mask & 1:
                total += w[a]
            mask >>= 1
            a += 1
        return total

    # set constructors
    def empty(self) -> "MSet":
        return MSet(self, 0)

    def full(self) -> "MSet":
        return MSet(self, self.full_mask)

    def atom(self, index_or_name) -> "MSet":
        a = index_or_name if isinstance(index_or_name, int) else self.atom_index[index_or_name]
        return MSet(self, 1 << a)

    def set_of(self, atoms: Iterable = ()) -> "MSet":
        """Set built from atom indices or atom names."""
        mask = 0
        for a in atoms:
            mask |= 1 << (a if isinstance(a, int) else self.atom_index[a])
        return MSet(self, mask)

    def set_of_points(self, points: Iterable[str]) -> "MSet":
        """Atom-union with exactly the given points; raises if not an atom-union."""
        pts = {str(p) for p in points}
        mask = 0
        for a, block in enumerate(self.atoms):
            inside = [p in pts for p in block]
            if all(inside):
                mask |= 1 << a
            elif any(inside):
                raise ValueError(f"points {sorted(pts)} do not form a union of atoms")
        return MSet(self, mask)

    def normalized(self, name=None) -> "Space":
        total = self.total
        if total == 0:
            raise ValueError("cannot normalize a space of total weight 0")
        return Space(name or self.name, self.points, [w / total for w in self.weights],
                     self.atoms, self.atom_names)

    def rescaled(self, factor) -> "Space":
        factor = as_rat(factor)
        return Space(self.name, self.points, [w * factor for w in self.weights],
                     self.atoms, self.atom_names)


def mask_members(mask: int) -> tuple:
    out = []
    a = 0
    while mask:
        if mask & 1:
            out.append(a)
        mask >>= 1
        a += 1
    return tuple(out)


@dataclass(frozen=True, eq=False)
class MSet:
    """Measurable set: union of the atoms whose bits are set in ``mask``."""

    space: Space
    mask: int

    def __eq__(self, other):
        return isinstance(other, MSet) and other.space is self.space and other.mask == self.mask

    def __hash__(self):
        return hash((id(self.space), self.mask))

    def __repr__(self):
        return f"MSet({self.space.name}: {self.names() or '∅'})"

    @property
    def members(self) -> tuple:
        return mask_members(self.mask)

    def names(self) -> tuple:
        return tuple(self.space.atom_names[a] for a in self.members)

    def points(self) -> tuple:
        return tuple(p for a in self.members for p in self.space.atoms[a])

    def _same(self, other):
        if other.space is not self.space:
            raise SpaceMismatch(f"sets live on {self.space.name!r} and {other.space.name!r}")

    def __or__(self, other):
        self._same(other)
        return MSet(self.space, self.mask | other.mask)

    def __and__(self, other):
        self._same(other)
        return MSet(self.space, self.mask & other.mask)

    def __sub__(self, other):
        self._same(other)
        return MSet(self.space, self.mask & ~other.mask)

    def __xor__(self, other):
        self._same(other)
        return MSet(self.space, self.mask ^ other.mask)

    def complement(self) -> "MSet":
        return MSet(self.space, self.space.full_mask & ~self.mask)

    def canonical(self) -> "MSet":
        """Representative of the mod-null class without weight-0 atoms."""
        return MSet(self.space, self.mask & self.space.positive_mask)

    def is_empty(self) -> bool:
        return self.mask == 0


def validate(space: Space) -> None:
    """Raise the first violated invariant of ``space``; return None if well formed."""
    seen = set()
    for p in space.points:
        if p in seen:
            raise DuplicatePoint(f"point {p!r} declared twice in space {space.name!r}")
        seen.add(p)
    if len(space.weights) != len(space.points):
        raise SpaceError("weights and points differ in length")
    for p, w in zip(space.points, space.weights):
        if w < 0:
            raise NegativeWeight(f"point {p!r} has negative weight {w}")
    covered = set()
    for block in space.atoms:
        if not block:
            raise SpaceError("empty atom")
        for p in block:
            if p not in seen:
                raise SpaceError(f"atom mentions undeclared point {p!r}")
            if p in covered:
                raise PartitionOverlap(f"point {p!r} lies in two atoms")
            covered.add(p)
    missing = [p for p in space.points if p not in covered]
    if missing:
        raise PartitionGap(f"points {missing} are not covered by any atom")
    if len(space.atom_names) != len(space.atoms) or len(set(space.atom_names)) != len(space.atoms):
        raise SpaceError("atom names must be unique, one per atom")


def measure(A: MSet) -> Fraction:
    return A.space.mask_weight(A.mask)


def ae_relation(A: MSet, B: MSet = None, rel: str = "eq") -> bool:
    """``eq``: A ≐ B, ``subseteq``: A ⊆̇ B, ``null``: λ(A) = 0 (B ignored)."""
    pos = A.space.positive_mask
    if rel == "null":
        return A.mask & pos == 0
    A._same(B)
    if rel == "eq":
        return (A.mask ^ B.mask) & pos == 0
    if rel == "subseteq":
        return A.mask & ~B.mask & pos == 0
    raise ValueError(f"unknown relation {rel!r}")


class MeasurableMap:
    """Point map ``domain -> codomain``.

    ``image_of`` maps point ids (or a sequence aligned with ``domain.points``)
    to codomain point ids.  Validity is checked lazily by :meth:`check`.
    """

    def __init__(self, domain: Space, codomain: Space, image_of, name: str = None):
        self.domain = domain
        self.codomain = codomain
        if isinstance(image_of, Mapping):
            targets = [image_of[p] for p in domain.points]
        else:
            targets = list(image_of)
        if len(targets) != len(domain.points):
            raise InvalidMap("the map must assign an image to every domain point")
        idx = codomain.point_index
        try:
            self.targets = tuple(t if isinstance(t, int) else idx[str(t)] for t in targets)
        except KeyError as exc:
            raise InvalidMap(f"image {exc.args[0]!r} is not a point of {codomain.name!r}") from None
        self.name = name or f"{domain.name}->{codomain.name}"
        self._checked = False

    def __repr__(self):
        return f"MeasurableMap({self.name})"

    @property
    def is_endomap(self) -> bool:
        return self.domain is self.codomain

    def image_point(self, point: str) -> str:
        return self.codomain.points[self.targets[self.domain.point_index[point]]]

    def check(self) -> "MeasurableMap":
        if not self._checked:
            try:
                validate_map(self)
            except MapError as exc:
                raise InvalidMap(str(exc), atom=exc.atom) from exc
            self._checked = True
        return self

    @cached_property
    def atom_map(self) -> tuple:
        """Codomain atom receiving each domain atom (well defined once measurable)."""
        dom, cod = self.domain, self.codomain
        out = []
        for block in dom.atoms:
            p = dom.point_index[block[0]]
            out.append(cod.atom_of_point[self.targets[p]])
        return tuple(out)

    @cached_property
    def atom_preimages(self) -> tuple:
        """Domain mask ``T^{-1} a'`` for each codomain atom ``a'``."""
        pre = [0] * self.codomain.n_atoms
        for a, c in enumerate(self.atom_map):
            pre[c] |= 1 << a
        return tuple(pre)

    @cached_property
    def atom_images(self) -> tuple:
        """Essential image bit of each domain atom (0 for null atoms)."""
        pos = self.domain.positive_mask
        return tuple((1 << c) if pos >> a & 1 else 0 for a, c in enumerate(self.atom_map))

    def preimage_mask(self, mask: int) -> int:
        pre = self.atom_preimages
        out = 0
        c = 0
        while mask:
            if mask & 1:
                out |= pre[c]
            mask >>= 1
            c += 1
        return out

    def image_mask(self, mask: int) -> int:
        img = self.atom_images
        out = 0
        a = 0
        while mask:
            if mask & 1:
                out |= img[a]
            mask >>= 1
            a += 1
        return out

    def compose(self, first: "MeasurableMap") -> "MeasurableMap":
        """``self ∘ first``."""
        if first.codomain is not self.domain:
            raise SpaceMismatch("cannot compose: codomain and domain differ")
        return MeasurableMap(first.domain, self.codomain,
                             [self.targets[t] for t in first.targets],
                             name=f"{self.name}∘{first.name}")


def validate_map(T: MeasurableMap) -> None:
    """Raise NotMeasurable / NotNullPreserving naming the offending codomain atom."""
    dom, cod = T.domain, T.codomain
    validate(dom)
    if cod is not dom:
        validate(cod)
    cod_atom = cod.atom_of_point
    owner = {}
    for a, block in enumerate(dom.atoms):
        hit = {cod_atom[T.targets[dom.point_index[p]]] for p in block}
        if len(hit) > 1:
            c = min(hit)
            raise NotMeasurable(
                f"preimage of atom {cod.atom_names[c]!r} splits domain atom {dom.atom_names[a]!r}",
                atom=cod.atom_names[c])
        owner[a] = hit.pop()
    pushed = [Fraction(0)] * cod.n_atoms
    for p, t in enumerate(T.targets):
        pushed[cod_atom[t]] += dom.weights[p]
    for c, w in enumerate(cod.atom_weights):
        if w == 0 and pushed[c] > 0:
            raise NotNullPreserving(
                f"atom {cod.atom_names[c]!r} is null but its preimage has weight {pushed[c]}",
                atom=cod.atom_names[c])


def preimage(T: MeasurableMap, B: MSet) -> MSet:
    """Exact set-theoretic preimage, as an atom-union of the domain."""
    if B.space is not T.codomain:
        raise SpaceMismatch("set does not live on the codomain of the map")
    T.check()
    return MSet(T.domain, T.preimage_mask(B.mask))


def pushforward(T: MeasurableMap, A: MSet = None) -> tuple:
    """Per-codomain-atom weights of ``λ|_A ∘ T^{-1}``."""
    dom, cod = T.domain, T.codomain
    mask = dom.full_mask if A is None else A.mask
    out = [Fraction(0)] * cod.n_atoms
    for p, t in enumerate(T.targets):
        if mask >> dom.atom_of_point[p] & 1:
            out[cod.atom_of_point[t]] += dom.weights[p]
    return tuple(out)


def identity_map(space: Space) -> MeasurableMap:
    return MeasurableMap(space, space, range(len(space.points)), name=f"id_{space.name}")
