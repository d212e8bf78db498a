"""Brute-force reference answers by enumerating every measurable set.

Everything here is transcribed from the definitions and deliberately shares
no code with ``images``, ``dynamics`` or ``tail``; only the data model of
``measure_core`` is reused.  Weights are scaled to integers by their least
common denominator and the operators are tabulated over all ``2**n`` masks.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import lcm
from typing import Any, Optional

import numpy as np

from .measure_core import EssImageError, MeasurableMap, MSet, SpaceMismatch

MAX_ORACLE_ATOMS = 20
MODES = ("minimal_support", "invariant_sets", "forward_invariant_sets", "wandering_search",
         "tail_sets", "separated_pairs", "nonsingular_max")


class TooLarge(EssImageError):
    pass


class OracleMismatch(AssertionError):
    pass


@dataclass(frozen=True)
class OracleRequest:
    system: Any  # MeasurableMap, or anything with a ``.map`` attribute
    mode: str
    payload: Optional[MSet] = None


# -- tables -----------------------------------------------------------------

def _int_weights(space):
    index = {}
    for a, block in enumerate(space.atoms):
        for p in block:
            index[p] = a
    fracs = [0] * len(space.atoms)
    for p, wt in zip(space.points, space.weights):
        fracs[index[p]] += wt
    den = lcm(*(f.denominator for f in fracs)) if fracs else 1
    w = [int(f * den) for f in fracs]
    return w, index


def _masks(n):
    return np.arange(1 << n, dtype=np.int64)


def _measure_table(weights, n):
    dtype = np.int64 if sum(weights) < 2**62 else object
    masks = _masks(n)
    out = np.zeros(1 << n, dtype=dtype)
    for a, w in enumerate(weights):
        if w:
            out = out + ((masks >> a) & 1).astype(dtype) * w
    return out


def _check_size(n):
    if n > MAX_ORACLE_ATOMS:
        raise TooLarge(f"2^{n} sets exceed the oracle cap of 2^{MAX_ORACLE_ATOMS}")


class _Tables:
    """Point-level transcription of one endomap."""

    def __init__(self, T: MeasurableMap):
        if T.domain is not T.codomain:
            raise SpaceMismatch("this oracle mode needs an endomap")
        sp = T.domain
        self.space = sp
        self.n = n = len(sp.atoms)
        _check_size(n)
        self.w, atom_of = _int_weights(sp)
        self.pos = sum(1 << a for a, x in enumerate(self.w) if x > 0)
        self.masks = _masks(n)
        self.lam = _measure_table(self.w, n)
        # point -> image atom, read off the raw point function
        self.point_pairs = [(atom_of[p], atom_of[sp.points[t]])
                            for p, t in zip(sp.points, T.targets)]
        self.pre = self._pullback_table(self.point_pairs)

    def _pullback_table(self, pairs):
        out = np.zeros(1 << self.n, dtype=np.int64)
        for a, c in pairs:
            out |= ((self.masks >> c) & 1) << a
        return out

    def null(self, table_of_masks):
        return self.lam[table_of_masks] == 0

    def atom_power(self, k):
        """Image atom of every domain atom under the k-th iterate (points read individually)."""
        step = {}
        for a, c in self.point_pairs:
            step.setdefault(a, c)
        out = list(range(self.n))
        for _ in range(k):
            out = [step[x] for x in out]
        return out

    def power_horizon(self):
        """``N`` such that ``{T^k : 1 <= k <= N}`` lists every distinct iterate."""
        step = {}
        for a, c in self.point_pairs:
            step.setdefault(a, c)
        seen = set()
        cur = tuple(range(self.n))
        k = 0
        while True:
            cur = tuple(step[x] for x in cur)
            k += 1
            if cur in seen:
                return k - 1
            seen.add(cur)


def _as_map(system) -> MeasurableMap:
    return system if isinstance(system, MeasurableMap) else system.map


# -- modes ------------------------------------------------------------------

def minimal_support(T: MeasurableMap, A: MSet) -> MSet:
    """λ'-minimal measurable support of ``λ|_A ∘ T⁻¹``, canonical representative."""
    if A.space is not T.domain:
        raise SpaceMismatch("payload must live on the domain")
    dom, cod = T.domain, T.codomain
    m = len(cod.atoms)
    _check_size(m)
    _, dom_atom = _int_weights(dom)
    wc, cod_atom = _int_weights(cod)
    # pushforward mass of each codomain atom, one point at a time
    den = lcm(*(w.denominator for w in dom.weights)) if dom.weights else 1
    push = [0] * m
    for p, wt, t in zip(dom.points, dom.weights, T.targets):
        if A.mask >> dom_atom[p] & 1:
            push[cod_atom[cod.points[t]]] += int(wt * den)
    nu = _measure_table(push, m)
    lam = _measure_table(wc, m)
    masks = _masks(m)
    full = (1 << m) - 1
    supports = np.flatnonzero(nu[full & ~masks] == 0)
    best = min(lam[s] for s in supports)
    minimal = [int(s) for s in supports if lam[s] == best]
    pos = sum(1 << c for c, x in enumerate(wc) if x > 0)
    canon = {s & pos for s in minimal}
    if len(canon) != 1:
        raise OracleMismatch("minimal supports are not unique mod λ'")
    return MSet(cod, canon.pop())


def _sets(space, idx):
    return tuple(MSet(space, int(i)) for i in idx)


def invariant_sets(system) -> tuple:
    t = _Tables(_as_map(system))
    diff = t.masks ^ t.pre
    return _sets(t.space, np.flatnonzero(t.null(diff)))


def forward_invariant_sets(system) -> tuple:
    t = _Tables(_as_map(system))
    diff = t.masks & ~t.pre
    return _sets(t.space, np.flatnonzero(t.null(diff)))


def wandering_search(system) -> Optional[MSet]:
    """Lowest-mask positive set ``A`` with ``λ(A ∩ T⁻ⁿA) = 0`` for every n ≥ 1."""
    t = _Tables(_as_map(system))
    horizon = t.power_horizon()
    ok = t.lam > 0
    cur = t.masks.copy()
    for _ in range(horizon):
        cur = t.pre[cur]
        ok &= t.null(t.masks & cur)
    idx = np.flatnonzero(ok)
    return MSet(t.space, int(idx[0])) if idx.size else None


def tail_sets(system) -> tuple:
    """All ``A`` equal mod λ to a member of ``⋂ₙ T⁻ⁿ𝒜``."""
    t = _Tables(_as_map(system))
    member = np.ones(1 << t.n, dtype=bool)
    while True:
        nxt = np.zeros_like(member)
        nxt[t.pre[member]] = True
        if np.array_equal(nxt, member):
            break
        member = nxt
    reps = np.zeros(1 << t.n, dtype=bool)
    reps[t.masks[member] & t.pos] = True
    return _sets(t.space, np.flatnonzero(reps[t.masks & t.pos]))


@dataclass(frozen=True)
class SeparatedPairs:
    """For each positive set ``A``: every positive ``B`` inside ``partners[A]`` remains separated."""

    space: Any
    partners: np.ndarray  # partners[A] = mask of atoms B may use; -1 where A is null
    horizon: int

    def separated(self, a: int, b: int) -> bool:
        return self.partners[a] >= 0 and b & ~int(self.partners[a]) == 0

    def pairs(self):
        pos = self.space.positive_mask
        for a in range(len(self.partners)):
            if self.partners[a] < 0:
                continue
            for b in range(len(self.partners)):
                if b & pos and self.separated(a, b):
                    yield MSet(self.space, a), MSet(self.space, b)


def _witness_table(t: _Tables, k: int):
    """Smallest ``A_k`` with ``A ⊆̇ T⁻ᵏA_k``, for every mask ``A``."""
    fk = t.atom_power(k)
    out = np.zeros(1 << t.n, dtype=np.int64)
    for a in range(t.n):
        if t.w[a] > 0:
            out |= ((t.masks >> a) & 1) << fk[a]
    return out


def _pullback_power(t: _Tables, k: int):
    fk = t.atom_power(k)
    return t._pullback_table([(a, fk[a]) for a in range(t.n)])


def separated_pairs(system) -> SeparatedPairs:
    """B remains separated from A iff for each n some ``A_n`` has
    ``A ⊆̇ T⁻ⁿA_n`` and ``B ⊆̇ T⁻ⁿA_nᶜ``.  The smallest admissible ``A_n`` is
    tried; n runs over 0 and every distinct iterate.
    """
    t = _Tables(_as_map(system))
    horizon = t.power_horizon()
    blocked = np.zeros(1 << t.n, dtype=np.int64)
    for k in range(horizon + 1):
        wit = _witness_table(t, k)
        blocked |= _pullback_power(t, k)[wit]
    partners = (t.pos & ~blocked) | (((1 << t.n) - 1) & ~t.pos)
    partners = np.where(t.lam > 0, partners, -1)
    return SeparatedPairs(t.space, partners, horizon)


def separation_witnesses(system, A: MSet, B: MSet):
    """Explicit ``A_n`` for ``n = 0 .. horizon`` if ``B`` remains separated from ``A``, else None."""
    t = _Tables(_as_map(system))
    out = []
    for k in range(t.power_horizon() + 1):
        wit = int(_witness_table(t, k)[A.mask])
        pre = _pullback_power(t, k)
        if t.lam[A.mask & ~int(pre[wit])] != 0 or t.lam[B.mask & int(pre[wit])] != 0:
            return None
        out.append(MSet(t.space, wit))
    return out


def nonsingular_max(system) -> MSet:
    """Largest ``A`` with ``T̂A ≐ A``, from the defining support property.

    ``T̂A ≐ A`` holds iff ``A ⊆̇ T⁻¹A`` (the image lies in A) and
    ``λ(A ∩ T⁻¹c) > 0`` for every positive atom ``c`` of ``A``.
    """
    t = _Tables(_as_map(system))
    ok = t.null(t.masks & ~t.pre)
    for c in range(t.n):
        if t.w[c] == 0:
            continue
        has_c = ((t.masks >> c) & 1).astype(bool)
        hit = t.lam[t.masks & t.pre[np.int64(1 << c)]] > 0
        ok &= ~has_c | hit
    idx = np.flatnonzero(ok)
    union = 0
    for i in idx:
        union |= int(i)
    best = max(idx, key=lambda i: t.lam[i])
    if (int(best) ^ union) & t.pos:
        raise OracleMismatch("sets with T̂A ≐ A are not closed under union")
    return MSet(t.space, union & t.pos)


def brute_force(req: OracleRequest):
    mode = req.mode
    if mode == "minimal_support":
        T = _as_map(req.system)
        A = req.payload if req.payload is not None else T.domain.full()
        return minimal_support(T, A)
    table = {
        "invariant_sets": invariant_sets,
        "forward_invariant_sets": forward_invariant_sets,
        "wandering_search": wandering_search,
        "tail_sets": tail_sets,
        "separated_pairs": separated_pairs,
        "nonsingular_max": nonsingular_max,
    }
    if mode not in table:
        raise ValueError(f"unknown oracle mode {mode!r}; expected one of {', '.join(MODES)}")
    return table[mode](req.system)
