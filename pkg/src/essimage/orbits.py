"""Eventually periodic orbits of deterministic maps on finite state sets.

Every sequence ``x_{k+1} = step(x_k)`` over a finite state set repeats a value
eventually; from then on it is periodic.  Statements of the form "for all
``k >= 0``" or "lim sup over ``k``" are therefore decided exactly by looking at
the preperiod plus one full period.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Generic, Hashable, Iterator, Tuple, TypeVar

S = TypeVar("S", bound=Hashable)


@dataclass(frozen=True)
class Orbit(Generic[S]):
    pre: Tuple[S, ...]
    period: Tuple[S, ...]

    def __len__(self):
        return len(self.pre) + len(self.period)

    def __getitem__(self, k: int) -> S:
        if k < len(self.pre):
            return self.pre[k]
        return self.period[(k - len(self.pre)) % len(self.period)]

    def __iter__(self) -> Iterator[S]:
        """One pass over preperiod and period: every value of the sequence."""
        yield from self.pre
        yield from self.period

    def values(self):
        return list(self)

    def cycle(self):
        return self.period

    def map(self, func) -> "Orbit":
        return Orbit(tuple(func(x) for x in self.pre), tuple(func(x) for x in self.period))


def orbit(step: Callable[[S], S], start: S, limit: int = 1_000_000) -> Orbit[S]:
    """Iterate ``step`` from ``start`` until a value repeats."""
    seen = {}
    seq = []
    x = start
    while x not in seen:
        if len(seq) >= limit:
            raise RuntimeError("orbit did not close within the iteration limit")
        seen[x] = len(seq)
        seq.append(x)
        x = step(x)
    k = seen[x]
    return Orbit(tuple(seq[:k]), tuple(seq[k:]))


def function_power_cycle(f: Tuple[int, ...]) -> Tuple[int, int]:
    """Preperiod and period of ``k -> f^k`` for ``k >= 1``.

    Returns ``(p, q)`` with ``p >= 1`` minimal such that ``f^(k+q) == f^k`` for
    all ``k >= p``.
    """
    f = tuple(f)
    powers = orbit(lambda g: tuple(f[i] for i in g), f)
    return len(powers.pre) + 1, len(powers.period)

