"""Shipped example systems.

``GRID<N>`` files are generated by :func:`grid_text`; the checked-in copies
must match it (see ``tests/test_fixtures.py``).
"""
from __future__ import annotations

from importlib import resources
from pathlib import Path

SYSTEMS = ("EX1A", "COUNT2", "ROT3", "COLLAPSE", "GRID2", "GRID3", "GRID4", "IDTRIV")
MODELS = ("MARKOV2", "CSMC_A", "CSMC_B")
NAMES = SYSTEMS + MODELS


def grid_points(N: int) -> list:
    pts = [(m, n) for n in range(1, N + 1) for m in range(1, n + 1)]
    return pts + [(1, 0), (0, 0)]


def grid_image(pt):
    m, n = pt
    if n == 0:
        return (0, 0)
    if m > 1:
        return (m - 1, n)
    return (1, 0)


def _label(pt) -> str:
    return f"({pt[0]},{pt[1]})"


def grid_text(N: int) -> str:
    """Counting measure on ``1 <= m <= n <= N`` plus ``(1,0)`` and ``(0,0)``."""
    if N < 1:
        raise ValueError("grid size must be positive")
    pts = grid_points(N)
    lines = [f"# Truncated grid map, N = {N}; counting measure.", f"@space GRID{N}"]
    lines += [f"point {_label(p)} 1" for p in pts]
    lines.append("@map")
    lines += [f"{_label(p)} -> {_label(grid_image(p))}" for p in pts]
    lines.append(f"@set TOP = {_label((N, N))}")
    lines.append("@set SINK = (0,0)")
    lines.append("@set BASE = (1,0)")
    return "\n".join(lines) + "\n"


def fixture_path(name: str) -> Path:
    stem = name.rsplit(".", 1)[0]
    suffix = ".mkv" if stem in MODELS else ".sys"
    return Path(str(resources.files(__name__).joinpath(stem + suffix)))


def fixture_text(name: str) -> str:
    stem = name.rsplit(".", 1)[0]
    if stem not in NAMES:
        raise KeyError(f"no shipped fixture named {name!r}")
    return fixture_path(stem).read_text(encoding="utf-8")


def load(name: str):
    """Parsed :class:`~essimage.fileformat.SystemFile` of a shipped fixture."""
    from ..fileformat import parse_system_file

    stem = name.rsplit(".", 1)[0]
    return parse_system_file(fixture_text(stem), name=stem)


def system(name: str):
    """Shipped endomap fixture as a :class:`~essimage.dynamics.DynSystem`."""
    from ..dynamics import DynSystem

    f = load(name)
    return DynSystem(f.map, name=name.rsplit(".", 1)[0])
