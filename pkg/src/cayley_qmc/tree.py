"""Coordinates and enumeration order on the semi-infinite Cayley tree.

A vertex is the path of branch indices leading to it from the root, so
``(1, 2)`` is the second child of the first child of the root. The root is the
empty path. Within a level, vertices are always listed lexicographically; the
reversed order is just the reversed list.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .errors import ParamError


@dataclass(frozen=True, order=True)
class VertexCoord:
    path: tuple[int, ...] = ()

    def __post_init__(self):
        path = tuple(int(i) for i in self.path)
        if any(i < 1 for i in path):
            raise ParamError(f"branch indices start at 1, got {path}")
        object.__setattr__(self, "path", path)

    @property
    def level(self) -> int:
        return len(self.path)

    @property
    def is_root(self) -> bool:
        return not self.path

    def child(self, i: int) -> VertexCoord:
        return VertexCoord(self.path + (i,))

    @property
    def parent(self) -> VertexCoord | None:
        if self.is_root:
            return None
        return VertexCoord(self.path[:-1])

    def __str__(self):
        return "0" if self.is_root else ".".join(map(str, self.path))

    @classmethod
    def parse(cls, text: str) -> VertexCoord:
        """Inverse of ``str``: ``"0"`` is the root, otherwise dot-separated indices."""
        text = text.strip()
        if text == "0":
            return cls()
        try:
            return cls(tuple(int(part) for part in text.split(".")))
        except ValueError:
            raise ParamError(f"malformed vertex {text!r}") from None


ROOT = VertexCoord()


@dataclass(frozen=True)
class TreeParams:
    k: int

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 2:
            raise ParamError(f"branching order k must be an integer >= 2, got {self.k}")
        object.__setattr__(self, "k", int(self.k))

    def contains(self, v: VertexCoord) -> bool:
        return all(i <= self.k for i in v.path)


def _tree(params: TreeParams | int) -> TreeParams:
    return params if isinstance(params, TreeParams) else TreeParams(params)


def level_vertices(params: TreeParams | int, n: int) -> list[VertexCoord]:
    """The k**n vertices of level ``n`` in lexicographic order."""
    k = _tree(params).k
    if n < 0:
        raise ParamError(f"level must be >= 0, got {n}")
    return [VertexCoord(p) for p in product(range(1, k + 1), repeat=n)]


def successors(v: VertexCoord, params: TreeParams | int) -> list[VertexCoord]:
    k = _tree(params).k
    return [v.child(i) for i in range(1, k + 1)]


def volume_size(params: TreeParams | int, n: int) -> tuple[int, int]:
    """Return ``(|W_n|, |Lambda_n|)``: sites on level ``n`` and in the ball of radius ``n``."""
    k = _tree(params).k
    if n < 0:
        raise ParamError(f"level must be >= 0, got {n}")
    return k**n, (k ** (n + 1) - 1) // (k - 1)


def volume_vertices(params: TreeParams | int, n: int) -> list[VertexCoord]:
    """All sites of the ball of radius ``n``, level by level."""
    out: list[VertexCoord] = []
    for m in range(n + 1):
        out.extend(level_vertices(params, m))
    return out


def volume_edges(params: TreeParams | int, n: int) -> list[tuple[VertexCoord, VertexCoord]]:
    """Parent-child pairs inside the ball of radius ``n``, in forward order."""
    return [(v.parent, v) for v in volume_vertices(params, n) if not v.is_root]
