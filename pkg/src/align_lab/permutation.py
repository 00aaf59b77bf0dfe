"""Permutations of the user vertex set ``[n]`` (0-indexed)."""

from __future__ import annotations

from functools import cached_property, lru_cache
from itertools import permutations as _iter_permutations
from typing import Iterable, Sequence

import numpy as np


class Permutation:
    """A bijection on ``{0, ..., n-1}``; ``perm[i]`` is the image of ``i``.

    Instances are immutable and hashable.  Cycle structure is computed on
    first access and cached.
    """

    def __init__(self, mapping: Iterable[int]):
        m = tuple(int(v) for v in mapping)
        if sorted(m) != list(range(len(m))):
            raise ValueError(f"{m} is not a permutation of range({len(m)})")
        self._map = m

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(range(n))

    @classmethod
    def from_cycles(
        cls, n: int, cycles: Iterable[Sequence[int]], one_based: bool = False
    ) -> "Permutation":
        """Build from cycle notation, e.g. ``from_cycles(3, [(1,), (2, 3)], one_based=True)``."""
        mapping = list(range(n))
        seen: set[int] = set()
        off = 1 if one_based else 0
        for cyc in cycles:
            cyc = [int(c) - off for c in cyc]
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                if a in seen:
                    raise ValueError(f"vertex {a + off} appears in two cycles")
                seen.add(a)
                mapping[a] = b
        return cls(mapping)

    @classmethod
    def random(cls, n: int, seed: int) -> "Permutation":
        """Uniform draw from the symmetric group, deterministic in ``seed``."""
        return cls(np.random.default_rng(seed).permutation(n))

    # -- sequence protocol ---------------------------------------------------
    def __len__(self) -> int:
        return len(self._map)

    def __getitem__(self, i: int) -> int:
        return self._map[i]

    def __call__(self, i: int) -> int:
        return self._map[i]

    def __iter__(self):
        return iter(self._map)

    def __eq__(self, other) -> bool:
        if isinstance(other, Permutation):
            return self._map == other._map
        return NotImplemented

    def __lt__(self, other: "Permutation") -> bool:
        return self._map < other._map

    def __hash__(self) -> int:
        return hash(self._map)

    def __repr__(self) -> str:
        return f"Permutation({list(self._map)})"

    # -- algebra -------------------------------------------------------------
    @property
    def mapping(self) -> tuple[int, ...]:
        return self._map

    def as_array(self) -> np.ndarray:
        return np.asarray(self._map, dtype=np.intp)

    def inverse(self) -> "Permutation":
        inv = [0] * len(self._map)
        for i, v in enumerate(self._map):
            inv[v] = i
        return Permutation(inv)

    def compose(self, other: "Permutation") -> "Permutation":
        """Return ``self ∘ other`` (apply ``other`` first)."""
        if len(other) != len(self):
            raise ValueError("permutations of different length")
        return Permutation(self._map[j] for j in other._map)

    @cached_property
    def cycles(self) -> tuple[tuple[int, ...], ...]:
        """Disjoint cycles, each starting at its smallest element, fixed points included."""
        seen = [False] * len(self._map)
        out = []
        for start in range(len(self._map)):
            if seen[start]:
                continue
            cyc = []
            v = start
            while not seen[v]:
                seen[v] = True
                cyc.append(v)
                v = self._map[v]
            out.append(tuple(cyc))
        return tuple(out)

    @cached_property
    def fixed_points(self) -> int:
        return sum(1 for i, v in enumerate(self._map) if i == v)

    @property
    def n_moved(self) -> int:
        """Number of vertices not fixed (the permutation lies in S_{n, n_moved})."""
        return len(self._map) - self.fixed_points

    def is_identity(self) -> bool:
        return self.fixed_points == len(self._map)

    def cycle_notation(self, one_based: bool = True) -> str:
        off = 1 if one_based else 0
        return "".join("(" + ",".join(str(v + off) for v in c) + ")" for c in self.cycles)


@lru_cache(maxsize=16)
def all_permutations(n: int) -> np.ndarray:
    """All of S_n as an ``(n!, n)`` array in lexicographic order (read-only)."""
    arr = np.array(list(_iter_permutations(range(n))), dtype=np.intp).reshape(-1, n)
    arr.setflags(write=False)
    return arr
