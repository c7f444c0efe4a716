"""Set partitions of {1,..,d} and inner/outer splits used by the mixed norms.

Partitions are canonical: blocks sorted by minimum element, indices ascending
inside each block.  Enumeration follows restricted-growth-string order, so the
k-th partition is the same on every run and every machine.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

# Bell numbers B_0 .. B_6
BELL = (1, 1, 2, 5, 15, 52, 203)

MAX_PARTITION_ORDER = 6
MAX_SPLIT_ORDER = 3


def _canonical(blocks) -> tuple[tuple[int, ...], ...]:
    cleaned = [tuple(sorted(int(i) for i in b)) for b in blocks]
    if any(len(b) == 0 for b in cleaned):
        raise ValueError("partition blocks must be nonempty")
    cleaned.sort(key=lambda b: b[0])
    return tuple(cleaned)


def _check_cover(blocks, universe, what: str) -> None:
    seen: set[int] = set()
    for b in blocks:
        if len(b) == 0:
            raise ValueError(f"{what}: empty block")
        for i in b:
            if i in seen:
                raise ValueError(f"{what}: index {i} appears in two blocks")
            seen.add(i)
    if seen != set(universe):
        raise ValueError(f"{what}: blocks must cover exactly {sorted(universe)}, got {sorted(seen)}")


@dataclass(frozen=True)
class SetPartition:
    """A partition of {1,..,d} into nonempty pairwise disjoint blocks."""

    d: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("partition order d must be >= 1")
        object.__setattr__(self, "blocks", _canonical(self.blocks))
        _check_cover(self.blocks, range(1, self.d + 1), f"partition of [{self.d}]")

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @property
    def block_sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    @classmethod
    def parse(cls, text: str, d: int | None = None) -> "SetPartition":
        """Parse "1,2|3" into a partition (1-based indices, blocks split on '|')."""
        blocks = []
        for part in text.split("|"):
            part = part.strip()
            if not part:
                raise ValueError(f"empty block in partition string {text!r}")
            blocks.append(tuple(int(tok) for tok in part.split(",")))
        order = d if d is not None else max(max(b) for b in blocks)
        return cls(order, tuple(blocks))

    @classmethod
    def from_blocks(cls, blocks, d: int | None = None) -> "SetPartition":
        """Build from an array-of-arrays form such as [[1,2],[3]] (JSON configs)."""
        blocks = tuple(tuple(b) for b in blocks)
        order = d if d is not None else max(max(b) for b in blocks)
        return cls(order, blocks)

    @classmethod
    def singletons(cls, d: int) -> "SetPartition":
        return cls(d, tuple((i,) for i in range(1, d + 1)))

    @classmethod
    def full(cls, d: int) -> "SetPartition":
        return cls(d, (tuple(range(1, d + 1)),))

    def __str__(self) -> str:
        return "|".join(",".join(str(i) for i in b) for b in self.blocks)


@dataclass(frozen=True)
class SplitPartition:
    """An (inner, outer) pair of partitions of disjoint subsets covering {1,..,d}.

    Either side may be empty (zero blocks).  Inner blocks carry Euclidean
    constraints, outer blocks the mixed l_alpha(l_2) constraints.
    """

    d: int
    inner: tuple[tuple[int, ...], ...]
    outer: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("split order d must be >= 1")
        object.__setattr__(self, "inner", _canonical(self.inner) if self.inner else ())
        object.__setattr__(self, "outer", _canonical(self.outer) if self.outer else ())
        _check_cover(self.inner + self.outer, range(1, self.d + 1), f"split of [{self.d}]")

    @property
    def inner_set(self) -> tuple[int, ...]:
        return tuple(sorted(i for b in self.inner for i in b))

    @classmethod
    def parse(cls, text: str, d: int | None = None) -> "SplitPartition":
        """Parse "1|2||3": inner and outer separated by '||', blocks by '|'."""
        if "||" not in text:
            raise ValueError(f"split string {text!r} must contain '||'")
        left, right = text.split("||", 1)

        def side(s: str):
            s = s.strip()
            if not s:
                return ()
            return tuple(tuple(int(tok) for tok in part.split(",")) for part in s.split("|"))

        inner, outer = side(left), side(right)
        order = d if d is not None else max(max(b) for b in inner + outer)
        return cls(order, inner, outer)

    def __str__(self) -> str:
        fmt = lambda side: "|".join(",".join(str(i) for i in b) for b in side)
        return f"{fmt(self.inner)}||{fmt(self.outer)}"


def _partitions_of(elements: tuple[int, ...]):
    """All partitions of the given sorted elements, in restricted-growth order."""
    n = len(elements)
    if n == 0:
        yield ()
        return
    # a[i] = block label of element i; labels grow by at most one (RGS)
    a = [0] * n

    def rec(i: int, maxlab: int):
        if i == n:
            nblocks = maxlab + 1
            blocks = [[] for _ in range(nblocks)]
            for j, lab in enumerate(a):
                blocks[lab].append(elements[j])
            yield tuple(tuple(b) for b in blocks)
            return
        for lab in range(maxlab + 2):
            a[i] = lab
            yield from rec(i + 1, max(maxlab, lab))

    a[0] = 0
    yield from rec(1, 0)


def enumerate_partitions(d: int) -> list[SetPartition]:
    """All partitions of {1,..,d} in restricted-growth-string order (Bell(d) many)."""
    if not 1 <= d <= MAX_PARTITION_ORDER:
        raise ValueError(f"partition order d={d} outside [1, {MAX_PARTITION_ORDER}]"
                         " (tensor sizes beyond order 6 are not desk scale)")
    return [SetPartition(d, blocks) for blocks in _partitions_of(tuple(range(1, d + 1)))]


def enumerate_splits(d: int) -> list[SplitPartition]:
    """All (I, inner partition of I, outer partition of complement) triples.

    Order: subsets I by ascending bitmask, partitions of each side in
    restricted-growth order.  Count is sum over I of Bell(#I)*Bell(d-#I).
    """
    if not 1 <= d <= MAX_SPLIT_ORDER:
        raise ValueError(f"split order d={d} outside [1, {MAX_SPLIT_ORDER}]"
                         " (mixed norms are supported for order <= 3 only)")
    out = []
    universe = tuple(range(1, d + 1))
    for mask in range(1 << d):
        inner_elems = tuple(i for i in universe if mask & (1 << (i - 1)))
        outer_elems = tuple(i for i in universe if not mask & (1 << (i - 1)))
        for inner in _partitions_of(inner_elems):
            for outer in _partitions_of(outer_elems):
                out.append(SplitPartition(d, inner, outer))
    return out


def refines(fine: SetPartition, coarse: SetPartition) -> bool:
    """True when every block of `fine` is contained in some block of `coarse`."""
    if fine.d != coarse.d:
        raise ValueError("partitions of different orders")
    coarse_sets = [set(b) for b in coarse.blocks]
    return all(any(set(b) <= c for c in coarse_sets) for b in fine.blocks)


def merged(split: SplitPartition) -> SetPartition:
    """The plain partition obtained by forgetting the inner/outer distinction."""
    return SetPartition(split.d, split.inner + split.outer)
