"""Dense order-d tensors with equal axis lengths, masks and block contractions.

Storage is row-major with the last index fastest, matching the on-disk JSON
format, and capped at 4e6 entries.  Tensors are immutable after construction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .partitions import SetPartition

MAX_ENTRIES = 4_000_000
MAX_ORDER = 6


class Tensor:
    """Order-d array with every axis of length m, identified with a d-linear form."""

    __slots__ = ("_a",)

    def __init__(self, values):
        a = np.array(values, dtype=float, order="C")
        if a.ndim < 1 or a.ndim > MAX_ORDER:
            raise ValueError(f"tensor order must be in [1, {MAX_ORDER}], got {a.ndim}")
        m = a.shape[0]
        if any(s != m for s in a.shape):
            raise ValueError(f"all axes must have equal length, got shape {a.shape}")
        if a.size > MAX_ENTRIES:
            raise ValueError(f"tensor has {a.size} entries, cap is {MAX_ENTRIES}")
        if not np.all(np.isfinite(a)):
            raise ValueError("tensor entries must be finite")
        a.flags.writeable = False
        self._a = a

    @property
    def order(self) -> int:
        return self._a.ndim

    @property
    def dim(self) -> int:
        return self._a.shape[0]

    @property
    def values(self) -> np.ndarray:
        return self._a

    @classmethod
    def from_flat(cls, order: int, dim: int, flat) -> "Tensor":
        flat = np.asarray(flat, dtype=float)
        if flat.size != dim**order:
            raise ValueError(f"expected {dim**order} values, got {flat.size}")
        return cls(flat.reshape((dim,) * order))

    @classmethod
    def zeros(cls, order: int, dim: int) -> "Tensor":
        return cls(np.zeros((dim,) * order))

    def __repr__(self) -> str:
        return f"Tensor(order={self.order}, dim={self.dim})"


@dataclass(frozen=True)
class IndexMask:
    """Index predicate: generalized diagonal, exact level set, or off-diagonal."""

    kind: str
    subset: tuple[int, ...] = ()
    partition: SetPartition | None = None

    @classmethod
    def generalized_diagonal(cls, subset) -> "IndexMask":
        subset = tuple(sorted(int(i) for i in subset))
        if len(subset) < 2:
            raise ValueError("generalized diagonal needs at least two coordinates")
        return cls("generalized-diagonal", subset=subset)

    @classmethod
    def level_set(cls, partition: SetPartition) -> "IndexMask":
        return cls("level-set", partition=partition)

    @classmethod
    def off_diagonal(cls) -> "IndexMask":
        return cls("off-diagonal")

    def boolean(self, order: int, dim: int) -> np.ndarray:
        """Boolean array over [dim]^order where the predicate holds."""
        idx = np.indices((dim,) * order)
        if self.kind == "generalized-diagonal":
            if any(not 1 <= k <= order for k in self.subset):
                raise ValueError(f"diagonal coordinates {self.subset} outside [1, {order}]")
            k0 = self.subset[0] - 1
            keep = np.ones((dim,) * order, dtype=bool)
            for k in self.subset[1:]:
                keep &= idx[k0] == idx[k - 1]
            return keep
        if self.kind == "level-set":
            part = self.partition
            if part is None or part.d != order:
                raise ValueError("level-set mask needs a partition of the tensor order")
            keep = np.ones((dim,) * order, dtype=bool)
            for j in range(order - 1):
                for k in range(j + 1, order):
                    same_block = any(j + 1 in b and k + 1 in b for b in part.blocks)
                    if same_block:
                        keep &= idx[j] == idx[k]
                    else:
                        keep &= idx[j] != idx[k]
            return keep
        if self.kind == "off-diagonal":
            keep = np.ones((dim,) * order, dtype=bool)
            for j in range(order - 1):
                for k in range(j + 1, order):
                    keep &= idx[j] != idx[k]
            return keep
        raise ValueError(f"unknown mask kind {self.kind!r}")


def hadamard(a: Tensor, b: Tensor) -> Tensor:
    if a.order != b.order or a.dim != b.dim:
        raise ValueError(f"shape mismatch: {a!r} vs {b!r}")
    return Tensor(a.values * b.values)


def hadamard_rank_one(a: Tensor, *vectors) -> Tensor:
    """Entrywise product of `a` with the rank-one tensor v_1 x ... x v_d."""
    if len(vectors) != a.order:
        raise ValueError(f"expected {a.order} vectors, got {len(vectors)}")
    out = np.array(a.values)
    d, m = a.order, a.dim
    for k, v in enumerate(vectors):
        v = np.asarray(v, dtype=float)
        if v.shape != (m,):
            raise ValueError(f"vector {k + 1} has length {v.size}, expected {m}")
        out *= v.reshape((1,) * k + (m,) + (1,) * (d - k - 1))
    return Tensor(out)


def apply_mask(a: Tensor, mask: IndexMask) -> Tensor:
    keep = mask.boolean(a.order, a.dim)
    return Tensor(np.where(keep, a.values, 0.0))


_LETTERS = "abcdef"


def contract(a: Tensor, part: SetPartition, vectors) -> float:
    """Value of the multilinear form: sum_i a_i * prod_l x^(l)[i restricted to block l].

    Block vectors are flat arrays of length m^(#block), row-major over the
    block's coordinates in ascending order.
    """
    d, m = a.order, a.dim
    if part.d != d:
        raise ValueError(f"partition of [{part.d}] does not match tensor order {d}")
    vectors = list(vectors)
    if len(vectors) != part.n_blocks:
        raise ValueError(f"expected {part.n_blocks} block vectors, got {len(vectors)}")
    operands = [a.values]
    subs = [_LETTERS[:d]]
    for block, v in zip(part.blocks, vectors):
        v = np.asarray(v, dtype=float)
        if v.size != m ** len(block):
            raise ValueError(f"block {block} vector has {v.size} entries, expected {m ** len(block)}")
        operands.append(v.reshape((m,) * len(block)))
        subs.append("".join(_LETTERS[i - 1] for i in block))
    expr = ",".join(subs) + "->"
    return float(np.einsum(expr, *operands, optimize=True))


def symmetrize(a: Tensor) -> Tensor:
    """Average of `a` over all permutations of its axes."""
    import itertools

    d = a.order
    acc = np.zeros_like(a.values)
    count = 0
    for perm in itertools.permutations(range(d)):
        acc += a.values.transpose(perm)
        count += 1
    return Tensor(acc / count)


def save_tensor(a: Tensor, path: str) -> None:
    doc = {"order": a.order, "dim": a.dim, "values": a.values.ravel().tolist()}
    with open(path, "w") as fh:
        json.dump(doc, fh)


def _reject_nonfinite(token: str):
    raise ValueError(f"non-finite value {token!r} in tensor file")


def load_tensor(path: str) -> Tensor:
    with open(path) as fh:
        doc = json.load(fh, parse_constant=_reject_nonfinite)
    try:
        order, dim, values = int(doc["order"]), int(doc["dim"]), doc["values"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"tensor file {path} missing order/dim/values") from exc
    return Tensor.from_flat(order, dim, values)
