"""Subgraph counting over Erdos-Renyi graphs: counting polynomials in edge
variables, closed-form triangle derivative norms, combinatorial norm bounds
for cycles, and the tail experiment comparing simulation to the bounds.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .montecarlo import MCConfig, _run_chunks, wilson_interval
from .norms import NormOptions, NormResult, norm_J
from .partitions import SetPartition
from .poly import Polynomial
from .tensor import MAX_ENTRIES, Tensor


@dataclass(frozen=True)
class GraphSpec:
    """Small pattern graph on vertices [k] with unordered edges."""

    k: int
    edges: tuple
    kind: str = "general"

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("pattern graph needs at least two vertices")
        seen = set()
        covered = set()
        cleaned = []
        for e in self.edges:
            u, v = sorted(int(x) for x in e)
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (1 <= u <= self.k and 1 <= v <= self.k):
                raise ValueError(f"edge ({u},{v}) outside vertex range [1,{self.k}]")
            if (u, v) in seen:
                raise ValueError(f"duplicate edge ({u},{v})")
            seen.add((u, v))
            covered.update((u, v))
            cleaned.append((u, v))
        if covered != set(range(1, self.k + 1)):
            raise ValueError("pattern graph has isolated vertices")
        object.__setattr__(self, "edges", tuple(sorted(cleaned)))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @classmethod
    def cycle(cls, k: int) -> "GraphSpec":
        if k < 3:
            raise ValueError("cycles need k >= 3")
        edges = [(i, i + 1) for i in range(1, k)] + [(1, k)]
        return cls(k, tuple(edges), kind="cycle")

    @classmethod
    def clique(cls, k: int) -> "GraphSpec":
        if k < 2:
            raise ValueError("cliques need k >= 2")
        return cls(k, tuple(itertools.combinations(range(1, k + 1), 2)), kind="clique")

    @property
    def aut_size(self) -> int:
        """Automorphism count; hardcoded for cycles and cliques."""
        if self.kind == "clique":
            return math.factorial(self.k)
        if self.kind == "cycle":
            return 2 * self.k
        raise ValueError("automorphism count available for cycles and cliques only")

    @classmethod
    def from_config(cls, doc: dict) -> "GraphSpec":
        return cls(int(doc["k"]), tuple(tuple(e) for e in doc["edges"]))


class EdgeIndex:
    """Bijection between unordered pairs over [n] and 1..n(n-1)/2, lexicographic."""

    def __init__(self, n: int):
        if n < 2:
            raise ValueError("edge indexing needs n >= 2")
        self.n = n
        self.count = n * (n - 1) // 2

    def index(self, pair) -> int:
        u, v = sorted(pair)
        if not (1 <= u < v <= self.n):
            raise ValueError(f"pair ({u},{v}) outside [1,{self.n}]")
        return (u - 1) * self.n - u * (u + 1) // 2 + v

    def pair(self, idx: int) -> tuple[int, int]:
        if not 1 <= idx <= self.count:
            raise ValueError(f"edge index {idx} outside [1,{self.count}]")
        u = 1
        while (u - 1) * self.n - u * (u + 1) // 2 + self.n < idx:
            u += 1
        v = idx - ((u - 1) * self.n - u * (u + 1) // 2)
        return (u, v)


def counting_polynomial(h: GraphSpec, n: int) -> Polynomial:
    """Ordered-copy polynomial X_H over edge variables of the n-vertex clique.

    The unordered count is X_H / aut_size; evaluation at the all-ones point
    gives the falling factorial n(n-1)..(n-k+1).
    """
    if n < h.k:
        raise ValueError(f"ambient vertex count {n} below pattern size {h.k}")
    eidx = EdgeIndex(n)
    terms: dict = {}
    for image in itertools.permutations(range(1, n + 1), h.k):
        key = tuple(sorted((eidx.index((image[u - 1], image[v - 1])), 1)
                           for u, v in h.edges))
        terms[key] = terms.get(key, 0.0) + 1.0
    return Polynomial(eidx.count, terms)


# ---------------------------------------------------------------------------
# closed forms and combinatorial bounds

@dataclass(frozen=True)
class TriangleNorms:
    """Exact derivative-tensor norms for the unordered triangle count, plus the
    two upper caps for the mixed third-order partitions."""

    d1: float
    d2_operator: float
    d2_hs: float
    d3_hs: float
    d3_two_block_cap: float
    d3_singleton_cap: float


def triangle_norms_exact(n: int, p: float) -> TriangleNorms:
    if n < 3:
        raise ValueError("triangle norms need n >= 3")
    if not 0 < p <= 1:
        raise ValueError("edge probability p must be in (0, 1]")
    return TriangleNorms(
        d1=(n - 2) * p**2 * math.sqrt(n * (n - 1) / 2.0),
        d2_operator=2.0 * p * (n - 2),
        d2_hs=p * math.sqrt(n * (n - 1) * (n - 2)),
        d3_hs=math.sqrt(n * (n - 1) * (n - 2)),
        d3_two_block_cap=math.sqrt(2.0 * n),
        d3_singleton_cap=2.0**1.5,
    )


def _isolated_edge_count(edges) -> int:
    """Edges sharing a vertex with no other edge of the list."""
    count = 0
    for i, e in enumerate(edges):
        if all(set(e).isdisjoint(f) for j, f in enumerate(edges) if j != i):
            count += 1
    return count


def _singly_covered(groups) -> int:
    """Vertices appearing in exactly one of the vertex groups."""
    tally: dict = {}
    for g in groups:
        for v in set(g):
            tally[v] = tally.get(v, 0) + 1
    return sum(1 for c in tally.values() if c == 1)


def indicator_norm_bound(h: GraphSpec, e_seq, part: SetPartition, n: int) -> float:
    """Combinatorial cap on the pattern-indicator tensor norm: powers of 2 from
    isolated edges and sqrt(n) per singly covered vertex."""
    h0_s = _isolated_edge_count(list(e_seq))
    groups = []
    exponent2 = -h0_s
    for block in part.blocks:
        sub = [e_seq[j - 1] for j in block]
        exponent2 += 0.5 * _isolated_edge_count(sub)
        groups.append([v for e in sub for v in e])
    return 2.0**exponent2 * float(n) ** (0.5 * _singly_covered(groups))


def subgraph_norm_bound(h: GraphSpec, d: int, part: SetPartition, n: int, p: float) -> float:
    """Edge-enumeration upper bound on |E D^d f|_J for the ordered-copy
    polynomial of any pattern without isolated vertices (unvalidated beyond
    cycles)."""
    if not 1 <= d <= h.n_edges:
        raise ValueError(f"derivative order {d} outside [1, {h.n_edges}]")
    if part.d != d:
        raise ValueError("partition order must equal the derivative order")
    total = 0.0
    for e_seq in itertools.permutations(h.edges, d):
        v0 = {v for e in e_seq for v in e}
        groups = []
        exponent2 = 0.0
        for block in part.blocks:
            sub = [e_seq[j - 1] for j in block]
            exponent2 += 0.5 * _isolated_edge_count(sub)
            groups.append([v for e in sub for v in e])
        total += 2.0**exponent2 * float(n) ** (h.k - len(v0) + 0.5 * _singly_covered(groups))
    return p ** (h.n_edges - d) * total


def cycle_norm_bound(h: GraphSpec, d: int, part: SetPartition, n: int, p: float) -> float:
    """Norm bound for cycle counting polynomials, with the exact n^(k/2) cap in
    the top-order single-block case."""
    if h.kind != "cycle":
        raise ValueError("cycle_norm_bound supports cycle patterns only"
                         " (subgraph_norm_bound is exposed but unvalidated)")
    if d == h.k and part.n_blocks == 1:
        return float(n) ** (h.k / 2.0)
    return subgraph_norm_bound(h, d, part, n, p)


def indicator_norm_check(h: GraphSpec, e_seq, part: SetPartition, n: int,
                         opts: NormOptions | None = None) -> tuple[NormResult, float]:
    """Norm of the indicator tensor of edge tuples matching e_seq, next to its
    combinatorial cap; callers assert lhs <= cap * (1 + tol)."""
    e_seq = [tuple(sorted(e)) for e in e_seq]
    if len(set(e_seq)) != len(e_seq):
        raise ValueError("edge sequence must consist of distinct edges")
    for e in e_seq:
        if e not in h.edges:
            raise ValueError(f"edge {e} not in the pattern graph")
    d = len(e_seq)
    if part.d != d:
        raise ValueError("partition order must equal the edge sequence length")
    eidx = EdgeIndex(n)
    if eidx.count**d > MAX_ENTRIES:
        raise ValueError(f"indicator tensor would have {eidx.count**d} entries,"
                         f" cap is {MAX_ENTRIES}")
    verts = sorted({v for e in e_seq for v in e})
    vals = np.zeros((eidx.count,) * d)
    for image in itertools.permutations(range(1, n + 1), len(verts)):
        vmap = dict(zip(verts, image))
        pos = tuple(eidx.index((vmap[u], vmap[v])) - 1 for u, v in e_seq)
        vals[pos] = 1.0
    lhs = norm_J(Tensor(vals), part, opts or NormOptions())
    return lhs, indicator_norm_bound(h, e_seq, part, n)


# ---------------------------------------------------------------------------
# tail bounds from the cycle propositions

def _subgauss_coeff(p: float) -> float:
    return 1.0 / math.sqrt(math.log(2.0 / p))


def triangle_tail_bound(n: int, p: float, t: float, c: float = 1.0) -> float:
    """Three-regime triangle deviation bound with one explicit constant c."""
    if not t > 0:
        return 2.0
    L = _subgauss_coeff(p)
    args = [
        t**2 / (L**6 * n**3 + L**4 * p**2 * n**3 + L**2 * p**4 * n**4),
        t / (L**3 * math.sqrt(n) + L**2 * p * n),
        t ** (2.0 / 3.0) / L**2,
    ]
    return 2.0 * math.exp(-min(args) / c)


def cycle_tail_bound(k: int, n: int, p: float, t: float, c: float = 1.0) -> float:
    """Deviation bound for counts of k-cycles with one explicit constant c."""
    if k < 3:
        raise ValueError("cycles need k >= 3")
    if not t > 0:
        return 2.0
    L = _subgauss_coeff(p)
    args = [t**2 / (L ** (2 * k) * float(n) ** k)]
    for d in range(1, k + 1):
        for l in range(1, d + 1):
            if d == k and l == 1:
                continue
            args.append(t ** (2.0 / l) / (L ** (2.0 * d / l) * p ** (2.0 * (k - d) / l)
                                          * float(n) ** ((2.0 * k - d - l) / l)))
    return 2.0 * math.exp(-min(args) / c)


# ---------------------------------------------------------------------------
# Erdos-Renyi experiment

def sample_adjacency(n: int, p: float, rng: np.random.Generator, rows: int) -> np.ndarray:
    """rows symmetric 0/1 adjacency matrices with i.i.d. upper-triangle edges."""
    iu = np.triu_indices(n, 1)
    a = np.zeros((rows, n, n))
    bits = (rng.random((rows, iu[0].size)) < p).astype(float)
    a[:, iu[0], iu[1]] = bits
    a += np.transpose(a, (0, 2, 1))
    return a


def count_cycles_trace(a: np.ndarray, k: int) -> np.ndarray:
    """Cycle counts per stacked adjacency matrix via closed-walk corrections."""
    if a.ndim == 2:
        a = a[None]
    deg = a.sum(axis=2)
    a2 = np.matmul(a, a)
    a3 = np.matmul(a2, a)
    tr3 = np.trace(a3, axis1=1, axis2=2)
    if k == 3:
        return tr3 / 6.0
    if k == 4:
        tr4 = (a2 * a2).sum(axis=(1, 2))
        edges = deg.sum(axis=1) / 2.0
        return (tr4 - 2.0 * (deg**2).sum(axis=1) + 2.0 * edges) / 8.0
    if k == 5:
        tr5 = (a2 * a3).sum(axis=(1, 2))
        diag3 = np.diagonal(a3, axis1=1, axis2=2)
        return (tr5 - 5.0 * tr3 - 5.0 * ((deg - 2.0) * diag3).sum(axis=1)) / 10.0
    raise ValueError("trace-based counting covers cycle lengths 3..5 only")


def count_cycles_embedding(adj: np.ndarray, k: int) -> int:
    """Direct embedding enumeration oracle (small n, k <= 4)."""
    if k > 4:
        raise ValueError("embedding oracle covers k <= 4")
    n = adj.shape[0]
    cyc = GraphSpec.cycle(k)
    hits = 0
    for image in itertools.permutations(range(n), k):
        if all(adj[image[u - 1], image[v - 1]] for u, v in cyc.edges):
            hits += 1
    return hits // (2 * k)


def expected_cycle_count(k: int, n: int, p: float) -> float:
    falling = 1.0
    for j in range(k):
        falling *= n - j
    return falling * p**k / (2 * k)


@dataclass(frozen=True)
class ERResult:
    k: int
    n: int
    p: float
    N: int
    expected_mean: float
    mean: float
    mean_stderr: float
    rows: tuple


def er_tail_experiment(h: GraphSpec, n: int, p: float, cfg: MCConfig,
                       t_list=None, eps: float | None = None, c: float = 1.0,
                       workers: int = 1) -> ERResult:
    """Empirical deviation tails of the unordered cycle count against the
    proposition-style bound (constant c explicit)."""
    if h.kind != "cycle":
        raise ValueError("the tail experiment supports cycle patterns")
    if h.k > 5:
        raise ValueError("cycle length > 5: exact counting unavailable,"
                         " only expectation checks are possible")
    if n > 200:
        raise ValueError("experiment vertex count capped at 200")
    if not 0 < p < 1:
        raise ValueError("edge probability must be in (0, 1)")
    if t_list is None:
        if eps is None:
            raise ValueError("provide t_list or eps")
        t_list = [eps * expected_cycle_count(h.k, n, p)]

    counts = np.concatenate(_run_chunks(
        lambda chunk, rows, rng: count_cycles_trace(sample_adjacency(n, p, rng, rows), h.k),
        cfg, workers))
    mean = float(counts.mean())
    stderr = float(counts.std() / math.sqrt(cfg.N))
    rows = []
    for t in t_list:
        k_hits = int((np.abs(counts - mean) >= t).sum())
        low, high = wilson_interval(k_hits, cfg.N)
        if h.k == 3:
            bound = triangle_tail_bound(n, p, t, c)
        else:
            bound = cycle_tail_bound(h.k, n, p, t, c)
        rows.append({"t": float(t), "tail": k_hits / cfg.N,
                     "wilson_low": low, "wilson_high": high, "bound": bound})
    return ERResult(h.k, n, p, cfg.N, expected_cycle_count(h.k, n, p),
                    mean, stderr, tuple(rows))
