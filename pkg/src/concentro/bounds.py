"""Moment-bound and tail-exponent functionals for polynomials in independent
coordinates.

Every report itemizes one row per (derivative order, partition) or (order,
split) term.  Unspecified universal constants are exposed as parameters with
default 1, so totals are exact functionals of the inputs, honest up to those
constants.  Rows whose norm came from the alternating solver carry a
lower-bound flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .norms import NormOptions, mixed_norm, norm_J
from .partitions import SetPartition, SplitPartition, enumerate_partitions, enumerate_splits, merged
from .poly import Polynomial, ProductDistribution, expected_derivative_tensor
from .tensor import Tensor


@dataclass(frozen=True)
class BoundTerm:
    d: int
    label: str
    exponent: float      # power of p (moment bounds) or of t (eta terms)
    l_power: int
    norm: float
    flagged: bool        # norm is an alternating-maximization lower bound
    value: float


@dataclass(frozen=True)
class BoundReport:
    kind: str            # "sum" or "min"
    terms: tuple
    total: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("sum", "min"):
            raise ValueError(f"unknown report kind {self.kind!r}")
        if self.terms:
            agg = sum(t.value for t in self.terms) if self.kind == "sum" \
                else min(t.value for t in self.terms)
            if abs(agg - self.total) > 1e-12 * max(1.0, abs(self.total)):
                raise ValueError("report total inconsistent with its terms")
        for t in self.terms:
            if t.norm < 0:
                raise ValueError("negative norm in report term")

    def csv_rows(self):
        yield ("d", "partition", "exponent", "norm", "flag", "term")
        for t in self.terms:
            yield (t.d, t.label, t.exponent, t.norm, "lower-bound" if t.flagged else "exact",
                   t.value)


def _norm_rows(f: Polynomial, dist: ProductDistribution, opts: NormOptions):
    """Yield (d, partition, NormResult-value, flagged) over d = 1..deg(f)."""
    for d in range(1, f.degree + 1):
        tens = expected_derivative_tensor(f, dist, d)
        for part in enumerate_partitions(d):
            res = norm_J(tens, part, opts)
            yield d, part, res.value, res.method == "als"


def gaussian_moment_bound(f: Polynomial, dist: ProductDistribution, p: float,
                          opts: NormOptions | None = None) -> BoundReport:
    """Two-sided moment functional sum_d sum_J p^(#J/2) |E D^d f|_J."""
    if p < 2:
        raise ValueError(f"moment order p={p} must be >= 2")
    opts = opts or NormOptions()
    terms = []
    for d, part, norm, flagged in _norm_rows(f, dist, opts):
        expo = part.n_blocks / 2.0
        terms.append(BoundTerm(d, str(part), expo, 0, norm, flagged, p**expo * norm))
    total = sum(t.value for t in terms)
    return BoundReport("sum", tuple(terms), total,
                       {"p": p, "law": dist.law, "constant_note": "up to universal constant"})


def eta_tail(f: Polynomial, dist: ProductDistribution, t: float, L: float,
             c_d: float = 1.0, opts: NormOptions | None = None) -> BoundReport:
    """Tail exponent min_(d,J) (t / (L^d |E D^d f|_J))^(2/#J), zero norms dropped.

    meta carries the two-sided tail estimate 2 exp(-eta/c_d).
    """
    if not t > 0:
        raise ValueError("t must be positive")
    if not L > 0:
        raise ValueError("L must be positive")
    opts = opts or NormOptions()
    terms = []
    for d, part, norm, flagged in _norm_rows(f, dist, opts):
        if norm == 0.0:
            continue
        expo = 2.0 / part.n_blocks
        value = (t / (L**d * norm)) ** expo
        terms.append(BoundTerm(d, str(part), expo, d, norm, flagged, value))
    if not terms:
        raise ValueError("degenerate polynomial: every derivative norm is zero")
    total = min(t.value for t in terms)
    return BoundReport("min", tuple(terms), total,
                       {"t": t, "L": L, "C_D": c_d, "law": dist.law,
                        "tail_estimate": 2.0 * math.exp(-total / c_d),
                        "constant_note": "up to universal constant"})


def sobolev_moment_bound(f: Polynomial, dist: ProductDistribution, p: float,
                         L: float, gamma: float,
                         opts: NormOptions | None = None) -> BoundReport:
    """Moment functional sum_d sum_J L^d p^((gamma-1/2)d + #J/2) |E D^d f|_J."""
    if p < 2:
        raise ValueError(f"moment order p={p} must be >= 2")
    if gamma < 0.5:
        raise ValueError(f"gamma={gamma} must be >= 1/2")
    if not L > 0:
        raise ValueError("L must be positive")
    opts = opts or NormOptions()
    terms = []
    for d, part, norm, flagged in _norm_rows(f, dist, opts):
        expo = (gamma - 0.5) * d + part.n_blocks / 2.0
        terms.append(BoundTerm(d, str(part), expo, d, norm, flagged, L**d * p**expo * norm))
    total = sum(t.value for t in terms)
    return BoundReport("sum", tuple(terms), total,
                       {"p": p, "L": L, "gamma": gamma, "law": dist.law,
                        "constant_note": "up to universal constant"})


def additive_functional_tail(fmoments, fD_sup: float, n: int, L: float, t: float,
                             c_d: float = 1.0) -> float:
    """Tail bound for Z = f(X_1)+..+f(X_n) with |f^(D)| bounded by fD_sup.

    fmoments[d-1] holds E f^(d)(X_i) for d = 1..D-1, as a scalar (i.i.d.) or a
    length-n array.  All three exponential groups share the single constant
    c_d; empty groups contribute zero.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    if not L > 0:
        raise ValueError("L must be positive")
    if fD_sup < 0:
        raise ValueError("sup |f^(D)| must be nonnegative")
    D = len(fmoments) + 1
    rows = [np.broadcast_to(np.asarray(m, dtype=float), (n,)) for m in fmoments]

    top_args = []
    if fD_sup > 0:
        top_args.append(t**2 / (L ** (2 * D) * n * fD_sup**2))
        top_args.append(t ** (2.0 / D) / (L**2 * fD_sup ** (2.0 / D)))
    term1 = 2.0 * math.exp(-min(top_args) / c_d) if top_args else 0.0

    sq_args = [t**2 / (L ** (2 * d) * s) for d, s in
               ((d, float((rows[d - 1] ** 2).sum())) for d in range(1, D)) if s > 0]
    term2 = 2.0 * math.exp(-min(sq_args) / c_d) if sq_args else 0.0

    max_args = [t ** (2.0 / d) / (L**2 * mx ** (2.0 / d)) for d, mx in
                ((d, float(np.abs(rows[d - 1]).max())) for d in range(2, D)) if mx > 0]
    term3 = 2.0 * math.exp(-min(max_args) / c_d) if max_args else 0.0

    return term1 + term2 + term3


def weibull_moment_bound(f: Polynomial, dist: ProductDistribution, p: float,
                         alpha: float, opts: NormOptions | None = None) -> BoundReport:
    """Split-indexed functional sum_d sum_splits p^(#J/2 + #K/alpha) |E D^d f|_(J|K)."""
    if p < 2:
        raise ValueError(f"moment order p={p} must be >= 2")
    if not 1.0 <= alpha <= 2.0:
        raise ValueError(f"alpha={alpha} outside [1, 2]")
    if f.degree > 3:
        raise ValueError(f"degree {f.degree} unsupported: split bounds cover degree <= 3")
    opts = opts or NormOptions()
    terms = []
    for d in range(1, f.degree + 1):
        tens = expected_derivative_tensor(f, dist, d)
        for split in enumerate_splits(d):
            norm = mixed_norm(tens, split, alpha, opts)
            expo = len(split.inner) / 2.0 + len(split.outer) / alpha
            exact = (alpha == 2.0 and merged(split).n_blocks <= 2) or \
                    (len(split.inner) + len(split.outer)) <= 1
            terms.append(BoundTerm(d, str(split), expo, d, norm, not exact, p**expo * norm))
    total = sum(t.value for t in terms)
    return BoundReport("sum", tuple(terms), total,
                       {"p": p, "alpha": alpha, "law": dist.law,
                        "constant_note": "up to universal constant"})
