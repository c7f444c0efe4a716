"""Sparse multivariate polynomials over product measures.

Provides evaluation, symbolic differentiation, expected derivative tensors
built by coordinatewise moment substitution, and the probabilists' Hermite
polynomials with an exact expansion of any polynomial in the Hermite basis.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .tensor import MAX_ENTRIES, Tensor

TermKey = tuple  # tuple of (variable, power) pairs, 1-based, powers >= 1


def _normalize_terms(terms) -> dict:
    out: dict[TermKey, float] = {}
    for key, coef in terms.items():
        pairs = tuple(sorted((int(v), int(p)) for v, p in key))
        if any(p < 1 for _, p in pairs):
            raise ValueError(f"term {pairs} has a power below 1")
        if len({v for v, _ in pairs}) != len(pairs):
            raise ValueError(f"term {pairs} repeats a variable")
        c = out.get(pairs, 0.0) + float(coef)
        if c == 0.0:
            out.pop(pairs, None)
        else:
            out[pairs] = c
    return out


@dataclass(frozen=True)
class Polynomial:
    """Polynomial in `nvars` variables, stored as {exponent-vector: coefficient}."""

    nvars: int
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.nvars < 1:
            raise ValueError("nvars must be >= 1")
        cleaned = _normalize_terms(self.terms)
        for key in cleaned:
            for v, _ in key:
                if not 1 <= v <= self.nvars:
                    raise ValueError(f"variable {v} outside [1, {self.nvars}]")
        object.__setattr__(self, "terms", cleaned)

    @property
    def degree(self) -> int:
        if not self.terms:
            return 0
        return max(sum(p for _, p in key) for key in self.terms)

    @classmethod
    def zero(cls, nvars: int) -> "Polynomial":
        return cls(nvars, {})

    @classmethod
    def constant(cls, nvars: int, c: float) -> "Polynomial":
        return cls(nvars, {(): c} if c != 0 else {})

    @classmethod
    def monomial(cls, nvars: int, exps, coef: float = 1.0) -> "Polynomial":
        return cls(nvars, {tuple(exps): coef})

    def __add__(self, other: "Polynomial") -> "Polynomial":
        if self.nvars != other.nvars:
            raise ValueError("polynomials over different variable counts")
        merged = dict(self.terms)
        for k, c in other.terms.items():
            merged[k] = merged.get(k, 0.0) + c
        return Polynomial(self.nvars, merged)

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.nvars, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Polynomial(self.nvars, {k: c * other for k, c in self.terms.items()})
        if self.nvars != other.nvars:
            raise ValueError("polynomials over different variable counts")
        out: dict[TermKey, float] = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                powers: dict[int, int] = {}
                for v, p in itertools.chain(k1, k2):
                    powers[v] = powers.get(v, 0) + p
                key = tuple(sorted(powers.items()))
                out[key] = out.get(key, 0.0) + c1 * c2
        return Polynomial(self.nvars, out)

    __rmul__ = __mul__

    def evaluate(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.nvars,):
            raise ValueError(f"point has length {x.size}, expected {self.nvars}")
        total = 0.0
        for key, coef in self.terms.items():
            prod = coef
            for v, p in key:
                prod *= x[v - 1] ** p
            total += prod
        return total

    def evaluate_batch(self, xs: np.ndarray) -> np.ndarray:
        """Evaluate at every row of xs (N, nvars); returns (N,)."""
        xs = np.asarray(xs, dtype=float)
        if xs.ndim != 2 or xs.shape[1] != self.nvars:
            raise ValueError(f"batch must have shape (N, {self.nvars})")
        total = np.zeros(xs.shape[0])
        for key, coef in self.terms.items():
            prod = np.full(xs.shape[0], coef)
            for v, p in key:
                col = xs[:, v - 1]
                prod = prod * (col if p == 1 else col**p)
            total += prod
        return total

    def partial(self, var: int) -> "Polynomial":
        """Symbolic partial derivative with respect to x_var."""
        out: dict[TermKey, float] = {}
        for key, coef in self.terms.items():
            for i, (v, p) in enumerate(key):
                if v == var:
                    rest = key[:i] + ((v, p - 1),) if p > 1 else key[:i]
                    rest = rest + key[i + 1:]
                    out[rest] = out.get(rest, 0.0) + coef * p
        return Polynomial(self.nvars, out)

    def gradient(self) -> list["Polynomial"]:
        return [self.partial(v) for v in range(1, self.nvars + 1)]


# ---------------------------------------------------------------------------
# product distributions

_LAWS = ("gaussian", "rademacher", "bernoulli", "weibull", "custom")


@dataclass(frozen=True)
class ProductDistribution:
    """Coordinatewise i.i.d. law: moments, sampler, and tail parameters."""

    law: str
    n: int
    p: float | None = None
    alpha: float | None = None
    moments_table: tuple | None = None
    psi2_override: float | None = None
    sobolev_override: tuple | None = None

    def __post_init__(self):
        if self.law not in _LAWS:
            raise ValueError(f"unknown law {self.law!r}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.law == "bernoulli" and not (self.p is not None and 0 < self.p <= 1):
            raise ValueError("bernoulli law needs p in (0, 1]")
        if self.law == "weibull" and not (self.alpha is not None and 1 <= self.alpha <= 2):
            raise ValueError("weibull law needs alpha in [1, 2]")
        if self.law == "custom" and not self.moments_table:
            raise ValueError("custom law needs a moments table")

    @classmethod
    def gaussian(cls, n: int) -> "ProductDistribution":
        return cls("gaussian", n)

    @classmethod
    def rademacher(cls, n: int) -> "ProductDistribution":
        return cls("rademacher", n)

    @classmethod
    def bernoulli(cls, n: int, p: float) -> "ProductDistribution":
        return cls("bernoulli", n, p=p)

    @classmethod
    def weibull(cls, n: int, alpha: float) -> "ProductDistribution":
        return cls("weibull", n, alpha=alpha)

    @classmethod
    def custom(cls, n: int, moments, psi2: float | None = None,
               sobolev: tuple | None = None) -> "ProductDistribution":
        return cls("custom", n, moments_table=tuple(float(m) for m in moments),
                   psi2_override=psi2, sobolev_override=sobolev)

    def moment(self, k: int) -> float:
        """E X^k for one coordinate."""
        if k < 0:
            raise ValueError("moment order must be >= 0")
        if k == 0:
            return 1.0
        if self.law == "gaussian":
            if k % 2:
                return 0.0
            return float(math.prod(range(1, k, 2)))  # (k-1)!!
        if self.law == "rademacher":
            return 0.0 if k % 2 else 1.0
        if self.law == "bernoulli":
            return float(self.p)
        if self.law == "weibull":
            if k % 2:
                return 0.0
            return math.gamma(k / self.alpha + 1.0)
        # custom: table indexed by order, table[k] = E X^k
        if k >= len(self.moments_table):
            raise ValueError(f"custom law table covers moments up to {len(self.moments_table) - 1}")
        return self.moments_table[k]

    @property
    def psi2(self) -> float | None:
        """Sub-Gaussian norm bound for one coordinate, when finite."""
        if self.psi2_override is not None:
            return self.psi2_override
        if self.law == "gaussian":
            return math.sqrt(8.0 / 3.0)
        if self.law == "rademacher":
            return 1.0 / math.sqrt(math.log(2.0))
        if self.law == "bernoulli":
            return math.sqrt(2.0) / math.sqrt(math.log(2.0 / self.p))
        if self.law == "weibull" and self.alpha == 2.0:
            return math.sqrt(2.0)
        return None

    @property
    def sobolev(self) -> tuple[float, float] | None:
        """(L, gamma) pair of the moment-gradient inequality, when configured."""
        if self.sobolev_override is not None:
            return self.sobolev_override
        if self.law == "gaussian":
            return (1.0, 0.5)
        return None

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        shape = (self.n,) if size is None else (size, self.n)
        if self.law == "gaussian":
            return rng.standard_normal(shape)
        if self.law == "rademacher":
            return 2.0 * rng.integers(0, 2, size=shape) - 1.0
        if self.law == "bernoulli":
            return (rng.random(shape) < self.p).astype(float)
        if self.law == "weibull":
            u = rng.random(shape)
            mag = (-np.log1p(-u)) ** (1.0 / self.alpha)
            sign = 2.0 * rng.integers(0, 2, size=shape) - 1.0
            return sign * mag
        raise ValueError(f"law {self.law!r} has no sampler")

    @classmethod
    def from_config(cls, doc: dict) -> "ProductDistribution":
        law = doc.get("law")
        n = int(doc.get("n", 0))
        if law == "gaussian":
            return cls.gaussian(n)
        if law == "rademacher":
            return cls.rademacher(n)
        if law == "bernoulli":
            return cls.bernoulli(n, float(doc["p"]))
        if law == "weibull":
            return cls.weibull(n, float(doc["alpha"]))
        if law == "custom":
            return cls.custom(n, doc["moments"])
        raise ValueError(f"unknown law {law!r} in distribution config")


# ---------------------------------------------------------------------------
# derivative tensors

def _falling(k: int, l: int) -> int:
    out = 1
    for j in range(l):
        out *= k - j
    return out


def _l_assignments(powers, d):
    """All (l_1..l_t) with 0 <= l_i <= powers[i] and sum d."""
    if not powers:
        if d == 0:
            yield ()
        return
    head = powers[0]
    for l0 in range(min(head, d) + 1):
        for rest in _l_assignments(powers[1:], d - l0):
            yield (l0,) + rest


def _derivative_tensor(f: Polynomial, d: int, power_value) -> Tensor:
    """Order-d tensor of d-th partial derivatives with remaining powers folded
    through `power_value(var, power)` (a moment or a point evaluation)."""
    if d < 1:
        raise ValueError("derivative order must be >= 1")
    m = f.nvars
    if m**d > MAX_ENTRIES:
        raise ValueError(f"derivative tensor would have {m**d} entries, cap is {MAX_ENTRIES}")
    out = np.zeros((m,) * d)
    if d > f.degree:
        return Tensor(out)
    for key, coef in f.terms.items():
        vars_ = [v for v, _ in key]
        ks = [p for _, p in key]
        for ls in _l_assignments(tuple(ks), d):
            weight = coef
            seq = []
            for v, k, l in zip(vars_, ks, ls):
                weight *= _falling(k, l)
                if l < k:
                    weight *= power_value(v, k - l)
                seq.extend([v - 1] * l)
            if weight == 0.0:
                continue
            for pos in set(itertools.permutations(seq)):
                out[pos] += weight
    return Tensor(out)


def expected_derivative_tensor(f: Polynomial, dist: ProductDistribution, d: int) -> Tensor:
    """The symmetric order-d tensor with entries E d^d f / dx_{i_1}..dx_{i_d} (X)."""
    if dist.n != f.nvars:
        raise ValueError(f"distribution over {dist.n} coordinates, polynomial over {f.nvars}")
    return _derivative_tensor(f, d, lambda v, r: dist.moment(r))


def derivative_tensor_at(f: Polynomial, d: int, x) -> Tensor:
    """Pointwise order-d derivative tensor of f at x."""
    x = np.asarray(x, dtype=float)
    if x.shape != (f.nvars,):
        raise ValueError(f"point has length {x.size}, expected {f.nvars}")
    return _derivative_tensor(f, d, lambda v, r: float(x[v - 1] ** r))


def expected_value(f: Polynomial, dist: ProductDistribution) -> float:
    """E f(X) under the product law, by termwise moment substitution."""
    if dist.n != f.nvars:
        raise ValueError(f"distribution over {dist.n} coordinates, polynomial over {f.nvars}")
    total = 0.0
    for key, coef in f.terms.items():
        prod = coef
        for v, p in key:
            prod *= dist.moment(p)
        total += prod
    return total


# ---------------------------------------------------------------------------
# Hermite polynomials (probabilists' convention, leading coefficient 1)

MAX_HERMITE_DEGREE = 12


@dataclass(frozen=True)
class HermiteCoeffs:
    degree: int
    coeffs: tuple  # exact integers, ascending powers

    def to_polynomial(self, nvars: int = 1, var: int = 1) -> Polynomial:
        terms = {}
        for p, c in enumerate(self.coeffs):
            if c:
                terms[((var, p),) if p else ()] = float(c)
        return Polynomial(nvars, terms)


def hermite(k: int) -> HermiteCoeffs:
    """h_k by the recurrence h_{k+1}(x) = x h_k(x) - k h_{k-1}(x)."""
    if not 0 <= k <= MAX_HERMITE_DEGREE:
        raise ValueError(f"hermite degree {k} outside [0, {MAX_HERMITE_DEGREE}]")
    prev, cur = [1], [0, 1]
    if k == 0:
        return HermiteCoeffs(0, (1,))
    for deg in range(1, k):
        nxt = [0] + cur  # x * h_deg
        for i, c in enumerate(prev):
            nxt[i] -= deg * c
        prev, cur = cur, nxt
    return HermiteCoeffs(k, tuple(cur))


MAX_EXPANSION_DEGREE = 6
MAX_EXPANSION_VARS = 12


def _hermite_product_exact(degrees) -> dict:
    """prod_i h_{degrees[i]}(x_i) as {dense exponent tuple: Fraction}."""
    n = len(degrees)
    acc = {tuple([0] * n): Fraction(1)}
    for i, deg in enumerate(degrees):
        if deg == 0:
            continue
        coeffs = hermite(deg).coeffs
        nxt: dict = {}
        for expo, c in acc.items():
            for p, hc in enumerate(coeffs):
                if hc == 0:
                    continue
                key = list(expo)
                key[i] += p
                key = tuple(key)
                nxt[key] = nxt.get(key, Fraction(0)) + c * hc
        acc = {k: v for k, v in nxt.items() if v != 0}
    return acc


def hermite_expansion(f: Polynomial) -> dict:
    """Coefficients a_d with f = sum_d a_d prod_i h_{d_i}(x_i), exact arithmetic.

    Keys are dense degree tuples of length nvars.  Exact for coefficients
    representable as binary floats; round-tripping reproduces f.
    """
    n = f.nvars
    if f.degree > MAX_EXPANSION_DEGREE:
        raise ValueError(f"degree {f.degree} exceeds expansion cap {MAX_EXPANSION_DEGREE}")
    if n > MAX_EXPANSION_VARS:
        raise ValueError(f"{n} variables exceed expansion cap {MAX_EXPANSION_VARS}")
    work: dict = {}
    for key, coef in f.terms.items():
        dense = [0] * n
        for v, p in key:
            dense[v - 1] = p
        work[tuple(dense)] = work.get(tuple(dense), Fraction(0)) + Fraction(coef)
    work = {k: v for k, v in work.items() if v != 0}

    out: dict = {}
    while work:
        # the Hermite product with top degree pattern e has leading monomial x^e
        top = max(work, key=lambda e: (sum(e), e))
        c = work.pop(top)
        out[top] = out.get(top, Fraction(0)) + c
        for expo, hc in _hermite_product_exact(top).items():
            if expo == top:
                continue
            cur = work.get(expo, Fraction(0)) - c * hc
            if cur == 0:
                work.pop(expo, None)
            else:
                work[expo] = cur
    return {k: float(v) for k, v in out.items() if v != 0}


def hermite_combination(coeffs: dict, nvars: int) -> Polynomial:
    """Inverse of hermite_expansion: rebuild the polynomial from a_d coefficients."""
    total = Polynomial.zero(nvars)
    for degrees, a in coeffs.items():
        prod = _hermite_product_exact(tuple(degrees))
        terms = {}
        for expo, c in prod.items():
            key = tuple((i + 1, p) for i, p in enumerate(expo) if p)
            terms[key] = terms.get(key, 0.0) + float(c) * a
        total = total + Polynomial(nvars, terms)
    return total


# ---------------------------------------------------------------------------
# JSON formats

def polynomial_to_dict(f: Polynomial) -> dict:
    return {"nvars": f.nvars,
            "terms": [{"exps": [[v, p] for v, p in key], "coef": c}
                      for key, c in sorted(f.terms.items())]}


def polynomial_from_dict(doc: dict) -> Polynomial:
    try:
        nvars = int(doc["nvars"])
        raw = doc["terms"]
    except (KeyError, TypeError) as exc:
        raise ValueError("polynomial document needs nvars and terms") from exc
    terms: dict[TermKey, float] = {}
    for t in raw:
        key = tuple((int(v), int(p)) for v, p in t["exps"])
        terms[key] = terms.get(key, 0.0) + float(t["coef"])
    return Polynomial(nvars, terms)


def save_polynomial(f: Polynomial, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(polynomial_to_dict(f), fh)


def load_polynomial(path: str) -> Polynomial:
    with open(path) as fh:
        return polynomial_from_dict(json.load(fh))
