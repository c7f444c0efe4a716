"""Linear eigenvalue statistics of Wigner matrices: sampling, a cyclic Jacobi
eigensolver, exact semicircle integrals of polynomials, and the deviation
bound for smooth linear statistics with its Monte Carlo comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .montecarlo import MCConfig, _run_chunks, wilson_interval
from .poly import Polynomial

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

MAX_EIG_SIZE = 400


def _jacobi_python(a: np.ndarray, tol_off: float) -> int:
    """Cyclic-by-row Jacobi rotations until the off-diagonal Frobenius norm
    drops below tol_off.  Vectorized row/column updates; used without numba."""
    n = a.shape[0]
    idx = np.arange(n)
    for sweep in range(1, 61):
        off = math.sqrt(max(0.0, (a * a).sum() - (np.diag(a) ** 2).sum()))
        if off <= tol_off:
            return sweep - 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                a[p, :] = a[:, p]
                a[q, :] = a[:, q]
                a[p, p] = c * c * col_p[p] - 2.0 * s * c * apq + s * s * col_q[q]
                a[q, q] = s * s * col_p[p] + 2.0 * s * c * apq + c * c * col_q[q]
                a[p, q] = 0.0
                a[q, p] = 0.0
    return 60


if _HAVE_NUMBA:

    @njit(cache=True)
    def _jacobi_numba(a, tol_off):  # pragma: no cover - exercised via wrapper
        n = a.shape[0]
        for sweep in range(1, 61):
            off = 0.0
            for i in range(n - 1):
                for j in range(i + 1, n):
                    off += a[i, j] * a[i, j]
            if math.sqrt(2.0 * off) <= tol_off:
                return sweep - 1
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    if apq == 0.0:
                        continue
                    theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                    if theta >= 0.0:
                        t = 1.0 / (theta + math.sqrt(theta * theta + 1.0))
                    else:
                        t = -1.0 / (-theta + math.sqrt(theta * theta + 1.0))
                    c = 1.0 / math.sqrt(t * t + 1.0)
                    s = t * c
                    app = a[p, p]
                    aqq = a[q, q]
                    for i in range(n):
                        if i != p and i != q:
                            aip = a[i, p]
                            aiq = a[i, q]
                            a[i, p] = c * aip - s * aiq
                            a[p, i] = a[i, p]
                            a[i, q] = s * aip + c * aiq
                            a[q, i] = a[i, q]
                    a[p, p] = c * c * app - 2.0 * s * c * apq + s * s * aqq
                    a[q, q] = s * s * app + 2.0 * s * c * apq + c * c * aqq
                    a[p, q] = 0.0
                    a[q, p] = 0.0
        return 60


def eigenvalues_symmetric(m) -> np.ndarray:
    """All eigenvalues of a symmetric matrix by cyclic Jacobi rotations, run
    until the off-diagonal Frobenius norm is below 1e-12 of the input norm."""
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n > MAX_EIG_SIZE:
        raise ValueError(f"matrix size {n} exceeds cap {MAX_EIG_SIZE}")
    scale = max(1.0, float(np.abs(a).max()))
    if float(np.abs(a - a.T).max()) > 1e-12 * scale:
        raise ValueError("matrix is asymmetric beyond tolerance 1e-12")
    a = (a + a.T) / 2.0
    frob = float(np.linalg.norm(a))
    if frob == 0.0:
        return np.zeros(n)
    tol_off = 1e-12 * frob
    if _HAVE_NUMBA:
        _jacobi_numba(a, tol_off)
    else:
        _jacobi_python(a, tol_off)
    return np.sort(np.diag(a))


def hoffman_wielandt_gap(b, c) -> tuple[float, float]:
    """(sorted-eigenvalue squared distance, squared Frobenius distance); the
    first never exceeds the second for symmetric matrices."""
    eb = eigenvalues_symmetric(b)
    ec = eigenvalues_symmetric(c)
    lhs = float(((eb - ec) ** 2).sum())
    rhs = float(np.linalg.norm(np.asarray(b, dtype=float) - np.asarray(c, dtype=float)) ** 2)
    return lhs, rhs


@dataclass(frozen=True)
class WignerSpec:
    """Symmetric random matrix with independent mean-zero entries.

    convention "paper": every entry has variance one.  convention "goe":
    off-diagonal variance one, diagonal variance two.
    """

    n: int
    entry_law: str = "gaussian"
    L: float = 1.0
    convention: str = "paper"

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("matrix size must be >= 2")
        if self.entry_law != "gaussian":
            raise ValueError("gaussian entries only")
        if self.convention not in ("paper", "goe"):
            raise ValueError(f"unknown convention {self.convention!r}")

    def sample(self, rng: np.random.Generator, rows: int = 1) -> np.ndarray:
        n = self.n
        iu = np.triu_indices(n, 1)
        a = np.zeros((rows, n, n))
        a[:, iu[0], iu[1]] = rng.standard_normal((rows, iu[0].size))
        a += np.transpose(a, (0, 2, 1))
        diag_sd = math.sqrt(2.0) if self.convention == "goe" else 1.0
        a[:, np.arange(n), np.arange(n)] = diag_sd * rng.standard_normal((rows, n))
        return a


@dataclass(frozen=True)
class LinStatResult:
    z: float
    eigenvalues: np.ndarray


def linear_statistic(f: Polynomial, matrix) -> LinStatResult:
    """Z = sum_i f(lambda_i / sqrt(n)) with eigenvalues sorted ascending."""
    if f.nvars != 1:
        raise ValueError("linear statistics take a one-variable polynomial")
    eigs = eigenvalues_symmetric(matrix)
    n = eigs.size
    z = float(sum(f.evaluate([lam / math.sqrt(n)]) for lam in eigs))
    return LinStatResult(z, eigs)


def catalan(j: int) -> int:
    return math.comb(2 * j, j) // (j + 1)


def semicircle_integral(g: Polynomial) -> float:
    """Integral of a one-variable polynomial against the semicircle density on
    (-2, 2): even moments are Catalan numbers, odd moments vanish."""
    if g.nvars != 1:
        raise ValueError("semicircle integral takes a one-variable polynomial")
    if g.degree > 20:
        raise ValueError("semicircle integral supports degree <= 20")
    total = 0.0
    for key, coef in g.terms.items():
        power = key[0][1] if key else 0
        if power % 2 == 0:
            total += coef * catalan(power // 2)
    return total


def sup_abs_on_interval(g: Polynomial, halfwidth: float = 4.0, npoints: int = 10_000) -> float:
    """Grid surrogate for sup |g| on [-halfwidth, halfwidth]."""
    xs = np.linspace(-halfwidth, halfwidth, npoints)
    return float(np.abs(g.evaluate_batch(xs[:, None])).max())


def linstat_tail_bound(f: Polynomial, n: int, L: float, t: float,
                       c_l: float = 1.0, halfwidth: float = 4.0) -> float:
    """Deviation bound for Z: sub-Gaussian term driven by the semicircle energy
    of f', exponential term by sup |f''|, single explicit constant c_l."""
    if f.nvars != 1:
        raise ValueError("linear statistics take a one-variable polynomial")
    if not t > 0:
        return 2.0
    fp = f.partial(1)
    energy = semicircle_integral(fp * fp)
    fpp_sup = sup_abs_on_interval(f.partial(1).partial(1), halfwidth)
    args = []
    if energy > 0 or fpp_sup > 0:
        args.append(t**2 / (L**2 * (energy + n ** (-2.0 / 3.0) * fpp_sup**2)))
    if fpp_sup > 0:
        args.append(n * t / (L**2 * fpp_sup))
    if not args:
        return 0.0
    return 2.0 * math.exp(-min(args) / c_l)


@dataclass(frozen=True)
class WignerResult:
    n: int
    replicas: int
    z_mean: float
    z_stderr: float
    sobolev_mean: float
    sobolev_stderr: float
    sobolev_limit: float
    rows: tuple


def wigner_experiment(f: Polynomial, spec: WignerSpec, cfg: MCConfig,
                      t_list=(), c_l: float = 1.0, workers: int = 1) -> WignerResult:
    """Replicated linear statistics: empirical tails of Z next to the deviation
    bound, and the empirical gradient energy (1/n) sum f'(lambda_i/sqrt(n))^2
    next to its semicircle limit."""
    if f.nvars != 1:
        raise ValueError("linear statistics take a one-variable polynomial")
    if spec.n > 200:
        raise ValueError("experiment matrix size capped at 200")
    if cfg.N > 10_000:
        raise ValueError("experiment replica count capped at 10000")
    fp = f.partial(1)
    sqrt_n = math.sqrt(spec.n)
    coeffs_f = _dense_coeffs(f)
    coeffs_fp = _dense_coeffs(fp)

    def job(chunk, rows, rng):
        mats = spec.sample(rng, rows)
        out = np.empty((2, rows))
        for r in range(rows):
            lam = eigenvalues_symmetric(mats[r]) / sqrt_n
            out[0, r] = _polyval(coeffs_f, lam).sum()
            out[1, r] = (_polyval(coeffs_fp, lam) ** 2).mean()
        return out

    stacked = np.concatenate(_run_chunks(job, cfg, workers), axis=1)
    z, sob = stacked[0], stacked[1]
    rows = []
    z_mean = float(z.mean())
    for t in t_list:
        hits = int((np.abs(z - z_mean) >= t).sum())
        low, high = wilson_interval(hits, cfg.N)
        rows.append({"t": float(t), "tail": hits / cfg.N, "wilson_low": low,
                     "wilson_high": high,
                     "bound": linstat_tail_bound(f, spec.n, spec.L, t, c_l)})
    return WignerResult(spec.n, cfg.N, z_mean, float(z.std() / math.sqrt(cfg.N)),
                        float(sob.mean()), float(sob.std() / math.sqrt(cfg.N)),
                        semicircle_integral(fp * fp), tuple(rows))


def _dense_coeffs(g: Polynomial) -> np.ndarray:
    out = np.zeros(g.degree + 1)
    for key, coef in g.terms.items():
        out[key[0][1] if key else 0] += coef
    return out


def _polyval(coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    for c in coeffs[::-1]:
        out = out * x + c
    return out
