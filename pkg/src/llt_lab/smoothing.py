"""Densities of normalized noise-smoothed sums and convergence studies.

The model is Z_n = (X + X_1 + ... + X_n)/sqrt(n) with X drawn from a catalog
source and X_k i.i.d. isotropic noise.  Its characteristic function is
f(t/sqrt n) v(t/sqrt n)^n.

For symmetric Bernoulli noise, v = cos and the inverse transform is computed
exactly cell by cell: substituting t = sqrt(n) u and splitting R into the
intervals of length pi centered at pi k gives

    p_n(x) = (sqrt n / 2 pi) [ C_n(w) A(x) + sum_k e^{-i pi k a} D_k(w) ],

with w = x sqrt(n), a = w + n,
    C_n(w) = integral of cos^n(s) e^{-isw} over |s| <= pi/2  (closed form via
             the binomial expansion of cos^n),
    A(x)   = sum_k e^{-i pi k a} f(pi k)      (phased cf lattice sum),
    D_k(w) = integral of (f(pi k + s) - f(pi k)) cos^n(s) e^{-isw} ds.

The D_k series is summed by Gauss-Legendre cell quadrature with certified or
extrapolated tails.  This reaches oracle-level accuracy (~1e-9) for any n,
which a plain truncated transform cannot do for slowly decaying cfs.  For
general (non-Bernoulli) noise the plain trapezoid inversion applies, with the
window taken from a compact cf support or from sampled decay.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import gammaln

from .distributions import NoiseDistribution, SourceDistribution, beta3 as _beta3
from .errors import InconsistentCfError, InvalidParameterError, UnsupportedError
from .inversion import Grid, GridDensity, estimate_tail, grid_1d, grid_2d, invert
from .lattice import check_pi_lattice_zeros, phased_cf_lattice_sum
from .seriesaccel import certified_tail, extrapolate_dual_stride, resonance_floor

__all__ = [
    "SmoothedModel",
    "ConvergenceReport",
    "AdmissibleT",
    "smoothed_cf",
    "density",
    "distance_to_gaussian",
    "gaussian_window_deficit",
    "convergence_study",
    "admissible_T",
    "cos_power_window_transform",
    "default_grid",
]

_SQRT2PI = math.sqrt(2.0 * math.pi)
_IM_TOL = 1e-9


def _max_threads() -> int:
    raw = os.environ.get("LLT_LAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True)
class SmoothedModel:
    source: SourceDistribution
    noise: NoiseDistribution
    dim: int = 0

    def __post_init__(self):
        d = self.source.dim
        if self.noise.dim != d:
            raise InvalidParameterError("source and noise dimensions differ")
        if self.dim == 0:
            object.__setattr__(self, "dim", d)
        elif self.dim != d:
            raise InvalidParameterError("model dim inconsistent with source")


@dataclass(frozen=True)
class AdmissibleT:
    t_value: Optional[float]
    rationale: str  # 'beta3' | 'remark41' | 'unsupported'


@dataclass
class ConvergenceReport:
    n_schedule: tuple
    distances: dict                 # norm -> tuple of distances, per n
    fitted_log_slope: Optional[float]
    slope_norm: str
    condition_max_abs: float
    even_slope: Optional[float] = None
    odd_slope: Optional[float] = None
    est_errors: tuple = ()          # per-n density truncation budgets
    grid_meta: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# smoothed characteristic function
# ---------------------------------------------------------------------------

def _stable_real_power(v: np.ndarray, n: int) -> np.ndarray:
    """v^n for real v in [-1, 1] without underflow surprises: the magnitude
    goes through n*log|v|, the sign through the parity of n."""
    v = np.asarray(v, dtype=float)
    out = np.zeros_like(v)
    nz = np.abs(v) > 0.0
    with np.errstate(divide="ignore"):
        mag = np.exp(n * np.log(np.abs(v, where=nz, out=np.ones_like(v))))
    sgn = np.where((v < 0) & (n % 2 == 1), -1.0, 1.0)
    out = np.where(nz, sgn * mag, 0.0)
    return out


def smoothed_cf(model: SmoothedModel, n: int, t):
    """f(t/sqrt n) * v(t/sqrt n)^n at points t (scalar, array, or (..., d))."""
    if n < 1:
        raise InvalidParameterError("n must be a positive integer")
    rt = math.sqrt(n)
    ts = np.asarray(t, dtype=float) / rt
    fv = np.asarray(model.source.cf(ts))
    vv = np.asarray(model.noise.cf(ts))
    if np.iscomplexobj(vv):
        out = fv * np.power(vv, n)
    else:
        out = fv * _stable_real_power(vv, n)
    if np.ndim(out) == 0:
        return complex(out) if np.iscomplexobj(np.asarray(out)) else float(out)
    return out


# ---------------------------------------------------------------------------
# exact window transform of cos^n
# ---------------------------------------------------------------------------

def _half_period_sinc(mu: np.ndarray) -> np.ndarray:
    """2 sin(mu pi / 2) / mu with the limit pi at mu = 0."""
    mu = np.asarray(mu, dtype=float)
    small = np.abs(mu) < 1e-6
    safe = np.where(small, 1.0, mu)
    z = math.pi * mu / 2.0
    series = math.pi * (1.0 - z * z / 6.0)
    return np.where(small, series, 2.0 * np.sin(math.pi * safe / 2.0) / safe)


def cos_power_window_transform(n: int, w) -> np.ndarray:
    """C_n(w) = integral over |s| <= pi/2 of cos^n(s) e^{-i s w} ds (real).

    Exact binomial expansion: cos^n = 2^-n sum_j C(n,j) e^{i(2j-n)s}, each
    mode integrating to a shifted half-period sinc; log-domain weights keep
    n up to 10^4 stable.
    """
    ws = np.atleast_1d(np.asarray(w, dtype=float))
    j = np.arange(n + 1)
    logw = gammaln(n + 1) - gammaln(j + 1) - gammaln(n - j + 1) - n * math.log(2.0)
    bw = np.exp(logw)
    out = np.zeros(ws.size)
    chunk = max(1, int(2_000_000 // max(ws.size, 1)))
    for j0 in range(0, n + 1, chunk):
        jj = j[j0:j0 + chunk]
        mu = (2.0 * jj - n)[None, :] - ws[:, None]
        out += _half_period_sinc(mu) @ bw[j0:j0 + chunk]
    return out if np.ndim(w) else float(out[0])


# ---------------------------------------------------------------------------
# Bernoulli-noise cell engine (d = 1)
# ---------------------------------------------------------------------------

def _gl_nodes(n: int, w_max: float):
    m = max(128, int(0.8 * (w_max + 6.0 * math.sqrt(n))) + 64)
    x, wq = np.polynomial.legendre.leggauss(m)
    s = 0.5 * math.pi * x
    ws = 0.5 * math.pi * wq
    return s, ws


def _cell_residual_sum(f, n: int, w: np.ndarray, a_frac: np.ndarray,
                       s: np.ndarray, ws: np.ndarray, tol: float,
                       k_budget: int = 8192, block: int = 128):
    """sum_k e^{-i pi k a} D_k(w) over all k, for symmetric real f.

    Shares one Gauss-Legendre s-grid across cells; per block of k the cell
    integrals form a matrix product, and the +-k pair reduces to twice a real
    part.  Returns (values (X,), tail_estimate)."""
    X = w.size
    cosn = _stable_real_power(np.cos(s), n)
    phi = (ws * cosn)[None, :] * np.exp(-1j * np.outer(w, s))   # (X, M)
    phiT = np.ascontiguousarray(phi.T)                          # (M, X)
    f0 = float(np.real(f(0.0)))
    fs = np.asarray(f(s), dtype=float)
    total = np.asarray((phi @ (fs - f0)), dtype=complex)        # k = 0 cell
    mags = []
    block_partials = []
    block_ks = []
    last_partials = None
    last_ks = None
    nblocks = max(4, k_budget // block)
    for bidx in range(nblocks):
        k0 = bidx * block + 1
        k = np.arange(k0, k0 + block)
        fk = np.asarray(f(math.pi * k), dtype=float)            # (B,)
        F = np.asarray(f(math.pi * k[:, None] + s[None, :]), dtype=float)
        F -= fk[:, None]
        G = F @ phiT                                            # (B, X) complex
        P = np.exp(-1j * math.pi * np.outer(k, a_frac))         # (B, X)
        inc = 2.0 * np.real(P * G)
        run = total[None, :] + np.cumsum(inc, axis=0)           # unit-stride partials
        total = run[-1].copy()
        mags.append((int(k[-1]), float(np.max(np.abs(inc).sum(axis=0)))))
        block_partials.append(total)
        block_ks.append(int(k[-1]))
        last_partials = run
        last_ks = k
        tail_cert = certified_tail(mags, block)
        if tail_cert is not None and tail_cert <= tol:
            return total, tail_cert
    # dual-stride extrapolation: unit stride preserves the phase signature
    # e^{+-i pi(1 -+ a)}, block stride conditions monotone tails
    w = min(41, last_partials.shape[0])
    unit = np.ascontiguousarray(last_partials[-w:].T)           # (X, w)
    wb = min(41, len(block_partials))
    blocked = np.stack(block_partials[-wb:], axis=-1)
    vals, errs = extrapolate_dual_stride(unit, last_ks[-w:].astype(float),
                                         blocked, block_ks[-wb:])
    # grid points near a density jump make the cell phases rotate slower
    # than the k budget resolves; the floor keeps the estimate honest there
    floor = resonance_floor(np.ascontiguousarray((P * G).T), float(last_ks[-1]))
    errs = np.maximum(errs, floor)
    return vals, float(np.max(errs)) * 2.0


def _bernoulli_density_1d(source: SourceDistribution, n: int, x: np.ndarray,
                          tol: float):
    if not source.flags.symmetric_about_0:
        raise UnsupportedError(
            f"{source.label}: the cell engine requires a symmetric source")
    rt = math.sqrt(n)
    w = np.asarray(x, dtype=float) * rt
    a = w + n
    a_frac = np.mod(a + 1.0, 2.0) - 1.0        # wrapped to (-1, 1]
    pref = rt / (2.0 * math.pi)

    C = cos_power_window_transform(n, w)
    A, a_tail, _ = phased_cf_lattice_sum(source, math.pi, -math.pi * a_frac,
                                         tol=tol * _SQRT2PI * 0.25)
    s, ws = _gl_nodes(n, float(np.max(np.abs(w))) if w.size else 0.0)
    d_tol = tol * 2.0 * math.pi / rt * 0.25
    D, d_tail = _cell_residual_sum(source.cf, n, w, a_frac, s, ws, d_tol)
    # independent node count certifies the cell quadrature
    s2, ws2 = np.polynomial.legendre.leggauss(max(96, int(0.75 * s.size)))
    s2, ws2 = 0.5 * math.pi * s2, 0.5 * math.pi * ws2
    D2, _ = _cell_residual_sum(source.cf, n, w, a_frac, s2, ws2, d_tol,
                               k_budget=1024)
    D1_short, _ = _cell_residual_sum(source.cf, n, w, a_frac, s, ws, d_tol,
                                     k_budget=1024)
    quad_err = float(np.max(np.abs(D1_short - D2)))

    vals = pref * (C * A + D)
    im_max = float(np.max(np.abs(vals.imag)))
    scale = max(1.0, float(np.max(np.abs(vals.real))))
    if im_max > 1e-6 * scale:
        raise InconsistentCfError(f"imaginary residue {im_max:.3g} in cell engine")
    est = pref * (float(np.max(np.abs(C))) * a_tail + d_tail + quad_err)
    return vals.real, est, im_max


# ---------------------------------------------------------------------------
# density dispatch
# ---------------------------------------------------------------------------

def default_grid(dim: int) -> Grid:
    return grid_1d(-5.0, 5.0, 1001) if dim == 1 else grid_2d(-5.0, 5.0, 101)


def _is_bernoulli(noise: NoiseDistribution) -> bool:
    return bool(getattr(noise, "is_symmetric_bernoulli", False))


def density(model: SmoothedModel, n: int, grid: Optional[Grid] = None,
            tol: float = 1e-9) -> GridDensity:
    """Density of Z_n on a grid, through the characteristic function.

    Bernoulli noise runs the exact cell engine (any n, near-oracle accuracy);
    separable two-dimensional models tensorize it; general noise uses the
    trapezoid inversion with a certified window.
    """
    if n < 1:
        raise InvalidParameterError("n must be a positive integer")
    if grid is None:
        grid = default_grid(model.dim)
    if grid.dim != model.dim:
        raise InvalidParameterError("grid dimension mismatch")

    if model.dim == 1 and _is_bernoulli(model.noise):
        x = grid.axes[0].points()
        vals, est, im_max = _bernoulli_density_1d(model.source, n, x, tol)
        meta = {"n_used": n, "truncation_radius": math.inf,
                "est_tail_error": est, "max_imag": im_max, "engine": "cell"}
        return GridDensity(dim=1, axes=grid.axes, values=vals, meta=meta)

    if (model.dim == 2 and _is_bernoulli(model.noise)
            and model.source.components is not None):
        vx, ex, im1 = _bernoulli_density_1d(model.source.components[0], n,
                                            grid.axes[0].points(), tol)
        vy, ey, im2 = _bernoulli_density_1d(model.source.components[1], n,
                                            grid.axes[1].points(), tol)
        vals = np.outer(vx, vy)
        sup = max(float(np.max(np.abs(vx))), float(np.max(np.abs(vy))), 1.0)
        meta = {"n_used": n, "truncation_radius": math.inf,
                "est_tail_error": (ex + ey) * sup, "max_imag": max(im1, im2),
                "engine": "cell-tensor"}
        return GridDensity(dim=2, axes=grid.axes, values=vals, meta=meta)

    return _general_noise_density(model, n, grid, tol)


def _general_noise_density(model: SmoothedModel, n: int, grid: Grid,
                           tol: float) -> GridDensity:
    if not model.source.flags.cf_integrable and model.source.cf_support_radius is None:
        raise UnsupportedError(
            f"{model.source.label}: smoothed cf not certifiably integrable")

    def cf_eval(t):
        return smoothed_cf(model, n, t)

    rt = math.sqrt(n)
    if model.source.cf_support_radius is not None:
        R = model.source.cf_support_radius * rt
        gd = invert(cf_eval, model.dim, grid, truncation_radius=R)
        gd.meta["est_tail_error"] = gd.meta.get("est_quad_error", 0.0)
        gd.meta["n_used"] = n
        gd.meta["engine"] = "invert-compact"
        return gd
    # no compact support: grow the window until the sampled tail certifies
    R = max(10.6, 2.0 * rt)
    tail = math.inf
    for _ in range(9):
        tail = estimate_tail(cf_eval, model.dim, R)
        if tail <= tol:
            break
        R *= 1.7
    if not math.isfinite(tail):
        raise UnsupportedError(f"{model.source.label}: smoothed cf tail does not decay")
    gd = invert(cf_eval, model.dim, grid, truncation_radius=R)
    gd.meta["n_used"] = n
    gd.meta["engine"] = "invert"
    return gd


# ---------------------------------------------------------------------------
# distances to the Gaussian and convergence studies
# ---------------------------------------------------------------------------

def _phi_on_grid(gd: GridDensity) -> np.ndarray:
    if gd.dim == 1:
        x = gd.axes[0].points()
        return np.exp(-0.5 * x * x) / _SQRT2PI
    gx = gd.axes[0].points()
    gy = gd.axes[1].points()
    R2 = gx[:, None] ** 2 + gy[None, :] ** 2
    return np.exp(-0.5 * R2) / (2.0 * math.pi)


def gaussian_window_deficit(grid: Grid) -> float:
    """Standard-normal mass outside the grid window (out-of-window bound
    for the grid distances)."""
    from scipy.stats import norm
    dims = []
    for ax in grid.axes:
        dims.append(norm.cdf(ax.upper) - norm.cdf(ax.origin))
    inside = float(np.prod(dims))
    return max(0.0, 1.0 - inside)


def _parabolic_peak(vals: np.ndarray, i: int) -> float:
    if i == 0 or i == vals.size - 1:
        return float(vals[i])
    a, b, c = vals[i - 1], vals[i], vals[i + 1]
    denom = 2.0 * b - a - c
    if denom <= 0:
        return float(b)
    return float(b + (c - a) ** 2 / (8.0 * denom))


def distance_to_gaussian(gd: GridDensity, norm: str) -> float:
    """Grid distance between the density values and the standard Gaussian:
    trapezoid L1/L2 or pointwise sup with a parabolic refinement around the
    grid argmax."""
    if norm not in ("l1", "l2", "sup"):
        raise InvalidParameterError("norm must be one of l1, l2, sup")
    diff = gd.values - _phi_on_grid(gd)
    if norm == "sup":
        flat = np.abs(diff).ravel()
        i = int(np.argmax(flat))
        if gd.dim == 1:
            return _parabolic_peak(np.abs(diff), i)
        return float(flat[i])
    integrand = np.abs(diff) if norm == "l1" else diff * diff
    m = integrand
    for ax in reversed(gd.axes):
        m = np.trapezoid(m, dx=ax.step, axis=-1)
    return float(m) if norm == "l1" else float(math.sqrt(m))


def _fit_loglog(ns, ds) -> Optional[float]:
    ns = np.asarray(ns, dtype=float)
    ds = np.asarray(ds, dtype=float)
    keep = ds > 0
    if keep.sum() < 2:
        return None
    A = np.vstack([np.ones(keep.sum()), np.log(ns[keep])]).T
    coef, *_ = np.linalg.lstsq(A, np.log(ds[keep]), rcond=None)
    return float(coef[1])


def convergence_study(model: SmoothedModel, n_schedule: Sequence[int],
                      norm: str = "l2", grid: Optional[Grid] = None,
                      tol: float = 1e-9) -> ConvergenceReport:
    """Distances to the Gaussian over a schedule of n with a fitted log-log
    slope.  When the pi-lattice condition fails, even and odd n are never
    mixed in one fit; the subsequences get separate slopes."""
    ns = tuple(int(v) for v in n_schedule)
    if any(b <= a for a, b in zip(ns, ns[1:])) or not ns:
        raise InvalidParameterError("n_schedule must be strictly increasing")
    if grid is None:
        grid = default_grid(model.dim)
    if norm == "sup" and model.dim == 1:
        step = grid.axes[0].step
        limit = 0.2 / math.sqrt(ns[-1])
        if step > limit + 1e-15:
            raise InvalidParameterError(
                f"sup-norm study needs grid step <= {limit:.4g} for n_max = {ns[-1]}"
                f" (got {step:.4g}); oscillations have period 2/sqrt(n)")

    def one(nv):
        gd = density(model, nv, grid, tol=tol)
        row = {nm: distance_to_gaussian(gd, nm) for nm in ("l1", "l2", "sup")}
        row["est"] = gd.est_tail_error
        return row

    workers = min(_max_threads(), len(ns))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(one, ns))
    else:
        rows = [one(nv) for nv in ns]
    distances = {nm: tuple(r[nm] for r in rows) for nm in ("l1", "l2", "sup")}
    est_errors = tuple(r["est"] for r in rows)

    cond = check_pi_lattice_zeros(model.source, 20).max_abs
    ds = distances[norm]
    even_idx = [i for i, nv in enumerate(ns) if nv % 2 == 0]
    odd_idx = [i for i, nv in enumerate(ns) if nv % 2 == 1]
    mixed = bool(even_idx and odd_idx)
    condition_fails = cond > 1e-8
    slope = even_slope = odd_slope = None
    if condition_fails and mixed:
        even_slope = _fit_loglog([ns[i] for i in even_idx], [ds[i] for i in even_idx])
        odd_slope = _fit_loglog([ns[i] for i in odd_idx], [ds[i] for i in odd_idx])
    else:
        slope = _fit_loglog(ns, ds)
        if condition_fails:
            if even_idx:
                even_slope = slope
            else:
                odd_slope = slope
    return ConvergenceReport(
        n_schedule=ns,
        distances=distances,
        fitted_log_slope=slope,
        slope_norm=norm,
        condition_max_abs=float(cond),
        even_slope=even_slope,
        odd_slope=odd_slope,
        est_errors=est_errors,
        grid_meta={
            "lo": grid.axes[0].origin,
            "hi": grid.axes[0].upper,
            "points": grid.axes[0].count,
            "gaussian_window_deficit": gaussian_window_deficit(grid),
        },
    )


# ---------------------------------------------------------------------------
# admissible support radius for the compact-cf theorem
# ---------------------------------------------------------------------------

def admissible_T(noise: NoiseDistribution, prefer: str = "auto") -> AdmissibleT:
    """Support radius T for which compactly supported source cfs give uniform
    convergence: 1/beta3 when the third directional moment is finite, or pi
    for symmetric atom-free unit-variance laws other than Bernoulli +-1."""
    if prefer not in ("auto", "beta3", "remark41"):
        raise InvalidParameterError("prefer must be auto, beta3 or remark41")
    t_b3 = None
    try:
        t_b3 = 1.0 / _beta3(noise)
    except UnsupportedError:
        t_b3 = None
    remark_ok = (
        noise.dim == 1
        and noise.flags.symmetric_about_0
        and getattr(noise, "zero_atom_free", False)
        and not getattr(noise, "is_symmetric_bernoulli", False)
        and noise.second_moment is not None
        and abs(noise.second_moment - 1.0) <= 1e-9
    )
    if prefer == "beta3":
        return AdmissibleT(t_b3, "beta3") if t_b3 is not None \
            else AdmissibleT(None, "unsupported")
    if prefer == "remark41":
        return AdmissibleT(math.pi, "remark41") if remark_ok \
            else AdmissibleT(None, "unsupported")
    if remark_ok:
        return AdmissibleT(math.pi, "remark41")
    if t_b3 is not None:
        return AdmissibleT(t_b3, "beta3")
    return AdmissibleT(None, "unsupported")
