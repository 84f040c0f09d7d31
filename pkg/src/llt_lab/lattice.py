"""Lattice sums and lattice-based conditions.

Provides density-side sums sum_m p(Lm + a), characteristic-function sums
sum_k e^{i k phi} f(sk) with certified or extrapolated tails, the pi-lattice
vanishing check, the two-sided Poisson identity, the wrapped autocorrelation,
distance to a scaled integer lattice, and the regularity-integral diagnostics
in one and two dimensions.

Slow cf tails (~ gamma/k^2) get an exact closed-form correction built on the
classical Fourier series sum_{k>=1} cos(k t)/k^2 = pi^2/6 - pi t/2 + t^2/4,
which stays accurate arbitrarily close to phase resonance where sequence
extrapolation cannot see the |t|-kink.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
import numpy as np
from scipy.integrate import quad

from .distributions import SourceDistribution
from .errors import InvalidParameterError, UnsupportedError
from .seriesaccel import (certified_tail, extrapolate_dual_stride,
                          resonance_floor, sum_series_blocks)

__all__ = [
    "LatticeSum",
    "LatticeZeroReport",
    "PoissonReport",
    "RegularityReport",
    "sum_density_lattice",
    "sum_cf_lattice",
    "phased_cf_lattice_sum",
    "check_pi_lattice_zeros",
    "poisson_check",
    "wrapped_autocorrelation",
    "distance_to_lattice",
    "regularity_integral",
]

K_CAP_1D = 1_000_000
K_CAP_2D = 4_000_000


@dataclass(frozen=True)
class LatticeSum:
    value: complex | float
    truncation_index: int
    tail_estimate: float
    terms_used: int
    extrapolated: bool = False


@dataclass(frozen=True)
class LatticeZeroReport:
    max_abs: float
    argmax_k: tuple


@dataclass(frozen=True)
class PoissonReport:
    lhs: float
    rhs: float
    gap: float
    lhs_tail: float = 0.0
    rhs_tail: float = 0.0


@dataclass(frozen=True)
class RegularityReport:
    estimate: float
    diverging: bool
    shell_contributions: tuple


# ---------------------------------------------------------------------------
# phased cf sums, vectorized over a batch of phases
# ---------------------------------------------------------------------------

def _cos_k2_closed(theta: np.ndarray) -> np.ndarray:
    """sum_{k>=1} cos(k t)/k^2 = pi^2/6 - pi t/2 + t^2/4 on t in [0, 2 pi]."""
    t = np.mod(theta, 2.0 * math.pi)
    return math.pi ** 2 / 6.0 - math.pi * t / 2.0 + t * t / 4.0


def phased_cf_lattice_sum(dist: SourceDistribution, step: float,
                          phases: np.ndarray, tol: float,
                          k_budget: int = 16384, block: int = 512):
    """sum_{k in Z} e^{i k phi} f(step k) for a batch of phases phi.

    Returns (values, tail_estimate, info).  The sum is split into the k = 0
    term plus one-sided series; tails are certified directly when |f| decays
    fast, corrected in closed form when k^2 f(step k) approaches a constant
    (cf with an integrable second-derivative profile), and otherwise handled
    by sequence extrapolation with an honest error estimate.
    """
    if dist.dim != 1:
        raise InvalidParameterError("phased_cf_lattice_sum is one-dimensional")
    if step <= 0:
        raise InvalidParameterError("step must be positive")
    phi = np.atleast_1d(np.asarray(phases, dtype=float))
    f = dist.cf
    f0 = float(np.real(f(0.0)))
    symmetric = dist.flags.symmetric_about_0

    if dist.cf_support_radius is not None:
        kmax = int(math.floor(dist.cf_support_radius / step + 1e-12))
        if kmax == 0:
            return np.full(phi.shape, f0, dtype=complex), 0.0, {"K": 0, "terms": 1}
        k = np.arange(1, kmax + 1)
        fp = np.asarray(f(step * k), dtype=float)
        fm = fp if symmetric else np.asarray(f(-step * k), dtype=float)
        ang = np.outer(phi, k)
        vals = f0 + (np.exp(1j * ang) * fp + np.exp(-1j * ang) * fm).sum(axis=1)
        return vals, 0.0, {"K": kmax, "terms": 2 * kmax + 1}

    nblocks = max(8, int(math.ceil(k_budget / block)))
    S = np.zeros(phi.shape, dtype=complex)
    cos_k2_partial = np.zeros(phi.shape)
    checkpoints = []
    ks = []
    babs = []
    gamma_samples = []
    k_last = 0
    fp_last = None
    last_run = None
    last_k = None
    for j in range(nblocks):
        k0 = j * block + 1
        k = np.arange(k0, k0 + block)
        fp = np.asarray(f(step * k), dtype=float)
        if symmetric:
            ang = np.outer(phi, k)
            cosang = np.cos(ang)
            inc = 2.0 * cosang * fp[None, :]
            cinc = np.exp(1j * ang) * fp[None, :]
            cos_k2_partial += cosang @ (1.0 / (k * k))
            bsum = 2.0 * float(np.abs(fp).sum())
        else:
            fm = np.asarray(f(-step * k), dtype=float)
            ang = np.outer(phi, k)
            inc = np.exp(1j * ang) * fp + np.exp(-1j * ang) * fm
            cinc = inc
            cos_k2_partial += (np.cos(ang) @ (1.0 / (k * k)))
            bsum = float(np.abs(fp).sum() + np.abs(fm).sum())
        run = S[:, None] + np.cumsum(inc, axis=1)
        S = run[:, -1].copy()
        k_last = k0 + block - 1
        babs.append((k_last, bsum))
        checkpoints.append(S.copy())
        ks.append(k_last)
        gamma_samples.append(float(np.mean(k * k * fp)))
        fp_last = (k, fp)
        last_run, last_k, last_cinc = run, k, cinc
        # certification via fitted envelope of the absolute block sums
        tail_cert = certified_tail(babs, block)
        if tail_cert is not None and tail_cert <= tol:
            return f0 + S, tail_cert, {"K": k_last, "terms": 2 * k_last + 1}
    # closed-form k^-2 kink correction: exact whenever k^2 f(step k) settles
    # to a constant, which covers inverse-quadratic cf tails at any phase,
    # resonant ones included
    err_kink = math.inf
    v_kink = None
    if symmetric and len(gamma_samples) >= 2:
        g1, g2 = gamma_samples[-2], gamma_samples[-1]
        if math.isfinite(g1) and math.isfinite(g2) and abs(g2) > 0 and \
                abs(g1 - g2) <= 2e-3 * abs(g2):
            gamma = g2
            k, fp = fp_last
            resid = np.abs(k * k * fp - gamma) * k * k
            c4 = float(np.max(resid))
            tail_resid = 4.0 * c4 / (3.0 * k_last ** 3)
            kink = 2.0 * gamma * (_cos_k2_closed(phi) - cos_k2_partial)
            v_kink = f0 + S + kink
            err_kink = tail_resid + 64.0 * np.finfo(float).eps * abs(gamma)
    w = min(41, last_run.shape[1])
    wb = min(41, len(checkpoints))
    v_ext, e_ext = extrapolate_dual_stride(
        last_run[:, -w:], last_k[-w:].astype(float),
        np.stack(checkpoints[-wb:], axis=-1), ks[-wb:])
    # extrapolation cannot see tails whose phase rotation is slower than the
    # k budget (cf oscillation near-commensurate with the lattice step)
    e_ext = np.maximum(e_ext, resonance_floor(last_cinc, float(last_k[-1])))
    v_ext = f0 + v_ext
    if v_kink is not None:
        use_kink = err_kink < e_ext
        vals = np.where(use_kink, v_kink, v_ext)
        errs = np.where(use_kink, err_kink, e_ext)
    else:
        vals, errs = v_ext, e_ext
    tail = float(np.max(errs)) * 2.0
    return vals, tail, {"K": k_last, "terms": 2 * k_last + 1, "extrapolated": True}


def sum_cf_lattice(dist: SourceDistribution, step: float,
                   phase=None, tol: float = 1e-10) -> LatticeSum:
    """sum_{k in Z^d} e^{i <phase, k>} f(step k), truncated/accelerated so the
    omitted tail stays below tol."""
    if step <= 0:
        raise InvalidParameterError("step must be positive")
    if dist.dim == 1:
        phi = 0.0 if phase is None else float(np.ravel(phase)[0])
        vals, tail, info = phased_cf_lattice_sum(dist, step, np.array([phi]), tol)
        if tail > max(tol, 1e-7):
            raise UnsupportedError(
                f"{dist.label}: cf lattice tail not summable to {tol:g} "
                f"(certified only {tail:g})")
        value = complex(vals[0])
        if abs(value.imag) < 1e-12 * max(1.0, abs(value.real)):
            value = value.real
        return LatticeSum(value, info["K"], tail, info["terms"],
                          bool(info.get("extrapolated", False)))
    if dist.dim == 2 and dist.components is not None:
        ph = (0.0, 0.0) if phase is None else tuple(np.ravel(phase))
        parts = [sum_cf_lattice(c, step, p, tol / 2.0)
                 for c, p in zip(dist.components, ph)]
        value = parts[0].value * parts[1].value
        scale = max(abs(complex(parts[0].value)), abs(complex(parts[1].value)), 1.0)
        tail = (parts[0].tail_estimate + parts[1].tail_estimate) * scale
        return LatticeSum(value, max(p.truncation_index for p in parts), tail,
                          parts[0].terms_used * parts[1].terms_used,
                          any(p.extrapolated for p in parts))
    return _cf_lattice_2d_generic(dist, step, phase, tol)


def _cf_lattice_2d_generic(dist, step, phase, tol):
    ph = np.zeros(2) if phase is None else np.asarray(phase, dtype=float)
    total = complex(np.real(dist.cf(np.zeros(2))))
    terms = 1
    shells = []
    s = 1
    while s * 8 * (2 * s + 1) < K_CAP_2D:
        rng = np.arange(-s, s + 1)
        edge = []
        for kx in (-s, s):
            edge.append(np.stack([np.full(rng.size, kx), rng], axis=-1))
        inner = np.arange(-s + 1, s)
        if inner.size:
            for ky in (-s, s):
                edge.append(np.stack([inner, np.full(inner.size, ky)], axis=-1))
        kpts = np.concatenate(edge, axis=0)
        fv = np.asarray(dist.cf(step * kpts), dtype=complex)
        phases = np.exp(1j * (kpts @ ph))
        contrib = complex((phases * fv).sum())
        total += contrib
        terms += kpts.shape[0]
        shells.append(float(np.abs(fv).sum()))
        if len(shells) >= 3 and shells[-1] <= shells[-2] <= shells[-3]:
            if shells[-3] > 0 and shells[-1] > 0 and s > 2:
                # shell sums ~ c * s^-alpha; integral test on the remainder
                alpha = math.log(shells[-3] / shells[-1]) / math.log(s / (s - 2))
                if alpha > 1.05:
                    tail = 1.5 * shells[-1] * s / (alpha - 1.0) / s
                    if tail <= tol:
                        return LatticeSum(total, s, tail, terms, False)
            elif shells[-1] == 0.0 and shells[-2] == 0.0:
                return LatticeSum(total, s, 0.0, terms, False)
        s += 1
    raise UnsupportedError(f"{dist.label}: 2-d cf lattice sum did not converge "
                           f"within the term cap")


# ---------------------------------------------------------------------------
# density lattice sums
# ---------------------------------------------------------------------------

def sum_density_lattice(dist: SourceDistribution, scale: float, offset,
                        tol: float = 1e-10) -> LatticeSum:
    """sum over the integer lattice of p(scale*m + offset) with tail <= tol."""
    L = float(scale)
    if L <= 0:
        raise InvalidParameterError("scale must be positive")
    if dist.density is None:
        raise UnsupportedError(f"{dist.label}: no density available")
    if dist.dim == 1:
        a = float(np.ravel(offset)[0]) if np.ndim(offset) else float(offset)
        return _density_lattice_1d(dist, L, a, tol)
    if dist.dim == 2 and dist.components is not None:
        a = np.ravel(np.asarray(offset, dtype=float))
        parts = [_density_lattice_1d(c, L, float(ai), tol / 2.0)
                 for c, ai in zip(dist.components, a)]
        value = parts[0].value * parts[1].value
        tail = parts[0].tail_estimate + parts[1].tail_estimate
        return LatticeSum(value, max(p.truncation_index for p in parts), tail,
                          parts[0].terms_used * parts[1].terms_used,
                          any(p.extrapolated for p in parts))
    raise UnsupportedError("density lattice sums support dim 1 and separable dim 2")


def _density_lattice_1d(dist, L, a, tol):
    p = dist.density
    # re-center so the lattice point nearest the density mode is m = 0; the
    # sum is lattice-invariant and the block engine assumes decay from the
    # first blocks outward
    a = a - L * round(a / L)
    dec = dist.density_decay
    if dec is not None and dec.kind == "compact":
        m_lo = int(math.ceil((-dec.radius - a) / L - 1e-12))
        m_hi = int(math.floor((dec.radius - a) / L + 1e-12))
        if m_hi < m_lo:
            return LatticeSum(0.0, 0, 0.0, 0, False)
        m = np.arange(m_lo, m_hi + 1)
        vals = np.asarray(p(L * m + a), dtype=float)
        return LatticeSum(float(vals.sum()), int(max(abs(m_lo), abs(m_hi))),
                          0.0, m.size, False)
    if dec is None and dist.density is None:
        raise UnsupportedError(f"{dist.label}: unknown density decay")

    center = float(p(a))

    def term_block(k0, k1):
        m = np.arange(k0, k1)
        return np.asarray(p(L * m + a), dtype=float) + np.asarray(p(-L * m + a), dtype=float)

    res = sum_series_blocks(term_block, tol=tol, block=128, max_blocks=192)
    if res.tail_estimate > max(tol, 1e-7):
        raise UnsupportedError(
            f"{dist.label}: density lattice tail not summable to {tol:g} "
            f"(certified only {res.tail_estimate:g})")
    value = center + (complex(res.value).real if np.ndim(res.value) == 0
                      else float(np.real(res.value)))
    return LatticeSum(float(value), res.truncation_index, res.tail_estimate,
                      2 * res.terms_used + 1, res.extrapolated)


# ---------------------------------------------------------------------------
# lattice condition, Poisson identity, wrapped autocorrelation
# ---------------------------------------------------------------------------

def check_pi_lattice_zeros(dist: SourceDistribution, K: int) -> LatticeZeroReport:
    """max |f(pi k)| over nonzero integer vectors with sup-norm at most K."""
    if K < 1:
        raise InvalidParameterError("K must be >= 1")
    if dist.dim == 1:
        k = np.arange(1, K + 1)
        vp = np.abs(np.asarray(dist.cf(math.pi * k), dtype=complex))
        vm = np.abs(np.asarray(dist.cf(-math.pi * k), dtype=complex))
        both = np.concatenate([vp, vm])
        idx = int(np.argmax(both))
        kbest = int(k[idx % K]) * (1 if idx < K else -1)
        return LatticeZeroReport(float(both[idx]), (kbest,))
    if dist.dim == 2:
        rng = np.arange(-K, K + 1)
        KX, KY = np.meshgrid(rng, rng, indexing="ij")
        pts = np.stack([KX, KY], axis=-1).reshape(-1, 2)
        keep = ~np.all(pts == 0, axis=1)
        pts = pts[keep]
        vals = np.abs(np.asarray(dist.cf(math.pi * pts.astype(float)), dtype=complex))
        i = int(np.argmax(vals))
        return LatticeZeroReport(float(vals[i]), tuple(int(v) for v in pts[i]))
    raise UnsupportedError("lattice zero check supports dim 1 and 2")


def poisson_check(dist: SourceDistribution, tol: float = 1e-10) -> PoissonReport:
    """Compare sum_m p(m) with sum_k f(2 pi k); both tails held below tol.

    The hypotheses (integrable cf, hence bounded continuous density, and a
    finite first absolute moment) are enforced through the catalog flags;
    violating entries are rejected with the failed hypothesis named.
    """
    if dist.density is None:
        raise UnsupportedError(f"{dist.label}: no density")
    if dist.abs_moment1 is None:
        raise UnsupportedError(
            f"{dist.label}: first absolute moment unavailable (infinite)")
    if not dist.flags.cf_integrable or not dist.flags.density_continuous:
        raise UnsupportedError(
            f"{dist.label}: density discontinuous at lattice points "
            "(cf not absolutely integrable)")
    lhs = sum_density_lattice(dist, 1.0, np.zeros(dist.dim) if dist.dim > 1 else 0.0,
                              tol=tol)
    rhs = sum_cf_lattice(dist, 2.0 * math.pi, None, tol=tol)
    lv = float(np.real(lhs.value))
    rv = float(np.real(rhs.value))
    return PoissonReport(lv, rv, abs(lv - rv),
                         lhs.tail_estimate, rhs.tail_estimate)


def wrapped_autocorrelation(dist: SourceDistribution, tol: float = 1e-9) -> float:
    """sum over the lattice 2 Z^d of the density's self-correlation
    integral p*p~ evaluated at even integer points; equals 2^-d exactly when
    the cf vanishes on the nonzero pi-lattice."""
    if dist.dim == 1:
        return _wrapped_autocorr_1d(dist, tol)
    if dist.dim == 2 and dist.components is not None:
        return float(np.prod([_wrapped_autocorr_1d(c, tol / 2.0)
                              for c in dist.components]))
    raise UnsupportedError("wrapped autocorrelation supports dim 1 and separable dim 2")


def _selfconv_numeric(dist, y: float) -> float:
    # overlap integral p(y + x) p(x) dx by adaptive quadrature
    val, _ = quad(lambda x: dist.density(y + x) * dist.density(x),
                  -np.inf, np.inf, limit=200)
    return val


def _wrapped_autocorr_1d(dist, tol):
    if dist.density is None:
        raise UnsupportedError(f"{dist.label}: no density")
    q = dist.self_convolution
    if q is None:
        if not dist.flags.bounded_variation_density:
            raise UnsupportedError(f"{dist.label}: self-convolution unavailable")
        q = lambda y: np.vectorize(lambda yy: _selfconv_numeric(dist, yy))(y)  # noqa: E731
    center = float(np.asarray(q(0.0)))
    sconv_compact = (dist.density_decay is not None
                     and dist.density_decay.kind == "compact")
    if sconv_compact:
        radius = 2.0 * dist.density_decay.radius
        m_hi = int(math.floor(radius / 2.0 + 1e-12))
        if m_hi >= 1:
            m = np.arange(1, m_hi + 1)
            vals = np.asarray(q(2.0 * m), dtype=float) + np.asarray(q(-2.0 * m), dtype=float)
            return center + float(vals.sum())
        return center

    def term_block(k0, k1):
        m = np.arange(k0, k1)
        return np.asarray(q(2.0 * m), dtype=float) + np.asarray(q(-2.0 * m), dtype=float)

    res = sum_series_blocks(term_block, tol=tol, block=128, max_blocks=192)
    if res.tail_estimate > max(tol, 1e-7):
        raise UnsupportedError(f"{dist.label}: autocorrelation tail not summable")
    return center + float(np.real(res.value))


def distance_to_lattice(t, lattice_step: float) -> float:
    """Euclidean distance from t to the scaled integer lattice (step s)Z^d."""
    s = float(lattice_step)
    if s <= 0:
        raise InvalidParameterError("lattice_step must be positive")
    tv = np.atleast_1d(np.asarray(t, dtype=float))
    r = tv - s * np.round(tv / s)
    return float(np.linalg.norm(r))


# ---------------------------------------------------------------------------
# regularity-integral diagnostics
# ---------------------------------------------------------------------------

def _shell_slope(contribs) -> float:
    c = np.asarray(contribs, dtype=float)
    c = np.maximum(c, 1e-300)
    j = np.arange(1, c.size + 1, dtype=float)
    half = c.size // 2
    lj = np.log(j[half:])
    lc = np.log(c[half:])
    A = np.vstack([np.ones_like(lj), lj]).T
    coef, *_ = np.linalg.lstsq(A, lc, rcond=None)
    return float(coef[1])


def regularity_integral(dist: SourceDistribution, kind: str,
                        window_K: int = 8) -> RegularityReport:
    """Quadrature estimate of the integral of |f||f'| / dist(t, pi Z^d)^(d-1)
    (kind 'condition_2_3') or |f'| / dist(t, pi Z^d)^(d-1) ('condition_3_1')
    over the window of sup-norm radius pi*window_K, with a divergence
    diagnostic from the per-shell decay."""
    if kind not in ("condition_2_3", "condition_3_1"):
        raise InvalidParameterError("kind must be condition_2_3 or condition_3_1")
    if dist.cf_grad is None:
        raise UnsupportedError(f"{dist.label}: cf gradient unavailable")
    if window_K < 4:
        raise InvalidParameterError("window_K must be >= 4")
    if dist.dim == 1:
        return _regularity_1d(dist, kind, window_K)
    if dist.dim == 2:
        return _regularity_2d(dist, kind, window_K)
    raise UnsupportedError("regularity integral supports dim 1 and 2")


def _regularity_1d(dist, kind, K):
    def integrand(t):
        g = abs(dist.cf_grad(t))
        if kind == "condition_2_3":
            return abs(dist.cf(t)) * g
        return g

    shells = []
    total, _ = quad(integrand, -math.pi / 2, math.pi / 2, limit=100)
    for j in range(1, K + 1):
        lo, hi = math.pi * (j - 0.5), math.pi * (j + 0.5)
        cj, _ = quad(integrand, lo, hi, limit=100)
        cj_m, _ = quad(integrand, -hi, -lo, limit=100)
        shells.append(cj + cj_m)
        total += cj + cj_m
    slope = _shell_slope(shells)
    diverging = slope >= -1.05
    if not diverging and shells[-1] > 0:
        total += shells[-1] * K / (-slope - 1.0)
    return RegularityReport(float(total), bool(diverging), tuple(shells))


def _regularity_2d(dist, kind, K):
    ntheta, nr = 96, 48
    theta = (np.arange(ntheta) + 0.5) * (2.0 * math.pi / ntheta)
    ct, st = np.cos(theta), np.sin(theta)
    rmax = (math.pi / 2.0) / np.maximum(np.abs(ct), np.abs(st))
    # Gauss-Legendre nodes in r per direction; the 1/r singularity cancels
    # against the polar Jacobian, leaving a bounded integrand in (r, theta)
    gl_x, gl_w = np.polynomial.legendre.leggauss(nr)
    rr = 0.5 * (gl_x[None, :] + 1.0) * rmax[:, None]
    ww = 0.5 * gl_w[None, :] * rmax[:, None] * (2.0 * math.pi / ntheta)
    offs = np.stack([rr * ct[:, None], rr * st[:, None]], axis=-1)

    def cell_integral(kx, ky):
        pts = offs + np.array([math.pi * kx, math.pi * ky])
        grad = np.asarray(dist.cf_grad(pts))
        g = np.sqrt(np.sum(np.abs(grad) ** 2, axis=-1))
        if kind == "condition_2_3":
            g = g * np.abs(np.asarray(dist.cf(pts), dtype=complex))
        return float((g * ww).sum())

    total = cell_integral(0, 0)
    shells = []
    for s in range(1, K + 1):
        cs = 0.0
        for kx in range(-s, s + 1):
            for ky in range(-s, s + 1):
                if max(abs(kx), abs(ky)) == s:
                    cs += cell_integral(kx, ky)
        shells.append(cs)
        total += cs
    slope = _shell_slope(shells)
    diverging = slope >= -1.05
    if not diverging and shells[-1] > 0:
        total += shells[-1] * K / (-slope - 1.0)
    return RegularityReport(float(total), bool(diverging), tuple(shells))
