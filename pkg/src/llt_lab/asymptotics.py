"""Oscillation structure of the smoothed densities in one dimension.

Away from the vanishing condition on the pi-lattice, p_n does not converge
pointwise; instead p_n(x) tracks A_n(x) phi(x) where the oscillation factor

    A_n(x) = sum_k e^{-i pi k (x sqrt n + n)} f(pi k)
           = 2 sum_m p(2m + x sqrt n + n)

is computed here along both routes independently (phased cf lattice sum vs
density lattice sum), with their gap, the 2/sqrt(n) periodicity defect, and
the sup residual against A_n * phi reported per n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .distributions import SourceDistribution
from .errors import UnsupportedError
from .inversion import Grid
from .lattice import phased_cf_lattice_sum, sum_density_lattice
from .seriesaccel import sum_series_blocks
from .smoothing import SmoothedModel, default_grid, density

__all__ = [
    "OscillationReport",
    "EvenOddLimits",
    "oscillation_factor_cf",
    "oscillation_factor_density",
    "oscillation_report",
    "even_odd_limits",
]

_SQRT2PI = math.sqrt(2.0 * math.pi)
_PHI0 = 1.0 / _SQRT2PI


@dataclass(frozen=True)
class EvenOddLimits:
    even_limit: float
    odd_limit: float
    route: str


@dataclass
class OscillationReport:
    n: int
    a_values: np.ndarray
    residual_sup: float
    period_defect: float
    method_gap: float
    grid_meta: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)


def _require_1d(model: SmoothedModel):
    if model.dim != 1:
        raise UnsupportedError("oscillation analysis is one-dimensional")


# ---------------------------------------------------------------------------
# the two routes to A_n
# ---------------------------------------------------------------------------

def _phase_fracs(x: np.ndarray, n: int) -> np.ndarray:
    a = np.asarray(x, dtype=float) * math.sqrt(n) + n
    return np.mod(a + 1.0, 2.0) - 1.0


def _a_factor_cf_vec(source: SourceDistribution, n: int, x: np.ndarray,
                     k_budget: int, tol: float):
    fr = _phase_fracs(x, n)
    vals, tail, _ = phased_cf_lattice_sum(source, math.pi, -math.pi * fr,
                                          tol=tol, k_budget=k_budget)
    if tail > max(tol, 1e-7):
        raise UnsupportedError(
            f"{source.label}: cf lattice sum not summable to {tol:g} "
            f"(certified only {tail:g})")
    im = float(np.max(np.abs(vals.imag)))
    if im > 1e-9 * max(1.0, float(np.max(np.abs(vals.real)))):
        raise UnsupportedError(f"oscillation sum has imaginary residue {im:.3g}")
    return vals.real, tail


def _a_factor_density_vec(source: SourceDistribution, n: int, x: np.ndarray,
                          tol: float):
    if source.density is None:
        raise UnsupportedError(f"{source.label}: no density for the lattice route")
    a = np.asarray(x, dtype=float) * math.sqrt(n) + n
    # lattice-invariant re-centering keeps the mass in the first blocks
    a = a - 2.0 * np.round(a / 2.0)
    p = source.density
    dec = source.density_decay
    if dec is not None and dec.kind == "compact":
        # every lattice point within the support, batch-evaluated
        m_lo = int(math.floor((-dec.radius - float(a.max())) / 2.0)) - 1
        m_hi = int(math.ceil((dec.radius - float(a.min())) / 2.0)) + 1
        m = np.arange(m_lo, m_hi + 1)
        vals = np.asarray(p(2.0 * m[None, :] + a[:, None]), dtype=float).sum(axis=1)
        return 2.0 * vals, 0.0

    center = np.asarray(p(a), dtype=float)

    def term_block(k0, k1):
        m = np.arange(k0, k1)
        return (np.asarray(p(2.0 * m[None, :] + a[:, None]), dtype=float)
                + np.asarray(p(-2.0 * m[None, :] + a[:, None]), dtype=float))

    res = sum_series_blocks(term_block, tol=tol, block=64, max_blocks=64)
    if res.tail_estimate > max(tol, 1e-7):
        raise UnsupportedError(f"{source.label}: density lattice tail not summable")
    return 2.0 * (center + np.real(res.value)), 2.0 * res.tail_estimate


def oscillation_factor_cf(model: SmoothedModel, n: int, x: float,
                          K: int = 16384, tol: float = 1e-10) -> float:
    """A_n(x) as the phase-twisted lattice sum of the source cf."""
    _require_1d(model)
    vals, _ = _a_factor_cf_vec(model.source, n, np.atleast_1d(float(x)), K, tol)
    return float(vals[0])


def oscillation_factor_density(model: SmoothedModel, n: int, x: float,
                               tol: float = 1e-10) -> float:
    """A_n(x) as twice the density sum over the even lattice shifted by
    x sqrt(n) + n."""
    _require_1d(model)
    a = float(x) * math.sqrt(n) + n
    s = sum_density_lattice(model.source, 2.0, a, tol=tol)
    return 2.0 * float(np.real(s.value))


# ---------------------------------------------------------------------------
# full report
# ---------------------------------------------------------------------------

def _jump_lattice_mask(source: SourceDistribution, a: np.ndarray) -> np.ndarray:
    """True where the density lattice sum at shift a is convention-free.

    A compactly supported density with jumps at +-h makes 2 sum_m p(2m + a)
    depend on the boundary convention exactly when a falls on +-h + 2Z; those
    points are excluded from route comparisons."""
    if source.flags.density_continuous:
        return np.ones(a.shape, dtype=bool)
    h = source.density_decay.radius if (source.density_decay is not None and
                                        source.density_decay.kind == "compact") else None
    if h is None:
        return np.ones(a.shape, dtype=bool)
    d1 = np.abs(np.mod(a - h + 1.0, 2.0) - 1.0)
    d2 = np.abs(np.mod(a + h + 1.0, 2.0) - 1.0)
    return np.minimum(d1, d2) > 1e-9


def oscillation_report(model: SmoothedModel, n: int,
                       grid: Optional[Grid] = None, K: int = 16384,
                       tol: float = 1e-9) -> OscillationReport:
    """A_n along both routes on a grid, the residual sup |p_n - A_n phi|,
    and the periodicity defect of A_n at period 2/sqrt(n).

    The canonical a_values follow the density route for continuous densities
    and the cf route otherwise (where lattice-point density values would be
    boundary-convention artifacts); the route gap is taken over the
    convention-free points.
    """
    _require_1d(model)
    if grid is None:
        grid = default_grid(1)
    x = grid.axes[0].points()
    continuous = model.source.flags.density_continuous
    a_cf, cf_tail = _a_factor_cf_vec(model.source, n, x, K, tol)
    a_dn, dn_tail = _a_factor_density_vec(model.source, n, x, tol)
    valid = _jump_lattice_mask(model.source, x * math.sqrt(n) + n)
    method_gap = float(np.max(np.abs(a_cf - a_dn)[valid])) if valid.any() else 0.0
    canonical = a_dn if continuous else a_cf

    gd = density(model, n, grid, tol=tol)
    phi = np.exp(-0.5 * x * x) / _SQRT2PI
    residual_sup = float(np.max(np.abs(gd.values - canonical * phi)))

    probes = np.linspace(x[0], x[-1] - 2.0 / math.sqrt(n), 25)
    if continuous:
        ap, _ = _a_factor_density_vec(model.source, n, probes, tol)
        aps, _ = _a_factor_density_vec(model.source, n,
                                       probes + 2.0 / math.sqrt(n), tol)
    else:
        ap, _ = _a_factor_cf_vec(model.source, n, probes, K, tol)
        aps, _ = _a_factor_cf_vec(model.source, n,
                                  probes + 2.0 / math.sqrt(n), K, tol)
    period_defect = float(np.max(np.abs(aps - ap)))

    return OscillationReport(
        n=n,
        a_values=canonical,
        residual_sup=residual_sup,
        period_defect=period_defect,
        method_gap=method_gap,
        grid_meta={"lo": x[0], "hi": x[-1], "points": x.size},
        meta={"cf_tail": cf_tail, "density_tail": dn_tail, "route":
              "density" if continuous else "cf",
              "density_est_error": gd.est_tail_error},
    )


def even_odd_limits(source: SourceDistribution, tol: float = 1e-10) -> EvenOddLimits:
    """Limits of p_n(0) along even and odd n: phi(0) times the oscillation
    factor at the origin for each parity.

    Continuous densities use the lattice-density route; entries whose density
    has lattice-point discontinuities (uniform) switch to the cf route, where
    the answer is convention-free.
    """
    if source.dim != 1:
        raise UnsupportedError("even/odd limits are one-dimensional")
    if source.flags.density_continuous and source.density is not None:
        even = 2.0 * float(np.real(sum_density_lattice(source, 2.0, 0.0, tol).value))
        odd = 2.0 * float(np.real(sum_density_lattice(source, 2.0, 1.0, tol).value))
        return EvenOddLimits(_PHI0 * even, _PHI0 * odd, "density")
    vals, tail, _ = phased_cf_lattice_sum(source, math.pi,
                                          np.array([0.0, -math.pi]), tol=tol)
    if tail > max(tol, 1e-7):
        raise UnsupportedError(f"{source.label}: cf lattice tail not summable")
    even, odd = float(vals[0].real), float(vals[1].real)
    return EvenOddLimits(_PHI0 * even, _PHI0 * odd, "cf")
