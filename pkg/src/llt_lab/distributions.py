"""Catalog of source and noise distributions with exact density / characteristic
function pairs.

Every entry carries closed-form moments, derivative functions where they exist,
decay envelopes for its density and characteristic function (used by the lattice
and inversion engines to certify truncation tails), and structural flags.  All
objects are immutable; the evaluation callables are pure and vectorized over
numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import quad

from .errors import InvalidParameterError, UnsupportedError

__all__ = [
    "DecayEnvelope",
    "DistFlags",
    "SourceDistribution",
    "NoiseDistribution",
    "make_uniform",
    "make_laplace",
    "make_gaussian",
    "make_fejer",
    "product",
    "bernoulli_noise",
    "uniform_noise",
    "gaussian_noise",
    "as_noise",
    "beta3",
]

_SQRT2PI = math.sqrt(2.0 * math.pi)


# ---------------------------------------------------------------------------
# envelopes and flags
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecayEnvelope:
    """Pointwise upper envelope for |g(r)| at large radius r.

    kind:
      'compact'  g vanishes for r > radius
      'power'    coeff * r**(-alpha)
      'exp'      coeff * exp(-rate * r)
      'gauss'    coeff * exp(-rate * r**2)

    ``oscillatory`` marks envelopes of sign-changing functions whose signed
    tail integrals are much smaller than the absolute ones (sinc-like).
    """

    kind: str
    radius: float = 0.0
    coeff: float = 1.0
    alpha: float = 0.0
    rate: float = 0.0
    oscillatory: bool = False

    def bound(self, r: float) -> float:
        r = float(abs(r))
        if self.kind == "compact":
            return 0.0 if r > self.radius else math.inf
        if self.kind == "power":
            return math.inf if r == 0 else self.coeff * r ** (-self.alpha)
        if self.kind == "exp":
            return self.coeff * math.exp(-self.rate * r)
        if self.kind == "gauss":
            return self.coeff * math.exp(-self.rate * r * r)
        raise InvalidParameterError(f"unknown envelope kind: {self.kind}")

    def tail_integral(self, r: float) -> float:
        """Upper bound for the one-sided integral of the envelope on [r, inf)."""
        r = float(abs(r))
        if self.kind == "compact":
            return 0.0 if r >= self.radius else math.inf
        if self.kind == "power":
            if self.alpha <= 1.0 or r == 0.0:
                return math.inf
            return self.coeff * r ** (1.0 - self.alpha) / (self.alpha - 1.0)
        if self.kind == "exp":
            return self.coeff * math.exp(-self.rate * r) / self.rate
        if self.kind == "gauss":
            # exp(-rate*t^2) <= exp(-rate*r*t) for t >= r
            if r == 0.0:
                return math.inf
            return self.coeff * math.exp(-self.rate * r * r) / (self.rate * r)
        raise InvalidParameterError(f"unknown envelope kind: {self.kind}")


@dataclass(frozen=True)
class DistFlags:
    symmetric_about_0: bool
    bounded_variation_density: bool
    cf_nonnegative: bool
    density_continuous: bool = True
    cf_integrable: bool = True
    cf_square_integrable: bool = True


# ---------------------------------------------------------------------------
# distribution records
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SourceDistribution:
    """A distribution with exact density / characteristic-function pair.

    ``abs_moment1`` is None when the first absolute moment does not exist;
    ``abs_moment3`` uses math.inf for a moment known to be infinite and None
    for "not stored" (the latter triggers quadrature in :func:`beta3`).
    Densities and cfs accept floats or numpy arrays; for dim >= 2 the point
    arrays have the coordinate axis last.
    """

    dim: int
    density: Optional[Callable]
    cf: Callable
    flags: DistFlags
    cf_grad: Optional[Callable] = None
    cf_second: Optional[Callable] = None
    abs_moment1: Optional[float] = None
    second_moment: Optional[float] = None
    abs_moment3: Optional[float] = None
    cf_support_radius: Optional[float] = None
    cf_support_box: Optional[tuple] = None
    cf_decay: Optional[DecayEnvelope] = None
    density_decay: Optional[DecayEnvelope] = None
    self_convolution: Optional[Callable] = None
    sampler: Optional[Callable] = None
    components: Optional[tuple] = None
    label: str = ""

    def __repr__(self) -> str:  # keeps pytest output readable
        return f"<{type(self).__name__} {self.label or 'anonymous'} dim={self.dim}>"


@dataclass(frozen=True, eq=False)
class NoiseDistribution(SourceDistribution):
    """A mean-zero isotropic smoothing noise; same shape as a source
    distribution plus the maximal directional third absolute moment."""

    beta3: Optional[float] = None
    is_symmetric_bernoulli: bool = False
    zero_atom_free: bool = True
    sum_sampler: Optional[Callable] = None


# ---------------------------------------------------------------------------
# numerically safe special functions (series switch below |u| < 1e-4 avoids
# cancellation at the removable singularities)
# ---------------------------------------------------------------------------

_SMALL = 1e-4


def _sinc(u):
    """sin(u)/u with the removable singularity at 0 evaluated by series."""
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < _SMALL
    safe = np.where(small, 1.0, u)
    u2 = u * u
    out = np.where(small, 1.0 - u2 / 6.0 + u2 * u2 / 120.0, np.sin(safe) / safe)
    return out


def _sinc_prime(u):
    """d/du [sin(u)/u] = cos(u)/u - sin(u)/u**2."""
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < _SMALL
    safe = np.where(small, 1.0, u)
    u2 = u * u
    series = -u / 3.0 + u * u2 / 30.0
    direct = np.cos(safe) / safe - np.sin(safe) / (safe * safe)
    out = np.where(small, series, direct)
    return out


def _sinc_second(u):
    """d^2/du^2 [sin(u)/u]."""
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < _SMALL
    safe = np.where(small, 1.0, u)
    u2 = u * u
    series = -1.0 / 3.0 + u2 / 10.0
    direct = (-np.sin(safe) / safe
              - 2.0 * np.cos(safe) / (safe * safe)
              + 2.0 * np.sin(safe) / (safe * safe * safe))
    out = np.where(small, series, direct)
    return out


def _one_minus_cos_over_sq(u):
    """(1 - cos u)/u**2 with series near 0."""
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < _SMALL
    safe = np.where(small, 1.0, u)
    u2 = u * u
    series = 0.5 - u2 / 24.0 + u2 * u2 / 720.0
    direct = (1.0 - np.cos(safe)) / (safe * safe)
    out = np.where(small, series, direct)
    return out


def _one_minus_sinc_over_sq(u):
    """(1 - sin(u)/u)/u**2 with series near 0 (used by the triangular-cf
    self-convolution)."""
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < _SMALL
    safe = np.where(small, 1.0, u)
    u2 = u * u
    series = 1.0 / 6.0 - u2 / 120.0 + u2 * u2 / 5040.0
    direct = (1.0 - np.sin(safe) / safe) / (safe * safe)
    out = np.where(small, series, direct)
    return out


def _require_positive(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise InvalidParameterError(f"{name} must be a positive finite real, got {value!r}")
    return value


# ---------------------------------------------------------------------------
# catalog constructors (dim = 1)
# ---------------------------------------------------------------------------

def make_uniform(halfwidth: float) -> SourceDistribution:
    """Uniform distribution on [-h, h]; cf(t) = sin(ht)/(ht)."""
    h = _require_positive("halfwidth", halfwidth)

    def density(x):
        x = np.asarray(x, dtype=float)
        out = np.where(np.abs(x) <= h, 1.0 / (2.0 * h), 0.0)
        return float(out) if out.ndim == 0 else out

    def cf(t):
        out = _sinc(np.asarray(t, dtype=float) * h)
        return float(out) if out.ndim == 0 else out

    def cf_grad(t):
        out = h * _sinc_prime(np.asarray(t, dtype=float) * h)
        return float(out) if out.ndim == 0 else out

    def cf_second(t):
        out = h * h * _sinc_second(np.asarray(t, dtype=float) * h)
        return float(out) if out.ndim == 0 else out

    def self_convolution(y):
        y = np.asarray(y, dtype=float)
        out = np.maximum(2.0 * h - np.abs(y), 0.0) / (4.0 * h * h)
        return float(out) if out.ndim == 0 else out

    def sampler(rng, size):
        return rng.uniform(-h, h, size)

    return SourceDistribution(
        dim=1,
        density=density,
        cf=cf,
        cf_grad=cf_grad,
        cf_second=cf_second,
        abs_moment1=h / 2.0,
        second_moment=h * h / 3.0,
        abs_moment3=h ** 3 / 4.0,
        flags=DistFlags(
            symmetric_about_0=True,
            bounded_variation_density=True,
            cf_nonnegative=False,
            density_continuous=False,
            cf_integrable=False,
            cf_square_integrable=True,
        ),
        cf_decay=DecayEnvelope("power", coeff=1.0 / h, alpha=1.0, oscillatory=True),
        density_decay=DecayEnvelope("compact", radius=h),
        self_convolution=self_convolution,
        sampler=sampler,
        label=f"uniform:h={h:g}",
    )


def make_laplace(scale: float) -> SourceDistribution:
    """Two-sided exponential with density exp(-|x|/b)/(2b); cf(t) = 1/(1+b^2 t^2)."""
    b = _require_positive("scale", scale)

    def density(x):
        x = np.asarray(x, dtype=float)
        out = np.exp(-np.abs(x) / b) / (2.0 * b)
        return float(out) if out.ndim == 0 else out

    def cf(t):
        t = np.asarray(t, dtype=float)
        out = 1.0 / (1.0 + (b * t) ** 2)
        return float(out) if out.ndim == 0 else out

    def cf_grad(t):
        t = np.asarray(t, dtype=float)
        out = -2.0 * b * b * t / (1.0 + (b * t) ** 2) ** 2
        return float(out) if out.ndim == 0 else out

    def cf_second(t):
        t = np.asarray(t, dtype=float)
        bt2 = (b * t) ** 2
        out = -2.0 * b * b * (1.0 - 3.0 * bt2) / (1.0 + bt2) ** 3
        return float(out) if out.ndim == 0 else out

    def self_convolution(y):
        y = np.asarray(y, dtype=float)
        a = np.abs(y) / b
        out = (1.0 + a) * np.exp(-a) / (4.0 * b)
        return float(out) if out.ndim == 0 else out

    def sampler(rng, size):
        return rng.laplace(0.0, b, size)

    return SourceDistribution(
        dim=1,
        density=density,
        cf=cf,
        cf_grad=cf_grad,
        cf_second=cf_second,
        abs_moment1=b,
        second_moment=2.0 * b * b,
        abs_moment3=6.0 * b ** 3,
        flags=DistFlags(
            symmetric_about_0=True,
            bounded_variation_density=True,
            cf_nonnegative=True,
        ),
        cf_decay=DecayEnvelope("power", coeff=1.0 / (b * b), alpha=2.0),
        density_decay=DecayEnvelope("exp", coeff=1.0 / (2.0 * b), rate=1.0 / b),
        self_convolution=self_convolution,
        sampler=sampler,
        label=f"laplace:b={b:g}",
    )


def make_gaussian(sigma: float) -> SourceDistribution:
    """Centered Gaussian with standard deviation sigma; cf(t) = exp(-sigma^2 t^2/2)."""
    s = _require_positive("sigma", sigma)
    s2 = s * s

    def density(x):
        x = np.asarray(x, dtype=float)
        out = np.exp(-x * x / (2.0 * s2)) / (s * _SQRT2PI)
        return float(out) if out.ndim == 0 else out

    def cf(t):
        t = np.asarray(t, dtype=float)
        out = np.exp(-0.5 * s2 * t * t)
        return float(out) if out.ndim == 0 else out

    def cf_grad(t):
        t = np.asarray(t, dtype=float)
        out = -s2 * t * np.exp(-0.5 * s2 * t * t)
        return float(out) if out.ndim == 0 else out

    def cf_second(t):
        t = np.asarray(t, dtype=float)
        out = s2 * (s2 * t * t - 1.0) * np.exp(-0.5 * s2 * t * t)
        return float(out) if out.ndim == 0 else out

    def self_convolution(y):
        y = np.asarray(y, dtype=float)
        v = 2.0 * s2
        out = np.exp(-y * y / (2.0 * v)) / math.sqrt(v) / _SQRT2PI
        return float(out) if out.ndim == 0 else out

    def sampler(rng, size):
        return rng.normal(0.0, s, size)

    return SourceDistribution(
        dim=1,
        density=density,
        cf=cf,
        cf_grad=cf_grad,
        cf_second=cf_second,
        abs_moment1=s * math.sqrt(2.0 / math.pi),
        second_moment=s2,
        abs_moment3=2.0 * math.sqrt(2.0) * s ** 3 / math.sqrt(math.pi),
        flags=DistFlags(
            symmetric_about_0=True,
            bounded_variation_density=True,
            cf_nonnegative=True,
        ),
        cf_decay=DecayEnvelope("gauss", coeff=1.0, rate=0.5 * s2),
        density_decay=DecayEnvelope("gauss", coeff=1.0 / (s * _SQRT2PI), rate=0.5 / s2),
        self_convolution=self_convolution,
        sampler=sampler,
        label=f"gaussian:sigma={s:g}",
    )


def make_fejer(support_radius: float) -> SourceDistribution:
    """Distribution whose cf is the triangle (1 - |t|/T)+ supported on [-T, T].

    Density (1 - cos(Tx))/(pi T x^2); the first absolute moment is infinite,
    so ``abs_moment1`` is None and operations that need it must reject this
    entry explicitly.
    """
    T = _require_positive("support_radius", support_radius)

    def density(x):
        x = np.asarray(x, dtype=float)
        out = (T / math.pi) * _one_minus_cos_over_sq(T * x)
        return float(out) if out.ndim == 0 else out

    def cf(t):
        t = np.asarray(t, dtype=float)
        out = np.maximum(1.0 - np.abs(t) / T, 0.0)
        return float(out) if out.ndim == 0 else out

    def cf_grad(t):
        # defined away from the kinks at 0 and +-T; the convention at the
        # isolated kink points (value 0 at t=0, one-sided slope elsewhere)
        # only affects sets of measure zero in the integrals that use it
        t = np.asarray(t, dtype=float)
        out = np.where(np.abs(t) < T, -np.sign(t) / T, 0.0)
        return float(out) if out.ndim == 0 else out

    def self_convolution(y):
        y = np.asarray(y, dtype=float)
        out = (2.0 * T / math.pi) * _one_minus_sinc_over_sq(T * y)
        return float(out) if out.ndim == 0 else out

    def sampler(rng, size):
        return _fejer_rejection_sample(rng, T, size)

    return SourceDistribution(
        dim=1,
        density=density,
        cf=cf,
        cf_grad=cf_grad,
        cf_second=None,
        abs_moment1=None,
        second_moment=None,
        abs_moment3=math.inf,
        cf_support_radius=T,
        cf_support_box=(T,),
        flags=DistFlags(
            symmetric_about_0=True,
            bounded_variation_density=True,
            cf_nonnegative=True,
        ),
        cf_decay=DecayEnvelope("compact", radius=T),
        density_decay=DecayEnvelope("power", coeff=2.0 / (math.pi * T), alpha=2.0),
        self_convolution=self_convolution,
        sampler=sampler,
        label=f"fejer:T={T:g}",
    )


def _fejer_rejection_sample(rng, T: float, size) -> np.ndarray:
    """Rejection sampler under the envelope min(T/(2 pi), 2/(pi T x^2)).

    The envelope splits at |x| = 2/T into a flat cap and 1/x^2 tails with
    equal mass 2/pi each; acceptance probability is pi/4.
    """
    n = int(np.prod(size)) if not np.isscalar(size) else int(size)
    x0 = 2.0 / T
    cap = T / (2.0 * math.pi)
    out = np.empty(n)
    filled = 0
    while filled < n:
        m = max(1024, int(1.5 * (n - filled)))
        pick_tail = rng.random(m) < 0.5
        u = rng.random(m)
        x = np.where(pick_tail,
                     x0 / np.maximum(u, 1e-300),
                     (2.0 * u - 1.0) * x0)
        sign = np.where(rng.random(m) < 0.5, -1.0, 1.0)
        x = np.where(pick_tail, sign * x, x)
        env = np.where(np.abs(x) <= x0, cap, 2.0 / (math.pi * T * x * x))
        p = (T / math.pi) * _one_minus_cos_over_sq(T * x)
        accept = rng.random(m) * env <= p
        got = x[accept]
        take = min(n - filled, got.size)
        out[filled:filled + take] = got[:take]
        filled += take
    return out.reshape(size) if not np.isscalar(size) else out


# ---------------------------------------------------------------------------
# products (dim >= 2)
# ---------------------------------------------------------------------------

def product(components: Sequence[SourceDistribution]) -> SourceDistribution:
    """Coordinate-wise product of one-dimensional catalog entries.

    Points are arrays with the coordinate axis last: shape (..., d) in,
    shape (...) out.  The component list is retained so lattice sums and the
    smoothing engine can exploit separability.
    """
    comps = tuple(components)
    if not comps:
        raise InvalidParameterError("product requires at least one component")
    for c in comps:
        if c.dim != 1:
            raise InvalidParameterError("product components must be one-dimensional")
    d = len(comps)

    def density(x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != d:
            raise InvalidParameterError(f"expected points with last axis {d}")
        out = np.ones(x.shape[:-1])
        for i, c in enumerate(comps):
            out = out * c.density(x[..., i])
        return float(out) if out.ndim == 0 else out

    def cf(t):
        t = np.asarray(t, dtype=float)
        if t.shape[-1] != d:
            raise InvalidParameterError(f"expected points with last axis {d}")
        out = np.ones(t.shape[:-1])
        for i, c in enumerate(comps):
            out = out * c.cf(t[..., i])
        return float(out) if out.ndim == 0 else out

    have_grads = all(c.cf_grad is not None for c in comps)

    def cf_grad(t):
        t = np.asarray(t, dtype=float)
        vals = [c.cf(t[..., i]) for i, c in enumerate(comps)]
        grads = []
        for i, c in enumerate(comps):
            g = c.cf_grad(t[..., i])
            for j in range(d):
                if j != i:
                    g = g * vals[j]
            grads.append(g)
        return np.stack(grads, axis=-1)

    all_compact = all(c.cf_support_radius is not None for c in comps)
    box = tuple(c.cf_support_radius for c in comps) if all_compact else None
    # smallest Euclidean ball containing the support box
    radius = math.sqrt(sum(r * r for r in box)) if all_compact else None

    abs1 = None
    if all(c.abs_moment1 is not None for c in comps):
        # finite upper bound sum E|X_i| >= E|X|; exact value is not closed-form
        abs1 = sum(c.abs_moment1 for c in comps)
    m2 = None
    if all(c.second_moment is not None for c in comps):
        m2 = sum(c.second_moment for c in comps)

    def sampler(rng, size):
        cols = [c.sampler(rng, size) for c in comps]
        return np.stack(cols, axis=-1)

    have_samplers = all(c.sampler is not None for c in comps)

    return SourceDistribution(
        dim=d,
        density=density if all(c.density is not None for c in comps) else None,
        cf=cf,
        cf_grad=cf_grad if have_grads else None,
        cf_second=None,
        abs_moment1=abs1,
        second_moment=m2,
        abs_moment3=None,
        cf_support_radius=radius,
        cf_support_box=box,
        flags=DistFlags(
            symmetric_about_0=all(c.flags.symmetric_about_0 for c in comps),
            bounded_variation_density=all(c.flags.bounded_variation_density for c in comps),
            cf_nonnegative=all(c.flags.cf_nonnegative for c in comps),
            density_continuous=all(c.flags.density_continuous for c in comps),
            cf_integrable=all(c.flags.cf_integrable for c in comps),
            cf_square_integrable=all(c.flags.cf_square_integrable for c in comps),
        ),
        sampler=sampler if have_samplers else None,
        components=comps,
        label="product:" + ",".join(c.label for c in comps),
    )


# ---------------------------------------------------------------------------
# noises
# ---------------------------------------------------------------------------

def bernoulli_noise(dim: int = 1) -> NoiseDistribution:
    """Coordinates i.i.d. +-1 with probability 1/2; cf v(t) = cos(t_1)...cos(t_d)."""
    d = int(dim)
    if d < 1:
        raise InvalidParameterError("dim must be a positive integer")

    def cf(t):
        t = np.asarray(t, dtype=float)
        if d == 1:
            out = np.cos(t)
        else:
            if t.shape[-1] != d:
                raise InvalidParameterError(f"expected points with last axis {d}")
            out = np.prod(np.cos(t), axis=-1)
        return float(out) if np.ndim(out) == 0 else out

    def sampler(rng, size):
        shape = (size, d) if d > 1 else size
        return rng.integers(0, 2, shape) * 2.0 - 1.0

    def sum_sampler(rng, size, n):
        # sum of n i.i.d. +-1 equals 2*Binomial(n, 1/2) - n, per coordinate
        shape = (size, d) if d > 1 else size
        return 2.0 * rng.binomial(n, 0.5, shape) - float(n)

    return NoiseDistribution(
        dim=d,
        density=None,
        cf=cf,
        cf_grad=None,
        abs_moment1=math.sqrt(d),
        second_moment=float(d),
        abs_moment3=1.0 if d == 1 else None,
        flags=DistFlags(
            symmetric_about_0=True,
            bounded_variation_density=False,
            cf_nonnegative=False,
            density_continuous=False,
            cf_integrable=False,
            cf_square_integrable=False,
        ),
        sampler=sampler,
        label="bernoulli" if d == 1 else f"bernoulli:d={d}",
        beta3=1.0 if d == 1 else None,
        is_symmetric_bernoulli=True,
        zero_atom_free=True,
        sum_sampler=sum_sampler,
    )


def as_noise(dist: SourceDistribution, beta3_value: Optional[float] = None,
             tol: float = 1e-10) -> NoiseDistribution:
    """Promote a symmetric unit-variance source distribution to a noise law.

    Isotropy (unit variance per coordinate) is required; the check is
    analytic for catalog entries via the stored second moment.
    """
    if dist.dim != 1:
        raise InvalidParameterError("as_noise currently supports dim-1 entries")
    if dist.second_moment is None:
        raise UnsupportedError(f"{dist.label}: second moment unavailable, cannot be a noise")
    if abs(dist.second_moment - 1.0) > tol:
        raise InvalidParameterError(
            f"{dist.label}: noise must be isotropic (unit variance), "
            f"got E X^2 = {dist.second_moment!r}")
    if not dist.flags.symmetric_about_0:
        raise UnsupportedError(f"{dist.label}: noise catalog requires symmetry about 0")
    b3 = beta3_value if beta3_value is not None else dist.abs_moment3

    def sum_sampler(rng, size, n, _s=dist.sampler):
        chunk = 16384
        out = np.empty(size)
        done = 0
        while done < size:
            m = min(chunk, size - done)
            out[done:done + m] = _s(rng, (m, n)).sum(axis=1)
            done += m
        return out

    return NoiseDistribution(
        dim=1,
        density=dist.density,
        cf=dist.cf,
        cf_grad=dist.cf_grad,
        cf_second=dist.cf_second,
        abs_moment1=dist.abs_moment1,
        second_moment=dist.second_moment,
        abs_moment3=dist.abs_moment3,
        cf_support_radius=dist.cf_support_radius,
        cf_support_box=dist.cf_support_box,
        cf_decay=dist.cf_decay,
        density_decay=dist.density_decay,
        self_convolution=dist.self_convolution,
        sampler=dist.sampler,
        components=dist.components,
        label=dist.label,
        flags=dist.flags,
        beta3=b3,
        is_symmetric_bernoulli=False,
        zero_atom_free=dist.density is not None,
        sum_sampler=sum_sampler if dist.sampler is not None else None,
    )


def uniform_noise() -> NoiseDistribution:
    """Isotropic uniform noise on [-sqrt(3), sqrt(3)] (unit variance)."""
    return as_noise(make_uniform(math.sqrt(3.0)))


def gaussian_noise() -> NoiseDistribution:
    """Standard Gaussian noise."""
    return as_noise(make_gaussian(1.0))


# ---------------------------------------------------------------------------
# third absolute moment
# ---------------------------------------------------------------------------

def beta3(noise: SourceDistribution) -> float:
    """E|X|^3 for a one-dimensional law: closed form for catalog entries,
    adaptive quadrature otherwise.  Raises :class:`UnsupportedError` when the
    moment is infinite or cannot be computed."""
    if noise.dim != 1:
        raise UnsupportedError("beta3 is implemented for dim-1 laws only")
    m3 = noise.abs_moment3
    if m3 is not None:
        if math.isinf(m3):
            raise UnsupportedError(f"{noise.label}: third absolute moment is infinite")
        return float(m3)
    if noise.density is None:
        raise UnsupportedError(f"{noise.label}: no density and no stored third moment")
    val, err = quad(lambda x: abs(x) ** 3 * noise.density(x), -np.inf, np.inf, limit=400)
    if not math.isfinite(val) or err > 1e-6 * max(1.0, abs(val)):
        raise UnsupportedError(f"{noise.label}: third-moment quadrature did not converge")
    return float(val)
