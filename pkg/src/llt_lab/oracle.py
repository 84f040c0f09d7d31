"""Independent ground truth for the Fourier pipeline.

Under symmetric Bernoulli noise the normalized sum has the exact finite
mixture density

    p_n(x) = sqrt(n) * sum_j C(n,j) 2^-n  p(x sqrt(n) - (2j - n)),

computed here with log-domain binomial weights so n up to 10^4 stays stable.
For general noise a kernel-density Monte Carlo estimate with a counter-based
random stream provides a seeded, reproducible fallback.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import gammaln, logsumexp

from .distributions import SourceDistribution
from .errors import InvalidParameterError, UnsupportedError

__all__ = [
    "MixtureWeights",
    "mixture_weights",
    "exact_mixture_density",
    "exact_mixture_density_2d",
    "MonteCarloEstimate",
    "monte_carlo_density",
]

_MAX_2D_N = 256


@dataclass(frozen=True)
class MixtureWeights:
    """log C(n,j) - n log 2 for j = 0..n; exponentiated weights sum to 1."""

    n: int
    log_weights: np.ndarray

    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    def total(self) -> float:
        return float(math.exp(logsumexp(self.log_weights)))


def mixture_weights(n: int) -> MixtureWeights:
    if n < 0:
        raise InvalidParameterError("n must be nonnegative")
    j = np.arange(n + 1)
    lw = gammaln(n + 1) - gammaln(j + 1) - gammaln(n - j + 1) - n * math.log(2.0)
    return MixtureWeights(n, lw)


def exact_mixture_density(source: SourceDistribution, n: int, x) -> np.ndarray | float:
    """Exact density of (X + S_n)/sqrt(n) for symmetric Bernoulli steps S_n."""
    if source.dim != 1:
        raise InvalidParameterError("exact_mixture_density is one-dimensional")
    if source.density is None:
        raise UnsupportedError(f"{source.label}: no pointwise density")
    if n < 1:
        raise InvalidParameterError("n must be a positive integer")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    w = mixture_weights(n).weights()
    offsets = 2.0 * np.arange(n + 1) - n
    args = xs[:, None] * math.sqrt(n) - offsets[None, :]
    vals = math.sqrt(n) * (np.asarray(source.density(args), dtype=float) @ w)
    return float(vals[0]) if np.ndim(x) == 0 else vals


def exact_mixture_density_2d(source: SourceDistribution, n: int, x) -> float | np.ndarray:
    """Exact density of (X + S_n)/sqrt(n) in d = 2 for steps uniform on the
    corners {-1, 1}^2, as the full (n+1)^2-term double mixture."""
    if source.dim != 2 or source.components is None:
        raise InvalidParameterError("source must be a two-dimensional product")
    if n < 1:
        raise InvalidParameterError("n must be a positive integer")
    if n > _MAX_2D_N:
        raise UnsupportedError(f"n = {n} exceeds the 2-d mixture cap {_MAX_2D_N}")
    xs = np.atleast_2d(np.asarray(x, dtype=float))
    if xs.shape[-1] != 2:
        raise InvalidParameterError("points must have two coordinates")
    w = mixture_weights(n).weights()
    offsets = 2.0 * np.arange(n + 1) - n
    p1, p2 = (c.density for c in source.components)
    a1 = xs[..., 0][..., None] * math.sqrt(n) - offsets
    a2 = xs[..., 1][..., None] * math.sqrt(n) - offsets
    m1 = np.asarray(p1(a1), dtype=float) * w      # (..., n+1)
    m2 = np.asarray(p2(a2), dtype=float) * w
    vals = n * np.einsum("...i,...j->...", m1, m2)
    return float(vals[0]) if np.ndim(x) == 1 else vals


# ---------------------------------------------------------------------------
# Monte Carlo with a splittable counter-based stream
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MonteCarloEstimate:
    values: np.ndarray
    stderr: np.ndarray
    bandwidth: float
    samples: int
    seed: int


_CHUNK = 1 << 14


def _chunk_rng(seed: int, chunk_index: int) -> np.random.Generator:
    # independent Philox streams keyed by (seed, chunk); identical draws
    # regardless of execution order, so parallel evaluation stays bit-stable
    key = (int(seed) << 64) ^ (0x9E3779B97F4A7C15 * (chunk_index + 1))
    return np.random.Generator(np.random.Philox(key=key))


def _draw_z(model, n: int, m: int, rng) -> np.ndarray:
    source = model.source
    noise = model.noise
    x = source.sampler(rng, m)
    if noise.sum_sampler is not None:
        s = noise.sum_sampler(rng, m, n)
    else:
        s = noise.sampler(rng, (m, n)).sum(axis=1)
    return (x + s) / math.sqrt(n)


def monte_carlo_density(model, n: int, x_points, samples: int,
                        bandwidth: Optional[float] = None,
                        seed: int = 0) -> MonteCarloEstimate:
    """Gaussian-kernel density estimate of the smoothed law at ``x_points``.

    Deterministic for a given seed: the sample stream is generated in fixed
    chunks from counter-based generators.  Returns pointwise values and
    standard errors; the bandwidth used (Silverman's rule when not supplied)
    is recorded for reproducibility.
    """
    if samples < 1:
        raise InvalidParameterError("samples must be a positive integer")
    if n < 1:
        raise InvalidParameterError("n must be a positive integer")
    if model.source.sampler is None or (model.noise.sampler is None
                                        and model.noise.sum_sampler is None):
        raise UnsupportedError("samplers unavailable for source or noise")
    if model.dim != 1:
        raise UnsupportedError("monte_carlo_density is one-dimensional")
    xs = np.atleast_1d(np.asarray(x_points, dtype=float))

    z = np.empty(samples)
    done = 0
    chunk_index = 0
    while done < samples:
        m = min(_CHUNK, samples - done)
        rng = _chunk_rng(seed, chunk_index)
        z[done:done + m] = _draw_z(model, n, m, rng)
        done += m
        chunk_index += 1

    if bandwidth is None:
        sd = float(np.std(z))
        iqr = float(np.subtract(*np.percentile(z, [75, 25])))
        spread = min(sd, iqr / 1.34) if iqr > 0 else sd
        bandwidth = 0.9 * spread * samples ** (-0.2)
    h = float(bandwidth)
    if h <= 0:
        raise InvalidParameterError("bandwidth must be positive")

    vals = np.zeros(xs.size)
    sq = np.zeros(xs.size)
    norm = 1.0 / (h * math.sqrt(2.0 * math.pi))
    for i0 in range(0, samples, _CHUNK):
        zz = z[i0:i0 + _CHUNK]
        kern = norm * np.exp(-0.5 * ((xs[:, None] - zz[None, :]) / h) ** 2)
        vals += kern.sum(axis=1)
        sq += (kern * kern).sum(axis=1)
    vals /= samples
    var = sq / samples - vals * vals
    stderr = np.sqrt(np.maximum(var, 0.0) / samples)
    return MonteCarloEstimate(values=vals, stderr=stderr, bandwidth=h,
                              samples=int(samples), seed=int(seed))
