"""Block summation with certified tails and sequence extrapolation.

The lattice and smoothing engines reduce their infinite sums to one-sided
series over k = 1, 2, ...  Terms with fast (exponential) decay are summed
directly until an integral-test bound certifies the omitted tail.  Slowly
decaying series (algebraic envelopes, possibly with unit-modulus phases) are
handled by extrapolating the sequence of partial sums: Wynn's epsilon
algorithm removes geometric-times-algebraic remainders, a Neville/Richardson
table in 1/k removes purely algebraic ones.  Both run vectorized over a
leading batch axis, so a whole evaluation grid is extrapolated at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["SeriesResult", "sum_series_blocks", "wynn_epsilon", "richardson_inv_k"]


@dataclass(frozen=True)
class SeriesResult:
    value: np.ndarray | complex
    truncation_index: int
    tail_estimate: float
    terms_used: int
    extrapolated: bool


def certified_tail(mags, block_width: int):
    """Tail bound from fitted decay of absolute block sums, or None.

    ``mags`` is the history of (k_end, sum of |terms| in block).  Two routes
    certify: a geometric fit when successive ratios stay below one (covers
    exponential and faster decay), and a power fit by least squares over the
    last five blocks, demanding a clean fit (log-residual <= 0.15) and a
    safely summable exponent (alpha >= 1.15).  Three-point fits are too noisy:
    envelopes like |sin(eps k)|/k can masquerade as summable over short
    baselines, which this rule rejects.
    """
    if len(mags) < 3:
        return None
    if mags[-1][1] == 0.0 and mags[-2][1] == 0.0:
        return 0.0
    tail = (mags[-1][1] / block_width) * mags[-1][0]
    recent = [m for _, m in mags[-4:]]
    if all(m > 0 for m in recent):
        # genuine geometric decay keeps the block ratio constant (or falling);
        # algebraic decay masquerading at small k shows climbing ratios and
        # must fall through to the power fit, whose bound integrates the tail
        ratios = [b / a for a, b in zip(recent, recent[1:])]
        if max(ratios) <= 0.7 and all(r2 <= r1 * 1.02 for r1, r2 in
                                      zip(ratios, ratios[1:])):
            r = min(max(ratios), 0.95)
            return mags[-1][1] * r / (1.0 - r)
    if len(mags) < 5:
        return None
    ks = np.array([k for k, _ in mags[-5:]], dtype=float)
    ms = np.array([m for _, m in mags[-5:]], dtype=float)
    if np.any(ms <= 0.0) or np.any(np.diff(ms) > 0.0):
        return None
    A = np.vstack([np.ones(5), np.log(ks)]).T
    coef, *_ = np.linalg.lstsq(A, np.log(ms), rcond=None)
    resid = float(np.max(np.abs(A @ coef - np.log(ms))))
    alpha = -float(coef[1])
    if resid > 0.15 or alpha < 1.15:
        return None
    return 1.5 * tail / (alpha - 1.0)


def wynn_epsilon(partials: np.ndarray):
    """Shanks-type extrapolation of partial sums via the epsilon algorithm.

    partials has the sequence along the last axis.  Returns (value, err)
    where err is a per-element accuracy estimate taken from the convergence
    of the even epsilon columns.
    """
    S = np.asarray(partials, dtype=complex)
    m = S.shape[-1]
    scale = np.maximum(np.abs(S[..., -1]), 1e-300)
    val = S[..., -1].copy()
    err = np.abs(S[..., -1] - S[..., -2]) if m >= 2 else np.full(S.shape[:-1], np.inf)
    prev = np.zeros_like(S)
    curr = S.copy()
    prev_even_last = S[..., -1].copy()
    for k in range(m - 1):
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            diff = curr[..., 1:] - curr[..., :-1]
            tiny = np.abs(diff) < 1e-300 * scale[..., None]
            safe = np.where(tiny, 1.0, diff)
            nxt = prev[..., 1:curr.shape[-1]] + np.where(tiny, np.inf, 1.0 / safe)
        prev, curr = curr, nxt
        if curr.shape[-1] < 1:
            break
        if k % 2 == 1:  # curr now holds an even epsilon column (estimates)
            with np.errstate(invalid="ignore"):
                cand = curr[..., -1]
                cand_err = np.abs(cand - prev_even_last)
                if curr.shape[-1] >= 2:
                    cand_err = cand_err + np.abs(curr[..., -1] - curr[..., -2])
            ok = np.isfinite(cand) & (cand_err < err)
            val = np.where(ok, cand, val)
            err = np.where(ok, cand_err, err)
            prev_even_last = np.where(np.isfinite(cand), cand, prev_even_last)
        if curr.shape[-1] < 3:
            break
    return val, err


def richardson_inv_k(partials: np.ndarray, ks: np.ndarray, max_levels: int = 12):
    """Neville extrapolation of S(k) to k = infinity, polynomial in 1/k.

    Suits monotone algebraic tails (remainder c1/k + c2/k^2 + ...).  Returns
    (value, err) with err from the last stable table level.
    """
    S = np.asarray(partials, dtype=complex)
    x = 1.0 / np.asarray(ks, dtype=float)
    m = S.shape[-1]
    # T[..., j] holds the Neville value P_{j-level..j}(0); entries below the
    # current level are stale and never read
    T = S.copy()
    val = S[..., -1].copy()
    err = np.abs(S[..., -1] - S[..., -2]) if m >= 2 else np.full(S.shape[:-1], np.inf)
    levels = min(max_levels, m - 1)
    for level in range(1, levels + 1):
        jj = np.arange(level, m)
        denom = x[jj] - x[jj - level]
        Tn = T.copy()
        Tn[..., jj] = (x[jj] * T[..., jj - 1] - x[jj - level] * T[..., jj]) / denom
        T = Tn
        cand = T[..., -1]
        if m - 1 > level:
            cand_err = np.abs(T[..., -1] - T[..., -2])
        else:
            cand_err = np.abs(cand - val)
        ok = np.isfinite(cand) & (cand_err < err)
        val = np.where(ok, cand, val)
        err = np.where(ok, cand_err, err)
    return val, err


def _extrapolate(partials: np.ndarray, ks: np.ndarray):
    """Run both extrapolations and keep the per-element trustworthy one.

    Self-reported errors alone cannot arbitrate: epsilon locks onto false
    plateaus on monotone-plus-jitter series, Richardson onto slow phase
    rotations, both while claiming high accuracy.  A converged extrapolation,
    however, is stable under shrinking the checkpoint window, so each
    method's effective error is its self-estimate widened by the shift
    observed when re-running on the first two thirds of the window.
    """
    m = partials.shape[-1]
    cut = max(5, (2 * m) // 3)
    v_e, e_e = wynn_epsilon(partials)
    v_r, e_r = richardson_inv_k(partials, ks)
    if cut < m:
        v_e2, _ = wynn_epsilon(partials[..., :cut])
        v_r2, _ = richardson_inv_k(partials[..., :cut], ks[:cut])
        e_e = np.maximum(e_e, np.abs(v_e - v_e2))
        e_r = np.maximum(e_r, np.abs(v_r - v_r2))
    use_e = e_e <= e_r
    val = np.where(use_e, v_e, v_r)
    err = np.where(use_e, e_e, e_r)
    err = np.maximum(err, 8.0 * np.finfo(float).eps * np.abs(val))
    return val, err


def resonance_floor(cinc: np.ndarray, k_last: float) -> np.ndarray:
    """Honesty floor for extrapolated tails of slowly rotating phased series.

    ``cinc`` holds the complex per-k increments of the final block, batch
    axis first.  A tail whose phase rotation theta satisfies
    theta * k_last >> 1 is resolved inside the budget and extrapolation can
    see it; a slower mode leaves an O(a log(1/(theta k))) remainder of an
    a/k-type tail that no window statistic can detect, so the declared error
    must not fall below that scale.  The increments generally superpose two
    rotation modes (phase +- an internal cf frequency), so the slowest mode
    is taken from a two-mode Prony fit of the linear recurrence
    c_{j+2} = alpha c_{j+1} + beta c_j rather than from the lag-1 rotation,
    which averages the modes and can hide a resonant one.
    """
    c = np.asarray(cinc, dtype=complex)
    if c.shape[-1] < 8:
        return np.zeros(c.shape[:-1])
    c0, c1, c2 = c[..., :-2], c[..., 1:-1], c[..., 2:]
    # least-squares normal equations for the two-term recurrence, per batch:
    # b1 = alpha a11 + beta conj(a12),  b2 = alpha a12 + beta a22
    a11 = (np.abs(c1) ** 2).sum(axis=-1)
    a22 = (np.abs(c0) ** 2).sum(axis=-1)
    a12 = (c1 * np.conj(c0)).sum(axis=-1)
    b1 = (c2 * np.conj(c1)).sum(axis=-1)
    b2 = (c2 * np.conj(c0)).sum(axis=-1)
    det = a11 * a22 - np.abs(a12) ** 2
    scale = np.maximum(a11 * a22, 1e-300)
    degenerate = np.abs(det) <= 1e-10 * scale
    det_safe = np.where(degenerate, 1.0, det)
    alpha = (b1 * a22 - b2 * np.conj(a12)) / det_safe
    beta = (b2 * a11 - b1 * a12) / det_safe
    disc = np.sqrt(alpha * alpha + 4.0 * beta)
    z1 = 0.5 * (alpha + disc)
    z2 = 0.5 * (alpha - disc)

    def mode_angle(z):
        ok = (np.abs(z) > 0.5) & (np.abs(z) < 1.5)
        return np.where(ok, np.abs(np.angle(z)), np.pi)

    theta = np.minimum(mode_angle(z1), mode_angle(z2))
    # fall back to the mean rotation when the 2x2 system is singular
    # (single-mode or negligible series)
    num = (c1 * np.conj(c0)).sum(axis=-1)
    rho = num / np.where(a22 <= 1e-300, 1.0, a22)
    theta = np.where(degenerate, np.abs(np.angle(rho)), theta)
    # amplitude from the trailing quarter: a block whose magnitudes die out
    # inside the window has no unresolved tail regardless of its phase
    qtr = max(2, c.shape[-1] // 4)
    amp = np.abs(c[..., -qtr:]).mean(axis=-1)   # ~ a / k_last for an a/k tail
    u = theta * float(k_last)
    growth = 0.5 + np.log1p(6.0 / np.clip(u, 1e-3, 6.0))
    # below u ~ 6 the tail is undetectable in principle; above it epsilon
    # converges but only gradually as the mode leaves the resonance, with
    # practical accuracy improving like (6/u)^4 (measured against exact
    # mixtures near density jumps)
    damp = np.minimum(1.0, (6.0 / np.maximum(u, 1e-3)) ** 4)
    floor = amp * float(k_last) * growth * damp
    return np.where(amp * float(k_last) > 1e-300, floor, 0.0)


def extrapolate_dual_stride(unit_partials, unit_ks, block_partials, block_ks):
    """Extrapolate over both checkpoint families and keep the per-element
    better one.

    Unit-stride windows preserve phase signatures (aliasing at block stride
    can rotate a slow oscillation onto a false plateau); block-stride windows
    span a wide k-range, which conditions the 1/k polynomial extrapolation
    and averages out integer-frequency jitter.  The stability-gated error
    estimates from :func:`_extrapolate` make the choice safe.
    """
    v1, e1 = _extrapolate(np.asarray(unit_partials, dtype=complex),
                          np.asarray(unit_ks, dtype=float))
    v2, e2 = _extrapolate(np.asarray(block_partials, dtype=complex),
                          np.asarray(block_ks, dtype=float))
    use1 = e1 <= e2
    return np.where(use1, v1, v2), np.where(use1, e1, e2)


def sum_series_blocks(
    term_block: Callable[[int, int], np.ndarray],
    tol: float,
    k_start: int = 1,
    block: int = 64,
    k_cap: int = 1_000_000,
    extrap_window: int = 41,
    max_blocks: int = 192,
) -> SeriesResult:
    """Sum a one-sided series sum_{k >= k_start} t_k with certified accuracy.

    ``term_block(k0, k1)`` returns the terms for k in [k0, k1) as an array
    whose last axis has length k1 - k0 (leading axes are a shared evaluation
    batch).  Strategy: accumulate blocks; stop as soon as an algebraic/
    exponential envelope fitted to the block magnitudes certifies a tail
    below ``tol``; otherwise extrapolate the checkpointed partial sums.
    The reported ``tail_estimate`` is honest in both cases.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    partials = []
    ks = []
    mags = []  # (k_last, max-abs block sum)
    total = None
    k0 = k_start
    blocks_done = 0
    while k0 <= k_cap and blocks_done < max_blocks:
        k1 = min(k0 + block, k_cap + 1)
        T = np.asarray(term_block(k0, k1))
        bsum = T.sum(axis=-1)
        total = bsum if total is None else total + bsum
        babs = float(np.max(np.abs(T).sum(axis=-1)))
        mags.append((k1 - 1, babs))
        partials.append(np.array(total, copy=True))
        ks.append(k1 - 1)
        blocks_done += 1
        k0 = k1
        tail = certified_tail(mags, block)
        if tail is not None and tail <= tol:
            kc = mags[-1][0]
            return SeriesResult(total, kc, tail, kc - k_start + 1, False)
    # extrapolation path over two checkpoint families: the trailing uniform
    # window keeps phase signatures clean for the epsilon algorithm, a
    # geometric-in-k subsample of the whole history keeps the 1/k Neville
    # table well conditioned for monotone tails
    w = min(extrap_window, len(partials))
    P = np.stack(partials[-w:], axis=-1)
    K = np.asarray(ks[-w:], dtype=float)
    val, err = _extrapolate(P, K)
    if len(partials) >= 12:
        karr = np.asarray(ks, dtype=float)
        targets = np.geomspace(karr[len(karr) // 4], karr[-1], min(33, len(karr)))
        idx = np.unique(np.searchsorted(karr, targets).clip(0, len(karr) - 1))
        if idx.size >= 6:
            Pg = np.stack([partials[i] for i in idx], axis=-1)
            vg, eg = _extrapolate(Pg, karr[idx])
            use_g = eg < err
            val = np.where(use_g, vg, val)
            err = np.where(use_g, eg, err)
    tail = float(np.max(err)) * 4.0
    if np.ndim(val) == 0:
        val = complex(val)
    return SeriesResult(val, ks[-1], tail, ks[-1] - k_start + 1, True)
