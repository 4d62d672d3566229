"""Diagonal heat semigroup of the Stokes operator and estimate scanners.

e^{-tA} multiplies each eigencoefficient by exp(-t lambda_m), so the
semigroup law, commutation with every spectral multiplier, and L^2
contractivity hold to rounding.  The interesting content is quantitative:
the scanners below measure smoothing and boundedness estimates as ratios of
quadrature norms against the claimed time power, reporting the measured
constant and the fitted log-log slope instead of asserting any particular C.

Scans never assert sharpness: on a truncated spectrum a t -> 0 blowup
saturates once 1/t passes lambda_max, so slope assertions made by callers
should be one-sided (measured rate no steeper than claimed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .basis import Basis, PolarGrid, SpectralField, mode_values_at
from .dyadic import DEFAULT_PARTITION, DyadicPartition
from .errors import ResolutionError
from .norms import BesovIndex, besov_norm, dual_pairing, gradient_lp_norm, lp_norm

KERNEL_TAIL_TOL = 1e-12


def heat_apply(f: SpectralField, t: float) -> SpectralField:
    """e^{-tA} f: coefficient-wise decay exp(-t lambda); t = 0 is the identity."""
    t = float(t)
    if t < 0.0:
        raise ValueError("heat flow runs forward only (t >= 0)")
    if t == 0.0:
        return f.copy()
    return SpectralField(f.basis, f.coeffs * np.exp(-t * f.basis.lam))


def kernel_tail_threshold(basis: Basis, tol: float = KERNEL_TAIL_TOL) -> float:
    """Smallest t at which the truncated kernel sum is tail-resolved:
    exp(-t lambda_max) <= tol relative to the leading exp(-t lambda_min)."""
    return math.log(1.0 / tol) / (basis.lambda_max - basis.lambda_min)


def kernel_matrix(x, y, t: float, basis: Basis) -> np.ndarray:
    """Matrix-valued heat kernel sum_m e^{-t lambda_m} e_m(x) (x) e_m(y).

    Refuses t below the tail-resolution threshold: there the truncation
    error is not small relative to the kernel itself and the Gaussian-decay
    statements would be tested against noise.
    """
    t = float(t)
    t_min = kernel_tail_threshold(basis)
    if not t >= t_min:
        raise ResolutionError(
            f"kernel tail unresolved at t={t!r}: exp(-t lambda_max) exceeds "
            f"{KERNEL_TAIL_TOL:g} of the leading term; need t >= {t_min!r} "
            "at this truncation")
    ex = mode_values_at(basis, np.asarray(x, dtype=float))[0]   # (M, 2)
    ey = mode_values_at(basis, np.asarray(y, dtype=float))[0]
    w = np.exp(-t * basis.lam)
    return np.einsum("m,mi,mj->ij", w, ex, ey)


@dataclass(frozen=True)
class EstimateScan:
    """Evidence for one measured estimate: per-parameter left sides against
    the claimed model (right side with constant 1), the worst ratio, and a
    log-log slope where the parameter is a scale."""

    params: np.ndarray
    lhs: np.ndarray
    rhs_model: np.ndarray
    ratio: np.ndarray = field(init=False)
    slope: float | None = None
    slope_claimed: float | None = None
    skipped: int = 0

    def __post_init__(self):
        object.__setattr__(self, "ratio", self.lhs / self.rhs_model)

    @property
    def max_ratio(self) -> float:
        return float(self.ratio.max()) if self.ratio.size else 0.0

    def rows(self):
        for p, l, r, q in zip(self.params, self.lhs, self.rhs_model, self.ratio):
            yield float(p), float(l), float(r), float(q)

    def summary(self) -> dict:
        return {"max_ratio": self.max_ratio, "slope": self.slope,
                "slope_claimed": self.slope_claimed, "skipped": self.skipped}


def loglog_slope(x: np.ndarray, y: np.ndarray) -> float:
    """Least-squares slope of log y against log x (nan if x has no spread)."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    lx = lx - lx.mean()
    denom = np.dot(lx, lx)
    if denom == 0.0:
        return math.nan
    return float(np.dot(lx, ly - ly.mean()) / denom)


def _nonzero_samples(samples, norms):
    keep, kept_norms, skipped = [], [], 0
    for f, nf in zip(samples, norms):
        if nf > 0.0:
            keep.append(f)
            kept_norms.append(nf)
        else:
            skipped += 1
    return keep, np.array(kept_norms), skipped


def scan_besov_bounded(s: float, p: float, q: float, t_grid, samples,
                       grid: PolarGrid,
                       partition: DyadicPartition = DEFAULT_PARTITION) -> EstimateScan:
    """Ratios ||e^{-tA} f|| / ||f|| in the (s, p, q) block norm; the claimed
    model is boundedness (time power zero)."""
    t_grid = np.asarray(t_grid, dtype=float)
    if (t_grid <= 0.0).any():
        raise ValueError("t grid must be positive")
    idx = BesovIndex(s, p, q)
    denom = [besov_norm(f, idx, grid, partition).value for f in samples]
    samples, denom, skipped = _nonzero_samples(samples, denom)
    lhs = np.empty(t_grid.size)
    for i, t in enumerate(t_grid):
        lhs[i] = max(
            besov_norm(heat_apply(f, t), idx, grid, partition).value / nf
            for f, nf in zip(samples, denom))
    return EstimateScan(params=t_grid, lhs=lhs, rhs_model=np.ones_like(t_grid),
                        slope=loglog_slope(t_grid, lhs), slope_claimed=0.0,
                        skipped=skipped)


def scan_smoothing(s: float, s0: float, p: float, p0: float, t_grid, samples,
                   grid: PolarGrid, d: int = 2,
                   partition: DyadicPartition = DEFAULT_PARTITION) -> EstimateScan:
    """Smoothing estimate scan: left side ||e^{-tA} f|| in (s, p, 1) against
    t^(-(s-s0)/2 - (d/2)(1/p - 1/p0)) ||f|| in (s0, p0, inf).

    Requires s >= s0, p <= p0 and a nonnegative gap
    s - s0 - d (1/p - 1/p0); gap zero is plain boundedness, a negative gap
    is rejected (the estimate is not claimed there).
    """
    if s < s0:
        raise ValueError("smoothing scan requires s >= s0")
    if p > p0:
        raise ValueError("smoothing scan requires p <= p0")
    gap = (s - s0) - d * (1.0 / p - 1.0 / p0)
    if gap < 0.0:
        raise ValueError("smoothing gap s - s0 - d(1/p - 1/p0) must be >= 0")
    t_grid = np.asarray(t_grid, dtype=float)
    if (t_grid <= 0.0).any():
        raise ValueError("t grid must be positive")
    claimed = -0.5 * (s - s0) - 0.5 * d * (1.0 / p - 1.0 / p0)
    idx_l = BesovIndex(s, p, 1.0)
    idx_r = BesovIndex(s0, p0, math.inf)
    denom = [besov_norm(f, idx_r, grid, partition).value for f in samples]
    samples, denom, skipped = _nonzero_samples(samples, denom)
    lhs = np.empty(t_grid.size)
    for i, t in enumerate(t_grid):
        lhs[i] = max(
            besov_norm(heat_apply(f, t), idx_l, grid, partition).value / nf
            for f, nf in zip(samples, denom))
    return EstimateScan(params=t_grid, lhs=lhs, rhs_model=t_grid ** claimed,
                        slope=loglog_slope(t_grid, lhs), slope_claimed=claimed,
                        skipped=skipped)


def scan_gradient(p: float, t_grid, samples, grid: PolarGrid) -> EstimateScan:
    """Gradient smoothing: ||grad e^{-tA} f||_{L^p} against t^{-1/2} ||f||_{L^p}."""
    if not (1.0 < float(p) < math.inf):
        raise ValueError("gradient smoothing is claimed for 1 < p < inf")
    t_grid = np.asarray(t_grid, dtype=float)
    if (t_grid <= 0.0).any():
        raise ValueError("t grid must be positive")
    denom = [lp_norm(f, grid, p) for f in samples]
    samples, denom, skipped = _nonzero_samples(samples, denom)
    lhs = np.empty(t_grid.size)
    for i, t in enumerate(t_grid):
        lhs[i] = max(
            gradient_lp_norm(heat_apply(f, t), grid, p) / nf
            for f, nf in zip(samples, denom))
    return EstimateScan(params=t_grid, lhs=lhs, rhs_model=t_grid ** -0.5,
                        slope=loglog_slope(t_grid, lhs), slope_claimed=-0.5,
                        skipped=skipped)


def gradient_vs_besov(p: float, samples, grid: PolarGrid,
                      partition: DyadicPartition = DEFAULT_PARTITION) -> EstimateScan:
    """Measured constant in ||grad f||_{L^p} <= C ||f|| in the (1, p, 1) block
    norm, sample by sample (the parameter axis is the sample index)."""
    if not (1.0 < float(p) < math.inf):
        raise ValueError("the gradient block-norm bound is claimed for 1 < p < inf")
    idx = BesovIndex(1.0, p, 1.0)
    lhs, rhs = [], []
    skipped = 0
    for f in samples:
        nf = besov_norm(f, idx, grid, partition).value
        if nf == 0.0:
            skipped += 1
            continue
        lhs.append(gradient_lp_norm(f, grid, p))
        rhs.append(nf)
    lhs, rhs = np.array(lhs), np.array(rhs)
    return EstimateScan(params=np.arange(lhs.size, dtype=float), lhs=lhs,
                        rhs_model=rhs, skipped=skipped)


def weak_star_continuity(f: SpectralField, g: SpectralField, t_seq,
                         grid: PolarGrid,
                         partition: DyadicPartition = DEFAULT_PARTITION) -> np.ndarray:
    """Band-paired test of e^{-tA} f -> f: the dual pairing of the increment
    against g, one value per requested time."""
    t_seq = np.asarray(t_seq, dtype=float)
    out = np.empty(t_seq.size)
    for i, t in enumerate(t_seq):
        out[i] = dual_pairing(heat_apply(f, t) - f, g, grid, partition)
    return out
