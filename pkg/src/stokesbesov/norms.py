"""L^p and dyadic-block (Besov-type) norms for disk velocity fields.

The homogeneous norm with indices (s, p, q) is the l^q aggregate of the band
values 2^(j s) ||phi_j(sqrt(A)) f||_{L^p}; on a finite spectrum only the
active bands contribute, everything else is exactly zero.  Band L^p norms go
through grid quadrature (never through coefficient shortcuts), so the same
code path is exercised whether or not a spectral identity happens to apply.

p = infinity and q = infinity are encoded as math.inf, never as a large
finite float.  The sup norm is approximated by a max over a refinement grid
three times denser in each direction; truncated fields have bounded
gradients, so the refinement error is controlled and documented rather than
hidden.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .basis import (GridVectorField, PolarGrid, SpectralField,
                    field_gradient_values, synthesize)
from .dyadic import DEFAULT_PARTITION, DyadicPartition, active_bands, apply_band, apply_window
from .errors import TruncationWarning

INF = math.inf


def critical_index(p: float, d: int = 2) -> float:
    """Scaling-critical regularity -1 + d/p for velocity data in d dimensions."""
    return -1.0 + d / p


def _check_p(p) -> float:
    p = float(p)
    if not (p >= 1.0):
        raise ValueError("integrability index p must lie in [1, inf]")
    return p


@dataclass(frozen=True)
class BesovIndex:
    """Index triple (s, p, q); p or q may be math.inf."""

    s: float
    p: float
    q: float

    def __post_init__(self):
        _check_p(self.p)
        if not (float(self.q) >= 1.0):
            raise ValueError("summation index q must lie in [1, inf]")


@dataclass(frozen=True)
class NormReport:
    """Band-by-band breakdown of one dyadic norm evaluation."""

    index: BesovIndex
    bands: tuple          # ((j, 2^{js} * band L^p value), ...)
    value: float

    def as_dict(self) -> dict:
        return {
            "s": self.index.s,
            "p": None if self.index.p == INF else self.index.p,
            "q": None if self.index.q == INF else self.index.q,
            "bands": [[j, v] for j, v in self.bands],
            "value": self.value,
        }


def lp_norm(v, grid: PolarGrid, p) -> float:
    """L^p norm of the pointwise velocity magnitude over the disk.

    Accepts a SpectralField (synthesized on the grid; on p = inf on the
    refined companion grid) or raw GridVectorField samples (p = inf then
    maximizes over the nodes the data lives on).
    """
    p = _check_p(p)
    if isinstance(v, SpectralField):
        if p == INF:
            v = synthesize(v, grid.refined())
        else:
            v = synthesize(v, grid)
    elif not isinstance(v, GridVectorField):
        raise TypeError("expected a SpectralField or GridVectorField")
    mag = v.magnitude()
    if p == INF:
        return float(mag.max())
    if v.grid.shape != grid.shape and v.grid.shape != grid.refined().shape:
        raise ValueError("grid samples do not match the quadrature grid")
    return float(np.sum(v.grid.weights * mag ** p) ** (1.0 / p))


def gradient_lp_norm(f: SpectralField, grid: PolarGrid, p) -> float:
    """L^p norm of the pointwise Frobenius magnitude of the velocity gradient."""
    p = _check_p(p)
    g = grid.refined() if p == INF else grid
    ten = field_gradient_values(f, g)
    mag = np.sqrt(np.sum(ten * ten, axis=(2, 3)))
    if p == INF:
        return float(mag.max())
    return float(np.sum(g.weights * mag ** p) ** (1.0 / p))


def _aggregate(values: np.ndarray, q: float) -> float:
    if values.size == 0:
        return 0.0
    if q == INF:
        return float(values.max())
    return float(np.sum(values ** q) ** (1.0 / q))


def besov_norm(f: SpectralField, idx: BesovIndex, grid: PolarGrid,
               partition: DyadicPartition = DEFAULT_PARTITION) -> NormReport:
    """Dyadic-block norm of a spectral field, with the per-band breakdown."""
    bands = []
    for j in active_bands(f.basis, partition):
        band_lp = lp_norm(apply_band(f, j, partition), grid, idx.p)
        bands.append((j, 2.0 ** (j * idx.s) * band_lp))
    vals = np.array([v for _, v in bands])
    return NormReport(index=idx, bands=tuple(bands), value=_aggregate(vals, idx.q))


def dual_pairing(f: SpectralField, g: SpectralField, grid: PolarGrid,
                 partition: DyadicPartition = DEFAULT_PARTITION) -> float:
    """sum_j integral of (phi_j(sqrt(A)) f) . (Phi_j(sqrt(A)) g) over the disk.

    The widened window Phi_j = phi_{j-1} + phi_j + phi_{j+1} makes the band
    products resolve the identity, so on a finite spectrum this equals the
    plain L^2 pairing of f and g; it is still computed band by band through
    quadrature, which is the route the pairing estimates actually bound.
    """
    if f.basis.cache_key != g.basis.cache_key:
        raise ValueError("fields live on different bases")
    total = 0.0
    for j in active_bands(f.basis, partition):
        vf = synthesize(apply_band(f, j, partition), grid)
        vg = synthesize(apply_window(g, j, partition), grid)
        total += float(np.sum(grid.weights * (vf.ux * vg.ux + vf.uy * vg.uy)))
    return total


def trajectory_norm(traj, p: float, d: int = 2,
                    grid: PolarGrid | None = None,
                    partition: DyadicPartition = DEFAULT_PARTITION) -> float:
    """Solution-space norm of a time-indexed family of spectral fields:

        sup_t ||u(t)||_{B^{-1+d/p}_{p,inf}}  +  sup_t t^{(1-d/p)/2} ||u(t)||_{L^p}

    Requires d < p < inf.  A leading t = 0 snapshot is allowed: the weight
    vanishes there and the block-norm sup legitimately includes the datum.
    """
    p = _check_p(p)
    if not (d < p < INF):
        raise ValueError("trajectory norm requires d < p < inf")
    times = np.asarray(traj.times, dtype=float)
    if times.size == 0:
        raise ValueError("trajectory has no snapshots")
    if (times < 0.0).any() or (np.diff(times) <= 0.0).any():
        raise ValueError("trajectory times must be nonnegative and strictly increasing")
    if grid is None:
        grid = traj.grid
    idx = BesovIndex(critical_index(p, d), p, INF)
    alpha = 0.5 * (1.0 - d / p)
    sup_block = 0.0
    sup_weighted = 0.0
    for t, f in zip(times, traj.fields):
        sup_block = max(sup_block, besov_norm(f, idx, grid, partition).value)
        sup_weighted = max(sup_weighted, t ** alpha * lp_norm(f, grid, p))
    return sup_block + sup_weighted


def tail_smallness(u0: SpectralField, p: float, J: int, grid: PolarGrid,
                   d: int = 2,
                   partition: DyadicPartition = DEFAULT_PARTITION) -> float:
    """sup over bands j >= J of 2^{(-1+d/p) j} ||phi_j(sqrt(A)) u0||_{L^p}.

    The local-solvability smallness diagnostic: data is admissible when this
    is small for some J.  If J lies above the last active band the truncated
    spectrum cannot see the tail; the result is 0 with a TruncationWarning.
    """
    p = _check_p(p)
    if not (d < p):
        raise ValueError("tail smallness requires p > d")
    rng = active_bands(u0.basis, partition)
    if J > rng.j_hi:
        warnings.warn(
            f"tail start J={J} exceeds the last active band j={rng.j_hi}; "
            "the truncated spectrum carries no tail information there",
            TruncationWarning, stacklevel=2)
        return 0.0
    s = critical_index(p, d)
    best = 0.0
    for j in range(max(J, rng.j_lo), rng.j_hi + 1):
        val = 2.0 ** (j * s) * lp_norm(apply_band(u0, j, partition), grid, p)
        best = max(best, val)
    return best
