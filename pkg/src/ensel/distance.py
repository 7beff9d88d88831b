"""Distance metrics between simulations and a ground truth.

Density distances are volume-weighted norms on the cylindrical grid,
restricted to the shared-support domain D+ where both densities are
nonzero.  Feature distances are plain vector p-norms in Fourier
coefficient space.  Sums are accumulated with math.fsum so results agree
with a naive summation oracle to better than 1e-12 relative error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyOverlap,
    GridMismatch,
    LengthMismatch,
    TooFewSamples,
    WeightOutOfRange,
)
from .model import CylGrid, DensityField, FeatureSet, NormKind

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SupportMask:
    """Boolean mask over grid cells where both compared densities are > 0."""

    grid: CylGrid
    mask: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.mask, dtype=bool)
        arr.setflags(write=False)
        object.__setattr__(self, "mask", arr)


def _check_grids(gt: DensityField, sim: DensityField):
    if gt.grid != sim.grid:
        raise GridMismatch(f"grids differ: {gt.grid} vs {sim.grid}")


def support_domain(gt: DensityField, sim: DensityField) -> SupportMask:
    """D+: cells where both densities are strictly positive."""
    _check_grids(gt, sim)
    return SupportMask(gt.grid, (gt.values > 0) & (sim.values > 0))


def _radii_for_cells(grid: CylGrid) -> np.ndarray:
    """R_j for every flat cell index (row-major radial, then axial)."""
    return np.repeat(grid.r_centers(), grid.n_z)


def support_volume(mask: SupportMask) -> float:
    """Revolved 3D volume of D+: 2*pi*dR*dz * sum of R_j over masked cells."""
    g = mask.grid
    radii = _radii_for_cells(g)[mask.mask]
    return TWO_PI * g.d_r * g.d_z * math.fsum(radii.tolist())


def density_distance(gt: DensityField, sim: DensityField, norm: NormKind) -> float:
    """Volume-weighted L1/L2 or pointwise-max distance over D+.

    Raises EmptyOverlap when the supports are disjoint (the weighted means
    are undefined and a max over the empty set has no value).
    """
    _check_grids(gt, sim)
    mask = (gt.values > 0) & (sim.values > 0)
    if not mask.any():
        raise EmptyOverlap("the two fields have no common nonzero support")

    diff = np.abs(gt.values[mask] - sim.values[mask])
    if norm is NormKind.LINF:
        return float(diff.max())

    g = gt.grid
    radii = _radii_for_cells(g)[mask]
    coeff = TWO_PI * g.d_r * g.d_z
    v_plus = coeff * math.fsum(radii.tolist())
    if norm is NormKind.L1:
        total = math.fsum((diff * radii).tolist())
        return coeff * total / v_plus
    if norm is NormKind.L2:
        total = math.fsum((diff * diff * radii).tolist())
        return math.sqrt(coeff * total / v_plus)
    raise ValueError(f"unknown norm {norm!r}")


def feature_distance(
    gt: FeatureSet, sim: FeatureSet, norm: NormKind
) -> tuple[float, float]:
    """(delta_shock, delta_edge): p-norms of the coefficient-wise differences."""

    def vec_norm(a, b):
        if len(a) != len(b):
            raise LengthMismatch(
                f"coefficient vectors differ in length: {len(a)} vs {len(b)}"
            )
        d = np.abs(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64))
        if len(d) == 0:
            return 0.0
        if norm is NormKind.L1:
            return math.fsum(d.tolist())
        if norm is NormKind.L2:
            return math.sqrt(math.fsum((d * d).tolist()))
        if norm is NormKind.LINF:
            return float(d.max())
        raise ValueError(f"unknown norm {norm!r}")

    return (
        vec_norm(gt.shock_coeffs, sim.shock_coeffs),
        vec_norm(gt.edge_coeffs, sim.edge_coeffs),
    )


def combined_feature_distance(
    delta_shock: float, delta_edge: float, w_shock: float, w_edge: float
) -> float:
    """Weighted combination used as the scatter-plot abscissa."""
    for label, w in (("w_shock", w_shock), ("w_edge", w_edge)):
        if not (0.0 <= w <= 1.0):
            raise WeightOutOfRange(f"{label} must be in [0, 1], got {w}")
    return w_shock * delta_shock + w_edge * delta_edge


def fourier_decompose(curve: np.ndarray, n_modes: int) -> np.ndarray:
    """Real Fourier coefficients [a0, a1, b1, a2, b2, ...] of r(theta).

    ``curve`` holds n_theta samples on uniform angles theta_i = 2*pi*i/n_theta.
    a0 is the mean radius; a_k/b_k are the cosine/sine coefficients of mode k.
    The returned vector is truncated to exactly n_modes entries, covering
    modes up to (n_modes - 1) // 2.
    """
    r = np.asarray(curve, dtype=np.float64)
    n_theta = r.shape[0]
    if n_theta < 2 * n_modes:
        raise TooFewSamples(
            f"need n_theta >= 2*n_modes ({2 * n_modes}), got {n_theta}"
        )
    if not np.all(np.isfinite(r)):
        raise ValueError("curve samples must be finite")

    spec = np.fft.rfft(r)
    out = np.empty(n_modes, dtype=np.float64)
    out[0] = spec[0].real / n_theta
    k = 1
    i = 1
    while i < n_modes:
        out[i] = 2.0 * spec[k].real / n_theta
        i += 1
        if i < n_modes:
            out[i] = -2.0 * spec[k].imag / n_theta
            i += 1
        k += 1
    return out


def fourier_reconstruct(coeffs: np.ndarray, n_theta: int) -> np.ndarray:
    """Evaluate the truncated series on n_theta uniform angles (inverse of
    fourier_decompose up to truncation)."""
    c = np.asarray(coeffs, dtype=np.float64)
    theta = np.arange(n_theta) * (TWO_PI / n_theta)
    r = np.full(n_theta, c[0])
    k = 1
    i = 1
    while i < len(c):
        r += c[i] * np.cos(k * theta)
        i += 1
        if i < len(c):
            r += c[i] * np.sin(k * theta)
            i += 1
        k += 1
    return r
