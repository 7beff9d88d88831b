"""Desk-scale synthetic shell-implosion ensemble.

The generator is a stand-in for a real hydrodynamics database.  The
functional forms are invented; what matters is the structure they are
contracted to exhibit:

  * `cs` sets the shock speed, so it strongly shifts both the shock
    feature and the density field (easily recoverable).
  * `mgrg` multiplies the density amplitude by 1 + 0.001*level and leaves
    the shock/edge curves untouched (unrecoverable from features).
  * `profile` reshapes the interior density gradient while leaving the
    shock and edge curves nearly unchanged, so simulations that look
    identical in feature space split into well-separated density
    clusters (the degeneracy mechanism).
  * `s1`, `s2` perturb the angular shape of the shell edge.
  * `rho0` applies a small amplitude change.

Every simulation also carries a minute shock-shape perturbation whose
amplitude is a distinct per-configuration step (see ``_shock_jitter``);
this breaks feature-distance ties between simulations that share a `cs`
level so that quantile-based selections are well defined.  The steps are
orders of magnitude below every physical effect.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import fileio
from .distance import fourier_decompose
from .errors import ValidationError
from .model import (
    CylGrid,
    DensityField,
    FeatureSet,
    PARAM_NAMES,
    SimulationRecord,
)

DEFAULT_LEVEL_COUNTS = {
    "profile": 3,
    "s1": 3,
    "cs": 3,
    "mgrg": 2,
    "s2": 2,
    "rho0": 2,
    "tshift": 1,
}

R_INNER = 0.1  # fixed inner shell radius (cm); shared support for all pairs
R_REF_OUTER = 1.6  # normalization radius for the interior profile shapes
SHOCK_R0 = 0.3
SHOCK_V0 = 0.010  # cm per time step at cs level 0
SHOCK_DV = 0.008  # speed increment per cs level
SHOCK_WIDTH = 0.08
SHOCK_AMPLITUDE = 0.8
EDGE_R0 = 1.15
EDGE_SHRINK = 0.003  # edge radius decrease per time step
EDGE_DROP = 0.4  # density reduction factor beyond the shell edge
EDGE_SOFT = 0.03  # smoothing length of the edge step
S1_AMPLITUDE = 0.010  # edge mode-3 relative amplitude per s1 level
S2_AMPLITUDE = 0.006  # edge mode-4 relative amplitude per s2 level
RHO0_STEP = 0.02
MGRG_STEP = 0.001
JITTER_STEP = 5e-6  # shock-shape tie-breaker amplitude unit
NOISE_AMPLITUDE = 2e-4  # per-sim multiplicative texture


@dataclass(frozen=True)
class EnsembleConfig:
    grid: CylGrid = CylGrid(64, 64, 0.05, 0.05)
    level_counts: dict = field(default_factory=lambda: dict(DEFAULT_LEVEL_COUNTS))
    t_steps: int = 40
    n_theta: int = 64
    n_modes: int = 9
    master_seed: int = 0

    @property
    def n_sims(self) -> int:
        n = 1
        for name in PARAM_NAMES:
            n *= self.level_counts[name]
        return n

    def param_grid(self):
        """Full factorial over levels, canonical order (last name fastest)."""
        ranges = [range(self.level_counts[name]) for name in PARAM_NAMES]
        return itertools.product(*ranges)

    def sim_index(self, params) -> int:
        idx = 0
        for name, lvl in zip(PARAM_NAMES, params):
            idx = idx * self.level_counts[name] + lvl
        return idx


def _check_params(config: EnsembleConfig, params) -> dict:
    if len(params) != len(PARAM_NAMES):
        raise ValidationError(
            f"expected {len(PARAM_NAMES)} levels, got {len(params)}"
        )
    levels = dict(zip(PARAM_NAMES, params))
    for name, lvl in levels.items():
        if not (0 <= lvl < config.level_counts[name]):
            raise ValidationError(
                f"level {lvl} for {name!r} outside [0, {config.level_counts[name]})"
            )
    return levels


def _check_time(config: EnsembleConfig, t: int):
    if not (1 <= t <= config.t_steps):
        raise ValidationError(
            f"time step {t} outside [1, {config.t_steps}] (time steps are 1-based)"
        )


def shock_radius(levels: dict, t: int) -> float:
    return SHOCK_R0 + (SHOCK_V0 + SHOCK_DV * levels["cs"]) * t


def edge_radius(levels: dict, t: int) -> float:
    return EDGE_R0 - EDGE_SHRINK * t


def outer_radius(levels: dict, t: int) -> float:
    return max(shock_radius(levels, t), edge_radius(levels, t)) + 0.2


def _shock_jitter(levels: dict) -> float:
    """Distinct tiny shock-shape amplitude per configuration within a cs level.

    The rank interleaves profile levels at the low end (so the feature-
    closest neighborhood of any ground truth mixes profiles) while keeping
    every profile-0 configuration below the top quarter of its cs group.
    """
    base = levels["s1"] + 3 * levels["s2"] + 6 * levels["mgrg"] + 12 * levels["rho0"]
    if levels["profile"] == 0:
        rank = 2 * base
    else:
        idx = base + 24 * (levels["profile"] - 1)
        rank = 2 * idx + 1 if idx <= 23 else idx + 24
    return JITTER_STEP * rank


def _edge_curve(levels: dict, t: int, theta: np.ndarray) -> np.ndarray:
    base = edge_radius(levels, t)
    return base * (
        1.0
        + S1_AMPLITUDE * levels["s1"] * np.cos(3.0 * theta)
        + S2_AMPLITUDE * levels["s2"] * np.cos(4.0 * theta)
    )


def _shock_curve(levels: dict, t: int, theta: np.ndarray) -> np.ndarray:
    base = shock_radius(levels, t)
    return base * (1.0 + _shock_jitter(levels) * np.cos(2.0 * theta))


def _interior_profile(profile_level: int, r_hat: np.ndarray) -> np.ndarray:
    if profile_level == 0:
        return 1.0 - 0.3 * r_hat
    if profile_level == 1:
        return 0.55 + 0.35 * r_hat
    return 0.50 + 0.45 * r_hat


def density_at(
    params, t: int, grid: CylGrid, config: EnsembleConfig | None = None
) -> DensityField:
    """Shell-shaped density for one configuration at one time step."""
    config = config or EnsembleConfig(grid=grid)
    levels = _check_params(config, params)
    _check_time(config, t)

    r_centers = grid.r_centers()
    z_centers = grid.z_centers()
    rr, zz = np.meshgrid(r_centers, z_centers, indexing="ij")
    r = np.hypot(rr, zz)
    theta = np.arctan2(zz, rr)

    r_hat = np.clip((r - R_INNER) / (R_REF_OUTER - R_INNER), 0.0, 1.0)
    shape = _interior_profile(levels["profile"], r_hat)

    r_s = shock_radius(levels, t)
    shock = 1.0 + SHOCK_AMPLITUDE * np.exp(-(((r - r_s) / SHOCK_WIDTH) ** 2))

    r_e = _edge_curve(levels, t, theta)
    edge = 1.0 - EDGE_DROP / (1.0 + np.exp(-(r - r_e) / EDGE_SOFT))

    amplitude = (1.0 + RHO0_STEP * levels["rho0"]) * (1.0 + MGRG_STEP * levels["mgrg"])

    rho = amplitude * shape * shock * edge

    rng = np.random.default_rng([config.master_seed, config.sim_index(params)])
    texture = 1.0 + NOISE_AMPLITUDE * rng.standard_normal(rho.shape)
    rho *= texture

    inside = (r > R_INNER) & (r < outer_radius(levels, t))
    rho = np.where(inside, rho, 0.0)
    return DensityField(grid, rho.reshape(-1))


def features_at(
    params, t: int, config: EnsembleConfig | None = None
) -> FeatureSet:
    """Fourier coefficients of the shock and edge curves at time step t."""
    config = config or EnsembleConfig()
    levels = _check_params(config, params)
    _check_time(config, t)
    theta = np.arange(config.n_theta) * (2.0 * np.pi / config.n_theta)
    shock = fourier_decompose(_shock_curve(levels, t, theta), config.n_modes)
    edge = fourier_decompose(_edge_curve(levels, t, theta), config.n_modes)
    return FeatureSet(tuple(shock), tuple(edge))


def generate_ensemble(config: EnsembleConfig, out_dir) -> list[SimulationRecord]:
    """Write the full factorial ensemble under out_dir and return its records.

    Fully deterministic given (config, master_seed): per-simulation RNG
    streams are derived from (master_seed, sim index), so parallel and
    serial generation produce identical bytes.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = []
    for index, params in enumerate(config.param_grid()):
        sim_id = f"sim_{index:04d}"
        sim_dir = out / sim_id
        sim_dir.mkdir(exist_ok=True)
        density_pattern = f"{sim_id}/density_t{{t:02d}}.bin"
        feature_rel = f"{sim_id}/features.txt"
        per_step = []
        for t in range(1, config.t_steps + 1):
            fld = density_at(params, t, config.grid, config)
            fileio.write_density(fld, sim_dir / f"density_t{t:02d}.bin")
            per_step.append(features_at(params, t, config))
        fileio.write_features(per_step, out / feature_rel)
        records.append(
            SimulationRecord(
                sim_id=sim_id,
                params=tuple(params),
                density_path=density_pattern,
                feature_path=feature_rel,
            )
        )
    fileio.write_manifest(
        out,
        records,
        grid=config.grid,
        t_steps=config.t_steps,
        n_modes=config.n_modes,
        n_theta=config.n_theta,
        level_counts=config.level_counts,
        master_seed=config.master_seed,
    )
    return records
