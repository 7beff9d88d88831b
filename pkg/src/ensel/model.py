"""Core domain types shared by every other module.

All types are immutable values.  ``validate`` checks every invariant that
can be decided without consulting the metadata store; referenced-id
existence is the store's job.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ValidationError

# The seven categorical initial-condition parameters, in canonical order.
# `profile`, `s1`, `cs`, `mgrg` are the documented ensemble parameters;
# `s2`, `rho0`, `tshift` are placeholder names for the remaining three.
PARAM_NAMES = ("profile", "s1", "cs", "mgrg", "s2", "rho0", "tshift")

# Derived-quantity axes usable in filters alongside the parameters.
DELTA_AXES = ("dshock", "dedge", "drho")

FILTER_AXES = PARAM_NAMES + DELTA_AXES

# Number of time steps per simulation, indexed 1..T.
DEFAULT_T = 40


class NormKind(str, Enum):
    L1 = "L1"
    L2 = "L2"
    LINF = "LINF"


@dataclass(frozen=True)
class CylGrid:
    """Uniform 2D cylindrical grid, cell-centered registration.

    R_j = (j + 1/2) * d_r for j in [0, n_r); z_k = (k + 1/2) * d_z - L_z/2
    for k in [0, n_z), with L_z = n_z * d_z.  Cell centering keeps every
    R_j strictly positive.
    """

    n_r: int
    n_z: int
    d_r: float
    d_z: float

    def r_centers(self) -> np.ndarray:
        return (np.arange(self.n_r) + 0.5) * self.d_r

    def z_centers(self) -> np.ndarray:
        return (np.arange(self.n_z) + 0.5) * self.d_z - 0.5 * self.n_z * self.d_z

    @property
    def n_cells(self) -> int:
        return self.n_r * self.n_z


@dataclass(frozen=True)
class DensityField:
    """Scalar density (g/cc) on a cylindrical grid.

    ``values`` is row-major over radial index then axial index:
    values[j * n_z + k] is the density at (R_j, z_k).
    """

    grid: CylGrid
    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def as_grid(self) -> np.ndarray:
        """values reshaped to (n_r, n_z)."""
        return self.values.reshape(self.grid.n_r, self.grid.n_z)

    def __eq__(self, other):
        if not isinstance(other, DensityField):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.values, other.values)


@dataclass(frozen=True)
class FeatureSet:
    """Fourier coefficients (cm) of the shock and edge curves at one time step."""

    shock_coeffs: tuple[float, ...]
    edge_coeffs: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "shock_coeffs", tuple(float(c) for c in self.shock_coeffs))
        object.__setattr__(self, "edge_coeffs", tuple(float(c) for c in self.edge_coeffs))


@dataclass(frozen=True)
class SimulationRecord:
    sim_id: str
    params: tuple[int, ...]  # level index per PARAM_NAMES entry
    density_path: str  # per-time-step pattern containing "{t}"
    feature_path: str

    def param(self, name: str) -> int:
        return self.params[PARAM_NAMES.index(name)]


@dataclass(frozen=True)
class MethodInfo:
    method_id: int
    gt_id: int
    gt_time_step: int
    norm: NormKind
    description: str = ""


@dataclass(frozen=True)
class PostRecord:
    method_id: int
    sim_id: str
    time_step: int
    delta_shock: float
    delta_edge: float
    delta_rho: float
    invalid: bool = False  # set when the shared-support domain was empty


@dataclass(frozen=True)
class BoxGeometry:
    x_min: float
    x_max: float
    y_min: float
    y_max: float


@dataclass(frozen=True)
class LassoGeometry:
    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "vertices", tuple((float(x), float(y)) for x, y in self.vertices)
        )


@dataclass(frozen=True)
class CategoricalClause:
    name: str
    levels: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "levels", frozenset(int(v) for v in self.levels))


@dataclass(frozen=True)
class RangeClause:
    axis: str
    lo: float
    hi: float


Clause = CategoricalClause | RangeClause


def _clause_axis(c: Clause) -> str:
    return c.name if isinstance(c, CategoricalClause) else c.axis


@dataclass(frozen=True)
class FilterExpr:
    """Conjunction of per-axis clauses; canonical clause order is axis order."""

    clauses: tuple[Clause, ...] = ()
    axes: tuple[str, ...] = FILTER_AXES

    def __post_init__(self):
        ordered = tuple(
            sorted(self.clauses, key=lambda c: self.axes.index(_clause_axis(c)))
        )
        object.__setattr__(self, "clauses", ordered)
        object.__setattr__(self, "axes", tuple(self.axes))

    def axis_of(self, clause: Clause) -> str:
        return _clause_axis(clause)


@dataclass(frozen=True)
class SelectionSpec:
    """A saved visual query: everything needed to replay a selection."""

    method_id: int
    time_step: int
    w_shock: float
    w_edge: float
    color_by: str
    filter: FilterExpr
    geometry: BoxGeometry | LassoGeometry
    subsample_p: float
    subsample_seed: int
    description: str
    created_at: str = ""  # ISO-8601, filled by the store on save

    @property
    def selection_type(self) -> str:
        return "BOX" if isinstance(self.geometry, BoxGeometry) else "LASSO"


@dataclass(frozen=True)
class TrainingDataset:
    dataset_id: int
    member_sim_ids: frozenset[str]
    spec: SelectionSpec

    def __post_init__(self):
        object.__setattr__(self, "member_sim_ids", frozenset(self.member_sim_ids))


# ---------------------------------------------------------------------------
# Validation


def _fail(msg: str):
    raise ValidationError(msg)


def _validate_grid(g: CylGrid):
    if g.n_r < 1:
        _fail(f"n_r must be >= 1, got {g.n_r}")
    if g.n_z < 1:
        _fail(f"n_z must be >= 1, got {g.n_z}")
    if not (g.d_r > 0):
        _fail(f"d_r must be > 0, got {g.d_r}")
    if not (g.d_z > 0):
        _fail(f"d_z must be > 0, got {g.d_z}")


def _validate_density(f: DensityField):
    _validate_grid(f.grid)
    if f.values.shape != (f.grid.n_cells,):
        _fail(
            f"values length {f.values.shape} != n_r*n_z = {f.grid.n_cells}"
        )
    if not np.all(np.isfinite(f.values)):
        idx = int(np.flatnonzero(~np.isfinite(f.values))[0])
        _fail(f"non-finite density at cell {idx}")
    if np.any(f.values < 0):
        idx = int(np.flatnonzero(f.values < 0)[0])
        _fail(f"negative density at cell {idx}")


def _validate_features(fs: FeatureSet):
    if len(fs.shock_coeffs) != len(fs.edge_coeffs):
        _fail(
            "shock and edge coefficient vectors differ in length: "
            f"{len(fs.shock_coeffs)} vs {len(fs.edge_coeffs)}"
        )
    for label, coeffs in (("shock", fs.shock_coeffs), ("edge", fs.edge_coeffs)):
        for i, c in enumerate(coeffs):
            if not math.isfinite(c):
                _fail(f"non-finite {label} coefficient at index {i}")


def _validate_simulation(s: SimulationRecord, level_counts=None):
    if not s.sim_id:
        _fail("sim_id required")
    if len(s.params) != len(PARAM_NAMES):
        _fail(f"expected {len(PARAM_NAMES)} parameters, got {len(s.params)}")
    for name, lvl in zip(PARAM_NAMES, s.params):
        if lvl < 0:
            _fail(f"parameter {name} level must be >= 0, got {lvl}")
        if level_counts is not None and lvl >= level_counts[name]:
            _fail(
                f"parameter {name} level {lvl} >= declared level count "
                f"{level_counts[name]}"
            )


def _validate_method(m: MethodInfo, t_max: int = DEFAULT_T):
    if not isinstance(m.norm, NormKind):
        _fail(f"norm must be one of {[n.value for n in NormKind]}, got {m.norm!r}")
    if not (1 <= m.gt_time_step <= t_max):
        _fail(f"gt_time_step {m.gt_time_step} outside [1, {t_max}]")


def _validate_post_record(r: PostRecord, t_max: int = DEFAULT_T):
    if not (1 <= r.time_step <= t_max):
        _fail(f"time_step {r.time_step} outside [1, {t_max}]")
    if r.invalid:
        return
    for label, v in (
        ("delta_shock", r.delta_shock),
        ("delta_edge", r.delta_edge),
        ("delta_rho", r.delta_rho),
    ):
        if not math.isfinite(v) or v < 0:
            _fail(f"{label} must be finite and >= 0, got {v}")


def _validate_filter(f: FilterExpr):
    seen = set()
    for c in f.clauses:
        axis = _clause_axis(c)
        if axis not in f.axes:
            _fail(f"unknown filter axis {axis!r}")
        if axis in seen:
            _fail(f"duplicate filter axis {axis!r}")
        seen.add(axis)
        if isinstance(c, CategoricalClause):
            if not c.levels:
                _fail(f"categorical clause on {axis!r} has an empty level set")
            if any(v < 0 for v in c.levels):
                _fail(f"categorical clause on {axis!r} has a negative level")
        else:
            if not (c.lo <= c.hi):
                _fail(f"range clause on {axis!r} has lo > hi ({c.lo} > {c.hi})")


def _validate_spec(s: SelectionSpec):
    if not s.description:
        _fail("description required")
    for label, w in (("w_shock", s.w_shock), ("w_edge", s.w_edge)):
        if not (0.0 <= w <= 1.0):
            _fail(f"{label} must be in [0, 1], got {w}")
    if s.color_by not in PARAM_NAMES:
        _fail(f"color_by must be one of {PARAM_NAMES}, got {s.color_by!r}")
    if isinstance(s.geometry, BoxGeometry):
        g = s.geometry
        if g.x_min > g.x_max or g.y_min > g.y_max:
            _fail("box geometry must have x_min <= x_max and y_min <= y_max")
    elif isinstance(s.geometry, LassoGeometry):
        if len(s.geometry.vertices) < 3:
            _fail("lasso polygon needs at least 3 vertices")
    else:
        _fail(f"unknown geometry type {type(s.geometry).__name__}")
    if not (0.0 < s.subsample_p <= 1.0):
        _fail(f"subsample_p must be in (0, 1], got {s.subsample_p}")
    _validate_filter(s.filter)


def _validate_dataset(d: TrainingDataset):
    if not d.member_sim_ids:
        _fail("training dataset member set must be non-empty")
    _validate_spec(d.spec)


_VALIDATORS = {
    CylGrid: _validate_grid,
    DensityField: _validate_density,
    FeatureSet: _validate_features,
    SimulationRecord: _validate_simulation,
    MethodInfo: _validate_method,
    PostRecord: _validate_post_record,
    FilterExpr: _validate_filter,
    SelectionSpec: _validate_spec,
    TrainingDataset: _validate_dataset,
}


def validate(record) -> None:
    """Raise ValidationError naming the first violated invariant, else return."""
    try:
        checker = _VALIDATORS[type(record)]
    except KeyError:
        raise TypeError(f"no validator for {type(record).__name__}") from None
    checker(record)
