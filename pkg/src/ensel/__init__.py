"""Ensemble training-data selection with metadata tracking and replay."""

from .model import (
    BoxGeometry,
    CategoricalClause,
    CylGrid,
    DensityField,
    FeatureSet,
    FilterExpr,
    LassoGeometry,
    MethodInfo,
    NormKind,
    PARAM_NAMES,
    PostRecord,
    RangeClause,
    SelectionSpec,
    SimulationRecord,
    TrainingDataset,
    validate,
)
from .distance import (
    SupportMask,
    combined_feature_distance,
    density_distance,
    feature_distance,
    fourier_decompose,
    fourier_reconstruct,
    support_domain,
    support_volume,
)
from .selection import (
    apply_filter,
    parse_filter,
    replay,
    scatter_points,
    select_box,
    select_lasso,
    serialize_filter,
    subsample,
)
from .store import Store, ingest_manifest, open_store
from .synth import EnsembleConfig, density_at, features_at, generate_ensemble
from .pipeline import PipelineReport, postprocess, postprocess_all

__version__ = "0.1.0"
