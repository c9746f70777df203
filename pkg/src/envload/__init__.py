"""Material-property Monte Carlo sampling, surrogate thermal loads, and
LDA/PCA/exhaustive-feature-selection analysis for building envelopes."""

from .dataset import (
    ClassLabel,
    Dataset,
    FeatureId,
    MaterialLibrary,
    MaterialSpec,
    PropertyDistribution,
    SystemConstants,
    builtin_material_library,
    builtin_system_constants,
    read_dataset,
    write_dataset,
)
from .efs import EfsReport, SubsetResult, enumerate_subsets, run_efs
from .lda import LdaModel, accuracy, decision_grid, fit_lda, predict
from .pca import PcaModel, fit_pca, loading_report, project, top_features
from .preprocess import (
    Normalizer,
    SplitConfig,
    Thresholds,
    apply_normalizer,
    fit_normalizer,
    label_dataset,
    label_load,
    split,
)
from .sampling import SamplerConfig, generate_dataset, sample_material
from .surrogate import (
    SurrogateConfig,
    annual_thermal_load,
    areal_heat_capacity,
    ingest_external_loads,
    simulate_dataset,
    wall_u_value,
)

__version__ = "0.1.0"

__all__ = [
    "ClassLabel",
    "Dataset",
    "EfsReport",
    "FeatureId",
    "LdaModel",
    "MaterialLibrary",
    "MaterialSpec",
    "Normalizer",
    "PcaModel",
    "PropertyDistribution",
    "SamplerConfig",
    "SplitConfig",
    "SubsetResult",
    "SurrogateConfig",
    "SystemConstants",
    "Thresholds",
    "accuracy",
    "annual_thermal_load",
    "apply_normalizer",
    "areal_heat_capacity",
    "builtin_material_library",
    "builtin_system_constants",
    "decision_grid",
    "enumerate_subsets",
    "fit_lda",
    "fit_normalizer",
    "fit_pca",
    "generate_dataset",
    "ingest_external_loads",
    "label_dataset",
    "label_load",
    "loading_report",
    "predict",
    "project",
    "read_dataset",
    "run_efs",
    "sample_material",
    "simulate_dataset",
    "split",
    "top_features",
    "wall_u_value",
    "write_dataset",
]
