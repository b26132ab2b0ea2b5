"""Compositional deep learning on graph schemas.

Declare a directed multigraph of concepts with path-equivalence equations,
attach an MLP to every edge and a dataset to every object, and train all
networks jointly under Wasserstein adversarial and path-equivalence losses.
"""

__version__ = "0.1.0"

from .analysis import (
    FactorizationResult,
    ResidualReport,
    RestrictionSets,
    eval_circles_metrics,
    factorization_check,
    residual_report,
    restriction_closure,
)
from .autodiff import Tape, apply_primitive, grad_check
from .datasets import (
    CirclesData,
    DatasetFunctor,
    FiniteSet,
    LatentSampler,
    ProductSource,
    TaskSpec,
    gen_circles_dataset,
    load_dataset_dir,
    product_dataset,
    read_ppm,
    sample_batch,
    write_ppm,
)
from .estimator import CompositionalModel
from .model import (
    ArchAssignment,
    LayerSpec,
    ModelInstance,
    ParamBundle,
    ParamMorphism,
    arch_image_of_path,
    build_param_morphism,
    eval_path,
    init_params,
    instantiate,
    para_compose,
    para_identity,
    total_param_space,
)
from .schema import (
    EquivClasses,
    Generator,
    Path,
    Schema,
    compose_paths,
    congruence_classes,
    enumerate_paths,
    format_schema,
    identity_path,
    parse_schema,
    paths_equivalent,
)
from .training import (
    AdamState,
    DiscriminatorAssignment,
    LossReport,
    TrainingConfig,
    adam_step,
    build_discriminators,
    total_loss,
    train,
)

__all__ = [
    "__version__",
    "AdamState", "ArchAssignment", "CirclesData", "CompositionalModel",
    "DatasetFunctor", "DiscriminatorAssignment", "EquivClasses",
    "FactorizationResult", "FiniteSet", "Generator", "LatentSampler",
    "LayerSpec", "LossReport", "ModelInstance", "ParamBundle",
    "ParamMorphism", "Path", "ProductSource", "ResidualReport",
    "RestrictionSets", "Schema", "Tape", "TaskSpec", "TrainingConfig",
    "adam_step", "apply_primitive", "arch_image_of_path",
    "build_discriminators", "build_param_morphism", "compose_paths",
    "congruence_classes", "enumerate_paths", "eval_circles_metrics",
    "eval_path", "factorization_check", "format_schema", "gen_circles_dataset",
    "grad_check", "identity_path", "init_params", "instantiate",
    "load_dataset_dir", "para_compose", "para_identity", "parse_schema",
    "paths_equivalent", "product_dataset", "read_ppm", "residual_report",
    "restriction_closure", "sample_batch", "total_loss", "total_param_space",
    "train", "write_ppm",
]
