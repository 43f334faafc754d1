"""factorforge: attribute-conditioned latent resampling in a closed-form factor basis."""

from .basis import FactorBasis, basis_io, compute_basis, load_basis, save_basis
from .coords import project, project_batch, reconstruct, reconstruct_batch
from .errors import FactorForgeError
from .kernels import BACKEND
from .matcore import eigh_descending, gram, lstsq
from .pipeline import (
    ExperimentConfig,
    ExperimentReport,
    GeneratorSpec,
    baseline_collect,
    mean_pairwise_distance,
    retention_rate,
    run_comparison,
    synth_generate,
    synthetic_model,
)
from .sampler import generate_for_category, sample_uniform_box
from .semantics import (
    CATEGORY_NAMES,
    CategoryRangeTable,
    LabelerSpec,
    SemanticLabel,
    assign_label,
    compute_ranges,
    partition_by_label,
    ranges_io,
)

__version__ = "0.1.0"
