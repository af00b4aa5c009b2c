"""Point-level cluster membership validation via influence-cell volume stealing.

Each query point is treated as a one-point cluster; the fractions of its
influence cell stolen from the existing clusters form its affinity vector,
from which a stability label and scalar confidence score follow.
"""

from .cells import (
    HalfSpace,
    InfluenceCell,
    bisector_halfspace,
    build_influence_cell,
    cell_contains,
    cell_from_box,
    chord_intersect,
    steal_owner,
    steal_owners,
)
from .data import BoundingBox, ClusterModel, Dataset, Partition
from .embeddings import (
    FourierEmbedding,
    SpanProjection,
    apply_projection,
    embed,
    fit_fourier_embedding,
    fit_span_projection,
    project_dataset,
    project_model,
)
from .exact import clip_polygon, exact_affinity_2d, grid_affinity, polygon_area
from .field import (
    GridSpec,
    ScalarFieldGrid,
    evaluate_affinity_field,
    extract_contours,
    write_contours_svg,
    write_field_csv,
    write_heatmap_pgm,
)
from .harness import (
    ActiveRun,
    ConsensusReport,
    IncrementalState,
    active_cluster,
    consensus_report,
    incremental_init,
    incremental_update,
    majority_vote,
    rand_distance,
)
from .kmeans import kmeans_fit, kmeanspp_seed, lloyd
from .measures import DistanceMeasure, generalized_kl, itakura_saito, squared_euclidean
from .sampling import (
    SamplerConfig,
    WhiteningTransform,
    estimate_whitening,
    hit_and_run_step,
    make_rng,
    mix_seed,
    sample_polytope,
)
from .scores import (
    AffinityVector,
    affinity_batch,
    affinity_point,
    classify_stability,
    required_samples,
)

__version__ = "0.1.0"
