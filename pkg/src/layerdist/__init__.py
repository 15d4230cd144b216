"""Canonicalize ReLU network layers and compare them functionally.

Pipeline: L2-normalize hidden layers (compensating downstream), sample
the input box, threshold pre-activations into per-neuron binary
signatures, compress signatures into MinHash sketches, and score two
layers by the mean sketch distance of an optimal neuron assignment.
"""

from .canonicalize import ScaleFactors, canonicalize_network, compensate_next_layer, normalize_layer
from .errors import (
    BoundsError,
    DegenerateData,
    DomainError,
    EmptyMatching,
    EmptyMatrix,
    EmptySetError,
    FamilyMismatch,
    LayerdistError,
    NonConvergence,
    ParseError,
    ShapeError,
    UnsupportedActivation,
)
from .experiment import (
    ReplicationResult,
    TrainConfig,
    TrainResult,
    generate_ellipse_labels,
    run_replication,
    train_mlp,
)
from .matching import (
    CostMatrix,
    LayerComparisonReport,
    Matching,
    build_cost_matrix,
    compare_layers,
    layer_distance,
    solve_assignment,
)
from .model_io import Layer, Network, forward, load_network, save_network
from .sampling import (
    SampleSet,
    VcQuery,
    generate_lhs,
    generate_uniform,
    load_samples,
    save_samples,
    solve_min_samples,
)
from .signatures import (
    NeuronFilterReport,
    SignatureMatrix,
    activation_frequency,
    classify_neurons,
    compute_signature_matrix,
    exact_jaccard_distance,
    load_signature_matrix,
    save_signature_matrix,
)
from .sketching import (
    HashFamily,
    MinHashSketch,
    build_hash_family,
    estimate_distance,
    load_sketches,
    required_hashes,
    save_sketches,
    sketch,
    sketch_layer,
)
from .validation import approximation_errors, exact_cost_matrix, matching_agreement

__version__ = "0.1.0"
