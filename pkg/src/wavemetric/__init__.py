"""Refined graph metrics from spectrally simulated PDE dynamics.

Build a weighted graph from data, compute its low Laplacian spectrum,
evolve a wave (or heat, Airy, Schrodinger) equation from a handful of
sources, and synthesize a point-to-point distance from how the simulated
field and its velocity differ between vertices over time.  The refined
distance feeds standard spectral embedding and clustering.
"""

from .datasets import (
    SnapNetwork,
    dumbbell_target,
    gen_dumbbell,
    gen_plane_with_holes,
    gen_spheres_bridge,
    gen_two_disks,
    load_snap_circles,
)
from .dynamics import (
    InitialDatum,
    SymbolSpec,
    TimeGrid,
    WaveField,
    airy_symbol,
    dirac_datum,
    first_order_symbol,
    heat_symbol,
    initial_datum,
    propagate,
    schrodinger_symbol,
    symbol_by_name,
    wave_symbol,
)
from .embedding import (
    Embedding,
    affine_fit_rms,
    circle_edge_counts,
    clustering_accuracy,
    eigenmap,
    refined_embedding,
    step_fit_score,
)
from .errors import (
    DisconnectedGraphError,
    EigenSolverError,
    IsolatedVertexError,
    NumericalError,
    UnstableSymbolError,
    ValidationError,
)
from .graphs import (
    AffinityConfig,
    LaplacianSpec,
    PointCloud,
    WeightedGraph,
    add_noise_edges,
    auto_bandwidth,
    build_affinity,
    laplacian,
    read_edge_list,
    read_point_csv,
    write_edge_list,
    write_point_csv,
)
from .metric import (
    AffinityFromDistance,
    DistanceMatrix,
    NormSpec,
    affinity_from_distance,
    disconnected_bound,
    per_source_distance,
    spectral_distance,
    spectral_distance_matrix,
    synthesize,
    threshold_graph,
    verify_theorem,
)
from .pipeline import EchoResult, choose_sources, derive_seed, echolocate, graph_hash
from .spectral import EigenBasis, compute_basis, spectral_gap

__version__ = "0.1.0"
