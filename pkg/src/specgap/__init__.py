"""specgap: accelerated bottom-k spectral graph clustering.

Dilates the eigengaps of a graph Laplacian with eigenvector-preserving
spectrum transforms (exact or polynomial), reverses the spectrum, and feeds
the result to streaming top-k eigensolvers.  Laplacian powers admit unbiased
random-walk estimates, so the whole pipeline runs on edge samples.
"""

from .graph import (
    Graph,
    IncidenceRow,
    LaplacianOperator,
    EdgeIncidenceGraph,
    DegreeBounds,
    build_laplacian,
    laplacian_matvec,
    dense_laplacian,
    cut_value,
    conductance,
    brute_force_rho,
    edge_incidence_graph,
    degree_bounds,
    read_edgelist,
    write_edgelist,
)
from .generators import (
    CliqueSpec,
    MdpSpec,
    LinkPredSpec,
    gen_clique_clusters,
    gen_three_room_mdp,
    common_neighbors_score,
    degrade_and_complete,
)
from .transforms import (
    SpectralTransform,
    TransformedOperator,
    scalar_map,
    polynomial_coefficients,
    choose_lambda_star,
    exact_transform_dense,
    apply_transform_matvec,
    make_reversed_operator,
    TRANSFORM_KINDS,
)
from .walks import (
    Walk,
    SamplerConfig,
    alpha,
    sample_walk,
    p_min,
    log_p_min,
    rejection_filter,
    estimate_power_matvec,
    estimate_polynomial_matvec,
    enumerate_chains,
)
from .solvers import (
    EigenState,
    SolverConfig,
    MetricRow,
    SolverRun,
    init_state,
    oja_step,
    mu_eg_step,
    make_stochastic_oracle,
    run_solver,
    run_to_csv,
)
from .metrics import (
    GroundTruth,
    dense_eig,
    graph_ground_truth,
    subspace_error,
    eigenvector_streak,
    eigengaps,
    kmeans_cluster,
    cluster_accuracy,
)

__version__ = "0.1.0"
