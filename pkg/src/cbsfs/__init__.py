"""Exact sampled genealogies, site frequency spectra and clonal statistics
for a stationary population driven by a quadratic branching mechanism."""

from .clonal import (
    ClonalSummary,
    MomentReport,
    clonal_summary,
    e_zcl_pow,
    e_zcl_pow_r,
    mc_clonal,
    u_moment,
    v_representation_check,
    zcl_moment_ratio_scaled,
)
from .genealogy import (
    AncestralPointMeasure,
    LeafConfig,
    Lk_all,
    Lk_total,
    ZetaVector,
    admissible_length,
    ancestral_measure,
    intervals,
    population_tree_length,
    sample_population,
    sample_tree_length,
    sample_zeta_star,
    sample_zetas,
    tmrca_consecutive,
)
from .model import (
    ModelParams,
    canonical_density,
    extinction_tail,
    kesten_expectation,
    laplace_u,
    mean_ancestor_count,
    tmrca_cdf,
    z0_density,
    z0_moment,
)
from .sfs import (
    DensityCurve,
    SfsRow,
    SfsTable,
    density_branch_check,
    density_curve,
    density_spine_check,
    expected_Lk,
    expected_sfs,
    g1,
    g1_curve,
    g2_residual,
    mean_density,
    s_ell,
    simulate_sfs,
)
from .specfun import (
    EULER_GAMMA,
    QuadratureError,
    QuadratureSpec,
    H_closed,
    H_scale,
    beta_fn,
    digamma,
    f_integrand,
    gamma_upper_zero,
    h0,
    h1,
    h1_deriv,
)
from .tree import (
    GenealogyTree,
    MutationOverlay,
    RootMode,
    StructuralError,
    TreeNode,
    build_tree,
    drop_mutations,
    edge_lengths_by_count,
    leafset_counts,
    newick_export,
    parse_newick,
    tree_tmrca,
)

__version__ = "0.1.0"
