"""Capacity windows and structure detection for block-structured channels.

The toolkit models finite-dimensional channels as Kraus families, detects
when a channel's dilation range is closed under the triple product x y* z
(a ternary ring of operators), computes the resulting exact capacities and
two-sided comparison windows for modified channels, and ships a randomized
harness that checks the underlying norm and entropy inequalities.
"""

from .algebra import (
    AlgebraBasis,
    TroDecomposition,
    conditional_expectation,
    generate_star_algebra,
    identity_symbol,
    is_independent,
    is_strongly_independent,
    is_tro,
    left_algebra,
    right_algebra,
    smallest_containing_tro,
    tro_block_decomposition,
    validate_symbol,
)
from .capacity import (
    BoundEntry,
    BoundReport,
    comparison_bounds,
    cqe_region_vertices,
    fidelity_bound,
    negative_cb_entropy,
    one_shot_q,
    renyi_coherent_channel,
    rps_region_vertices,
    tro_capacities,
)
from .channel import (
    Channel,
    StinespringSpace,
    Symbol,
    SymbolCertificate,
    apply,
    base_channel,
    choi,
    complement_apply,
    from_kraus,
    heralded_channel,
    identity_channel,
    modified_channel,
    stinespring_space,
    tensor_channels,
)
from .entropy import (
    binary_entropy,
    coherent_information,
    conditional_renyi,
    entropy_defect,
    mutual_information,
    relative_entropy,
    renyi_coherent_information,
    renyi_mutual_information,
    s1_sp_norm,
    sandwiched_renyi,
    von_neumann_entropy,
)
from .matcore import (
    herm_eig,
    matrix_log2,
    matrix_power,
    normalized_p_norm,
    partial_trace,
    permute_systems,
    schatten_norm,
    tensor,
)
from .verify import (
    VerificationReport,
    verify_entropic,
    verify_local_comparison,
    verify_tensor_symbol,
)

__version__ = "0.1.0"
