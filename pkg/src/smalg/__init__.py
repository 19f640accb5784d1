"""Structural matrix algebras: quasi-order combinatorics, Jordan embeddings,
and numerical experiments on commutativity-and-spectrum preservers."""

from .quasiorder import (
    QuasiOrder,
    Partition,
    BlockTriangularization,
    closure,
    image,
    preimage,
    components,
    mutual_classes,
    is_two_free,
    condition_i,
    is_symmetric,
    block_triangular_permutation,
    delete_indices,
    rank_one_density,
    all_preorders,
)
from .matalg import (
    support,
    in_sma,
    project_sma,
    sharp,
    flat,
    char_poly,
    matrix_unit,
    lambda_matrix,
    permutation_matrix,
    nearby_diagonalizable,
    diagonalize_in_sma,
    rank_one_closure_member,
)
from .cocycle import (
    TransitiveMap,
    Trivial,
    Nontrivial,
    validate,
    triviality,
    random_transitive,
    induced_auto,
)
from .jordan import (
    CentralIdempotent,
    JordanSpec,
    central_idempotents,
    build_embedding,
    verify_jordan,
    verify_multiplicative,
    verify_antimultiplicative,
    recover_form,
    RecoveryError,
)
from .preservers import (
    MapUnderTest,
    PreserverReport,
    gen_commuting_pair,
    counterexample,
    commutes_criterion,
    classify_unit_action,
    remark_gallery,
    verify_preserver,
)

__version__ = "0.1.0"
