"""nilmoduli: moduli of left-invariant metrics and Hermitian structures on
the five 6-dimensional nilpotent Lie algebras with first Betti number 4
(h2, h4, h5, h6, h9), with certified canonicalization, isometry-group
classification and closed-form compatible complex structures."""

from .algebra import (
    AlmostComplexStructure,
    LieAlgebra,
    TwoForm,
    bracket,
    builtin,
    change_of_basis,
    exterior_derivative,
    get_algebra,
    is_abelian_structure,
    jacobi_residual,
    lemma_j_h6,
    nijenhuis,
    nijenhuis_residual,
    nilpotency_step,
    parse_salamon,
    render_salamon,
    standard_pairing_j,
)
from .automorphisms import (
    Automorphism,
    DerivationBasis,
    H2Params,
    H4Params,
    H5Params,
    H6Params,
    H9Params,
    component_label,
    component_representatives,
    derivation_algebra,
    is_automorphism,
    matches_theorem_form,
    random_automorphism,
    structured_automorphism,
)
from .errors import (
    AlgebraMismatch,
    CanonicalizationFailed,
    DegenerateParams,
    Diverged,
    InvalidForm,
    InvalidParams,
    InvalidTriple,
    NilmoduliError,
    NotNilpotent,
    NotSPD,
    ParseError,
    SingularMatrix,
    Unsupported,
)
from .hermitian import (
    NON_HERMITIAN_RESIDUAL_FLOOR,
    H2Candidate,
    HermitianSolution,
    SearchResult,
    SolutionSet,
    SolutionTriple,
    h2_hermitian_candidates,
    h2_J,
    h4_hermitian_solutions,
    h4_J,
    h5_eq42_residual,
    h5_hermitian_solutions,
    h5_J,
    h6_hermitian_solutions,
    h9_J0,
    h9_gprime_metric,
    h9_sigma_family,
    hermitian_search,
)
from .linalg import (
    LeastSquaresResult,
    cholesky_lower,
    expm_pade6,
    least_squares_solve,
    null_space,
    reverse_cholesky_lower,
    svd2,
    sym_eig2,
    takagi2,
)
from .moduli import (
    GroupDescriptor,
    H2Form,
    H4Form,
    H5Form,
    H6Form,
    H9Form,
    Metric,
    Witness,
    canonicalize,
    form_from_dict,
    isometry_group,
    isotropy_algebra_dimension,
    pullback_metric,
    realize,
    verify_isometry_group,
)

__version__ = "0.1.0"
