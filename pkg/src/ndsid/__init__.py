"""Exact structure-identifiability certificates for networked dynamic systems."""

from .ratpoly import Poly, Rat, RatFunc, as_rat, poly_eval, poly_gcd
from .polymat import (
    PolyMatrix,
    RatMatrix,
    SmithForm,
    SmithMcMillan,
    const_nullspace,
    is_fncr,
    is_fnrr,
    normal_rank,
    rat_det,
    rat_inverse,
    smith_form,
    smith_mcmillan,
)
from .pencil import (
    KroneckerBlock,
    KroneckerForm,
    MatrixPencil,
    block_nullspace,
    canonical_block,
    is_regular,
    is_strictly_regular,
    kcf,
)
from .model import (
    Dims,
    NdsModel,
    Scm,
    SubsystemLft,
    SubsystemRealized,
    TfmBundle,
    augmented_h_tfms,
    lft_tfms,
    network_tfms,
    realize,
    subsystem_tfms,
    well_posed_nds,
    well_posed_subsystem,
)
from .ident import (
    IdentVerdict,
    Verdict,
    Witness,
    XiMatrix,
    apply_structure_prior,
    check_chain,
    check_cor2,
    check_sufficient,
    check_thm5,
    free_response_tfm,
    nds_tfm,
    pencil_M,
    pencil_chain,
    theorem4_test,
    xi_matrix,
)
from .distance import (
    CircuitParams,
    DistanceEstimate,
    SimConfig,
    circuit_example,
    circuit_nds,
    dsid_freq,
    dsid_time,
    linf_norm,
    prbs,
    sample_scm,
    sweep_circuit,
    zoh_discretize,
)

__all__ = [
    "Poly", "Rat", "RatFunc", "as_rat", "poly_eval", "poly_gcd",
    "PolyMatrix", "RatMatrix", "SmithForm", "SmithMcMillan",
    "const_nullspace", "is_fncr", "is_fnrr", "normal_rank",
    "rat_det", "rat_inverse", "smith_form", "smith_mcmillan",
    "KroneckerBlock", "KroneckerForm", "MatrixPencil",
    "block_nullspace", "canonical_block", "is_regular",
    "is_strictly_regular", "kcf",
    "Dims", "NdsModel", "Scm", "SubsystemLft", "SubsystemRealized",
    "TfmBundle", "augmented_h_tfms", "lft_tfms", "network_tfms",
    "realize", "subsystem_tfms", "well_posed_nds", "well_posed_subsystem",
    "IdentVerdict", "Verdict", "Witness", "XiMatrix",
    "apply_structure_prior", "check_chain", "check_cor2",
    "check_sufficient", "check_thm5", "free_response_tfm", "nds_tfm",
    "pencil_M", "pencil_chain", "theorem4_test", "xi_matrix",
    "CircuitParams", "DistanceEstimate", "SimConfig", "circuit_example",
    "circuit_nds", "dsid_freq", "dsid_time", "linf_norm", "prbs",
    "sample_scm", "sweep_circuit", "zoh_discretize",
]

__version__ = "0.1.0"
