"""Integer and Z2 index pairings via spectral and skew localizers.

The library computes topological invariants of finite-volume gapped lattice
models: the integer index as a localizer half-signature, and the Z2 index as
a Pfaffian sign, a determinant sign, a flow value, or a kernel parity, with
the independent methods cross-validating each other.
"""

from . import errors
from .flows import (
    CrossingLedger,
    HalfFlowParity,
    OperatorPath,
    PathKind,
    crossing_ledger,
    fermi_projection,
    half_spectral_flow,
    hardy_projection,
    index_operator,
    kernel_parity,
    midpoint_kernel_dimension,
    orientation_flow,
    orientation_flow_pair,
    phase_unitary,
    spectral_flow,
    truncation_window,
    z2_index_kernel,
    z2_index_via_flow,
    z2_spectral_flow,
)
from .linalg import (
    Isometry,
    SpectralData,
    compress,
    det_sign_real,
    eig_hermitian,
    gap,
    pfaffian_sign,
    signature,
    spectral_projection_isometry,
)
from .localizer import (
    AdmissibleBounds,
    LocalizerBundle,
    PairingData,
    PlateauPoint,
    PlateauResult,
    admissible_bounds,
    complex_index,
    localizer_gap,
    nudge_rho,
    plateau_scan,
    skew_localizer,
    spectral_localizer,
    z2_index_det,
    z2_index_pfaffian,
)
from .models import (
    LatticeSpec,
    ModelInstance,
    Z2_CELLS,
    kitaev_chain,
    position_operator,
    qwz_chern,
    qwz_model,
    random_pairing,
    ssh_chain,
    ssh_winding,
)
from .symmetry import (
    CaseTransforms,
    Group,
    PairingKind,
    Relation,
    SymmetryClass,
    SymmetryOperator,
    case_transforms,
    check_relation,
    classify,
    normal_form_odd_symmetry,
    relation_residual,
    required_parity,
    symmetry_root,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
