"""Spectral and skew localizers.

The spectral localizer combines an invertible Hamiltonian (H self-adjoint, or
A invertible in the chiral case) with position-like Dirac data D0 into a
finite Hermitian matrix whose half-signature computes the integer index. For
the Z2 cells of the classification table a real unitary Q with
Q* conj(L) Q = -L exists; conjugating with a root R of Q makes i R* L R real
and skew-adjoint (the skew localizer), and the Z2 index is the product of the
Pfaffian signs of the compressed skew localizer and the compressed, equally
transformed Dirac matrix. For the chiral cells (j+d odd) the same product
reduces to two determinant signs of off-diagonal blocks.
"""

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import (
    BoundViolation,
    KindMismatch,
    NotChiralCase,
    NotZ2Case,
    NumericalFailure,
    RealityViolation,
    SymmetryViolation,
    ZeroGap,
)
from .linalg import Isometry, compress, spectral_projection_isometry
from .symmetry import (
    CaseTransforms,
    Group,
    LocalizerKind,
    PairingKind,
    SymmetryClass,
    SymmetryOperator,
    case_transforms,
)

_TOL = 1e-9


def _norm(A):
    return float(np.linalg.norm(A, 2)) if np.asarray(A).size else 0.0


def _ham_relation_residual(j, A, S):
    """Defect of the row-j relation of the Hamiltonian datum."""
    M = S.matrix
    if j in (0, 4):
        return np.linalg.norm(M.T @ A.conj() @ M - A)
    if j in (2, 6):
        return np.linalg.norm(M.T @ A.conj() @ M + A)
    if j in (1, 5):
        return np.linalg.norm(M.T @ A.conj() @ M - A)
    return np.linalg.norm(M.T @ A.T @ M - A)          # j in (3, 7)


def _dirac_relation_residual(d, D, Sigma):
    """Defect of the column-d relation of the Dirac datum."""
    M = Sigma.matrix
    if d in (0, 1, 4, 5):
        return np.linalg.norm(M.T @ D.conj() @ M - D)
    if d in (2, 6):
        return np.linalg.norm(M.T @ D.T @ M - D)
    return np.linalg.norm(M.T @ D.conj() @ M + D)     # d in (3, 7)


_HAM_RELATION_NAME = {
    0: "S* conj(H) S = H (even real)",
    1: "S* conj(A) S = A (even real)",
    2: "S* conj(H) S = -H (even Lagrangian P)",
    3: "S* A^T S = A (odd symmetric)",
    4: "S* conj(H) S = H (odd real)",
    5: "S* conj(A) S = A (odd real)",
    6: "S* conj(H) S = -H (odd Lagrangian P)",
    7: "S* A^T S = A (even symmetric)",
}

_DIRAC_RELATION_NAME = {
    0: "Sigma* conj(D0) Sigma = D0 (even real)",
    1: "Sigma* conj(D0) Sigma = D0 (even real)",
    2: "Sigma* D0^T Sigma = D0 (even symmetric)",
    3: "Sigma* conj(D0) Sigma = -D0 (odd Lagrangian E)",
    4: "Sigma* conj(D0) Sigma = D0 (odd real)",
    5: "Sigma* conj(D0) Sigma = D0 (odd real)",
    6: "Sigma* D0^T Sigma = D0 (odd symmetric)",
    7: "Sigma* conj(D0) Sigma = -D0 (even Lagrangian E)",
}


@dataclass
class PairingData:
    """The inputs of one index pairing.

    Attributes
    ----------
    cls : SymmetryClass
        The (j,d) cell.
    hamiltonian : np.ndarray
        H (self-adjoint invertible) for even j, A (invertible) for odd j.
    dirac : np.ndarray
        D0; self-adjoint for odd d, normal for even d. For the two-unitary
        cells this is the matrix D1 whose phase is the unitary F.
    S, Sigma : SymmetryOperator or None
        The commuting symmetries. May be None for cells whose group is Z or
        2Z when only the complex (signature) index is wanted; the Z2
        machinery requires both.
    gap_override : float or None
        If given, used as the spectral gap g in the admissibility bounds
        instead of the smallest singular value of the finite matrix. Finite
        open-boundary models in a topological phase carry near-zero edge
        modes that the localizer is designed to ignore, so the physically
        meaningful g is the bulk gap; model constructors set it here.
    """

    cls: SymmetryClass
    hamiltonian: np.ndarray
    dirac: np.ndarray
    S: SymmetryOperator | None = None
    Sigma: SymmetryOperator | None = None
    gap_override: float | None = None
    tol: float = _TOL
    validate: bool = True
    #: audit record, filled at construction
    residuals: dict = field(default_factory=dict)

    def __post_init__(self):
        self.hamiltonian = np.asarray(self.hamiltonian, dtype=complex)
        self.dirac = np.asarray(self.dirac, dtype=complex)
        H, D = self.hamiltonian, self.dirac
        n = H.shape[0]
        if H.shape != (n, n) or D.shape != (n, n):
            raise KindMismatch("hamiltonian and dirac must be square, same size")
        scale_h = max(_norm(H), 1.0)
        scale_d = max(_norm(D), 1.0)
        j, d = self.cls.j, self.cls.d
        if self.validate:
            if j % 2 == 0 and np.linalg.norm(H - H.conj().T) > self.tol * scale_h:
                raise SymmetryViolation("H must be self-adjoint for even j")
            if d % 2 == 1 and np.linalg.norm(D - D.conj().T) > self.tol * scale_d:
                raise SymmetryViolation("D0 must be self-adjoint for odd d")
            if d % 2 == 0:
                res = np.linalg.norm(D @ D.conj().T - D.conj().T @ D)
                if res > 1e-9 * scale_d ** 2:
                    raise SymmetryViolation("D0 must be normal for even d")
        if linalg.gap(D) <= linalg.REL_TOL * scale_d:
            raise ZeroGap("Dirac matrix must be invertible")
        g_fin = linalg.gap(H)
        if self.gap_override is None and g_fin <= linalg.REL_TOL * scale_h:
            raise ZeroGap("Hamiltonian is singular and no bulk gap was supplied")
        self.residuals["finite_gap"] = g_fin
        if self.S is not None and self.Sigma is not None and self.validate:
            self._check_symmetries()
        elif self.cls.group == Group.Z2 and self.validate:
            raise SymmetryViolation("Z2 cells need both S and Sigma")

    def _check_symmetries(self):
        H, D = self.hamiltonian, self.dirac
        j, d = self.cls.j, self.cls.d
        S, Sg = self.S, self.Sigma
        from .symmetry import required_parity
        if S.parity != required_parity(j):
            raise SymmetryViolation(f"S parity {S.parity} wrong for j={j}")
        if Sg.parity != required_parity(d):
            raise SymmetryViolation(f"Sigma parity {Sg.parity} wrong for d={d}")
        checks = {
            _HAM_RELATION_NAME[j]:
                _ham_relation_residual(j, H, S) / max(_norm(H), 1.0),
            _DIRAC_RELATION_NAME[d]:
                _dirac_relation_residual(d, D, Sg) / max(_norm(D), 1.0),
            "[S, D0] = 0":
                np.linalg.norm(S.matrix @ D - D @ S.matrix) / max(_norm(D), 1.0),
            "[Sigma, H] = 0":
                np.linalg.norm(Sg.matrix @ H - H @ Sg.matrix) / max(_norm(H), 1.0),
            "[S, Sigma] = 0":
                np.linalg.norm(S.matrix @ Sg.matrix - Sg.matrix @ S.matrix),
        }
        self.residuals.update(checks)
        for name, res in checks.items():
            if res > self.tol:
                raise SymmetryViolation(f"relation violated: {name} "
                                        f"(residual {res:.3e})")

    @property
    def dim(self):
        return self.hamiltonian.shape[0]

    @property
    def gap(self) -> float:
        """The gap g entering the admissibility bounds."""
        if self.gap_override is not None:
            return float(self.gap_override)
        return self.residuals["finite_gap"]

    @property
    def is_two_unitary(self) -> bool:
        return self.cls.pairing_kind == PairingKind.UNITARY_UNITARY

    def transforms(self) -> CaseTransforms:
        if self.cls.group != Group.Z2:
            raise NotZ2Case(f"({self.cls.j},{self.cls.d}) is not a Z2 cell")
        if self.S is None or self.Sigma is None:
            raise SymmetryViolation("Z2 machinery needs S and Sigma")
        return case_transforms(self.cls, self.S, self.Sigma)


def default_localizer_kind(data: PairingData) -> LocalizerKind:
    """Localizer kind when the class does not dictate one (non-Z2 cells)."""
    if data.cls.group == Group.Z2:
        return data.transforms().localizer_kind
    return LocalizerKind.ODD if data.cls.j % 2 else LocalizerKind.EVEN


def _two_unitary_blocks(data):
    D1 = data.dirac
    n = D1.shape[0]
    Z = np.zeros((n, n))
    Dblk = np.block([[Z, D1], [D1.conj().T, Z]])
    A = data.hamiltonian
    Ablk = np.block([[A, Z], [Z, A]])
    return Dblk, Ablk


def spectral_localizer(data: PairingData, kappa: float,
                       kind: LocalizerKind | None = None):
    """The Hermitian spectral localizer for the given tuning parameter.

    Even kind: [[-H, kappa D0*], [kappa D0, H]].
    Odd kind: [[kappa D0, A], [A*, -kappa D0]] with A = H for the
    two-projection cells. Two-unitary cells use the odd form on the
    quadrupled space with D0 replaced by [[0, D1], [D1*, 0]].
    """
    if kappa <= 0:
        raise KindMismatch("kappa must be positive")
    if kind is None:
        kind = default_localizer_kind(data)
    if data.is_two_unitary:
        if kind != LocalizerKind.ODD:
            return _two_unitary_even_localizer(data, kappa)
        Dblk, Ablk = _two_unitary_blocks(data)
        kD = kappa * Dblk
        return np.block([[kD, Ablk], [Ablk.conj().T, -kD]])
    H, D = data.hamiltonian, data.dirac
    if kind == LocalizerKind.EVEN:
        if data.cls.j % 2:
            raise KindMismatch("even localizer needs a self-adjoint H")
        return np.block([[-H, kappa * D.conj().T], [kappa * D, H]])
    kD = kappa * D
    return np.block([[kD, H], [H.conj().T, -kD]])


def _two_unitary_even_localizer(data, kappa):
    # even-kind assembly for two unitaries, used for cross checks
    A = data.hamiltonian
    D1 = data.dirac
    n = A.shape[0]
    Z = np.zeros((n, n))
    kD1 = kappa * D1
    return np.block([
        [Z, -A, kD1.conj().T, Z],
        [-A.conj().T, Z, Z, kD1.conj().T],
        [kD1, Z, Z, A],
        [Z, kD1, A.conj().T, Z],
    ])


def localizer_dirac(data: PairingData, kind: LocalizerKind | None = None):
    """The doubled Dirac matrix paired with the localizer of the same kind."""
    if kind is None:
        kind = default_localizer_kind(data)
    if data.is_two_unitary:
        Dblk, _ = _two_unitary_blocks(data)
        Z = np.zeros_like(Dblk)
        return np.block([[Dblk, Z], [Z, -Dblk]])
    D = data.dirac
    Z = np.zeros_like(D)
    if kind == LocalizerKind.EVEN:
        return np.block([[Z, D.conj().T], [D, Z]])
    return np.block([[D, Z], [Z, -D]])


@dataclass(frozen=True)
class AdmissibleBounds:
    kappa_max: float
    g: float
    norm_ham: float
    norm_comm: float
    strict: bool       # True when the kappa bound is strict (odd localizer)

    def rho_min(self, kappa: float) -> float:
        return 2.0 * self.g / kappa

    def is_admissible(self, kappa: float, rho: float) -> bool:
        if self.norm_comm == 0.0:
            kappa_ok = kappa > 0
        else:
            kappa_ok = kappa < self.kappa_max if self.strict \
                else kappa <= self.kappa_max
        return kappa_ok and rho > self.rho_min(kappa)


def admissible_bounds(data: PairingData) -> AdmissibleBounds:
    """kappa_max = g^3 / (12 |H| |[D0,H]|) and rho_min(kappa) = 2g/kappa.

    The commutator and norms are reported for audit. A vanishing commutator
    is flagged by kappa_max = +inf.
    """
    g = data.gap
    if g <= 0:
        raise ZeroGap("admissibility bounds need g > 0")
    if data.is_two_unitary:
        Dblk, Ablk = _two_unitary_blocks(data)
        norm_h = _norm(Ablk)
        comm = _norm(Dblk @ Ablk - Ablk @ Dblk)
    else:
        H, D = data.hamiltonian, data.dirac
        norm_h = _norm(H)
        comm = _norm(D @ H - H @ D)
    kind = default_localizer_kind(data)
    strict = kind == LocalizerKind.ODD
    if comm == 0.0:
        kappa_max = np.inf
    else:
        kappa_max = g ** 3 / (12.0 * norm_h * comm)
    return AdmissibleBounds(kappa_max=kappa_max, g=g, norm_ham=norm_h,
                            norm_comm=comm, strict=strict)


def _absolute_value(D):
    """|D| = (D* D)^(1/2) as a Hermitian matrix (real symmetric when D is real)."""
    D = np.asarray(D)
    M = D.conj().T @ D
    M = (M + M.conj().T) / 2
    if not np.iscomplexobj(D) or np.max(np.abs(D.imag)) <= 1e-12 * max(_norm(D), 1.0):
        M = M.real
    w, V = np.linalg.eigh(M)
    w = np.sqrt(np.clip(w, 0.0, None))
    return (V * w) @ V.conj().T


def dirac_isometry(data: PairingData, rho: float) -> Isometry:
    """Isometry onto the base-space spectral subspace chi(|D0| <= rho)."""
    return spectral_projection_isometry(_absolute_value(data.dirac), rho)


def _block_isometry(V, blocks):
    n, k = V.shape
    cols = np.zeros((blocks * n, blocks * k), dtype=V.dtype)
    for b in range(blocks):
        cols[b * n:(b + 1) * n, b * k:(b + 1) * k] = V
    return Isometry(columns=cols)


def complex_index(data: PairingData, kappa: float, rho: float,
                  check_bound: bool = True) -> int:
    """Half-signature of the compressed spectral localizer.

    Verifies the operational lower bound: the compressed localizer must have
    its smallest singular value at least g/2, otherwise the truncation is not
    trustworthy and BoundViolation is raised.
    """
    kind = default_localizer_kind(data)
    L = spectral_localizer(data, kappa, kind=kind)
    if data.is_two_unitary:
        Dblk, _ = _two_unitary_blocks(data)
        V = spectral_projection_isometry(_absolute_value(Dblk), rho)
        iso = _block_isometry(V.columns, 2)
    else:
        V = dirac_isometry(data, rho)
        iso = _block_isometry(V.columns, 2)
    L_rho = compress(L, iso)
    if check_bound:
        loc_gap = linalg.gap(L_rho)
        if loc_gap < data.gap / 2:
            raise BoundViolation(
                f"localizer gap {loc_gap:.4e} below g/2 = {data.gap / 2:.4e}"
            )
    sig = linalg.signature(L_rho)
    if sig % 2 != 0:
        raise NumericalFailure("odd signature; localizer assembly inconsistent")
    return sig // 2


@dataclass(frozen=True)
class LocalizerBundle:
    """Spectral localizer with its skew transform and transformed Dirac data."""

    L: np.ndarray
    Lhat: np.ndarray
    Dhat: np.ndarray
    transforms: CaseTransforms
    kappa: float


def skew_localizer(data: PairingData, kappa: float) -> LocalizerBundle:
    """Assemble L, then L-hat = i R* L R and D-hat = i R* D R (both real skew)."""
    ct = data.transforms()
    L = spectral_localizer(data, kappa, kind=ct.localizer_kind)
    D = localizer_dirac(data, kind=ct.localizer_kind)
    Q = ct.Q.matrix
    resid = np.linalg.norm(Q.T @ L.conj() @ Q + L)
    if resid > 1e-9 * max(_norm(L), 1.0):
        raise RealityViolation(
            f"Q* conj(L) Q = -L violated (residual {resid:.3e})"
        )
    R = ct.R
    Lhat_c = 1j * R.conj().T @ L @ R
    Dhat_c = 1j * R.conj().T @ D @ R
    scale = max(_norm(L), 1.0)
    if np.max(np.abs(Lhat_c.imag)) > 1e-10 * scale:
        raise RealityViolation("i R* L R has a non-negligible imaginary part")
    if np.max(np.abs(Dhat_c.imag)) > 1e-10 * max(_norm(D), 1.0):
        raise RealityViolation("i R* D R has a non-negligible imaginary part")
    Lhat = (Lhat_c.real - Lhat_c.real.T) / 2
    Dhat = (Dhat_c.real - Dhat_c.real.T) / 2
    return LocalizerBundle(L=L, Lhat=Lhat, Dhat=Dhat, transforms=ct,
                           kappa=kappa)


def _skew_restriction(bundle: LocalizerBundle, rho: float):
    """Real isometry onto chi(|D-hat| <= rho) plus the compressed pair."""
    absD = _absolute_value(bundle.Dhat)
    iso = spectral_projection_isometry(absD, rho)
    if np.iscomplexobj(iso.columns):  # pragma: no cover - defensive
        raise NumericalFailure("restriction basis is not real")
    L_rho = compress(bundle.Lhat, iso)
    D_rho = compress(bundle.Dhat, iso)
    return iso, L_rho, D_rho


def z2_index_pfaffian(data: PairingData, kappa: float, rho: float) -> int:
    """sgn Pf(L-hat restricted) * sgn Pf(D-hat restricted), one shared basis."""
    bundle = skew_localizer(data, kappa)
    iso, L_rho, D_rho = _skew_restriction(bundle, rho)
    if L_rho.shape[0] % 2 != 0:
        raise NumericalFailure("restriction subspace has odd dimension")
    return linalg.pfaffian_sign(L_rho) * linalg.pfaffian_sign(D_rho)


def z2_index_det(data: PairingData, kappa: float, rho: float) -> int:
    """Determinant-sign form of the Z2 index for the chiral cells (j+d odd).

    In the eigenbasis of the compressed chirality operator the restricted
    skew localizer and Dirac matrix are strictly off-diagonal; the index is
    the product of the determinant signs of their lower-left blocks. The same
    grading basis is used for both matrices so the basis-choice signs cancel.
    """
    if (data.cls.j + data.cls.d) % 2 == 0:
        raise NotChiralCase("determinant form needs j+d odd")
    bundle = skew_localizer(data, kappa)
    ct = bundle.transforms
    if ct.chirality is None:  # pragma: no cover - chiral cells always carry it
        raise NotChiralCase("no chirality operator for this cell")
    iso, L_rho, D_rho = _skew_restriction(bundle, rho)
    G_rho = compress(ct.chirality, iso).real
    k = G_rho.shape[0]
    if np.linalg.norm(G_rho @ G_rho - np.eye(k)) > 1e-9 * k:
        raise NumericalFailure("restriction subspace not chirality-invariant")
    w, U = np.linalg.eigh(G_rho)
    plus = U[:, w > 0]
    minus = U[:, w < 0]
    if plus.shape[1] != minus.shape[1]:
        raise NumericalFailure("chirality grading is unbalanced on the window")
    off_p = np.linalg.norm(plus.T @ L_rho @ plus)
    off_m = np.linalg.norm(minus.T @ L_rho @ minus)
    if max(off_p, off_m) > 1e-8 * max(_norm(L_rho), 1.0):
        raise NumericalFailure("skew localizer not off-diagonal in the grading")
    B = minus.T @ L_rho @ plus
    C = minus.T @ D_rho @ plus
    return linalg.det_sign_real(B) * linalg.det_sign_real(C)


def localizer_gap(data: PairingData, kappa: float, rho: float) -> float:
    """Smallest singular value of the compressed skew (or spectral) localizer."""
    if data.cls.group == Group.Z2:
        bundle = skew_localizer(data, kappa)
        _, L_rho, _ = _skew_restriction(bundle, rho)
        return linalg.gap(L_rho)
    kind = default_localizer_kind(data)
    L = spectral_localizer(data, kappa, kind=kind)
    blocks = 2
    if data.is_two_unitary:
        Dblk, _ = _two_unitary_blocks(data)
        V = spectral_projection_isometry(_absolute_value(Dblk), rho)
    else:
        V = dirac_isometry(data, rho)
    return linalg.gap(compress(L, _block_isometry(V.columns, blocks)))


@dataclass(frozen=True)
class PlateauPoint:
    kappa: float
    rho: float
    admissible: bool
    localizer_gap: float | None
    value: int | None
    error: str | None = None


@dataclass(frozen=True)
class PlateauResult:
    points: tuple
    constant_sign: bool
    sign: int | None

    @property
    def plateau(self):
        """Admissible points carrying the common sign."""
        if not self.constant_sign:
            return ()
        return tuple(p for p in self.points if p.admissible and p.value is not None)


def plateau_scan(data: PairingData, kappa_grid, rho_grid,
                 method: str = "pfaffian") -> PlateauResult:
    """Evaluate the index over a (kappa, rho) grid and report the plateau."""
    if method == "pfaffian":
        fn = z2_index_pfaffian
    elif method == "det":
        fn = z2_index_det
    else:
        raise KindMismatch(f"unknown plateau method {method!r}")
    bounds = admissible_bounds(data)
    points = []
    for kappa in kappa_grid:
        for rho in rho_grid:
            adm = bounds.is_admissible(kappa, rho)
            try:
                val = fn(data, kappa, rho)
                lg = localizer_gap(data, kappa, rho)
                points.append(PlateauPoint(kappa, rho, adm, lg, val))
            except Exception as exc:  # noqa: BLE001 - recorded per point
                points.append(PlateauPoint(kappa, rho, adm, None, None,
                                           error=f"{type(exc).__name__}: {exc}"))
    signs = {p.value for p in points if p.admissible and p.value is not None}
    constant = len(signs) == 1
    return PlateauResult(points=tuple(points), constant_sign=constant,
                         sign=signs.pop() if constant else None)


def nudge_rho(data: PairingData, rho: float, guard: float = 1e-9) -> float:
    """Move rho off any eigenvalue of |D0| (or |D-hat|) it collides with.

    The nudged value is halfway between the colliding eigenvalue and the next
    one above it.
    """
    if data.cls.group == Group.Z2:
        # |D-hat| has the same spectrum as the doubled |D|
        D = localizer_dirac(data)
    else:
        D = data.dirac
    vals = np.linalg.eigvalsh(_absolute_value(D))
    vals = np.unique(np.round(vals, 12))
    idx = int(np.argmin(np.abs(vals - rho)))
    if abs(vals[idx] - rho) >= guard:
        return rho
    e = vals[idx]
    above = vals[vals > e + guard]
    if above.size:
        return float(e + 0.5 * (above[0] - e))
    return float(e + max(1.0, 0.1 * abs(e)))
