"""Symmetry operators, relation checks, the (j,d) classification table and
the per-case (Q, R, N) transforms used to build skew localizers.

A symmetry operator is a real unitary S with S^2 = +1 (even) or S^2 = -1
(odd). An operator A can be related to its complex conjugate or transpose
through S in six ways (even/odd real, even/odd symmetric, even/odd
Lagrangian); these relations drive the classification of index pairings by a
pair (j,d) of integers mod 8, where j labels the relation satisfied by the
Hamiltonian datum (P or U) and d the relation satisfied by the Dirac datum
(E or F).
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import (
    NotProjection,
    NotZ2Case,
    OddDimension,
    OddParity,
    OutOfRange,
    ParityMismatch,
    SymmetryMismatch,
)

_TOL = 1e-9


def _norm(A):
    return float(np.linalg.norm(A, 2)) if A.size else 0.0


@dataclass(frozen=True)
class SymmetryOperator:
    """A real unitary with a definite square, S^2 = parity * 1."""

    matrix: np.ndarray
    parity: int

    def __post_init__(self):
        M = np.asarray(self.matrix)
        if np.iscomplexobj(M):
            if np.max(np.abs(M.imag)) > 1e-12 * max(_norm(M.real), 1.0):
                raise SymmetryMismatch("symmetry operator must be real")
            M = M.real
        M = M.astype(float)
        object.__setattr__(self, "matrix", M)
        n = M.shape[0]
        if np.linalg.norm(M @ M.T - np.eye(n)) > 1e-10 * n:
            raise SymmetryMismatch("symmetry operator must be orthogonal")
        if self.parity not in (1, -1):
            raise SymmetryMismatch("parity must be +1 or -1")
        if np.linalg.norm(M @ M - self.parity * np.eye(n)) > 1e-10 * n:
            raise SymmetryMismatch("matrix squared does not equal parity * 1")

    @property
    def dim(self):
        return self.matrix.shape[0]

    @staticmethod
    def identity(n):
        return SymmetryOperator(np.eye(n), +1)


class Relation(Enum):
    EVEN_REAL = "even real"
    ODD_REAL = "odd real"
    EVEN_SYMMETRIC = "even symmetric"
    ODD_SYMMETRIC = "odd symmetric"
    EVEN_LAGRANGIAN = "even Lagrangian"
    ODD_LAGRANGIAN = "odd Lagrangian"


_RELATION_PARITY = {
    Relation.EVEN_REAL: +1,
    Relation.ODD_REAL: -1,
    Relation.EVEN_SYMMETRIC: +1,
    Relation.ODD_SYMMETRIC: -1,
    Relation.EVEN_LAGRANGIAN: +1,
    Relation.ODD_LAGRANGIAN: -1,
}


def relation_residual(A, S: SymmetryOperator, relation: Relation) -> float:
    """Norm of the defect of the stated relation (0 means it holds exactly)."""
    A = np.asarray(A)
    M = S.matrix
    if relation in (Relation.EVEN_REAL, Relation.ODD_REAL):
        return float(np.linalg.norm(M.T @ A.conj() @ M - A))
    if relation in (Relation.EVEN_SYMMETRIC, Relation.ODD_SYMMETRIC):
        return float(np.linalg.norm(M.T @ A.T @ M - A))
    return float(np.linalg.norm(M.T @ A.conj() @ M - (np.eye(A.shape[0]) - A)))


def check_relation(A, S: SymmetryOperator, relation: Relation, tol=_TOL) -> bool:
    """Whether A satisfies the given relation with respect to S, to tol.

    Relations: (even/odd) real means S* conj(A) S = A, symmetric means
    S* A^T S = A, Lagrangian means S* conj(P) S = 1 - P for a projection P.
    The relation's parity must match S.parity.
    """
    A = np.asarray(A)
    if _RELATION_PARITY[relation] != S.parity:
        raise ParityMismatch(
            f"relation {relation.value} needs parity {_RELATION_PARITY[relation]}, "
            f"S has parity {S.parity}"
        )
    scale = max(_norm(A), 1.0)
    if relation in (Relation.EVEN_LAGRANGIAN, Relation.ODD_LAGRANGIAN):
        if np.linalg.norm(A @ A - A) > tol * scale or \
           np.linalg.norm(A - A.conj().T) > tol * scale:
            raise NotProjection("Lagrangian relations apply to projections only")
    return relation_residual(A, S, relation) <= tol * scale


class Group(Enum):
    Z = "Z"
    TWO_Z = "2Z"
    Z2 = "Z2"
    ZERO = "0"


class PairingKind(Enum):
    #: d even, j odd: two unitaries U and F, paired through a doubled space.
    UNITARY_UNITARY = "unitary-unitary"
    #: d even, j even: projection P against unitary F, T = P F P + 1 - P.
    PROJECTION_UNITARY = "projection-unitary"
    #: d odd, j odd: unitary U against projection E, T = E U E + 1 - E.
    UNITARY_PROJECTION = "unitary-projection"
    #: d odd, j even: two projections, T = E (1-2P) E + 1 - E.
    PROJECTION_PROJECTION = "projection-projection"


# The classification table, transcribed literally cell by cell (rows j = 0..7,
# columns d = 0..7). It is stored as data, not generated from a formula.
_Z = Group.Z
_T = Group.TWO_Z
_2 = Group.Z2
_0 = Group.ZERO
CLASSIFICATION_TABLE = (
    (_Z, _0, _0, _0, _T, _0, _2, _2),
    (_2, _Z, _0, _0, _0, _T, _0, _2),
    (_2, _2, _Z, _0, _0, _0, _T, _0),
    (_0, _2, _2, _Z, _0, _0, _0, _T),
    (_T, _0, _2, _2, _Z, _0, _0, _0),
    (_0, _T, _0, _2, _2, _Z, _0, _0),
    (_0, _0, _T, _0, _2, _2, _Z, _0),
    (_0, _0, _0, _T, _0, _2, _2, _Z),
)


def required_parity(index: int) -> int:
    """Parity of the symmetry operator demanded by row/column index mod 8."""
    return +1 if index % 8 in (0, 1, 2, 7) else -1


@dataclass(frozen=True)
class SymmetryClass:
    j: int
    d: int
    group: Group = field(init=False)
    pairing_kind: PairingKind = field(init=False)

    def __post_init__(self):
        if not (0 <= self.j <= 7 and 0 <= self.d <= 7):
            raise OutOfRange(f"(j,d)=({self.j},{self.d}) outside 0..7")
        object.__setattr__(self, "group", CLASSIFICATION_TABLE[self.j][self.d])
        if self.d % 2 == 1:
            kind = (PairingKind.UNITARY_PROJECTION if self.j % 2
                    else PairingKind.PROJECTION_PROJECTION)
        else:
            kind = (PairingKind.UNITARY_UNITARY if self.j % 2
                    else PairingKind.PROJECTION_UNITARY)
        object.__setattr__(self, "pairing_kind", kind)


def classify(j: int, d: int) -> SymmetryClass:
    """Look up the (j,d) cell of the classification table."""
    return SymmetryClass(j=j, d=d)


def symmetry_root(S: SymmetryOperator):
    """Unitary square root R of an even symmetry with spectrum in {1, i}.

    R = P_+ + i P_- with P_+/- the eigenprojections of S at +1/-1. Then
    R^2 = S and conj(R) = R*.
    """
    if S.parity != +1:
        raise OddParity("symmetry roots with spectrum {1,i} exist for even S only")
    M = S.matrix
    n = M.shape[0]
    Pp = (np.eye(n) + M) / 2.0
    Pm = (np.eye(n) - M) / 2.0
    return Pp + 1j * Pm


def normal_form_odd_symmetry(S: SymmetryOperator):
    """Real orthogonal W with W^T S W = [[0, 1],[-1, 0]] (half-size blocks).

    An odd real unitary is a real orthogonal complex structure, so it can be
    brought to the standard block form by a real orthogonal basis change. The
    pairs (v, Sv) are built by Gram-Schmidt over the standard basis.
    """
    if S.parity != -1:
        raise OddParity("normal form applies to odd symmetries")
    M = S.matrix
    n = M.shape[0]
    if n % 2 != 0:
        raise OddDimension("odd symmetries need even dimension")
    m = n // 2
    basis = []  # orthonormal, S-invariant in pairs
    vs = []
    for k in range(n):
        if len(vs) == m:
            break
        cand = np.zeros(n)
        cand[k] = 1.0
        for b in basis:
            cand -= (b @ cand) * b
        nrm = np.linalg.norm(cand)
        if nrm < 1e-8:
            continue
        v = cand / nrm
        u = M @ v
        # u is orthogonal to v (S is skew) and to the previous S-invariant span
        for b in basis:
            u -= (b @ u) * b
        u /= np.linalg.norm(u)
        vs.append(v)
        basis.extend([v, u])
    if len(vs) != m:  # pragma: no cover - defensive
        raise OddDimension("failed to pair basis vectors under S")
    V = np.column_stack(vs)
    W = np.hstack([V, -M @ V])
    return W


class LocalizerKind(Enum):
    EVEN = "even"
    ODD = "odd"


@dataclass(frozen=True)
class CaseTransforms:
    """The (Q, R, N) data turning a spectral localizer into a skew one.

    Q is an even symmetry of the localizer space with Q* conj(L) Q = -L,
    R is a unitary root of Q (R^2 = Q, conj(R) = R*), so that i R* L R is
    real skew. For the chiral cases (j+d odd) N is a real orthogonal basis
    change after which the skew localizer is strictly off-diagonal;
    ``chirality`` is the corresponding grading operator (real symmetric
    involution anticommuting with the skew localizer).
    """

    Q: SymmetryOperator
    R: np.ndarray
    N: np.ndarray | None
    localizer_kind: LocalizerKind
    chirality: np.ndarray | None = None


def _kron2(pauli, half):
    return np.kron(pauli, np.eye(half))


_S0 = np.array([[1.0, 0.0], [0.0, 1.0]])
_S2 = np.array([[0.0, -1.0j], [1.0j, 0.0]])
_IS2 = np.array([[0.0, 1.0], [-1.0, 0.0]])  # i * sigma_2, real


def case_transforms(cls: SymmetryClass, S: SymmetryOperator,
                    Sigma: SymmetryOperator) -> CaseTransforms:
    """Q, R (and N for the chiral cases) for a Z2 cell, in the input basis.

    For the families whose construction is stated in the normal form of an
    odd product Sigma*S, the inputs are conjugated to that normal form
    internally and the transforms are conjugated back, so the returned
    matrices act directly on the caller's basis.
    """
    if cls.group != Group.Z2:
        raise NotZ2Case(f"(j,d)=({cls.j},{cls.d}) is {cls.group.value}, not Z2")
    if S.dim != Sigma.dim:
        raise SymmetryMismatch("S and Sigma act on different spaces")
    if np.linalg.norm(S.matrix @ Sigma.matrix - Sigma.matrix @ S.matrix) \
            > 1e-10 * S.dim:
        raise SymmetryMismatch("S and Sigma must commute")
    if S.parity != required_parity(cls.j) or Sigma.parity != required_parity(cls.d):
        raise SymmetryMismatch(
            f"parities ({S.parity},{Sigma.parity}) do not match cell "
            f"({cls.j},{cls.d})"
        )

    n = S.dim
    SP = Sigma.matrix @ S.matrix        # the product symmetry, real unitary
    prod_parity = S.parity * Sigma.parity
    jd = (cls.j, cls.d)
    I = np.eye(n)
    Z = np.zeros((n, n))

    if jd in ((1, 7), (5, 3), (2, 0), (6, 4)):
        # even product symmetry; Q = diag(SP, -SP), R = diag(root, i root)
        assert prod_parity == +1
        root = symmetry_root(SymmetryOperator(SP, +1))
        Q = np.block([[SP, Z], [Z, -SP]])
        R = np.block([[root, Z], [Z, 1j * root]])
        kind = LocalizerKind.ODD if jd in ((1, 7), (5, 3)) else LocalizerKind.EVEN
        return CaseTransforms(Q=SymmetryOperator(Q, +1), R=R, N=None,
                              localizer_kind=kind)

    if jd in ((3, 1), (7, 5), (0, 6), (4, 2)):
        # odd product symmetry; work in its normal form
        assert prod_parity == -1
        W = normal_form_odd_symmetry(SymmetryOperator(SP, -1))
        half = n // 2
        s0 = _kron2(_S0, half)
        s2 = _kron2(_S2, half)
        J = _kron2(_IS2, half)          # the normal form of SP, real
        Q_nf = np.block([[Z, J], [-J, Z]])
        R_nf = (1 + 1j) / 2 * np.block([[s0, s2], [-s2, s0]])
        W2 = np.block([[W, Z], [Z, W]])
        Q = W2 @ Q_nf @ W2.T
        R = W2 @ R_nf @ W2.T
        kind = LocalizerKind.ODD if jd in ((3, 1), (7, 5)) else LocalizerKind.EVEN
        return CaseTransforms(Q=SymmetryOperator(Q, +1), R=R, N=None,
                              localizer_kind=kind)

    if jd in ((0, 7), (4, 3), (2, 1), (6, 5)):
        # even product symmetry; the skew localizer is already off-diagonal
        assert prod_parity == +1
        root = symmetry_root(SymmetryOperator(SP, +1))
        Q = np.block([[Z, SP], [SP, Z]])
        R = 0.5 * np.block([[(1 - 1j) * root, (1 + 1j) * root],
                            [(1 + 1j) * root, (1 - 1j) * root]])
        kind = LocalizerKind.EVEN if jd in ((0, 7), (4, 3)) else LocalizerKind.ODD
        chirality = np.block([[I, Z], [Z, -I]])
        return CaseTransforms(Q=SymmetryOperator(Q, +1), R=R,
                              N=np.eye(2 * n), localizer_kind=kind,
                              chirality=chirality)

    if jd in ((1, 0), (5, 4)):
        # two unitaries, even product symmetry, quadrupled space
        assert prod_parity == +1
        root = symmetry_root(SymmetryOperator(SP, +1))
        Q = np.zeros((4 * n, 4 * n))
        R = np.zeros((4 * n, 4 * n), dtype=complex)
        for b, (qs, rs) in enumerate(zip((1, -1, -1, 1), (1, 1j, 1j, -1))):
            sl = slice(b * n, (b + 1) * n)
            Q[sl, sl] = qs * SP
            R[sl, sl] = rs * root
        N = np.kron(np.array([[1., 0, 0, 0], [0, 0, 0, 1],
                              [0, 0, 1, 0], [0, 1, 0, 0]]), I)
        chirality = np.kron(np.diag([1.0, -1.0, -1.0, 1.0]), I)
        return CaseTransforms(Q=SymmetryOperator(Q, +1), R=R, N=N,
                              localizer_kind=LocalizerKind.ODD,
                              chirality=chirality)

    if jd in ((3, 2), (7, 6)):
        # two unitaries, odd product symmetry, quadrupled space
        assert prod_parity == -1
        W = normal_form_odd_symmetry(SymmetryOperator(SP, -1))
        half = n // 2
        s0 = _kron2(_S0, half)
        s2 = _kron2(_S2, half)
        J = _kron2(_IS2, half)
        z = np.zeros((n, n))
        Q_nf = np.block([
            [z, z, z, J],
            [z, z, J, z],
            [z, -J, z, z],
            [-J, z, z, z],
        ])
        R_nf = (1 + 1j) / 2 * np.block([
            [s0, z, z, s2],
            [z, 1j * s0, -1j * s2, z],
            [z, 1j * s2, 1j * s0, z],
            [-s2, z, z, s0],
        ])
        W4 = np.kron(np.eye(4), W)
        Q = W4 @ Q_nf @ W4.T
        R = W4 @ R_nf @ W4.T
        N = np.kron(np.array([[1., 0, 0, 0], [0, 0, 0, 1],
                              [0, 0, 1, 0], [0, 1, 0, 0]]), I)
        chirality = np.kron(np.diag([1.0, -1.0, -1.0, 1.0]), I)
        return CaseTransforms(Q=SymmetryOperator(Q, +1), R=R, N=N,
                              localizer_kind=LocalizerKind.ODD,
                              chirality=chirality)

    raise NotZ2Case(f"unhandled Z2 cell ({cls.j},{cls.d})")  # pragma: no cover
