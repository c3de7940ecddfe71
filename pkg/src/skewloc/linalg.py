"""Dense linear-algebra kernels.

Hermitian eigendecomposition, Pfaffian sign, signature, determinant sign,
singular-value gap and spectral compression. Everything downstream is built
on these few primitives.

Sign conventions
----------------
The sign of a Pfaffian depends on the basis ordering. The library only
guarantees that *products* of two Pfaffian signs evaluated in one shared
basis are meaningful; single signs are reported as computed in the stored
basis of the input matrix.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import (
    BoundaryEigenvalue,
    DimensionMismatch,
    NotHermitian,
    NotSkew,
    NumericalFailure,
    OddDimension,
    SingularMatrix,
)

#: Relative singularity threshold used throughout (double precision, dense
#: O(n^3) kernels).
REL_TOL = 1e-10


def _norm(A):
    return float(np.linalg.norm(A, 2)) if A.size else 0.0


@dataclass(frozen=True)
class SpectralData:
    """Eigendecomposition of a Hermitian matrix.

    Attributes
    ----------
    eigenvalues : np.ndarray
        Real eigenvalues in ascending order.
    eigenvectors : np.ndarray
        Unitary matrix whose columns are the eigenvectors.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True)
class Isometry:
    """Orthonormal columns spanning a compressed subspace."""

    columns: np.ndarray

    @property
    def source_dim(self):
        return self.columns.shape[0]

    @property
    def target_dim(self):
        return self.columns.shape[1]

    def __post_init__(self):
        V = self.columns
        G = V.conj().T @ V
        if np.linalg.norm(G - np.eye(V.shape[1])) > 1e-12 * max(1, V.shape[1]):
            raise NumericalFailure("isometry columns are not orthonormal")


def eig_hermitian(H) -> SpectralData:
    """Eigendecomposition of a Hermitian matrix, ascending eigenvalues."""
    H = np.asarray(H)
    nrm = _norm(H)
    if np.linalg.norm(H - H.conj().T) > REL_TOL * max(nrm, 1.0):
        raise NotHermitian("matrix is not Hermitian to tolerance")
    try:
        w, V = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - rare
        raise NumericalFailure(str(exc)) from exc
    return SpectralData(eigenvalues=w, eigenvectors=V)


def gap(A) -> float:
    """Smallest singular value of A (0 if singular)."""
    A = np.asarray(A)
    if A.size == 0:
        return 0.0
    return float(np.linalg.svd(A, compute_uv=False)[-1])


def signature(H, tol=REL_TOL) -> int:
    """(# positive eigenvalues) - (# negative eigenvalues) of Hermitian H."""
    H = np.asarray(H)
    nrm = _norm(H)
    if np.linalg.norm(H - H.conj().T) > REL_TOL * max(nrm, 1.0):
        raise NotHermitian("signature requires a Hermitian matrix")
    w = np.linalg.eigvalsh(H)
    if np.min(np.abs(w)) <= tol * max(nrm, 1.0):
        raise SingularMatrix("signature undefined: eigenvalue at zero")
    return int(np.sum(w > 0) - np.sum(w < 0))


def det_sign_real(A, tol=REL_TOL) -> int:
    """Sign of det(A) for real invertible A.

    Computed from an LU factorization with partial pivoting: permutation
    parity times the product of diagonal signs. The determinant value itself
    is never formed (it may overflow).
    """
    A = np.asarray(A)
    if np.iscomplexobj(A):
        if np.max(np.abs(A.imag)) > REL_TOL * max(_norm(A.real), 1.0):
            raise NotSkew("det_sign_real expects a real matrix")
        A = A.real
    A = A.astype(float)
    nrm = _norm(A)
    if nrm == 0.0 or gap(A) <= tol * nrm:
        raise SingularMatrix("det sign undefined: matrix is near singular")
    lu, piv = sla.lu_factor(A)
    sign = 1
    for i, p in enumerate(piv):
        if p != i:
            sign = -sign
    diag = np.diag(lu)
    sign *= int(np.prod(np.sign(diag)))
    if sign == 0:  # pragma: no cover - guarded by gap check above
        raise SingularMatrix("zero pivot in LU factorization")
    return sign


def _check_real_skew(A, tol=REL_TOL):
    A = np.asarray(A)
    if np.iscomplexobj(A):
        if np.max(np.abs(A.imag)) > tol * max(_norm(A.real), 1.0):
            raise NotSkew("matrix has a non-negligible imaginary part")
        A = A.real
    A = A.astype(float)
    nrm = _norm(A)
    if np.linalg.norm(A + A.T) > tol * max(nrm, 1.0):
        raise NotSkew("matrix is not antisymmetric to tolerance")
    # enforce exact antisymmetry in storage
    return (A - A.T) / 2.0


def pfaffian_sign(A, tol=REL_TOL) -> int:
    """Sign of the Pfaffian of a real, invertible, skew-symmetric matrix.

    Uses Parlett-Reid skew tridiagonalization with partial pivoting. The
    Gauss transforms have determinant one, so the sign is the permutation
    parity times the product of the super-diagonal signs of the reduced
    tridiagonal form.
    """
    A = _check_real_skew(A, tol)
    n = A.shape[0]
    if n % 2 != 0:
        raise OddDimension("odd-dimensional real skew matrices are singular")
    nrm = _norm(A)
    if nrm == 0.0 or gap(A) <= tol * nrm:
        raise SingularMatrix("Pfaffian sign undefined: near-singular input")

    M = A.copy()
    sign = 1
    for k in range(0, n - 2, 2):
        col = np.abs(M[k + 1:, k])
        p = k + 1 + int(np.argmax(col))
        if M[p, k] == 0.0:  # pragma: no cover - excluded by gap check
            raise SingularMatrix("zero pivot in Parlett-Reid reduction")
        if p != k + 1:
            M[[k + 1, p], :] = M[[p, k + 1], :]
            M[:, [k + 1, p]] = M[:, [p, k + 1]]
            sign = -sign
        piv = M[k + 1, k]
        if k + 2 < n:
            tau = M[k + 2:, k] / piv
            M[k + 2:, :] -= np.outer(tau, M[k + 1, :])
            M[:, k + 2:] -= np.outer(M[:, k + 1], tau)
    for k in range(0, n, 2):
        sign *= 1 if M[k, k + 1] > 0 else -1
    return sign


def compress(A, iso: Isometry):
    """Compression pi A pi* of A onto the subspace spanned by the isometry."""
    A = np.asarray(A)
    V = iso.columns
    if A.shape[0] != V.shape[0] or A.shape[1] != V.shape[0]:
        raise DimensionMismatch(
            f"cannot compress {A.shape} with isometry of source dim {V.shape[0]}"
        )
    return V.conj().T @ A @ V


def spectral_projection_isometry(D, rho, tie_tol=1e-9) -> Isometry:
    """Isometry onto the span of eigenvectors of Hermitian D with |eig| <= rho.

    For real symmetric D the returned basis is real. Raises
    BoundaryEigenvalue when some |eigenvalue| sits within ``tie_tol`` of rho;
    the caller must perturb rho, a clean spectral cut is required.
    """
    D = np.asarray(D)
    nrm = _norm(D)
    if np.linalg.norm(D - D.conj().T) > REL_TOL * max(nrm, 1.0):
        raise NotHermitian("spectral projection requires Hermitian input")
    real_input = not np.iscomplexobj(D) or np.max(np.abs(D.imag)) <= 1e-12 * max(nrm, 1.0)
    if real_input:
        w, V = np.linalg.eigh(D.real.astype(float))
    else:
        w, V = np.linalg.eigh(D)
    if np.any(np.abs(np.abs(w) - rho) < tie_tol):
        raise BoundaryEigenvalue(
            f"eigenvalue of |D| within {tie_tol} of rho={rho}; perturb rho"
        )
    keep = np.abs(w) <= rho
    return Isometry(columns=V[:, keep])
