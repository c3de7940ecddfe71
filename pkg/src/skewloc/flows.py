"""Spectral flow, Z2-valued flows and the brute-force kernel-parity oracle.

All flows operate on sampled matrix paths. For a continuous path of Hermitian
matrices with invertible endpoints the net signed crossing count through zero
equals the difference of the endpoint Morse indices, so the flow itself is
exact; the sampled crossing ledger exists for diagnostics and for detecting
undersampled inputs. The Z2 flows (orientation flow, even and odd
half-spectral flow) reduce to Pfaffian signs of endpoints or to a parity of a
half-path spectral flow.

Index pairings of truncated operators are evaluated by the midpoint rule:
every crossing of a straight line between unitaries sits at t = 1/2, and a
spectral window of the Dirac matrix discards the zero modes pinned to the
truncation boundary, which otherwise cancel the interior ones in the count.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg as sla

from . import linalg
from .errors import (
    AmbiguousKernel,
    FlowDisagreement,
    KindMismatch,
    MidpointDegeneracy,
    NotProjection,
    NotUnitary,
    NotZ2Case,
    NumericalFailure,
    OddParity,
    SingularEndpoint,
    SkewlocError,
    SymmetryViolation,
    UnderSampled,
)
from .localizer import PairingData
from .symmetry import Group, PairingKind, SymmetryOperator, symmetry_root

_TOL = 1e-10


def _norm(A):
    return float(np.linalg.norm(A, 2)) if np.asarray(A).size else 0.0


class PathKind(Enum):
    HERMITIAN = "Hermitian"
    REAL_SKEW = "RealSkew"
    #: complex skew-adjoint samples; used by the orientation flow
    SKEW_ADJOINT = "SkewAdjoint"


@dataclass(frozen=True)
class OperatorPath:
    """A sampled norm-continuous path of structured matrices on [0, 1].

    Attributes
    ----------
    samples : tuple of (float, np.ndarray)
        Strictly increasing parameters with t0 = 0 and t_last = 1.
    kind : PathKind
        Structure every sample must satisfy to 1e-10 (relative).
    continuity_budget : float or None
        Maximal allowed norm difference of consecutive samples. When None, a
        default of half the smaller endpoint gap is used by the flows.
    """

    samples: tuple
    kind: PathKind
    continuity_budget: float | None = None

    def __post_init__(self):
        ts = [t for t, _ in self.samples]
        if len(ts) < 2 or ts[0] != 0.0 or ts[-1] != 1.0:
            raise KindMismatch("path must be sampled on [0,1] with both endpoints")
        if any(t1 >= t2 for t1, t2 in zip(ts, ts[1:])):
            raise KindMismatch("path parameters must be strictly increasing")
        for t, M in self.samples:
            scale = max(_norm(M), 1.0)
            if self.kind == PathKind.HERMITIAN:
                if np.linalg.norm(M - M.conj().T) > _TOL * scale:
                    raise KindMismatch(f"sample at t={t} is not Hermitian")
            elif self.kind == PathKind.SKEW_ADJOINT:
                if np.linalg.norm(M + M.conj().T) > _TOL * scale:
                    raise KindMismatch(f"sample at t={t} is not skew-adjoint")
            else:
                if np.iscomplexobj(M) and np.max(np.abs(M.imag)) > _TOL * scale:
                    raise KindMismatch(f"sample at t={t} is not real")
                if np.linalg.norm(M + M.T) > _TOL * scale:
                    raise KindMismatch(f"sample at t={t} is not antisymmetric")

    @staticmethod
    def linear(M0, M1, kind: PathKind, samples: int = 201,
               continuity_budget: float | None = None) -> "OperatorPath":
        """Uniformly sampled straight line from M0 to M1."""
        M0 = np.asarray(M0)
        M1 = np.asarray(M1)
        ts = np.linspace(0.0, 1.0, samples)
        pts = tuple((float(t), (1 - t) * M0 + t * M1) for t in ts)
        return OperatorPath(samples=pts, kind=kind,
                            continuity_budget=continuity_budget)

    @property
    def endpoints(self):
        return self.samples[0][1], self.samples[-1][1]


@dataclass(frozen=True)
class CrossingLedger:
    """Zero crossings detected between consecutive samples.

    Each entry is (t_interval, multiplicity, direction) with direction +1 for
    eigenvalues moving upward through zero, -1 downward, 0 when unsigned
    (skew paths, where crossings come in conjugate pairs and only the parity
    per interval is observable).
    """

    crossings: tuple

    @property
    def total_multiplicity(self):
        return sum(m for _, m, _ in self.crossings)

    @property
    def net_flow(self):
        return sum(m * s for _, m, s in self.crossings)


def _budget(path: OperatorPath):
    if path.continuity_budget is not None:
        return path.continuity_budget
    T0, T1 = path.endpoints
    return 0.5 * min(linalg.gap(T0), linalg.gap(T1))


def _check_continuity(path: OperatorPath):
    budget = _budget(path)
    prev = None
    for t, M in path.samples:
        if prev is not None and _norm(M - prev) > budget:
            raise UnderSampled(
                f"consecutive samples differ by more than {budget:.3e} near t={t}"
            )
        prev = M


def _hermitian_eigs(M, kind):
    if kind == PathKind.REAL_SKEW:
        M = 1j * np.asarray(M, dtype=complex)
    return np.linalg.eigvalsh(M)


def crossing_ledger(path: OperatorPath) -> CrossingLedger:
    """Locate zero crossings between consecutive samples.

    Hermitian paths: eigenvalues are matched between consecutive samples in
    sorted order and a sign change of a matched eigenvalue is a crossing. Skew
    paths keep their spectrum symmetric about zero, so sorted matching is
    blind there; instead a crossing parity is read off from the Pfaffian sign,
    which flips exactly when an odd number of conjugate pairs passes through
    zero. Samples too close to singular for a Pfaffian sign are skipped and
    absorbed into the enclosing interval.
    """
    entries = []
    if path.kind == PathKind.REAL_SKEW:
        prev_t, prev_sign = None, None
        for t, M in path.samples:
            try:
                sign = linalg.pfaffian_sign(np.real(np.asarray(M)))
            except SkewlocError:
                continue
            if prev_sign is not None and sign != prev_sign:
                entries.append(((prev_t, t), 1, 0))
            prev_t, prev_sign = t, sign
        return CrossingLedger(crossings=tuple(entries))
    prev_t, prev_w = None, None
    for t, M in path.samples:
        w = np.sort(_hermitian_eigs(M, path.kind))
        if prev_w is not None:
            up = int(np.sum((prev_w < 0) & (w >= 0)))
            down = int(np.sum((prev_w >= 0) & (w < 0)))
            if up:
                entries.append(((prev_t, t), up, +1))
            if down:
                entries.append(((prev_t, t), down, -1))
        prev_t, prev_w = t, w
    return CrossingLedger(crossings=tuple(entries))


def _count_negative(M, kind=PathKind.HERMITIAN):
    return int(np.sum(_hermitian_eigs(M, kind) < 0))


def _require_invertible(M, label):
    if linalg.gap(M) <= _TOL * max(_norm(M), 1.0):
        raise SingularEndpoint(f"{label} endpoint is singular")


def spectral_flow(path: OperatorPath) -> int:
    """Net signed eigenvalue flow through zero, right-continuous convention.

    For a continuous finite-dimensional path with invertible endpoints this is
    exactly n_-(start) - n_-(end); the sampled ledger only guards against
    undersampled inputs via the continuity budget.
    """
    if path.kind != PathKind.HERMITIAN:
        raise KindMismatch("spectral flow is defined for Hermitian paths")
    T0, T1 = path.endpoints
    _require_invertible(T0, "first")
    _require_invertible(T1, "last")
    _check_continuity(path)
    return _count_negative(T0) - _count_negative(T1)


def z2_spectral_flow(path: OperatorPath) -> int:
    """Z2 flow of a real skew path: product of the endpoint Pfaffian signs.

    Equals (-1)^(crossing count with multiplicity) for finely sampled paths,
    which the tests verify against the crossing ledger.
    """
    if path.kind != PathKind.REAL_SKEW:
        raise KindMismatch("Z2 spectral flow is defined for real skew paths")
    T0, T1 = path.endpoints
    _require_invertible(T0, "first")
    _require_invertible(T1, "last")
    _check_continuity(path)
    return linalg.pfaffian_sign(np.real(T0)) * linalg.pfaffian_sign(np.real(T1))


def orientation_flow(path: OperatorPath, S: SymmetryOperator) -> int:
    """Z2 flow of a path of even-real skew-adjoint matrices.

    Every sample T must satisfy S* conj(T) S = T = -T*. With R a root of the
    even symmetry S, the path t -> R* T_t R is real skew and its Z2 spectral
    flow is the orientation flow. The value does not depend on the chosen
    root: two valid roots differ by a real orthogonal conjugation whose
    determinant sign cancels between the two endpoints.
    """
    if path.kind != PathKind.SKEW_ADJOINT:
        raise KindMismatch("orientation flow needs a skew-adjoint path")
    return _orientation_flow_samples(path.samples, S,
                                     budget=path.continuity_budget)


def orientation_flow_pair(P, F, S: SymmetryOperator, samples: int = 201) -> int:
    """Orientation flow of the line from i(1-2P) to F i(1-2P) F*."""
    return _orientation_pair(P, F, S, samples)


class HalfFlowParity(Enum):
    EVEN = "even"
    ODD = "odd"


def _check_projection(P, label="P"):
    P = np.asarray(P, dtype=complex)
    scale = max(_norm(P), 1.0)
    if np.linalg.norm(P @ P - P) > 1e-9 * scale or \
       np.linalg.norm(P - P.conj().T) > 1e-9 * scale:
        raise NotProjection(f"{label} is not an orthogonal projection")
    return P


def _check_unitary(U, label="U"):
    U = np.asarray(U, dtype=complex)
    n = U.shape[0]
    if np.linalg.norm(U @ U.conj().T - np.eye(n)) > 1e-9 * n:
        raise NotUnitary(f"{label} is not unitary")
    return U


def _check_half_inputs(P, F, S: SymmetryOperator, parity: HalfFlowParity):
    P = _check_projection(P)
    F = _check_unitary(F, "F")
    M = S.matrix
    scale = max(_norm(F), 1.0)
    if parity == HalfFlowParity.EVEN:
        if S.parity != +1:
            raise OddParity("even half-spectral flow needs an even symmetry")
        if np.linalg.norm(M.T @ F.T @ M + F) > 1e-8 * scale:
            raise SymmetryViolation("F is not anti-symmetric for the even flow")
    else:
        if S.parity != -1:
            raise OddParity("odd half-spectral flow needs an odd symmetry")
        if np.linalg.norm(M.T @ F.T @ M - F) > 1e-8 * scale:
            raise SymmetryViolation("F is not odd symmetric")
    if np.linalg.norm(M.T @ P.conj() @ M - P) > 1e-8 * max(_norm(P), 1.0):
        raise SymmetryViolation("P is not real with respect to S")
    return P, F


def half_spectral_flow(P, F, S: SymmetryOperator,
                       parity: HalfFlowParity) -> int:
    """Even or odd half-spectral flow of the canonical linear path.

    Even case: S even, S* conj(P) S = P and F = -S* F^T S. Odd case: S odd,
    S* conj(P) S = P and F = S* F^T S. The path is
    H_t = (1-2P) + t F*[(1-2P), F] and the value is the spectral flow over
    [0, 1/2] mod 2, reported multiplicatively. The upper endpoint may be
    singular; the right-continuous convention evaluates just past 1/2, with
    three shift sizes that must agree.
    """
    P, F = _check_half_inputs(P, F, S, parity)
    n = P.shape[0]
    H0 = np.eye(n) - 2 * P
    H1 = F.conj().T @ H0 @ F

    def h_at(t):
        return (1 - t) * H0 + t * H1

    n0 = _count_negative(H0)
    counts = []
    hscale = max(_norm(H0), 1.0)
    for delta in (1e-6, 1e-5, 1e-4):
        Ht = h_at(0.5 + delta)
        w = np.linalg.eigvalsh(Ht)
        if np.min(np.abs(w)) < 1e-12 * hscale:
            raise MidpointDegeneracy(
                "eigenvalues cluster at zero past the midpoint"
            )
        counts.append(int(np.sum(w < 0)))
    if len(set(counts)) != 1:
        raise MidpointDegeneracy(
            "midpoint crossing is not resolved by the right-continuous shifts"
        )
    sf = n0 - counts[0]
    return +1 if sf % 2 == 0 else -1


def midpoint_kernel_dimension(P, F, tol=1e-8) -> int:
    """Kernel dimension of the midpoint operator of the half-flow path.

    Structurally even for valid even/odd symmetric inputs; exposed so tests
    can verify the evenness.
    """
    P = _check_projection(P)
    F = _check_unitary(F, "F")
    n = P.shape[0]
    H0 = np.eye(n) - 2 * P
    Hm = (H0 + F.conj().T @ H0 @ F) / 2
    w = np.abs(np.linalg.eigvalsh(Hm))
    return int(np.sum(w <= tol * max(1.0, w[-1])))


def kernel_parity(T, tol=1e-8) -> int:
    """(-1)^(number of singular values below tol): the brute-force Z2 oracle.

    Requires a clean separation: the smallest singular value at or above the
    threshold must exceed the largest one below it by a factor of 10.
    """
    T = np.asarray(T)
    sv = np.linalg.svd(T, compute_uv=False)
    below = sv[sv < tol]
    above = sv[sv >= tol]
    if below.size and above.size:
        hi = float(np.max(below))
        lo = float(np.min(above))
        if hi > 0 and lo / hi < 10.0:
            raise AmbiguousKernel(
                f"singular values {hi:.3e} and {lo:.3e} straddle tol={tol:.1e} "
                "without a clean gap"
            )
    return +1 if below.size % 2 == 0 else -1


# ---------------------------------------------------------------------------
# building the pairing constituents from the raw data
# ---------------------------------------------------------------------------

def _takagi_unitary_symmetric(G):
    """A unitary A with A A^T = G for unitary symmetric G.

    A is the spectral-calculus square root of G after rotating the spectrum
    away from the branch cut; being a polynomial in the symmetric G, it is
    itself symmetric.
    """
    G = np.asarray(G, dtype=complex)
    k = G.shape[0]
    T, Z = sla.schur(G, output="complex")
    phases = np.angle(np.diag(T))
    # rotate so no eigenvalue sits near the cut at angle pi
    order = np.sort(phases)
    gaps = np.diff(np.concatenate([order, [order[0] + 2 * np.pi]]))
    i = int(np.argmax(gaps))
    theta = np.pi - (order[i] + gaps[i] / 2)
    psi = np.angle(np.exp(1j * (phases + theta)))
    A = Z @ np.diag(np.exp(1j * (psi - theta) / 2)) @ Z.conj().T
    A = (A + A.T) / 2
    if np.linalg.norm(A @ A.T - G) > 1e-8 * k:  # pragma: no cover - defensive
        raise NumericalFailure("Takagi factorization of the kernel overlap failed")
    return A


def fermi_projection(H, S: SymmetryOperator | None = None, tol=1e-10):
    """Spectral projection chi(H <= 0), Lagrangian-completed on the kernel.

    For invertible H this is plain spectral calculus. When H has zero modes
    and an even S with S* conj(H) S = -H is supplied, the kernel carries the
    real structure v -> S conj(v); a canonical Lagrangian half of the kernel
    is added to the strictly negative eigenspace, which makes the full
    projection satisfy S* conj(P) S = 1 - P exactly on the kernel. Open
    boundary models with exact edge zero modes need this completion.
    """
    H = np.asarray(H, dtype=complex)
    w, V = np.linalg.eigh((H + H.conj().T) / 2)
    scale = max(float(np.max(np.abs(w))), 1.0)
    zero = np.abs(w) <= tol * scale
    Pneg = V[:, w < -tol * scale]
    if not np.any(zero):
        return Pneg @ Pneg.conj().T
    if S is None or S.parity != +1:
        raise AmbiguousKernel(
            "H has zero modes and no even Lagrangian symmetry to resolve them"
        )
    M = S.matrix
    if np.linalg.norm(M.T @ H.conj() @ M + H) > 1e-8 * scale:
        raise SymmetryViolation("kernel completion needs S* conj(H) S = -H")
    V0 = V[:, zero]
    k = V0.shape[1]
    if k % 2 != 0:
        raise AmbiguousKernel("odd-dimensional kernel cannot be halved")
    # real structure C v = S conj(v) restricted to the kernel
    G = V0.conj().T @ M @ V0.conj()
    if np.linalg.norm(G - G.T) > 1e-8 * k:
        raise AmbiguousKernel("kernel is not invariant under the real structure")
    A = _takagi_unitary_symmetric(G)
    E = V0 @ A                       # columns satisfy S conj(e) = e
    cols = [(E[:, 2 * i] - 1j * E[:, 2 * i + 1]) / np.sqrt(2)
            for i in range(k // 2)]
    W = np.column_stack([Pneg] + cols) if Pneg.size else np.column_stack(cols)
    return W @ W.conj().T


def hardy_projection(D0, tol=1e-10):
    """Positive spectral projection chi(D0 >= 0) of a self-adjoint D0."""
    D0 = np.asarray(D0, dtype=complex)
    w, V = np.linalg.eigh((D0 + D0.conj().T) / 2)
    scale = max(float(np.max(np.abs(w))), 1.0)
    if np.min(np.abs(w)) <= tol * scale:
        raise AmbiguousKernel("Dirac matrix has spectrum at zero")
    Vp = V[:, w > 0]
    return Vp @ Vp.conj().T


def phase_unitary(A):
    """The phase A |A|^(-1) of an invertible matrix."""
    A = np.asarray(A, dtype=complex)
    if linalg.gap(A) <= 1e-12 * max(_norm(A), 1.0):
        raise AmbiguousKernel("phase undefined: matrix is singular")
    U, _ = sla.polar(A)
    return U


def _constituents(data: PairingData, tol=1e-10):
    """(P or U, E or F) for the pairing, depending on the row/column parity."""
    j, d = data.cls.j, data.cls.d
    if j % 2 == 0:
        S = data.S if j in (2, 6) else None
        ham = fermi_projection(data.hamiltonian, S=S, tol=tol)
    else:
        ham = phase_unitary(data.hamiltonian)
    if d % 2 == 1:
        dirac = hardy_projection(data.dirac, tol=tol)
    else:
        dirac = phase_unitary(data.dirac)
    return ham, dirac


def index_operator(data: PairingData, primed: bool = False, tol=1e-10):
    """The Fredholm operator T whose kernel parity is the Z2 index.

    The four pairing kinds give T = PFP + 1 - P, T = EUE + 1 - E,
    T = E(1-2P)E + 1 - E, or the doubled two-unitary form. ``primed``
    selects the companion pairing T' in the two-projection and two-unitary
    cases (both have the same kernel parity away from phase transitions).
    """
    ham, dirac = _constituents(data, tol=tol)
    kind = data.cls.pairing_kind
    n = data.dim
    I = np.eye(n)
    if kind == PairingKind.PROJECTION_UNITARY:
        if primed:
            raise KindMismatch("projection-unitary pairings have no companion")
        P, F = ham, dirac
        return P @ F @ P + I - P
    if kind == PairingKind.UNITARY_PROJECTION:
        if primed:
            raise KindMismatch("unitary-projection pairings have no companion")
        U, E = ham, dirac
        return E @ U @ E + I - E
    if kind == PairingKind.PROJECTION_PROJECTION:
        P, E = ham, dirac
        if primed:
            return P @ (I - 2 * E) @ P + I - P
        return E @ (I - 2 * P) @ E + I - E
    # two unitaries on the doubled space
    U, F = ham, dirac
    P2 = 0.5 * np.block([[I, -U], [-U.conj().T, I]])
    E2 = 0.5 * np.block([[I, F], [F.conj().T, I]])
    I2 = np.eye(2 * n)
    if primed:
        Ublk = np.block([[U, np.zeros((n, n))], [np.zeros((n, n)), U]])
        return E2 @ Ublk @ E2 + I2 - E2
    Fblk = np.block([[F, np.zeros((n, n))], [np.zeros((n, n)), F]])
    return P2 @ Fblk @ P2 + I2 - P2


def _product_symmetry(data: PairingData) -> SymmetryOperator:
    return SymmetryOperator(data.Sigma.matrix @ data.S.matrix,
                            data.S.parity * data.Sigma.parity)


def truncation_window(D0, fraction=0.5):
    """Orthogonal projection onto the spectral interior of the Dirac matrix.

    A finite truncation of an index pairing carries spurious zero modes
    supported where |D0| is maximal, i.e. at the truncation boundary. The
    window keeps the region |D0| <= fraction * max|D0|; only zero modes
    living inside it count towards an index.
    """
    D0 = np.asarray(D0)
    w, V = np.linalg.eigh(D0)
    keep = np.abs(w) <= fraction * np.max(np.abs(w))
    Vk = V[:, keep]
    return Vk @ Vk.conj().T


def _window_zero_count(K, window, tol, exc=MidpointDegeneracy):
    """Number of near-kernel eigenvectors of Hermitian K inside the window.

    Demands a factor-10 scale separation between the kept eigenvalues and
    the rest, and an unambiguous window weight (< 0.2 or > 0.8) for every
    near-kernel vector.
    """
    scale = max(_norm(K), 1.0)
    w, V = np.linalg.eigh(K)
    aw = np.abs(w)
    near = aw < tol * scale
    if not np.any(near):
        return 0
    rest = aw[~near]
    if rest.size and float(np.min(rest)) < 10.0 * float(np.max(aw[near])):
        raise exc("no clean scale separation between zero modes and the rest")
    V0 = V[:, near]
    g = np.linalg.eigvalsh(V0.conj().T @ window @ V0)
    if np.any((g > 0.2) & (g < 0.8)):
        raise exc("zero mode has ambiguous weight across the window boundary")
    return int(np.sum(g > 0.8))


def _midpoint_parity(M0, M1, window, kind: PathKind, tol=1e-8) -> int:
    """Z2 flow of the straight line from M0 to M1, read off at the midpoint.

    On a straight line between unitaries every eigenvalue crossing happens
    at t = 1/2, so the flow parity is half the zero-mode multiplicity of the
    midpoint. The window filters out truncation-boundary artifacts, which
    otherwise pair up with the interior modes and cancel them.
    """
    Mm = (np.asarray(M0, dtype=complex) + np.asarray(M1, dtype=complex)) / 2
    K = 1j * Mm if kind == PathKind.SKEW_ADJOINT else Mm
    count = _window_zero_count(K, window, tol)
    if count % 2 != 0:
        raise MidpointDegeneracy(
            f"windowed midpoint multiplicity {count} is odd"
        )
    return +1 if (count // 2) % 2 == 0 else -1


def _orientation_midpoint(P, F, S: SymmetryOperator, window, tol=1e-8) -> int:
    """Orientation flow of the line i(1-2P) -> F i(1-2P) F*, midpoint rule."""
    P = _check_projection(P)
    F = _check_unitary(F, "F")
    if S.parity != +1:
        raise OddParity("orientation flow needs an even symmetry")
    T0 = 1j * (np.eye(P.shape[0]) - 2 * P)
    T1 = F @ T0 @ F.conj().T
    M = S.matrix
    for label, T in (("start", T0), ("end", T1)):
        scale = max(_norm(T), 1.0)
        if np.linalg.norm(M.T @ T.conj() @ M - T) > 1e-8 * scale:
            raise SymmetryViolation(f"{label} endpoint is not even real")
    return _midpoint_parity(T0, T1, window, PathKind.SKEW_ADJOINT, tol)


def _half_midpoint(P, F, S: SymmetryOperator, parity: HalfFlowParity,
                   window, tol=1e-8) -> int:
    """Half-spectral flow of the canonical path, midpoint rule."""
    P, F = _check_half_inputs(P, F, S, parity)
    H0 = np.eye(P.shape[0]) - 2 * P
    H1 = F.conj().T @ H0 @ F
    return _midpoint_parity(H0, H1, window, PathKind.HERMITIAN, tol)


def z2_index_via_flow(data: PairingData, representation: str = "both",
                      window_fraction: float = 0.5, tol: float = 1e-8) -> int:
    """The Z2 index of a pairing computed through its flow representations.

    Dispatches on the (j,d) cell to the orientation flow or half-spectral
    flow along the canonical straight-line paths. Both are lines between
    unitaries, so all eigenvalue crossings sit at the midpoint and the flow
    is half the midpoint zero-mode multiplicity mod 2. At finite volume the
    raw multiplicity always comes out even-even (the truncation boundary
    contributes a mirror zero mode for every interior one), so the count is
    restricted to the spectral interior of the Dirac matrix; see
    ``truncation_window``.

    ``representation`` selects "orientation", "half", or "both". Cells
    admitting two representations evaluate both under "both" and raise
    FlowDisagreement if they differ; asking for a representation the cell
    does not admit raises KindMismatch.
    """
    if data.cls.group != Group.Z2:
        raise NotZ2Case(f"({data.cls.j},{data.cls.d}) is not a Z2 cell")
    if representation not in ("both", "orientation", "half"):
        raise KindMismatch(f"unknown flow representation {representation!r}")
    jd = (data.cls.j, data.cls.d)
    SP = _product_symmetry(data)
    ham, dirac = _constituents(data)
    n = data.dim
    I = np.eye(n)
    W = truncation_window(data.dirac, window_fraction)

    reps = {}
    if jd in ((1, 7), (5, 3)):
        E, U = dirac, ham
        reps["orientation"] = lambda: _orientation_midpoint(E, U, SP, W, tol)
    elif jd in ((3, 1), (7, 5)):
        E, U = dirac, ham
        reps["half"] = lambda: _half_midpoint(E, U, SP, HalfFlowParity.ODD,
                                              W, tol)
    elif jd in ((2, 0), (6, 4)):
        P, F = ham, dirac
        reps["orientation"] = lambda: _orientation_midpoint(P, F, SP, W, tol)
    elif jd in ((0, 6), (4, 2)):
        P, F = ham, dirac
        reps["half"] = lambda: _half_midpoint(P, F, SP, HalfFlowParity.ODD,
                                              W, tol)
    elif jd in ((0, 7), (4, 3)):
        P, E = ham, dirac
        reps["half"] = lambda: _half_midpoint(P, I - 2 * E, SP,
                                              HalfFlowParity.EVEN, W, tol)
        reps["orientation"] = lambda: _orientation_midpoint(E, I - 2 * P, SP,
                                                            W, tol)
    elif jd in ((2, 1), (6, 5)):
        P, E = ham, dirac
        reps["half"] = lambda: _half_midpoint(E, I - 2 * P, SP,
                                              HalfFlowParity.EVEN, W, tol)
        reps["orientation"] = lambda: _orientation_midpoint(P, I - 2 * E, SP,
                                                            W, tol)
    else:
        # the doubled two-unitary cells
        U, F = ham, dirac
        Z = np.zeros((n, n))
        P2 = 0.5 * np.block([[I, -U], [-U.conj().T, I]])
        E2 = 0.5 * np.block([[I, F], [F.conj().T, I]])
        Fblk = np.block([[F, Z], [Z, F]])
        Ublk = np.block([[U, Z], [Z, U]])
        SPM = SP.matrix
        W2 = sla.block_diag(W, W)
        if jd in ((1, 0), (5, 4)):
            S2 = SymmetryOperator(np.block([[SPM, Z], [Z, -SPM]]), +1)
            reps["orientation"] = lambda: _agree(
                _orientation_midpoint(P2, Fblk, S2, W2, tol),
                _orientation_midpoint(E2, Ublk, S2, W2, tol), jd)
        elif jd in ((3, 2), (7, 6)):
            S2 = SymmetryOperator(np.block([[Z, SPM], [SPM, Z]]), -1)
            reps["half"] = lambda: _agree(
                _half_midpoint(P2, Fblk, S2, HalfFlowParity.ODD, W2, tol),
                _half_midpoint(E2, Ublk, S2, HalfFlowParity.ODD, W2, tol), jd)
        else:  # pragma: no cover
            raise NotZ2Case(f"unhandled Z2 cell {jd}")

    if representation != "both":
        if representation not in reps:
            raise KindMismatch(
                f"cell {jd} has no {representation} flow representation"
            )
        reps = {representation: reps[representation]}
    values = {name: fn() for name, fn in reps.items()}
    vals = list(values.values())
    for v in vals[1:]:
        _agree(vals[0], v, jd)
    return vals[0]


def z2_index_kernel(data: PairingData, tol: float = 1e-8,
                    window_fraction: float = 0.5) -> int:
    """Brute-force Z2 index: parity of the truncation-filtered kernel of T.

    Counts the near-kernel singular vectors of the index operator that are
    supported in the spectral interior of the Dirac matrix. Kernel vectors
    pinned to the truncation boundary are finite-volume artifacts and are
    ignored; without the filter they pair up with the interior modes and the
    raw parity is identically even. Cells with a companion operator T'
    evaluate both and must agree.
    """
    if data.cls.group != Group.Z2:
        raise NotZ2Case(f"({data.cls.j},{data.cls.d}) is not a Z2 cell")
    W = truncation_window(data.dirac, window_fraction)
    kind = data.cls.pairing_kind
    if kind in (PairingKind.PROJECTION_PROJECTION, PairingKind.UNITARY_UNITARY):
        primed_options = (False, True)
    else:
        primed_options = (False,)
    values = []
    for primed in primed_options:
        T = index_operator(data, primed=primed, tol=_TOL)
        Wp = W if T.shape[0] == W.shape[0] else sla.block_diag(W, W)
        _, s, Vh = np.linalg.svd(T)
        scale = max(float(s[0]), 1.0)
        near = s < tol * scale
        count = 0
        if np.any(near):
            rest = s[~near]
            if rest.size and float(np.min(rest)) < 10.0 * float(np.max(s[near])):
                raise AmbiguousKernel(
                    "no clean scale separation at the kernel threshold"
                )
            V0 = Vh[near].conj().T
            g = np.linalg.eigvalsh(V0.conj().T @ Wp @ V0)
            if np.any((g > 0.2) & (g < 0.8)):
                raise AmbiguousKernel(
                    "kernel vector has ambiguous weight across the window"
                )
            count = int(np.sum(g > 0.8))
        values.append(+1 if count % 2 == 0 else -1)
    if len(set(values)) != 1:
        raise FlowDisagreement(
            f"kernel parities of T and T' disagree: {values}"
        )
    return values[0]


def _agree(v1, v2, jd):
    if v1 != v2:
        raise FlowDisagreement(
            f"flow representations disagree for cell {jd}: {v1} vs {v2}"
        )
    return v1


def _orientation_pair(P, F, S: SymmetryOperator, samples: int) -> int:
    """Orientation flow of the line from i(1-2P) to F i(1-2P) F*."""
    P = _check_projection(P)
    F = _check_unitary(F, "F")
    T0 = 1j * (np.eye(P.shape[0]) - 2 * P)
    T1 = F @ T0 @ F.conj().T
    ts = np.linspace(0.0, 1.0, samples)
    pts = tuple((float(t), (1 - t) * T0 + t * T1) for t in ts)
    return _orientation_flow_samples(pts, S)


def _orientation_flow_samples(pts, S: SymmetryOperator,
                              budget: float | None = None) -> int:
    """Orientation flow of explicitly sampled skew-adjoint even-real matrices."""
    if S.parity != +1:
        raise OddParity("orientation flow needs an even symmetry")
    M = S.matrix
    for t, T in pts:
        scale = max(_norm(T), 1.0)
        if np.linalg.norm(T + T.conj().T) > 1e-8 * scale:
            raise SymmetryViolation(f"sample at t={t} is not skew-adjoint")
        if np.linalg.norm(M.T @ T.conj() @ M - T) > 1e-8 * scale:
            raise SymmetryViolation(f"sample at t={t} is not even real")
    R = symmetry_root(S)
    transformed = []
    for t, T in pts:
        W = R.conj().T @ np.asarray(T, dtype=complex) @ R
        W = (W.real - W.real.T) / 2
        transformed.append((t, W))
    tpath = OperatorPath(samples=tuple(transformed), kind=PathKind.REAL_SKEW,
                         continuity_budget=budget)
    return z2_spectral_flow(tpath)
