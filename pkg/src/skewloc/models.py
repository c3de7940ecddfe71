"""Finite-volume model fixtures and their independent topological oracles.

Kitaev chain (Z2, Majorana representation), SSH chain (integer winding), QWZ
Chern model (integer Chern number), the perturbed position operator used as
Dirac data, and symmetrized random-matrix fixtures for every Z2 cell.

All lattices are open (Dirichlet) truncations with sites n in {-L, ..., L};
the position operator is incompatible with periodic wrap-around.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import GaplessParameter
from .localizer import PairingData
from .symmetry import SymmetryClass, SymmetryOperator, classify, required_parity

#: Orientation of the half-signature relative to the phase-integration
#: winding of k -> t1 + t2 e^{ik}, fixed once for the conventions below
#: (right shift in A, Hardy projection from the perturbed position operator).
SSH_ORIENTATION = -1

#: Orientation of the half-signature relative to the Berry-curvature Chern
#: number, fixed once for the conventions below (D0 = X1 + i X2 and the
#: Bloch form sin(kx) s1 + sin(ky) s2 + (m - 2 + cos kx + cos ky) s3).
QWZ_ORIENTATION = -1


@dataclass(frozen=True)
class LatticeSpec:
    """Open-chain lattice with sites -L..L and a fixed orbital count."""

    L: int
    internal_dim: int = 1

    def __post_init__(self):
        if self.L < 1 or self.internal_dim < 1:
            raise GaplessParameter("lattice needs L >= 1 and orbitals >= 1")

    @property
    def dim(self):
        return (2 * self.L + 1) * self.internal_dim


@dataclass(frozen=True)
class ModelInstance:
    pairing: PairingData
    oracle: Callable[[], int]
    metadata: dict = field(default_factory=dict)


def position_operator(L: int):
    """diag(n) on sites -L..L with the origin entry replaced by -1.

    The replacement makes the operator invertible while changing it only by
    a rank-one perturbation; its gap is always at least 1.
    """
    if L < 1:
        raise GaplessParameter("need L >= 1")
    x = np.arange(-L, L + 1, dtype=float)
    x[L] = -1.0
    return np.diag(x)


def shift_operator(L: int):
    """Truncated right shift |n> -> |n+1> with open boundary."""
    n = 2 * L + 1
    return np.diag(np.ones(n - 1), -1)


def kitaev_chain(mu: float, L: int) -> ModelInstance:
    """Kitaev chain in the Majorana representation, class (2,1), S = Sigma = 1.

    H = i [[0, V - mu], [mu - V^T, 0]] with V the truncated right shift;
    D0 = diag(X, X) with X the perturbed position operator. The bulk gap is
    |1 - |mu||; at finite L the open chain carries Majorana edge modes with
    exponentially small energy throughout |mu| < 1, so the finite-volume
    matrix gap is not the physically relevant one and the bulk value is
    recorded as the gap override.
    """
    if abs(abs(mu) - 1.0) < 1e-9:
        raise GaplessParameter("Kitaev chain is gapless at |mu| = 1")
    n = 2 * L + 1
    V = shift_operator(L)
    B = V - mu * np.eye(n)
    Z = np.zeros((n, n))
    H = 1j * np.block([[Z, B], [-B.conj().T, Z]])
    X = position_operator(L)
    D0 = np.block([[X, Z], [Z, X]])
    S = SymmetryOperator.identity(2 * n)
    data = PairingData(cls=classify(2, 1), hamiltonian=H, dirac=D0,
                       S=S, Sigma=S, gap_override=abs(1.0 - abs(mu)))
    expected = -1 if abs(mu) < 1 else +1
    return ModelInstance(pairing=data, oracle=lambda: expected,
                         metadata={"model": "kitaev", "mu": mu, "L": L})


def ssh_winding(t1: float, t2: float, samples: int = 4096) -> int:
    """Winding number of k -> t1 + t2 e^{ik} by phase integration."""
    k = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
    z = t1 + t2 * np.exp(1j * k)
    dphi = np.angle(np.roll(z, -1) / z)
    total = float(np.sum(dphi))
    return int(np.rint(total / (2 * np.pi)))


def ssh_chain(t1: float, t2: float, L: int) -> ModelInstance:
    """SSH-type chiral chain: A = t1 + t2 V, D0 = X. Class (1,1) (group Z).

    The oracle is the phase-integration winding number; the expected
    half-signature is SSH_ORIENTATION times the winding.
    """
    if abs(abs(t1) - abs(t2)) < 1e-9:
        raise GaplessParameter("SSH chain is gapless at |t1| = |t2|")
    n = 2 * L + 1
    A = t1 * np.eye(n) + t2 * shift_operator(L)
    D0 = position_operator(L)
    S = SymmetryOperator.identity(n)
    data = PairingData(cls=classify(1, 1), hamiltonian=A, dirac=D0,
                       S=S, Sigma=S, gap_override=abs(abs(t1) - abs(t2)))
    w = ssh_winding(t1, t2)
    return ModelInstance(pairing=data, oracle=lambda: SSH_ORIENTATION * w,
                         metadata={"model": "ssh", "t1": t1, "t2": t2, "L": L,
                                   "winding": w})


def _qwz_bloch(m: float, kx, ky):
    h1 = np.sin(kx)
    h2 = np.sin(ky)
    h3 = m - 2.0 + np.cos(kx) + np.cos(ky)
    return h1, h2, h3


def qwz_bulk_gap(m: float, grid: int = 201) -> float:
    k = np.linspace(-np.pi, np.pi, grid)
    kx, ky = np.meshgrid(k, k)
    h1, h2, h3 = _qwz_bloch(m, kx, ky)
    return float(np.min(np.sqrt(h1 ** 2 + h2 ** 2 + h3 ** 2)))


def qwz_chern(m: float, grid: int = 60) -> int:
    """Chern number of the lower band by Berry-curvature plaquette summation.

    Link-variable (lattice field strength) method on a discretized Brillouin
    zone; exact integer for any gapped m once the grid resolves the band.
    """
    k = np.linspace(-np.pi, np.pi, grid, endpoint=False)
    states = np.empty((grid, grid, 2), dtype=complex)
    for i, kx in enumerate(k):
        for j, ky in enumerate(k):
            h1, h2, h3 = _qwz_bloch(m, kx, ky)
            Hk = np.array([[h3, h1 - 1j * h2], [h1 + 1j * h2, -h3]])
            w, v = np.linalg.eigh(Hk)
            states[i, j] = v[:, 0]
    flux = 0.0
    for i in range(grid):
        for j in range(grid):
            u1 = states[i, j]
            u2 = states[(i + 1) % grid, j]
            u3 = states[(i + 1) % grid, (j + 1) % grid]
            u4 = states[i, (j + 1) % grid]
            prod = (np.vdot(u1, u2) * np.vdot(u2, u3)
                    * np.vdot(u3, u4) * np.vdot(u4, u1))
            flux += np.angle(prod)
    return int(np.rint(flux / (2 * np.pi)))


def qwz_model(m: float, L: int) -> ModelInstance:
    """Qi-Wu-Zhang two-band Chern insulator on the truncated square lattice.

    H(k) = sin(kx) s1 + sin(ky) s2 + (m - 2 + cos kx + cos ky) s3 realized in
    real space with open boundaries; gapless at m in {0, 2, 4}. The Dirac
    data is D0 = (X1 + i X2) tensor 1 with the origin entry perturbed to -1
    (the combined operator is singular only at the origin site). No symmetry
    is attached: the cell (0,0) is used for its complex projection-unitary
    pairing only.
    """
    if min(abs(m), abs(m - 2.0), abs(m - 4.0)) < 1e-9:
        raise GaplessParameter("QWZ model is gapless at m in {0, 2, 4}")
    n = 2 * L + 1
    T = np.diag(np.ones(n - 1), -1)          # right shift on one axis
    I = np.eye(n)
    s1 = np.array([[0.0, 1.0], [1.0, 0.0]])
    s2 = np.array([[0.0, -1.0j], [1.0j, 0.0]])
    s3 = np.array([[1.0, 0.0], [0.0, -1.0]])
    Tx = np.kron(np.kron(T, I), np.eye(2))
    Ty = np.kron(np.kron(I, T), np.eye(2))
    S1 = np.kron(np.eye(n * n), s1)
    S2 = np.kron(np.eye(n * n), s2)
    S3 = np.kron(np.eye(n * n), s3)
    sin_x = (Tx - Tx.T) / (2j)
    sin_y = (Ty - Ty.T) / (2j)
    cos_x = (Tx + Tx.T) / 2
    cos_y = (Ty + Ty.T) / 2
    H = (sin_x @ S1 + sin_y @ S2
         + (cos_x + cos_y + (m - 2.0) * np.eye(2 * n * n)) @ S3)
    H = (H + H.conj().T) / 2
    x = np.arange(-L, L + 1, dtype=float)
    pos = (x[:, None] + 1j * x[None, :]).ravel()
    pos[(L * n) + L] = -1.0                  # origin site
    D0 = np.kron(np.diag(pos), np.eye(2))
    data = PairingData(cls=classify(0, 0), hamiltonian=H, dirac=D0,
                       gap_override=qwz_bulk_gap(m))
    c = qwz_chern(m)
    return ModelInstance(pairing=data, oracle=lambda: QWZ_ORIENTATION * c,
                         metadata={"model": "qwz", "m": m, "L": L, "chern": c})


# ---------------------------------------------------------------------------
# symmetrized random fixtures for all 16 Z2 cells
# ---------------------------------------------------------------------------

_IS2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
_P1 = np.array([[0.0, 1.0], [1.0, 0.0]])
_P3 = np.array([[1.0, 0.0], [0.0, -1.0]])


def _standard_symmetries(j: int, d: int, m: int):
    """Commuting (S, Sigma) on C^2 x C^2 x C^m with the right parities.

    S acts on the first two-dimensional factor, Sigma on the second; the
    Sigma choice for d in {3, 7} leaves room for a Dirac matrix
    anticommuting with it.
    """
    sj = required_parity(j)
    sd = required_parity(d)
    sa = np.eye(2) if sj == +1 else _IS2
    if sd == +1:
        sb = _P3 if d == 7 else np.eye(2)
    else:
        sb = _IS2
    S = SymmetryOperator(np.kron(sa, np.kron(np.eye(2), np.eye(m))), sj)
    Sigma = SymmetryOperator(np.kron(np.eye(2), np.kron(sb, np.eye(m))), sd)
    return S, Sigma


def _dirac_fixture(d: int, m: int):
    """Structured Dirac data satisfying the column-d relation exactly."""
    # half-integer spacings keep the matrix invertible with gap 1/2
    x = np.arange(1, m + 1, dtype=float) - (m + 1) / 2.0
    base = np.diag(x)
    if d in (3, 7):
        core = np.kron(_P1, base)            # anticommutes with the Sigma above
    elif d in (2, 6):
        core = np.kron(np.eye(2), np.diag(x + 0.6j * x[::-1]))
    else:
        core = np.kron(np.eye(2), base)
    return np.kron(np.eye(2), core)


def _symmetrize_ham(j, G, S, Sigma):
    M, Mg = S.matrix, Sigma.matrix
    A = G
    for _ in range(2):
        A = (A + Mg.T @ A @ Mg) / 2
        if j in (0, 4):
            A = (A + M.T @ A.conj() @ M) / 2
        elif j in (2, 6):
            A = (A - M.T @ A.conj() @ M) / 2
        elif j in (1, 5):
            A = (A + M.T @ A.conj() @ M) / 2
        else:
            A = (A + M.T @ A.T @ M) / 2
    return A


def random_pairing(j: int, d: int, m: int = 6, seed: int = 0) -> PairingData:
    """A random pairing in cell (j,d) built by symmetrizing Gaussians.

    The Hamiltonian datum is gapped by construction: Hermitian data get a
    spectral flattening by the odd function sign(x)(0.4 + min(|x|, 1)),
    which preserves every relation used here; invertible data are of the
    form 1 + 0.35 B with |B| = 1.
    """
    rng = np.random.default_rng(seed)
    S, Sigma = _standard_symmetries(j, d, m)
    n = 4 * m
    D0 = _dirac_fixture(d, m)
    G = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    if j % 2 == 0:
        Hg = (G + G.conj().T) / 2
        H = _symmetrize_ham(j, Hg, S, Sigma)
        H = (H + H.conj().T) / 2
        w, V = np.linalg.eigh(H)
        if np.min(np.abs(w)) < 1e-8:
            return random_pairing(j, d, m, seed + 1)
        flat = np.sign(w) * (0.4 + np.minimum(np.abs(w), 1.0))
        H = (V * flat) @ V.conj().T
        ham = H
    else:
        B = _symmetrize_ham(j, G, S, Sigma)
        nb = np.linalg.norm(B, 2)
        ham = np.eye(n) + 0.35 * B / max(nb, 1e-12)
    return PairingData(cls=classify(j, d), hamiltonian=ham, dirac=D0,
                       S=S, Sigma=Sigma)


Z2_CELLS = ((1, 7), (5, 3), (3, 1), (7, 5), (2, 0), (6, 4), (0, 6), (4, 2),
            (0, 7), (4, 3), (2, 1), (6, 5), (1, 0), (5, 4), (3, 2), (7, 6))
