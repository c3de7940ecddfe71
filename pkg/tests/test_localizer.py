"""Spectral/skew localizer assembly, admissibility, index methods, plateaus."""

import numpy as np
import pytest

from skewloc import models
from skewloc.errors import (
    KindMismatch,
    NotChiralCase,
    NotZ2Case,
    SymmetryViolation,
    ZeroGap,
)
from skewloc.localizer import (
    PairingData,
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
from skewloc.symmetry import LocalizerKind, SymmetryOperator, classify


def test_pairing_data_validation():
    with pytest.raises(SymmetryViolation):
        PairingData(cls=classify(0, 0),
                    hamiltonian=np.array([[0.0, 1.0], [0.0, 1.0]]),
                    dirac=np.eye(2))                       # H not self-adjoint
    with pytest.raises(ZeroGap):
        PairingData(cls=classify(0, 0), hamiltonian=np.eye(2),
                    dirac=np.diag([1.0, 0.0]))             # singular Dirac
    with pytest.raises(ZeroGap):
        PairingData(cls=classify(0, 0), hamiltonian=np.diag([1.0, 0.0]),
                    dirac=np.eye(2))                       # singular H, no override
    with pytest.raises(SymmetryViolation):
        PairingData(cls=classify(2, 1), hamiltonian=1j * np.array(
            [[0.0, 1.0], [-1.0, 0.0]]), dirac=np.diag([1.0, 2.0]))  # Z2, no S
    # a singular H passes when a bulk gap override is supplied
    data = PairingData(cls=classify(0, 0), hamiltonian=np.diag([1.0, 0.0]),
                       dirac=np.eye(2), gap_override=0.7)
    assert data.gap == 0.7
    assert "finite_gap" in data.residuals


def test_pairing_data_relation_residuals_named():
    data = models.kitaev_chain(0.5, 10).pairing
    assert "S* conj(H) S = -H (even Lagrangian P)" in data.residuals
    assert "Sigma* conj(D0) Sigma = D0 (even real)" in data.residuals
    bad = data.hamiltonian + 0.01 * np.eye(data.dim)
    with pytest.raises(SymmetryViolation, match="even Lagrangian"):
        PairingData(cls=data.cls, hamiltonian=bad, dirac=data.dirac,
                    S=data.S, Sigma=data.Sigma, gap_override=0.5)


def test_spectral_localizer_shapes_and_kinds():
    data = models.ssh_chain(1.0, 0.3, 6).pairing
    L = spectral_localizer(data, 0.5)
    assert L.shape == (2 * data.dim, 2 * data.dim)
    assert np.allclose(L, L.conj().T)
    even = models.qwz_model(1.0, 2).pairing
    Le = spectral_localizer(even, 0.5, kind=LocalizerKind.EVEN)
    assert np.allclose(Le, Le.conj().T)
    with pytest.raises(KindMismatch):
        spectral_localizer(data, 0.0)
    with pytest.raises(KindMismatch):
        spectral_localizer(data, 0.5, kind=LocalizerKind.EVEN)  # A not Hermitian


def test_admissible_bounds_formulas():
    data = models.kitaev_chain(0.5, 10).pairing
    b = admissible_bounds(data)
    H, D = data.hamiltonian, data.dirac
    comm = np.linalg.norm(D @ H - H @ D, 2)
    want = data.gap ** 3 / (12.0 * np.linalg.norm(H, 2) * comm)
    assert b.kappa_max == pytest.approx(want)
    assert b.rho_min(0.1) == pytest.approx(2.0 * data.gap / 0.1)
    assert b.is_admissible(0.5 * b.kappa_max, 3.0 * b.rho_min(0.5 * b.kappa_max))
    assert not b.is_admissible(2.0 * b.kappa_max, 1e6)
    assert not b.is_admissible(0.5 * b.kappa_max, 0.0)


def test_nudge_rho():
    data = models.ssh_chain(1.0, 0.3, 6).pairing
    assert nudge_rho(data, 3.4) == 3.4                # no eigenvalue of |X| there
    nudged = nudge_rho(data, 3.0)                     # collides with |x| = 3
    assert nudged != 3.0
    assert 3.0 < nudged < 4.0


def test_complex_index_ssh_small():
    for t1, t2 in ((1.0, 0.3), (0.3, 1.0)):
        inst = models.ssh_chain(t1, t2, 20)
        rho = nudge_rho(inst.pairing, 15.0)
        assert complex_index(inst.pairing, 0.5, rho) == inst.oracle()


@pytest.mark.parametrize("j,d", [(1, 7), (0, 6), (0, 7), (1, 0), (3, 2)])
def test_pfaffian_and_det_methods_on_random_cells(j, d):
    data = models.random_pairing(j, d, seed=2)
    b = admissible_bounds(data)
    kappa = 0.9 * b.kappa_max
    rho = nudge_rho(data, 1.1 * b.rho_min(kappa))
    v = z2_index_pfaffian(data, kappa, rho)
    assert v in (-1, 1)
    if (j + d) % 2 == 1:
        assert z2_index_det(data, kappa, rho) == v
    else:
        with pytest.raises(NotChiralCase):
            z2_index_det(data, kappa, rho)
    # sign stability under halving kappa and growing rho
    assert z2_index_pfaffian(data, kappa / 2, nudge_rho(data, 1.5 * rho)) == v


def test_skew_localizer_requires_z2_cell():
    ssh = models.ssh_chain(1.0, 0.3, 6).pairing
    with pytest.raises(NotZ2Case):
        skew_localizer(ssh, 0.5)


def test_localizer_gap_positive():
    data = models.kitaev_chain(0.5, 15).pairing
    b = admissible_bounds(data)
    kappa = 0.9 * b.kappa_max
    rho = nudge_rho(data, 1.1 * b.rho_min(kappa))
    assert localizer_gap(data, kappa, rho) > 0


def test_plateau_scan():
    data = models.kitaev_chain(0.0, 15).pairing
    b = admissible_bounds(data)
    kappa = 0.9 * b.kappa_max
    rho = nudge_rho(data, 1.1 * b.rho_min(kappa))
    result = plateau_scan(data, [0.8 * kappa, kappa],
                          [rho, nudge_rho(data, 1.5 * rho)])
    assert result.constant_sign
    assert result.sign == -1
    assert all(p.value == -1 for p in result.plateau)
    with pytest.raises(KindMismatch):
        plateau_scan(data, [kappa], [rho], method="spoon")
