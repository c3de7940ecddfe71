"""Model fixtures and their independent oracles."""

import numpy as np
import pytest

from skewloc import models
from skewloc.errors import GaplessParameter
from skewloc.localizer import admissible_bounds, nudge_rho, z2_index_det


def test_lattice_spec():
    spec = models.LatticeSpec(L=5, internal_dim=2)
    assert spec.dim == 22
    with pytest.raises(GaplessParameter):
        models.LatticeSpec(L=0)


def test_position_operator():
    X = models.position_operator(3)
    assert np.allclose(np.diag(X), [-3, -2, -1, -1, 1, 2, 3])
    assert np.min(np.abs(np.linalg.eigvalsh(X))) >= 1.0
    with pytest.raises(GaplessParameter):
        models.position_operator(0)


def test_kitaev_chain_structure():
    inst = models.kitaev_chain(0.5, 8)
    data = inst.pairing
    assert (data.cls.j, data.cls.d) == (2, 1)
    assert data.gap == pytest.approx(0.5)
    assert inst.oracle() == -1
    assert models.kitaev_chain(2.0, 8).oracle() == +1
    with pytest.raises(GaplessParameter):
        models.kitaev_chain(1.0, 8)
    with pytest.raises(GaplessParameter):
        models.kitaev_chain(-1.0, 8)


def test_kitaev_sign_stable_in_system_size():
    for mu in (0.5, 1.5):
        signs = set()
        for L in (20, 35):
            data = models.kitaev_chain(mu, L).pairing
            b = admissible_bounds(data)
            kappa = 0.9 * b.kappa_max
            rho = nudge_rho(data, 1.1 * b.rho_min(kappa))
            signs.add(z2_index_det(data, kappa, rho))
        assert len(signs) == 1, f"mu={mu}: {signs}"


def test_ssh_winding():
    assert models.ssh_winding(2.0, 1.0) == 0
    assert models.ssh_winding(1.0, 2.0) == 1
    assert models.ssh_winding(1.0, -2.0) == 1
    assert models.ssh_winding(0.0, 1.0) == 1


def test_ssh_chain():
    inst = models.ssh_chain(0.3, 1.0, 8)
    assert inst.metadata["winding"] == 1
    assert inst.oracle() == models.SSH_ORIENTATION
    assert models.ssh_chain(1.0, 0.3, 8).oracle() == 0
    with pytest.raises(GaplessParameter):
        models.ssh_chain(1.0, -1.0, 8)


def test_qwz_oracles():
    assert models.qwz_bulk_gap(1.0) > 0.5
    assert models.qwz_bulk_gap(0.01, grid=101) < 0.1
    assert models.qwz_chern(1.0) == -1
    assert models.qwz_chern(3.0) == 1
    assert models.qwz_chern(5.0) == 0


def test_qwz_model_structure():
    inst = models.qwz_model(1.0, 3)
    data = inst.pairing
    H, D = data.hamiltonian, data.dirac
    assert np.allclose(H, H.conj().T)
    assert np.allclose(D @ D.conj().T, D.conj().T @ D)     # normal Dirac data
    assert inst.oracle() == models.QWZ_ORIENTATION * inst.metadata["chern"]
    for m in (0.0, 2.0, 4.0):
        with pytest.raises(GaplessParameter):
            models.qwz_model(m, 3)


@pytest.mark.parametrize("j,d", models.Z2_CELLS)
def test_random_pairing_satisfies_cell_relations(j, d):
    """Construction validates all relations; here the audit trail is checked."""
    data = models.random_pairing(j, d, seed=0)
    assert (data.cls.j, data.cls.d) == (j, d)
    for name, res in data.residuals.items():
        if name != "finite_gap":
            assert res <= 1e-9, f"{name}: {res}"
    assert data.residuals["finite_gap"] > 0.1
    # distinct seeds give distinct data
    other = models.random_pairing(j, d, seed=1)
    assert not np.allclose(data.hamiltonian, other.hamiltonian)
