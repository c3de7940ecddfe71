"""Dense kernel tests: Pfaffian, determinant sign, signature, compression."""

import numpy as np
import pytest

from skewloc import linalg
from skewloc.errors import (
    BoundaryEigenvalue,
    NotHermitian,
    NotSkew,
    NumericalFailure,
    OddDimension,
    SingularMatrix,
)


def _random_skew(rng, n):
    A = rng.normal(size=(n, n))
    return A - A.T


def test_pfaffian_two_by_two():
    assert linalg.pfaffian_sign(np.array([[0.0, 3.0], [-3.0, 0.0]])) == 1
    assert linalg.pfaffian_sign(np.array([[0.0, -3.0], [3.0, 0.0]])) == -1


def test_pfaffian_direct_sum_multiplicative():
    rng = np.random.default_rng(1)
    for _ in range(20):
        A = _random_skew(rng, 4)
        B = _random_skew(rng, 6)
        blk = np.block([[A, np.zeros((4, 6))], [np.zeros((6, 4)), B]])
        assert linalg.pfaffian_sign(blk) == \
            linalg.pfaffian_sign(A) * linalg.pfaffian_sign(B)


def test_pfaffian_congruence_identity():
    rng = np.random.default_rng(2)
    for _ in range(50):
        n = 2 * int(rng.integers(1, 6))
        A = _random_skew(rng, n)
        B = rng.normal(size=(n, n))
        if abs(np.linalg.det(B)) < 1e-8:
            continue
        assert linalg.pfaffian_sign(B.T @ A @ B) == \
            int(np.sign(np.linalg.det(B))) * linalg.pfaffian_sign(A)


def test_pfaffian_rejects_bad_input():
    with pytest.raises(OddDimension):
        linalg.pfaffian_sign(np.zeros((3, 3)))
    with pytest.raises(SingularMatrix):
        linalg.pfaffian_sign(np.zeros((4, 4)))
    with pytest.raises(NotSkew):
        linalg.pfaffian_sign(np.eye(4))
    with pytest.raises(NotSkew):
        linalg.pfaffian_sign(1j * np.array([[0.0, 1.0], [-1.0, 0.0]]))


def test_det_sign_real_matches_reference():
    rng = np.random.default_rng(3)
    for _ in range(50):
        n = int(rng.integers(1, 9))
        A = rng.normal(size=(n, n))
        d = np.linalg.det(A)
        if abs(d) < 1e-8:
            continue
        assert linalg.det_sign_real(A) == int(np.sign(d))


def test_det_sign_real_rejects_complex_and_singular():
    with pytest.raises(NotSkew):
        linalg.det_sign_real(1j * np.eye(2))
    with pytest.raises(SingularMatrix):
        linalg.det_sign_real(np.diag([1.0, 0.0]))


def test_signature():
    assert linalg.signature(np.diag([3.0, -1.0, -2.0, 0.5])) == 0
    assert linalg.signature(np.diag([1.0, 2.0, -1.0])) == 1
    with pytest.raises(SingularMatrix):
        linalg.signature(np.diag([1.0, 0.0]))
    with pytest.raises(NotHermitian):
        linalg.signature(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_gap_is_smallest_singular_value():
    rng = np.random.default_rng(4)
    A = rng.normal(size=(5, 5))
    assert linalg.gap(A) == pytest.approx(np.linalg.svd(A, compute_uv=False)[-1])
    assert linalg.gap(np.zeros((3, 3))) == 0.0


def test_eig_hermitian_sorted_and_validated():
    rng = np.random.default_rng(5)
    A = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    H = (A + A.conj().T) / 2
    sd = linalg.eig_hermitian(H)
    assert np.all(np.diff(sd.eigenvalues) >= 0)
    rec = (sd.eigenvectors * sd.eigenvalues) @ sd.eigenvectors.conj().T
    assert np.allclose(rec, H)
    with pytest.raises(NotHermitian):
        linalg.eig_hermitian(A)


def test_spectral_projection_isometry():
    D = np.diag([-3.0, -1.0, 0.5, 2.0])
    iso = linalg.spectral_projection_isometry(D, 1.5)
    assert iso.target_dim == 2
    assert not np.iscomplexobj(iso.columns)
    comp = linalg.compress(np.diag([10.0, 20.0, 30.0, 40.0]), iso)
    assert np.allclose(np.sort(np.diag(comp)), [20.0, 30.0])
    with pytest.raises(BoundaryEigenvalue):
        linalg.spectral_projection_isometry(D, 2.0)
    with pytest.raises(NotHermitian):
        linalg.spectral_projection_isometry(np.array([[0.0, 1.0], [0.0, 0.0]]),
                                            1.0)


def test_isometry_rejects_non_orthonormal_columns():
    with pytest.raises(NumericalFailure):
        linalg.Isometry(columns=np.ones((3, 2)))
