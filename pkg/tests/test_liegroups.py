import numpy as np
import pytest
import scipy.linalg

from shapeforms.errors import ConditioningError, CutLocusError, OrientationError
from shapeforms.liegroups import (
    polar3,
    skew,
    so3_angle,
    so3_distance,
    so3_exp,
    so3_log,
    spd2_distance,
    spd2_exp,
    spd2_log,
    spd2_mul,
    unskew,
)


def random_rotation(rng, max_angle=np.pi - 1e-3):
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    angle = rng.uniform(0.0, max_angle)
    return so3_exp(axis * angle)


def random_spd2(rng, log_scale=1.0):
    X = rng.normal(size=(2, 2), scale=log_scale)
    return spd2_exp(0.5 * (X + X.T))


def rot_z(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


class TestSo3Exp:
    def test_zero_gives_identity(self):
        assert np.allclose(so3_exp(np.zeros(3)), np.eye(3))

    def test_quarter_turn_about_z(self):
        R = so3_exp(np.array([0.0, 0.0, np.pi / 2]))
        expected = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
        assert np.allclose(R, expected, atol=1e-15)

    def test_matches_matrix_exponential(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            xi = rng.normal(size=3) * rng.uniform(1e-10, 3.0)
            assert np.allclose(so3_exp(xi), scipy.linalg.expm(skew(xi)), atol=1e-12)

    def test_batched_shape(self):
        xi = np.zeros((4, 5, 3))
        assert so3_exp(xi).shape == (4, 5, 3, 3)

    def test_orthonormal_and_proper(self):
        rng = np.random.default_rng(1)
        xi = rng.normal(size=(100, 3)) * 2.0
        R = so3_exp(xi)
        assert np.allclose(np.swapaxes(R, -1, -2) @ R, np.eye(3), atol=1e-12)
        assert np.allclose(np.linalg.det(R), 1.0, atol=1e-12)


class TestSo3Log:
    def test_identity(self):
        assert np.allclose(so3_log(np.eye(3)), 0.0)

    def test_quarter_turn(self):
        xi = so3_log(rot_z(np.pi / 2))
        assert np.allclose(xi, [0.0, 0.0, np.pi / 2], atol=1e-14)

    def test_roundtrip_random(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            axis = rng.normal(size=3)
            axis /= np.linalg.norm(axis)
            angle = rng.uniform(0.0, np.pi - 1e-3)
            xi = axis * angle
            assert np.allclose(so3_log(so3_exp(xi)), xi, atol=1e-10)

    def test_near_pi_branch(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            axis = rng.normal(size=3)
            axis /= np.linalg.norm(axis)
            angle = rng.uniform(np.pi - 1e-3, np.pi - 1e-9)
            xi = axis * angle
            assert np.allclose(so3_log(so3_exp(xi)), xi, atol=1e-7)

    def test_tiny_angles(self):
        rng = np.random.default_rng(4)
        for scale in (1e-12, 1e-9, 1e-8):
            xi = rng.normal(size=3)
            xi *= scale / np.linalg.norm(xi)
            assert np.allclose(so3_log(so3_exp(xi)), xi, atol=1e-16, rtol=1e-8)

    def test_half_turn_is_cut_locus(self):
        R = rot_z(np.pi)
        with pytest.raises(CutLocusError):
            so3_log(R)

    def test_against_matrix_logarithm(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            R = random_rotation(rng, max_angle=3.0)
            oracle = unskew(scipy.linalg.logm(R).real)
            assert np.allclose(so3_log(R), oracle, atol=1e-9)


class TestSo3Distance:
    def test_zero_on_diagonal(self):
        rng = np.random.default_rng(6)
        Q = random_rotation(rng)
        assert so3_distance(Q, Q) == pytest.approx(0.0, abs=1e-12)

    def test_quarter_turn_value(self):
        d = so3_distance(np.eye(3), rot_z(np.pi / 2))
        assert d == pytest.approx(np.sqrt(2.0) * np.pi / 2, abs=1e-14)

    def test_matches_frobenius_norm_of_log(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            Q = random_rotation(rng)
            R = random_rotation(rng)
            rel = Q.T @ R
            if so3_angle(rel) >= np.pi - 1e-3:
                continue
            oracle = np.linalg.norm(scipy.linalg.logm(rel), "fro")
            assert so3_distance(Q, R) == pytest.approx(oracle, abs=1e-9)

    def test_bi_invariance(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            Q = random_rotation(rng, max_angle=np.pi / 2)
            R = random_rotation(rng, max_angle=np.pi / 2)
            P = random_rotation(rng)
            d = so3_distance(Q, R)
            assert so3_distance(P @ Q, P @ R) == pytest.approx(d, abs=1e-10)
            assert so3_distance(Q @ P, R @ P) == pytest.approx(d, abs=1e-10)

    def test_symmetry_and_triangle_inequality(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            Q, R, S = (random_rotation(rng, max_angle=np.pi / 2) for _ in range(3))
            assert so3_distance(Q, R) == pytest.approx(so3_distance(R, Q), abs=1e-12)
            assert so3_distance(Q, S) <= so3_distance(Q, R) + so3_distance(R, S) + 1e-9


class TestSpd2:
    def test_log_identity(self):
        assert np.allclose(spd2_log(np.eye(2)), 0.0)

    def test_log_diagonal(self):
        U = np.diag([np.e, 1.0])
        assert np.allclose(spd2_log(U), np.diag([1.0, 0.0]), atol=1e-15)

    def test_roundtrip(self):
        rng = np.random.default_rng(10)
        for _ in range(200):
            U = random_spd2(rng, log_scale=2.0)
            assert np.allclose(spd2_exp(spd2_log(U)), U, atol=1e-12, rtol=1e-12)

    def test_against_scipy_logm_expm(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            U = random_spd2(rng)
            assert np.allclose(spd2_log(U), scipy.linalg.logm(U), atol=1e-11)
            X = rng.normal(size=(2, 2))
            X = 0.5 * (X + X.T)
            assert np.allclose(spd2_exp(X), scipy.linalg.expm(X), atol=1e-11)

    def test_non_spd_rejected(self):
        with pytest.raises(ConditioningError):
            spd2_log(np.diag([1.0, -0.5]))

    def test_mul_identity_element(self):
        rng = np.random.default_rng(12)
        U = random_spd2(rng)
        assert np.allclose(spd2_mul(U, np.eye(2)), U, atol=1e-13)

    def test_mul_diagonal_closed_form(self):
        U = np.diag([2.0, 3.0])
        V = np.diag([5.0, 0.25])
        assert np.allclose(spd2_mul(U, V), np.diag([10.0, 0.75]), atol=1e-12)

    def test_mul_commutative_associative(self):
        rng = np.random.default_rng(13)
        for _ in range(30):
            U, V, W = (random_spd2(rng) for _ in range(3))
            assert np.allclose(spd2_mul(U, V), spd2_mul(V, U), atol=1e-12)
            assert np.allclose(
                spd2_mul(spd2_mul(U, V), W), spd2_mul(U, spd2_mul(V, W)), atol=1e-12
            )

    def test_distance_diagonal_value(self):
        assert spd2_distance(np.diag([np.e, 1.0]), np.eye(2)) == pytest.approx(
            1.0, abs=1e-14
        )

    def test_flat_translation_invariance(self):
        rng = np.random.default_rng(14)
        for _ in range(30):
            U, V, W = (random_spd2(rng) for _ in range(3))
            d = spd2_distance(U, V)
            assert spd2_distance(spd2_mul(U, W), spd2_mul(V, W)) == pytest.approx(
                d, abs=1e-10
            )

    def test_batched(self):
        rng = np.random.default_rng(15)
        U = np.stack([random_spd2(rng) for _ in range(7)])
        assert spd2_log(U).shape == (7, 2, 2)
        assert spd2_distance(U, U).shape == (7,)


class TestPolar3:
    def test_identity(self):
        R, U = polar3(np.eye(3))
        assert np.allclose(R, np.eye(3))
        assert np.allclose(U, np.eye(3))

    def test_pure_rotation(self):
        rng = np.random.default_rng(16)
        Q = random_rotation(rng)
        R, U = polar3(Q)
        assert np.allclose(R, Q, atol=1e-12)
        assert np.allclose(U, np.eye(3), atol=1e-12)

    def test_scaled_rotation(self):
        Q = so3_exp(np.array([np.pi / 3, 0.0, 0.0]))
        R, U = polar3(2.0 * Q)
        assert np.allclose(R, Q, atol=1e-12)
        assert np.allclose(U, 2.0 * np.eye(3), atol=1e-12)

    def test_against_scipy_polar(self):
        rng = np.random.default_rng(17)
        count = 0
        while count < 30:
            D = rng.normal(size=(3, 3))
            if np.linalg.det(D) <= 1e-3:
                continue
            count += 1
            R, U = polar3(D)
            R_ref, U_ref = scipy.linalg.polar(D)
            assert np.allclose(R, R_ref, atol=1e-10)
            assert np.allclose(U, U_ref, atol=1e-10)

    def test_reassembly_and_spectrum(self):
        rng = np.random.default_rng(18)
        count = 0
        while count < 50:
            D = rng.normal(size=(3, 3))
            if np.linalg.det(D) <= 1e-3:
                continue
            count += 1
            R, U = polar3(D)
            assert np.allclose(R @ U, D, atol=1e-10)
            sv = np.linalg.svd(D, compute_uv=False)
            ev = np.sort(np.linalg.eigvalsh(U))[::-1]
            assert np.allclose(ev, sv, atol=1e-10)

    def test_negative_determinant_rejected(self):
        with pytest.raises(OrientationError):
            polar3(np.diag([1.0, 1.0, -1.0]))

    def test_near_singular_rejected(self):
        with pytest.raises((ConditioningError, OrientationError)):
            polar3(np.diag([1.0, 1.0, 1e-14]))
