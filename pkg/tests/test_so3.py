import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from reachfield.so3 import (
    Pose,
    as_rotation,
    axial_radial_decompose,
    is_rotation,
    random_rotation,
    rotation_angle,
    rotation_exp,
    rotation_log,
    unit,
)

from .conftest import rot_x, rot_z

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
vec3 = arrays(float, 3, elements=finite)


def test_log_identity():
    assert np.array_equal(rotation_log(np.eye(3)), np.zeros(3))


def test_log_quarter_turn_z():
    np.testing.assert_allclose(rotation_log(rot_z(np.pi / 2)), [0, 0, np.pi / 2], atol=1e-15)


def test_exp_zero_is_identity():
    assert np.array_equal(rotation_exp(np.zeros(3)), np.eye(3))


def test_exp_half_turn_z():
    np.testing.assert_allclose(rotation_exp([0, 0, np.pi]), np.diag([-1.0, -1.0, 1.0]), atol=1e-15)


def test_exp_log_round_trip_random_rotations(rng):
    for _ in range(1000):
        R = random_rotation(rng)
        assert np.linalg.norm(rotation_exp(rotation_log(R)) - R) < 1e-10


def test_log_exp_round_trip_below_pi(rng):
    for _ in range(1000):
        axis = unit(rng.normal(size=3))
        w = rng.uniform(0, np.pi - 1e-6) * axis
        np.testing.assert_allclose(rotation_log(rotation_exp(w)), w, atol=1e-10)


def test_log_angle_is_canonical(rng):
    for _ in range(200):
        w = rng.normal(size=3) * 3
        assert 0 <= np.linalg.norm(rotation_log(rotation_exp(w))) <= np.pi


@pytest.mark.parametrize("axis", [[1, 0, 0], [0, -1, 0], [0, 0, -1], [-1, 2, -2], [0, -3, 4]])
def test_log_at_pi_picks_positive_first_component(axis):
    k = unit(axis)
    w = rotation_log(rotation_exp(np.pi * k))
    assert np.linalg.norm(w) == pytest.approx(np.pi)
    first = w[np.nonzero(np.abs(w) > 1e-12)[0][0]]
    assert first > 0
    np.testing.assert_allclose(np.abs(w), np.pi * np.abs(k), atol=1e-9)


def test_log_near_pi_keeps_sign():
    w = (np.pi - 1e-5) * unit([-1, 0.3, 0.2])
    np.testing.assert_allclose(rotation_log(rotation_exp(w)), w, atol=1e-10)


def test_log_small_angle_series():
    w = np.array([3e-8, -1e-8, 2e-8])
    np.testing.assert_allclose(rotation_log(rotation_exp(w)), w, rtol=1e-9, atol=1e-20)


def test_batched_exp_log_match_single(rng):
    ws = rng.normal(size=(5, 4, 3))
    Rs = rotation_exp(ws)
    assert Rs.shape == (5, 4, 3, 3)
    for idx in np.ndindex(5, 4):
        np.testing.assert_allclose(Rs[idx], rotation_exp(ws[idx]), atol=1e-15)
    np.testing.assert_allclose(rotation_log(Rs)[2, 1], rotation_log(Rs[2, 1]), atol=1e-15)


@given(vec3)
def test_exp_output_is_rotation(w):
    assert is_rotation(rotation_exp(w))


def test_as_rotation_repairs_drift(rng):
    R = random_rotation(rng) + 1e-6 * rng.normal(size=(3, 3))
    fixed = as_rotation(R)
    assert is_rotation(fixed)
    assert np.abs(fixed - R).max() < 1e-5


def test_as_rotation_rejects_reflection():
    with pytest.raises(ValueError):
        as_rotation(np.diag([1.0, 1.0, -1.0]))


def test_rotation_angle_matches_log_norm(rng):
    R = random_rotation(rng)
    assert rotation_angle(R) == pytest.approx(np.linalg.norm(rotation_log(R)), abs=1e-12)
    assert rotation_angle(rot_x(0.8)) == pytest.approx(0.8)


def test_decompose_coincident():
    assert axial_radial_decompose([1, 2, 3], [1, 2, 3], [0, 0, 1]) == (0.0, 0.0)


def test_decompose_on_axis():
    u = unit([1, 1, 0])
    a, r = axial_radial_decompose(2 * u, np.zeros(3), u)
    assert a == pytest.approx(2.0, abs=1e-15)
    assert r == pytest.approx(0.0, abs=1e-15)


def test_decompose_orthogonal():
    u = np.array([0.0, 0.0, 1.0])
    g = np.array([0.1, -0.2, 0.3])
    a, r = axial_radial_decompose(g + u + np.array([0.0, 3.0, 0.0]), g, u)
    assert a == pytest.approx(1.0, abs=1e-15)
    assert r == pytest.approx(3.0, abs=1e-15)


@given(vec3, vec3, vec3.filter(lambda v: np.linalg.norm(v) > 1e-3))
def test_pythagorean_identity(p, g, u):
    u = unit(u)
    a, r = axial_radial_decompose(p, g, u)
    d2 = float(np.sum((p - g) ** 2))
    assert r >= 0
    assert abs(a * a + r * r - d2) <= 1e-10 * max(1.0, d2)


def test_pose_compose_inverse(rng):
    P = Pose(rng.normal(size=3), random_rotation(rng))
    I = P.compose(P.inverse())
    np.testing.assert_allclose(I.position, 0, atol=1e-14)
    np.testing.assert_allclose(I.rotation, np.eye(3), atol=1e-14)
    Q = Pose.from_axis_angle([1, 2, 3], P.axis_angle())
    np.testing.assert_allclose(Q.rotation, P.rotation, atol=1e-12)
