import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from surfink.vecmath import (
    quat_from_two_vectors,
    quat_normalize,
    quat_rotate,
    quat_to_matrix,
    rotation_angle,
    rotation_between,
    slerp_dir,
    unit,
)

vec = st.lists(
    st.floats(-10, 10, allow_nan=False), min_size=3, max_size=3
).map(np.array).filter(lambda v: np.linalg.norm(v) > 1e-6)


def test_unit_normalizes():
    v = unit(np.array([3.0, 4.0, 0.0]))
    assert np.allclose(v, [0.6, 0.8, 0.0])


def test_quat_identity_rotation():
    q = np.array([1.0, 0.0, 0.0, 0.0])
    v = np.array([0.3, -0.2, 0.9])
    assert np.allclose(quat_rotate(q, v), v)


def test_quat_matrix_agrees_with_quat_rotate(rng):
    q = quat_normalize(rng.normal(size=4))
    R = quat_to_matrix(q)
    for _ in range(10):
        v = rng.normal(size=3)
        assert np.allclose(R @ v, quat_rotate(q, v), atol=1e-12)
    assert np.allclose(R @ R.T, np.eye(3), atol=1e-12)
    assert np.linalg.det(R) == pytest.approx(1.0, abs=1e-12)


def test_quat_from_two_vectors_maps_a_to_b():
    a = np.array([0.0, 0.0, 1.0])
    b = unit(np.array([1.0, 2.0, -0.5]))
    q = quat_from_two_vectors(a, b)
    assert np.allclose(quat_rotate(q, a), b, atol=1e-12)


def test_quat_from_two_vectors_antipodal():
    # the degenerate 180-degree case must still return a unit quat
    a = np.array([0.0, 0.0, 1.0])
    q = quat_from_two_vectors(a, -a)
    assert np.linalg.norm(q) == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(quat_rotate(q, a), -a, atol=1e-12)


def test_rotation_between_axis_angle():
    R = rotation_between(np.array([1.0, 0, 0]), np.array([0, 1.0, 0]))
    assert np.allclose(R @ np.array([1.0, 0, 0]), [0, 1, 0], atol=1e-12)
    assert rotation_angle(R) == pytest.approx(np.pi / 2, abs=1e-12)


def test_rotation_angle_identity():
    assert rotation_angle(np.eye(3)) == pytest.approx(0.0, abs=1e-9)


def test_slerp_dir_endpoints_and_midpoint():
    a = np.array([1.0, 0.0, 0.0])
    b = np.array([0.0, 1.0, 0.0])
    assert np.allclose(slerp_dir(a, b, 0.0), a, atol=1e-12)
    assert np.allclose(slerp_dir(a, b, 1.0), b, atol=1e-12)
    mid = slerp_dir(a, b, 0.5)
    assert np.allclose(mid, unit(a + b), atol=1e-12)


def test_slerp_dir_equal_inputs():
    a = unit(np.array([0.2, -0.4, 0.7]))
    assert np.allclose(slerp_dir(a, a, 0.37), a, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(vec, vec)
def test_quat_from_two_vectors_property(a, b):
    a, b = unit(a), unit(b)
    q = quat_from_two_vectors(a, b)
    assert np.linalg.norm(q) == pytest.approx(1.0, abs=1e-9)
    assert np.allclose(quat_rotate(q, a), b, atol=1e-9)


@settings(max_examples=50, deadline=None)
@given(vec, vec)
def test_rotation_preserves_norm(a, v):
    q = quat_from_two_vectors(unit(a), np.array([0.0, 0.0, 1.0]))
    assert np.linalg.norm(quat_rotate(q, v)) == pytest.approx(
        np.linalg.norm(v), rel=1e-9
    )
