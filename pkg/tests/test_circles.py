import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dhcalib.circles import SpaceCircle, fit_plane, fit_quality, fit_space_circle, plane_basis
from dhcalib.errors import DegenerateFitError

JOINT1_CENTER = np.array([-220.2609, 125.321, 836.3645])
JOINT1_RADIUS = 164.4061
JOINT1_NORMAL = np.array([0.0040, 0.9965, -0.0839])


def sample_circle(center, normal, radius, angles):
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    e1, e2 = plane_basis(n)
    angles = np.asarray(angles)[:, None]
    return center + radius * (np.cos(angles) * e1 + np.sin(angles) * e2)


def exact_circle(center, normal, radius):
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    return SpaceCircle(plane=np.append(n, -n @ center), center=np.asarray(center, float), radius=radius)


def random_rotation(v):
    # Rodrigues rotation from an axis-angle 3-vector
    theta = np.linalg.norm(v)
    if theta < 1e-12:
        return np.eye(3)
    k = v / theta
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + np.sin(theta) * K + (1 - np.cos(theta)) * K @ K


def grid_normal(points):
    """Normal minimizing squared plane distances, by exhaustive sphere search."""
    rel = points - points.mean(axis=0)

    def cost(n):
        return np.sum((rel @ n.T) ** 2, axis=0)

    def directions(theta, phi):
        t, p = np.meshgrid(theta, phi, indexing="ij")
        return np.stack([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)], axis=-1).reshape(-1, 3)

    cand = directions(np.linspace(0, np.pi / 2, 181), np.linspace(-np.pi, np.pi, 721))
    best = cand[np.argmin(cost(cand))]
    t0, p0 = np.arccos(np.clip(best[2], -1, 1)), np.arctan2(best[1], best[0])
    for width in (0.02, 2e-3, 2e-4):
        cand = directions(np.linspace(t0 - width, t0 + width, 81), np.linspace(p0 - width, p0 + width, 81))
        best = cand[np.argmin(cost(cand))]
        t0, p0 = np.arccos(np.clip(best[2], -1, 1)), np.arctan2(best[1], best[0])
    return best


def same_axis(n1, n2, tol):
    return min(np.linalg.norm(n1 - n2), np.linalg.norm(n1 + n2)) <= tol


def test_plane_through_four_points():
    pts = [[0, 0, 5], [1, 0, 5], [0, 1, 5], [3, 2, 5]]
    assert np.allclose(fit_plane(pts), [0, 0, 1, -5], atol=1e-12, rtol=0)


def test_plane_through_three_points():
    pts = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    s = 1 / np.sqrt(3)
    assert np.allclose(fit_plane(pts), [s, s, s, -s], atol=1e-12, rtol=0)


def test_noisy_plane_against_grid_search(rng):
    n_true = np.array([0.3, -0.2, 0.9])
    n_true /= np.linalg.norm(n_true)
    e1, e2 = plane_basis(n_true)
    uv = rng.uniform(-100, 100, size=(10, 2))
    sigma = 0.1
    pts = 40 * n_true + uv[:, :1] * e1 + uv[:, 1:] * e2 + rng.normal(0, sigma, (10, 1)) * n_true
    plane = fit_plane(pts)
    m_p = np.sqrt(np.mean((pts @ plane[:3] + plane[3]) ** 2))
    assert m_p < sigma
    assert same_axis(plane[:3], grid_normal(pts), 1e-3)


def test_circumcircle():
    c = fit_space_circle([[1, 0, 0], [0, 1, 0], [-1, 0, 0]])
    assert np.allclose(c.center, 0, atol=1e-12, rtol=0)
    assert c.radius == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(c.plane, [0, 0, 1, 0], atol=1e-12, rtol=0)


def test_joint1_circle_refit():
    pts = sample_circle(JOINT1_CENTER, JOINT1_NORMAL, JOINT1_RADIUS, np.linspace(0, 2 * np.pi, 10, endpoint=False))
    c = fit_space_circle(pts)
    assert np.allclose(c.center, JOINT1_CENTER, atol=1e-6, rtol=0)
    assert abs(c.radius - JOINT1_RADIUS) <= 1e-6
    assert same_axis(c.normal, JOINT1_NORMAL / np.linalg.norm(JOINT1_NORMAL), 1e-9)


def test_quarter_arc_determines_circle():
    pts = sample_circle(np.zeros(3), [0, 0, 1], 1.0, np.linspace(-np.pi / 4, np.pi / 4, 10))
    c = fit_space_circle(pts)
    assert np.allclose(c.center, 0, atol=1e-9, rtol=0)
    assert abs(c.radius - 1.0) <= 1e-9


def test_quality_of_exact_points():
    pts = sample_circle(JOINT1_CENTER, JOINT1_NORMAL, JOINT1_RADIUS, np.linspace(0, 6, 10))
    q = fit_quality(fit_space_circle(pts), pts)
    assert q.d_cp <= 1e-12
    assert q.m_p <= 1e-12
    assert q.m_c <= 1e-12


@pytest.mark.parametrize("delta", [1e-3, 0.5, 2.0])
def test_flatness_closed_form(delta):
    n_points = 12
    circle = exact_circle(JOINT1_CENTER, JOINT1_NORMAL, JOINT1_RADIUS)
    pts = sample_circle(JOINT1_CENTER, JOINT1_NORMAL, JOINT1_RADIUS, np.linspace(0, 5, n_points))
    pts[4] += delta * circle.normal
    assert fit_quality(circle, pts).m_p == pytest.approx(delta / np.sqrt(n_points), abs=1e-9)


@pytest.mark.parametrize("delta", [1e-3, 0.5, 2.0])
def test_roundness_closed_form(delta):
    n_points = 12
    circle = exact_circle(JOINT1_CENTER, JOINT1_NORMAL, JOINT1_RADIUS)
    pts = sample_circle(JOINT1_CENTER, JOINT1_NORMAL, JOINT1_RADIUS, np.linspace(0, 5, n_points))
    base = fit_quality(circle, pts)
    radial = (pts[7] - circle.center) / JOINT1_RADIUS
    pts[7] += delta * radial
    q = fit_quality(circle, pts)
    assert q.m_c == pytest.approx(delta / np.sqrt(n_points), abs=1e-6)
    assert q.m_p == pytest.approx(base.m_p, abs=1e-12)


def test_degenerate_inputs():
    with pytest.raises(DegenerateFitError):
        fit_space_circle([[0, 0, 0], [1, 1, 1], [2, 2, 2], [3, 3, 3]])
    with pytest.raises(DegenerateFitError):
        fit_space_circle([[0, 0, 0], [1, 0, 0]])
    with pytest.raises(DegenerateFitError):
        fit_plane([[1, 2, 3]] * 5)


circle_params = st.tuples(
    st.lists(st.floats(-500, 500), min_size=3, max_size=3),  # center
    st.lists(st.floats(-1, 1), min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 0.1),
    st.floats(10, 300),  # radius
    st.floats(0, 2 * np.pi),  # arc start
    st.floats(np.pi / 2, 2 * np.pi),  # arc span
)
motions = st.tuples(
    st.lists(st.floats(-3, 3), min_size=3, max_size=3),
    st.lists(st.floats(-1000, 1000), min_size=3, max_size=3),
)


@settings(max_examples=60)
@given(circle_params, motions)
def test_rigid_motion_equivariance(params, motion):
    center, normal, radius, start, span = params
    pts = sample_circle(np.array(center), normal, radius, start + np.linspace(0, span, 10))
    # a little off-circle scatter so the metrics are not all zero
    pts += np.sin(np.arange(30)).reshape(10, 3) * 0.05
    R, t = random_rotation(np.array(motion[0])), np.array(motion[1])
    moved = pts @ R.T + t
    c0, c1 = fit_space_circle(pts), fit_space_circle(moved)
    assert np.allclose(c1.center, R @ c0.center + t, atol=1e-9, rtol=0)
    assert abs(c1.radius - c0.radius) <= 1e-9
    assert same_axis(c1.normal, R @ c0.normal, 1e-9)
    q0, q1 = fit_quality(c0, pts), fit_quality(c1, moved)
    assert abs(q0.m_p - q1.m_p) <= 1e-9
    assert abs(q0.m_c - q1.m_c) <= 1e-9
    assert q1.d_cp <= 1e-9


@settings(max_examples=60)
@given(circle_params)
def test_refit_is_fixed_point(params):
    center, normal, radius, start, span = params
    pts = sample_circle(np.array(center), normal, radius, start + np.linspace(0, span, 10))
    c = fit_space_circle(pts)
    again = fit_space_circle(sample_circle(c.center, c.normal, c.radius, np.linspace(0, 5, 10)))
    assert np.allclose(again.center, c.center, atol=1e-9, rtol=0)
    assert abs(again.radius - c.radius) <= 1e-9
    assert same_axis(again.normal, c.normal, 1e-9)
