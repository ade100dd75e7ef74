import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq
from scipy.spatial import cKDTree
from scipy.spatial.transform import Rotation

from spincmv.errors import GridTooCoarse, NoLevelSet, NotUnit
from spincmv.geometry import (
    PROFILE_PEAK,
    GridSpec,
    LevelSetMesh,
    cmv_extent,
    compactified,
    compactified_multilinear,
    correlation_along,
    extract_level_sets,
    extract_level_sets_multilinear,
    extract_pseudovector_level_sets,
    fit_grid,
    multilinear_form,
    pseudovector_form,
    quad_form,
    size_asymptote,
)


def test_profile_peak_value():
    r = np.linspace(0, 5, 200001)
    assert np.max(r * r / (1 + r * r) ** 1.5) == pytest.approx(PROFILE_PEAK, rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_quad_form_routes_agree(seed):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=(3, 3))
    r = rng.normal(size=(7, 3))
    direct = np.einsum("ki,ij,kj->k", r, c, r)
    np.testing.assert_allclose(quad_form(c, r), direct, rtol=1e-12, atol=1e-12)
    assert np.array_equal(quad_form(c, r), multilinear_form(c, r))
    assert np.array_equal(compactified(c, r), compactified_multilinear(c, r))
    np.testing.assert_allclose(compactified(c, r), direct / (1 + np.sum(r * r, axis=1)) ** 1.5, rtol=1e-12)


def test_third_order_form():
    rng = np.random.default_rng(2)
    t = rng.normal(size=(3, 3, 3))
    r = rng.normal(size=(5, 3))
    np.testing.assert_allclose(multilinear_form(t, r), np.einsum("ijk,ni,nj,nk->n", t, r, r, r), rtol=1e-12)


def test_pseudovector_form():
    a = np.array([0.2, -0.1, 0.4])
    r = np.array([[1.0, 2.0, 3.0]])
    assert pseudovector_form(a, r)[0] == pytest.approx(1.2)
    assert pseudovector_form(a, r, compact=True)[0] == pytest.approx(1.2 / 15)


def test_correlation_along_requires_unit():
    c = np.diag([1.0, 2.0, 3.0])
    assert correlation_along(c, [0, 1, 0]) == 2.0
    with pytest.raises(NotUnit):
        correlation_along(c, [0, 2, 0])


def field_at(c, v):
    return compactified(c, v)


@pytest.mark.parametrize(
    "diag",
    [(1, -1, 1), (0.5, 0, 0), (0.3, -0.2, 0), (0.2, 0.15, 0.1)],
)
def test_mesh_vertices_on_level(diag):
    c = np.diag(diag)
    P = 0.01
    grid = fit_grid(c, P, 64)
    for m in extract_level_sets(c, P, grid):
        if m.empty:
            continue
        vals = m.sign * field_at(c, m.vertices)
        assert np.all(np.abs(vals - P) < 0.05 * P)
        assert not m.clipped


def test_mesh_signs_and_emptiness():
    pos, neg = extract_level_sets(np.diag([0.4, 0.3, 0.2]), 0.01, GridSpec(8.0, 49))
    assert pos.sign == 1 and neg.sign == -1
    assert not pos.empty and neg.empty
    assert pos.clipped and not neg.clipped


def test_unresolved_inner_hole_is_flagged():
    # an even grid misses the origin, so every sample lies above P
    pos, _ = extract_level_sets(np.diag([0.4, 0.3, 0.2]), 0.01, GridSpec(8.0, 48))
    assert pos.empty and pos.clipped
    zero = extract_level_sets(np.zeros((3, 3)), 0.01, GridSpec(4.0, 24))
    assert all(m.empty for m in zero)


def test_clipped_flag():
    pos, neg = extract_level_sets(np.diag([1, -1, 1]), 0.01, GridSpec(4.0, 32))
    assert pos.clipped and neg.clipped


def test_rotation_equivariance():
    c = np.diag([0.4, -0.25, 0.1])
    r = Rotation.from_euler("zyx", [0.4, 1.0, -0.7]).as_matrix()
    grid = GridSpec(fit_grid(c, 0.01).half_extent, 64)
    base = extract_level_sets(c, 0.01, grid)
    turned = extract_level_sets(r @ c @ r.T, 0.01, grid)
    for a, b in zip(base, turned):
        moved = a.vertices @ r.T
        d1 = cKDTree(b.vertices).query(moved)[0].max()
        d2 = cKDTree(moved).query(b.vertices)[0].max()
        assert max(d1, d2) < 2 * grid.spacing


def test_level_set_rejects_bad_input():
    with pytest.raises(ValueError):
        extract_level_sets(np.eye(2), 0.01)
    with pytest.raises(ValueError):
        extract_level_sets(np.eye(3), 0.0)


def test_grid_refinement_warning():
    with pytest.warns(GridTooCoarse, match="100.0%"):
        # the coarse grid misses this small dumbbell entirely
        extract_level_sets(np.diag([1, 0, 0]), 0.38, GridSpec(2.0, 16), check_refinement=True)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        extract_level_sets(np.diag([0.5, 0, 0]), 0.05, GridSpec(9.0, 96), check_refinement=True)


def test_third_order_level_sets():
    t = np.zeros((3, 3, 3))
    t[0, 0, 0] = 1.0
    pos, neg = extract_level_sets_multilinear(t, 0.02, GridSpec(6.0, 48))
    assert not pos.empty and not neg.empty
    assert np.all(pos.vertices[:, 0] > 0) and np.all(neg.vertices[:, 0] < 0)


def test_pseudovector_level_sets():
    pos, neg = extract_pseudovector_level_sets([0, 0, 0.3], 0.05, GridSpec(8.0, 48))
    assert np.all(pos.vertices[:, 2] > 0) and np.all(neg.vertices[:, 2] < 0)


@pytest.mark.parametrize("c", [0.05, 0.3, 1.0, -0.7])
def test_cmv_extent_vs_root_finder(c):
    P = 0.01
    g = lambda r: abs(c) * r * r / (1 + r * r) ** 1.5 - P  # noqa: E731
    r_in, r_out, size = cmv_extent(np.diag([c, 0, 0]), [1, 0, 0], P)
    assert r_in == pytest.approx(brentq(g, 0, math.sqrt(2), xtol=1e-14), abs=1e-10)
    assert r_out == pytest.approx(brentq(g, math.sqrt(2), 1e4, xtol=1e-12), abs=1e-9)
    assert size == pytest.approx(r_out - r_in)


@pytest.mark.parametrize("ratio", [10, 30, 100])
def test_extent_asymptote(ratio):
    P = 0.01
    _, _, size = cmv_extent(np.diag([ratio * P, 0, 0]), [1, 0, 0], P)
    assert abs(size - size_asymptote(ratio * P, P)) / size < 0.05


def test_no_level_set():
    with pytest.raises(NoLevelSet):
        cmv_extent(np.diag([0.01, 0, 0]), [1, 0, 0], 0.01)
    cmv_extent(np.diag([0.01 / PROFILE_PEAK * 1.001, 0, 0]), [1, 0, 0], 0.01)


def test_fit_grid_contains_level_sets():
    c = np.diag([0.2, -0.05, 0])
    grid = fit_grid(c, 0.01, 48)
    _, r_out, _ = cmv_extent(c, [1, 0, 0], 0.01)
    assert r_out < grid.half_extent < 1.1 * r_out
    assert fit_grid(np.zeros((3, 3))).half_extent == GridSpec().half_extent


def test_grid_spec_validation():
    with pytest.raises(ValueError):
        GridSpec(0.0, 32)
    with pytest.raises(ValueError):
        GridSpec(1.0, 8)
    g = GridSpec(2.0, 21)
    assert g.spacing == pytest.approx(0.2)
    assert g.points().shape == (21, 21, 21, 3)


def test_mesh_validation_and_scaling():
    with pytest.raises(ValueError):
        LevelSetMesh(np.zeros((2, 3)), np.array([[0, 1, 2]]), 1, 0.01)
    m = LevelSetMesh(np.eye(3), np.array([[0, 1, 2]]), -1, 0.01)
    assert m.area() == pytest.approx(math.sqrt(3) / 2)
    assert m.scaled(2.0).area() == pytest.approx(2 * math.sqrt(3))
