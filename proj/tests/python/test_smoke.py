"""Python smoke tests for the bound core operations."""

import math

import pytest

import carnotgeom as cg


@pytest.fixture(scope="module")
def h1():
    return cg.StratifiedAlgebra.heisenberg(1)


@pytest.fixture(scope="module")
def korany(h1):
    return cg.HomogeneousNorm.korany(h1)


def test_group_law(h1):
    p = h1.mul([1.0, 0.0, 0.0], [0.0, 1.0, 0.0])
    assert p[0] == pytest.approx(1.0)
    assert p[1] == pytest.approx(1.0)
    assert p[2] == pytest.approx(0.5)
    e = h1.mul([0.3, -0.2, 0.9], h1.inverse([0.3, -0.2, 0.9]))
    assert max(abs(x) for x in e) < 1e-14


def test_structure_reports(h1):
    rep = h1.verify()
    assert rep.ok()
    assert rep.Q == 4
    engel = cg.StratifiedAlgebra.engel()
    assert engel.verify().Q == 7
    assert engel.dilate(2.0, [1, 1, 1, 1])[3] == pytest.approx(8.0)


def test_norm_and_gradient(h1, korany):
    assert korany([0.0, 0.0, 1.0]) == pytest.approx(2.0)  # 16^{1/4}
    g = korany.gradient([1.0, 0.0, 0.0])
    assert g[0] == pytest.approx(1.0)
    k1, k2 = korany.metric_factor_bounds(4096)
    assert 0 < k1 < k2


def test_h_perimeter_disk(h1, korany):
    surface = cg.make_surface(h1, "h1-t0-plane")
    value, err = cg.h_perimeter(
        surface,
        cg.QuadratureSpec(5, 10, 1e-8),
        korany,
        [0.0, 0.0, 0.0],
        1.0,
    )
    assert value == pytest.approx(math.pi / 3.0, abs=5e-6)


def test_blowup(h1, korany):
    surface = cg.make_surface(h1, "h1-t0-plane")
    res = cg.blowup_density(surface, 0, [0.0, 0.0], korany, cg.QuadratureSpec(5, 10, 1e-8))
    assert res["kind"] == "case-b"
    assert res["kappa"] == pytest.approx(math.pi / 3.0, abs=5e-5)


def test_curvature(h1):
    cyl = cg.make_surface(h1, "h1-cylinder", 2.0)
    H = cg.horizontal_mean_curvature(cyl, 0, [0.1, 0.2])
    assert H == pytest.approx(0.5, abs=1e-5)


def test_isoperimetric_verdict(h1, korany):
    ctx = cg.make_context(h1, korany, 4096)
    disk = cg.make_surface(h1, "h1-disk")
    rep = cg.isoperimetric_report(ctx, disk, cg.QuadratureSpec(4, 6, 1e-4))
    assert rep["verdict"] == "holds"


def test_error_propagation(h1):
    with pytest.raises(Exception):
        cg.make_surface(h1, "no-such-surface")
