import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twophase.errors import GeometryError, ResolutionError
from twophase.geometry import (GraphPatch, ReferenceSphere, graph_curvature,
                               linearized_curvature_mode, load_height_csv, load_height_json,
                               save_height_csv, save_height_json, sphere_measure,
                               translated_sphere_height)

from .oracles import axisymmetric_curvature, polar_curve_curvature


@pytest.mark.parametrize("n", [2, 3])
def test_quadrature_and_orthonormality(n):
    sph = ReferenceSphere(n, 1.0, 8)
    G = sph.basis.T @ (sph.weights[:, None] * sph.basis)
    np.testing.assert_allclose(G, np.eye(G.shape[0]), atol=1e-12)
    assert sph.weights.sum() == pytest.approx(sphere_measure(n))


def test_polar_curve_oracle():
    sph = ReferenceSphere(2, 1.2, 30)
    phi = sph.lon
    eps = 0.02
    h = eps * (np.cos(3 * phi) + 0.5 * np.sin(2 * phi))
    dh = eps * (-3 * np.sin(3 * phi) + np.cos(2 * phi))
    d2h = eps * (-9 * np.cos(3 * phi) - 2 * np.sin(2 * phi))
    H = graph_curvature(GraphPatch(sph, h))
    np.testing.assert_allclose(H, polar_curve_curvature(1.2, h, dh, d2h), atol=1e-11)


def test_axisymmetric_oracle():
    sph = ReferenceSphere(3, 0.9, 24)
    x = np.cos(sph.colat)
    eps = 0.02
    # h = eps*P2(cos theta)
    h = eps * 0.5 * (3 * x ** 2 - 1)
    dh = eps * (-3 * x * np.sin(sph.colat))
    d2h = eps * (-3 * (np.cos(sph.colat) ** 2 - np.sin(sph.colat) ** 2))
    H = graph_curvature(GraphPatch(sph, h))
    ref = axisymmetric_curvature(0.9, h, dh, d2h, sph.colat)
    np.testing.assert_allclose(H, ref, atol=1e-10)


@pytest.mark.parametrize("n", [2, 3])
def test_translated_sphere_has_constant_curvature(n):
    sph = ReferenceSphere(n, 1.0, 36)
    shift = np.zeros(n)
    shift[0] = 0.01
    h = translated_sphere_height(sph, shift)
    H = graph_curvature(GraphPatch(sph, h))
    np.testing.assert_allclose(H, -(n - 1), atol=1e-9)


@settings(max_examples=20, deadline=None)
@given(l=st.integers(0, 6), n=st.sampled_from([2, 3]), R=st.floats(0.2, 5.0))
def test_linearized_mode_formula(l, n, R):
    a = linearized_curvature_mode(l, n, R)
    assert a == pytest.approx((l * (l + n - 2) - (n - 1)) / R ** 2)
    if l == 1:
        assert a == 0.0


@pytest.mark.parametrize("n", [2, 3])
def test_linearization_matches_derivative(n):
    sph = ReferenceSphere(n, 1.0, 24)
    Y = sph.harmonic(2, 2)
    H0 = graph_curvature(GraphPatch(sph, 0 * Y))
    e = 1e-5
    dH = (graph_curvature(GraphPatch(sph, e * Y)) - graph_curvature(GraphPatch(sph, -e * Y))) / (2 * e)
    np.testing.assert_allclose(dH, -linearized_curvature_mode(2, n, 1.0) * Y, atol=1e-6)
    assert np.allclose(H0, -(n - 1))


def test_admissibility_and_resolution():
    sph = ReferenceSphere(3, 1.0, 12)
    with pytest.raises(GeometryError):
        graph_curvature(GraphPatch(sph, np.full(sph.npts, 0.5)))
    with pytest.raises(ResolutionError):
        graph_curvature(GraphPatch(sph, 1e-3 * sph.harmonic(10, 0)))


@pytest.mark.parametrize("n", [2, 3])
def test_height_io_roundtrip(tmp_path, n):
    sph = ReferenceSphere(n, 1.0, 6)
    h = 0.01 * sph.harmonic(3, 1 if n == 3 else 3)
    save_height_csv(tmp_path / "h.csv", sph, h)
    save_height_json(tmp_path / "h.json", sph, h)
    np.testing.assert_allclose(load_height_csv(tmp_path / "h.csv", sph), h, atol=1e-15)
    np.testing.assert_allclose(load_height_json(tmp_path / "h.json", sph), h, atol=1e-14)
