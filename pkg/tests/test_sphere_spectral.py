import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twophase import sphere_spectral as ss
from twophase.errors import ConfigError, SolvabilityError

from .oracles import heat_ntd_bessel

PAR = ss.LinearizationParams(rho1=1.0, rho2=2.0, mu1=1.0, mu2=2.0, kappa1=1.0, kappa2=1.5,
                             d1=1.0, d2=0.7, sigma=1.0, theta_star=1.0, l_star=0.5)


def geom(n=3, N=32, R=1.0, R_out=2.0):
    return ss.RadialGeometry(n=n, R=R, R_out=R_out, N=N)


@pytest.mark.parametrize("K", [5, 12, 25])
def test_chebyshev_differentiation_exact_on_polynomials(K):
    x, D = ss.cheb(K)
    for deg in range(K + 1):
        np.testing.assert_allclose(D @ x ** deg, deg * x ** max(deg - 1, 0) * (deg > 0),
                                   atol=1e-10 * K ** 2)


def test_barycentric_interpolation():
    K = 16
    xi = np.linspace(-0.99, 0.99, 7)
    M = ss.bary_matrix(K, xi)
    x, _ = ss.cheb(K)
    np.testing.assert_allclose(M @ np.cos(3 * x), np.cos(3 * xi), atol=1e-10)


@settings(max_examples=25, deadline=None)
@given(n=st.sampled_from([2, 3]), l=st.integers(0, 5), lam=st.floats(0.05, 500.0))
def test_heat_ntd_matches_bessel_oracle(n, l, lam):
    g = geom(n, N=40)
    ref = heat_ntd_bessel(lam, l, n, g.R, g.R_out, (PAR.rho1, PAR.rho2),
                          (PAR.kappa1, PAR.kappa2), (PAR.d1, PAR.d2))
    assert ss.heat_ntd(lam, l, g, PAR) == pytest.approx(ref, rel=1e-8)


@settings(max_examples=20, deadline=None)
@given(n=st.sampled_from([2, 3]), l=st.integers(0, 4),
       re=st.floats(0.0, 50.0), im=st.floats(-50.0, 50.0))
def test_heat_quadratic_identity(n, l, re, im):
    lam = complex(re, im)
    if abs(lam) < 1e-3:
        lam = 1.0
    g = geom(n)
    val, x, lay = ss.heat_ntd(lam, l, g, PAR, return_solution=True)
    Et, Eg = ss.heat_energy(lam, l, g, PAR, x, lay)
    assert np.conj(val) * g.R ** (n - 1) == pytest.approx(lam * Et + Eg, rel=1e-8)


def test_heat_ntd_errors():
    with pytest.raises(SolvabilityError):
        ss.heat_ntd(0.0, 0, geom(), PAR)
    with pytest.raises(ConfigError):
        ss.heat_ntd(-1.0, 2, geom(), PAR)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("lam", [0.0, 1.0, 100.0, 2.0 + 3.0j])
def test_stokes_structure(n, lam):
    for l in (1, 2, 4):
        op = ss.stokes_operator(lam, l, geom(n), PAR)
        S = op["S"]
        assert abs(S[0, 1] - S[1, 0]) <= 1e-8 * np.abs(S).max()
        schur = S[0, 0] - S[0, 1] * S[1, 0] / S[1, 1]
        assert op["N_S"] == pytest.approx(schur, rel=1e-8)
        if np.imag(lam) == 0:
            assert np.linalg.eigvalsh(S.real).min() > 0


def test_stokes_degree_zero_annihilates_constants():
    out = ss.stokes_mode_solve(1.0, 0, geom(), PAR, (1.0, 2.0))
    assert out["N_S"] == 0 and out["k"] == 0 and out["j"] == 0
    assert out["flagged"]


@pytest.mark.parametrize("n", [2, 3])
def test_dispersion_roots_are_eigenvalues(n):
    g = geom(n)
    for l in (2, 3):
        ms = ss.full_mode_eigenvalues(l, g, PAR, delta=20.0)
        assert ms.eigenvalues.size > 0
        for lam in ms.eigenvalues[:3]:
            b = ss.reduced_dispersion(lam, l, g, PAR, continued=True)
            scale = abs(lam * ss.transfer_t(lam, l, g, PAR, True))
            assert abs(b) <= 1e-6 * scale


@pytest.mark.parametrize("n", [2, 3])
def test_dispersion_positive_on_positive_axis(n):
    g = geom(n, N=24)
    for l in (2, 3, 5):
        for lam in np.geomspace(1e-3, 1e3, 13):
            assert ss.reduced_dispersion(lam, l, g, PAR).real > 0
    b = [abs(ss.reduced_dispersion(lam, 1, g, PAR)) for lam in (1e-2, 1e-4, 1e-6)]
    assert b[0] > b[1] > b[2] and b[2] < 1e-5


@pytest.mark.parametrize("n", [2, 3])
def test_energy_identity_on_whole_window(n):
    g = geom(n, N=28)
    for l in range(0, 4):
        for block in ss.mode_blocks(l, n):
            ms = ss.full_mode_eigenvalues(l, g, PAR, delta=40.0, block=block, grid_check=False)
            assert np.max(ms.energy_residuals, initial=0.0) <= 1e-8


@pytest.mark.parametrize("n", [2, 3])
def test_spectrum_closed_under_conjugation(n):
    ms = ss.full_mode_eigenvalues(2, geom(n), PAR, delta=40.0, grid_check=False)
    ev = ms.eigenvalues
    for z in ev:
        assert np.min(np.abs(ev - np.conj(z))) <= 1e-8 * max(1, abs(z))


@pytest.mark.parametrize("n, dim", [(2, 4), (3, 5)])
def test_kernel(n, dim):
    k = ss.kernel_analysis(geom(n, N=24), PAR, 1)
    assert k["dim"] == dim and k["semisimple"] and not k["inconclusive"]


def test_kernel_block_model_formula():
    assert ss.kernel_analysis(geom(2, N=24), PAR, 2)["dim"] == 6


@pytest.mark.parametrize("n", [2, 3])
def test_rigid_rotation_toroidal_energy(n):
    """W = r has no dissipation: the l=1 (n=3) or swirl (n=2) strain vanishes."""
    g = geom(n, N=16)
    rad = ss._radial(g)
    l = 1 if n == 3 else 0
    lay = ss._Layout([("W1", g.N), ("W2", g.N)])
    x = np.concatenate([rad.rb, rad.rs]).astype(complex)
    Eu, ED = ss._energy_toroidal(l, x, lay, g, PAR)
    assert Eu > 0 and abs(ED) < 1e-12


@pytest.mark.parametrize("m", [2, 3, 5])
def test_block_model_count(m):
    out = ss.multi_ball_block_spectrum(m, geom(3, N=24, R_out=3.0), PAR)
    assert out["positive_eigenvalue_count"] == m - 1
    assert out["mu_at_zero"] == pytest.approx(-2.0)


def test_block_model_single_ball():
    assert ss.multi_ball_block_spectrum(1, geom(3, N=24), PAR)["positive_eigenvalue_count"] == 0


def test_block_stokes_matrix_psd():
    S = ss.block_stokes_matrix(0.5, geom(), PAR, 1.6)
    assert np.allclose(S, S.T)
    assert np.linalg.det(S) == pytest.approx(0.0, abs=1e-14)
    assert S[0, 0] > 0 and S[1, 1] > 0


def test_decoupling_at_zero_latent_heat():
    par0 = ss.LinearizationParams(1.0, 2.0, 1.0, 2.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0)
    for l in (1, 2, 3):
        assert ss.decoupling_check(l, geom(3), par0, 10.0, delta=10.0) <= 1e-9
    with pytest.raises(ConfigError):
        ss.decoupling_check(2, geom(3), PAR)


def test_geometry_validation():
    with pytest.raises(ConfigError):
        ss.RadialGeometry(n=4)
    with pytest.raises(ConfigError):
        ss.RadialGeometry(R=2.0, R_out=1.0)
