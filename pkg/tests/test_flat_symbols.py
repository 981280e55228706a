import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twophase import flat_symbols as fs
from twophase.errors import BranchError, ConfigError

from .oracles import flat_transmission_matrix

pos = st.floats(0.3, 5.0)
params = st.builds(fs.SymbolParams, pos, pos, pos, pos).filter(lambda p: abs(p.rho1 - p.rho2) > 0.05)
zs = st.builds(lambda r, a: r * np.exp(1j * a), st.floats(1e-2, 1e3), st.floats(-1.5, 1.5))


@settings(max_examples=60, deadline=None)
@given(par=params, z=zs)
def test_determinant_matches_flat_problem(par, z):
    """det of the flat 4x4 system is r(z) times a factor shared by both variants."""
    ratios = []
    for v in ("S11", "S22"):
        D = np.linalg.det(flat_transmission_matrix(z, par.rho1, par.rho2, par.mu1, par.mu2, v))
        ratios.append(D / fs.symbols(v, z, par).r)
    assert abs(ratios[0] - ratios[1]) <= 1e-8 * abs(ratios[0])


@settings(max_examples=60, deadline=None)
@given(par=params, z=zs)
def test_factorization(par, z):
    for v in ("S11", "S22"):
        assert fs.symbols(v, z, par).residual <= 1e-10


def test_printed_formulas_do_not_factor():
    par = fs.SymbolParams(1.0, 2.0, 1.5, 0.7)
    z = np.array([0.5, 2 + 1j, 10j])
    assert np.max(fs.symbols("S11", z, par, literal=True).residual) > 1e-3
    assert np.max(fs.symbols("S22", z, par, literal=True).residual) > 1e-3


@settings(max_examples=30, deadline=None)
@given(par=params)
def test_limits_at_zero_and_infinity(par):
    for v in ("S11", "S22"):
        lim = fs.derived_limits(v, par)
        b0 = fs.symbols(v, 0.0, par)
        np.testing.assert_allclose([b0.p1, b0.p2], lim["p0"], atol=1e-12)
        np.testing.assert_allclose([b0.q1, b0.q2], lim["q0"], rtol=1e-12)
        binf = fs.symbols(v, 1e10, par)
        np.testing.assert_allclose([binf.q1, binf.q2], lim["qinf"], rtol=1e-4)
        np.testing.assert_allclose([binf.p1, binf.p2], lim["pinf"], rtol=1e-4)


@settings(max_examples=30, deadline=None)
@given(par=params, z=zs)
def test_psi_positive_real_part(par, z):
    psi, _ = fs.psi_and_ell(z, par)
    assert psi.real > 0


def test_psi_ell_values():
    par = fs.SymbolParams(1.0, 2.0, 1.5, 0.7)
    psi, ell = fs.psi_and_ell(0.0, par)
    assert psi == pytest.approx(2 * (1.5 + 0.7))
    assert ell == 0
    z = 1e9
    assert z * fs.psi_and_ell(z, par)[1] == pytest.approx(fs.ell_infinity_limit(par), rel=1e-4)


@settings(max_examples=30, deadline=None)
@given(par=params, z=zs)
def test_conjugation_symmetry(par, z):
    a = fs.symbols("S11", z, par)
    b = fs.symbols("S11", np.conj(z), par)
    assert b.r == pytest.approx(np.conj(a.r), rel=1e-12)


def test_branch_cut_and_config_errors():
    par = fs.SymbolParams(1.0, 2.0, 1.0, 1.0)
    with pytest.raises(BranchError):
        fs.symbol_point(-5.0, par)
    with pytest.raises(ConfigError):
        fs.symbols("S33", 1.0, par)
    with pytest.raises(ConfigError):
        fs.s_boundary_symbol(1.0, [1.0, 0.0], par, 1.0)


def test_boundary_symbol_with_placeholder_m():
    par = fs.SymbolParams(1.0, 2.0, 1.0, 1.0)
    m = fs.constant_m(2.0)
    assert m.non_physical
    s = fs.s_boundary_symbol(1.0, [3.0, 4.0], par, sigma=1.0, m_fn=m)
    assert s == pytest.approx(1.0 + 5.0 / 1.0 * 2.0)
