import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twophase.errors import ConfigError, DomainError
from twophase.thermo import (MaterialParams, eval_phase, internal_energy, latent_heat,
                             log_law, make_law, normal_jump_from_flux,
                             phase_flux_from_normal_jump, power_transport_law)

pos = st.floats(0.05, 20.0)


def test_log_law_closed_forms():
    law = log_law(c=2.0, e0=0.3, s0=0.1)
    th = np.array([0.5, 1.0, 3.0])
    np.testing.assert_allclose(internal_energy(th, law), 2.0 * th + 0.3, rtol=1e-14)
    mat = MaterialParams(1.0, 2.0, 1.0, law, law)
    s = eval_phase(1.7, 1, mat)
    assert s.kappa == pytest.approx(2.0)
    assert s.eta == pytest.approx(2.0 * np.log(1.7) + 0.1)


@settings(max_examples=50, deadline=None)
@given(c=pos, e0=st.floats(-2, 2), s0=st.floats(-2, 2), theta=pos)
def test_derived_quantities_consistent(c, e0, s0, theta):
    law = log_law(c, e0, s0)
    mat = MaterialParams(1.0, 2.0, 1.0, law, law)
    s = eval_phase(theta, 1, mat)
    assert s.eps == pytest.approx(s.psi + theta * s.eta, rel=1e-12, abs=1e-12)
    h = 1e-6 * theta
    deps = (internal_energy(theta + h, law) - internal_energy(theta - h, law)) / (2 * h)
    assert deps == pytest.approx(s.kappa, rel=1e-6)


@settings(max_examples=50, deadline=None)
@given(c1=pos, c2=pos, s1=st.floats(-1, 1), s2=st.floats(-1, 1), theta=pos)
def test_latent_heat_definition(c1, c2, s1, s2, theta):
    mat = MaterialParams(1.0, 3.0, 1.0, log_law(c1, 0, s1), log_law(c2, 0, s2))
    ref = theta * ((-c2 * np.log(theta) - s2) - (-c1 * np.log(theta) - s1))
    assert latent_heat(theta, mat) == pytest.approx(ref, rel=1e-12, abs=1e-12)


def test_flux_roundtrip():
    mat = MaterialParams(1.0, 4.0, 1.0)
    j = phase_flux_from_normal_jump(0.3, mat)
    assert normal_jump_from_flux(j, mat) == pytest.approx(0.3)


def test_errors():
    with pytest.raises(ConfigError):
        MaterialParams(1.0, 1.0, 1.0)
    with pytest.raises(ConfigError):
        make_law("nope")
    with pytest.raises(DomainError):
        eval_phase(-1.0, 1, MaterialParams(1.0, 2.0, 1.0))
    with pytest.raises(ConfigError):
        power_transport_law(mu0=-1.0)


def test_power_law_transport():
    law = make_law("power", [1.0, 0.0, 0.0, 2.0, 1.0, 3.0, -1.0])
    assert law.mu(2.0) == pytest.approx(4.0)
    assert law.d(2.0) == pytest.approx(1.5)
    law.check()
