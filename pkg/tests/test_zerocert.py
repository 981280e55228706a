import numpy as np
import pytest

from twophase import flat_symbols as fs
from twophase import zerocert as zc
from twophase.errors import ConfigError, ZeroOnContourError

PAR = fs.SymbolParams(1.0, 2.0, 1.0, 1.0)


@pytest.mark.parametrize("k", [0, 1, 3])
def test_winding_of_powers(k):
    cert = zc.winding_number(lambda z: (z - 0.1) ** k, zc.circle(0.0, 1.0, 16))
    assert cert.winding == k


def test_winding_refinement_needed():
    cert = zc.winding_number(lambda z: z ** 5, zc.circle(0.0, 1.0, 16))
    assert cert.winding == 5
    assert cert.depth > 0


def test_zero_outside_not_counted():
    cert = zc.winding_number(lambda z: z - 2.0, zc.circle(0.0, 1.0))
    assert cert.winding == 0 and cert.verdict == "zero-free"


def test_zero_on_contour():
    with pytest.raises(ZeroOnContourError):
        zc.winding_number(lambda z: z - 1.0, zc.circle(0.0, 1.0, 16))


@pytest.mark.parametrize("variant", ["S11", "S22"])
def test_r2_zero_free(variant):
    for cert in zc.certify_nested(variant, PAR):
        assert cert.winding == 0
        assert cert.verdict == "zero-free"


@pytest.mark.parametrize("variant", ["S11", "S22"])
def test_planted_zero(variant):
    cert = zc.certify_zero_free(variant, zc.Region("half-plane", 10.0), PAR, planted_zero=2 + 1j)
    assert cert.winding == 1


def test_sector_contour_counts_zero():
    c = zc.sector(np.pi / 3, 0.1, 10.0)
    assert zc.winding_number(lambda z: z - 1.0, c).winding == 1
    assert zc.winding_number(lambda z: z + 1.0, c).winding == 0


def test_region_checks():
    with pytest.raises(ConfigError):
        zc.Region("half-plane", 10.0, margin=5.0).check_cuts(PAR)
    with pytest.raises(ConfigError):
        zc.sector(4.0, 0.1, 1.0)


def test_lower_bound_scan():
    setup = zc.SymbolSetup(PAR, sigma=1.0, m_fn=fs.constant_m(1.0))
    out = zc.lower_bound_scan(setup, zc.Region("sector", 1e2, 1e-2, phi=np.pi / 2),
                              n_lam=12, n_tau=8)
    assert out["positive"] and out["c_hat"] > 0


def test_certificate_serializable():
    import json
    cert = zc.certify_zero_free("S11", zc.Region("half-plane", 10.0), PAR)
    json.dumps(cert.to_dict())
