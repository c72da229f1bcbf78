import math
import warnings

import pytest

from mirrorlab.params import (
    C_LIGHT,
    Cantilever,
    Laser,
    ModelApplicabilityWarning,
    NondimParams,
    PhysicalParams,
    cantilever_pipeline,
    force_prefactor,
    g0_bound,
    nondimensionalize,
    physicalize,
)
from mirrorlab.params import REFERENCE_CANTILEVER, REFERENCE_LASER


def sample_physical(**kw):
    base = dict(chi0=5e-8, M0=6.8e-6, k_N0=1e7, g0=1e-6, gamma=2e-4, k_ho=500.0, q_E=3e-7)
    base.update(kw)
    return PhysicalParams(**base)


def test_definitions_hold_exactly():
    p = sample_physical()
    nd = nondimensionalize(p)
    assert nd.Omega == 2 * nd.omega0 / nd.Delta
    assert nd.xi == 4 * math.pi * p.chi0 * p.k_N0
    assert nd.x_E == pytest.approx(p.k_N0 * p.q_E, rel=1e-15)
    # independent evaluation of the rate
    w0 = C_LIGHT * p.k_N0
    assert nd.Delta == pytest.approx((p.g0**2 * w0**3 / (math.pi**2 * p.M0 * C_LIGHT**3)) ** 0.5, rel=1e-14)


def test_round_trip():
    p = sample_physical()
    back = physicalize(nondimensionalize(p), p.M0)
    for name in ("chi0", "M0", "k_N0", "g0", "gamma", "k_ho", "q_E"):
        assert getattr(back, name) == pytest.approx(getattr(p, name), rel=1e-12)


def test_reference_point_rates():
    p = sample_physical(M0=6.8e-6, k_N0=3e15 / C_LIGHT, g0=1e-6)
    nd = nondimensionalize(p)
    assert nd.Delta == pytest.approx(3.8e6, rel=0.02)
    assert nd.Omega == pytest.approx(1.56e9, rel=0.02)


def test_doubling_field_strength():
    a = nondimensionalize(sample_physical(g0=1e-6))
    b = nondimensionalize(sample_physical(g0=2e-6))
    assert b.Delta == pytest.approx(2 * a.Delta, rel=1e-14)
    assert b.Omega == pytest.approx(a.Omega / 2, rel=1e-14)


def test_monotonicity():
    omegas = [nondimensionalize(sample_physical(g0=g)).Omega for g in (1e-8, 1e-7, 5e-7, 1e-6, 1e-5)]
    assert all(a > b for a, b in zip(omegas, omegas[1:]))
    xis = [nondimensionalize(sample_physical(chi0=c)).xi for c in (0.0, 1e-9, 1e-8, 1e-7)]
    assert all(a < b for a, b in zip(xis, xis[1:]))


def test_force_prefactor_consistency():
    p = sample_physical()
    nd = nondimensionalize(p)
    assert force_prefactor(p) == pytest.approx(p.M0 * nd.Delta**2 / p.k_N0, rel=1e-12)


def test_errors():
    with pytest.raises(ValueError):
        nondimensionalize(sample_physical(g0=None))
    with pytest.raises(ValueError):
        sample_physical(M0=0.0)
    with pytest.raises(ValueError):
        sample_physical(chi0=-1.0)
    with pytest.raises(ValueError):
        NondimParams(xi=1.0, Omega=0.0)
    with pytest.raises(ValueError):
        physicalize(NondimParams(xi=1.0, Omega=2.0), 1.0)


def test_cantilever_pipeline():
    r = cantilever_pipeline(REFERENCE_CANTILEVER, REFERENCE_LASER)
    p = r.params
    assert r.effective_mass == pytest.approx(3.3e-12, rel=0.02)
    assert p.M0 == pytest.approx(6.8e-6, rel=0.02)
    assert p.omega0 == pytest.approx(3e15, rel=0.01)  # rounded c in the quoted value
    assert r.thinning == 0.01
    nd = nondimensionalize(p)
    assert nd.Delta / p.g0 == pytest.approx(3.8e12, rel=0.02)
    assert nd.Omega * p.g0 == pytest.approx(1562.6, rel=0.02)
    assert p.g0 == pytest.approx(5.2e-7, rel=0.02)
    assert nd.xi == pytest.approx(6.4, rel=0.01)
    # order-of-magnitude ratios quoted for the worked point
    assert round(math.log10(nd.Gamma / nd.Omega)) == -14
    assert round(math.log10(nd.omega_ho / nd.Omega)) == -11
    text = r.report()
    for label in ("effective mass M", "thinning factor", "areal mass M0", "g0 bound", "Omega * g0"):
        assert label in text


def test_effective_mass_scaling():
    c1 = REFERENCE_CANTILEVER
    c2 = Cantilever(c1.length, c1.width, c1.thickness, c1.spring_constant, 2 * c1.omega1, c1.damping_rate)
    assert c2.effective_mass == pytest.approx(c1.effective_mass / 4, rel=1e-14)


def test_g0_bound_scaling_and_zero():
    b1 = g0_bound(REFERENCE_LASER, REFERENCE_CANTILEVER)
    b4 = g0_bound(Laser(633e-9, 4.0), REFERENCE_CANTILEVER)
    assert b4 == pytest.approx(2 * b1, rel=1e-14)
    assert g0_bound(Laser(633e-9, 0.0), REFERENCE_CANTILEVER) == 0.0
    with pytest.raises(ValueError):
        g0_bound(Laser(633e-9), REFERENCE_CANTILEVER)


def test_explicit_overrides_and_thinning():
    r = cantilever_pipeline(REFERENCE_CANTILEVER, Laser(633e-9), g0=1e-6, chi0=1e-8, thinning=0.02)
    assert r.params.g0 == 1e-6
    assert r.params.chi0 == 1e-8
    assert r.params.M0 == pytest.approx(2 * cantilever_pipeline(REFERENCE_CANTILEVER, REFERENCE_LASER).params.M0)
    with pytest.raises(ValueError):
        cantilever_pipeline(REFERENCE_CANTILEVER, REFERENCE_LASER, thinning=0.0)


def test_thickness_warning():
    thick = Cantilever(223e-6, 22e-6, 20e-6, 0.01, 2 * math.pi * 8.7e3, 30.0, 0.91)
    with pytest.warns(ModelApplicabilityWarning):
        cantilever_pipeline(thick, REFERENCE_LASER)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        cantilever_pipeline(REFERENCE_CANTILEVER, REFERENCE_LASER)
