import math

import pytest
from hypothesis import given, strategies as st

from lattice_shuttle import FinalState, LatticeConfig, derive_params, excess_energy, final_energy, min_shuttle_time
from lattice_shuttle.constants import HBAR
from lattice_shuttle.errors import InvalidConfigError


def test_cs_trap_frequency(params):
    assert params.omega0 == pytest.approx(2 * math.pi * 116e3, rel=0.01)


def test_cs_lamb_dicke_ratio(params):
    assert abs(params.lamb_dicke_ratio - 58) <= 1
    # hbar w0 / E_R = 2 sqrt(a / E_R) for a harmonic lattice well
    assert params.lamb_dicke_ratio == pytest.approx(2 * math.sqrt(850), rel=1e-12)


def test_depth_times_four_doubles_frequency(cs_cfg, params):
    deeper = LatticeConfig(cs_cfg.wavelength, 4 * cs_cfg.depth, cs_cfg.mass)
    assert derive_params(deeper).omega0 == pytest.approx(2 * params.omega0, rel=1e-14)


def test_derived_quantities(cs_cfg, params):
    k = 2 * math.pi / cs_cfg.wavelength
    assert cs_cfg.wavenumber * cs_cfg.wavelength == pytest.approx(2 * math.pi, rel=1e-15)
    assert params.recoil_energy == (HBAR * k) ** 2 / (2 * cs_cfg.mass)
    assert params.period == pytest.approx(2 * math.pi / params.omega0, rel=1e-15)
    assert cs_cfg.distance == cs_cfg.wavelength / 2


def test_derive_params_is_pure(cs_cfg):
    assert derive_params(cs_cfg) == derive_params(LatticeConfig(**cs_cfg.__dict__))


@pytest.mark.parametrize("field", ["wavelength", "depth", "mass"])
@pytest.mark.parametrize("bad", [0.0, -1.0, math.nan])
def test_invalid_config(field, bad):
    kwargs = dict(wavelength=866e-9, depth=1e-28, mass=2e-25)
    kwargs[field] = bad
    with pytest.raises(InvalidConfigError):
        LatticeConfig(**kwargs)


def test_negative_distance_rejected():
    with pytest.raises(InvalidConfigError):
        LatticeConfig(866e-9, 1e-28, 2e-25, -1e-9)


@pytest.mark.parametrize("n", [0, 1, 4])
def test_unexcited_final_energy(params, cs_cfg, n):
    d = cs_cfg.distance
    fs = FinalState(1.0, 0.0, d, 0.0, n)
    assert final_energy(fs, params, d) == pytest.approx(HBAR * params.omega0 * (n + 0.5), rel=1e-15)
    assert excess_energy(fs, params, d) == 0.0


def test_width_excess_is_quadratic(params, cs_cfg):
    d = cs_cfg.distance
    e = final_energy(FinalState(1.01, 0.0, d, 0.0, 0), params, d)
    hw = HBAR * params.omega0
    # series of (hw/4)(1 + r^4)/r^2 about r = 1: hw/2 + hw (r-1)^2 - hw (r-1)^3 + ...
    dr = 0.01
    series = hw / 2 + hw * dr**2 - hw * dr**3 + 1.25 * hw * dr**4
    assert e >= hw / 2
    assert e == pytest.approx(series, rel=1e-9)
    assert (e - hw / 2) == pytest.approx(hw * dr**2, rel=0.015)


def test_nonpositive_rho_rejected():
    with pytest.raises(ValueError):
        FinalState(0.0, 0.0, 0.0, 0.0)


finite = st.floats(-1e-6, 1e-6, allow_nan=False)


@given(rho=st.floats(0.5, 2.0), rd=st.floats(-1e6, 1e6), dq=finite, qd=st.floats(-1e-1, 1e-1), n=st.integers(0, 5))
def test_energy_properties(params, cs_cfg, rho, rd, dq, qd, n):
    d = cs_cfg.distance
    fs = FinalState(rho, rd, d + dq, qd, n)
    flipped = FinalState(rho, -rd, d + dq, -qd, n)
    e = final_energy(fs, params, d)
    assert e == final_energy(flipped, params, d)
    e0 = HBAR * params.omega0 * (n + 0.5)
    ex = excess_energy(fs, params, d)
    assert ex >= 0
    assert e - e0 == pytest.approx(ex, rel=1e-6, abs=1e-12 * e0)
    if (rho, rd, dq, qd) != (1.0, 0.0, 0.0, 0.0):
        assert ex > 0


def test_min_shuttle_time_cs(params, cs_cfg):
    # d = pi/k: 6 m d^2 / (T^4 w^2 a) = 1 gives T close to half a period
    T = min_shuttle_time(params, cs_cfg)
    assert T == pytest.approx(params.period / 2, rel=0.10)
    assert T * params.omega0 == pytest.approx((12 * math.pi**2) ** 0.25, rel=1e-12)


def test_min_shuttle_time_scaling(cs_cfg):
    zero = LatticeConfig(cs_cfg.wavelength, cs_cfg.depth, cs_cfg.mass, 0.0)
    assert min_shuttle_time(derive_params(zero), zero) == 0.0
    far = LatticeConfig(cs_cfg.wavelength, cs_cfg.depth, cs_cfg.mass, 2 * cs_cfg.distance)
    p = derive_params(cs_cfg)
    assert min_shuttle_time(p, far) == pytest.approx(math.sqrt(2) * min_shuttle_time(p, cs_cfg), rel=1e-14)
