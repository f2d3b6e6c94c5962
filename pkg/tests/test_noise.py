import math

import numpy as np
import pytest
from scipy import integrate

from lattice_shuttle.noise import (
    OU,
    Channel,
    NoiseSpec,
    Tabulated,
    White,
    correlation,
    load_correlation_csv,
    sample_ou_path,
    sample_ou_paths,
    spectral_density,
)

D, TAU = 2.0, 0.5
OU_SPEC = NoiseSpec(Channel.AMPLITUDE, OU(D, TAU))


def test_ou_correlation_values():
    assert correlation(OU_SPEC, 0.0) == D / (2 * TAU)
    assert correlation(OU_SPEC, TAU) == pytest.approx(D / (2 * TAU) * math.exp(-1), rel=1e-15)


def test_ou_correlation_integrates_to_half_strength():
    val, _ = integrate.quad(lambda t: correlation(OU_SPEC, t), 0, np.inf, epsrel=1e-12)
    assert val == pytest.approx(D / 2, rel=1e-10)


def test_white_pointwise_is_error():
    with pytest.raises(TypeError):
        correlation(NoiseSpec(Channel.ACCORDION, White(1.0)), 0.1)


def test_invalid_models():
    with pytest.raises(ValueError):
        OU(1.0, 0.0)
    with pytest.raises(ValueError):
        White(-1.0)
    with pytest.raises(ValueError):
        correlation(OU_SPEC, -1.0)


def test_white_spectrum_is_flat():
    spec = NoiseSpec(Channel.ACCORDION, White(D))
    for w in (0.0, 1.0, 1e6):
        assert spectral_density(spec, w) == pytest.approx(D / (2 * math.pi), rel=1e-15)


@pytest.mark.parametrize("omega", [0.0, 0.7, 3.0, 25.0])
def test_ou_spectrum_against_quadrature(omega):
    numeric, _ = integrate.quad(lambda t: correlation(OU_SPEC, t), 0, np.inf, weight="cos", wvar=omega) \
        if omega else integrate.quad(lambda t: correlation(OU_SPEC, t), 0, np.inf)
    assert spectral_density(OU_SPEC, omega) == pytest.approx(numeric / math.pi, rel=1e-9)
    assert spectral_density(OU_SPEC, omega) == pytest.approx(D / (2 * math.pi) / (1 + (omega * TAU) ** 2), rel=1e-14)


def test_ou_spectrum_white_limit():
    white = spectral_density(NoiseSpec(Channel.AMPLITUDE, White(D)), 5.0)
    values = [spectral_density(NoiseSpec(Channel.AMPLITUDE, OU(D, tau)), 5.0) for tau in (1e-2, 1e-4, 1e-6)]
    errors = [abs(v - white) for v in values]
    assert errors[0] > errors[1] > errors[2]
    assert values[-1] == pytest.approx(white, rel=1e-10)


def test_position_spectrum_needs_wavenumber():
    spec = NoiseSpec(Channel.POSITION, OU(D, TAU))
    with pytest.raises(ValueError):
        spectral_density(spec, 1.0)
    k = 7.0
    assert spectral_density(spec, 1.0, k) == pytest.approx(spectral_density(OU_SPEC, 1.0) / k**2, rel=1e-15)


def test_tabulated_spectrum_matches_ou():
    t = np.linspace(0, 40 * TAU, 40001)
    tab = Tabulated(t, D / (2 * TAU) * np.exp(-t / TAU))
    spec = NoiseSpec(Channel.AMPLITUDE, tab)
    for w in (0.0, 2.0):
        assert spectral_density(spec, w) == pytest.approx(spectral_density(OU_SPEC, w), rel=1e-6)


def test_tabulated_interpolation_and_range():
    tab = Tabulated([0.0, 1.0, 2.0], [2.0, 1.0, 0.0])
    spec = NoiseSpec(Channel.ACCORDION, tab)
    assert correlation(spec, 0.5) == pytest.approx(1.5)
    with pytest.raises(ValueError):
        correlation(spec, 2.5)
    with pytest.raises(ValueError):
        Tabulated([0.0, 2.0, 1.0], [1.0, 0.5, 0.0])
    with pytest.raises(ValueError):
        Tabulated([0.1, 2.0], [1.0, 0.5])


def test_csv_round_trip(tmp_path):
    path = tmp_path / "alpha.csv"
    path.write_text("# t_seconds, alpha\n0, 1.0\n0.5, 0.5\n1.0, 0.25\n")
    tab = load_correlation_csv(path)
    np.testing.assert_array_equal(tab.t, [0.0, 0.5, 1.0])
    np.testing.assert_array_equal(tab.alpha, [1.0, 0.5, 0.25])


@pytest.mark.parametrize("text", ["t,alpha\n0,1\n1,0.5\n", "0,1,2\n1,0.5,1\n", "0,1\n# late comment\n1,0\n", "0,abc\n1,0\n"])
def test_csv_strict(tmp_path, text):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(ValueError):
        load_correlation_csv(path)


def test_zero_strength_path():
    real = sample_ou_path(NoiseSpec(Channel.ACCORDION, OU(0.0, 1.0)), 10.0, 100, 1)
    assert np.all(real.xi == 0)


def test_sampling_arguments():
    with pytest.raises(ValueError):
        sample_ou_path(OU_SPEC, 1.0, 1, 0)
    with pytest.raises(ValueError):
        sample_ou_path(OU_SPEC, 0.0, 10, 0)
    with pytest.raises(ValueError):
        sample_ou_path(NoiseSpec(Channel.ACCORDION, White(1.0)), 1.0, 10, 0)
    with pytest.raises(ValueError):
        sample_ou_path(OU_SPEC, 1.0, 10, -1)


def test_grid_and_reproducibility():
    a = sample_ou_path(OU_SPEC, 2.0, 200, 99)
    b = sample_ou_path(OU_SPEC, 2.0, 200, 99)
    assert a.xi.tobytes() == b.xi.tobytes()
    assert a.times.size == 201 and a.dt == pytest.approx(0.01)
    assert np.all(np.diff(a.times) > 0)
    assert not np.array_equal(a.xi, sample_ou_path(OU_SPEC, 2.0, 200, 100).xi)


def test_stream_splitting_is_order_independent():
    seed = 0xDEADBEEF
    forward = sample_ou_paths(OU_SPEC, 1.0, 50, seed, range(8))
    backward = sample_ou_paths(OU_SPEC, 1.0, 50, seed, reversed(range(8)))[::-1]
    assert forward.tobytes() == backward.tobytes()
    single = sample_ou_path(OU_SPEC, 1.0, 50, seed ^ 5).xi
    assert single.tobytes() == forward[5].tobytes()


@pytest.fixture(scope="module")
def many_paths():
    # dt = tau / 10 over 5 tau
    return sample_ou_paths(OU_SPEC, 5 * TAU, 50, 12345, range(100_000))


def test_sample_mean_is_zero(many_paths):
    for j in (0, 10, 50):
        col = many_paths[:, j]
        assert abs(col.mean()) < 4 * col.std(ddof=1) / math.sqrt(col.size)


@pytest.mark.parametrize("lag", [0, 10, 30])
@pytest.mark.parametrize("start", [0, 20])
def test_sample_covariance(many_paths, start, lag):
    # lag 10 = tau, lag 30 = 3 tau; independence of start checks stationarity
    prod = many_paths[:, start] * many_paths[:, start + lag]
    expected = D / (2 * TAU) * math.exp(-lag * 0.1)
    se = prod.std(ddof=1) / math.sqrt(prod.size)
    assert abs(prod.mean() - expected) < 4 * se
