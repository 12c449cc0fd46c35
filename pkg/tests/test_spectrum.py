import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import j0, j1

from nested_mzi.network import PHASE_COEFFICIENTS, ConfigurationError, InterferometerConfig, Mode, build_network
from nested_mzi.spectrum import (
    DiscreteMixture,
    PointMass,
    RangeError,
    Thermal,
    TimeSeries,
    analytic_lines,
    check_sampling,
    classical_mixture_spectrum,
    peak_report,
    psd,
    quantum_psd_lines,
    sample_detector,
)

RATE, DURATION = 1024.0, 64.0


def spectrum_of(setup, mode="paper-literal", cfg=None, alpha=1.0):
    cfg = cfg or InterferometerConfig.default()
    net = build_network(setup, cfg, mode)
    return psd(sample_detector(net, alpha, DURATION, RATE), exclude_freqs=list(cfg.freqs.values())), cfg


@pytest.fixture(scope="module")
def s1():
    return spectrum_of(1)


@pytest.fixture(scope="module")
def s2():
    return spectrum_of(2)


def test_constant_series_all_power_at_dc():
    sp = psd(TimeSeries(np.full(4096, 0.5 + 0.5j), RATE))
    assert sp.line_power(0.0) == pytest.approx(0.5, rel=1e-12)
    k = sp.nearest_bin(0.0)
    mask = np.ones(len(sp.power), bool)
    mask[k - 1: k + 2] = False
    assert np.max(sp.power[mask]) < 1e-25


def test_jacobi_anger_sideband_ratio():
    m, f = 0.01, 50.0
    t = np.arange(65536) / RATE
    sp = psd(TimeSeries(np.exp(1j * m * np.sin(2 * np.pi * f * t)), RATE))
    ratio = sp.line_power(f) / sp.line_power(0.0)
    assert ratio == pytest.approx(j1(m) ** 2 / j0(m) ** 2, rel=1e-6)
    assert ratio == pytest.approx((m / 2) ** 2, rel=0.05)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([1024, 3000, 8192]))
def test_parseval(seed, n):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=n) + 1j * rng.normal(size=n)
    sp = psd(TimeSeries(x, 256.0))
    assert sp.total_power() == pytest.approx(np.mean(np.abs(x) ** 2), rel=1e-6)


def test_psd_needs_enough_samples():
    with pytest.raises(ConfigurationError):
        psd(TimeSeries(np.ones(100), RATE))
    with pytest.raises(ValueError):
        psd(TimeSeries(np.ones(2048), RATE), window="boxcar")


def test_setup1_detector_phase_has_five_tones():
    cfg = InterferometerConfig.default()
    t = np.arange(8192) / RATE
    h = sample_detector(build_network(1, cfg), 1.0, 8.0, RATE).samples[: len(t)]
    phase = np.unwrap(np.angle(h))
    expected = sum(c * cfg.mirror(k).modulation(t) for k, c in PHASE_COEFFICIENTS[1].items())
    resid = phase - expected
    np.testing.assert_allclose(resid - resid[0], 0, atol=1e-12)
    # the derivative carries every mirror frequency
    spec = np.abs(np.fft.rfft(np.diff(phase)))
    freqs = np.fft.rfftfreq(len(phase) - 1, 1 / RATE)
    for f in cfg.freqs.values():
        k = np.argmin(np.abs(freqs - f))
        assert spec[k] > 1e3 * np.median(spec)


def test_setup1_all_present(s1):
    sp, cfg = s1
    assert peak_report(sp, cfg.freqs).present == {"A", "B", "C", "E", "F"}


def test_setup2_only_inner_mirrors(s2):
    sp, cfg = s2
    table = peak_report(sp, cfg.freqs)
    assert table.present == {"A", "B", "C"}
    assert table["E"].prominence_db < 20 and table["F"].prominence_db < 20


def test_zero_modulation_none_present():
    sp, cfg = spectrum_of(1, cfg=InterferometerConfig.default(psi0=0.0))
    assert peak_report(sp, cfg.freqs).present == frozenset()


def test_setup1_ratios_match_bessel_weights(s1):
    sp, cfg = s1
    lines = analytic_lines(1, cfg)
    for k, f in cfg.freqs.items():
        assert sp.line_power(f) == pytest.approx(lines.weight_at(f).real, rel=0.01)
    a = sp.line_power(cfg.freqs["A"])
    for k in "CEF":
        assert sp.line_power(cfg.freqs[k]) / a == pytest.approx(4.0, rel=0.1)


def test_setup2_equal_peaks(s2):
    sp, cfg = s2
    p = [sp.line_power(cfg.freqs[k]) for k in "ABC"]
    assert max(p) / min(p) - 1 < 0.05
    assert p[0] == pytest.approx(analytic_lines(2, cfg).weight_at(cfg.freqs["A"]).real, rel=0.01)


def test_hermitian_symmetry(s1):
    sp, cfg = s1
    for f in cfg.freqs.values():
        assert sp.line_power(-f) == pytest.approx(sp.line_power(f), rel=1e-6)


@pytest.mark.parametrize("c", [0.5, 2.0, 3.0])
def test_scaling_is_quadratic(s1, c):
    sp, cfg = s1
    scaled, _ = spectrum_of(1, cfg=cfg, alpha=c)
    if c in (0.5, 2.0):
        # powers of two scale without rounding
        assert np.array_equal(scaled.power, c**2 * sp.power)
    else:
        np.testing.assert_allclose(scaled.power, c**2 * sp.power, rtol=0, atol=1e-13 * c**2 * sp.power.max())
    assert np.argmax(scaled.power) == np.argmax(sp.power)
    assert peak_report(scaled, cfg.freqs).present == peak_report(sp, cfg.freqs).present


def test_analytic_lines_setup2_has_no_outer_mirrors():
    cfg = InterferometerConfig.default()
    lines = analytic_lines(2, cfg)
    assert lines.weight_at(cfg.freqs["E"]) == 0 and lines.weight_at(cfg.freqs["F"]) == 0
    assert {ln.label for ln in lines} == {"A", "B", "C"}
    assert len(analytic_lines(1, cfg)) == 10


def test_analytic_lines_range():
    with pytest.raises(RangeError):
        analytic_lines(1, InterferometerConfig.default(psi0=0.2))


def test_quantum_lines_vacuum():
    lines = quantum_psd_lines(0, 2.0, 0.5)
    assert len(lines) == 1
    (ln,) = lines
    assert ln.freq == 2.0 and ln.weight == pytest.approx(2 * np.pi * 0.25)


def test_quantum_lines_real_alpha():
    k = 2 * np.pi * 0.3**2
    lines = quantum_psd_lines(1.0, 5.0, 0.3)
    assert [ln.freq for ln in lines] == [5.0, -5.0, -5.0, 5.0]
    np.testing.assert_allclose([ln.weight for ln in lines], np.array([1, 1, 1, 2]) * k)


@given(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False))
def test_quantum_line_asymmetry(a):
    x = 0.7
    k = 2 * np.pi * x**2
    lines = quantum_psd_lines(a, 1.0, x)
    diff = lines.weight_at(1.0) - lines.weight_at(-1.0)
    assert diff == pytest.approx(k * (1 + a**2 - np.conj(a) ** 2), abs=1e-9)


def test_quantum_lines_validation():
    with pytest.raises(ValueError):
        quantum_psd_lines(1.0, 1.0, 0.0)


def test_sampling_checks():
    with pytest.raises(ConfigurationError, match="rate"):
        check_sampling([31.0, 47.75], 64.0, 500.0)
    with pytest.raises(ConfigurationError, match="increase duration"):
        check_sampling([31.0, 37.0, 41.0, 43.25, 47.75], 2.0, 1024.0)
    with pytest.raises(ConfigurationError, match="distinct"):
        check_sampling([31.0, 31.0], 64.0, 1024.0)


def test_peak_report_resolution():
    sp = psd(TimeSeries(np.ones(1024), 1024.0))
    with pytest.raises(ConfigurationError):
        peak_report(sp, {"A": 31.0, "B": 31.5})


def test_point_mass_equals_single(s2):
    sp, cfg = s2
    net = build_network(2, cfg)
    mix = classical_mixture_spectrum(PointMass(1.0), net, n_draws=10, duration=DURATION, rate=RATE)
    np.testing.assert_allclose(mix.spectrum.power, sp.power, rtol=1e-12)


@pytest.mark.parametrize("setup", [1, 2])
def test_thermal_mixture_keeps_membership(setup):
    cfg = InterferometerConfig.default()
    net = build_network(setup, cfg)
    mix = classical_mixture_spectrum(Thermal(1.0), net, n_draws=1000, seed=3, duration=DURATION, rate=RATE)
    expected = {"A", "B", "C", "E", "F"} if setup == 1 else {"A", "B", "C"}
    assert peak_report(mix.spectrum, cfg.freqs).present == expected


def test_thermal_mean_photon_number():
    draws = Thermal(1.0).draw(10_000, np.random.default_rng(0))
    assert np.mean(np.abs(draws) ** 2) == pytest.approx(1.0, rel=0.05)


def test_mixture_is_seeded():
    net = build_network(1)
    a = classical_mixture_spectrum(Thermal(2.0), net, n_draws=50, seed=11, duration=DURATION, rate=RATE)
    b = classical_mixture_spectrum(Thermal(2.0), net, n_draws=50, seed=11, duration=DURATION, rate=RATE)
    assert np.array_equal(a.draws, b.draws) and np.array_equal(a.spectrum.power, b.spectrum.power)


def test_discrete_mixture():
    mix = DiscreteMixture((1.0, 2j), (0.25, 0.75))
    d = mix.draw(20_000, np.random.default_rng(0))
    assert set(np.unique(d)) <= {1.0, 2j}
    assert np.mean(np.abs(d) ** 2) == pytest.approx(0.25 + 3.0, rel=0.02)


@pytest.mark.parametrize("weights", [(0.5, 0.6), (-0.1, 1.1), (1.0,)])
def test_discrete_mixture_rejects_bad_weights(weights):
    with pytest.raises(ValueError):
        DiscreteMixture((1.0, 2.0), weights)


def test_thermal_rejects_nonpositive():
    with pytest.raises(ValueError):
        Thermal(0.0)
