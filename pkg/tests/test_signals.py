"""Pulse, spectrum, autocorrelation, folded spectrum, and Zak transform."""

import numpy as np
import pytest

import uwbpulse as up
from uwbpulse import defaults
from uwbpulse.errors import (
    ConfigurationError,
    GridAlignmentError,
    ResolutionError,
)
from uwbpulse.signals import (
    SampledPulse,
    TimeGrid,
    autocorr_samples,
    dtft_power,
    monocycle_sigma,
    semi_discrete_convolve,
    shift_samples,
)

T0 = defaults.CLOCK_T0
TQ = defaults.MONOCYCLE_CLOCKS * T0
FC = defaults.CENTER_FREQ


# ---------------------------------------------------------------- monocycle


def test_monocycle_window_energy_capture():
    # oracle: fine quadrature of the raw monocycle inside/outside the window
    sigma = monocycle_sigma(FC)
    dt = TQ / 4096
    t_all = np.arange(-40 * 4096, 40 * 4096 + 1) * dt
    raw = t_all * np.exp(-(t_all**2) / sigma**2)
    total = np.sum(raw**2) * dt
    inside = np.sum(raw[np.abs(t_all) <= TQ / 2] ** 2) * dt
    assert inside / total >= 0.9999


def test_monocycle_zero_at_origin():
    for Tq in (TQ, 2.5 * TQ):
        q = up.gaussian_monocycle(FC, Tq)
        assert q.value_at(0.0) == 0.0


def test_monocycle_peak_frequency_closed_form():
    # oracle: FFT argmax of the raw (pre-window) monocycle equals fc to
    # within one bin, validating sigma = 1/(sqrt(2) pi fc)
    sigma = monocycle_sigma(FC)
    dt = T0 / 32
    half = 40 * 32
    t = np.arange(-half, half + 1) * dt
    raw = t * np.exp(-(t**2) / sigma**2)
    nfft = 2**20
    mag = np.abs(np.fft.rfft(raw, nfft))
    freqs = np.fft.rfftfreq(nfft, dt)
    peak = freqs[np.argmax(mag)]
    assert abs(peak - FC) <= freqs[1]


def test_monocycle_unit_energy_and_support(monocycle):
    assert monocycle.energy() == pytest.approx(1.0, abs=1e-12)
    assert monocycle.support == (-TQ / 2, TQ / 2)
    t = monocycle.times()
    assert np.all(monocycle.samples[np.abs(t) > TQ / 2 + 1e-15] == 0.0)


def test_monocycle_hann_window_variant():
    q = up.gaussian_monocycle(FC, TQ, window="hann")
    assert q.energy() == pytest.approx(1.0, abs=1e-12)
    assert q.value_at(-TQ / 2) == 0.0


def test_monocycle_resolution_error():
    grid = TimeGrid(TQ / 8, 4, 9)
    with pytest.raises(ResolutionError):
        up.gaussian_monocycle(FC, TQ, grid)


# ----------------------------------------------------------- autocorrelation


def test_autocorr_unit_energy_at_zero(monocycle):
    r = up.autocorrelation(monocycle)
    assert r.value_at(0.0) == pytest.approx(1.0, rel=1e-12)


def test_autocorr_support(pulse25):
    r = up.autocorrelation(pulse25)
    tp = pulse25.duration()
    t = r.times()
    assert np.all(r.samples[np.abs(t) > tp + 1e-15] == 0.0)
    assert r.support == (-tp, tp)


def test_autocorr_exactly_even(pulse25):
    r = up.autocorrelation(pulse25)
    assert np.array_equal(r.samples, r.samples[::-1])


def test_autocorr_matches_direct_quadrature(pulse25):
    # oracle: direct shifted-sum quadrature of the integral definition
    shift = pulse25.duration() / 2  # T = Tp/K with K = 2
    s = shift_samples(pulse25, shift)
    got = autocorr_samples(pulse25, shift)
    x = pulse25.samples
    for m in range(len(got)):
        direct = 0.0
        for j in range(m * s, len(x)):
            direct += x[j] * x[j - m * s]
        direct *= pulse25.dt
        assert got[m] == pytest.approx(direct, rel=1e-10, abs=1e-14)


# ------------------------------------------------------------------ spectrum


def test_spectrum_dirac_like_flat():
    grid = TimeGrid(1e-11, 2, 5)
    samples = np.zeros(5)
    samples[2] = 1.0 / grid.dt
    p = SampledPulse(grid, samples)
    s = up.spectrum(p, 16)
    assert np.allclose(np.abs(s.values), 1.0, atol=1e-12)


def test_spectrum_hermitian_symmetry(monocycle):
    s = up.spectrum(monocycle, 2**10)
    # frequency grid is symmetric except the leftmost (unpaired) bin
    n = len(s.freqs)
    pos = s.values[n // 2 + 1 :]
    neg = s.values[1 : n // 2][::-1]
    assert np.allclose(neg, np.conj(pos), atol=1e-15)


def test_spectrum_parseval(monocycle, pulse25):
    for p in (monocycle, pulse25):
        s = up.spectrum(p, 2**12)
        e_freq = np.sum(np.abs(s.values) ** 2) * s.df
        assert e_freq == pytest.approx(p.energy(), rel=1e-9)


def test_spectrum_rejects_bad_nfft(monocycle):
    with pytest.raises(ConfigurationError):
        up.spectrum(monocycle, 100)  # not a power of two
    with pytest.raises(ConfigurationError):
        up.spectrum(monocycle, 64)  # shorter than the pulse


def test_spectrum_peak_matches_monocycle(monocycle):
    s = up.spectrum(monocycle, 2**16)
    sel = s.freqs > 0
    peak = s.freqs[sel][np.argmax(np.abs(s.values[sel]))]
    # the window moves the peak; it must stay in the passband
    assert 3.1e9 < peak < 10.6e9


def test_dtft_matches_fft_grid(monocycle):
    s = up.spectrum(monocycle, 2**12)
    probe = s.freqs[
        np.searchsorted(s.freqs, [0.0, 2e9, 6.85e9, 13.9e9])
    ]
    exact = dtft_power(monocycle, probe)
    assert np.allclose(exact, s.power_at(probe), rtol=1e-12, atol=1e-30)


# -------------------------------------------------------------- gram symbol


def test_gram_symbol_nonoverlapping_is_one(monocycle):
    vals = up.gram_symbol(monocycle, TQ + 4 * monocycle.dt, np.linspace(0, 1, 64))
    assert np.allclose(vals, 1.0, atol=1e-12)


def test_gram_symbol_matches_riesz_extrema(pulse25):
    shift = pulse25.duration() / 2
    a, b = up.riesz_bounds(pulse25, shift)
    nu = np.linspace(0, 1, 8192)
    vals = np.asarray(up.gram_symbol(pulse25, shift, nu))
    assert vals.min() == pytest.approx(a, rel=1e-6)
    assert vals.max() == pytest.approx(b, rel=1e-6)


def test_gram_symbol_nonnegative_and_sum(pulse25):
    shift = pulse25.duration() / 3
    r = autocorr_samples(pulse25, shift)
    val0 = up.gram_symbol(pulse25, shift, 0.0)
    assert val0 == pytest.approx(r[0] + 2 * np.sum(r[1:]), rel=1e-12)
    assert val0 >= 0.0
    nu = np.linspace(0, 1, 4096)
    assert np.min(np.asarray(up.gram_symbol(pulse25, shift, nu))) >= -1e-9


def test_gram_symbol_lipschitz_first_differences(pulse25):
    shift = pulse25.duration() / 4
    r = autocorr_samples(pulse25, shift)
    lip = 4.0 * np.pi * np.sum(np.arange(1, len(r)) * np.abs(r[1:]))
    nu = np.linspace(0.0, 1.0, 4096)
    vals = np.asarray(up.gram_symbol(pulse25, shift, nu))
    dnu = nu[1] - nu[0]
    assert np.max(np.abs(np.diff(vals))) <= lip * dnu * (1 + 1e-9)


# ------------------------------------------------------------------ zak


def test_zak_nu_zero_is_periodization(pulse25):
    shift = pulse25.duration() / 5
    s = shift_samples(pulse25, shift)
    t = 3 * pulse25.dt
    k0 = pulse25.grid.index_of(t)
    direct = sum(
        pulse25.samples[k0 - n * s]
        for n in range(-pulse25.grid.size // s - 1, pulse25.grid.size // s + 2)
        if 0 <= k0 - n * s < pulse25.grid.size
    )
    z = up.zak_transform(pulse25, shift, t, 0.0)
    assert z.imag == pytest.approx(0.0, abs=1e-15)
    assert z.real == pytest.approx(direct, rel=1e-12)


def test_zak_quasi_periodicity(pulse25):
    # shifting the pulse by k slots multiplies the transform by a phase
    shift = pulse25.duration() / 2
    s = shift_samples(pulse25, shift)
    rng = np.random.default_rng(42)
    for _ in range(100):
        k = int(rng.integers(-3, 4))
        t = int(rng.integers(-2 * s, 2 * s)) * pulse25.dt
        nu = float(rng.uniform(0, 1))
        grid = TimeGrid(pulse25.dt, pulse25.grid.n0 - k * s, pulse25.grid.size)
        shifted = SampledPulse(
            grid,
            pulse25.samples,
            (pulse25.support[0] + k * shift, pulse25.support[1] + k * shift),
        )
        lhs = up.zak_transform(shifted, shift, t, nu)
        rhs = np.exp(-2j * np.pi * nu * k) * up.zak_transform(pulse25, shift, t, nu)
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-12)


def test_zak_of_autocorr_matches_circulant_eigenvalues(pulse25):
    shift = pulse25.duration() / 2
    m_half = 4
    gm = up.gram(pulse25, shift, m_half)
    lam = up.strang_circulant(gm).eigenvalues()
    r = up.autocorrelation(pulse25)
    n = gm.size
    for l in range(n):
        z = up.zak_transform(r, shift, 0.0, l / n)
        assert z.imag == pytest.approx(0.0, abs=1e-12)
        assert z.real == pytest.approx(lam[l], rel=1e-12, abs=1e-12)


def test_zak_rejects_off_grid_time(pulse25):
    shift = pulse25.duration() / 2
    with pytest.raises(GridAlignmentError):
        up.zak_transform(pulse25, shift, 0.4999 * pulse25.dt, 0.0)


# ------------------------------------------------- quadrature and file I/O


def test_quadrature_consistency_on_refined_grid(design25):
    # the bundled pulses are analytic in their taps: rebuild both at twice
    # the resolution and compare inner products
    taps = design25.taps
    q32 = up.gaussian_monocycle(FC, TQ)
    p32 = semi_discrete_convolve(q32, taps.taps, taps.clock).normalized()
    grid64 = TimeGrid(q32.dt / 2, q32.grid.n0 * 2, (q32.grid.size - 1) * 2 + 1)
    q64 = up.gaussian_monocycle(FC, TQ, grid64)
    p64 = semi_discrete_convolve(q64, taps.taps, taps.clock).normalized()
    ref = up.inner(p64, q64)
    got = up.inner(p32, q32)
    assert got == pytest.approx(ref, rel=1e-6)
    assert up.inner(p32, p32) == pytest.approx(up.inner(p64, p64), rel=1e-6)


def test_pulse_csv_roundtrip(tmp_path, monocycle):
    path = tmp_path / "q.csv"
    up.save_pulse_csv(path, monocycle)
    back = up.load_pulse_csv(path)
    assert back.grid.dt == pytest.approx(monocycle.dt, rel=1e-12)
    assert back.grid.n0 == monocycle.grid.n0
    assert np.allclose(back.samples, monocycle.samples, rtol=0, atol=0)


def test_pulse_csv_rejects_nonuniform(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("t_seconds,amplitude\n0,1\n1e-10,2\n3e-10,1\n")
    with pytest.raises(ConfigurationError):
        up.load_pulse_csv(path)


def test_pulse_csv_parse_error_reports_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("t_seconds,amplitude\n0,1\nnot_a_number,2\n")
    with pytest.raises(ConfigurationError, match="line 3"):
        up.load_pulse_csv(path)


def test_support_invariant_enforced():
    grid = TimeGrid(1e-11, 2, 5)
    samples = np.ones(5)
    with pytest.raises(ConfigurationError):
        SampledPulse(grid, samples, (-1e-11, 1e-11))


# ----------------------------------------------------- property checks


from hypothesis import given, settings
from hypothesis import strategies as st


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.floats(-10, 10, allow_nan=False), min_size=2, max_size=64),
    st.integers(0, 63),
)
def test_pulse_csv_roundtrip_random(tmp_path_factory, samples, n0):
    n0 = min(n0, len(samples) - 1)
    grid = TimeGrid(7.3e-12, n0, len(samples))
    p = SampledPulse(grid, np.asarray(samples))
    path = tmp_path_factory.mktemp("csv") / "p.csv"
    up.save_pulse_csv(path, p)
    back = up.load_pulse_csv(path)
    assert np.array_equal(back.samples, p.samples)
    assert back.grid.n0 == p.grid.n0


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 0.45), st.integers(1, 8))
def test_autocorr_even_and_bounded_random(nu, k):
    rng = np.random.default_rng(k)
    grid = TimeGrid(1e-11, 16, 33)
    p = SampledPulse(grid, rng.normal(size=33)).normalized()
    r = up.autocorrelation(p)
    assert np.array_equal(r.samples, r.samples[::-1])
    assert np.abs(r.samples).max() <= r.value_at(0.0) * (1 + 1e-12)
