"""Uniform-grid pulses: spectra, inner products, autocorrelation, Zak transform.

A pulse is a finite array of samples on a uniform grid with an integer
index marking t = 0, plus a declared compact support.  All quadrature is
the rectangle rule (samples are treated as exact point values), and all
shifts used by the orthogonalization machinery are integer numbers of
grid steps; there is no interpolation anywhere.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, GridAlignmentError, ResolutionError

_SUPPORT_EPS = 1e-9


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid t_k = (k - n0) * dt for k = 0..size-1."""

    dt: float
    n0: int
    size: int

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigurationError("grid step dt must be positive")
        if self.size <= 0:
            raise ConfigurationError("grid must contain at least one sample")

    def times(self) -> np.ndarray:
        return (np.arange(self.size) - self.n0) * self.dt

    def index_of(self, t: float) -> int:
        """Index of a grid time; raises if t is not on the grid."""
        k = t / self.dt + self.n0
        ki = int(round(k))
        if abs(k - ki) > 1e-6:
            raise GridAlignmentError(
                f"time {t!r} is {abs(k - ki):.2e} steps off the grid; "
                "use grid times"
            )
        return ki


@dataclass(frozen=True, eq=False)
class SampledPulse:
    """Real pulse samples on a grid with compact support [t_lo, t_hi].

    Samples outside the declared support are exactly zero.  Instances are
    treated as immutable values; do not write into ``samples``.
    """

    grid: TimeGrid
    samples: np.ndarray
    support: tuple[float, float] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "samples", samples)
        if samples.shape != (self.grid.size,):
            raise ConfigurationError("samples length must match the grid")
        if self.support is None:
            t = self.grid.times()
            object.__setattr__(self, "support", (float(t[0]), float(t[-1])))
        t_lo, t_hi = self.support
        if t_lo > t_hi:
            raise ConfigurationError("support interval is reversed")
        t = self.grid.times()
        outside = (t < t_lo - _SUPPORT_EPS * self.grid.dt) | (
            t > t_hi + _SUPPORT_EPS * self.grid.dt
        )
        if np.any(samples[outside] != 0.0):
            raise ConfigurationError("nonzero samples outside declared support")

    @property
    def dt(self) -> float:
        return self.grid.dt

    def times(self) -> np.ndarray:
        return self.grid.times()

    def energy(self) -> float:
        return float(np.sum(self.samples**2) * self.dt)

    def normalized(self) -> "SampledPulse":
        e = self.energy()
        if e <= 0.0:
            raise ConfigurationError("cannot normalize the zero pulse")
        return SampledPulse(self.grid, self.samples / math.sqrt(e), self.support)

    def value_at(self, t: float) -> float:
        """Sample value at a grid time (zero outside the stored range)."""
        k = self.grid.index_of(t)
        if 0 <= k < self.grid.size:
            return float(self.samples[k])
        return 0.0

    def duration(self) -> float:
        return self.support[1] - self.support[0]


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Continuous-time Fourier transform samples on a uniform frequency grid."""

    freqs: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "freqs", np.asarray(self.freqs, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))
        if self.freqs.shape != self.values.shape:
            raise ConfigurationError("freqs and values must have the same shape")

    @property
    def df(self) -> float:
        return float(self.freqs[1] - self.freqs[0])

    def power(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def power_at(self, f) -> np.ndarray:
        """Interpolated |p^(f)|^2; grid must be dense enough for the caller."""
        return np.interp(f, self.freqs, self.power())


def inner(p: SampledPulse, q: SampledPulse) -> float:
    """Rectangle-rule L2 inner product of two pulses on matching grids."""
    if abs(p.dt - q.dt) > 1e-15 * p.dt:
        raise GridAlignmentError("inner product requires identical grid steps")
    # align global indices k - n0
    lo = max(-p.grid.n0, -q.grid.n0)
    hi = min(p.grid.size - p.grid.n0, q.grid.size - q.grid.n0)
    if hi <= lo:
        return 0.0
    a = p.samples[lo + p.grid.n0 : hi + p.grid.n0]
    b = q.samples[lo + q.grid.n0 : hi + q.grid.n0]
    return float(np.dot(a, b) * p.dt)


def triangle_window(t: np.ndarray, width: float) -> np.ndarray:
    """Unit triangle on [-width/2, width/2]."""
    return np.clip(1.0 - np.abs(t) / (width / 2.0), 0.0, None)


def hann_window(t: np.ndarray, width: float) -> np.ndarray:
    """Hann window on [-width/2, width/2]."""
    w = 0.5 * (1.0 + np.cos(2.0 * np.pi * t / width))
    return np.where(np.abs(t) <= width / 2.0, w, 0.0)


_WINDOWS = {"triangle": triangle_window, "hann": hann_window}


def monocycle_sigma(fc: float) -> float:
    """Width parameter placing the monocycle's spectral peak at fc.

    For t*exp(-t^2/sigma^2) the transform magnitude is proportional to
    nu*exp(-(pi*sigma*nu)^2), maximal at nu = 1/(sqrt(2)*pi*sigma).
    """
    return 1.0 / (math.sqrt(2.0) * math.pi * fc)


def gaussian_monocycle(
    fc: float,
    Tq: float,
    grid: TimeGrid | None = None,
    window: str = "triangle",
) -> SampledPulse:
    """Windowed Gaussian monocycle, unit energy, support [-Tq/2, Tq/2].

    The raw monocycle t*exp(-t^2/sigma^2) has its spectral-magnitude peak
    at fc; the window (triangle by default, "hann" as alternative) makes
    the pulse continuous and strictly time-limited.
    """
    if fc <= 0 or Tq <= 0:
        raise ConfigurationError("fc and Tq must be positive")
    if grid is None:
        half = 96  # 192 samples across Tq
        grid = TimeGrid(dt=Tq / (2 * half), n0=half, size=2 * half + 1)
    t = grid.times()
    if t[0] > -Tq / 2 + _SUPPORT_EPS * grid.dt or t[-1] < Tq / 2 - _SUPPORT_EPS * grid.dt:
        raise ConfigurationError("grid does not span [-Tq/2, Tq/2]")
    if Tq / grid.dt < 16:
        raise ResolutionError("fewer than 16 samples across the monocycle window")
    try:
        win = _WINDOWS[window]
    except KeyError:
        raise ConfigurationError(f"unknown window {window!r}") from None
    sigma = monocycle_sigma(fc)
    raw = t * np.exp(-(t**2) / sigma**2)
    samples = raw * win(t, Tq)
    pulse = SampledPulse(grid, samples, (-Tq / 2, Tq / 2))
    return pulse.normalized()


def semi_discrete_convolve(
    p: SampledPulse, taps: np.ndarray, clock: float, center: bool = True
) -> SampledPulse:
    """Filter a pulse with a tap sequence at the given clock period.

    Returns sum_k taps[k] * p(t - k*clock).  With ``center`` the output
    time origin is moved to the middle of the tap span, which keeps odd-
    order filters grid-aligned and the result centered.
    """
    taps = np.asarray(taps, dtype=float)
    step_f = clock / p.dt
    step = int(round(step_f))
    if abs(step_f - step) > 1e-9:
        raise GridAlignmentError("clock period is not a grid multiple")
    n = len(taps)
    out = np.zeros(p.grid.size + (n - 1) * step)
    for k in range(n):
        out[k * step : k * step + p.grid.size] += taps[k] * p.samples
    n0 = p.grid.n0
    if center:
        if (n - 1) * step % 2 != 0:
            raise GridAlignmentError("cannot center an even tap span on the grid")
        n0 = p.grid.n0 + (n - 1) * step // 2
    grid = TimeGrid(p.dt, n0, len(out))
    t_lo = p.support[0] - (n0 - p.grid.n0) * p.dt
    t_hi = p.support[1] + ((n - 1) * step - (n0 - p.grid.n0)) * p.dt
    return SampledPulse(grid, out, (t_lo, t_hi))


def autocorrelation(p: SampledPulse) -> SampledPulse:
    """Deterministic autocorrelation r(t) = integral p(s) p(s - t) ds.

    The result is exactly even (computed once and mirrored) with support
    twice the pulse support, and r(0) equals the pulse energy.
    """
    r = np.correlate(p.samples, p.samples, mode="full") * p.dt
    r = (r + r[::-1]) / 2.0  # bitwise-even by construction
    n = p.grid.size
    grid = TimeGrid(p.dt, n - 1, 2 * n - 1)
    half = p.duration()
    return SampledPulse(grid, r, (-half, half))


def spectrum(p: SampledPulse, nfft: int) -> Spectrum:
    """Zero-padded transform samples; freqs span [-1/2dt, 1/2dt).

    Scaled by dt and phase-referenced to the pulse's t = 0 so the values
    approximate the continuous transform at each grid frequency.
    """
    if nfft < p.grid.size:
        raise ConfigurationError("nfft must be at least the pulse length")
    if nfft & (nfft - 1):
        raise ConfigurationError("nfft must be a power of two")
    vals = np.fft.fft(p.samples, nfft) * p.dt
    freqs = np.fft.fftfreq(nfft, p.dt)
    vals *= np.exp(2j * np.pi * freqs * p.grid.n0 * p.dt)
    return Spectrum(np.fft.fftshift(freqs), np.fft.fftshift(vals))


def dtft(p: SampledPulse, freqs) -> np.ndarray:
    """Exact transform values dt * sum_k p_k exp(-2i pi f t_k) at given freqs.

    Direct evaluation, O(len(freqs) * len(p)); use for quadrature nodes
    where FFT-grid interpolation would limit accuracy.
    """
    f = np.atleast_1d(np.asarray(freqs, dtype=float))
    t = p.times()
    out = np.empty(len(f), dtype=complex)
    chunk = max(1, 2**22 // max(p.grid.size, 1))
    for i in range(0, len(f), chunk):
        phase = np.exp(-2j * np.pi * np.outer(f[i : i + chunk], t))
        out[i : i + chunk] = phase @ p.samples
    return out * p.dt


def dtft_power(p: SampledPulse, freqs) -> np.ndarray:
    """Exact |p^(f)|^2 at arbitrary frequencies."""
    return np.abs(dtft(p, freqs)) ** 2


def shift_samples(p: SampledPulse, shift: float) -> int:
    """Number of grid steps in one shift; raises if off-grid."""
    s_f = shift / p.dt
    s = int(round(s_f))
    if abs(s_f - s) > 1e-6:
        raise GridAlignmentError("shift is not an integer number of grid steps")
    if s <= 0:
        raise ConfigurationError("shift must be positive")
    return s


def autocorr_span(p: SampledPulse, shift: float) -> int:
    """Number of one-sided shifts with overlapping support: ceil(Tp/T)."""
    return int(math.ceil(p.duration() / shift - 1e-9))


def autocorr_samples(p: SampledPulse, shift: float, kmax: int | None = None) -> np.ndarray:
    """Autocorrelation sampled at multiples of the shift: r(0..kmax * T)."""
    r = autocorrelation(p)
    s = shift_samples(p, shift)
    if kmax is None:
        kmax = autocorr_span(p, shift)
    mid = r.grid.n0
    out = np.zeros(kmax + 1)
    for n in range(kmax + 1):
        i = mid + n * s
        if i < r.grid.size:
            out[n] = r.samples[i]
    return out


def gram_symbol(p: SampledPulse, shift: float, nu) -> np.ndarray | float:
    """Folded power spectrum sum_n r(n*T) exp(-2i pi n nu), real by symmetry.

    ``nu`` is in cycles per shift; the function is 1-periodic and even.
    Its range over [0, 1) gives the translate family's stability bounds,
    and its samples at l/N are the circulant approximant's eigenvalues.
    """
    nu_arr = np.atleast_1d(np.asarray(nu, dtype=float))
    r = autocorr_samples(p, shift)
    k = np.arange(1, len(r))
    vals = r[0] + 2.0 * np.cos(2.0 * np.pi * np.outer(nu_arr, k)) @ r[1:]
    if np.min(vals) < -1e-9 * max(r[0], 1e-300):
        raise ConfigurationError(
            "folded power spectrum is significantly negative; "
            "autocorrelation input looks inconsistent"
        )
    if np.isscalar(nu) or np.asarray(nu).ndim == 0:
        return float(vals[0])
    return vals


def zak_transform(p: SampledPulse, shift: float, t: float, nu: float) -> complex:
    """Zak transform sum_n p(t - n*T) exp(2i pi n nu) at a grid time t."""
    s = shift_samples(p, shift)
    k0 = p.grid.index_of(t)  # raises off-grid
    # translates with support intersecting t: p(t - nT) nonzero needs
    # 0 <= k0 - n*s < size
    n_lo = int(math.floor((k0 - (p.grid.size - 1)) / s))
    n_hi = int(math.floor(k0 / s))
    total = 0.0 + 0.0j
    for n in range(n_lo, n_hi + 1):
        idx = k0 - n * s
        if 0 <= idx < p.grid.size:
            total += p.samples[idx] * np.exp(2j * np.pi * n * nu)
    return complex(total)


def save_pulse_csv(path, p: SampledPulse) -> None:
    """Write `t_seconds,amplitude` rows with 17 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t_seconds", "amplitude"])
        for t, a in zip(p.times(), p.samples):
            w.writerow([f"{t:.17g}", f"{a:.17g}"])


def load_pulse_csv(path) -> SampledPulse:
    """Read a pulse written by :func:`save_pulse_csv`; spacing must be uniform."""
    times = []
    amps = []
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd, None)
        if header is None or [h.strip() for h in header[:2]] != ["t_seconds", "amplitude"]:
            raise ConfigurationError(f"{path}: expected header t_seconds,amplitude")
        for lineno, row in enumerate(rd, start=2):
            if not row:
                continue
            try:
                times.append(float(row[0]))
                amps.append(float(row[1]))
            except (ValueError, IndexError):
                raise ConfigurationError(f"{path}: parse error at line {lineno}") from None
    if len(times) < 2:
        raise ConfigurationError(f"{path}: fewer than two samples")
    t = np.asarray(times)
    dt = float(t[1] - t[0])
    if dt <= 0 or np.max(np.abs(np.diff(t) - dt)) > 1e-6 * dt:
        raise ConfigurationError(f"{path}: non-uniform sample spacing")
    n0 = int(round(-t[0] / dt))
    if abs(-t[0] / dt - n0) > 1e-6:
        raise ConfigurationError(f"{path}: t = 0 does not fall on the grid")
    grid = TimeGrid(dt, n0, len(t))
    return SampledPulse(grid, np.asarray(amps))
