"""End-to-end recipes shared by the command line and the test suite.

These functions wire the modules together for the reference
configuration: monocycle generation, mask fitting, the autocorrelation
program, tap recovery, pulse assembly, orthogonalization, and analysis
summaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import defaults
from .errors import ConfigurationError
from .lowdin import (
    OrthogonalFamily,
    approx_lowdin_family,
    gram,
    lowdin_family,
    orthonormal_generator,
    riesz_bounds,
    strang_circulant,
)
from .optimizer import (
    AutocorrVector,
    FilterTaps,
    LpSolution,
    passband_weights,
    solve_autocorr_lp,
    spectral_factorize,
)
from .signals import (
    SampledPulse,
    autocorr_samples,
    autocorr_span,
    gaussian_monocycle,
    semi_discrete_convolve,
    spectrum,
)
from .spectral import (
    CosinePoly,
    SpectralMask,
    fcc_indoor_mask,
    fit_mask_polynomials,
    max_compliant_scale,
    nesp,
)


def band_spectrum(p: SampledPulse, mask: SpectralMask):
    """Spectrum on a grid dense enough for sup-norm work on the mask band."""
    from .spectral import SUP_GRID_POINTS

    need = SUP_GRID_POINTS / (mask.f_top * p.dt)
    nfft = 1 << int(math.ceil(math.log2(max(need, p.grid.size, 2))))
    return spectrum(p, nfft)


def segment_bounds(mask: SpectralMask) -> list[tuple[float, float]]:
    """Active interval of each fitted ceiling (all-but-last extend to zero)."""
    out = []
    for i, (f_lo, f_hi, _) in enumerate(mask.segments):
        if i == len(mask.segments) - 1:
            out.append((f_lo, f_hi))
        else:
            out.append((0.0, f_hi))
    return out


@dataclass(frozen=True)
class DesignResult:
    monocycle: SampledPulse
    taps: FilterTaps
    pulse: SampledPulse  # unit energy, centered
    solution: LpSolution
    gammas: list[CosinePoly]
    mask: SpectralMask
    nesp_value: float


def design_pulse(
    order: int = defaults.FIR_ORDER,
    fc: float = defaults.CENTER_FREQ,
    monocycle_clocks: int = defaults.MONOCYCLE_CLOCKS,
    samples_per_clock: int = defaults.SAMPLES_PER_CLOCK,
    mask: SpectralMask | None = None,
    grid_density: int = 512,
) -> DesignResult:
    """Mask-constrained shaping of the windowed monocycle.

    Order 1 degenerates to the identity filter: the output pulse is the
    monocycle itself.
    """
    if mask is None:
        mask = fcc_indoor_mask()
    clock = mask.clock
    from .signals import TimeGrid

    half = monocycle_clocks * samples_per_clock // 2
    grid = TimeGrid(clock / samples_per_clock, half, 2 * half + 1)
    q = gaussian_monocycle(fc, monocycle_clocks * clock, grid)
    q_spec = band_spectrum(q, mask)
    gammas = fit_mask_polynomials(mask, q_spec, order, density=grid_density, pulse=q)
    weights = passband_weights(q_spec, mask.passband, order, clock, pulse=q)
    solution = solve_autocorr_lp(
        weights,
        gammas,
        grid_density=grid_density,
        segments=segment_bounds(mask),
        band_top=mask.f_top,
    )
    taps = spectral_factorize(solution.autocorr)
    pulse = semi_discrete_convolve(q, taps.taps, clock).normalized()
    p_spec = band_spectrum(pulse, mask)
    alpha = max_compliant_scale(p_spec, mask)
    scaled = type(p_spec)(p_spec.freqs, p_spec.values * alpha)
    return DesignResult(
        monocycle=q,
        taps=taps,
        pulse=pulse,
        solution=solution,
        gammas=gammas,
        mask=mask,
        nesp_value=nesp(scaled, mask),
    )


def shift_from_ratio(pulse: SampledPulse, k_ratio: int) -> float:
    """Shift T = Tp / K, validated against the grid."""
    if k_ratio < 1:
        raise ConfigurationError("shift ratio must be a positive integer")
    duration = pulse.duration()
    shift = duration / k_ratio
    steps = shift / pulse.dt
    if abs(steps - round(steps)) > 1e-6:
        raise ConfigurationError(
            f"shift Tp/{k_ratio} is not a whole number of grid steps"
        )
    return round(steps) * pulse.dt


def build_family(
    pulse: SampledPulse, k_ratio: int, m_multiple: int = 2, kind: str = "lo"
) -> tuple[OrthogonalFamily | None, SampledPulse, dict]:
    """Family (or limit pulse) plus a stability report.

    Returns (family, centered_pulse, report); family is None for kind
    "limit".  The report carries the stability bounds, the family's worst
    off-diagonal inner product (translate correlation defect for the
    limit pulse), and the weak-norm gap between the Toeplitz Gram and its
    circulant wrap at the family dimension.
    """
    shift = shift_from_ratio(pulse, k_ratio)
    m_half = m_multiple * k_ratio
    a, b = riesz_bounds(pulse, shift)
    gm = gram(pulse, shift, m_half)
    circ = strang_circulant(gm)
    diff = circ.dense() - gm.dense()
    weak = float(np.sqrt(np.mean(np.linalg.eigvalsh(diff) ** 2)))
    if kind == "lo":
        family = lowdin_family(pulse, shift, m_half)
        centered = family.centered()
        offdiag = family.max_offdiagonal()
    elif kind == "alo":
        family = approx_lowdin_family(pulse, shift, m_half)
        centered = family.centered()
        offdiag = family.max_offdiagonal()
    elif kind == "limit":
        family = None
        centered = orthonormal_generator(pulse, shift).pulse
        r = autocorr_samples(centered, shift)
        offdiag = float(np.max(np.abs(r[1:]))) if len(r) > 1 else 0.0
    else:
        raise ConfigurationError("kind must be lo, alo, or limit")
    report = {
        "A": a,
        "B": b,
        "offdiag_max": offdiag,
        "weak_norm_gap": weak,
        "shift_seconds": shift,
        "m_half": m_half,
    }
    return family, centered, report


def analyze_pulse(
    pulse: SampledPulse, mask: SpectralMask | None = None, shift: float | None = None
) -> dict:
    """Summary report: energy, duration, spectral efficiency, stability."""
    if mask is None:
        mask = fcc_indoor_mask()
    if shift is None:
        shift = pulse.duration() / 2
        steps = round(shift / pulse.dt)
        shift = steps * pulse.dt
    spec = band_spectrum(pulse, mask)
    alpha = max_compliant_scale(spec, mask)
    scaled = type(spec)(spec.freqs, spec.values * alpha)
    a, b = riesz_bounds(pulse, shift)
    r = autocorr_samples(pulse, shift, autocorr_span(pulse, shift))
    return {
        "energy": pulse.energy(),
        "Tp": pulse.duration(),
        "nesp": nesp(scaled, mask),
        "alpha_star": alpha,
        "A": a,
        "B": b,
        "shift_seconds": shift,
        "autocorr_samples": [float(x) for x in (r / r[0])],
    }
