"""Pulse design and orthogonal overlapping PPM analysis for UWB impulse radio.

The package covers the full chain: mask-constrained FIR shaping of a
Gaussian monocycle, symmetric (and circulant-approximate)
orthogonalization of the shaped pulse's translates, the shift-orthonormal
limit pulse, and waveform-level link simulation with analytic error
bounds.  See the ``cli`` module or the ``uwbpulse`` entry point for the
batch interface.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigurationError,
    DivisionHazardError,
    FactorizationError,
    GridAlignmentError,
    InfeasibleError,
    MaskFitError,
    ResolutionError,
    UnboundedError,
    UnstableGeneratorError,
    UwbPulseError,
)
from .signals import (
    SampledPulse,
    Spectrum,
    TimeGrid,
    autocorrelation,
    gaussian_monocycle,
    gram_symbol,
    inner,
    load_pulse_csv,
    save_pulse_csv,
    semi_discrete_convolve,
    spectrum,
    zak_transform,
)
from .spectral import (
    CosinePoly,
    SpectralMask,
    fcc_indoor_mask,
    fit_mask_polynomials,
    load_mask_csv,
    mask_ratio,
    max_compliant_scale,
    nesp,
    psd_pam_ppm,
    psd_th_framed,
)
from .optimizer import (
    AutocorrVector,
    FilterTaps,
    passband_weights,
    reconciliation_filter_delta2,
    shift_orthogonality_defect,
    solve_autocorr_lp,
    spectral_factorize,
)
from .lowdin import (
    CirculantGram,
    OrthogonalFamily,
    ToeplitzGram,
    approx_lowdin_family,
    gram,
    gram_schmidt_family,
    inverse_sqrt_spd,
    lowdin_family,
    lowdin_optimality_probe,
    orthonormal_generator,
    riesz_bounds,
    strang_circulant,
)
from .modem import (
    LinkConfig,
    SerResult,
    add_awgn,
    bit_rate,
    modulate,
    receive_oppm,
    receive_psm,
    simulate_ser,
    uncoded_bit_rate,
    union_bound_correlated,
    union_bound_orthogonal,
)
from .pipeline import analyze_pulse, build_family, design_pulse
