"""Regulatory mask model, cosine-polynomial fits, effective power, PSD models.

The mask is a piecewise-constant ceiling on PSD over [0, 14] GHz.  Fits of
the mask-to-pulse ratio live in the even cosine basis
{1, 2cos(2 pi nu T0), 2cos(2 pi nu 2 T0), ...} whose span is exactly the
set of filter-autocorrelation spectra, so fitted bounds plug directly
into the filter program.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import ConfigurationError, DivisionHazardError, MaskFitError
from .signals import Spectrum

SUP_GRID_POINTS = 2**14  # grid for sup-norm style evaluations on [0, band top]
SAFETY_FACTOR = 1.0 - 1e-6  # shrink applied to compliant scalings


@dataclass(frozen=True)
class SpectralMask:
    """Piecewise-constant PSD ceiling: segments of (f_lo, f_hi, level).

    Segments must partition [0, f_top] contiguously with positive levels.
    ``passband`` marks the band whose allowed power normalizes the
    effective-power ratio.
    """

    segments: tuple[tuple[float, float, float], ...]
    passband: tuple[float, float]

    def __post_init__(self):
        if not self.segments:
            raise ConfigurationError("mask needs at least one segment")
        prev = 0.0
        for f_lo, f_hi, level in self.segments:
            if abs(f_lo - prev) > 1e-6 * max(f_hi, 1.0):
                raise ConfigurationError("mask segments must partition [0, f_top]")
            if f_hi <= f_lo:
                raise ConfigurationError("empty mask segment")
            if level <= 0:
                raise ConfigurationError("mask levels must be positive")
            prev = f_hi
        lo, hi = self.passband
        if not (0.0 <= lo < hi <= prev):
            raise ConfigurationError("passband must lie inside the mask band")

    @property
    def f_top(self) -> float:
        return self.segments[-1][1]

    @property
    def clock(self) -> float:
        """Fastest filter clock that still controls the whole band."""
        return 1.0 / (2.0 * self.f_top)

    def level_at(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        out = np.full(f.shape, self.segments[-1][2])
        for f_lo, f_hi, level in reversed(self.segments):
            out = np.where(f < f_hi, np.where(f >= f_lo, level, out), out)
        out = np.where(f >= self.segments[-1][1], self.segments[-1][2], out)
        return out

    def integrate(self, f_lo: float, f_hi: float) -> float:
        """Exact integral of the mask over [f_lo, f_hi]."""
        total = 0.0
        for a, b, level in self.segments:
            total += level * max(0.0, min(b, f_hi) - max(a, f_lo))
        return total

    def allowed_passband_power(self) -> float:
        return self.integrate(*self.passband)


def fcc_indoor_mask(path=None) -> SpectralMask:
    """Mask with edges {1.61, 1.99, 3.1, 10.6, 14} GHz and bundled levels.

    Levels come from a CSV data file (indoor EIRP limits by default) and
    can be overridden by passing a file in the same format.
    """
    if path is None:
        ref = resources.files("uwbpulse.data").joinpath("fcc_indoor.csv")
        with resources.as_file(ref) as p:
            return load_mask_csv(p)
    return load_mask_csv(path)


def load_mask_csv(path, passband=None) -> SpectralMask:
    """Read segments from `f_lo_hz,f_hi_hz,level_w_per_hz` rows."""
    rows = []
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd, None)
        if header is None or [h.strip() for h in header[:3]] != [
            "f_lo_hz",
            "f_hi_hz",
            "level_w_per_hz",
        ]:
            raise ConfigurationError(f"{path}: expected header f_lo_hz,f_hi_hz,level_w_per_hz")
        for lineno, row in enumerate(rd, start=2):
            if not row:
                continue
            try:
                rows.append((float(row[0]), float(row[1]), float(row[2])))
            except (ValueError, IndexError):
                raise ConfigurationError(f"{path}: parse error at line {lineno}") from None
    if passband is None:
        lo, hi, _ = max(rows, key=lambda r: r[2])
        passband = (lo, hi)
    return SpectralMask(tuple(rows), tuple(passband))


def save_mask_csv(path, mask: SpectralMask) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["f_lo_hz", "f_hi_hz", "level_w_per_hz"])
        for f_lo, f_hi, level in mask.segments:
            w.writerow([f"{f_lo:.17g}", f"{f_hi:.17g}", f"{level:.17g}"])


@dataclass(frozen=True, eq=False)
class CosinePoly:
    """Even trigonometric polynomial sum_n c_n phi_n(nu) with clock period T0.

    phi_0 = 1 and phi_n = 2 cos(2 pi nu n T0); the value is 1/T0-periodic.
    """

    coeffs: np.ndarray
    clock: float

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float))
        if self.clock <= 0:
            raise ConfigurationError("clock period must be positive")

    @property
    def order(self) -> int:
        return len(self.coeffs)

    def __call__(self, nu) -> np.ndarray | float:
        nu_arr = np.atleast_1d(np.asarray(nu, dtype=float))
        n = np.arange(1, len(self.coeffs))
        vals = self.coeffs[0] + 2.0 * np.cos(
            2.0 * np.pi * np.outer(nu_arr, n) * self.clock
        ) @ self.coeffs[1:]
        if np.asarray(nu).ndim == 0:
            return float(vals[0])
        return vals


def cosine_basis(nu, L: int, clock: float) -> np.ndarray:
    """Design matrix of the cosine basis at the given frequencies."""
    nu_arr = np.atleast_1d(np.asarray(nu, dtype=float))
    n = np.arange(L)
    a = 2.0 * np.cos(2.0 * np.pi * np.outer(nu_arr, n) * clock)
    a[:, 0] = 1.0
    return a


def mask_ratio(mask: SpectralMask, q: Spectrum, nu) -> np.ndarray | float:
    """Pointwise ceiling on the filter power spectrum: mask / |q^|^2."""
    nu_arr = np.atleast_1d(np.asarray(nu, dtype=float))
    qsq = q.power_at(nu_arr)
    peak = float(np.max(q.power()))
    if np.any(qsq < 1e-300 * peak):
        raise DivisionHazardError("pulse spectrum vanishes at a requested frequency")
    vals = mask.level_at(nu_arr) / qsq
    if np.asarray(nu).ndim == 0:
        return float(vals[0])
    return vals


def _segment_bounds(mask: SpectralMask, i: int) -> tuple[float, float]:
    # upper-bound region of segment i: [0, f_hi] except the topmost
    # segment, which is bounded on its own interval only
    f_lo, f_hi, _ = mask.segments[i]
    if i == len(mask.segments) - 1:
        return f_lo, f_hi
    return 0.0, f_hi


def _gauss_nodes(a: float, b: float, cells: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite 4-point Gauss-Legendre nodes and weights on [a, b]."""
    x, w = np.polynomial.legendre.leggauss(4)
    edges = np.linspace(a, b, cells + 1)
    midp = (edges[:-1] + edges[1:]) / 2.0
    half = (edges[1:] - edges[:-1]) / 2.0
    nodes = (midp[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _stable_order(a_w: np.ndarray, L: int, tol: float = 3e-6) -> int:
    """Largest leading block of basis columns that stays well conditioned.

    Incremental Gram-Schmidt on the weighted design matrix; stop once a
    new column is numerically inside the span of the previous ones.
    """
    q = a_w[:, :1] / np.linalg.norm(a_w[:, 0])
    keep = 1
    for n in range(1, L):
        v = a_w[:, n].copy()
        v -= q @ (q.T @ v)
        v -= q @ (q.T @ v)
        if np.linalg.norm(v) / np.linalg.norm(a_w[:, n]) < tol:
            break
        q = np.hstack([q, (v / np.linalg.norm(v))[:, None]])
        keep = n + 1
    return keep


def fit_mask_polynomials(
    mask: SpectralMask,
    q: Spectrum,
    L: int,
    density: int = 512,
    singularity_cap: float = 2.0,
    pulse=None,
) -> list[CosinePoly]:
    """Per-segment cosine-polynomial ceilings below the mask ratio.

    Each segment's ratio is least-squares fitted over its bound region
    (composite Gauss quadrature, order restricted to the well-conditioned
    block), then shifted down by the maximum positive fit error so the
    polynomial never exceeds the true ratio.

    The ratio blows up where the pulse spectrum has a null (DC for a
    monocycle); the fit target is smoothly capped at ``singularity_cap``
    times the segment's right-edge ratio, which leaves only slack in the
    region no compliant spectrum can reach anyway.

    With ``pulse`` given, |q^|^2 at the quadrature nodes is evaluated
    exactly instead of interpolated from the spectrum grid, making the
    coefficients stable under fit-grid refinement.
    """
    if L < 1:
        raise ConfigurationError("fit order must be at least 1")

    if pulse is not None:
        from .signals import dtft_power

        def power_at(nu):
            return dtft_power(pulse, nu)

    else:

        def power_at(nu):
            return q.power_at(nu)

    clock = mask.clock
    peak = float(np.max(q.power()))
    polys = []
    for i in range(len(mask.segments)):
        a, b = _segment_bounds(mask, i)
        level = mask.segments[i][2]
        nodes, weights = _gauss_nodes(a, b, density)
        if nodes[0] <= 0.0:
            nodes = nodes[1:]
            weights = weights[1:]
        qsq = power_at(nodes)
        if np.any(qsq < 1e-300 * peak):
            raise DivisionHazardError("pulse spectrum vanishes on the fit grid")
        ratio = level / qsq
        cap = singularity_cap * level / power_at(np.array([b]))[0]
        # smooth soft-minimum keeps the quadrature spectrally accurate
        target = (ratio**-32 + cap**-32) ** (-1.0 / 32.0)
        design = cosine_basis(nodes, L, clock)
        sw = np.sqrt(weights)
        a_w = design * sw[:, None]
        keep = _stable_order(a_w, L)
        sol, _, rank, _ = np.linalg.lstsq(a_w[:, :keep], target * sw, rcond=None)
        if rank < keep or not np.all(np.isfinite(sol)):
            raise MaskFitError(
                f"segment {i + 1}: fit order {L} is too large for the segment width"
            )
        coeffs = np.zeros(L)
        coeffs[:keep] = sol
        # conservative clamp, verified on a grid 4x denser than the fit grid
        dense = np.linspace(a, b, 4 * density + 1)
        if a == 0.0:
            dense = dense[1:]
        true_ratio = level / power_at(dense)
        excess = np.max(cosine_basis(dense, L, clock) @ coeffs - true_ratio)
        # pad by an evaluation-rounding bound so the ceiling holds strictly
        pad = 64 * np.finfo(float).eps * (abs(coeffs[0]) + 2 * np.sum(np.abs(coeffs[1:])))
        coeffs[0] -= max(excess, 0.0) + pad
        polys.append(CosinePoly(coeffs, clock))
    return polys


def nesp(p: Spectrum, mask: SpectralMask) -> float:
    """Fraction of the allowed passband power the spectrum actually uses.

    The spectrum must already be at its compliant level (see
    :func:`max_compliant_scale`); the result is then in [0, 1] up to
    quadrature error.
    """
    lo, hi = mask.passband
    sel = (p.freqs >= lo) & (p.freqs <= hi)
    used = float(np.trapezoid(p.power()[sel], p.freqs[sel]))
    return used / mask.allowed_passband_power()


def max_compliant_scale(p: Spectrum, mask: SpectralMask) -> float:
    """Largest alpha with alpha^2 |p^|^2 <= mask, times a safety factor.

    Evaluated on the spectrum's grid points inside [0, f_top] plus the
    one-sided limits at every mask edge, where the sup of the ratio of a
    continuous spectrum to a piecewise-constant ceiling typically sits.
    The grid must be at least as dense as SUP_GRID_POINTS over the band.
    """
    sel = (p.freqs >= 0.0) & (p.freqs <= mask.f_top)
    if np.count_nonzero(sel) < SUP_GRID_POINTS:
        raise ConfigurationError(
            f"need at least {SUP_GRID_POINTS} grid points on [0, f_top] "
            "for a trustworthy sup-norm"
        )
    power = p.power()[sel]
    if not np.any(power > 0.0):
        raise ConfigurationError("spectrum is identically zero on the band")
    worst = float(np.max(power / mask.level_at(p.freqs[sel])))
    for f_lo, f_hi, level in mask.segments:
        inner = _one_sided_power(p, f_lo, "right")
        outer = _one_sided_power(p, f_hi, "left")
        worst = max(worst, inner / level, outer / level)
    return SAFETY_FACTOR / math.sqrt(worst)


def _one_sided_power(p: Spectrum, f_edge: float, side: str) -> float:
    """|p^(f_edge)|^2 approached from one side by quadratic extrapolation.

    Uses the three grid points strictly on the requested side, so a jump
    exactly at the edge (spectrum matching a stepped ceiling) does not
    leak across.
    """
    freqs = p.freqs
    power = p.power()
    if side == "left":
        j = int(np.searchsorted(freqs, f_edge, side="left"))
        idx = np.arange(max(j - 3, 0), j)
    else:
        j = int(np.searchsorted(freqs, f_edge, side="right"))
        idx = np.arange(j, min(j + 3, len(freqs)))
    if len(idx) == 0:
        return 0.0
    if len(idx) < 3:
        return float(power[idx[0 if side == "right" else -1]])
    x = freqs[idx] - f_edge
    y = power[idx]
    # Lagrange quadratic through three points, evaluated at x = 0
    val = 0.0
    for a in range(3):
        term = y[a]
        for b in range(3):
            if a != b:
                term *= (0.0 - x[b]) / (x[a] - x[b])
        val += term
    return max(float(val), 0.0)


def _dirichlet_mean(nu, shift: float, n: int) -> np.ndarray:
    """|E exp(-2i pi nu d T)| for d uniform on {0..n-1}: Dirichlet ratio."""
    nu = np.asarray(nu, dtype=float)
    x = nu * shift
    num = np.sin(np.pi * x * n)
    den = n * np.sin(np.pi * x)
    near = np.isclose(np.sin(np.pi * x), 0.0, atol=1e-12)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(near, 1.0, np.abs(np.divide(num, den, where=~near)))
    return out


def psd_pam_ppm(
    p: Spectrum,
    energy: float,
    Ts: float,
    mean_a: float,
    var_a: float,
    shift: float,
    n_positions: int,
) -> tuple[Spectrum, list[tuple[float, float]]]:
    """PSD of an i.i.d. amplitude/position modulated pulse train.

    Amplitudes a_n have the given mean and variance; positions d_n are
    uniform on {0..n_positions-1} with slot offset d_n * shift.  Returns
    the continuous density on the spectrum's grid plus discrete lines at
    multiples of 1/Ts as explicit (frequency, power) pairs.

    Only independent symbol streams are covered; correlated-symbol
    spectra are out of scope for this model.
    """
    if Ts <= 0:
        raise ConfigurationError("symbol period must be positive")
    e_a2 = var_a + mean_a**2
    psq = p.power()
    dir_mag = _dirichlet_mean(p.freqs, shift, n_positions)
    line_factor = (mean_a * dir_mag) ** 2
    cont_vals = energy * psq / Ts * (e_a2 - line_factor)
    cont = Spectrum(p.freqs, cont_vals.astype(complex))
    lines = []
    if mean_a != 0.0:
        f_max = float(np.max(np.abs(p.freqs)))
        n_max = int(math.floor(f_max * Ts))
        for n in range(-n_max, n_max + 1):
            f_n = n / Ts
            w = (
                energy
                * float(p.power_at(np.array([f_n]))[0])
                / Ts**2
                * float((mean_a * _dirichlet_mean(np.array([f_n]), shift, n_positions)[0]) ** 2)
            )
            if w > 0.0:
                lines.append((f_n, w))
    return cont, lines


def psd_th_framed(
    p: Spectrum,
    energy: float,
    Tf: float,
    Nc: int,
    Tc: float,
    n_positions: int,
    shift: float,
) -> tuple[Spectrum, list[tuple[float, float]]]:
    """PSD of a framed time-hopping pulse train with uniform codes.

    Hop codes are uniform on {0..Nc-1} at chip period Tc and data offsets
    uniform on {0..n_positions-1} at the PPM shift; anti-collision needs
    n_positions*shift <= Tc and Nc*Tc <= Tf.
    """
    if n_positions * shift > Tc * (1 + 1e-12):
        raise ConfigurationError(
            "PPM span exceeds the chip period (need n_positions * shift <= Tc)"
        )
    if Nc * Tc > Tf * (1 + 1e-12):
        raise ConfigurationError("hop span exceeds the frame (need Nc * Tc <= Tf)")
    g_mag = _dirichlet_mean(p.freqs, Tc, Nc) * _dirichlet_mean(p.freqs, shift, n_positions)
    cont_vals = energy * p.power() / Tf * (1.0 - g_mag**2)
    cont = Spectrum(p.freqs, cont_vals.astype(complex))
    lines = []
    f_max = float(np.max(np.abs(p.freqs)))
    k_max = int(math.floor(f_max * Tf))
    for k in range(-k_max, k_max + 1):
        f_k = k / Tf
        gm = float(
            _dirichlet_mean(np.array([f_k]), Tc, Nc)[0]
            * _dirichlet_mean(np.array([f_k]), shift, n_positions)[0]
        )
        w = energy * float(p.power_at(np.array([f_k]))[0]) / Tf**2 * gm**2
        if w > 0.0:
            lines.append((f_k, w))
    return cont, lines


def save_psd_csv(path, psd: Spectrum) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["f_hz", "psd_w_per_hz"])
        for f, v in zip(psd.freqs, psd.values.real):
            w.writerow([f"{f:.17g}", f"{v:.17g}"])


def save_lines_csv(path, lines) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["f_hz", "power_w"])
        for f, v in lines:
            w.writerow([f"{f:.17g}", f"{v:.17g}"])
