"""Mask-constrained FIR design over filter autocorrelations.

The shaping problem is linear in the filter's autocorrelation sequence:
maximize the passband power subject to the autocorrelation spectrum
sitting between zero and the fitted per-segment ceilings.  The
semi-infinite constraints are discretized on dense frequency grids,
solved as an LP, re-verified on denser grids with margins backed off
until the returned point is strictly feasible, and the taps are then
recovered by minimum-phase spectral factorization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import (
    ConfigurationError,
    FactorizationError,
    InfeasibleError,
    UnboundedError,
)
from .signals import SampledPulse, Spectrum, autocorr_samples
from .spectral import CosinePoly, cosine_basis

VERIFY_REFINE = 4  # verification grids are this much denser than the LP grids
_MAX_BACKOFF_ROUNDS = 6


@dataclass(frozen=True, eq=False)
class FilterTaps:
    """Real FIR taps at a fixed clock period."""

    taps: np.ndarray
    clock: float

    def __post_init__(self):
        object.__setattr__(self, "taps", np.asarray(self.taps, dtype=float))
        if self.clock <= 0:
            raise ConfigurationError("clock period must be positive")

    @property
    def order(self) -> int:
        return len(self.taps)

    def autocorrelation(self) -> np.ndarray:
        """One-sided tap autocorrelation r_0..r_{L-1}."""
        full = np.correlate(self.taps, self.taps, mode="full")
        return full[len(self.taps) - 1 :]

    def power_spectrum(self) -> CosinePoly:
        return CosinePoly(self.autocorrelation(), self.clock)


@dataclass(frozen=True, eq=False)
class AutocorrVector:
    """Autocorrelation coefficients r_0..r_{L-1} of an implicit filter."""

    r: np.ndarray
    clock: float

    def __post_init__(self):
        object.__setattr__(self, "r", np.asarray(self.r, dtype=float))
        if self.clock <= 0:
            raise ConfigurationError("clock period must be positive")

    def spectrum_poly(self) -> CosinePoly:
        return CosinePoly(self.r, self.clock)


@dataclass(frozen=True)
class LpSolution:
    """Solver output: the maximizer plus its certificates."""

    autocorr: AutocorrVector
    objective: float
    dual_bound: float
    feasibility_margin: float
    lower_floor: float
    backoff_rounds: int


def passband_weights(
    q: Spectrum,
    passband: tuple[float, float],
    L: int,
    clock: float,
    pulse=None,
    density: int = 2048,
) -> np.ndarray:
    """Objective weights c_n = integral over the passband of |q^|^2 phi_n.

    Default path: trapezoid rule on the spectrum's own grid.  With
    ``pulse`` given, composite Gauss quadrature with exact transform
    evaluation at the nodes, which is stable under grid refinement.
    """
    if L < 1:
        raise ConfigurationError("filter order must be at least 1")
    lo, hi = passband
    if pulse is not None:
        from .signals import dtft_power
        from .spectral import _gauss_nodes

        nodes, weights = _gauss_nodes(lo, hi, density)
        power = dtft_power(pulse, nodes)
        return cosine_basis(nodes, L, clock).T @ (power * weights)
    sel = (q.freqs >= lo) & (q.freqs <= hi)
    if np.count_nonzero(sel) < 2:
        raise ConfigurationError("spectrum grid too coarse over the passband")
    nu = q.freqs[sel]
    w = np.abs(q.values[sel]) ** 2
    basis = cosine_basis(nu, L, clock)
    # trapezoid weights on the (uniform) grid restricted to the passband
    tw = np.full(len(nu), q.df)
    tw[0] = tw[-1] = q.df / 2.0
    return basis.T @ (w * tw)


def _segment_grid(a: float, b: float, density: int, refine: int = 1) -> np.ndarray:
    return np.linspace(a, b, density * refine + 1)


def solve_autocorr_lp(
    weights: np.ndarray,
    gammas: list[CosinePoly],
    grid_density: int = 512,
    segments: list[tuple[float, float]] | None = None,
    band_top: float | None = None,
) -> LpSolution:
    """Maximize weights . r over autocorrelations obeying the fitted ceilings.

    Constraints on the LP grid: r^(nu) >= floor on the whole band and
    r^(nu) <= Gamma_i(nu) - margin_i on each segment's grid.  Floor and
    margins start at a small fraction of the ceiling scale and are backed
    off (grown) until the point is feasible, with strictly positive
    spectrum, on grids ``VERIFY_REFINE`` times denser.

    ``segments`` gives each ceiling's active interval; by default segment
    i of n covers [0, top_i] except the last, matching the fit regions.
    """
    weights = np.asarray(weights, dtype=float)
    L = len(weights)
    if not gammas:
        raise ConfigurationError("need at least one upper-bound polynomial")
    clock = gammas[0].clock
    if band_top is None:
        band_top = 1.0 / (2.0 * clock)
    if segments is None:
        raise ConfigurationError("segment intervals must be provided")
    if len(segments) != len(gammas):
        raise ConfigurationError("one interval per polynomial required")

    nu_low = _segment_grid(0.0, band_top, grid_density * len(gammas))
    a_low = cosine_basis(nu_low, L, clock)
    seg_basis = []
    seg_gamma = []
    for (a, b), gam in zip(segments, gammas):
        nu = _segment_grid(a, b, grid_density)
        seg_basis.append(cosine_basis(nu, L, clock))
        seg_gamma.append(gam(nu))

    scale = max(float(np.max(g)) for g in seg_gamma)
    if scale <= 0:
        raise InfeasibleError("all ceilings are non-positive; mask and fits disagree")
    # fixed cushion: larger than typical between-grid-point excursions at
    # the default density, so the result barely depends on grid_density
    floor = 3e-5 * scale
    margins = [3e-5 * scale] * len(gammas)

    hi_low_nu = _segment_grid(0.0, band_top, grid_density * len(gammas), VERIFY_REFINE)
    hi_low = cosine_basis(hi_low_nu, L, clock)
    hi_seg = []
    hi_gamma = []
    for (a, b), gam in zip(segments, gammas):
        nu = _segment_grid(a, b, grid_density, VERIFY_REFINE)
        hi_seg.append(cosine_basis(nu, L, clock))
        hi_gamma.append(gam(nu))

    options = {
        "presolve": True,
        "primal_feasibility_tolerance": 1e-10,
        "dual_feasibility_tolerance": 1e-10,
    }
    # extra constraint nodes appended near active points found off-grid
    extra_low: list[float] = []
    extra_seg: list[list[float]] = [[] for _ in gammas]
    near = 1e-4 * scale
    res = None
    rounds = 0
    refined = False
    for rounds in range(1, _MAX_BACKOFF_ROUNDS + 1):
        low_nodes = np.concatenate([nu_low, np.asarray(extra_low)]) if extra_low else nu_low
        a_low_full = cosine_basis(low_nodes, L, clock) if extra_low else a_low
        bases = []
        gvals_list = []
        for j, ((a, b), gam) in enumerate(zip(segments, gammas)):
            if extra_seg[j]:
                nodes = np.concatenate(
                    [_segment_grid(a, b, grid_density), np.asarray(extra_seg[j])]
                )
                bases.append(cosine_basis(nodes, L, clock))
                gvals_list.append(gam(nodes))
            else:
                bases.append(seg_basis[j])
                gvals_list.append(seg_gamma[j])
        a_ub = np.vstack([-a_low_full] + bases)
        b_ub = np.concatenate(
            [np.full(len(low_nodes), -floor / scale)]
            + [(g - m) / scale for g, m in zip(gvals_list, margins)]
        )
        res = linprog(
            -weights / np.max(np.abs(weights)),
            A_ub=a_ub,
            b_ub=b_ub,
            bounds=[(None, None)] * L,
            method="highs",
            options=options,
        )
        if res.status == 4:
            # solver could not tell infeasible from unbounded; a zero
            # objective settles which one it is
            probe = linprog(
                np.zeros(L),
                A_ub=a_ub,
                b_ub=b_ub,
                bounds=[(None, None)] * L,
                method="highs",
                options=options,
            )
            if probe.status == 0:
                raise UnboundedError(
                    "objective unbounded; an upper-bound segment is missing"
                )
            res = probe
        if res.status == 2:
            raise InfeasibleError(
                "empty constraint intersection; mask fits are inconsistent "
                "with positivity (or margins grew too large)"
            )
        if res.status == 3:
            raise UnboundedError("objective unbounded; an upper-bound segment is missing")
        if res.status != 0:
            raise ConfigurationError(f"LP solver failed: {res.message}")
        r = res.x * scale
        # verify on refined grids; collect near-active off-grid points
        low_vals = hi_low @ r
        dip = floor / 2.0 - float(np.min(low_vals))
        sel = low_vals - floor < near
        extra_low = sorted(set(extra_low) | set(hi_low_nu[sel].tolist()))
        ups = []
        for j, (basis, gvals) in enumerate(zip(hi_seg, hi_gamma)):
            slack = gvals - basis @ r
            ups.append(-float(np.min(slack)))
            nodes = _segment_grid(*segments[j], grid_density, VERIFY_REFINE)
            sel = slack - margins[j] < near
            extra_seg[j] = sorted(set(extra_seg[j]) | set(nodes[sel].tolist()))
        ok = dip <= 0.0 and all(u <= 0.0 for u in ups)
        if ok and refined:
            break
        refined = True
        floor += 2.0 * max(dip, 0.0)
        margins = [m + 2.0 * max(u, 0.0) for m, u in zip(margins, ups)]
    else:
        raise InfeasibleError("back-off did not reach verified feasibility")

    # dual certificate from the final solve (scaled problem)
    y = -np.asarray(res.ineqlin.marginals)
    obj_scale = scale * np.max(np.abs(weights))
    dual_bound = float(y @ b_ub) * obj_scale
    objective = float(weights @ r)
    margin = min(
        float(np.min(hi_low @ r)),
        min(float(np.min(g - b @ r)) for b, g in zip(hi_seg, hi_gamma)),
    )
    return LpSolution(
        autocorr=AutocorrVector(r, clock),
        objective=objective,
        dual_bound=dual_bound,
        feasibility_margin=margin,
        lower_floor=floor,
        backoff_rounds=rounds,
    )


def _autocorr_of(taps: np.ndarray) -> np.ndarray:
    full = np.correlate(taps, taps, mode="full")
    return full[len(taps) - 1 :]


def _factor_by_roots(r: np.ndarray) -> np.ndarray:
    """Minimum-phase factor via the roots of the two-sided lag polynomial."""
    coeffs = np.concatenate([r[::-1], r[1:]]).astype(float)
    roots = np.roots(coeffs)
    poly = np.poly1d(coeffs)
    dpoly = poly.deriv()
    for _ in range(3):  # Newton polish; companion eigenvalues are only a start
        with np.errstate(divide="ignore", invalid="ignore"):
            step = poly(roots) / dpoly(roots)
        step = np.where(np.isfinite(step), step, 0.0)
        roots = roots - step
    mods = np.abs(roots)
    inside = roots[mods < 1.0]
    if len(inside) != len(r) - 1:
        # pair boundary roots: keep the closest-to-circle ones to fill up
        order = np.argsort(np.abs(mods - 1.0))
        chosen = []
        for idx in order:
            if mods[idx] < 1.0 and len(chosen) < len(r) - 1:
                chosen.append(roots[idx])
        remaining = len(r) - 1 - len(chosen)
        if remaining > 0:
            boundary = [roots[i] for i in order if mods[i] >= 1.0]
            for z in boundary[:remaining]:
                chosen.append(z / abs(z) * (1.0 - 1e-12))
        inside = np.asarray(chosen)
    g = np.atleast_1d(np.real(np.poly(inside)))
    ac = _autocorr_of(g)
    g = g * math.sqrt(r[0] / ac[0])
    if g[0] < 0:
        g = -g
    return g


def _factor_by_bauer(r: np.ndarray, size: int = 4096) -> np.ndarray:
    """Fallback: banded Cholesky of a large Toeplitz section.

    The trailing row of the Cholesky factor of the size-N banded Toeplitz
    matrix converges to the (reversed) minimum-phase taps as N grows.
    """
    from scipy.linalg import cholesky_banded

    L = len(r)
    ab_u = np.zeros((L, size))
    for k in range(L):
        ab_u[L - 1 - k, :] = r[k]  # upper banded storage; unused corner ignored
    try:
        ch = cholesky_banded(ab_u, lower=False)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError("Toeplitz section is not positive definite") from exc
    g = ch[::-1, -1][:L]
    if g[0] < 0:
        g = -g
    return np.ascontiguousarray(g, dtype=float)


def spectral_factorize(r: AutocorrVector, tol: float = 1e-7) -> FilterTaps:
    """Recover minimum-phase taps whose autocorrelation matches ``r``.

    Root finding on the two-sided lag polynomial is the primary path; a
    Bauer-type Cholesky iteration backs it up when root clustering near
    the unit circle degrades the round-trip accuracy.  The leading tap is
    made positive, and the spectrum must be strictly positive.
    """
    rv = np.asarray(r.r, dtype=float)
    check = CosinePoly(rv, r.clock)(np.linspace(0.0, 0.5 / r.clock, 4096))
    if float(np.min(check)) <= 1e-12 * float(np.max(check)):
        raise FactorizationError(
            "autocorrelation spectrum touches zero; re-solve with a larger floor"
        )
    g = _factor_by_roots(rv)
    err = float(np.max(np.abs(_autocorr_of(g) - rv)))
    if err > tol:
        g = _factor_by_bauer(rv)
        err = float(np.max(np.abs(_autocorr_of(g) - rv)))
        if err > tol:
            raise FactorizationError(
                f"round-trip error {err:.3e} exceeds {tol:.1e} on both factorization paths"
            )
    return FilterTaps(g, r.clock)


def min_phase_roots(g: FilterTaps) -> np.ndarray:
    """Zeros of the tap polynomial (all inside/on the unit circle for min phase)."""
    return np.roots(g.taps)


def shift_orthogonality_defect(g: FilterTaps, delta: int) -> float:
    """max over k != 0 of |r_g(k * delta)|; zero iff the filter preserves
    delta-shift orthogonality of an already orthogonal input."""
    if delta < 1:
        raise ConfigurationError("delta must be a positive integer")
    r = g.autocorrelation()
    lags = np.arange(delta, len(r), delta)
    if len(lags) == 0:
        return 0.0
    return float(np.max(np.abs(r[lags])))


def reconciliation_filter_delta2(g: FilterTaps, q: SampledPulse) -> CosinePoly:
    """Power spectrum of the filter aligning 2-shift orthogonalization
    with the shaping filter.

    In clock-normalized frequency the value is
    1 / (1 + (2 r_g(0)/r^_g(nu) - 1) * Phi'(nu)/Phi(nu)) where Phi is the
    folded power spectrum of ``q`` at the clock shift and Phi' its
    half-period translate.  Returned as a cosine polynomial obtained from
    a dense sample of the (even, periodic) ratio.
    """
    clock = g.clock
    rg = g.autocorrelation()
    rg_poly = CosinePoly(rg, clock)
    n_grid = 4096
    nu = np.arange(n_grid) / (n_grid * clock)  # one full period
    rhat = np.asarray(rg_poly(nu))
    if np.min(rhat) <= 0:
        raise ConfigurationError("filter power spectrum must be positive")
    rq = autocorr_samples(q, clock)
    k = np.arange(1, len(rq))
    phase = np.cos(2.0 * np.pi * np.outer(nu * clock, k))
    phi = rq[0] + 2.0 * phase @ rq[1:]
    phi_shift = rq[0] + 2.0 * (phase * np.cos(np.pi * k)[None, :]) @ rq[1:]
    if np.min(phi) <= 0:
        raise ConfigurationError("folded spectrum of q must be positive")
    vals = 1.0 / (1.0 + (2.0 * rg[0] / rhat - 1.0) * phi_shift / phi)
    # cosine coefficients of the sampled even periodic function
    spec = np.fft.rfft(vals) / n_grid
    coeffs = np.concatenate([[spec[0].real], spec[1:].real])
    # keep terms above numerical noise
    keep = max(1, int(np.max(np.nonzero(np.abs(coeffs) > 1e-12 * np.abs(coeffs).max())[0])) + 1)
    return CosinePoly(coeffs[:keep], clock)
