"""Slit-scan coincidence counting on simulated photon pairs.

Two slits of width ``slit_width`` sit on translation stages and move in
steps of ``step``. Scanning both the same way places them at ``(x, x)`` and
records the ``rho_i + rho_s`` ("plus") distribution; scanning in opposite
directions places them at ``(-x, x)`` and records ``rho_i - rho_s`` ("minus").
Histogram abscissae are ``2 x`` in dimensionless units.

Each scan position gets its own dwell window: the simulated pairs are split
evenly over the positions in order, and a pair counts only if both photons
pass their slits during its window. Counts per position are therefore
independent and their sum equals the number of accepted pairs.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import integrate, optimize, stats

from .criteria import MINUS_PLUS, PLUS_MINUS, DgczReport
from .exceptions import ConfigurationError, DegenerateDensityError, FitError, InvalidParameterError
from .gaussian import CovarianceMatrix4
from .optics import DimensionScale, to_dimensionless

SAME = "same"
OPPOSITE = "opposite"
_WHICH = {SAME: "plus", OPPOSITE: "minus"}
COVERAGE_WIDTHS = 4.0


@dataclass(frozen=True)
class DetectorConfig:
    """Slit width and scan step in metres, number of scan positions, and the
    scale used to express them in dimensionless units."""

    slit_width: float
    step: float
    n_steps: int
    scale: DimensionScale

    def __post_init__(self):
        if not self.slit_width > 0.0:
            raise InvalidParameterError("slit_width must be positive")
        if not self.step > 0.0:
            raise InvalidParameterError("step must be positive")
        if int(self.n_steps) < 8:
            raise InvalidParameterError(f"n_steps must be >= 8, got {self.n_steps}")
        object.__setattr__(self, "n_steps", int(self.n_steps))

    @property
    def slit_dimensionless(self) -> float:
        return to_dimensionless(self.slit_width, self.scale)

    @property
    def step_dimensionless(self) -> float:
        return to_dimensionless(self.step, self.scale)

    def positions(self) -> np.ndarray:
        """Dimensionless slit offsets ``x_m``, centred on zero."""
        m = np.arange(self.n_steps) - (self.n_steps - 1) / 2.0
        return m * self.step_dimensionless

    def slit_broadening(self) -> float:
        """Variance two independent top-hat slits add along ``rho_i +/- rho_s``."""
        return 2.0 * self.slit_dimensionless**2 / 12.0


def steps_to_cover(variance: float, slit_width: float, step: float, scale: DimensionScale,
                   n_widths: float = 4.5) -> int:
    """Odd number of scan positions (>= 9) spanning ``n_widths`` standard
    deviations of the slit-broadened curve on each side."""
    w = to_dimensionless(slit_width, scale)
    spacing = 2.0 * to_dimensionless(step, scale)
    std = math.sqrt(max(variance, 0.0) + 2.0 * w**2 / 12.0)
    half = math.ceil(n_widths * std / spacing)
    return max(2 * half + 1, 9)


@dataclass(frozen=True)
class ScanConfig:
    direction: str
    pairs: int
    seed: int

    def __post_init__(self):
        if self.direction not in _WHICH:
            raise InvalidParameterError(f"direction must be 'same' or 'opposite', got {self.direction!r}")
        if int(self.pairs) < 1000:
            raise InvalidParameterError(f"pairs must be >= 1000, got {self.pairs}")
        object.__setattr__(self, "pairs", int(self.pairs))
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def which(self) -> str:
        return _WHICH[self.direction]


@dataclass(frozen=True)
class GaussianFit:
    center: float
    variance: float
    amplitude: float
    rms_residual: float
    variance_std_error: float
    deconvolved_variance: float | None = None

    def to_dict(self) -> dict:
        return {
            "center": self.center,
            "variance": self.variance,
            "amplitude": self.amplitude,
            "rms_residual": self.rms_residual,
            "variance_std_error": self.variance_std_error,
            "deconvolved_variance": self.deconvolved_variance,
        }


@dataclass(frozen=True)
class CoincidenceHistogram:
    """Coincidences against the dimensionless scan coordinate.

    ``which`` is ``"plus"`` or ``"minus"``; ``variable`` says whether the
    curve stands for a position (``"rho"``) or a momentum (``"q"``) sum or
    difference, the latter measured in a plane rotated by a quarter turn.
    """

    bin_centers: np.ndarray
    counts: np.ndarray
    which: str
    variable: str
    slit_width: float
    scale: DimensionScale
    angles: tuple = (0.0, 0.0)
    fit: GaussianFit | None = None
    warnings: tuple = ()

    def __post_init__(self):
        centers = np.asarray(self.bin_centers, dtype=float)
        counts = np.asarray(self.counts)
        if centers.shape != counts.shape or centers.ndim != 1:
            raise InvalidParameterError("bin_centers and counts must be 1-D and equally long")
        if np.any(counts < 0):
            raise InvalidParameterError("counts must be non-negative")
        if self.which not in ("plus", "minus") or self.variable not in ("rho", "q"):
            raise InvalidParameterError(f"bad histogram labels {self.which!r}/{self.variable!r}")
        object.__setattr__(self, "bin_centers", centers)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "angles", None if self.angles is None else tuple(float(a) for a in self.angles))
        object.__setattr__(self, "warnings", tuple(self.warnings))

    @property
    def label(self) -> str:
        sign = "+" if self.which == "plus" else "-"
        return f"{self.variable}{sign}"

    @property
    def total(self):
        return self.counts.sum()

    def to_csv(self) -> str:
        lines = ["bin_center,counts"]
        for x, c in zip(self.bin_centers, self.counts):
            lines.append(f"{x!r},{c!r}" if not isinstance(c, (np.integer, int)) else f"{x!r},{int(c)}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        counts = self.counts.tolist()
        return {
            "which": self.which,
            "variable": self.variable,
            "angles": None if self.angles is None else list(self.angles),
            "slit_width": self.slit_width,
            "k": self.scale.k,
            "f_prime": self.scale.f_prime,
            "bin_centers": self.bin_centers.tolist(),
            "counts": counts,
            "fit": None if self.fit is None else self.fit.to_dict(),
            "warnings": list(self.warnings),
        }


def sample_pairs(cov: CovarianceMatrix4, n: int, seed) -> np.ndarray:
    """Draw ``n`` transverse positions ``(rho_s, rho_i)`` from the position marginal."""
    block = cov.position_block
    mean = cov.mean[[0, 2]]
    eig = np.linalg.eigvalsh(block)
    if eig[0] <= 1e-14 * max(1.0, eig[1]):
        raise DegenerateDensityError("position covariance block is singular")
    n = int(n)
    if n < 0:
        raise InvalidParameterError("n must be >= 0")
    if n == 0:
        return np.empty((0, 2))
    chol = np.linalg.cholesky(block)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, 2))
    return z @ chol.T + mean


def _window_index(n_samples: int, n_steps: int) -> np.ndarray:
    """Scan position of each sample: contiguous, near-equal dwell windows."""
    sizes = np.full(n_steps, n_samples // n_steps)
    sizes[: n_samples % n_steps] += 1
    return np.repeat(np.arange(n_steps), sizes)


def scan_coincidences(
    samples,
    det: DetectorConfig,
    scan: ScanConfig,
    variable: str = "rho",
    angles=(0.0, 0.0),
) -> CoincidenceHistogram:
    samples = np.asarray(samples, dtype=float).reshape(-1, 2)
    x = det.positions()
    half = det.slit_dimensionless / 2.0
    idx = _window_index(len(samples), det.n_steps)
    x_i = x[idx]
    x_s = x_i if scan.direction == SAME else -x_i
    d_s = samples[:, 0] - x_s
    d_i = samples[:, 1] - x_i
    accepted = (d_s >= -half) & (d_s < half) & (d_i >= -half) & (d_i < half)
    counts = np.bincount(idx[accepted], minlength=det.n_steps).astype(np.int64)
    centers = 2.0 * x

    notes = []
    if len(samples):
        sign = 1.0 if scan.direction == SAME else -1.0
        coord = samples[:, 1] + sign * samples[:, 0]
        spread = float(np.std(coord))
        reach = float(np.max(np.abs(centers)))
        if COVERAGE_WIDTHS * spread > reach:
            notes.append(
                f"scan range +/-{reach:.4g} covers less than {COVERAGE_WIDTHS:g} widths (std {spread:.4g})"
            )
    return CoincidenceHistogram(
        bin_centers=centers,
        counts=counts,
        which=scan.which,
        variable=variable,
        slit_width=det.slit_dimensionless,
        scale=det.scale,
        angles=angles,
        warnings=tuple(notes),
    )


def simulate_scan(cov: CovarianceMatrix4, det: DetectorConfig, scan: ScanConfig,
                  variable: str = "rho", angles=(0.0, 0.0)) -> CoincidenceHistogram:
    samples = sample_pairs(cov, scan.pairs, scan.seed)
    return scan_coincidences(samples, det, scan, variable=variable, angles=angles)


def _rectangle_probability(block, mean, lo_s, hi_s, lo_i, hi_i) -> float:
    """P(lo_s <= rho_s < hi_s, lo_i <= rho_i < hi_i) for a bivariate normal."""
    var_s, var_i, cov = block[0, 0], block[1, 1], block[0, 1]
    std_s = math.sqrt(var_s)
    slope = cov / var_s
    cond_std = math.sqrt(max(var_i - cov * slope, 0.0))
    if cond_std == 0.0:
        raise DegenerateDensityError("position covariance block is singular")

    def integrand(r):
        centre = mean[1] + slope * (r - mean[0])
        return stats.norm.pdf(r, mean[0], std_s) * (
            stats.norm.cdf(hi_i, centre, cond_std) - stats.norm.cdf(lo_i, centre, cond_std)
        )

    points = []
    if slope != 0.0:
        for edge in (lo_i, hi_i):
            r = mean[0] + (edge - mean[1]) / slope
            if lo_s < r < hi_s:
                points.append(r)
    value, _ = integrate.quad(integrand, lo_s, hi_s, points=points or None, epsabs=1e-14, epsrel=1e-10, limit=200)
    return value


def expected_histogram(
    cov: CovarianceMatrix4,
    det: DetectorConfig,
    scan: ScanConfig,
    variable: str = "rho",
    angles=(0.0, 0.0),
) -> CoincidenceHistogram:
    """Mean counts of :func:`simulate_scan`, by quadrature instead of sampling."""
    block = cov.position_block
    mean = cov.mean[[0, 2]]
    x = det.positions()
    half = det.slit_dimensionless / 2.0
    per_step = np.bincount(_window_index(scan.pairs, det.n_steps), minlength=det.n_steps)
    expected = np.empty(det.n_steps)
    for m, x_i in enumerate(x):
        x_s = x_i if scan.direction == SAME else -x_i
        p = _rectangle_probability(block, mean, x_s - half, x_s + half, x_i - half, x_i + half)
        expected[m] = per_step[m] * p
    return CoincidenceHistogram(
        bin_centers=2.0 * x,
        counts=expected,
        which=scan.which,
        variable=variable,
        slit_width=det.slit_dimensionless,
        scale=det.scale,
        angles=angles,
    )


def _gaussian(x, amplitude, center, variance):
    return amplitude * np.exp(-((x - center) ** 2) / (2.0 * variance))


def fit_gaussian(hist: CoincidenceHistogram, min_nonzero_bins: int = 3, max_evaluations: int = 5000) -> GaussianFit:
    """Weighted least-squares fit of ``A exp(-(x - c)^2 / (2 v))``.

    Starts from the histogram moments. A first pass weights bins with
    ``sqrt(max(counts, 1))``, a second with ``sqrt(max(model, 1))``; the
    standard error of ``v`` comes from the final covariance (absolute sigma). ``deconvolved_variance``
    subtracts the top-hat broadening of the two slits.
    """
    x = hist.bin_centers
    y = np.asarray(hist.counts, dtype=float)
    nonzero = int(np.count_nonzero(y))
    if nonzero < min_nonzero_bins:
        raise FitError(
            f"need at least {min_nonzero_bins} nonzero bins, got {nonzero}",
            {"nonzero_bins": nonzero},
        )
    total = y.sum()
    c0 = float(np.sum(x * y) / total)
    v0 = float(np.sum((x - c0) ** 2 * y) / total)
    spacing = float(np.min(np.diff(x))) if len(x) > 1 else 1.0
    v0 = max(v0, spacing**2 / 4.0)
    a0 = float(y.max())
    bounds = ([0.0, -np.inf, 1e-12 * spacing**2], [np.inf, np.inf, np.inf])
    popt = np.array([a0, c0, v0])
    # second pass weights by the fitted model, removing the low-count bias of data weights
    for weights_from_model in (False, True):
        base = _gaussian(x, *popt) if weights_from_model else y
        sigma = np.sqrt(np.maximum(base, 1.0))
        try:
            popt, pcov = optimize.curve_fit(
                _gaussian, x, y, p0=popt, sigma=sigma, absolute_sigma=True,
                bounds=bounds, max_nfev=max_evaluations,
            )
        except (RuntimeError, ValueError) as exc:
            raise FitError(f"Gaussian fit did not converge: {exc}", {"p0": (a0, c0, v0)}) from exc
    amplitude, center, variance = (float(v) for v in popt)
    span = float(np.ptp(x))
    if not np.isfinite(variance) or variance > span**2:
        raise FitError(
            f"fitted variance {variance:.4g} exceeds the scan range", {"variance": variance, "span": span}
        )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        se = float(np.sqrt(pcov[2, 2])) if np.isfinite(pcov[2, 2]) else float("nan")
    residual = y - _gaussian(x, amplitude, center, variance)
    return GaussianFit(
        center=center,
        variance=variance,
        amplitude=amplitude,
        rms_residual=float(np.sqrt(np.mean(residual**2))),
        variance_std_error=se,
        deconvolved_variance=variance - 2.0 * hist.slit_width**2 / 12.0,
    )


def with_fit(hist: CoincidenceHistogram, **kwargs) -> CoincidenceHistogram:
    return replace(hist, fit=fit_gaussian(hist, **kwargs))


def estimate_dgcz(hist_rho: CoincidenceHistogram, hist_q: CoincidenceHistogram,
                  deconvolve: bool = False) -> DgczReport:
    """DGCZ sum from a position-type and a momentum-type coincidence curve."""
    if hist_rho.variable != "rho" or hist_q.variable != "q":
        raise ConfigurationError("expected one position histogram and one momentum histogram")
    if not hist_rho.scale.matches(hist_q.scale):
        raise ConfigurationError("histograms were recorded with different dimensionless scales")
    pairs = {("minus", "plus"): MINUS_PLUS, ("plus", "minus"): PLUS_MINUS}
    pairing = pairs.get((hist_rho.which, hist_q.which))
    if pairing is None:
        raise ConfigurationError(f"histograms {hist_rho.label}/{hist_q.label} do not form a DGCZ pair")
    fits = [h.fit if h.fit is not None else fit_gaussian(h) for h in (hist_rho, hist_q)]
    if deconvolve:
        values = [f.deconvolved_variance for f in fits]
    else:
        values = [f.variance for f in fits]
    se = math.sqrt(sum(f.variance_std_error**2 for f in fits))
    return DgczReport.build(values[0], values[1], pairing, hist_rho.angles, std_error=se)
