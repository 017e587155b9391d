"""Two-photon Gaussian states of the double-Gaussian down-conversion model.

All coordinates are dimensionless. ``rho`` is the transverse position and
``q`` the conjugate transverse wavevector of one photon, with
``[rho_j, q_k] = i delta_jk``. Covariance matrices are ordered
``(rho_s, q_s, rho_i, q_i)`` and hold symmetrized second moments
``V_jk = <{dx_j, dx_k}>/2``.

Sum and difference coordinates follow ``rho_pm = rho_i +/- rho_s`` with no
``1/sqrt(2)`` normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidGridError, InvalidParameterError

SYMMETRY_TOL = 1e-12
UNCERTAINTY_TOL = 1e-9


@dataclass(frozen=True)
class SourceParameters:
    """Widths of the two-photon Gaussian at the crystal.

    Parameters
    ----------
    sigma_plus_sq : float
        Variance of ``rho_i + rho_s``.
    sigma_minus_sq : float
        Variance of ``rho_i - rho_s``.
    """

    sigma_plus_sq: float
    sigma_minus_sq: float

    def __post_init__(self):
        for name in ("sigma_plus_sq", "sigma_minus_sq"):
            value = getattr(self, name)
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise InvalidParameterError(f"{name} must be a real number, got {value!r}")
            if not math.isfinite(value) or value <= 0.0:
                raise InvalidParameterError(f"{name} must be positive and finite, got {value!r}")
            object.__setattr__(self, name, value)

    @property
    def sigma_plus(self) -> float:
        return math.sqrt(self.sigma_plus_sq)

    @property
    def sigma_minus(self) -> float:
        return math.sqrt(self.sigma_minus_sq)

    @property
    def is_entangled(self) -> bool:
        return self.sigma_plus_sq != self.sigma_minus_sq


@dataclass(frozen=True)
class CovarianceMatrix4:
    """Second moments of a two-photon Gaussian state.

    ``matrix`` is 4x4, ordered ``(rho_s, q_s, rho_i, q_i)``. ``mean`` defaults
    to zero. The constructor checks symmetry, positive semidefiniteness and the
    per-arm bound ``Var(rho_j) Var(q_j) >= 1/4``.
    """

    matrix: np.ndarray
    mean: np.ndarray = field(default_factory=lambda: np.zeros(4))

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        mu = np.array(self.mean, dtype=float).reshape(-1)
        if m.shape != (4, 4):
            raise InvalidParameterError(f"covariance must be 4x4, got shape {m.shape}")
        if mu.shape != (4,):
            raise InvalidParameterError(f"mean must have 4 entries, got {mu.shape}")
        if not (np.all(np.isfinite(m)) and np.all(np.isfinite(mu))):
            raise InvalidParameterError("covariance and mean must be finite")
        scale = max(1.0, float(np.max(np.abs(m))))
        if np.max(np.abs(m - m.T)) > SYMMETRY_TOL * scale:
            raise InvalidParameterError("covariance matrix is not symmetric")
        m = 0.5 * (m + m.T)
        if np.linalg.eigvalsh(m)[0] < -1e-10 * scale:
            raise InvalidParameterError("covariance matrix is not positive semidefinite")
        for j in (0, 2):
            if m[j, j] * m[j + 1, j + 1] < 0.25 * (1.0 - UNCERTAINTY_TOL):
                raise InvalidParameterError(
                    f"arm {'si'[j // 2]} violates Var(rho) Var(q) >= 1/4"
                )
        m.setflags(write=False)
        mu.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "mean", mu)

    def variance(self, coefficients) -> float:
        """Variance of the linear combination ``coefficients . x``."""
        v = np.asarray(coefficients, dtype=float)
        return float(v @ self.matrix @ v)

    def covariance(self, u, v) -> float:
        return float(np.asarray(u, dtype=float) @ self.matrix @ np.asarray(v, dtype=float))

    @property
    def position_block(self) -> np.ndarray:
        """2x2 covariance of ``(rho_s, rho_i)``."""
        return self.matrix[np.ix_([0, 2], [0, 2])]


def make_source_state(params: SourceParameters) -> CovarianceMatrix4:
    """Covariance matrix of the state at the crystal plane."""
    if not isinstance(params, SourceParameters):
        raise InvalidParameterError("params must be a SourceParameters instance")
    sp, sm = params.sigma_plus_sq, params.sigma_minus_sq
    var_rho = (sp + sm) / 4.0
    cov_rho = (sp - sm) / 4.0
    var_q = (1.0 / sp + 1.0 / sm) / 4.0
    cov_q = (1.0 / sp - 1.0 / sm) / 4.0
    m = np.array(
        [
            [var_rho, 0.0, cov_rho, 0.0],
            [0.0, var_q, 0.0, cov_q],
            [cov_rho, 0.0, var_rho, 0.0],
            [0.0, cov_q, 0.0, var_q],
        ]
    )
    return CovarianceMatrix4(m)


def position_amplitude(params: SourceParameters, rho_s, rho_i):
    """Two-photon amplitude at the source in the position representation."""
    rho_s = np.asarray(rho_s, dtype=float)
    rho_i = np.asarray(rho_i, dtype=float)
    norm = (math.pi * params.sigma_plus * params.sigma_minus) ** -0.5
    return norm * np.exp(
        -((rho_i + rho_s) ** 2) / (4.0 * params.sigma_plus_sq)
        - (rho_i - rho_s) ** 2 / (4.0 * params.sigma_minus_sq)
    ) + 0j


def momentum_amplitude(params: SourceParameters, q_s, q_i):
    """Two-photon amplitude at the source in the wavevector representation."""
    q_s = np.asarray(q_s, dtype=float)
    q_i = np.asarray(q_i, dtype=float)
    norm = math.sqrt(params.sigma_plus * params.sigma_minus / math.pi)
    return norm * np.exp(
        -params.sigma_plus_sq * (q_i + q_s) ** 2 / 4.0
        - params.sigma_minus_sq * (q_i - q_s) ** 2 / 4.0
    ) + 0j


def _inverse_sqrt_branch(z: complex, alpha: float) -> complex:
    """``z**-1/2`` on the branch reached continuously from ``alpha = 0``.

    ``z = cos(alpha) + sin(alpha) * tau`` with ``Im(tau) > 0`` lies in the
    upper half plane for ``alpha`` in (0, pi) and the lower one in (pi, 2pi),
    winding once per period.
    """
    periods = math.floor(alpha / (2.0 * math.pi))
    reduced = alpha - 2.0 * math.pi * periods
    arg = math.atan2(z.imag, z.real)
    if reduced > math.pi:
        if arg <= 0.0:
            arg += 2.0 * math.pi
    elif reduced == math.pi:
        arg = math.pi
    arg += 2.0 * math.pi * periods
    return abs(z) ** -0.5 * complex(math.cos(-arg / 2.0), math.sin(-arg / 2.0))


@dataclass(frozen=True)
class ComplexGaussian1D:
    """Amplitude ``norm * exp(-a x**2)`` of one normalized mode.

    The imaginary part of ``a`` is a quadratic phase (chirp); after an FRFT it
    carries the position-momentum correlation of the mode.
    """

    a: complex
    norm: complex
    alpha_applied: float = 0.0

    def __post_init__(self):
        a = complex(self.a)
        if not a.real > 0.0:
            raise InvalidParameterError(f"Re(a) must be positive, got {a!r}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "norm", complex(self.norm))
        object.__setattr__(self, "alpha_applied", float(self.alpha_applied))

    @classmethod
    def normalized(cls, a: complex) -> "ComplexGaussian1D":
        a = complex(a)
        if not a.real > 0.0:
            raise InvalidParameterError(f"Re(a) must be positive, got {a!r}")
        return cls(a, (2.0 * a.real / math.pi) ** 0.25)

    @classmethod
    def from_width(cls, sigma: float) -> "ComplexGaussian1D":
        """Real Gaussian whose intensity has standard deviation ``sigma``."""
        return cls.normalized(1.0 / (4.0 * sigma**2))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.norm * np.exp(-self.a * x**2)

    def intensity_variance(self) -> float:
        return 1.0 / (4.0 * self.a.real)

    def norm_squared(self) -> float:
        """Closed-form integral of ``|amplitude|**2`` over the real line."""
        return abs(self.norm) ** 2 * math.sqrt(math.pi / (2.0 * self.a.real))


def frft_gaussian_1d(g: ComplexGaussian1D, alpha: float) -> ComplexGaussian1D:
    """Fractional Fourier transform of order ``alpha`` (radians), in closed form.

    The kernel is the unitary one with eigenvalues ``exp(-i (n + 1/2) alpha)``
    on Hermite-Gauss modes, so orders add exactly and the phase-space action
    is ``rho -> cos(alpha) rho + sin(alpha) q``.
    """
    alpha = float(alpha)
    c, s = math.cos(alpha), math.sin(alpha)
    tau = 2j * g.a
    z = c + s * tau
    tau_out = (-s + c * tau) / z
    return ComplexGaussian1D(
        a=tau_out / 2j,
        norm=g.norm * _inverse_sqrt_branch(z, alpha),
        alpha_applied=g.alpha_applied + alpha,
    )


@dataclass(frozen=True)
class TwoPhotonAmplitude:
    """Amplitude ``norm * exp(i/2 x^T T x)`` over ``x = (rho_s, rho_i)``.

    ``T`` is complex symmetric with positive-definite imaginary part. Each
    arm can be propagated through its own FRFT order.
    """

    T: np.ndarray
    norm: complex
    alphas: tuple = (0.0, 0.0)

    @classmethod
    def from_source(cls, params: SourceParameters) -> "TwoPhotonAmplitude":
        p = (1.0 / params.sigma_plus_sq + 1.0 / params.sigma_minus_sq) / 4.0
        m = (1.0 / params.sigma_plus_sq - 1.0 / params.sigma_minus_sq) / 4.0
        T = 2j * np.array([[p, m], [m, p]])
        norm = (math.pi * params.sigma_plus * params.sigma_minus) ** -0.5
        return cls(T, complex(norm))

    def propagate(self, alpha_s: float, alpha_i: float) -> "TwoPhotonAmplitude":
        T = np.array(self.T, dtype=complex)
        norm = self.norm
        for arm, alpha in enumerate((float(alpha_s), float(alpha_i))):
            if alpha == 0.0:
                continue
            c, s = math.cos(alpha), math.sin(alpha)
            A = np.eye(2, dtype=complex)
            B = np.zeros((2, 2), dtype=complex)
            C = np.zeros((2, 2), dtype=complex)
            D = np.eye(2, dtype=complex)
            A[arm, arm] = c
            B[arm, arm] = s
            C[arm, arm] = -s
            D[arm, arm] = c
            z = complex(c + s * T[arm, arm])
            T = (C + D @ T) @ np.linalg.inv(A + B @ T)
            T = 0.5 * (T + T.T)
            norm = norm * _inverse_sqrt_branch(z, alpha)
        return TwoPhotonAmplitude(T, norm, (self.alphas[0] + alpha_s, self.alphas[1] + alpha_i))

    def __call__(self, rho_s, rho_i):
        rho_s = np.asarray(rho_s, dtype=float)
        rho_i = np.asarray(rho_i, dtype=float)
        T = self.T
        quad = T[0, 0] * rho_s**2 + 2.0 * T[0, 1] * rho_s * rho_i + T[1, 1] * rho_i**2
        return self.norm * np.exp(0.5j * quad)



@dataclass(frozen=True)
class GridSpec:
    """Square sampling grid for Schmidt analysis.

    ``half_width=None`` picks ``n_sigma`` standard deviations of the widest
    single-photon intensity marginal at the requested order.
    """

    n_points: int = 256
    half_width: float | None = None
    n_sigma: float = 6.0

    def __post_init__(self):
        if int(self.n_points) < 8:
            raise InvalidGridError(f"grid needs at least 8 points per axis, got {self.n_points}")
        if self.half_width is not None and not self.half_width > 0.0:
            raise InvalidGridError("half_width must be positive")

    def axis(self, default_sigma: float) -> np.ndarray:
        half = self.half_width if self.half_width is not None else self.n_sigma * default_sigma
        return np.linspace(-half, half, int(self.n_points))


def schmidt_number(amplitude_matrix) -> float:
    """``(sum s**2)**2 / sum s**4`` over singular values of a sampled amplitude."""
    s = np.linalg.svd(np.asarray(amplitude_matrix), compute_uv=False)
    p = s**2
    total = p.sum()
    if total == 0.0:
        raise InvalidGridError("amplitude vanishes on the grid")
    return float(total**2 / np.sum(p**2))


def source_schmidt_number(params: SourceParameters) -> float:
    """Closed-form Schmidt number of the source amplitude."""
    r = params.sigma_plus / params.sigma_minus
    return 0.5 * (r + 1.0 / r)


def equal_arm_position_std(params: SourceParameters, alpha: float) -> float:
    c2, s2 = math.cos(alpha) ** 2, math.sin(alpha) ** 2
    var = (
        c2 * (params.sigma_plus_sq + params.sigma_minus_sq)
        + s2 * (1.0 / params.sigma_plus_sq + 1.0 / params.sigma_minus_sq)
    ) / 4.0
    return math.sqrt(var)


def real_part_schmidt_number(
    params: SourceParameters,
    alpha: float,
    grid: GridSpec | None = None,
    part: str = "modulus",
) -> float:
    """Schmidt number of the real part of the amplitude after equal-arm FRFTs.

    With ``part="modulus"`` (default) the real part of the complex exponent is
    kept, i.e. ``|Psi|``; the imaginary part of the exponent is the phase that
    carries entanglement once it has migrated. This factorizes exactly at
    ``alpha = arctan(sigma_plus * sigma_minus)``. ``part="real"`` uses
    ``Re(Psi)`` literally.
    """
    grid = grid or GridSpec()
    if part not in ("modulus", "real"):
        raise ValueError(f"part must be 'modulus' or 'real', got {part!r}")
    x = grid.axis(equal_arm_position_std(params, alpha))
    amp = TwoPhotonAmplitude.from_source(params).propagate(alpha, alpha)
    values = amp(x[:, None], x[None, :])
    values = np.abs(values) if part == "modulus" else values.real
    return schmidt_number(values)
