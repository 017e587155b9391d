"""DGCZ separability tests for rotated transverse variables.

A separable state satisfies both

    Var(rho_-) + Var(q_+) >= 2    ("minus-plus" pairing)
    Var(rho_+) + Var(q_-) >= 2    ("plus-minus" pairing)

and violating either one certifies entanglement. After FRFTs of orders
``alpha_s`` and ``alpha_i`` the variables become ``rho'_- = rho_as - rho_ai``
and ``q'_+ = q_as + q_ai``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .exceptions import InvalidParameterError, UndefinedThresholdError
from .gaussian import CovarianceMatrix4, SourceParameters
from .optics import ArmTransform, rotation_matrix

MINUS_PLUS = "minus-plus"
PLUS_MINUS = "plus-minus"
DGCZ_BOUND = 2.0

# linear combinations over (rho_s, q_s, rho_i, q_i)
RHO_PLUS = np.array([1.0, 0.0, 1.0, 0.0])
RHO_MINUS = np.array([-1.0, 0.0, 1.0, 0.0])
Q_PLUS = np.array([0.0, 1.0, 0.0, 1.0])
Q_MINUS = np.array([0.0, -1.0, 0.0, 1.0])

_PAIRINGS = {
    MINUS_PLUS: (RHO_MINUS, Q_PLUS),
    PLUS_MINUS: (RHO_PLUS, Q_MINUS),
}


@dataclass(frozen=True)
class DgczReport:
    """One DGCZ sum.

    ``var_rho`` and ``var_q`` are the position and momentum variances of the
    chosen pairing; for ``minus-plus`` these are ``Var(rho'_-)`` and
    ``Var(q'_+)``.
    """

    var_rho: float
    var_q: float
    sum: float
    violated: bool
    pairing: str
    angles: tuple
    std_error: float | None = None

    @classmethod
    def build(cls, var_rho, var_q, pairing, angles=(0.0, 0.0), std_error=None):
        if pairing not in _PAIRINGS:
            raise InvalidParameterError(f"unknown pairing {pairing!r}")
        var_rho, var_q = float(var_rho), float(var_q)
        total = var_rho + var_q
        return cls(
            var_rho=var_rho,
            var_q=var_q,
            sum=total,
            violated=bool(total < DGCZ_BOUND),
            pairing=pairing,
            angles=() if angles is None else tuple(float(a) for a in angles),
            std_error=None if std_error is None else float(std_error),
        )

    def to_record(self) -> dict:
        """Flat key-value form for JSON and CSV output."""
        record = asdict(self)
        alpha_s, alpha_i = record.pop("angles") or (None, None)
        record["alpha_s"] = alpha_s
        record["alpha_i"] = alpha_i
        return record


@dataclass(frozen=True)
class StateSummary:
    """The two DGCZ sums of an undistorted source state."""

    S1: float
    S2: float

    @classmethod
    def from_params(cls, params: SourceParameters) -> "StateSummary":
        return cls(
            S1=params.sigma_plus_sq + 1.0 / params.sigma_minus_sq,
            S2=params.sigma_minus_sq + 1.0 / params.sigma_plus_sq,
        )


def dgcz_sum_source(cov: CovarianceMatrix4, pairing: str = MINUS_PLUS, angles=(0.0, 0.0)) -> DgczReport:
    """DGCZ sum of ``cov`` as given, without further propagation."""
    if pairing not in _PAIRINGS:
        raise InvalidParameterError(f"unknown pairing {pairing!r}")
    rho_vec, q_vec = _PAIRINGS[pairing]
    return DgczReport.build(cov.variance(rho_vec), cov.variance(q_vec), pairing, angles)


def apply_arm_transforms(cov: CovarianceMatrix4, t_s: ArmTransform, t_i: ArmTransform) -> CovarianceMatrix4:
    """Congruence ``S V S^T`` with ``S = blockdiag(t_s, t_i)``."""
    S = np.zeros((4, 4))
    S[:2, :2] = t_s.m
    S[2:, 2:] = t_i.m
    return CovarianceMatrix4(S @ cov.matrix @ S.T, S @ cov.mean)


def rotated_dgcz(cov: CovarianceMatrix4, alpha_s: float, alpha_i: float, pairing: str = MINUS_PLUS) -> DgczReport:
    """DGCZ report after phase-space rotations, via the covariance congruence."""
    rotated = apply_arm_transforms(cov, rotation_matrix(alpha_s), rotation_matrix(alpha_i))
    return dgcz_sum_source(rotated, pairing, angles=(alpha_s, alpha_i))


def rotated_dgcz_closed_form(cov: CovarianceMatrix4, alpha_s: float, alpha_i: float) -> float:
    """``Var(rho'_-) + Var(q'_+)`` expressed through source-plane moments.

    Works for any Gaussian covariance. The anticommutator terms are
    ``<{rho_+, q_+}> - 2 <rho_+><q_+> = 2 Cov(rho_+, q_+)`` and likewise for
    the difference variables.
    """
    total = alpha_i + alpha_s
    c, s = math.cos(total), math.sin(total)
    minus_plus = cov.variance(RHO_MINUS) + cov.variance(Q_PLUS)
    plus_minus = cov.variance(RHO_PLUS) + cov.variance(Q_MINUS)
    anti_plus = 2.0 * cov.covariance(RHO_PLUS, Q_PLUS)
    anti_minus = 2.0 * cov.covariance(RHO_MINUS, Q_MINUS)
    return (
        0.5 * (1.0 + c) * minus_plus
        + 0.5 * (1.0 - c) * plus_minus
        - 0.5 * s * anti_plus
        + 0.5 * s * anti_minus
    )


def violation_threshold(summary: StateSummary) -> float:
    """``(S1 + S2 - 4) / (S1 - S2)``."""
    if summary.S1 == summary.S2:
        raise UndefinedThresholdError("S1 == S2: the threshold is undefined for a symmetric state")
    return (summary.S1 + summary.S2 - 4.0) / (summary.S1 - summary.S2)


def violation_possible(summary: StateSummary, angle_sum: float) -> bool:
    """Whether rotations with ``alpha_s + alpha_i = angle_sum`` can violate DGCZ.

    For ``S1 > S2`` this is ``cos(angle_sum) > threshold``. The inequality
    flips when ``S1 < S2``.
    """
    threshold = violation_threshold(summary)
    c = math.cos(angle_sum)
    if summary.S1 > summary.S2:
        return c > threshold
    return c < threshold


def matching_idler_angle(alpha_s: float) -> float:
    """Smallest non-negative ``alpha_i`` with ``alpha_s + alpha_i = 0 (mod 2 pi)``."""
    alpha_i = (-float(alpha_s)) % (2.0 * math.pi)
    return 0.0 if alpha_i >= 2.0 * math.pi else alpha_i


def separability_angle(params: SourceParameters) -> float:
    """Equal-arm order at which position intensity correlations vanish."""
    return math.atan(params.sigma_plus * params.sigma_minus)


def position_correlation(cov: CovarianceMatrix4, alpha_s: float, alpha_i: float) -> float:
    """``Cov(rho'_s, rho'_i)`` after rotating each arm."""
    rotated = apply_arm_transforms(cov, rotation_matrix(alpha_s), rotation_matrix(alpha_i))
    return float(rotated.matrix[0, 2])
