"""FRFT lens systems as phase-space rotations.

Ray-transfer matrices act on the dimensionless column ``(rho, q)`` where
``rho = sqrt(k/f') x`` and ``q = sqrt(f'/k) q_bar`` for physical transverse
position ``x`` and wavevector ``q_bar``. In these units free propagation over
``z`` is ``[[1, z/f'], [0, 1]]`` and a thin lens of focal length ``f`` is
``[[1, 0], [-f'/f, 1]]``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import AdditivityError, AngleRangeError, InvalidParameterError

FREE = "free"
LENS = "lens"
_ANGLE_SLACK = 1e-12


@dataclass(frozen=True)
class ArmTransform:
    """Real 2x2 symplectic map acting on one arm's ``(rho, q)``."""

    m: np.ndarray

    def __post_init__(self):
        m = np.array(self.m, dtype=float)
        if m.shape != (2, 2):
            raise InvalidParameterError(f"arm transform must be 2x2, got {m.shape}")
        if abs(np.linalg.det(m) - 1.0) > 1e-10:
            raise InvalidParameterError(f"arm transform is not symplectic: det = {np.linalg.det(m)!r}")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    def __matmul__(self, other: "ArmTransform") -> "ArmTransform":
        return ArmTransform(self.m @ other.m)


@dataclass(frozen=True)
class DimensionScale:
    """Wavenumber ``k`` (1/m) of the detected field and scale length ``f_prime`` (m)."""

    k: float
    f_prime: float

    def __post_init__(self):
        for name in ("k", "f_prime"):
            value = float(getattr(self, name))
            if not (math.isfinite(value) and value > 0.0):
                raise InvalidParameterError(f"{name} must be positive and finite, got {value!r}")
            object.__setattr__(self, name, value)

    @property
    def factor(self) -> float:
        """``sqrt(k / f')``, metres to dimensionless position."""
        return math.sqrt(self.k / self.f_prime)

    def matches(self, other: "DimensionScale", rtol: float = 1e-9) -> bool:
        return math.isclose(self.k, other.k, rel_tol=rtol) and math.isclose(
            self.f_prime, other.f_prime, rel_tol=rtol
        )


def to_dimensionless(x_bar, scale: DimensionScale):
    """Physical transverse position (m) to dimensionless ``rho``."""
    out = np.multiply(x_bar, scale.factor)
    return float(out) if np.ndim(out) == 0 else out


def from_dimensionless(rho, scale: DimensionScale):
    out = np.divide(rho, scale.factor)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class OpticalElement:
    kind: str
    length: float

    def __post_init__(self):
        if self.kind not in (FREE, LENS):
            raise InvalidParameterError(f"unknown element kind {self.kind!r}")
        length = float(self.length)
        if not math.isfinite(length):
            raise InvalidParameterError("element length must be finite")
        if self.kind == FREE and length < 0.0:
            raise InvalidParameterError("free-space length must be >= 0")
        if self.kind == LENS and length == 0.0:
            raise InvalidParameterError("thin-lens focal length must be nonzero")
        object.__setattr__(self, "length", length)

    def matrix(self, f_prime: float) -> np.ndarray:
        if self.kind == FREE:
            return np.array([[1.0, self.length / f_prime], [0.0, 1.0]])
        return np.array([[1.0, 0.0], [-f_prime / self.length, 1.0]])


@dataclass(frozen=True)
class LensSystem:
    """Ordered optical elements, first element nearest the source."""

    elements: tuple
    scale: DimensionScale

    def __post_init__(self):
        elements = tuple(self.elements)
        if not elements:
            raise InvalidParameterError("a lens system needs at least one element")
        if not all(isinstance(e, OpticalElement) for e in elements):
            raise InvalidParameterError("elements must be OpticalElement instances")
        object.__setattr__(self, "elements", elements)

    @property
    def n_gaps(self) -> int:
        return sum(1 for e in self.elements if e.kind == FREE)

    def to_text(self) -> str:
        lines = [f"k = {self.scale.k!r}", f"f_prime = {self.scale.f_prime!r}"]
        lines += [f"{e.kind} {e.length!r}" for e in self.elements]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "LensSystem":
        """Parse the format written by :meth:`to_text`.

        One item per line: ``k = <1/m>``, ``f_prime = <m>``, then elements as
        ``free <m>`` or ``lens <m>``. Blank lines and ``#`` comments are ignored.
        """
        k = f_prime = None
        elements = []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" in line:
                key, value = (part.strip() for part in line.split("=", 1))
                if key == "k":
                    k = float(value)
                elif key == "f_prime":
                    f_prime = float(value)
                else:
                    raise InvalidParameterError(f"unknown lens-system key {key!r}")
                continue
            parts = line.split()
            if len(parts) != 2:
                raise InvalidParameterError(f"cannot parse element line {raw!r}")
            elements.append(OpticalElement(parts[0], float(parts[1])))
        if k is None or f_prime is None:
            raise InvalidParameterError("lens system text must define k and f_prime")
        return cls(tuple(elements), DimensionScale(k, f_prime))


def rotation_matrix(alpha: float) -> ArmTransform:
    """Phase-space rotation ``rho' = cos a rho + sin a q``, ``q' = -sin a rho + cos a q``."""
    c, s = math.cos(alpha), math.sin(alpha)
    return ArmTransform(np.array([[c, s], [-s, c]]))


def arm_transform(system: LensSystem) -> ArmTransform:
    """Product of the element matrices; later elements multiply on the left."""
    m = np.eye(2)
    for element in system.elements:
        m = element.matrix(system.scale.f_prime) @ m
    return ArmTransform(m)


def frft_lens_system(alpha: float, f: float, *, k: float, f_prime: float | None = None) -> LensSystem:
    """Single-lens FRFT system ``[free z, lens f, free z]`` with ``z = 2 f sin^2(alpha/2)``.

    Orders must lie in ``[0, pi]``; larger orders are built with
    :func:`frft_chain` or :func:`compose_systems`. At the endpoints ``f sin(alpha)``
    vanishes and ``f_prime`` has to be given explicitly. ``alpha = 0`` returns a
    zero-length free space (identity). ``alpha = pi`` is the 2f-2f imaging
    arrangement, which inverts positions exactly but leaves a residual quadratic
    phase, so it is not a pure rotation.
    """
    alpha = float(alpha)
    if not (-_ANGLE_SLACK <= alpha <= math.pi + _ANGLE_SLACK):
        raise AngleRangeError(
            f"a single lens system realizes orders in [0, pi], got {alpha!r}; compose several"
        )
    alpha = min(max(alpha, 0.0), math.pi)
    if not f > 0.0:
        raise InvalidParameterError(f"focal length must be positive, got {f!r}")
    natural = f * math.sin(alpha)
    endpoint = alpha in (0.0, math.pi) or natural <= 1e-12 * f
    if endpoint:
        if f_prime is None:
            raise InvalidParameterError("f sin(alpha) vanishes at this order; pass f_prime explicitly")
        scale = DimensionScale(k, f_prime)
        if alpha < math.pi / 2:
            return LensSystem((OpticalElement(FREE, 0.0),), scale)
        return LensSystem(
            (OpticalElement(FREE, 2.0 * f), OpticalElement(LENS, f), OpticalElement(FREE, 2.0 * f)),
            scale,
        )
    if f_prime is not None and not math.isclose(f_prime, natural, rel_tol=1e-9):
        raise AdditivityError(f"f_prime={f_prime!r} disagrees with f sin(alpha)={natural!r}")
    z = 2.0 * f * math.sin(alpha / 2.0) ** 2
    return LensSystem(
        (OpticalElement(FREE, z), OpticalElement(LENS, f), OpticalElement(FREE, z)),
        DimensionScale(k, natural),
    )


def compose_systems(systems) -> LensSystem:
    """Concatenate lens systems that share the same ``f'``."""
    systems = list(systems)
    if not systems:
        raise InvalidParameterError("nothing to compose")
    first = systems[0].scale
    for other in systems[1:]:
        if not other.scale.matches(first):
            raise AdditivityError(
                f"f' mismatch: {first.f_prime!r} vs {other.scale.f_prime!r} (k {first.k!r} vs {other.scale.k!r})"
            )
    if len(systems) == 1:
        return systems[0]
    elements = tuple(e for s in systems for e in s.elements)
    return LensSystem(elements, first)


def frft_chain(
    alpha: float,
    f_prime: float,
    *,
    k: float,
    stages: int | None = None,
    imaging_focal: float | None = None,
) -> LensSystem:
    """FRFT of any non-negative order from ``stages`` equal single-lens systems.

    Every stage keeps the same ``f'``, so orders add. The default stage count
    is the smallest one keeping each stage below ``pi``. A stage of exactly
    ``pi`` uses 2f-2f imaging with lens ``imaging_focal`` (default ``f'``).
    """
    alpha = float(alpha)
    if alpha < -_ANGLE_SLACK or not math.isfinite(alpha):
        raise AngleRangeError(f"order must be non-negative, got {alpha!r}")
    alpha = max(alpha, 0.0)
    if stages is None:
        stages = max(1, math.ceil(alpha / math.pi - 1e-12))
    stages = int(stages)
    if stages < 1:
        raise InvalidParameterError("stages must be >= 1")
    part = alpha / stages
    if part > math.pi + _ANGLE_SLACK:
        raise AngleRangeError(f"{stages} stage(s) cannot realize order {alpha!r}")
    if math.isclose(part, math.pi, abs_tol=_ANGLE_SLACK):
        f = imaging_focal if imaging_focal is not None else f_prime
        one = frft_lens_system(math.pi, f, k=k, f_prime=f_prime)
    elif part <= _ANGLE_SLACK:
        one = frft_lens_system(0.0, f_prime, k=k, f_prime=f_prime)
    else:
        one = frft_lens_system(part, f_prime / math.sin(part), k=k)
    return compose_systems([one] * stages)


def classify_rotation(t: ArmTransform, tol: float = 1e-9) -> float | None:
    """Order ``alpha`` in ``[0, 2 pi)`` with ``t ~ R(alpha)``, or None if not a rotation."""
    m = t.m
    alpha = math.atan2(0.5 * (m[0, 1] - m[1, 0]), 0.5 * (m[0, 0] + m[1, 1])) % (2.0 * math.pi)
    if np.max(np.abs(m - rotation_matrix(alpha).m)) > tol:
        return None
    if alpha >= 2.0 * math.pi:
        alpha = 0.0
    return alpha


def _scaled(system: LensSystem, factors) -> LensSystem:
    factors = iter(factors)
    elements = tuple(
        OpticalElement(FREE, e.length * next(factors)) if e.kind == FREE else e for e in system.elements
    )
    return LensSystem(elements, system.scale)


def sign_patterns(n: int):
    """All ``(+/-1)^n`` patterns in lexicographic order, ``-1`` first."""
    return itertools.product((-1, 1), repeat=n)


def perturb_positions(
    system: LensSystem,
    epsilon: float,
    mode: str = "signed",
    *,
    signs=None,
    seed: int | None = None,
    objective=None,
) -> LensSystem:
    """Scale every free-space length by ``1 + s * epsilon``.

    ``mode`` selects the signs ``s``:

    * ``"signed"``: the given ``signs`` sequence (default all ``+1``).
    * ``"random"``: independent fair signs from ``seed``.
    * ``"worst-case"``: the pattern maximizing ``objective(system) -> float``,
      searched exhaustively; ties go to the lexicographically first pattern.
    """
    if not epsilon >= 0.0:
        raise InvalidParameterError(f"epsilon must be >= 0, got {epsilon!r}")
    n = system.n_gaps
    if mode == "signed":
        pattern = np.ones(n) if signs is None else np.asarray(signs, dtype=float)
        if pattern.shape != (n,):
            raise InvalidParameterError(f"expected {n} signs, got {pattern.shape}")
    elif mode == "random":
        rng = np.random.default_rng(seed)
        pattern = rng.choice([-1.0, 1.0], size=n)
    elif mode == "worst-case":
        if objective is None:
            raise InvalidParameterError("worst-case mode needs an objective")
        best, best_value = None, -math.inf
        for candidate in sign_patterns(n):
            value = objective(_scaled(system, 1.0 + epsilon * np.asarray(candidate)))
            if value > best_value:
                best, best_value = candidate, value
        pattern = np.asarray(best, dtype=float)
    else:
        raise InvalidParameterError(f"unknown perturbation mode {mode!r}")
    return _scaled(system, 1.0 + epsilon * pattern)


def worst_case_pair(system_s: LensSystem, system_i: LensSystem, epsilon: float, objective):
    """Joint worst case over the free-space gaps of both arms.

    ``objective(system_s, system_i) -> float`` is maximized over all sign
    patterns of the concatenated gaps (signal first). Returns
    ``(perturbed_s, perturbed_i, value, pattern)``.
    """
    if not epsilon >= 0.0:
        raise InvalidParameterError(f"epsilon must be >= 0, got {epsilon!r}")
    n_s, n_i = system_s.n_gaps, system_i.n_gaps
    best = None
    for pattern in sign_patterns(n_s + n_i):
        p = 1.0 + epsilon * np.asarray(pattern, dtype=float)
        ps, pi_ = _scaled(system_s, p[:n_s]), _scaled(system_i, p[n_s:])
        value = objective(ps, pi_)
        if best is None or value > best[2]:
            best = (ps, pi_, value, tuple(pattern))
    return best
