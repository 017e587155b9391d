import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from transent.exceptions import AdditivityError, AngleRangeError, InvalidParameterError
from transent.optics import (
    ArmTransform,
    DimensionScale,
    LensSystem,
    OpticalElement,
    arm_transform,
    classify_rotation,
    compose_systems,
    frft_chain,
    frft_lens_system,
    from_dimensionless,
    perturb_positions,
    rotation_matrix,
    to_dimensionless,
    worst_case_pair,
)

F = 0.25
F_PRIME = 0.25 / math.sqrt(2.0)


def ray_matrix(system):
    """Physical ABCD matrix in metres and radians, multiplied out by hand."""
    m = np.eye(2)
    for e in system.elements:
        if e.kind == "free":
            el = np.array([[1.0, e.length], [0.0, 1.0]])
        else:
            el = np.array([[1.0, 0.0], [-1.0 / e.length, 1.0]])
        m = el @ m
    return m


class TestDimensionScale:
    def test_slit_in_dimensionless_units(self, k):
        scale = DimensionScale(k, F_PRIME)
        assert scale.factor == pytest.approx(6624.0, rel=1e-3)
        assert to_dimensionless(100e-6, scale) == pytest.approx(0.6624, rel=1e-3)
        assert from_dimensionless(to_dimensionless(3e-4, scale), scale) == pytest.approx(3e-4)

    def test_rejects_bad_scale(self):
        with pytest.raises(InvalidParameterError):
            DimensionScale(0.0, 1.0)
        with pytest.raises(InvalidParameterError):
            DimensionScale(1.0, float("inf"))


class TestLensSystem:
    def test_single_lens_placement(self, k):
        alpha = 3 * math.pi / 4
        system = frft_lens_system(alpha, F, k=k)
        z = 2 * F * math.sin(alpha / 2) ** 2
        assert [e.kind for e in system.elements] == ["free", "lens", "free"]
        assert system.elements[0].length == pytest.approx(z)
        assert system.scale.f_prime == pytest.approx(F * math.sin(alpha))

    @pytest.mark.parametrize("alpha", np.linspace(0.05, math.pi - 0.05, 50))
    def test_rotation_over_grid(self, alpha, k):
        t = arm_transform(frft_lens_system(alpha, F, k=k))
        assert classify_rotation(t) == pytest.approx(alpha, abs=1e-9)

    def test_dimensionless_matrix_agrees_with_ray_matrix(self, k):
        system = frft_lens_system(1.1, F, k=k)
        fp = system.scale.f_prime
        s = np.diag([1.0, fp])  # (x, theta) -> (rho, q) up to the common sqrt(k/f')
        expected = s @ ray_matrix(system) @ np.linalg.inv(s)
        assert np.allclose(arm_transform(system).m, expected)

    def test_endpoints(self, k):
        identity = frft_lens_system(0.0, F, k=k, f_prime=F_PRIME)
        assert np.allclose(arm_transform(identity).m, np.eye(2))
        imaging = frft_lens_system(math.pi, F, k=k, f_prime=F_PRIME)
        m = arm_transform(imaging).m
        # positions are inverted exactly; a quadratic phase remains
        assert m[0, 0] == pytest.approx(-1.0) and m[0, 1] == pytest.approx(0.0, abs=1e-12)
        assert classify_rotation(arm_transform(imaging)) is None
        with pytest.raises(InvalidParameterError):
            frft_lens_system(math.pi, F, k=k)

    def test_range_and_additivity_errors(self, k):
        with pytest.raises(AngleRangeError):
            frft_lens_system(3.5, F, k=k)
        with pytest.raises(AdditivityError):
            frft_lens_system(1.0, F, k=k, f_prime=0.1)
        a = frft_lens_system(1.0, F, k=k)
        b = frft_lens_system(1.0, 0.3, k=k)
        with pytest.raises(AdditivityError):
            compose_systems([a, b])

    def test_three_stage_split_of_five_quarters(self, k):
        part = 5 * math.pi / 12
        stages = [frft_lens_system(part, F_PRIME / math.sin(part), k=k) for _ in range(3)]
        t = arm_transform(compose_systems(stages))
        assert classify_rotation(t) == pytest.approx(5 * math.pi / 4, abs=1e-9)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.01, 3.13), st.floats(0.01, 3.13))
    def test_composition_adds_orders(self, a1, a2):
        k = 2 * math.pi / 810e-9
        fp = 0.2
        s1 = frft_lens_system(a1, fp / math.sin(a1), k=k)
        s2 = frft_lens_system(a2, fp / math.sin(a2), k=k)
        t = arm_transform(compose_systems([s1, s2]))
        assert np.allclose(t.m, rotation_matrix(a1 + a2).m, atol=1e-9)

    @pytest.mark.parametrize("alpha,stages", [(5 * math.pi / 4, None), (5 * math.pi / 4, 3), (3.9, 2), (6.0, 4)])
    def test_chain(self, alpha, stages, k):
        system = frft_chain(alpha, F_PRIME, k=k, stages=stages)
        assert classify_rotation(arm_transform(system)) == pytest.approx(alpha % (2 * math.pi), abs=1e-9)

    def test_chain_errors(self, k):
        with pytest.raises(AngleRangeError):
            frft_chain(-0.5, F_PRIME, k=k)
        with pytest.raises(AngleRangeError):
            frft_chain(4.0, F_PRIME, k=k, stages=1)

    def test_text_round_trip(self, k):
        system = frft_chain(5 * math.pi / 4, F_PRIME, k=k, stages=3)
        again = LensSystem.from_text(system.to_text())
        assert again == system

    def test_from_text_errors(self):
        with pytest.raises(InvalidParameterError):
            LensSystem.from_text("k = 1\nfree 0.1\n")
        with pytest.raises(InvalidParameterError):
            LensSystem.from_text("k = 1\nf_prime = 0.1\nmirror 0.1\n")

    def test_element_validation(self):
        with pytest.raises(InvalidParameterError):
            OpticalElement("free", -1.0)
        with pytest.raises(InvalidParameterError):
            OpticalElement("lens", 0.0)

    def test_arm_transform_must_be_symplectic(self):
        with pytest.raises(InvalidParameterError):
            ArmTransform(np.diag([2.0, 2.0]))


class TestPerturbation:
    def test_signed_scales_every_gap(self, k):
        system = frft_lens_system(1.0, F, k=k)
        out = perturb_positions(system, 0.01, signs=[1, -1])
        assert out.elements[0].length == pytest.approx(system.elements[0].length * 1.01)
        assert out.elements[2].length == pytest.approx(system.elements[2].length * 0.99)
        assert out.elements[1] == system.elements[1]

    def test_zero_epsilon_is_identity(self, k):
        system = frft_lens_system(1.0, F, k=k)
        assert perturb_positions(system, 0.0, mode="random", seed=3) == system

    def test_random_is_seeded(self, k):
        system = frft_chain(5 * math.pi / 4, F_PRIME, k=k, stages=3)
        a = perturb_positions(system, 0.01, mode="random", seed=7)
        b = perturb_positions(system, 0.01, mode="random", seed=7)
        assert a == b

    def test_worst_case_matches_brute_force(self, k):
        system = frft_lens_system(1.0, F, k=k)

        def objective(s):
            return arm_transform(s).m[0, 0]

        worst = perturb_positions(system, 0.05, mode="worst-case", objective=objective)
        best = max(
            objective(perturb_positions(system, 0.05, signs=p)) for p in ([1, 1], [1, -1], [-1, 1], [-1, -1])
        )
        assert objective(worst) == pytest.approx(best)

    def test_worst_case_pair(self, k):
        s = frft_lens_system(1.0, F, k=k)

        def objective(a, b):
            return arm_transform(a).m[0, 1] + arm_transform(b).m[0, 1]

        ps, pi_, value, pattern = worst_case_pair(s, s, 0.01, objective)
        assert len(pattern) == 4
        assert value >= objective(s, s)
        assert value == pytest.approx(objective(ps, pi_))

    def test_errors(self, k):
        system = frft_lens_system(1.0, F, k=k)
        with pytest.raises(InvalidParameterError):
            perturb_positions(system, -0.1)
        with pytest.raises(InvalidParameterError):
            perturb_positions(system, 0.1, signs=[1])
        with pytest.raises(InvalidParameterError):
            perturb_positions(system, 0.1, mode="worst-case")
        with pytest.raises(InvalidParameterError):
            perturb_positions(system, 0.1, mode="sideways")
