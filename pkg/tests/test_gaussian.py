import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from transent.exceptions import InvalidGridError, InvalidParameterError
from transent.gaussian import (
    ComplexGaussian1D,
    CovarianceMatrix4,
    GridSpec,
    SourceParameters,
    TwoPhotonAmplitude,
    frft_gaussian_1d,
    make_source_state,
    momentum_amplitude,
    position_amplitude,
    real_part_schmidt_number,
    schmidt_number,
    source_schmidt_number,
)

widths = st.floats(min_value=1e-3, max_value=1e3)


def frft_quadrature(g, alpha, xs, half=40.0, n=200001):
    """Direct quadrature of the FRFT kernel, valid for 0 < alpha < pi."""
    y = np.linspace(-half, half, n)
    dy = y[1] - y[0]
    cot, csc = 1.0 / math.tan(alpha), 1.0 / math.sin(alpha)
    pref = cmath.exp(-1j * (math.pi / 4 - alpha / 2)) / math.sqrt(2 * math.pi * math.sin(alpha))
    pref *= cmath.exp(-0.5j * alpha)
    f = g(y)
    return np.array([pref * np.sum(np.exp(1j * (cot * (x * x + y * y) / 2 - x * y * csc)) * f) * dy for x in xs])


class TestSourceParameters:
    def test_rejects_nonpositive(self):
        with pytest.raises(InvalidParameterError):
            SourceParameters(0.0, 0.006)
        with pytest.raises(InvalidParameterError):
            SourceParameters(47.0, -1.0)
        with pytest.raises(InvalidParameterError):
            SourceParameters(float("nan"), 1.0)

    def test_entangled_flag(self):
        assert SourceParameters(47.0, 0.006).is_entangled
        assert not SourceParameters(1.0, 1.0).is_entangled


class TestSourceState:
    def test_nominal_state_moments(self, source_cov):
        v = source_cov.matrix
        assert v[0, 0] == pytest.approx((47.0 + 0.006) / 4)
        assert v[0, 2] == pytest.approx((47.0 - 0.006) / 4)
        assert v[1, 1] == pytest.approx((1 / 47.0 + 1 / 0.006) / 4)
        assert v[1, 3] == pytest.approx((1 / 47.0 - 1 / 0.006) / 4)
        assert source_cov.variance([1, 0, 1, 0]) == pytest.approx(47.0)
        assert source_cov.variance([-1, 0, 1, 0]) == pytest.approx(0.006)

    def test_matches_sampled_amplitude(self, params):
        # second moments of |psi|^2 on a grid agree with the covariance
        s = np.linspace(-25, 25, 801)
        rs, ri = np.meshgrid(s, s, indexing="ij")
        p = np.abs(position_amplitude(params, rs, ri)) ** 2
        d = s[1] - s[0]
        assert np.sum(p) * d * d == pytest.approx(1.0, rel=1e-6)
        cov = make_source_state(params).matrix
        assert np.sum(rs * ri * p) * d * d == pytest.approx(cov[0, 2], rel=1e-4)

    def test_momentum_amplitude_is_fourier_transform(self):
        # FFT oracle with a modest ratio so the grid resolves both widths
        params = SourceParameters(4.0, 0.25)
        n, half = 256, 16.0
        x = np.linspace(-half, half, n, endpoint=False)
        dx = x[1] - x[0]
        rs, ri = np.meshgrid(x, x, indexing="ij")
        psi = position_amplitude(params, rs, ri)
        spec = np.fft.fftshift(np.fft.fft2(np.fft.ifftshift(psi))) * dx * dx / (2 * math.pi)
        q = np.fft.fftshift(np.fft.fftfreq(n, dx)) * 2 * math.pi
        qs, qi = np.meshgrid(q, q, indexing="ij")
        expected = momentum_amplitude(params, qs, qi)
        assert np.max(np.abs(spec - expected)) < 1e-8

    def test_covariance_validation(self):
        with pytest.raises(InvalidParameterError):
            CovarianceMatrix4(np.diag([1.0, 1.0, 1.0, 1.0]) + np.eye(4, k=1))
        with pytest.raises(InvalidParameterError):
            CovarianceMatrix4(np.diag([0.1, 0.1, 1.0, 1.0]))
        with pytest.raises(InvalidParameterError):
            CovarianceMatrix4(-np.eye(4))

    def test_matrix_is_read_only(self, source_cov):
        with pytest.raises(ValueError):
            source_cov.matrix[0, 0] = 1.0

    @settings(max_examples=100, deadline=None)
    @given(widths, widths)
    def test_source_state_is_physical(self, sp, sm):
        cov = make_source_state(SourceParameters(sp, sm))
        eig = np.linalg.eigvalsh(cov.matrix)
        assert eig.min() > -1e-9 * eig.max()
        assert cov.matrix[0, 0] * cov.matrix[1, 1] >= 0.25 * (1 - 1e-9)


class TestFrft:
    @pytest.mark.parametrize("alpha", [0.3, 1.2, math.pi / 2, 2.5, 3.0])
    def test_matches_kernel_quadrature(self, alpha):
        g = ComplexGaussian1D.normalized(0.3 + 0.1j)
        xs = np.array([-1.5, -0.2, 0.0, 0.7, 2.0])
        assert np.max(np.abs(frft_gaussian_1d(g, alpha)(xs) - frft_quadrature(g, alpha, xs))) < 1e-9

    @pytest.mark.parametrize("alpha", [1.0, 3.0, 4.0, 5.5, 7.0, 12.0])
    def test_ground_state_eigenvalue(self, alpha):
        g0 = ComplexGaussian1D.normalized(0.5)
        out = frft_gaussian_1d(g0, alpha)
        assert out.a == pytest.approx(0.5)
        assert out.norm / g0.norm == pytest.approx(cmath.exp(-0.5j * alpha))

    def test_order_zero_is_identity(self):
        g = ComplexGaussian1D.normalized(0.7 - 0.2j)
        out = frft_gaussian_1d(g, 0.0)
        assert out.a == pytest.approx(g.a)
        assert out.norm == pytest.approx(g.norm)

    def test_quarter_turn_of_width(self):
        # variance sigma^2 maps to 1 / (4 sigma^2) under the ordinary Fourier transform
        g = ComplexGaussian1D.from_width(0.8)
        assert frft_gaussian_1d(g, math.pi / 2).intensity_variance() == pytest.approx(1 / (4 * 0.64))

    @settings(max_examples=60, deadline=None)
    @given(
        st.floats(0.05, 5.0),
        st.floats(-3.0, 3.0),
        st.floats(0.0, 2 * math.pi),
        st.floats(0.0, 2 * math.pi),
    )
    def test_orders_add_and_norm_is_kept(self, re_a, im_a, a1, a2):
        g = ComplexGaussian1D.normalized(complex(re_a, im_a))
        once = frft_gaussian_1d(g, a1 + a2)
        twice = frft_gaussian_1d(frft_gaussian_1d(g, a1), a2)
        assert once.a == pytest.approx(twice.a, rel=1e-7, abs=1e-9)
        assert once.norm == pytest.approx(twice.norm, rel=1e-7, abs=1e-9)
        assert once.norm_squared() == pytest.approx(1.0, rel=1e-9)

    def test_rejects_non_decaying(self):
        with pytest.raises(InvalidParameterError):
            ComplexGaussian1D.normalized(-0.1 + 1j)


class TestTwoPhotonAmplitude:
    def test_source_matches_position_amplitude(self, params):
        amp = TwoPhotonAmplitude.from_source(params)
        x = np.linspace(-5, 5, 11)
        assert np.allclose(amp(x[:, None], x[None, :]), position_amplitude(params, x[:, None], x[None, :]))

    def test_product_state_propagates_per_arm(self):
        # uncorrelated arms: the two-mode rule reduces to the one-mode one
        params = SourceParameters(2.0, 2.0)
        g = ComplexGaussian1D.from_width(1.0)
        amp = TwoPhotonAmplitude.from_source(params).propagate(0.7, 2.1)
        x = np.linspace(-3, 3, 7)
        expected = frft_gaussian_1d(g, 0.7)(x)[:, None] * frft_gaussian_1d(g, 2.1)(x)[None, :]
        assert np.allclose(amp(x[:, None], x[None, :]), expected)

    def test_quarter_turn_gives_momentum_amplitude(self, params):
        amp = TwoPhotonAmplitude.from_source(params).propagate(math.pi / 2, math.pi / 2)
        q = np.linspace(-0.5, 0.5, 9)
        ref = momentum_amplitude(params, q[:, None], q[None, :])
        # the two-arm FRFT carries the global phase exp(-i pi / 2)
        assert np.allclose(amp(q[:, None], q[None, :]), -1j * ref)

    def test_intensity_covariance_matches_rotation(self, params):
        alpha = 0.9
        amp = TwoPhotonAmplitude.from_source(params).propagate(alpha, alpha)
        # |psi|^2 = exp(-x^T Im(T) x), a normal density with covariance (2 Im T)^-1
        cov = np.linalg.inv(2.0 * np.imag(amp.T))
        c, s = math.cos(alpha), math.sin(alpha)
        v = make_source_state(params).matrix
        var_s = c * c * v[0, 0] + s * s * v[1, 1]
        cov_si = c * c * v[0, 2] + s * s * v[1, 3]
        assert cov[0, 0] == pytest.approx(var_s)
        assert cov[0, 1] == pytest.approx(cov_si)


class TestSchmidt:
    def test_svd_matches_closed_form(self):
        params = SourceParameters(4.0, 0.25)
        x = np.linspace(-12, 12, 400)
        k = schmidt_number(position_amplitude(params, x[:, None], x[None, :]))
        assert k == pytest.approx(source_schmidt_number(params), rel=1e-6)
        assert source_schmidt_number(params) == pytest.approx(0.5 * (4.0 + 0.25))

    def test_product_state_has_unit_number(self):
        params = SourceParameters(1.0, 1.0)
        x = np.linspace(-8, 8, 128)
        assert schmidt_number(position_amplitude(params, x[:, None], x[None, :])) == pytest.approx(1.0)

    def test_zero_amplitude(self):
        with pytest.raises(InvalidGridError):
            schmidt_number(np.zeros((8, 8)))

    def test_grid_minimum(self):
        with pytest.raises(InvalidGridError):
            GridSpec(4)
        with pytest.raises(InvalidGridError):
            GridSpec(16, half_width=-1.0)

    def test_modulus_factorizes_at_separability_angle(self, params):
        alpha = math.atan(params.sigma_plus * params.sigma_minus)
        assert real_part_schmidt_number(params, alpha, GridSpec(128)) == pytest.approx(1.0, abs=1e-6)
        assert real_part_schmidt_number(params, 0.0, GridSpec(128)) > 10

    def test_part_argument(self, params):
        with pytest.raises(ValueError):
            real_part_schmidt_number(params, 0.3, part="imag")
        assert real_part_schmidt_number(params, 0.3, GridSpec(64), part="real") >= 1.0
