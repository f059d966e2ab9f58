import math

import numpy as np
import pytest

from doublecover.ift import (
    ChartRejected,
    align_frame,
    chart_radius,
    make_chart,
    sample_complex_ball,
    verify_chart,
)
from doublecover.polyalg import PolyC, eval_grad, normalized


def hyperbola(eps):
    return PolyC(2, {(1, 1): 1.0, (0, 0): -eps * eps})


def quadric(n):
    return PolyC(n, {tuple(2 if j == i else 0 for j in range(n)): 1.0 for i in range(n)})


class TestChartRadius:
    def test_unit_values(self):
        assert chart_radius(1.0, 1.0, 2) == pytest.approx(1.0 / 100.0)

    def test_zero_eta(self):
        with pytest.raises(ValueError):
            chart_radius(0.0, 1.0, 2)

    def test_hyperbola_vanishing_cycle(self):
        eps = 0.1
        eta = math.sqrt(2) * eps
        M = 32 * (1 + eps * eps)
        assert chart_radius(eta, M, 2) == pytest.approx(
            math.sqrt(2) * eps / (3200 * (1 + eps * eps)))


class TestAlignFrame:
    def test_axis_gradient_identity(self):
        f = align_frame(np.zeros(2, dtype=complex), np.array([0.0, 2.0], dtype=complex))
        assert np.allclose(f.matrix, np.eye(2))

    def test_first_axis_gradient(self):
        f = align_frame(np.zeros(2, dtype=complex), np.array([1.0, 0.0], dtype=complex))
        U = f.matrix
        assert np.allclose(U.conj().T @ U, np.eye(2), atol=1e-12)
        assert np.allclose(U @ np.array([0.0, 1.0]), np.array([1.0, 0.0]))

    def test_zero_gradient(self):
        with pytest.raises(ValueError):
            align_frame(np.zeros(2, dtype=complex), np.zeros(2, dtype=complex))

    def test_transverse_derivative_has_full_modulus(self):
        rng = np.random.default_rng(21)
        for _ in range(25):
            n = int(rng.integers(2, 5))
            g = rng.normal(size=n) + 1j * rng.normal(size=n)
            f = align_frame(np.zeros(n, dtype=complex), g)
            U = f.matrix
            assert np.allclose(U.conj().T @ U, np.eye(n), atol=1e-12)
            gf = g @ U  # frame-coordinate derivative of the linear part
            assert abs(gf[-1]) == pytest.approx(np.linalg.norm(g), rel=1e-12)
            assert np.linalg.norm(gf[:-1]) < 1e-10 * np.linalg.norm(g)
            assert U[-1, -1].imag == pytest.approx(0.0, abs=1e-12)
            assert U[-1, -1].real >= -1e-12


class TestSolve:
    def test_center_on_level_set(self):
        p, c = normalized(quadric(2), 1.0)
        chart = make_chart(p, c, np.array([0.0, 1.0], dtype=complex))
        phi = chart.solve(np.zeros((1, 1), dtype=complex))
        assert abs(phi[0]) < 1e-12

    def test_quadric_closed_form(self):
        p = quadric(2)
        chart = make_chart(p, 1.0, np.array([0.0, 1.0], dtype=complex), theta=0.05)
        vbar = np.array([[0.01]], dtype=complex)
        phi = chart.solve(vbar)
        # frame puts the transverse axis along +z2, so 1 + phi = sqrt(1 - 0.0001)
        assert (1 + phi[0]) == pytest.approx(math.sqrt(1 - 0.0001), rel=1e-12)
        z = chart.embed(vbar, phi)
        assert abs(p.eval(z)[0] - 1.0) < 1e-12

    def test_outside_ball_rejected(self):
        p = quadric(2)
        chart = make_chart(p, 1.0, np.array([0.0, 1.0], dtype=complex), theta=0.05)
        with pytest.raises(ValueError):
            chart.solve(np.array([[0.06]], dtype=complex))

    def test_linear_function_phi_zero(self):
        p = PolyC(2, {(0, 1): 1.0})  # f = z2
        chart = make_chart(p, 0.0, np.zeros(2, dtype=complex), theta=0.3)
        rng = np.random.default_rng(3)
        vbar = sample_complex_ball(rng, 1, 0.3, 64)
        phi, slope, res = chart.phi_and_slope(vbar)
        assert np.abs(phi).max() < 1e-14
        assert slope.max() < 1e-14
        cert = verify_chart(chart, samples=256, rng=rng)
        assert cert.passed and cert.min_distortion == pytest.approx(1.0)


class TestVerify:
    def test_hyperbola_chart_passes(self):
        eps = 0.1
        p, c = normalized(hyperbola(eps), 0.0)
        chart = make_chart(p, c, np.array([eps, eps], dtype=complex))
        cert = verify_chart(chart, samples=1000, rng=np.random.default_rng(5))
        assert cert.passed
        assert cert.max_slope <= 1 / 49
        assert cert.max_tube_ratio <= 1 / 49
        assert cert.max_residual <= 1e-10
        assert cert.min_distortion >= 0.99

    def test_quadric_chart_passes(self):
        p, c = normalized(quadric(2), 0.01)
        chart = make_chart(p, c, np.array([0.0, 0.1], dtype=complex))
        cert = verify_chart(chart, samples=1000, rng=np.random.default_rng(6))
        assert cert.passed

    def test_oversized_chart_rejected(self):
        eps = 0.1
        p, c = normalized(hyperbola(eps), 0.0)
        base = np.array([eps, eps], dtype=complex)
        honest = make_chart(p, c, base)
        # inflate far beyond the certified radius: the slope bound must break
        chart = make_chart(p, c, base, theta=900 * honest.theta)
        cert = verify_chart(chart, samples=600, rng=np.random.default_rng(7))
        assert not cert.passed
        assert cert.max_slope > 1 / 49 or not cert.uniqueness_ok

    def test_lipschitz_propagation(self):
        eps = 0.05
        p, c = normalized(hyperbola(eps), 0.0)
        chart = make_chart(p, c, np.array([eps, eps], dtype=complex))
        rng = np.random.default_rng(8)
        a = sample_complex_ball(rng, 1, chart.theta, 200)
        b = sample_complex_ball(rng, 1, chart.theta, 200)
        pa = chart.solve(a)
        pb = chart.solve(b)
        gap = np.abs(pa - pb)
        dist = np.linalg.norm(a - b, axis=-1)
        assert (gap <= dist / 49 + 1e-15).all()

    def test_residual_property(self):
        for eps in (0.1, 0.05):
            p, c = normalized(hyperbola(eps), 0.0)
            chart = make_chart(p, c, np.array([eps, eps], dtype=complex))
            rng = np.random.default_rng(9)
            vbar = sample_complex_ball(rng, 1, chart.theta, 1000)
            z = chart.graph_points(vbar)
            assert np.abs(p.eval(z) - c).max() <= 1e-10


class TestMembership:
    def test_on_graph_points_detected(self):
        p, c = normalized(quadric(2), 1.0)
        chart = make_chart(p, c, np.array([0.0, 1.0], dtype=complex))
        rng = np.random.default_rng(10)
        vbar = sample_complex_ball(rng, 1, chart.theta / 4, 32)
        z = chart.graph_points(vbar)
        mask, _, _ = chart.frame_membership(z, scale=chart.theta / 4)
        assert mask.all()
        far = z + 0.5
        mask2, _, _ = chart.frame_membership(far, scale=chart.theta / 4)
        assert not mask2.any()
