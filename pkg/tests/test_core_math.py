import math

import numpy as np
import pytest

from twistedhom import DomainError, EvaluationError
from twistedhom.core_math import bessel_j, bessel_j_zero, gauss_legendre, integrate_2d_polar, polar_nodes

from oracles import bessel_series, trapezoid


def test_bessel_trivial_values():
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(3, 0.0) == 0.0
    assert bessel_j(-2, 1.7) == bessel_j(2, 1.7)


def test_bessel_matches_series_oracle_point():
    assert abs(bessel_j(1, 2.5) - bessel_series(1, 2.5)) < 1e-12


@pytest.mark.parametrize("m", [0, 1, 2, 5, 10, -3, -10])
def test_bessel_against_series_grid(m, backend):
    for x in np.linspace(0.05, 30.0, 37):
        assert abs(bessel_j(m, x) - bessel_series(m, x)) < 1e-12


def test_bessel_high_order_small_argument():
    for m in (20, 40, 60):
        for x in (0.5, 5.0, 25.0, 49.0):
            assert abs(bessel_j(m, x) - bessel_series(m, x, terms=120)) < 1e-12


def test_bessel_large_argument_asymptotics():
    # Hankel asymptotic form is accurate to ~1e-9 relative at these arguments
    for m in (0, 1, 4):
        for x in (500.0, 2000.0, 9999.5):
            mu = 4 * m * m
            chi = x - (0.5 * m + 0.25) * math.pi
            p = 1 - (mu - 1) * (mu - 9) / (2 * (8 * x) ** 2)
            q = (mu - 1) / (8 * x)
            ref = math.sqrt(2 / (math.pi * x)) * (p * math.cos(chi) - q * math.sin(chi))
            assert abs(bessel_j(m, x) - ref) < 1e-8


def test_bessel_negative_argument_parity():
    for m in range(0, 6):
        assert bessel_j(m, -3.3) == pytest.approx((-1) ** m * bessel_j(m, 3.3), abs=0, rel=0)


def test_bessel_array_shape_preserved():
    x = np.linspace(0, 10, 12).reshape(3, 4)
    out = bessel_j(2, x)
    assert out.shape == (3, 4)
    assert isinstance(bessel_j(2, 1.0), float)


@pytest.mark.parametrize("m, x", [(61, 1.0), (-61, 1.0), (1.5, 1.0), (0, float("nan")), (0, float("inf")), (0, 1e4 + 1)])
def test_bessel_domain_errors(m, x):
    with pytest.raises(DomainError):
        bessel_j(m, x)


def test_bessel_zero_values():
    assert bessel_j_zero(0) == pytest.approx(2.404825557695773, abs=1e-12)
    assert bessel_j_zero(1) == pytest.approx(3.831705970207512, abs=1e-12)
    assert bessel_j_zero(3, 2) == pytest.approx(9.761023129981670, abs=1e-12)


def test_gauss_legendre_two_point():
    rule = gauss_legendre(2)
    assert np.allclose(rule.nodes, [-1 / math.sqrt(3), 1 / math.sqrt(3)], atol=1e-15)
    assert np.allclose(rule.weights, [1.0, 1.0], atol=1e-15)


def test_gauss_legendre_polynomial_exactness():
    rule = gauss_legendre(5)
    assert abs(np.sum(rule.weights * rule.nodes**8) - 2 / 9) < 1e-13
    for order in (3, 8, 17, 40):
        rule = gauss_legendre(order)
        for k in range(2 * order):
            exact = 0.0 if k % 2 else 2.0 / (k + 1)
            assert abs(np.sum(rule.weights * rule.nodes**k) - exact) < 1e-12


def test_gauss_legendre_against_trapezoid_oracle():
    rule = gauss_legendre(64)
    gl = float(np.sum(rule.weights * np.exp(-rule.nodes**2)))
    ref = trapezoid(lambda x: np.exp(-x * x), -1.0, 1.0, 1_000_000)
    assert abs(gl - ref) < 1e-12


@pytest.mark.parametrize("order", [2, 3, 10, 64, 501, 2048])
def test_gauss_legendre_rule_invariants(order):
    rule = gauss_legendre(order)
    assert rule.order == order
    assert abs(np.sum(rule.weights) - 2.0) < 1e-12
    assert np.all(np.diff(rule.nodes) > 0)
    assert np.all(rule.weights > 0)
    assert np.max(np.abs(rule.nodes + rule.nodes[::-1])) < 1e-12


def test_gauss_legendre_against_scipy():
    from scipy.special import roots_legendre

    for order in (7, 100):
        x, w = roots_legendre(order)
        rule = gauss_legendre(order)
        assert np.max(np.abs(rule.nodes - x)) < 1e-14
        assert np.max(np.abs(rule.weights - w)) < 1e-14


def test_gauss_legendre_high_order_against_mpmath():
    # scipy's own weights drift near the endpoints at this order, so refine in mpmath
    import mpmath as mp

    n = 1000
    rule = gauss_legendre(n)
    with mp.workdps(40):
        for i in (0, 1, 250, 499):
            t = mp.mpf(rule.nodes[i])
            for _ in range(4):
                dp = n * (t * mp.legendre(n, t) - mp.legendre(n - 1, t)) / (t * t - 1)
                t -= mp.legendre(n, t) / dp
            dp = n * (t * mp.legendre(n, t) - mp.legendre(n - 1, t)) / (t * t - 1)
            w = 2 / ((1 - t * t) * dp * dp)
            assert abs(rule.nodes[i] - float(t)) < 1e-15
            assert abs(rule.weights[i] - float(w)) < 1e-15


@pytest.mark.parametrize("order", [1, 0, 2049, 2.5, True])
def test_gauss_legendre_range(order):
    with pytest.raises(DomainError):
        gauss_legendre(order)


def test_polar_disk_area():
    assert abs(integrate_2d_polar(lambda r, p: np.ones_like(r), 2.0, 8, 8) - 4 * math.pi) < 1e-10


def test_polar_azimuthal_average_vanishes():
    assert abs(integrate_2d_polar(lambda r, p: np.exp(1j * p), 1.0, 8, 16)) < 1e-12


def test_polar_closed_form():
    val = integrate_2d_polar(lambda r, p: r * np.cos(p) ** 2, 1.0, 16, 16)
    assert abs(val - math.pi / 3) < 1e-10


def test_polar_convergence_under_doubling():
    f = lambda r, p: np.exp(-r * r) * (1 + 0.3 * np.cos(3 * p)) + 1j * r**3 * np.sin(p) ** 2
    a = integrate_2d_polar(f, 1.5, 24, 32)
    b = integrate_2d_polar(f, 1.5, 48, 64)
    assert abs(a - b) < 1e-8


def test_polar_conjugation_symmetry():
    f = lambda r, p: np.exp(1j * (2 * p + r)) * (1 + r * np.cos(p))
    g = lambda r, p: f(r, -p)
    assert abs(integrate_2d_polar(g, 1.0, 16, 32) - integrate_2d_polar(f, 1.0, 16, 32).conjugate()) < 1e-14


def test_polar_grid_maps_onto_itself():
    for offset in (0.0, 0.5):
        _, phi, _ = polar_nodes(1.0, 4, 12, offset)
        row = np.sort(np.mod(-phi[0], 2 * math.pi))
        assert np.allclose(np.sort(np.mod(phi[0], 2 * math.pi)), row, atol=1e-12)


@pytest.mark.parametrize("n_rho, n_phi", [(3, 8), (8, 3), (8, 7)])
def test_polar_resolution_checks(n_rho, n_phi):
    with pytest.raises(DomainError):
        integrate_2d_polar(lambda r, p: r, 1.0, n_rho, n_phi)


def test_polar_nonfinite_names_node():
    with pytest.raises(EvaluationError, match="rho="):
        integrate_2d_polar(lambda r, p: np.where(p > 3.0, np.nan, r), 1.0, 4, 4)
