import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import jv

from twistedhom.config import parse_config
from twistedhom.core_math import bessel_j, gauss_legendre, integrate_2d_polar
from twistedhom.hom import hom_probabilities_numeric
from twistedhom.imaging import (
    ImagingState,
    SensorGrid,
    coincidence_port_d,
    density_port_d,
    max_relative_deviation,
    overlap_integrals,
    reference_density,
    snr_two_photon,
)
from twistedhom.io import encode_pgm, format_value, read_pgm
from twistedhom.masks import PhaseMask
from twistedhom.states import (
    DEFAULT_ENVELOPE,
    SPEED_OF_LIGHT,
    Family,
    TwistedMode,
    TwoPhotonState,
    reflect_position,
    xi_cd,
)

ENV = DEFAULT_ENVELOPE
UNIT = ENV.sigma_z / SPEED_OF_LIGHT
SMALL = SensorGrid(12, 12, 20e-6, subsamples=2)

orders = st.integers(min_value=-60, max_value=60)
args = st.floats(min_value=0.0, max_value=200.0, allow_nan=False)
families = st.sampled_from(list(Family))


@given(orders, args)
def test_bessel_matches_reference_library(m, x):
    assert abs(bessel_j(m, x) - jv(m, x)) < 1e-10


@given(st.integers(min_value=1, max_value=59), st.floats(min_value=0.01, max_value=500.0))
def test_bessel_three_term_recurrence(m, x):
    lhs = bessel_j(m - 1, x) + bessel_j(m + 1, x)
    assert abs(lhs - 2 * m / x * bessel_j(m, x)) < 1e-10 * max(1.0, 2 * m / x)


@given(orders, args)
def test_bessel_parity_and_bound(m, x):
    v = bessel_j(m, x)
    assert bessel_j(-m, x) == (-1) ** (m % 2) * v
    assert bessel_j(m, -x) == (-1) ** (m % 2) * v
    assert abs(v) <= 1.0


@given(st.integers(min_value=2, max_value=40), st.data())
def test_gauss_legendre_exact_for_polynomials(n, data):
    deg = data.draw(st.integers(min_value=0, max_value=2 * n - 1))
    coeffs = data.draw(st.lists(st.floats(-1, 1), min_size=deg + 1, max_size=deg + 1))
    rule = gauss_legendre(n)
    got = float(np.sum(rule.weights * np.polynomial.polynomial.polyval(rule.nodes, coeffs)))
    exact = sum(c * 2.0 / (k + 1) for k, c in enumerate(coeffs) if k % 2 == 0)
    assert abs(got - exact) < 1e-12 * (1 + sum(abs(c) for c in coeffs))


@given(st.floats(0.1, 5.0), st.floats(-2, 2), st.floats(-2, 2))
def test_polar_integral_is_linear(r, a, b):
    f = lambda rho, phi: np.exp(-rho) * np.cos(phi) ** 2
    g = lambda rho, phi: rho * np.sin(3 * phi) + 1.0
    lhs = integrate_2d_polar(lambda p, q: a * f(p, q) + b * g(p, q), r, 16, 16)
    rhs = a * integrate_2d_polar(f, r, 16, 16) + b * integrate_2d_polar(g, r, 16, 16)
    assert abs(lhs - rhs) < 1e-12 * (1 + abs(lhs))


@settings(max_examples=25)
@given(families, st.integers(-4, 4), st.floats(-6.0, 6.0))
def test_hom_conservation_and_range(fam, m, k):
    state = TwoPhotonState(fam, m, delay_tau=k * UNIT)
    if m == 0 and fam in (Family.PSI_MINUS, Family.PHI_MINUS):
        return
    p = hom_probabilities_numeric(state)
    assert abs(sum(p.as_tuple()) - 1) < 1e-4
    assert all(0.0 <= v <= 1.0 for v in p.as_tuple())
    mirrored = hom_probabilities_numeric(TwoPhotonState(fam, m, delay_tau=-k * UNIT))
    assert p.p_cd == pytest.approx(mirrored.p_cd, abs=1e-6)


@settings(max_examples=20)
@given(st.integers(0, 2**32 - 1), st.integers(0, 3), st.integers(4, 40), st.integers(4, 40))
def test_overlap_theorem_random_raster(seed, m, ny, nx):
    rng = np.random.default_rng(seed)
    mask = PhaseMask.from_levels(rng.integers(0, 256, (ny, nx)), 12e-6, tuple(rng.uniform(-5e-5, 5e-5, 2)))
    ov = overlap_integrals(TwistedMode(ENV, m), mask, 4e-4, resolution=(64, 128))
    assert abs(ov.i1 - ov.i2) < 1e-9
    assert abs(ov.i1) <= 1 + 1e-9 and abs(ov.i2) <= 1 + 1e-9


@settings(max_examples=15)
@given(st.integers(0, 2**32 - 1), st.integers(0, 3))
def test_texture_invisible_in_density(seed, m):
    rng = np.random.default_rng(seed)
    mask = PhaseMask.raster(rng.uniform(0, 2 * math.pi, SMALL.shape), SMALL.pitch)
    state = ImagingState(TwistedMode(ENV, m), mask, resolution=(64, 128))
    assert max_relative_deviation(density_port_d(state, SMALL), reference_density(state, SMALL)) < 1e-6


@settings(max_examples=15)
@given(st.integers(0, 2**32 - 1), st.floats(-10.0, 10.0))
def test_global_phase_is_unobservable(seed, c):
    rng = np.random.default_rng(seed)
    mask = PhaseMask.raster(rng.uniform(0, math.pi, SMALL.shape), SMALL.pitch)
    a = coincidence_port_d(ImagingState(TwistedMode(ENV, 1), mask, resolution=(64, 128)), SMALL).values
    b = coincidence_port_d(ImagingState(TwistedMode(ENV, 1), mask.shifted(c), resolution=(64, 128)), SMALL).values
    assert np.max(np.abs(a - b)) < 1e-12 * max(np.max(a), 1e-300)


@given(st.floats(1e-9, 0.01), st.integers(1, 10**8))
def test_snr_small_signal_limit(value, n):
    snr = snr_two_photon(value, n)
    assert abs(snr - math.sqrt(n * value)) / snr < 1e-2


@given(st.floats(0.0, 0.999), st.integers(1, 10**6))
def test_snr_monotone_in_measurements(value, n):
    assert snr_two_photon(value, 4 * n) == pytest.approx(2 * snr_two_photon(value, n), rel=1e-12)


@settings(max_examples=20)
@given(families, st.integers(-3, 3), st.lists(st.floats(-4e-5, 4e-5), min_size=6, max_size=6))
def test_coincidence_amplitude_antisymmetric(fam, m, coords):
    if m == 0 and fam in (Family.PSI_MINUS, Family.PHI_MINUS):
        return
    state = TwoPhotonState(fam, m)
    mask = PhaseMask.sector(0.3, step=1.1)
    r, rp = tuple(coords[:3]), tuple(coords[3:])
    a = xi_cd(state, mask, r, rp, 0.0)
    b = xi_cd(state, mask, reflect_position(rp), reflect_position(r), 0.0)
    scale = ENV.rho_kc / (2 * math.pi * ENV.sigma_z * ENV.sigma_rho)
    assert abs(a + b) < 1e-12 * scale


@given(st.integers(1, 20), st.integers(1, 20), st.booleans(), st.integers(0, 2**32 - 1))
def test_pgm_round_trip(h, w, plain, seed):
    lv = np.random.default_rng(seed).integers(0, 256, (h, w)).astype(np.uint8)
    back, maxval = read_pgm(encode_pgm(lv, plain))
    assert maxval == 255 and np.array_equal(back, lv)


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_csv_value_precision(x):
    assert abs(float(format_value(x)) - x) <= 5e-9 * abs(x)


@given(st.integers(-60, 60), st.integers(1, 200), st.integers(1, 200), st.sampled_from(["reduced", "full"]))
def test_config_echo_round_trip(m, nx, ny, mode):
    doc = f'{{"state": {{"m": {m}}}, "sensor": {{"n_x": {nx}, "n_y": {ny}}}, "hom": {{"mode": "{mode}"}}}}'
    cfg = parse_config(doc)
    assert parse_config(cfg.echo()) == cfg
