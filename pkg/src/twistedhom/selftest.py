"""Fast invariant checks behind ``twistedhom selftest``."""

from dataclasses import dataclass
import math

import numpy as np


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _series_j(m, x, terms=60):
    total = 0.0
    for k in range(terms):
        total += (-1) ** k * (x / 2) ** (2 * k + m) / (math.factorial(k) * math.factorial(k + m))
    return total


def _check_bessel():
    from .core_math import bessel_j

    worst = 0.0
    for m in range(0, 11):
        for x in (0.3, 1.7, 4.0, 9.5, 15.0):
            worst = max(worst, abs(bessel_j(m, x) - _series_j(m, x)))
            worst = max(worst, abs(bessel_j(-m, x) - (-1) ** m * bessel_j(m, x)))
    return worst < 1e-10, f"max deviation {worst:.2e}"


def _check_quadrature():
    from .core_math import gauss_legendre, integrate_2d_polar

    rule = gauss_legendre(5)
    poly = abs(float(np.sum(rule.weights * rule.nodes**8)) - 2.0 / 9.0)
    disk = abs(integrate_2d_polar(lambda r, p: np.ones_like(r), 2.0, 16, 16) - 4 * math.pi)
    return poly < 1e-13 and disk < 1e-10, f"x^8 error {poly:.1e}, disk error {disk:.1e}"


def _check_hom_table():
    from .hom import hom_probabilities_analytic, hom_probabilities_numeric
    from .states import Family, TwoPhotonState

    worst, conservation = 0.0, 0.0
    for fam in Family:
        for m in range(4):
            if m == 0 and fam in (Family.PSI_MINUS, Family.PHI_MINUS):
                continue
            st = TwoPhotonState(fam, m)
            a = hom_probabilities_analytic(st)
            n = hom_probabilities_numeric(st)
            worst = max(worst, max(abs(x - y) for x, y in zip(a.as_tuple(), n.as_tuple())))
            conservation = max(conservation, abs(sum(n.as_tuple()) - 1.0))
    return worst < 1e-3 and conservation < 1e-4, f"analytic vs numeric {worst:.1e}, sum error {conservation:.1e}"


def _check_dip():
    from .hom import hom_dip_scan
    from .states import DEFAULT_ENVELOPE, SPEED_OF_LIGHT, Family, TwoPhotonState

    unit = DEFAULT_ENVELOPE.sigma_z / SPEED_OF_LIGHT
    scan = hom_dip_scan(TwoPhotonState(Family.PRODUCT_OPPOSITE, 1), [-10 * unit, 0.0, 10 * unit])
    lo, mid, hi = scan.p_cd_values
    ok = mid < 1e-3 and 0.49 <= lo <= 0.51 and abs(lo - hi) < 1e-6
    return ok, f"p_cd(0)={mid:.1e}, p_cd(+-10)={lo:.4f}/{hi:.4f}"


def _check_overlaps():
    from .imaging import SensorGrid, overlap_integrals
    from .masks import PhaseMask
    from .states import DEFAULT_ENVELOPE, TwistedMode

    grid = SensorGrid()
    rng = np.random.default_rng(2024)
    mask = PhaseMask.from_levels(rng.integers(0, 256, size=(50, 50)), grid.pitch)
    worst_sym, worst_asym = 0.0, 0.0
    for m in range(4):
        mode = TwistedMode(DEFAULT_ENVELOPE, m)
        sym = overlap_integrals(mode, mask, grid.default_window())
        asym = overlap_integrals(mode, mask, grid.default_window(), phi_offset=0.3)
        worst_sym = max(worst_sym, abs(sym.i1 - sym.i2))
        worst_asym = max(worst_asym, abs(asym.i1 - asym.i2))
    return worst_sym < 1e-9 and worst_asym < 1e-3, f"|I1-I2| symmetric {worst_sym:.1e}, asymmetric {worst_asym:.1e}"


def _check_imaging():
    from .imaging import (
        ImagingState,
        SensorGrid,
        coincidence_port_d,
        density_port_d,
        max_relative_deviation,
        reference_density,
    )
    from .masks import PhaseMask
    from .states import DEFAULT_ENVELOPE, TwistedMode

    grid = SensorGrid()
    big = SensorGrid(108, 108)
    state = ImagingState(TwistedMode(DEFAULT_ENVELOPE, 1), PhaseMask.sector(0.25), window=grid.default_window())
    dev = max_relative_deviation(density_port_d(state, grid), reference_density(state, grid))
    total = coincidence_port_d(state, big).total()
    ok = dev < 1e-6 and abs(total - 0.375) < 1e-3
    return ok, f"density deviation {dev:.1e}, coincidence total {total:.5f}"


def _check_snr():
    from .imaging import snr_coherent, snr_two_photon

    ok = snr_two_photon(0.5, 1) == 1.0 and snr_coherent(100.0) == 10.0 and snr_two_photon(0.0, 7) == 0.0
    return ok, "exact reference values"


def _check_pgm():
    from .io import encode_pgm, read_pgm

    levels = np.random.default_rng(7).integers(0, 256, size=(9, 13)).astype(np.uint8)
    ok = all(np.array_equal(read_pgm(encode_pgm(levels, plain))[0], levels) for plain in (False, True))
    return ok, "P2/P5 round trip"


CHECKS = (
    ("bessel-series-and-parity", _check_bessel),
    ("quadrature-exactness", _check_quadrature),
    ("hom-case-table", _check_hom_table),
    ("hom-dip", _check_dip),
    ("overlap-theorem", _check_overlaps),
    ("texture-invisibility-and-total", _check_imaging),
    ("snr-formulas", _check_snr),
    ("pgm-round-trip", _check_pgm),
)


def run_selftest():
    results = []
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # noqa: BLE001 - a crash is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(ok), detail))
    return results


def format_table(results):
    width = max(len(r.name) for r in results)
    lines = [f"{'check'.ljust(width)}  result  detail"]
    for r in results:
        lines.append(f"{r.name.ljust(width)}  {'PASS' if r.passed else 'FAIL'}    {r.detail}")
    return "\n".join(lines) + "\n"
