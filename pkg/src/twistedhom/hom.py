r"""Two-photon interference at a 50:50 beam splitter.

Input ports are A (photon with wave vector ``k``) and B (``k'``), output
ports c and d.  Reflection maps ``k -> kbar = (k_x, -k_y, k_z)``, which flips
the sign of the OAM number.  For a normalised amplitude ``xi(k, k')``

.. math::
    P_{cc} = \tfrac14 + \tfrac14\,\mathrm{Re}\!\iint \xi^*(\bar k, k')\,\xi(\bar k', k)

    P_{dd} = \tfrac14 + \tfrac14\,\mathrm{Re}\!\iint \xi^*(k, \bar k')\,\xi(k', \bar k)

    P_{cd} = \tfrac12 - \tfrac12\,\mathrm{Re}\!\iint \xi^*(k, k')\,\xi(\bar k', \bar k)

Every state here is a finite sum of products ``u_a(k) v_b(k')`` of
single-photon modes, so each double integral collapses to sums of products
of single-photon inner products.  A delay ``tau`` on path B multiplies
``v_b`` by ``exp(-i omega_k tau)``.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from . import _backend
from .core_math import gauss_legendre, polar_nodes
from .errors import ContractError, DomainError, UnsupportedConfigurationError
from .states import (
    SPEED_OF_LIGHT,
    Family,
    TwoPhotonState,
    saf_envelope,
    spectral_window,
    transverse_profile,
)

DELAY_CONVENTION = "delay on path B: v(k') -> v(k') exp(-i omega_k' tau)"
RICHARDSON_LIMIT = 1e-2


@dataclass(frozen=True)
class HomProbabilities:
    """Output-port probabilities ``(p_cc, p_dd, p_cd)``.

    Construction checks the probability range and conservation
    (``1e-9`` for analytic results, ``1e-4`` for numeric ones) and raises
    :class:`ContractError` on violation.
    """

    p_cc: float
    p_dd: float
    p_cd: float
    method: str
    quadrature_error: float = 0.0
    converged: bool = True

    def __post_init__(self):
        if self.method not in ("analytic", "numeric"):
            raise ContractError(f"unknown method tag {self.method!r}")
        tol = 1e-9 if self.method == "analytic" else 1e-4
        for name in ("p_cc", "p_dd", "p_cd"):
            v = getattr(self, name)
            if not (-1e-9 <= v <= 1 + 1e-9):
                raise ContractError(f"{name}={v!r} is not a probability")
        total = self.p_cc + self.p_dd + self.p_cd
        if abs(total - 1.0) > tol:
            raise ContractError(f"probabilities sum to {total!r}, not 1")

    def as_tuple(self):
        return (self.p_cc, self.p_dd, self.p_cd)


@dataclass(frozen=True)
class KGrid:
    """Spectral grid for the numeric engine.

    ``n_kz`` and ``n_rho_k`` are Gauss-Legendre orders over the truncated
    spectral box; ``n_phi_k`` uniform azimuthal nodes are used only by the
    ``"full"`` mode, which integrates the azimuth numerically instead of
    reducing it to Kronecker deltas.
    """

    n_kz: int = 24
    n_rho_k: int = 24
    n_phi_k: int = 16
    mode: str = "reduced"

    def __post_init__(self):
        for name in ("n_kz", "n_rho_k", "n_phi_k"):
            if getattr(self, name) < 16:
                raise DomainError(f"{name} must be >= 16")
        if self.n_phi_k % 2:
            raise DomainError("n_phi_k must be even")
        if self.mode not in ("reduced", "full"):
            raise DomainError("mode must be 'reduced' or 'full'")

    def doubled(self):
        return KGrid(2 * self.n_kz, 2 * self.n_rho_k, 2 * self.n_phi_k, self.mode)


@dataclass(frozen=True)
class DipScan:
    """Coincidence probability against delay for one state."""

    delays: tuple
    p_cd_values: tuple
    state: str
    errors: tuple = field(default=())
    converged: bool = True
    convention: str = DELAY_CONVENTION


def describe_state(state):
    return f"{state.family.value}(m={state.m},tau={state.delay_tau!r})"


# ---------------------------------------------------------------------------
# closed forms


def hom_probabilities_analytic(state):
    """Exact zero-delay probabilities for each state family.

    Raises
    ------
    UnsupportedConfigurationError
        ``state.delay_tau`` is nonzero; use :func:`hom_probabilities_numeric`.
    """
    if state.delay_tau != 0.0:
        raise UnsupportedConfigurationError(
            "closed forms hold at zero delay only; use hom_probabilities_numeric for tau != 0"
        )
    state.terms()  # rejects null states
    f = state.family
    if f is Family.PRODUCT_SAME:
        d = 1.0 if state.m == 0 else 0.0
        vals = ((1 + d) / 4, (1 + d) / 4, (1 - d) / 2)
    elif f is Family.PHI_MINUS:
        vals = (0.0, 0.0, 1.0)
    else:
        vals = (0.5, 0.5, 0.0)
    return HomProbabilities(*vals, method="analytic")


# ---------------------------------------------------------------------------
# spectral quadrature


def _adaptive_orders(env, grid, tau):
    # the delay phase winds faster for larger |tau|; add nodes in proportion
    span = SPEED_OF_LIGHT * abs(tau)
    n_kz = grid.n_kz + int(24 * span / env.sigma_z)
    n_rho = grid.n_rho_k + int(24 * span * math.sin(env.theta_c) / env.sigma_rho)
    return min(n_kz, 2048), min(n_rho, 2048)


def _radial_grid(env, n_kz, n_rho):
    kz_lo, kz_hi, r_lo, r_hi = spectral_window(env)
    kz, wz = gauss_legendre(n_kz).scaled(kz_lo, kz_hi)
    rk, wr = gauss_legendre(n_rho).scaled(r_lo, r_hi)
    KZ, RK = np.meshgrid(kz, rk, indexing="ij")
    W = np.outer(wz, wr) * RK
    eta = saf_envelope(env, KZ, RK)
    return W, eta, env.delta_omega(KZ, RK)


def _sum_complex(weights, values):
    return complex(np.sum(weights * values.real), np.sum(weights * values.imag))


def _radial_overlap(state, grid):
    """``g = <eta, eta exp(-i (omega - omega_c) tau)>`` over the normalised radial measure.

    The carrier ``exp(-i omega_c tau)`` cancels in every product the
    probabilities need, so it is left out.
    """
    tau = state.delay_tau
    if tau == 0.0:
        return 1.0 + 0.0j
    env = state.envelope
    W, eta, dw = _radial_grid(env, *_adaptive_orders(env, grid, tau))
    mass = W * eta * eta
    return _sum_complex(mass, np.exp(-1j * dw * tau)) / float(np.sum(mass))


def _azimuthal_grid(n_phi):
    return (np.arange(n_phi) + 0.5) * (2.0 * math.pi / n_phi)


def _amplitudes(state, grid):
    """Sampled ``u_a`` and ``v_b`` on a 3-D spectral grid (full mode)."""
    env = state.envelope
    n_kz, n_rho = _adaptive_orders(env, grid, state.delay_tau)
    W2, eta, dw = _radial_grid(env, n_kz, n_rho)
    phi = _azimuthal_grid(grid.n_phi_k)
    wphi = 2.0 * math.pi / grid.n_phi_k
    W = np.repeat(W2[:, :, None] * wphi, grid.n_phi_k, axis=2).ravel()
    base = (eta / math.sqrt(2.0 * math.pi))[:, :, None]
    delay = np.exp(-1j * dw * state.delay_tau)[:, :, None]
    cache = {}

    def mode(kind, index, bar):
        key = (kind, index, bar)
        if key not in cache:
            sign = -1.0 if bar else 1.0
            helix = np.exp(1j * index * sign * phi)[None, None, :]
            val = base * helix
            if kind == "v":
                val = val * delay
            cache[key] = val.ravel()
        return cache[key]

    return W, mode


def _probabilities_from_terms(terms, overlap):
    """Assemble ``(P_cc, P_dd, P_cd)`` from single-photon inner products.

    ``overlap(x, a, bar_x, y, b, bar_y)`` returns ``<x_a(bar?), y_b(bar?)>``
    where ``x, y`` name the mode families ``"u"`` (path A) or ``"v"`` (path B).
    """
    a_cc = a_dd = a_cd = norm = 0.0j
    for a1, b1, c1 in terms:
        for a2, b2, c2 in terms:
            cc = c1 * c2
            norm += cc * overlap("u", a1, False, "u", a2, False) * overlap("v", b1, False, "v", b2, False)
            a_cd += cc * overlap("u", a1, False, "v", b2, True) * overlap("v", b1, False, "u", a2, True)
            a_cc += cc * overlap("u", a1, True, "v", b2, False) * overlap("v", b1, False, "u", a2, True)
            a_dd += cc * overlap("u", a1, False, "v", b2, True) * overlap("v", b1, True, "u", a2, False)
    n = norm.real
    p_cc = 0.25 + 0.25 * (a_cc / n).real
    p_dd = 0.25 + 0.25 * (a_dd / n).real
    p_cd = 0.5 - 0.5 * (a_cd / n).real
    return p_cc, p_dd, p_cd


def _evaluate(state, grid):
    terms = state.terms()
    if grid.mode == "reduced":
        g = _radial_overlap(state, grid)

        def overlap(x, a, bar_x, y, b, bar_y):
            # azimuthal integral of exp(i(-a' + b') phi) / 2pi, a' and b' sign-flipped by bars
            if (-a if bar_x else a) != (-b if bar_y else b):
                return 0.0j
            if x == y:
                return 1.0 + 0.0j
            return g if y == "v" else g.conjugate()

        return _probabilities_from_terms(terms, overlap)
    W, mode = _amplitudes(state, grid)

    def overlap(x, a, bar_x, y, b, bar_y):
        left = mode(x, a, bar_x)
        right = mode(y, b, bar_y)
        return _sum_complex(W, np.conj(left) * right)

    return _probabilities_from_terms(terms, overlap)


def _clip(p):
    return min(1.0, max(0.0, p))


def hom_probabilities_numeric(state, grid=None):
    """Probabilities from spectral quadrature of the general two-photon integrals.

    Evaluates on ``grid`` and on the doubled grid; the reported values come
    from the finer one and ``quadrature_error`` is the largest componentwise
    change.  ``converged`` is False when that change exceeds ``1e-2``.
    """
    grid = KGrid() if grid is None else grid
    coarse = _evaluate(state, grid)
    fine = _evaluate(state, grid.doubled())
    err = max(abs(a - b) for a, b in zip(coarse, fine))
    p_cc, p_dd, p_cd = (_clip(v) for v in fine)
    return HomProbabilities(p_cc, p_dd, p_cd, method="numeric", quadrature_error=float(err),
                            converged=err <= RICHARDSON_LIMIT)


def hom_dip_scan(state, tau_values, grid=None):
    """Coincidence probability over a list of delays (path B delayed)."""
    taus = [float(t) for t in tau_values]
    if not all(math.isfinite(t) for t in taus):
        raise DomainError("delays must be finite")
    values, errors, ok = [], [], True
    for tau in taus:
        s = TwoPhotonState(state.family, state.m, state.envelope, tau)
        r = hom_probabilities_numeric(s, grid)
        values.append(r.p_cd)
        errors.append(r.quadrature_error)
        ok = ok and r.converged
    return DipScan(tuple(taus), tuple(values), describe_state(state), tuple(errors), ok)


# ---------------------------------------------------------------------------
# masked product state in real space


def hom_probabilities_masked(mode, mask, window, resolution=(48, 64), phi_offset=0.5):
    r"""Probabilities for the imaging state: photon A carries the mask phase.

    The state is ``A(r) = sqrt(F_m) exp(i(m phi + Phi))`` on path A and
    ``B(r') = sqrt(F_m) exp(-i m phi')`` on path B over the transverse window.
    The general integrals are evaluated by brute force over all node pairs
    (equivalent to the k-space form by Parseval), e.g.

    .. math::
        P_{cd} = \tfrac14 \sum_{ij} w_i w_j |A_i B_j - A(\bar r_j) B(\bar r_i)|^2

    normalised by ``(sum_i w_i F_i)^2``.
    """
    n_rho, n_phi = resolution
    if n_phi % 2:
        raise DomainError("n_phi must be even")
    profile = transverse_profile(mode, window)
    rho, phi, w = polar_nodes(window, n_rho, n_phi, phi_offset)
    rho, phi, w = rho.ravel(), phi.ravel(), w.ravel()
    amp = np.sqrt(profile(rho))
    m = mode.m
    a = amp * np.exp(1j * (m * phi + mask.phase_polar(rho, phi)))
    abar = amp * np.exp(1j * (-m * phi + mask.phase_polar(rho, -phi)))
    b = amp * np.exp(-1j * m * phi)
    bbar = amp * np.exp(1j * m * phi)
    s_cd, s_cc, s_dd = _backend.active().pair_sums(w, a, abar, b, bbar, _backend.threads())
    norm = float(np.sum(w * amp * amp)) ** 2
    p_cd = 0.25 * s_cd / norm
    p_cc = 0.125 * s_cc / norm
    p_dd = 0.125 * s_dd / norm
    return HomProbabilities(_clip(p_cc), _clip(p_dd), _clip(p_cd), method="numeric")
