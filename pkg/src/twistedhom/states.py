r"""Photon envelopes, wave-packet functions and beam-splitter geometry.

Units are SI throughout: lengths in metres, wavenumbers in 1/m, times in
seconds.  A twisted photon is a Bessel pulse with a Gaussian envelope on a
cone of polar angle :math:`\theta_c`; its real-space amplitude factorises as
:math:`\tilde\eta_m(\rho, z, t)\,e^{im\varphi}`.  The evaluators here return
:math:`\tilde\eta_m` only; callers apply the helical factor.
"""

from dataclasses import dataclass, replace
import enum
import math

import numpy as np

from .core_math import MAX_ORDER, bessel_j, bessel_j_zero, gauss_legendre
from .errors import DomainError, WindowError

SPEED_OF_LIGHT = 299_792_458.0
DEFAULT_WAVELENGTH = 500e-9

_I_POWERS = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)


def i_power(m):
    """Exact ``1j**m`` for integer ``m``."""
    return _I_POWERS[int(m) % 4]


@dataclass(frozen=True)
class BesselGaussEnvelope:
    """Pulse shape of a Bessel photon with Gaussian envelopes.

    Parameters
    ----------
    sigma_z : float
        Longitudinal length scale (m).
    sigma_rho : float
        Transverse length scale (m); the spectral ring has width ``1/sigma_rho``.
    k_c : float
        Central wavenumber ``2*pi/lambda_c`` (1/m).
    theta_c : float
        Cone polar angle, ``0 < theta_c < pi/2``.
    """

    sigma_z: float
    sigma_rho: float
    k_c: float
    theta_c: float

    def __post_init__(self):
        for name in ("sigma_z", "sigma_rho", "k_c"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be positive and finite, got {v!r}")
        if not 0.0 < self.theta_c < 0.5 * math.pi:
            raise DomainError(f"theta_c must lie in (0, pi/2), got {self.theta_c!r}")

    @classmethod
    def from_wavelength(cls, wavelength=DEFAULT_WAVELENGTH, sigma_z=None, sigma_rho=None,
                        theta_c=0.001 * math.pi):
        """Envelope from a centre wavelength; widths default to 1000 wavelengths."""
        if not wavelength > 0:
            raise DomainError("wavelength must be positive")
        return cls(
            sigma_z=1000.0 * wavelength if sigma_z is None else sigma_z,
            sigma_rho=1000.0 * wavelength if sigma_rho is None else sigma_rho,
            k_c=2.0 * math.pi / wavelength,
            theta_c=theta_c,
        )

    @property
    def wavelength(self):
        return 2.0 * math.pi / self.k_c

    @property
    def kz_c(self):
        return self.k_c * math.cos(self.theta_c)

    @property
    def rho_kc(self):
        return self.k_c * math.sin(self.theta_c)

    @property
    def omega_c(self):
        return SPEED_OF_LIGHT * self.k_c

    def delta_omega(self, k_z, rho_k):
        """``omega_k - omega_c`` with ``omega_k = c*sqrt(k_z^2 + rho_k^2)``, cancellation-free."""
        k_z = np.asarray(k_z)
        rho_k = np.asarray(rho_k)
        kz_c, rho_kc = self.kz_c, self.rho_kc
        # k^2 - k_c^2 expanded about the carrier, using kz_c^2 + rho_kc^2 = k_c^2
        diff = (k_z - kz_c) * (k_z + kz_c) + (rho_k - rho_kc) * (rho_k + rho_kc)
        k = np.sqrt(k_z**2 + rho_k**2)
        return SPEED_OF_LIGHT * diff / (k + self.k_c)


DEFAULT_ENVELOPE = BesselGaussEnvelope.from_wavelength()


@dataclass(frozen=True)
class TwistedMode:
    """Bessel photon carrying OAM quantum number ``m``."""

    envelope: BesselGaussEnvelope
    m: int

    def __post_init__(self):
        if isinstance(self.m, bool) or int(self.m) != self.m:
            raise DomainError(f"OAM number must be an integer, got {self.m!r}")
        if abs(int(self.m)) > MAX_ORDER:
            raise DomainError(f"|m| must not exceed {MAX_ORDER}")
        object.__setattr__(self, "m", int(self.m))


class Family(enum.Enum):
    """Two-photon state families.

    Terms are listed as ``(m_A, m_B, amplitude)``: photon A (path A, the
    imaging arm) carries ``m_A``, photon B carries ``m_B``.  Labels refer to
    the modes as they arrive at the beam splitter.
    """

    PRODUCT_OPPOSITE = "product_opposite"
    PRODUCT_SAME = "product_same"
    PSI_PLUS = "psi_plus"
    PSI_MINUS = "psi_minus"
    PHI_PLUS = "phi_plus"
    PHI_MINUS = "phi_minus"

    @property
    def entangled(self):
        return self not in (Family.PRODUCT_OPPOSITE, Family.PRODUCT_SAME)

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower().replace("-", "_"))
        except ValueError:
            names = ", ".join(f.value for f in cls)
            raise DomainError(f"unknown state family {value!r}; expected one of {names}") from None


@dataclass(frozen=True)
class TwoPhotonState:
    """Input photon pair at the beam splitter.

    ``delay_tau`` delays photon B: its spectral amplitude picks up
    ``exp(-1j * omega_k * delay_tau)``.
    """

    family: Family
    m: int
    envelope: BesselGaussEnvelope = DEFAULT_ENVELOPE
    delay_tau: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        TwistedMode(self.envelope, self.m)
        object.__setattr__(self, "m", int(self.m))
        if not math.isfinite(self.delay_tau):
            raise DomainError("delay_tau must be finite")

    @property
    def normalization(self):
        """Prefactor of the family's defining superposition (1 or 1/sqrt(2))."""
        return 1.0 / math.sqrt(2.0) if self.family.entangled else 1.0

    def raw_terms(self):
        m, n = self.m, self.normalization
        f = self.family
        if f is Family.PRODUCT_OPPOSITE:
            return [(m, -m, 1.0)]
        if f is Family.PRODUCT_SAME:
            return [(m, m, 1.0)]
        sign = 1.0 if f in (Family.PSI_PLUS, Family.PHI_PLUS) else -1.0
        if f in (Family.PSI_PLUS, Family.PSI_MINUS):
            return [(m, -m, n), (-m, m, sign * n)]
        return [(m, m, n), (-m, -m, sign * n)]

    def terms(self):
        """Distinct ``(m_A, m_B, c)`` terms with unit total weight.

        Raises
        ------
        DomainError
            The superposition cancels (``psi_minus`` or ``phi_minus`` at m=0).
        """
        merged = {}
        for a, b, c in self.raw_terms():
            merged[(a, b)] = merged.get((a, b), 0.0) + c
        merged = {k: v for k, v in merged.items() if v != 0.0}
        norm = math.sqrt(sum(c * c for c in merged.values()))
        if norm == 0.0:
            raise DomainError(f"{self.family.value} with m=0 is the null state")
        return [(a, b, c / norm) for (a, b), c in sorted(merged.items())]

    def symmetry(self):
        """Behaviour of the wave packet under ``(r, r') -> (rbar', rbar)``.

        Returns ``"symmetric"``, ``"antisymmetric"`` or ``"none"``.  The map
        sends a term ``(m_A, m_B, c)`` to ``(-m_B, -m_A, c)``.
        """
        terms = {(a, b): c for a, b, c in self.terms()}
        image = {(-b, -a): c for (a, b), c in terms.items()}
        if image == terms:
            return "symmetric"
        if image == {k: -v for k, v in terms.items()}:
            return "antisymmetric"
        return "none"

    def mode(self):
        return TwistedMode(self.envelope, self.m)


@dataclass(frozen=True)
class WavePacketSample:
    """Single-photon amplitude ``eta_m(rho, z, t) * exp(i m phi)`` at one point."""

    value: complex
    position: tuple
    time: float


def saf_envelope(env, k_z, rho_k):
    r"""Spectral amplitude of the Bessel-Gauss pulse (independent of :math:`\varphi_k`).

    .. math::
        \eta(k) = \Big(\tfrac{2\sigma_z^2}{\pi}\Big)^{1/4} e^{-\sigma_z^2(k_z-k_{z,c})^2}
                  \Big(\tfrac{2\sigma_\rho^2}{\pi\rho_{k,c}^2}\Big)^{1/4}
                  e^{-\sigma_\rho^2(\rho_k-\rho_{k,c})^2}

    This is normalised over ``dk_z * rho_k * drho_k``; the full 3-D mode
    including its helical phase is :func:`saf_mode`.
    """
    k_z = np.asarray(k_z, dtype=np.float64)
    rho_k = np.asarray(rho_k, dtype=np.float64)
    if np.any(rho_k < 0):
        raise DomainError("rho_k must be non-negative")
    pz = (2.0 * env.sigma_z**2 / math.pi) ** 0.25
    pr = (2.0 * env.sigma_rho**2 / (math.pi * env.rho_kc**2)) ** 0.25
    return (
        pz * np.exp(-(env.sigma_z**2) * (k_z - env.kz_c) ** 2)
        * pr * np.exp(-(env.sigma_rho**2) * (rho_k - env.rho_kc) ** 2)
    )


def saf_mode(mode, k_z, rho_k, phi_k):
    """Unit-normalised 3-D spectral amplitude ``eta(k) exp(i m phi_k) / sqrt(2 pi)``."""
    return saf_envelope(mode.envelope, k_z, rho_k) * np.exp(1j * mode.m * np.asarray(phi_k)) / math.sqrt(
        2.0 * math.pi
    )


def eta_tilde_closed(mode, rho, z, t):
    r"""Closed-form real-space amplitude :math:`\tilde\eta_m(\rho, z, t)`.

    .. math::
        \tilde\eta_m \approx i^m \sqrt{\frac{k_c\sin\theta_c}{2\pi\sigma_z\sigma_\rho}}
        J_m(\rho k_c \sin\theta_c)
        \exp\Big[-\frac{(ct - z\cos\theta_c)^2}{4\sigma_z^2\cos^2\theta_c}
        + i(k_{z,c} z - \omega_c t)\Big]

    Valid for a narrow spectral ring near the beam axis.  The prefactor makes
    the amplitude consistent with a unit-normalised spectrum, so it agrees
    with :func:`eta_tilde_quadrature`.  The helical factor is not included.
    """
    env = mode.envelope
    rho = np.asarray(rho, dtype=np.float64)
    if np.any(rho < 0):
        raise DomainError("rho must be non-negative")
    z = np.asarray(z, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    cos_t = math.cos(env.theta_c)
    amp = math.sqrt(env.rho_kc / (2.0 * math.pi * env.sigma_z * env.sigma_rho))
    lon = np.exp(-((SPEED_OF_LIGHT * t - z * cos_t) ** 2) / (4.0 * env.sigma_z**2 * cos_t**2))
    phase = np.exp(1j * (env.kz_c * z - env.omega_c * t))
    out = i_power(mode.m) * amp * bessel_j(mode.m, rho * env.rho_kc) * lon * phase
    return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class QuadratureValue:
    """Result of an oracle quadrature with its self-convergence check."""

    value: complex
    error: float
    converged: bool


_SPECTRAL_WIDTHS = 6.0


def spectral_window(env):
    """Truncated k-space box ``(kz_lo, kz_hi, rho_lo, rho_hi)`` at six Gaussian widths."""
    w = _SPECTRAL_WIDTHS
    return (
        env.kz_c - w / env.sigma_z,
        env.kz_c + w / env.sigma_z,
        max(0.0, env.rho_kc - w / env.sigma_rho),
        env.rho_kc + w / env.sigma_rho,
    )


def _eta_quad_once(mode, rho, z, t, n):
    env = mode.envelope
    kz_lo, kz_hi, r_lo, r_hi = spectral_window(env)
    rule = gauss_legendre(n)
    kz, wz = rule.scaled(kz_lo, kz_hi)
    rk, wr = rule.scaled(r_lo, r_hi)
    KZ, RK = np.meshgrid(kz, rk, indexing="ij")
    W = np.outer(wz, wr) * RK
    eta = saf_envelope(env, KZ, RK) / math.sqrt(2.0 * math.pi)
    # carrier phase k_zc*z - omega_c*t is factored out before summing
    phase = (KZ - env.kz_c) * z - env.delta_omega(KZ, RK) * t
    bes = bessel_j(mode.m, rho * RK.ravel()).reshape(RK.shape)
    g = W * eta * bes
    val = complex(np.sum(g * np.cos(phase)), np.sum(g * np.sin(phase)))
    carrier = np.exp(1j * (env.kz_c * z - env.omega_c * t))
    return i_power(mode.m) / math.sqrt(2.0 * math.pi) * val * carrier


def eta_tilde_quadrature(mode, rho, z, t, resolution=64):
    r"""Real-space amplitude by direct k-space quadrature.

    .. math::
        \tilde\eta_m = \frac{i^m}{\sqrt{2\pi}} \int dk_z \int \rho_k d\rho_k\,
        \frac{\eta(k_z,\rho_k)}{\sqrt{2\pi}}\, J_m(\rho\rho_k)\, e^{i(k_z z - \omega_k t)}

    with exact dispersion, truncated to six Gaussian widths in each spectral
    direction.  The result carries the change from doubling the resolution;
    ``converged`` is False when that change exceeds ``1e-4`` relative.

    Parameters
    ----------
    resolution : int
        Gauss-Legendre nodes per spectral axis, >= 32.
    """
    if resolution < 32:
        raise DomainError("resolution must be >= 32")
    if rho < 0:
        raise DomainError("rho must be non-negative")
    coarse = _eta_quad_once(mode, float(rho), float(z), float(t), int(resolution))
    fine = _eta_quad_once(mode, float(rho), float(z), float(t), min(2 * int(resolution), 2048))
    err = abs(fine - coarse)
    scale = max(abs(fine), 1e-300)
    return QuadratureValue(value=coarse, error=err, converged=err <= 1e-4 * scale or err < 1e-12 * _peak_scale(mode))


def _peak_scale(mode):
    env = mode.envelope
    return math.sqrt(env.rho_kc / (2.0 * math.pi * env.sigma_z * env.sigma_rho))


def wave_packet_sample(mode, position, t, evaluator="closed"):
    """Amplitude including the helical phase at a Cartesian ``position``."""
    x, y, z = (float(v) for v in position)
    rho = math.hypot(x, y)
    phi = math.atan2(y, x)
    if evaluator == "closed":
        eta = eta_tilde_closed(mode, rho, z, t)
    else:
        eta = eta_tilde_quadrature(mode, rho, z, t).value
    return WavePacketSample(value=complex(eta * np.exp(1j * mode.m * phi)), position=(x, y, z), time=float(t))


# ---------------------------------------------------------------------------
# transverse density


def _lommel_mass(m, k, a):
    """``int_0^a J_m(k r)^2 r dr`` in closed form."""
    x = k * a
    return 0.5 * a * a * (bessel_j(m, x) ** 2 - bessel_j(m - 1, x) * bessel_j(m + 1, x))


@dataclass(frozen=True, eq=False)
class RadialProfile:
    r"""Transverse density :math:`F_m(\rho) \propto J_m(\rho k_c\sin\theta_c)^2`.

    Normalised so that :math:`2\pi\int_0^{\rho_{max}} F_m\,\rho\,d\rho = 1`
    and defined as zero outside the window.

    Attributes
    ----------
    rho, values : ndarray
        Uniform samples on ``[0, window]``.
    norm : float
        Divisor applied to ``J_m^2``.
    """

    m: int
    rho_kc: float
    window: float
    norm: float
    rho: np.ndarray
    values: np.ndarray

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=np.float64)
        j = bessel_j(self.m, rho * self.rho_kc)
        out = np.where(rho <= self.window, j * j / self.norm, 0.0)
        return float(out) if out.ndim == 0 else out

    def peak_radius(self):
        """Radius of the sampled maximum."""
        return float(self.rho[int(np.argmax(self.values))])


def transverse_profile(mode, rho_max, n_samples=256):
    """Window-normalised transverse density of ``mode``.

    Raises
    ------
    WindowError
        The window captures less than half of the main intensity lobe
        (the disk out to the first zero of ``J_m``).
    """
    if not rho_max > 0:
        raise DomainError("rho_max must be positive")
    if n_samples < 64:
        raise DomainError("n_samples must be >= 64")
    m = abs(mode.m)
    k = mode.envelope.rho_kc
    lobe = bessel_j_zero(m, 1) / k
    captured = _lommel_mass(m, k, min(rho_max, lobe))
    reference = _lommel_mass(m, k, lobe)
    if captured < 0.5 * reference:
        raise WindowError(
            f"window {rho_max:.4g} m holds {captured / reference:.1%} of the m={m} main lobe "
            f"(first zero at {lobe:.4g} m)"
        )
    n_gl = min(2048, max(n_samples, int(rho_max * k) + 64))
    r, w = gauss_legendre(n_gl).scaled(0.0, rho_max)
    jr = bessel_j(m, r * k)
    norm = 2.0 * math.pi * float(np.sum(w * r * jr * jr))
    rho = np.linspace(0.0, rho_max, n_samples)
    js = bessel_j(m, rho * k)
    return RadialProfile(m=m, rho_kc=k, window=float(rho_max), norm=norm, rho=rho, values=js * js / norm)


# ---------------------------------------------------------------------------
# reflections and two-photon amplitudes


def reflect_position(r):
    """Mirror image ``(x, -y, z)`` of a point under a beam-splitter reflection."""
    x, y, z = r
    return (x, -y, z)


def reflect_mode(mode):
    """A reflection flips the sign of the OAM number."""
    return replace(mode, m=-mode.m)


def wave_packet(state, r, r_prime, t, mask=None):
    r"""Two-photon amplitude :math:`\tilde\xi(\mathbf r, \mathbf r', t)`.

    Photon A sits at ``r`` and, when ``mask`` is given, carries the extra
    phase ``exp(i Phi(x, y))``; photon B sits at ``r_prime`` and is delayed by
    ``state.delay_tau``.
    """
    x, y, z = r
    xp, yp, zp = r_prime
    rho, phi = math.hypot(x, y), math.atan2(y, x)
    rhop, phip = math.hypot(xp, yp), math.atan2(yp, xp)
    env = state.envelope
    total = 0.0j
    for a, b, c in state.terms():
        ea = eta_tilde_closed(TwistedMode(env, a), rho, z, t)
        eb = eta_tilde_closed(TwistedMode(env, b), rhop, zp, t + state.delay_tau)
        total += c * ea * eb * np.exp(1j * (a * phi + b * phip))
    if mask is not None:
        total *= np.exp(1j * float(mask.phase(x, y)))
    return complex(total)


def xi_cd(state, mask, r, r_prime, t):
    r"""Amplitude for one photon at each output port.

    :math:`\tilde\xi_{cd}(\mathbf r,\mathbf r') = \tilde\xi(\mathbf r,\mathbf r')
    - \tilde\xi(\bar{\mathbf r}', \bar{\mathbf r})` with ``bar`` the mirror
    map :func:`reflect_position`.
    """
    direct = wave_packet(state, r, r_prime, t, mask)
    swapped = wave_packet(state, reflect_position(r_prime), reflect_position(r), t, mask)
    return direct - swapped


def coherence_area(R, k0, sigma):
    """Coherence area ``pi R^2 / (k0^2 sigma^2)`` of a Gaussian-pumped pair."""
    for name, v in (("R", R), ("k0", k0), ("sigma", sigma)):
        if not v > 0:
            raise DomainError(f"{name} must be positive")
    return math.pi * R * R / (k0 * k0 * sigma * sigma)
