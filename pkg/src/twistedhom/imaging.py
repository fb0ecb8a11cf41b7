r"""Coincidence imaging with a phase object in one arm.

Photon A carries ``m`` and picks up the object phase ``Phi(x, y)``; photon B
carries ``-m``.  With the normalised transverse density ``F_m`` and the
overlap integrals

.. math::
    I_1 = \int F_m e^{-i\Phi(\rho,\varphi)}, \qquad
    I_2 = \int F_m e^{-i\Phi(\rho,-\varphi)}

the port-d density is :math:`n_d = \tfrac14 F_m\{4 + 2\,\mathrm{Re}[(I_1-I_2)e^{i\Phi}]\}`
and the bucket-coincidence field is
:math:`\langle\mathcal C_d\rangle = \tfrac14 F_m[2 - 2\,\mathrm{Re}(I_2 e^{i\Phi})]`.
Since :math:`I_1 = I_2` for axially symmetric ``F_m``, the texture drops out
of ``n_d`` but survives in ``C_d``.

Images are arrays of shape ``(n_y, n_x)`` with row 0 at the top (largest
``y``).  Pixel values are midpoint sums over ``s x s`` subsamples times the
subsample area, i.e. probabilities per pixel.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from . import _backend
from .core_math import polar_nodes
from .errors import ContractError, DomainError
from .masks import PhaseMask
from .states import TwistedMode, transverse_profile

UNITS = ("probability-per-pixel", "dimensionless", "density")


@dataclass(frozen=True)
class SensorGrid:
    """Pixel geometry of the image sensor (object plane, metres).

    ``center`` is the sensor centre relative to the beam axis.
    """

    n_x: int = 50
    n_y: int = 50
    pitch: float = 10e-6
    center: tuple = (0.0, 0.0)
    subsamples: int = 4

    def __post_init__(self):
        if self.n_x < 1 or self.n_y < 1:
            raise DomainError("pixel counts must be >= 1")
        if not (math.isfinite(self.pitch) and self.pitch > 0):
            raise DomainError("pitch must be positive")
        if self.subsamples < 1:
            raise DomainError("subsamples must be >= 1")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))

    @property
    def shape(self):
        return (self.n_y, self.n_x)

    def half_diagonal(self):
        """Distance from the beam axis to the farthest sensor corner."""
        cx, cy = self.center
        hx, hy = 0.5 * self.n_x * self.pitch, 0.5 * self.n_y * self.pitch
        return max(math.hypot(cx + sx * hx, cy + sy * hy) for sx in (-1, 1) for sy in (-1, 1))

    def default_window(self, factor=1.5):
        return factor * self.half_diagonal()

    def pixel_centers(self):
        """``(x, y)`` arrays of shape ``(n_y, n_x)``."""
        cx, cy = self.center
        xs = cx + (np.arange(self.n_x) - 0.5 * (self.n_x - 1)) * self.pitch
        ys = cy + (0.5 * (self.n_y - 1) - np.arange(self.n_y)) * self.pitch
        return np.meshgrid(xs, ys)

    def subsample_points(self):
        """``(x, y)`` arrays of shape ``(n_y, n_x, s*s)`` at subpixel midpoints."""
        s = self.subsamples
        off = ((np.arange(s) + 0.5) / s - 0.5) * self.pitch
        X, Y = self.pixel_centers()
        ox, oy = np.meshgrid(off, -off)
        return X[:, :, None] + ox.ravel()[None, None, :], Y[:, :, None] + oy.ravel()[None, None, :]

    @property
    def subsample_area(self):
        return (self.pitch / self.subsamples) ** 2

    def describe(self):
        return (f"{self.n_x}x{self.n_y},pitch={self.pitch!r},center=({self.center[0]!r},{self.center[1]!r}),"
                f"s={self.subsamples}")


@dataclass(frozen=True, eq=False)
class ScalarImage:
    """Real-valued field on a sensor grid.

    Attributes
    ----------
    values : ndarray
        Shape ``(n_y, n_x)``; invalid pixels hold 0.0.
    units : str
        One of ``probability-per-pixel``, ``dimensionless``, ``density``.
    valid : ndarray of bool
        False where the value is undefined (exported as ``invalid``).
    metadata : dict
        Provenance record (state, mask, window, grid, overlaps, ...).
    """

    values: np.ndarray
    units: str
    grid: SensorGrid
    valid: np.ndarray = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != self.grid.shape:
            raise ContractError(f"image shape {v.shape} does not match grid {self.grid.shape}")
        if self.units not in UNITS:
            raise ContractError(f"unknown units {self.units!r}")
        valid = np.ones(v.shape, dtype=bool) if self.valid is None else np.asarray(self.valid, dtype=bool)
        if not np.all(np.isfinite(v[valid])):
            raise ContractError("image contains non-finite values")
        v = np.where(valid, v, 0.0)
        for arr in (v, valid):
            arr.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "valid", valid)

    def total(self):
        return float(np.sum(self.values[self.valid]))


@dataclass(frozen=True)
class OverlapIntegrals:
    """Overlap integrals of the mask phase under the normalised density."""

    i1: complex
    i2: complex
    window: float
    quadrature_error: float

    def __post_init__(self):
        for name in ("i1", "i2"):
            if abs(getattr(self, name)) > 1 + 1e-9:
                raise ContractError(f"|{name}| exceeds 1")


def _weighted_mean(weight, phase):
    total = float(np.sum(weight))
    re = float(np.sum(weight * np.cos(phase)))
    im = float(np.sum(weight * -np.sin(phase)))
    return complex(re / total, im / total)


def _overlaps_once(profile, mask, window, n_rho, n_phi, phi_offset):
    rho, phi, w = polar_nodes(window, n_rho, n_phi, phi_offset)
    # F depends on rho only; evaluate once per radius
    f = profile(rho[:, 0])[:, None]
    weight = w * f
    i1 = _weighted_mean(weight, mask.phase_polar(rho, phi))
    i2 = _weighted_mean(weight, mask.phase_polar(rho, -phi))
    return i1, i2


def overlap_integrals(mode, mask, window, resolution=(256, 512), phi_offset=0.5):
    """``I_1`` and ``I_2`` over the disk of radius ``window``.

    The density weight is normalised on the same nodes, so ``Phi = 0`` gives
    exactly 1.  ``quadrature_error`` is the change against a half-resolution
    evaluation.  ``phi_offset`` other than 0 or 0.5 gives an azimuthal grid
    that does not map onto itself under ``phi -> -phi``.

    Raises
    ------
    WindowError
        Propagated from :func:`transverse_profile`.
    """
    if not window > 0:
        raise DomainError("window must be positive")
    n_rho, n_phi = (int(v) for v in resolution)
    if n_rho < 8 or n_phi < 8 or n_phi % 2:
        raise DomainError("resolution needs n_rho >= 8 and an even n_phi >= 8")
    profile = transverse_profile(mode, window)
    i1, i2 = _overlaps_once(profile, mask, window, n_rho, n_phi, phi_offset)
    h1, h2 = _overlaps_once(profile, mask, window, n_rho // 2, (n_phi // 2) + (n_phi // 2) % 2, phi_offset)
    err = max(abs(i1 - h1), abs(i2 - h2))
    return OverlapIntegrals(i1=i1, i2=i2, window=float(window), quadrature_error=float(err))


@dataclass(frozen=True, eq=False)
class ImagingState:
    """Product imaging state: photon A (``m``, masked) and photon B (``-m``).

    Parameters
    ----------
    mode : TwistedMode
        Photon A's mode; photon B carries ``-mode.m``.
    mask : PhaseMask
        Object phase on path A.
    window : float or None
        Normalisation radius for ``F_m``; None uses ``window_factor`` times
        the sensor half-diagonal of the grid being rendered.
    """

    mode: TwistedMode
    mask: PhaseMask = field(default_factory=PhaseMask.uniform)
    window: float = None
    window_factor: float = 1.5
    resolution: tuple = (256, 512)
    phi_offset: float = 0.5
    _cache: dict = field(default_factory=dict, repr=False)

    def resolve(self, grid):
        """``(window, profile, overlaps)`` for rendering on ``grid``."""
        window = self.window if self.window is not None else grid.default_window(self.window_factor)
        if window not in self._cache:
            profile = transverse_profile(self.mode, window)
            ov = overlap_integrals(self.mode, self.mask, window, self.resolution, self.phi_offset)
            self._cache[window] = (profile, ov)
        profile, ov = self._cache[window]
        return window, profile, ov

    def describe(self):
        return f"product_opposite(m={self.mode.m})"


def _metadata(state, grid, window, ov, **extra):
    meta = {
        "state": state.describe(),
        "m": str(state.mode.m),
        "mask": state.mask.describe(),
        "window": repr(float(window)),
        "grid": grid.describe(),
        "I1_re": repr(ov.i1.real),
        "I1_im": repr(ov.i1.imag),
        "I2_re": repr(ov.i2.real),
        "I2_im": repr(ov.i2.imag),
    }
    meta.update({k: str(v) for k, v in extra.items()})
    return meta


def _integrate(grid, sub):
    return _backend.active().pixel_sum(sub, _backend.threads()) * grid.subsample_area


def _fields(state, grid):
    window, profile, ov = state.resolve(grid)
    X, Y = grid.subsample_points()
    F = profile(np.hypot(X, Y))
    return window, ov, X, Y, F


def density_port_d(state, grid):
    """Photon density at port d, evaluated with the full ``(I_1 - I_2)`` bracket."""
    window, ov, X, Y, F = _fields(state, grid)
    phase = state.mask.phase(X, Y)
    d = ov.i1 - ov.i2
    bracket = 4.0 + 2.0 * (d.real * np.cos(phase) - d.imag * np.sin(phase))
    vals = _integrate(grid, 0.25 * F * bracket)
    return ScalarImage(vals, "probability-per-pixel", grid, metadata=_metadata(state, grid, window, ov, field="n_d"))


def _coincidence(state, grid, mirror):
    window, ov, X, Y, F = _fields(state, grid)
    if mirror:
        phase = state.mask.phase(X, -Y)
        i = ov.i1
    else:
        phase = state.mask.phase(X, Y)
        i = ov.i2
    re = i.real * np.cos(phase) - i.imag * np.sin(phase)
    vals = _integrate(grid, 0.25 * F * (2.0 - 2.0 * re))
    name = "C_c" if mirror else "C_d"
    return ScalarImage(vals, "probability-per-pixel", grid, metadata=_metadata(state, grid, window, ov, field=name))


def coincidence_port_d(state, grid):
    """Bucket-coincidence field with the sensor at port d."""
    return _coincidence(state, grid, mirror=False)


def coincidence_port_c(state, grid):
    """Bucket-coincidence field with the sensor at port c (the mirrored image)."""
    return _coincidence(state, grid, mirror=True)


def reference_density(state, grid):
    """Density with the mask removed (``Phi = 0``), same window and grid."""
    window, profile, _ = state.resolve(grid)
    X, Y = grid.subsample_points()
    F = profile(np.hypot(X, Y))
    bare = ImagingState(state.mode, PhaseMask.uniform(0.0), window, state.window_factor,
                        state.resolution, state.phi_offset)
    _, _, ov = bare.resolve(grid)
    return ScalarImage(_integrate(grid, F), "probability-per-pixel", grid,
                       metadata=_metadata(bare, grid, window, ov, field="n_d_reference"))


def rescaled_signal(coincidence, density, floor=1e-3):
    """``S_d = (C_d - n_d/2) / (n_d/2)`` where ``n_d >= floor * max(n_d)``.

    Other pixels are marked invalid.

    Raises
    ------
    ContractError
        The images live on different grids.
    """
    if not floor > 0:
        raise DomainError("floor must be positive")
    if coincidence.grid != density.grid or coincidence.values.shape != density.values.shape:
        raise ContractError("coincidence and density images must share a grid")
    n = density.values
    valid = (n >= floor * float(np.max(n))) & (n > 0)
    half = 0.5 * np.where(valid, n, 1.0)
    vals = np.where(valid, (coincidence.values - half) / half, 0.0)
    meta = dict(coincidence.metadata)
    meta.update(field="S_d", floor=repr(float(floor)))
    return ScalarImage(vals, "dimensionless", coincidence.grid, valid=valid, metadata=meta)


def rescaled_range_bound(ov):
    """Bound ``eps`` with valid ``|S_d| <= |I_2| + eps`` given the computed overlaps."""
    d = abs(ov.i1 - ov.i2)
    if d >= 2.0:
        return math.inf
    return (abs(ov.i2) + 0.5 * d) / (1.0 - 0.5 * d) - abs(ov.i2)


def mach_zehnder_density(mode, mask, grid, window=None, window_factor=1.5):
    """Coherent-state baseline ``F_m |exp(i(m phi + Phi)) + exp(i m phi)|^2 / 4 = F_m cos^2(Phi/2)``."""
    window = grid.default_window(window_factor) if window is None else window
    profile = transverse_profile(mode, window)
    X, Y = grid.subsample_points()
    F = profile(np.hypot(X, Y))
    vals = _integrate(grid, F * 0.5 * (1.0 + np.cos(mask.phase(X, Y))))
    meta = {"state": f"coherent(m={mode.m})", "m": str(mode.m), "mask": mask.describe(),
            "window": repr(float(window)), "grid": grid.describe(), "field": "mach_zehnder"}
    return ScalarImage(vals, "probability-per-pixel", grid, metadata=meta)


# ---------------------------------------------------------------------------
# signal-to-noise


def snr_two_photon(value, n_measurements):
    """``sqrt(N) C / sqrt(C - C^2)`` for a coincidence probability ``C`` in ``[0, 1)``."""
    if isinstance(n_measurements, bool) or int(n_measurements) != n_measurements or n_measurements < 1:
        raise DomainError("n_measurements must be a positive integer")
    if not 0.0 <= value < 1.0:
        raise DomainError("coincidence value must lie in [0, 1)")
    if value == 0.0:
        return 0.0
    return math.sqrt(n_measurements) * value / math.sqrt(value - value * value)


def snr_coherent(mean_pixel_count):
    """Shot-noise-limited ``<D>/sqrt(<D>) = sqrt(<D>)``."""
    if not mean_pixel_count >= 0:
        raise DomainError("mean pixel count must be non-negative")
    return math.sqrt(mean_pixel_count)


def snr_two_photon_map(coincidence, n_measurements):
    vals = np.array([[snr_two_photon(float(v), n_measurements) for v in row] for row in coincidence.values])
    meta = dict(coincidence.metadata, field="snr_tps", n_tps=str(n_measurements))
    return ScalarImage(vals, "dimensionless", coincidence.grid, metadata=meta)


def snr_coherent_map(density, n_photons):
    """SNR map for a coherent pulse with ``n_photons`` mean photons spread as ``density``."""
    if not n_photons >= 0:
        raise DomainError("n_photons must be non-negative")
    vals = np.sqrt(n_photons * density.values)
    meta = dict(density.metadata, field="snr_cs", n_cs=repr(float(n_photons)))
    return ScalarImage(vals, "dimensionless", density.grid, metadata=meta)


# ---------------------------------------------------------------------------
# encryption round trip


@dataclass(frozen=True)
class EncryptionThresholds:
    accuracy: float = 0.99
    density_deviation: float = 1e-6
    support: float = 0.01
    floor: float = 1e-3


@dataclass(frozen=True, eq=False)
class EncryptionReport:
    """Outcome of hiding a bitmap in the phase and reading it back.

    ``accuracy`` is the better of direct and complemented agreement: a global
    phase shift of the mask leaves every observable unchanged, so the image
    and its complement cannot be told apart.
    """

    passed: bool
    accuracy: float
    accuracy_direct: float
    complemented: bool
    density_deviation: float
    support_pixels: int
    trivially_uniform: bool
    truth: np.ndarray
    recovered: np.ndarray
    density: ScalarImage
    coincidence: ScalarImage
    rescaled: ScalarImage
    overlaps: OverlapIntegrals

    def lines(self):
        return [
            f"passed={self.passed}",
            f"accuracy={self.accuracy!r}",
            f"accuracy_direct={self.accuracy_direct!r}",
            f"complemented={self.complemented}",
            f"density_deviation={self.density_deviation!r}",
            f"support_pixels={self.support_pixels}",
            f"trivially_uniform={self.trivially_uniform}",
            f"I1={self.overlaps.i1.real!r},{self.overlaps.i1.imag!r}",
            f"I2={self.overlaps.i2.real!r},{self.overlaps.i2.imag!r}",
        ]


def max_relative_deviation(image, reference):
    peak = float(np.max(np.abs(reference.values)))
    return float(np.max(np.abs(image.values - reference.values))) / peak if peak else 0.0


def encryption_roundtrip(mode, mask, grid, thresholds=None, source=None, window=None,
                         resolution=(256, 512)):
    """Render ``n_d``, ``C_d`` and ``S_d`` and recover the bitmap by the sign of ``S_d``.

    ``source`` is the hidden bitmap (``(n_y, n_x)`` booleans).  When omitted,
    the truth is read off the mask at pixel centres as ``cos(Phi) < 0``.
    Failure to meet the thresholds is reported, not raised.
    """
    th = EncryptionThresholds() if thresholds is None else thresholds
    state = ImagingState(mode, mask, window, resolution=resolution)
    n_d = density_port_d(state, grid)
    ref = reference_density(state, grid)
    c_d = coincidence_port_d(state, grid)
    s_d = rescaled_signal(c_d, n_d, th.floor)
    _, _, ov = state.resolve(grid)
    if source is None:
        X, Y = grid.pixel_centers()
        truth = np.cos(mask.phase(X, Y)) < 0.0
    else:
        truth = np.asarray(source, dtype=bool)
        if truth.shape != grid.shape:
            raise ContractError(f"source bitmap shape {truth.shape} does not match grid {grid.shape}")
    recovered = (s_d.values > 0.0) & s_d.valid
    support = (ref.values >= th.support * float(np.max(ref.values))) & s_d.valid
    n_support = int(np.count_nonzero(support))
    if n_support:
        direct = float(np.count_nonzero(recovered[support] == truth[support])) / n_support
    else:
        direct = 0.0
    accuracy = max(direct, 1.0 - direct)
    deviation = max_relative_deviation(n_d, ref)
    uniform = bool(np.all(truth == truth.flat[0]))
    passed = accuracy >= th.accuracy and deviation < th.density_deviation and n_support > 0
    return EncryptionReport(
        passed=passed, accuracy=accuracy, accuracy_direct=direct, complemented=direct < 0.5,
        density_deviation=deviation, support_pixels=n_support, trivially_uniform=uniform,
        truth=truth, recovered=recovered, density=n_d, coincidence=c_d, rescaled=s_d, overlaps=ov,
    )
