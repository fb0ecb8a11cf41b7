"""Strict JSON configuration.

Every section and key is optional; missing entries take the defaults of the
reference geometry (500 nm light, 1000-wavelength envelopes, cone angle
0.001 pi, a 50 x 50 sensor with 10 um pitch).  Unknown keys, wrong types and
out-of-range values raise :class:`ConfigError` naming the offending key.
"""

from dataclasses import asdict, dataclass, field, fields, replace
import json
import math

from .errors import ConfigError
from .hom import KGrid
from .imaging import EncryptionThresholds, SensorGrid
from .masks import PhaseMask, builtin_bitmaps
from .states import SPEED_OF_LIGHT, BesselGaussEnvelope, Family, TwistedMode, TwoPhotonState

IMAGE_FORMATS = ("csv", "pgm")
MASK_KINDS = ("sector", "checkerboard", "uniform", "raster", "builtin")


@dataclass(frozen=True)
class EnvelopeSection:
    wavelength: float = 500e-9
    sigma_z: float = None
    sigma_rho: float = None
    theta_c: float = 0.001 * math.pi


@dataclass(frozen=True)
class StateSection:
    family: str = "product_opposite"
    m: int = 1
    tau: float = 0.0


@dataclass(frozen=True)
class MaskSection:
    kind: str = "sector"
    fraction: float = 0.25
    start: float = 0.0
    step: float = math.pi
    base: float = 0.0
    cell: float = None
    origin: list = None
    value: float = 0.0
    file: str = None
    builtin: str = "checkerboard"
    phi_max: float = math.pi
    pitch: float = None
    center: list = None


@dataclass(frozen=True)
class SensorSection:
    n_x: int = 50
    n_y: int = 50
    pitch: float = 10e-6
    center: list = field(default_factory=lambda: [0.0, 0.0])
    subsamples: int = 4


@dataclass(frozen=True)
class QuadratureSection:
    n_rho: int = 256
    n_phi: int = 512
    window_factor: float = 1.5
    window: float = None
    phi_offset: float = 0.5


@dataclass(frozen=True)
class HomSection:
    n_kz: int = 24
    n_rho_k: int = 24
    n_phi_k: int = 16
    mode: str = "reduced"
    tau_min: float = -10.0
    tau_max: float = 10.0
    n_tau: int = 41
    masked_n_rho: int = 48
    masked_n_phi: int = 64


@dataclass(frozen=True)
class ImagingSection:
    floor: float = 1e-3


@dataclass(frozen=True)
class SnrSection:
    n_tps: int = 10000
    n_cs: float = 10000.0


@dataclass(frozen=True)
class EncryptionSection:
    accuracy: float = 0.99
    density_deviation: float = 1e-6
    support: float = 0.01
    cell: int = 4
    source: str = None


@dataclass(frozen=True)
class OutputSection:
    directory: str = "out"
    formats: list = field(default_factory=lambda: ["csv", "pgm"])


SECTIONS = {
    "envelope": EnvelopeSection,
    "state": StateSection,
    "mask": MaskSection,
    "sensor": SensorSection,
    "quadrature": QuadratureSection,
    "hom": HomSection,
    "imaging": ImagingSection,
    "snr": SnrSection,
    "encryption": EncryptionSection,
    "output": OutputSection,
}

# value kinds per key; anything not listed is a float
_INTS = {"state.m", "sensor.n_x", "sensor.n_y", "sensor.subsamples", "quadrature.n_rho", "quadrature.n_phi",
         "hom.n_kz", "hom.n_rho_k", "hom.n_phi_k", "hom.n_tau", "hom.masked_n_rho", "hom.masked_n_phi",
         "snr.n_tps", "encryption.cell"}
_STRS = {"state.family", "mask.kind", "mask.file", "mask.builtin", "hom.mode", "encryption.source",
         "output.directory"}
_PAIRS = {"mask.origin", "mask.center", "sensor.center"}
_LISTS = {"output.formats"}
_POSITIVE = {"envelope.wavelength", "envelope.sigma_z", "envelope.sigma_rho", "envelope.theta_c",
             "mask.cell", "mask.pitch", "sensor.pitch", "quadrature.window_factor", "quadrature.window",
             "imaging.floor", "encryption.accuracy", "encryption.density_deviation", "encryption.support",
             "mask.phi_max"}
_AT_LEAST = {"sensor.n_x": 1, "sensor.n_y": 1, "sensor.subsamples": 1, "quadrature.n_rho": 8,
             "quadrature.n_phi": 8, "hom.n_kz": 16, "hom.n_rho_k": 16, "hom.n_phi_k": 16, "hom.n_tau": 1,
             "hom.masked_n_rho": 4, "hom.masked_n_phi": 4, "snr.n_tps": 1, "encryption.cell": 1}


def _number(value, path, integer):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a {'integer' if integer else 'number'}, got {json.dumps(value)}")
    if integer:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(path, f"expected an integer, got {value!r}")
        return int(value)
    if not math.isfinite(value):
        raise ConfigError(path, "must be finite")
    return float(value)


def _convert(path, value):
    if value is None:
        return None
    if path in _INTS:
        out = _number(value, path, True)
    elif path in _STRS:
        if not isinstance(value, str):
            raise ConfigError(path, f"expected a string, got {json.dumps(value)}")
        out = value
    elif path in _PAIRS:
        if not isinstance(value, list) or len(value) != 2:
            raise ConfigError(path, "expected a two-element list [x, y]")
        out = [_number(v, f"{path}[{i}]", False) for i, v in enumerate(value)]
    elif path in _LISTS:
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            raise ConfigError(path, "expected a list of strings")
        out = list(value)
    else:
        out = _number(value, path, False)
    if path in _POSITIVE and not out > 0:
        raise ConfigError(path, f"must be positive, got {out!r}")
    if path in _AT_LEAST and out < _AT_LEAST[path]:
        raise ConfigError(path, f"must be >= {_AT_LEAST[path]}, got {out!r}")
    return out


def _check(cfg):
    if not cfg.envelope.theta_c < 0.5 * math.pi:
        raise ConfigError("envelope.theta_c", "must be below pi/2")
    try:
        Family.parse(cfg.state.family)
    except Exception as exc:
        raise ConfigError("state.family", str(exc)) from None
    if abs(cfg.state.m) > 60:
        raise ConfigError("state.m", "|m| must not exceed 60")
    if cfg.mask.kind not in MASK_KINDS:
        raise ConfigError("mask.kind", f"expected one of {', '.join(MASK_KINDS)}")
    if not 0.0 <= cfg.mask.fraction <= 1.0:
        raise ConfigError("mask.fraction", "must lie in [0, 1]")
    if cfg.mask.kind == "raster" and not cfg.mask.file:
        raise ConfigError("mask.file", "a raster mask needs a PGM file")
    if cfg.mask.kind == "builtin" and cfg.mask.builtin not in builtin_bitmaps(2, 2):
        raise ConfigError("mask.builtin", f"expected one of {', '.join(sorted(builtin_bitmaps(2, 2)))}")
    if cfg.quadrature.n_phi % 2:
        raise ConfigError("quadrature.n_phi", "must be even")
    if cfg.hom.n_phi_k % 2:
        raise ConfigError("hom.n_phi_k", "must be even")
    if cfg.hom.masked_n_phi % 2:
        raise ConfigError("hom.masked_n_phi", "must be even")
    if cfg.hom.mode not in ("reduced", "full"):
        raise ConfigError("hom.mode", "expected 'reduced' or 'full'")
    if cfg.hom.tau_max < cfg.hom.tau_min:
        raise ConfigError("hom.tau_max", "must not be below hom.tau_min")
    if cfg.snr.n_cs < 0:
        raise ConfigError("snr.n_cs", "must be non-negative")
    if cfg.encryption.accuracy > 1:
        raise ConfigError("encryption.accuracy", "must not exceed 1")
    for i, f in enumerate(cfg.output.formats):
        if f not in IMAGE_FORMATS:
            raise ConfigError(f"output.formats[{i}]", f"expected one of {', '.join(IMAGE_FORMATS)}")


@dataclass(frozen=True)
class SimulationConfig:
    """Validated configuration; one attribute per section."""

    envelope: EnvelopeSection = field(default_factory=EnvelopeSection)
    state: StateSection = field(default_factory=StateSection)
    mask: MaskSection = field(default_factory=MaskSection)
    sensor: SensorSection = field(default_factory=SensorSection)
    quadrature: QuadratureSection = field(default_factory=QuadratureSection)
    hom: HomSection = field(default_factory=HomSection)
    imaging: ImagingSection = field(default_factory=ImagingSection)
    snr: SnrSection = field(default_factory=SnrSection)
    encryption: EncryptionSection = field(default_factory=EncryptionSection)
    output: OutputSection = field(default_factory=OutputSection)

    # builders --------------------------------------------------------------

    def build_envelope(self):
        e = self.envelope
        try:
            return BesselGaussEnvelope.from_wavelength(e.wavelength, e.sigma_z, e.sigma_rho, e.theta_c)
        except Exception as exc:
            raise ConfigError("envelope", str(exc)) from None

    def build_state(self, envelope=None):
        env = self.build_envelope() if envelope is None else envelope
        try:
            state = TwoPhotonState(Family.parse(self.state.family), self.state.m, env, self.state.tau)
            state.terms()
        except Exception as exc:
            raise ConfigError("state", str(exc)) from None
        return state

    def build_mode(self):
        return TwistedMode(self.build_envelope(), self.state.m)

    def build_grid(self):
        s = self.sensor
        return SensorGrid(s.n_x, s.n_y, s.pitch, tuple(s.center), s.subsamples)

    def build_kgrid(self):
        h = self.hom
        return KGrid(h.n_kz, h.n_rho_k, h.n_phi_k, h.mode)

    def delays(self, envelope=None):
        """Delay list in seconds from the scan settings (given in units of sigma_z / c)."""
        env = self.build_envelope() if envelope is None else envelope
        h = self.hom
        unit = env.sigma_z / SPEED_OF_LIGHT
        if h.n_tau == 1:
            return [h.tau_min * unit]
        return [(h.tau_min + (h.tau_max - h.tau_min) * i / (h.n_tau - 1)) * unit for i in range(h.n_tau)]

    def build_mask(self, grid=None, read_file=None):
        """Phase mask described by the ``mask`` section.

        ``read_file(path) -> bytes`` is used for raster masks.
        """
        from .io import read_mask_pgm

        grid = self.build_grid() if grid is None else grid
        m = self.mask
        pitch = m.pitch if m.pitch is not None else grid.pitch
        center = tuple(m.center) if m.center is not None else grid.center
        if m.kind == "uniform":
            return PhaseMask.uniform(m.value)
        if m.kind == "sector":
            return PhaseMask.sector(m.fraction, m.step, m.start, m.base)
        if m.kind == "checkerboard":
            cell = m.cell if m.cell is not None else 4 * grid.pitch
            if m.origin is not None:
                origin = tuple(m.origin)
            else:
                # anchor at the top-left sensor corner so cells align with pixels
                origin = (grid.center[0] - 0.5 * grid.n_x * grid.pitch, grid.center[1] + 0.5 * grid.n_y * grid.pitch)
            return PhaseMask.checkerboard(cell, m.step, origin, m.base)
        if m.kind == "builtin":
            bits = builtin_bitmaps(grid.n_x, grid.n_y, self.encryption.cell)[m.builtin]
            return PhaseMask.from_bitmap(bits, pitch, center, step=m.phi_max)
        if read_file is None:
            with open(m.file, "rb") as fh:
                data = fh.read()
        else:
            data = read_file(m.file)
        return read_mask_pgm(data, pitch, center, m.phi_max)

    def thresholds(self):
        e = self.encryption
        return EncryptionThresholds(e.accuracy, e.density_deviation, e.support, self.imaging.floor)

    def to_dict(self):
        return asdict(self)

    def echo(self):
        """Effective configuration as canonical JSON text."""
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _load(raw):
    if not isinstance(raw, dict):
        raise ConfigError("", "top level must be a JSON object")
    sections = {}
    for name, value in raw.items():
        if name not in SECTIONS:
            raise ConfigError(name, "unknown section")
        if not isinstance(value, dict):
            raise ConfigError(name, "expected an object")
        cls = SECTIONS[name]
        known = {f.name for f in fields(cls)}
        kwargs = {}
        for key, v in value.items():
            path = f"{name}.{key}"
            if key not in known:
                raise ConfigError(path, "unknown key")
            kwargs[key] = _convert(path, v)
        sections[name] = cls(**kwargs)
    env = sections.get("envelope", EnvelopeSection())
    # the echoed config shows the widths actually used
    sections["envelope"] = replace(
        env,
        sigma_z=1000.0 * env.wavelength if env.sigma_z is None else env.sigma_z,
        sigma_rho=1000.0 * env.wavelength if env.sigma_rho is None else env.sigma_rho,
    )
    cfg = SimulationConfig(**sections)
    _check(cfg)
    cfg.build_envelope()
    return cfg


def parse_config(text):
    """Parse and validate a JSON configuration document."""
    try:
        raw = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"malformed JSON: {exc.msg} at line {exc.lineno} column {exc.colno}") from None
    return _load(raw)


def apply_overrides(text, assignments):
    """Merge ``section.key=value`` assignments (values as JSON) into a config document."""
    try:
        raw = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"malformed JSON: {exc.msg} at line {exc.lineno} column {exc.colno}") from None
    if not isinstance(raw, dict):
        raise ConfigError("", "top level must be a JSON object")
    for item in assignments:
        key, sep, value = item.partition("=")
        parts = key.split(".")
        if not sep or len(parts) != 2 or not all(parts):
            raise ConfigError(key, "overrides take the form section.key=value")
        try:
            parsed = json.loads(value)
        except json.JSONDecodeError:
            parsed = value
        section = raw.setdefault(parts[0], {})
        if not isinstance(section, dict):
            raise ConfigError(parts[0], "expected an object")
        section[parts[1]] = parsed
    return json.dumps(raw)
