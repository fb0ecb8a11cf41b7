"""Phase masks: the object texture imprinted on the imaging photon.

A mask maps Cartesian points ``(x, y)`` in the object plane (metres, beam
axis at the origin) to a phase in radians.  All kinds evaluate
deterministically on arrays.
"""

from dataclasses import dataclass, field
import hashlib
import math

import numpy as np

from . import _backend
from .errors import DomainError

KINDS = ("raster", "sector", "checkerboard", "uniform")
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, eq=False)
class PhaseMask:
    """Phase texture ``Phi(x, y)``.

    Use the ``sector``, ``checkerboard``, ``uniform``, ``raster`` and
    ``from_bitmap`` constructors rather than calling this directly.

    Attributes
    ----------
    kind : str
        One of ``raster``, ``sector``, ``checkerboard``, ``uniform``.
    params : dict
        Kind-specific parameters (see constructors).
    data : ndarray or None
        Raster phases, shape ``(n_y, n_x)``, row 0 at the top (largest y).
    levels : ndarray or None
        8-bit grey levels the raster came from, kept for lossless export.
    """

    kind: str
    params: dict = field(default_factory=dict)
    data: np.ndarray = None
    levels: np.ndarray = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown mask kind {self.kind!r}")
        for k, v in self.params.items():
            if isinstance(v, float) and not math.isfinite(v):
                raise DomainError(f"mask parameter {k} must be finite")
        if self.kind == "raster":
            d = np.asarray(self.data, dtype=np.float64)
            if d.ndim != 2 or d.size == 0:
                raise DomainError("raster data must be a non-empty 2-D array")
            if not np.all(np.isfinite(d)):
                raise DomainError("raster phases must be finite")
            d = d.copy()
            d.setflags(write=False)
            object.__setattr__(self, "data", d)

    # constructors ---------------------------------------------------------

    @classmethod
    def uniform(cls, value=0.0):
        """Constant phase ``value`` everywhere."""
        return cls("uniform", {"value": float(value)})

    @classmethod
    def sector(cls, fraction, step=math.pi, start=0.0, base=0.0):
        """Phase ``base + step`` for azimuths in ``[start, start + 2 pi fraction)``, ``base`` elsewhere."""
        if not 0.0 <= fraction <= 1.0:
            raise DomainError("sector fraction must lie in [0, 1]")
        return cls("sector", {"fraction": float(fraction), "step": float(step),
                              "start": float(start), "base": float(base)})

    @classmethod
    def checkerboard(cls, cell, step=math.pi, origin=(0.0, 0.0), base=0.0):
        """Square cells of side ``cell``; cells with odd index parity get ``base + step``."""
        if not cell > 0:
            raise DomainError("checkerboard cell must be positive")
        return cls("checkerboard", {"cell": float(cell), "step": float(step),
                                    "x0": float(origin[0]), "y0": float(origin[1]), "base": float(base)})

    @classmethod
    def raster(cls, phases, pitch, center=(0.0, 0.0), levels=None, phi_max=None):
        """Sampled phases on a regular grid, bilinear between cell centres, zero outside."""
        if not pitch > 0:
            raise DomainError("raster pitch must be positive")
        params = {"pitch": float(pitch), "cx": float(center[0]), "cy": float(center[1])}
        if phi_max is not None:
            params["phi_max"] = float(phi_max)
        return cls("raster", params, data=phases, levels=levels)

    @classmethod
    def from_levels(cls, levels, pitch, center=(0.0, 0.0), phi_max=math.pi, maxval=255):
        """Raster from grey levels ``v``, mapped to ``phi_max * v / maxval``."""
        lv = np.asarray(levels)
        if lv.ndim != 2:
            raise DomainError("grey levels must be a 2-D array")
        if np.any(lv < 0) or np.any(lv > maxval):
            raise DomainError(f"grey levels must lie in [0, {maxval}]")
        return cls.raster(phi_max * lv.astype(np.float64) / maxval, pitch, center,
                          levels=lv.astype(np.uint8) if maxval == 255 else None, phi_max=phi_max)

    @classmethod
    def from_bitmap(cls, bits, pitch, center=(0.0, 0.0), step=math.pi):
        """Binary source image to a ``0 / step`` raster."""
        b = np.asarray(bits).astype(bool)
        return cls.from_levels(np.where(b, 255, 0), pitch, center, phi_max=step)

    # evaluation -----------------------------------------------------------

    def phase(self, x, y):
        """Phase at Cartesian points (broadcast arrays, metres)."""
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        x, y = np.broadcast_arrays(x, y)
        p = self.params
        if self.kind == "uniform":
            out = np.full(x.shape, p["value"])
        elif self.kind == "sector":
            phi = np.mod(np.arctan2(y, x) - p["start"], TWO_PI)
            inside = phi < TWO_PI * p["fraction"]
            out = np.where(inside, p["base"] + p["step"], p["base"])
        elif self.kind == "checkerboard":
            c = p["cell"]
            ix = np.floor((x - p["x0"]) / c)
            iy = np.floor((y - p["y0"]) / c)
            odd = np.mod(ix + iy, 2.0) == 1.0
            out = np.where(odd, p["base"] + p["step"], p["base"])
        else:
            ny, nx = self.data.shape
            pitch = p["pitch"]
            x_left = p["cx"] - 0.5 * nx * pitch
            y_top = p["cy"] + 0.5 * ny * pitch
            out = _backend.active().bilinear(
                self.data, x_left, y_top, pitch, x.ravel(), y.ravel(), _backend.threads()
            ).reshape(x.shape)
        if "offset" in p:
            out = out + p["offset"]
        return float(out) if out.ndim == 0 else out

    def phase_polar(self, rho, phi):
        rho = np.asarray(rho, dtype=np.float64)
        phi = np.asarray(phi, dtype=np.float64)
        return self.phase(rho * np.cos(phi), rho * np.sin(phi))

    def shifted(self, c):
        """Same texture plus a global constant ``c`` (applied everywhere, also outside a raster)."""
        p = dict(self.params)
        p["offset"] = p.get("offset", 0.0) + float(c)
        return PhaseMask(self.kind, p, data=self.data, levels=self.levels)

    def describe(self):
        """Stable one-line description for metadata."""
        p = self.params
        if self.kind == "raster":
            ny, nx = self.data.shape
            extra = "".join(f"{k}={p[k]!r}," for k in ("phi_max", "offset") if k in p)
            return f"raster({nx}x{ny},pitch={p['pitch']!r},center=({p['cx']!r},{p['cy']!r}),{extra}sha={self._digest()})"
        inner = ",".join(f"{k}={p[k]!r}" for k in sorted(p))
        return f"{self.kind}({inner})"

    def _digest(self):
        return hashlib.sha256(np.ascontiguousarray(self.data).tobytes()).hexdigest()[:12]


def builtin_bitmaps(n_x=50, n_y=50, cell=4):
    """Binary test textures on an ``n_y x n_x`` pixel grid (True = phase step).

    Names: ``checkerboard`` (``cell``-pixel squares anchored at the top-left
    corner), ``quadrant`` (upper-right quarter), ``half`` (upper half),
    ``cross`` (a centred plus sign) and ``rings`` (concentric annuli).
    """
    iy, ix = np.mgrid[0:n_y, 0:n_x]
    xc = ix - (n_x - 1) / 2.0
    yc = (n_y - 1) / 2.0 - iy
    r = np.hypot(xc, yc)
    arm = max(1, min(n_x, n_y) // 10)
    return {
        "checkerboard": ((ix // cell) + (iy // cell)) % 2 == 1,
        "quadrant": (xc > 0) & (yc > 0),
        "half": yc > 0,
        "cross": ((np.abs(xc) < arm) & (np.abs(yc) < 4 * arm)) | ((np.abs(yc) < arm) & (np.abs(xc) < 4 * arm)),
        "rings": (np.floor(r / max(2, cell)) % 2) == 1,
    }
