"""PGM mask input, CSV/PGM image output and metadata sidecars.

Outputs are byte-for-byte deterministic: fixed float formats, key order
fixed by the caller, ``\\n`` line endings.
"""

import math
import os

import numpy as np

from .errors import FormatError
from .masks import PhaseMask

INVALID_TOKEN = "invalid"
SIDECAR_SUFFIX = ".meta.txt"
SIDECAR_KEYS = ("state", "m", "mask", "window", "floor", "scale_min", "scale_max",
                "I1_re", "I1_im", "I2_re", "I2_im")


def _pgm_tokens(data):
    """Header tokens and the offset just past the single whitespace after maxval."""
    tokens = []
    i = 0
    n = len(data)
    while len(tokens) < 4:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i >= n:
            raise FormatError("truncated PGM header")
        if data[i : i + 1] == b"#":
            while i < n and data[i : i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        start = i
        while i < n and not data[i : i + 1].isspace() and data[i : i + 1] != b"#":
            i += 1
        tokens.append(data[start:i])
    return tokens, i + 1


def read_pgm(data):
    """Decode a P2 or P5 greymap with ``maxval <= 255``.

    Returns
    -------
    levels : ndarray of uint8, shape (height, width), row 0 at the top
    maxval : int
    """
    if isinstance(data, str):
        data = data.encode("ascii")
    data = bytes(data)
    if len(data) < 2 or data[:2] not in (b"P2", b"P5"):
        raise FormatError("not a PGM file: magic must be P2 or P5")
    try:
        tokens, offset = _pgm_tokens(data)
        magic = tokens[0].decode("ascii")
        width, height, maxval = (int(t) for t in tokens[1:4])
    except (ValueError, UnicodeDecodeError) as exc:
        raise FormatError(f"malformed PGM header: {exc}") from None
    if width < 1 or height < 1:
        raise FormatError(f"bad PGM dimensions {width}x{height}")
    if not 1 <= maxval <= 255:
        raise FormatError(f"PGM maxval {maxval} outside 1..255")
    count = width * height
    if magic == "P5":
        body = data[offset : offset + count]
        if len(body) != count:
            raise FormatError(f"PGM raster holds {len(body)} bytes, expected {count}")
        levels = np.frombuffer(body, dtype=np.uint8).copy()
    else:
        body = data[offset:] if offset <= len(data) else b""
        # comments are allowed between samples in plain PGM
        lines = [ln.split(b"#", 1)[0] for ln in body.splitlines()]
        try:
            vals = [int(t) for ln in lines for t in ln.split()]
        except ValueError:
            raise FormatError("non-integer sample in P2 raster") from None
        if len(vals) != count:
            raise FormatError(f"PGM raster holds {len(vals)} samples, expected {count}")
        levels = np.array(vals, dtype=np.int64)
    if np.any(levels > maxval) or np.any(levels < 0):
        raise FormatError("PGM sample exceeds maxval")
    return levels.astype(np.uint8).reshape(height, width), maxval


def read_mask_pgm(data, pitch, center=(0.0, 0.0), phi_max=math.pi):
    """Phase mask from PGM bytes: grey level ``v`` becomes ``phi_max * v / maxval``."""
    levels, maxval = read_pgm(data)
    return PhaseMask.from_levels(levels, pitch, center, phi_max=phi_max, maxval=maxval)


def encode_pgm(levels, plain=False):
    """Encode 8-bit levels as P5 (binary) or P2 (plain) with maxval 255."""
    lv = np.asarray(levels)
    if lv.ndim != 2:
        raise FormatError("PGM levels must be 2-D")
    if np.any(lv < 0) or np.any(lv > 255):
        raise FormatError("PGM levels must lie in 0..255")
    lv = lv.astype(np.uint8)
    h, w = lv.shape
    if plain:
        rows = "\n".join(" ".join(str(int(v)) for v in row) for row in lv)
        return f"P2\n{w} {h}\n255\n{rows}\n".encode("ascii")
    return f"P5\n{w} {h}\n255\n".encode("ascii") + lv.tobytes()


def mask_levels(mask):
    """8-bit levels of a raster mask (exact when it came from a PGM)."""
    if mask.kind != "raster":
        raise FormatError("only raster masks have grey levels")
    if mask.levels is not None:
        return np.asarray(mask.levels, dtype=np.uint8)
    phi_max = mask.params.get("phi_max", math.pi)
    return np.clip(np.rint(mask.data * 255.0 / phi_max), 0, 255).astype(np.uint8)


def write_mask_pgm(mask, path, plain=False):
    _write_bytes(path, encode_pgm(mask_levels(mask), plain))


def _write_bytes(path, payload):
    try:
        with open(path, "wb") as fh:
            fh.write(payload)
    except OSError as exc:
        raise FormatError(f"cannot write {path}: {exc.strerror or exc}") from None


def format_value(v):
    # adding 0.0 folds -0.0 into 0.0
    return format(float(v) + 0.0, ".9g")


def image_csv(image):
    rows = []
    for vals, ok in zip(image.values, image.valid):
        rows.append(",".join(format_value(v) if k else INVALID_TOKEN for v, k in zip(vals, ok)))
    return ("\n".join(rows) + "\n").encode("ascii")


def image_scale(image):
    """``(scale_min, scale_max)`` over valid pixels (0, 0 if none)."""
    vals = image.values[image.valid]
    if vals.size == 0:
        return 0.0, 0.0
    return float(np.min(vals)), float(np.max(vals))


def image_pgm(image):
    """Plain PGM with linear min-max scaling; invalid pixels map to 0."""
    lo, hi = image_scale(image)
    if hi > lo:
        levels = np.rint((image.values - lo) * (255.0 / (hi - lo)))
    else:
        levels = np.zeros(image.values.shape)
    levels = np.where(image.valid, np.clip(levels, 0, 255), 0)
    return encode_pgm(levels, plain=True)


def sidecar_text(image, extra=None):
    """``key=value`` lines: the fixed keys first, then any others in insertion order."""
    meta = dict(image.metadata)
    lo, hi = image_scale(image)
    meta["scale_min"] = repr(lo)
    meta["scale_max"] = repr(hi)
    meta["units"] = image.units
    if extra:
        meta.update({k: str(v) for k, v in extra.items()})
    meta.setdefault("floor", "none")
    lines = [f"{k}={meta.get(k, 'none')}" for k in SIDECAR_KEYS]
    lines += [f"{k}={v}" for k, v in meta.items() if k not in SIDECAR_KEYS]
    for line in lines:
        if "\n" in line:
            raise FormatError("metadata values must be single-line")
    return ("\n".join(lines) + "\n").encode("utf-8")


def write_image(image, path, fmt="csv", extra=None):
    """Write ``image`` as CSV or PGM plus ``<path>.meta.txt``.

    Raises
    ------
    FormatError
        Unknown format or an unwritable path.
    """
    if fmt == "csv":
        payload = image_csv(image)
    elif fmt == "pgm":
        payload = image_pgm(image)
    else:
        raise FormatError(f"unknown image format {fmt!r}")
    _write_bytes(path, payload)
    _write_bytes(os.fspath(path) + SIDECAR_SUFFIX, sidecar_text(image, extra))


def read_image_csv(path):
    """Values and validity mask from an image CSV."""
    try:
        with open(path, "r", encoding="ascii") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror or exc}") from None
    rows = [ln.split(",") for ln in lines if ln]
    valid = np.array([[t != INVALID_TOKEN for t in r] for r in rows], dtype=bool)
    vals = np.array([[float(t) if t != INVALID_TOKEN else 0.0 for t in r] for r in rows])
    return vals, valid


def read_sidecar(path):
    out = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh.read().splitlines():
                if line:
                    k, _, v = line.partition("=")
                    out[k] = v
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror or exc}") from None
    return out
