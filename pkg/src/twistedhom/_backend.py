"""Kernel backend selection.

The compiled extension is preferred when importable; the numpy fallback is
used otherwise.  ``use_backend`` switches explicitly (tests and the
benchmark compare both).
"""

from . import _kernels_py

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_BACKENDS = {"python": _kernels_py}
if _ckernels is not None:
    _BACKENDS["compiled"] = _ckernels

_active = _ckernels if _ckernels is not None else _kernels_py
_threads = 1


def available():
    return sorted(_BACKENDS)


def use_backend(name):
    """Select ``"compiled"``, ``"python"`` or ``"auto"``; returns the active name."""
    global _active
    if name == "auto":
        _active = _ckernels if _ckernels is not None else _kernels_py
    elif name in _BACKENDS:
        _active = _BACKENDS[name]
    else:
        raise ValueError(f"unknown or unavailable backend {name!r}; have {available()}")
    return _active.NAME


def set_threads(n):
    global _threads
    _threads = max(1, int(n))


def threads():
    return _threads


def active():
    return _active


def name():
    return _active.NAME
