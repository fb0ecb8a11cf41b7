r"""Special functions and quadrature rules.

Everything the rest of the package integrates goes through three tools:

- :func:`bessel_j`, the integer-order Bessel function :math:`J_m(x)` computed
  from its ascending series (small ``x``) or Miller's downward recurrence
  normalised with :math:`1 = J_0 + 2\sum_k J_{2k}` (larger ``x``);
- :func:`gauss_legendre`, nodes and weights from Newton iteration on the
  Legendre recurrence;
- :func:`integrate_2d_polar`, Gauss-Legendre in radius times a uniform
  azimuthal rule over a disk.

Complex amplitudes are plain Python/numpy ``complex`` values.
"""

from dataclasses import dataclass
import math

import numpy as np

from . import _backend
from .errors import DomainError, EvaluationError

MAX_ORDER = 60
MAX_ARGUMENT = 1e4


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Gauss-Legendre rule on ``[-1, 1]``.

    Attributes
    ----------
    nodes : ndarray
        Strictly increasing abscissae, symmetric about zero.
    weights : ndarray
        Positive weights summing to 2.
    order : int
        Number of nodes.
    """

    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def scaled(self, a, b):
        """Nodes and weights mapped onto ``[a, b]``."""
        half = 0.5 * (b - a)
        mid = 0.5 * (b + a)
        return mid + half * self.nodes, half * self.weights


def bessel_j(m, x):
    r"""Bessel function of the first kind :math:`J_m(x)` for integer order.

    Parameters
    ----------
    m : int
        Order, ``|m| <= 60``.  Negative orders use
        :math:`J_{-m}(x) = (-1)^m J_m(x)`.
    x : float or array_like
        Finite argument with ``|x| <= 1e4``.

    Returns
    -------
    float or ndarray
        Same shape as ``x``.  Absolute error below ``1e-12`` for
        ``|x| <= 50``.

    Raises
    ------
    DomainError
        Non-integer or out-of-range order, non-finite or too large argument.
    """
    if isinstance(m, bool) or int(m) != m:
        raise DomainError(f"Bessel order must be an integer, got {m!r}")
    m = int(m)
    if abs(m) > MAX_ORDER:
        raise DomainError(f"Bessel order |m|={abs(m)} exceeds {MAX_ORDER}")
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DomainError("Bessel argument must be finite")
    if arr.size and np.max(np.abs(arr)) > MAX_ARGUMENT:
        raise DomainError(f"Bessel argument exceeds {MAX_ARGUMENT:g}")
    n = abs(m)
    flat = arr.ravel()
    vals = _backend.active().bessel_jn(n, np.abs(flat), _backend.threads())
    sign = np.ones_like(flat)
    if n % 2:
        sign = np.where(flat < 0.0, -1.0, 1.0)
        if m < 0:
            sign = -sign
    out = (sign * vals).reshape(arr.shape)
    if arr.ndim == 0:
        return float(out)
    return out


def bessel_j_zero(m, k=1):
    """``k``-th positive zero of :math:`J_m` (bracketing plus Brent's method)."""
    from scipy.optimize import brentq

    n = abs(int(m))
    found = 0
    x = max(n, 1e-3)
    step = 0.05
    prev = bessel_j(n, x)
    while True:
        nxt = x + step
        val = bessel_j(n, nxt)
        if prev == 0.0 and x > 0:
            found += 1
            if found == k:
                return x
        elif prev * val < 0.0:
            found += 1
            if found == k:
                return brentq(lambda t: bessel_j(n, t), x, nxt, xtol=1e-15, rtol=1e-15)
        x, prev = nxt, val


def gauss_legendre(order):
    """Gauss-Legendre nodes and weights on ``[-1, 1]``.

    Newton iteration on the three-term Legendre recurrence, started from
    Tricomi's approximation; the negative half is mirrored from the positive
    half so the rule is exactly symmetric.

    Parameters
    ----------
    order : int
        Number of nodes, ``2 <= order <= 2048``.
    """
    if isinstance(order, bool) or int(order) != order or not 2 <= order <= 2048:
        raise DomainError(f"Gauss-Legendre order must be an integer in [2, 2048], got {order!r}")
    n = int(order)
    half = (n + 1) // 2
    i = np.arange(1, half + 1)
    x = np.cos(math.pi * (i - 0.25) / (n + 0.5))
    for _ in range(50):
        p0 = np.ones_like(x)
        p1 = x.copy()
        for k in range(2, n + 1):
            p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
        dp = n * (x * p1 - p0) / (x * x - 1.0)
        dx = p1 / dp
        x = x - dx
        if np.max(np.abs(dx)) < 5e-16:
            break
    p0 = np.ones_like(x)
    p1 = x.copy()
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    # x is decreasing from near 1; build the increasing symmetric rule
    pos_x = x[::-1]
    pos_w = w[::-1]
    if n % 2:
        pos_x = pos_x.copy()
        pos_x[0] = 0.0
        nodes = np.concatenate([-pos_x[:0:-1], pos_x])
        weights = np.concatenate([pos_w[:0:-1], pos_w])
    else:
        nodes = np.concatenate([-pos_x[::-1], pos_x])
        weights = np.concatenate([pos_w[::-1], pos_w])
    return QuadratureRule(nodes=nodes, weights=weights, order=n)


def polar_nodes(rho_max, n_rho, n_phi, phi_offset=0.5):
    """Tensor-product polar grid on the disk ``rho <= rho_max``.

    Azimuthal nodes sit at ``(j + phi_offset) * 2*pi / n_phi``.  Offsets 0 and
    0.5 map the grid onto itself under ``phi -> -phi``; other offsets give a
    deliberately asymmetric grid.

    Returns
    -------
    rho, phi, weight : ndarray
        Arrays of shape ``(n_rho, n_phi)``; ``weight`` includes the Jacobian
        ``rho``.
    """
    rule = gauss_legendre(n_rho)
    r, wr = rule.scaled(0.0, rho_max)
    phi = (np.arange(n_phi) + phi_offset) * (2.0 * math.pi / n_phi)
    rho, ph = np.meshgrid(r, phi, indexing="ij")
    weight = np.outer(wr * r, np.full(n_phi, 2.0 * math.pi / n_phi))
    return rho, ph, weight


def integrate_2d_polar(f, rho_max, n_rho, n_phi, phi_offset=0.5):
    r"""Integrate ``f(rho, phi)`` over the disk of radius ``rho_max``.

    Computes :math:`\int_0^{\rho_{max}}\int_0^{2\pi} f\,\rho\,d\rho\,d\varphi`
    with Gauss-Legendre in ``rho`` and the uniform rule in ``phi``.

    Parameters
    ----------
    f : callable
        Vectorised ``f(rho, phi)`` returning real or complex arrays.
    rho_max : float
        Disk radius, > 0.
    n_rho, n_phi : int
        Node counts, both >= 4; ``n_phi`` even.
    phi_offset : float
        Azimuthal node offset in units of the node spacing (0.5 = midpoint).

    Raises
    ------
    EvaluationError
        ``f`` returned a non-finite sample; the message names the node.
    """
    if not rho_max > 0:
        raise DomainError("rho_max must be positive")
    if n_rho < 4 or n_phi < 4:
        raise DomainError("n_rho and n_phi must be >= 4")
    if n_phi % 2:
        raise DomainError("n_phi must be even")
    rho, phi, weight = polar_nodes(rho_max, n_rho, n_phi, phi_offset)
    vals = np.asarray(f(rho, phi))
    vals = np.broadcast_to(vals, rho.shape)
    bad = ~np.isfinite(vals)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise EvaluationError(
            f"integrand is not finite at node rho={rho[i, j]!r}, phi={phi[i, j]!r}"
        )
    if np.iscomplexobj(vals):
        return complex(np.sum(weight * vals.real), np.sum(weight * vals.imag))
    return complex(np.sum(weight * vals), 0.0)
