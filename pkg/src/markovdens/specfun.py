"""Special functions used by the closed-form chain densities."""

import math

import numpy as np

from . import kernels
from .errors import DomainError

__all__ = ["bessel_i", "bessel_ie", "ln_gamma"]


def _check_order(nu):
    if not np.isfinite(nu) or nu < 0:
        raise DomainError(f"Bessel order must be >= 0, got {nu}")


def bessel_ie(nu, x):
    """Exponentially scaled modified Bessel function ``exp(-x) * I_nu(x)``.

    Parameters
    ----------
    nu : float
        Order, ``nu >= 0``.
    x : float or array_like
        Argument(s), all ``>= 0``.

    Returns
    -------
    float or ndarray
        Same shape as `x`.  The scaling keeps the result finite for any
        argument, which is what the transition densities need: they always
        multiply ``I_nu`` by a decaying exponential.
    """
    _check_order(nu)
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("Bessel argument must be >= 0")
    out = kernels.bessel_ive(float(nu), np.ascontiguousarray(np.atleast_1d(arr)))
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


def bessel_i(nu, x):
    """Modified Bessel function of the first kind ``I_nu(x)``.

    Power series for ``x <= 30``, Hankel asymptotic expansion above.
    Overflows to ``inf`` only past ``x ~ 709``.
    """
    scaled = bessel_ie(nu, x)
    with np.errstate(over="ignore", invalid="ignore"):
        out = scaled * np.exp(np.asarray(x, dtype=float))
    if np.ndim(x) == 0:
        return float(out)
    return out


def ln_gamma(x):
    """Natural log of the Gamma function for ``x > 0``."""
    if not x > 0:
        raise DomainError(f"ln_gamma requires x > 0, got {x}")
    return math.lgamma(x)
