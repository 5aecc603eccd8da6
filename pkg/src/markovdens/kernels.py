"""Hot numeric loops, each in a numba and a pure-numpy flavour.

The chain recursions are inherently sequential and the scaled Bessel
function is evaluated on large quadrature grids; both dominate runtime of
a benchmark run.  Every kernel exists twice:

* ``<name>_numba``: compiled with ``numba.njit`` (falls back to the plain
  Python function if numba is missing),
* ``<name>_numpy``: vectorised numpy / plain-float loop, no compilation.

The public name ``<name>`` is bound to one of them at import time.  Set the
environment variable ``MARKOVDENS_DISABLE_JIT=1`` to force the numpy path.
"""

import math
import os

import numpy as np

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]
        return lambda func: func


def _flag(name):
    return os.environ.get(name, "").strip().lower() in ("1", "true", "yes", "on")


USE_JIT = NUMBA_AVAILABLE and not _flag("MARKOVDENS_DISABLE_JIT")
BACKEND = "numba" if USE_JIT else "numpy"

# Series below, large-argument asymptotic expansion above.  At x = 30 the
# neglected exponentially small part is ~exp(-60) relative.
BESSEL_SWITCH = 30.0
_BESSEL_EPS = 1e-17
_MAX_ASYMPTOTIC_TERMS = 60


# ---------------------------------------------------------------------------
# Chain recursions
# ---------------------------------------------------------------------------

@njit(cache=True)
def ar_path_numba(x0, a, b, sigma, z):
    n = z.shape[0] + 1
    out = np.empty(n)
    x = x0
    out[0] = x
    for i in range(n - 1):
        x = a * x + b + sigma * z[i]
        out[i + 1] = x
    return out


def ar_path_numpy(x0, a, b, sigma, z):
    out = np.empty(len(z) + 1)
    x = float(x0)
    vals = [x]
    for zi in z.tolist():
        x = a * x + b + sigma * zi
        vals.append(x)
    out[:] = vals
    return out


@njit(cache=True)
def radial_ou_path_numba(xi0, a, beta, z):
    """Euclidean norm of ``len(xi0)`` independent AR(1) components."""
    n = z.shape[0] + 1
    dim = xi0.shape[0]
    xi = xi0.copy()
    out = np.empty(n)
    s = 0.0
    for j in range(dim):
        s += xi[j] * xi[j]
    out[0] = math.sqrt(s)
    for i in range(n - 1):
        s = 0.0
        for j in range(dim):
            xi[j] = a * xi[j] + beta * z[i, j]
            s += xi[j] * xi[j]
        out[i + 1] = math.sqrt(s)
    return out


def radial_ou_path_numpy(xi0, a, beta, z):
    dim = len(xi0)
    comps = np.empty((len(z) + 1, dim))
    for j in range(dim):
        comps[:, j] = ar_path_numpy(xi0[j], a, 0.0, beta, z[:, j])
    # accumulate in component order, as the compiled loop does
    s = np.zeros(len(comps))
    for j in range(dim):
        s += comps[:, j] * comps[:, j]
    return np.sqrt(s)


@njit(cache=True)
def arch_path_numba(x0, z):
    n = z.shape[0] + 1
    out = np.empty(n)
    x = x0
    out[0] = x
    for i in range(n - 1):
        x = math.sin(x) + (math.cos(x) + 3.0) * z[i]
        out[i + 1] = x
    return out


def arch_path_numpy(x0, z):
    out = np.empty(len(z) + 1)
    x = float(x0)
    vals = [x]
    sin, cos = math.sin, math.cos
    for zi in z.tolist():
        x = sin(x) + (cos(x) + 3.0) * zi
        vals.append(x)
    out[:] = vals
    return out


# ---------------------------------------------------------------------------
# Exponentially scaled modified Bessel function of the first kind
# ---------------------------------------------------------------------------

@njit(cache=True)
def _ive_scalar(nu, x):
    if x == 0.0:
        return 1.0 if nu == 0.0 else 0.0
    if x <= BESSEL_SWITCH:
        half = 0.5 * x
        q = half * half
        term = math.exp(nu * math.log(half) - math.lgamma(nu + 1.0) - x)
        total = term
        k = 0
        while True:
            k += 1
            term *= q / (k * (k + nu))
            total += term
            if term <= _BESSEL_EPS * total:
                break
        return total
    mu = 4.0 * nu * nu
    term = 1.0
    total = 1.0
    for k in range(1, _MAX_ASYMPTOTIC_TERMS + 1):
        nxt = -term * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        if abs(nxt) > abs(term):
            break
        term = nxt
        total += term
        if abs(term) <= _BESSEL_EPS * abs(total):
            break
    return total / math.sqrt(2.0 * math.pi * x)


@njit(cache=True)
def bessel_ive_numba(nu, x):
    flat = x.ravel()
    out = np.empty(flat.shape[0])
    for i in range(flat.shape[0]):
        out[i] = _ive_scalar(nu, flat[i])
    return out.reshape(x.shape)


def bessel_ive_numpy(nu, x):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    zero = x == 0.0
    out[zero] = 1.0 if nu == 0.0 else 0.0

    small = (x <= BESSEL_SWITCH) & ~zero
    if small.any():
        xs = x[small]
        half = 0.5 * xs
        q = half * half
        term = np.exp(nu * np.log(half) - math.lgamma(nu + 1.0) - xs)
        total = term.copy()
        k = 0
        while True:
            k += 1
            term = term * (q / (k * (k + nu)))
            total += term
            if np.all(term <= _BESSEL_EPS * total):
                break
        out[small] = total

    large = x > BESSEL_SWITCH
    if large.any():
        xl = x[large]
        mu = 4.0 * nu * nu
        term = np.ones_like(xl)
        total = np.ones_like(xl)
        active = np.ones(xl.shape, dtype=bool)
        for k in range(1, _MAX_ASYMPTOTIC_TERMS + 1):
            nxt = -term * (mu - (2 * k - 1) ** 2) / (8.0 * k * xl)
            active &= np.abs(nxt) <= np.abs(term)
            term = np.where(active, nxt, term)
            total = np.where(active, total + term, total)
            active &= np.abs(term) > _BESSEL_EPS * np.abs(total)
            if not active.any():
                break
        out[large] = total / np.sqrt(2.0 * np.pi * xl)
    return out


if USE_JIT:
    ar_path = ar_path_numba
    radial_ou_path = radial_ou_path_numba
    arch_path = arch_path_numba
    bessel_ive = bessel_ive_numba
else:
    ar_path = ar_path_numpy
    radial_ou_path = radial_ou_path_numpy
    arch_path = arch_path_numpy
    bessel_ive = bessel_ive_numpy
