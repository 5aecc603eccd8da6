"""Benchmark Markov chains: seeded simulation and exact densities.

Four kinds of chain are provided:

* ``AR``      X' = a X + b + sigma * eps
* ``SQRTCIR`` Euclidean norm of ``delta`` independent AR(1) components
              xi' = a xi + beta * eps (a radial Ornstein-Uhlenbeck chain)
* ``CIR``     square of the previous chain
* ``ARCH``    X' = sin(X) + (cos(X) + 3) * eps

with eps i.i.d. standard Gaussian.  Gaussian draws come from numpy's
``default_rng`` (PCG64) with ``standard_normal``, drawn in one block per
simulation so a (spec, n, seed) triple fixes the sample.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .errors import ConfigurationError
from .specfun import bessel_ie, ln_gamma

__all__ = [
    "ChainKind",
    "ChainSpec",
    "ChainSample",
    "PRESETS",
    "get_chain",
    "simulate",
    "true_stationary_density",
    "true_transition_density",
    "write_sample_csv",
    "read_sample_csv",
]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class ChainKind(enum.Enum):
    AR = "ar"
    SQRTCIR = "sqrtcir"
    CIR = "cir"
    ARCH = "arch"


_PARAM_NAMES = {
    ChainKind.AR: ("a", "b", "sigma2"),
    ChainKind.SQRTCIR: ("a", "beta", "delta"),
    ChainKind.CIR: ("a", "beta", "delta"),
    ChainKind.ARCH: (),
}


@dataclass(frozen=True)
class ChainSpec:
    """A benchmark chain with its parameters and estimation square ``[c, d]^2``."""

    kind: ChainKind
    params: dict = field(default_factory=dict)
    domain: tuple = (0.0, 1.0)
    burn_in: int = 0
    name: str = ""

    def __post_init__(self):
        if not isinstance(self.kind, ChainKind):
            raise ConfigurationError(f"unknown chain kind {self.kind!r}")
        expected = set(_PARAM_NAMES[self.kind])
        if set(self.params) != expected:
            raise ConfigurationError(
                f"{self.kind.value} chain needs parameters {sorted(expected)}, "
                f"got {sorted(self.params)}")
        p = {k: float(v) for k, v in self.params.items()}
        object.__setattr__(self, "params", p)
        c, d = self.domain
        if not c < d:
            raise ConfigurationError(f"invalid estimation domain {self.domain}")
        object.__setattr__(self, "domain", (float(c), float(d)))
        if self.burn_in < 0:
            raise ConfigurationError("burn_in must be >= 0")
        if self.kind is ChainKind.AR:
            if not abs(p["a"]) < 1:
                raise ConfigurationError("AR chain needs |a| < 1")
            if not p["sigma2"] > 0:
                raise ConfigurationError("AR chain needs sigma2 > 0")
        elif self.kind in (ChainKind.SQRTCIR, ChainKind.CIR):
            if not 0 < p["a"] < 1:
                raise ConfigurationError("need 0 < a < 1")
            if not p["beta"] > 0:
                raise ConfigurationError("need beta > 0")
            if p["delta"] < 1 or p["delta"] != int(p["delta"]):
                raise ConfigurationError("delta must be an integer >= 1")

    def with_params(self, **overrides) -> "ChainSpec":
        params = dict(self.params)
        for key, val in overrides.items():
            if key not in params:
                raise ConfigurationError(f"unknown parameter {key!r} for {self.kind.value}")
            params[key] = val
        return replace(self, params=params)

    @property
    def label(self) -> str:
        return self.name or self.kind.value

    @property
    def rho2(self) -> float:
        """Stationary variance of one radial-OU component."""
        p = self.params
        return p["beta"] ** 2 / (1.0 - p["a"] ** 2)

    @property
    def has_stationary_density(self) -> bool:
        return self.kind is not ChainKind.ARCH


PRESETS = {
    "ar1": ChainSpec(ChainKind.AR, {"a": 2 / 3, "b": 0.0, "sigma2": 5 / 9},
                     (-2.0, 2.0), name="ar1"),
    "ar2": ChainSpec(ChainKind.AR, {"a": 0.5, "b": 3.0, "sigma2": 1.0},
                     (4.0, 8.0), name="ar2"),
    "sqrtcir": ChainSpec(ChainKind.SQRTCIR, {"a": 0.5, "beta": 3.0, "delta": 3},
                         (2.0, 10.0), name="sqrtcir"),
    "cir3": ChainSpec(ChainKind.CIR, {"a": 0.75, "beta": math.sqrt(7 / 48), "delta": 4},
                      (0.1, 3.0), name="cir3"),
    "cir4": ChainSpec(ChainKind.CIR, {"a": 1 / 3, "beta": 0.75, "delta": 2},
                      (0.0, 2.0), name="cir4"),
    "arch": ChainSpec(ChainKind.ARCH, {}, (-5.0, 5.0), burn_in=500, name="arch"),
}


def get_chain(name: str, **overrides) -> ChainSpec:
    try:
        spec = PRESETS[name.strip().lower()]
    except KeyError:
        raise ConfigurationError(
            f"unknown chain {name!r}; choose from {', '.join(PRESETS)}") from None
    return spec.with_params(**overrides) if overrides else spec


@dataclass(frozen=True)
class ChainSample:
    values: np.ndarray
    spec: ChainSpec
    seed: int

    def __len__(self):
        return len(self.values)


def simulate(spec: ChainSpec, n: int, seed: int) -> ChainSample:
    """Simulate `n` consecutive states of the chain.

    AR, SQRTCIR and CIR start from an exact stationary draw followed by
    ``n - 1`` transitions.  ARCH has no closed-form stationary law: it starts
    at 0, runs ``n + burn_in`` transitions and keeps the last `n` states.
    """
    if n < 2:
        raise ConfigurationError("need n >= 2")
    seed = int(seed)
    rng = np.random.default_rng(seed)
    p = spec.params
    if spec.kind is ChainKind.AR:
        mean = p["b"] / (1.0 - p["a"])
        sd = math.sqrt(p["sigma2"] / (1.0 - p["a"] ** 2))
        z = rng.standard_normal(n)
        values = kernels.ar_path(mean + sd * z[0], p["a"], p["b"],
                                 math.sqrt(p["sigma2"]), z[1:])
    elif spec.kind in (ChainKind.SQRTCIR, ChainKind.CIR):
        delta = int(p["delta"])
        z = rng.standard_normal((n, delta))
        xi0 = math.sqrt(spec.rho2) * z[0]
        values = kernels.radial_ou_path(np.ascontiguousarray(xi0), p["a"], p["beta"],
                                        np.ascontiguousarray(z[1:]))
        if spec.kind is ChainKind.CIR:
            values = values * values
    else:
        z = rng.standard_normal(n + spec.burn_in)
        values = kernels.arch_path(0.0, z)[-n:]
    return ChainSample(np.ascontiguousarray(values), spec, seed)


def _normal_pdf(z, sd=1.0):
    return _INV_SQRT_2PI / sd * np.exp(-0.5 * (z / sd) ** 2)


def true_stationary_density(spec: ChainSpec, x):
    """Exact invariant density; not available for ARCH."""
    xs = np.asarray(x, dtype=float)
    p = spec.params
    if spec.kind is ChainKind.AR:
        out = _normal_pdf(xs - p["b"] / (1 - p["a"]), math.sqrt(p["sigma2"] / (1 - p["a"] ** 2)))
    elif spec.kind is ChainKind.SQRTCIR:
        delta, rho2 = p["delta"], spec.rho2
        # C = 1 / (2^(delta/2 - 1) Gamma(delta/2) rho^delta)
        log_c = -((delta / 2 - 1) * math.log(2) + ln_gamma(delta / 2) + delta / 2 * math.log(rho2))
        pos = xs > 0
        safe = np.where(pos, xs, 1.0)
        out = np.where(pos, np.exp(log_c + (delta - 1) * np.log(safe) - safe ** 2 / (2 * rho2)), 0.0)
    elif spec.kind is ChainKind.CIR:
        shape, rate = p["delta"] / 2, 1.0 / (2 * spec.rho2)
        pos = xs > 0
        safe = np.where(pos, xs, 1.0)
        logpdf = shape * math.log(rate) - ln_gamma(shape) + (shape - 1) * np.log(safe) - rate * safe
        out = np.where(pos, np.exp(logpdf), 0.0)
    else:
        raise NotImplementedError("ARCH chain has no closed-form stationary density")
    return float(out) if np.ndim(x) == 0 else out


def true_transition_density(spec: ChainSpec, x, y):
    """Exact transition density ``pi(x, y)``; broadcasts over `x` and `y`.

    Returns 0 wherever the density vanishes (``y <= 0`` or ``x <= 0`` for
    the radial and CIR chains).
    """
    xs, ys = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    p = spec.params
    if spec.kind is ChainKind.AR:
        out = _normal_pdf(ys - p["a"] * xs - p["b"], math.sqrt(p["sigma2"]))
    elif spec.kind is ChainKind.ARCH:
        scale = np.cos(xs) + 3.0
        out = _normal_pdf((ys - np.sin(xs)) / scale) / scale
    else:
        a, b2, delta = p["a"], p["beta"] ** 2, p["delta"]
        nu = delta / 2 - 1
        ok = (xs > 0) & (ys > 0)
        xp = np.where(ok, xs, 1.0)
        yp = np.where(ok, ys, 1.0)
        if spec.kind is ChainKind.SQRTCIR:
            z = a * xp * yp / b2
            # exp(-(y^2 + a^2 x^2) / 2b2) I_nu(z) written as exp(-(y - a x)^2 / 2b2) Ie_nu(z)
            logpart = (-(yp - a * xp) ** 2 / (2 * b2) + np.log(a * xp / b2)
                       + delta / 2 * np.log(yp / (a * xp)))
        else:
            z = a * np.sqrt(xp * yp) / b2
            logpart = (-(np.sqrt(yp) - a * np.sqrt(xp)) ** 2 / (2 * b2) - math.log(2 * b2)
                       + (delta / 4 - 0.5) * np.log(yp / (a * a * xp)))
        out = np.where(ok, np.exp(logpart) * bessel_ie(nu, z), 0.0)
    if np.ndim(x) == 0 and np.ndim(y) == 0:
        return float(out)
    return out


def write_sample_csv(sample: ChainSample, path) -> None:
    """One-column CSV: header ``x`` then one value per line, 17 significant digits."""
    with open(path, "w", newline="") as fh:
        fh.write("x\n")
        for v in sample.values.tolist():
            fh.write(f"{v:.17g}\n")


def read_sample_csv(path) -> np.ndarray:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty file")
    if lines[0].lower() == "x":
        lines = lines[1:]
    try:
        values = np.array([float(ln.split(",")[0]) for ln in lines])
    except ValueError as exc:
        raise ValueError(f"{path}: malformed sample CSV ({exc})") from None
    if len(values) == 0:
        raise ValueError(f"{path}: no sample values")
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{path}: non-finite sample values")
    return values
