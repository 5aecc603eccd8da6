"""Orthonormal basis families on an interval and nested model collections.

Every family is first defined on ``[0, 1]`` and carried to ``[c, d]`` by the
affine map ``u = (x - c) / (d - c)`` together with the factor
``(d - c) ** -0.5`` that keeps the functions orthonormal in ``L2[c, d]``.
All basis functions vanish outside the closed interval ``[c, d]``; the last
cell of the piecewise families is closed on the right so that ``x = d``
belongs to it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "Family",
    "BasisFamily",
    "CapRule",
    "ModelSpec",
    "ModelCollection",
    "make_collection",
    "eval_basis",
    "gram_matrix",
    "linf_l2_ratio",
]


class Family(enum.Enum):
    HISTOGRAM = "hist"
    TRIGONOMETRIC = "trig"
    PIECEWISE_POLYNOMIAL = "pp"
    HAAR = "haar"


class CapRule(enum.Enum):
    ONE_D = "1d"   # D_m <= sqrt(n)
    TWO_D = "2d"   # D_m ** 2 <= sqrt(n)

    def admits(self, dim: int, n: int) -> bool:
        # integer forms of the two caps, free of rounding at perfect squares
        if self is CapRule.ONE_D:
            return dim * dim <= n
        return dim ** 4 <= n


@dataclass(frozen=True)
class BasisFamily:
    """A basis family; `degree` is only meaningful for piecewise polynomials."""

    kind: Family
    degree: int = 0

    def __post_init__(self):
        if not isinstance(self.kind, Family):
            raise ConfigurationError(f"unknown basis family {self.kind!r}")
        if self.kind is Family.PIECEWISE_POLYNOMIAL:
            if not (0 <= self.degree <= 8):
                raise ConfigurationError("piecewise polynomial degree must be in 0..8")
        elif self.degree != 0:
            raise ConfigurationError(f"{self.kind.value} basis takes no degree")

    @classmethod
    def parse(cls, name: str) -> "BasisFamily":
        """Parse ``hist``, ``trig``, ``haar`` or ``pp<r>`` (e.g. ``pp2``)."""
        key = name.strip().lower()
        aliases = {"h": "hist", "histogram": "hist", "t": "trig",
                   "trigonometric": "trig"}
        key = aliases.get(key, key)
        if key.startswith("pp") and key != "pp":
            try:
                return cls(Family.PIECEWISE_POLYNOMIAL, int(key[2:]))
            except ValueError:
                pass
        for fam in (Family.HISTOGRAM, Family.TRIGONOMETRIC, Family.HAAR):
            if key == fam.value:
                return cls(fam)
        raise ConfigurationError(f"unknown basis family {name!r}")

    @property
    def name(self) -> str:
        if self.kind is Family.PIECEWISE_POLYNOMIAL:
            return f"pp{self.degree}"
        return self.kind.value

    @property
    def r0(self) -> float:
        """Declared constant of the L2-Linf connexion for the family."""
        if self.kind is Family.TRIGONOMETRIC:
            return math.sqrt(2.0)
        if self.kind is Family.PIECEWISE_POLYNOMIAL:
            return math.sqrt(self.degree + 1)
        # histogram: 1; Haar: max(|father|_inf, |mother|_inf) / min(K, |Lambda(-1)|) = 1
        return 1.0

    def _ladder(self):
        """Yield ``(m, D_m)`` in increasing dimension, without end."""
        if self.kind is Family.TRIGONOMETRIC:
            dim = 1
            while True:
                yield dim, dim
                dim += 2
        if self.kind is Family.PIECEWISE_POLYNOMIAL and self.degree > 0:
            yield -1, 1
            level = 0
            while True:
                yield level, (self.degree + 1) * 2 ** level
                level += 1
        m = 0
        while True:
            yield m, 2 ** m
            m += 1


@dataclass(frozen=True)
class ModelSpec:
    """One projection space ``S_m``.

    For piecewise polynomials ``m`` is the dyadic level and ``m = -1`` marks
    the constant model added beneath level 0.
    """

    family: BasisFamily
    m: int
    dim: int
    domain: tuple = (0.0, 1.0)

    def __post_init__(self):
        c, d = self.domain
        if not (np.isfinite(c) and np.isfinite(d) and c < d):
            raise ConfigurationError(f"invalid domain {self.domain}")
        object.__setattr__(self, "domain", (float(c), float(d)))
        if self.dim < 1:
            raise ConfigurationError("dimension must be positive")

    @property
    def width(self) -> float:
        return self.domain[1] - self.domain[0]

    def with_domain(self, domain) -> "ModelSpec":
        return ModelSpec(self.family, self.m, self.dim, tuple(domain))

    def design(self, x) -> np.ndarray:
        """Matrix ``Phi[i, lam] = phi_lam(x_i)`` of shape ``(len(x), D_m)``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        c, d = self.domain
        u = (x - c) / (d - c)
        inside = (x >= c) & (x <= d)
        u = np.where(inside, u, 0.0)
        kind = self.family.kind
        if kind is Family.HISTOGRAM:
            phi = _histogram(u, self.dim)
        elif kind is Family.HAAR:
            phi = _haar(u, self.m)
        elif kind is Family.TRIGONOMETRIC:
            phi = _trigonometric(u, self.dim)
        elif self.m < 0:
            phi = np.ones((len(u), 1))
        else:
            phi = _legendre_cells(u, self.m, self.family.degree)
        phi *= 1.0 / math.sqrt(d - c)
        phi[~inside] = 0.0
        return phi

    def __call__(self, lam: int, x):
        return eval_basis(self, lam, x)


def _cells(u, count):
    return np.minimum((u * count).astype(np.int64), count - 1)


def _histogram(u, dim):
    phi = np.zeros((len(u), dim))
    phi[np.arange(len(u)), _cells(u, dim)] = math.sqrt(dim)
    return phi


def _haar(u, m):
    phi = np.zeros((len(u), 2 ** m))
    phi[:, 0] = 1.0
    rows = np.arange(len(u))
    for j in range(m):
        t = u * 2 ** j
        k = _cells(u, 2 ** j)
        sign = np.where(t - k < 0.5, 1.0, -1.0)
        phi[rows, 2 ** j + k] = 2 ** (j / 2) * sign
    return phi


def _trigonometric(u, dim):
    phi = np.empty((len(u), dim))
    phi[:, 0] = 1.0
    root2 = math.sqrt(2.0)
    for j in range(1, (dim - 1) // 2 + 1):
        arg = 2.0 * math.pi * j * u
        phi[:, 2 * j - 1] = root2 * np.sin(arg)
        phi[:, 2 * j] = root2 * np.cos(arg)
    return phi


def _legendre_cells(u, level, degree):
    ncell = 2 ** level
    per = degree + 1
    cell = _cells(u, ncell)
    t = 2.0 * (u * ncell - cell) - 1.0
    phi = np.zeros((len(u), ncell * per))
    rows = np.arange(len(u))
    scale = math.sqrt(ncell)
    # Bonnet recurrence for P_k on [-1, 1], then normalise on the unit cell
    p_prev, p_cur = np.ones_like(t), t
    for k in range(per):
        if k == 0:
            pk = p_prev
        elif k == 1:
            pk = p_cur
        else:
            p_prev, p_cur = p_cur, ((2 * k - 1) * t * p_cur - (k - 1) * p_prev) / k
            pk = p_cur
        phi[rows, cell * per + k] = scale * math.sqrt(2 * k + 1) * pk
    return phi


def eval_basis(model: ModelSpec, lam: int, x):
    """Value of the `lam`-th basis function of `model` at `x` (scalar or array)."""
    if not (0 <= lam < model.dim):
        raise IndexError(f"basis index {lam} out of range for D={model.dim}")
    vals = model.design(x)[:, lam]
    if np.ndim(x) == 0:
        return float(vals[0])
    return vals


@dataclass(frozen=True)
class ModelCollection:
    family: BasisFamily
    models: tuple
    cap_rule: CapRule
    n: int = field(default=0)

    def __len__(self):
        return len(self.models)

    def __iter__(self):
        return iter(self.models)

    def __getitem__(self, i):
        return self.models[i]

    @property
    def dims(self):
        return [mod.dim for mod in self.models]

    @property
    def domain(self):
        return self.models[0].domain


def make_collection(family: BasisFamily, n: int, cap_rule: CapRule = CapRule.ONE_D,
                    domain=(0.0, 1.0)) -> ModelCollection:
    """All models of `family` whose dimension satisfies the cap for sample size `n`.

    The constant model (D = 1) is always included, so the result is never empty.
    """
    if isinstance(family, str):
        family = BasisFamily.parse(family)
    if not isinstance(family, BasisFamily):
        raise ConfigurationError(f"unsupported family {family!r}")
    if not isinstance(cap_rule, CapRule):
        raise ConfigurationError(f"unsupported cap rule {cap_rule!r}")
    if n < 4:
        raise ConfigurationError(f"sample size must be >= 4, got {n}")
    models = []
    for m, dim in family._ladder():
        if not cap_rule.admits(dim, n):
            break
        models.append(ModelSpec(family, m, dim, tuple(domain)))
    return ModelCollection(family, tuple(models), cap_rule, n)


def gram_matrix(model: ModelSpec, nodes: int = 2 ** 16, chunk: int = 2 ** 14) -> np.ndarray:
    """Gram matrix by the composite midpoint rule with `nodes` nodes on the domain."""
    c, d = model.domain
    h = (d - c) / nodes
    gram = np.zeros((model.dim, model.dim))
    for start in range(0, nodes, chunk):
        idx = np.arange(start, min(start + chunk, nodes))
        phi = model.design(c + (idx + 0.5) * h)
        gram += phi.T @ phi
    return gram * h


def linf_l2_ratio(model: ModelSpec, probes: int) -> float:
    r"""Empirical lower bound of :math:`D^{-1/2}\sup_{t \in S_m} \|t\|_\infty / \|t\|`.

    At a fixed point ``x`` the supremum over coefficient vectors is attained
    at ``Phi(x) / |Phi(x)|`` (Cauchy-Schwarz) and equals ``|Phi(x)|``, so
    only the maximisation over points is approximate: `probes` equispaced
    points including both endpoints.  Reported on the unit-interval scale,
    hence independent of the model's domain.
    """
    if probes < model.dim:
        raise ValueError("probes must be >= D_m")
    c, d = model.domain
    x = np.linspace(c, d, probes)
    norms = np.sqrt(np.sum(model.design(x) ** 2, axis=1))
    return float(norms.max() * math.sqrt(d - c) / math.sqrt(model.dim))
