"""Penalized projection estimators of f, g and the transition density.

Stationary density f: for each model the least-squares contrast

    gamma_n(t) = ||t||^2 - (2/n) sum_i t(X_i)

is minimised over ``S_m`` by the empirical coefficient expansion, and its
minimum equals ``-sum beta_hat^2``.  The model is chosen by adding
``K * D_m / n``.  The joint density g of ``(X_i, X_{i+1})`` is treated the
same way on tensor-product spaces with penalty ``K2 * D_m^2 / n``, and the
transition density is their truncated quotient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BasisFamily, CapRule, Family, ModelCollection, ModelSpec, make_collection
from .errors import ConfigurationError

__all__ = [
    "PenaltyConfig",
    "DensityEstimate1D",
    "DensityEstimate2D",
    "TransitionEstimate",
    "Selection",
    "estimate_coefficients_1d",
    "estimate_coefficients_2d",
    "contrast_1d",
    "contrast_2d",
    "select_model_1d",
    "select_model_2d",
    "eval_1d",
    "eval_2d",
    "quotient_transition",
    "fit_transition",
    "write_estimate_csv",
    "read_estimate_csv",
]


@dataclass(frozen=True)
class PenaltyConfig:
    K_1d: float = 5.0
    K_2d: float = 0.02

    def __post_init__(self):
        if not (self.K_1d > 0 and self.K_2d > 0):
            raise ConfigurationError("penalty constants must be positive")


@dataclass(frozen=True)
class DensityEstimate1D:
    model: ModelSpec
    coefficients: np.ndarray

    def __call__(self, x):
        return eval_1d(self, x)


@dataclass(frozen=True)
class DensityEstimate2D:
    model: ModelSpec
    coefficients: np.ndarray

    def __call__(self, x, y):
        return eval_2d(self, x, y)


@dataclass(frozen=True)
class Selection:
    """Outcome of a penalized selection; `criteria` follows the collection order."""

    estimate: object
    criteria: np.ndarray
    contrasts: np.ndarray
    index: int

    @property
    def dim(self) -> int:
        return self.estimate.model.dim

    @property
    def criterion(self) -> float:
        return float(self.criteria[self.index])


def _values(sample):
    vals = getattr(sample, "values", sample)
    return np.asarray(vals, dtype=float)


def estimate_coefficients_1d(sample, model: ModelSpec) -> DensityEstimate1D:
    """``beta_hat[lam] = mean_i phi_lam(X_i)``; points outside the domain add 0."""
    x = _values(sample)
    if len(x) < 1:
        raise ValueError("empty sample")
    return DensityEstimate1D(model, model.design(x).mean(axis=0))


def estimate_coefficients_2d(sample, model: ModelSpec) -> DensityEstimate2D:
    """``a_hat[lam, mu] = 1/(n-1) sum_{i<n} phi_lam(X_i) phi_mu(X_{i+1})``."""
    x = _values(sample)
    if len(x) < 2:
        raise ValueError("need at least two observations for the joint density")
    phi = model.design(x)
    return DensityEstimate2D(model, phi[:-1].T @ phi[1:] / (len(x) - 1))


def contrast_1d(est: DensityEstimate1D) -> float:
    return -float(np.sum(est.coefficients ** 2))


def contrast_2d(est: DensityEstimate2D) -> float:
    return -float(np.sum(est.coefficients ** 2))


def _argmin_first(values):
    # smallest index among exact minima: collections are ordered by dimension
    best = 0
    for i in range(1, len(values)):
        if values[i] < values[best]:
            best = i
    return best


def _select(x, collection, weight_of_dim, fit, contrast):
    if len(collection) == 0:
        raise ConfigurationError("empty model collection")
    shared = None
    if collection.family.kind in (Family.TRIGONOMETRIC, Family.HAAR):
        # each model is the first D columns of the finest one
        shared = collection[len(collection) - 1].design(x)
    estimates, contrasts, crit = [], [], []
    for model in collection:
        phi = shared if shared is not None else model.design(x)
        est = fit(phi, model)
        estimates.append(est)
        contrasts.append(contrast(est))
        crit.append(contrasts[-1] + weight_of_dim(model.dim))
    i = _argmin_first(crit)
    return Selection(estimates[i], np.array(crit), np.array(contrasts), i)


def select_model_1d(sample, collection: ModelCollection, pen: PenaltyConfig = PenaltyConfig(),
                    details: bool = False):
    """Minimise ``gamma_n(f_hat_m) + K_1d D_m / n`` over the collection.

    Ties go to the smaller dimension.  Returns the selected
    :class:`DensityEstimate1D`, or the full :class:`Selection` when
    `details` is true.
    """
    x = _values(sample)
    n = len(x)

    def fit(phi, model):
        return DensityEstimate1D(model, phi[:, :model.dim].mean(axis=0))

    sel = _select(x, collection, lambda dim: pen.K_1d * dim / n, fit, contrast_1d)
    return sel if details else sel.estimate


def select_model_2d(sample, collection: ModelCollection, pen: PenaltyConfig = PenaltyConfig(),
                    details: bool = False):
    """Minimise ``gamma_n^(2)(g_hat_m) + K_2d D_m^2 / n`` over the collection."""
    x = _values(sample)
    n = len(x)
    if n < 2:
        raise ValueError("need at least two observations for the joint density")

    def fit(phi, model):
        p = phi[:, :model.dim]
        return DensityEstimate2D(model, p[:-1].T @ p[1:] / (n - 1))

    sel = _select(x, collection, lambda dim: pen.K_2d * dim ** 2 / n, fit, contrast_2d)
    return sel if details else sel.estimate


def eval_1d(est: DensityEstimate1D, x):
    vals = est.model.design(x) @ est.coefficients
    return float(vals[0]) if np.ndim(x) == 0 else vals


def eval_2d(est: DensityEstimate2D, x, y):
    """Pointwise evaluation; `x` and `y` broadcast against each other."""
    xs, ys = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    px = est.model.design(xs.ravel())
    py = est.model.design(ys.ravel())
    vals = np.einsum("ij,jk,ik->i", px, est.coefficients, py)
    if xs.ndim == 0:
        return float(vals[0])
    return vals.reshape(xs.shape)


def eval_2d_grid(est: DensityEstimate2D, xgrid, ygrid) -> np.ndarray:
    """Values on the tensor grid, ``out[i, j] = g(xgrid[i], ygrid[j])``."""
    return est.model.design(xgrid) @ est.coefficients @ est.model.design(ygrid).T


@dataclass(frozen=True)
class TransitionEstimate:
    """Quotient estimator ``g~(x, y) / f~(x)``, set to 0 where ``|g~| > a_n |f~|``."""

    f_tilde: DensityEstimate1D
    g_tilde: DensityEstimate2D
    a_n: float

    def __call__(self, x, y):
        xs, ys = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        f = eval_1d(self.f_tilde, xs.ravel()).reshape(xs.shape)
        g = np.asarray(eval_2d(self.g_tilde, xs, ys))
        out = _truncated_ratio(g, f, self.a_n)
        return float(out) if out.ndim == 0 else out

    def grid(self, xgrid, ygrid) -> np.ndarray:
        f = eval_1d(self.f_tilde, np.asarray(xgrid, dtype=float))
        g = eval_2d_grid(self.g_tilde, xgrid, ygrid)
        return _truncated_ratio(g, f[:, None], self.a_n)


def _truncated_ratio(g, f, a_n):
    g, f = np.broadcast_arrays(g, f)
    keep = np.abs(g) <= a_n * np.abs(f)
    # 0/0 is kept by the rule and defined as 0
    safe = np.where(keep & (f != 0), f, 1.0)
    # the clip only absorbs the last-ulp rounding of g / f against a_n
    return np.where(keep & (f != 0), np.clip(g / safe, -a_n, a_n), 0.0)


def quotient_transition(f_tilde: DensityEstimate1D, g_tilde: DensityEstimate2D, n: int,
                        exponent: float = 0.1) -> TransitionEstimate:
    if f_tilde.model.domain != g_tilde.model.domain:
        raise ConfigurationError("f and g estimates must share the same domain")
    return TransitionEstimate(f_tilde, g_tilde, float(n) ** exponent)


def fit_transition(sample, family: BasisFamily, domain, pen: PenaltyConfig = PenaltyConfig(),
                   exponent: float = 0.1):
    """Run f selection, g selection and the quotient on one sample.

    Returns ``(transition, selection_f, selection_g)``; f and g are selected
    independently and may end up with different dimensions.
    """
    x = _values(sample)
    n = len(x)
    coll_f = make_collection(family, n, CapRule.ONE_D, domain)
    coll_g = make_collection(family, n, CapRule.TWO_D, domain)
    sel_f = select_model_1d(x, coll_f, pen, details=True)
    sel_g = select_model_2d(x, coll_g, pen, details=True)
    trans = quotient_transition(sel_f.estimate, sel_g.estimate, n, exponent)
    return trans, sel_f, sel_g


def write_estimate_csv(est, path) -> None:
    """Header ``family,D,c,d``, one metadata row, then coefficients one per line.

    2-D coefficient matrices are written row-major.
    """
    model = est.model
    c, d = model.domain
    with open(path, "w", newline="") as fh:
        fh.write("family,D,c,d\n")
        fh.write(f"{model.family.name},{model.dim},{c!r},{d!r}\n")
        for v in np.asarray(est.coefficients).ravel().tolist():
            fh.write(f"{v:.17g}\n")


def read_estimate_csv(path, ndim: int | None = None):
    """Inverse of :func:`write_estimate_csv`.

    The dimensionality follows from the number of coefficients; for D = 1
    it is ambiguous and defaults to 1-D unless `ndim` says otherwise.
    """
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if len(lines) < 3 or lines[0] != "family,D,c,d":
        raise ValueError(f"{path}: not an estimate file")
    fam_name, dim_s, c_s, d_s = lines[1].split(",")
    family = BasisFamily.parse(fam_name)
    dim = int(dim_s)
    coef = np.array([float(v) for v in lines[2:]])
    if ndim is None:
        ndim = 1 if len(coef) == dim else 2
    model = _model_for(family, dim, (float(c_s), float(d_s)))
    if ndim == 1 and len(coef) == dim:
        return DensityEstimate1D(model, coef)
    if ndim == 2 and len(coef) == dim * dim:
        return DensityEstimate2D(model, coef.reshape(dim, dim))
    raise ValueError(f"{path}: {len(coef)} coefficients do not match D={dim}")


def _model_for(family: BasisFamily, dim: int, domain) -> ModelSpec:
    for m, dm in family._ladder():
        if dm == dim:
            return ModelSpec(family, m, dim, domain)
        if dm > dim:
            break
    raise ValueError(f"{family.name} has no model of dimension {dim}")
