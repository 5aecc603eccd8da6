"""Independent reference computations used by the estimator and acceptance tests.

Nothing here calls the estimator module: integrals are taken by quadrature
and minimisers found numerically.
"""

import numpy as np
from scipy import optimize


def gauss_legendre(domain, cells=256, order=16):
    t, w = np.polynomial.legendre.leggauss(order)
    c, d = domain
    h = (d - c) / cells
    left = c + h * np.arange(cells)
    return (left[:, None] + h * (t + 1) / 2).ravel(), np.tile(w * h / 2, cells)


def contrast_by_definition(model, coef, x, nodes=None):
    """gamma_n(t) = ||t||^2 - (2/n) sum t(X_i) with ||t||^2 by quadrature."""
    if nodes is None:
        nodes = gauss_legendre(model.domain)
    q, w = nodes
    t_q = model.design(q) @ coef
    return float(w @ (t_q * t_q) - 2.0 * np.mean(model.design(x) @ coef))


def minimise_contrast(model, x):
    """Numerical minimum of the contrast over S_m, from a zero start."""
    nodes = gauss_legendre(model.domain, cells=128, order=12)
    q, w = nodes
    phi_q = model.design(q)
    gram = phi_q.T @ (phi_q * w[:, None])
    lin = model.design(x).mean(axis=0)

    def fun(c):
        return c @ gram @ c - 2.0 * lin @ c

    def jac(c):
        return 2.0 * gram @ c - 2.0 * lin

    res = optimize.minimize(fun, np.zeros(model.dim), jac=jac, method="BFGS",
                            options={"gtol": 1e-12, "maxiter": 1000})
    return res.fun, res.x


def brute_force_selection(x, collection, K):
    """Index of the penalized minimiser, ties to the first (smallest) model."""
    n = len(x)
    crit = [minimise_contrast(m, x)[0] + K * m.dim / n for m in collection]
    best = 0
    for i, v in enumerate(crit):
        if v < crit[best] - 1e-12:
            best = i
    return best, crit
