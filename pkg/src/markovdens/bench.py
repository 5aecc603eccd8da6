"""Monte-Carlo MISE benchmark and empirical convergence rates."""

from __future__ import annotations

import csv
import functools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .basis import BasisFamily
from .chains import PRESETS, ChainKind, ChainSpec, simulate, true_stationary_density, \
    true_transition_density
from .errors import ConfigurationError
from .estimator import PenaltyConfig, TransitionEstimate, eval_1d, eval_2d_grid, fit_transition

__all__ = [
    "BenchConfig",
    "BenchRow",
    "BenchResult",
    "RateResult",
    "midpoints",
    "mise_1d",
    "mise_2d",
    "run_bench",
    "fit_log_slope",
    "rate_experiment",
]

log = logging.getLogger(__name__)

CSV_HEADER = ["chain", "basis", "n", "N", "mise_f", "se_f", "mise_pi", "se_pi"]


def midpoints(domain, grid: int) -> tuple[np.ndarray, float]:
    """Nodes and step of the composite midpoint rule on `domain`."""
    if grid < 16:
        raise ConfigurationError("quadrature grid must have at least 16 points")
    c, d = domain
    h = (d - c) / grid
    return c + (np.arange(grid) + 0.5) * h, h


def _on_grid_1d(obj, nodes):
    if callable(obj) and not isinstance(obj, np.ndarray):
        if hasattr(obj, "coefficients"):
            return eval_1d(obj, nodes)
        return np.asarray(obj(nodes), dtype=float)
    return np.asarray(obj, dtype=float)


def mise_1d(est, truth, domain, grid: int = 256) -> float:
    """Midpoint-rule integral of ``(est - truth)^2`` over `domain`.

    `est` and `truth` may each be a callable or an array of values already
    taken at the midpoint nodes.
    """
    nodes, h = midpoints(domain, grid)
    diff = _on_grid_1d(est, nodes) - _on_grid_1d(truth, nodes)
    return float(np.sum(diff * diff) * h)


def _on_grid_2d(obj, nodes):
    if isinstance(obj, TransitionEstimate):
        return obj.grid(nodes, nodes)
    if hasattr(obj, "coefficients"):
        return eval_2d_grid(obj, nodes, nodes)
    if callable(obj):
        return np.asarray(obj(nodes[:, None], nodes[None, :]), dtype=float)
    return np.asarray(obj, dtype=float)


def mise_2d(est, truth, domain, grid: int = 128) -> float:
    """Midpoint-rule integral of the squared difference over ``domain x domain``."""
    nodes, h = midpoints(domain, grid)
    diff = _on_grid_2d(est, nodes) - _on_grid_2d(truth, nodes)
    return float(np.sum(diff * diff) * h * h)


@dataclass(frozen=True)
class BenchConfig:
    chains: tuple = tuple(PRESETS.values())
    families: tuple = (BasisFamily.parse("hist"), BasisFamily.parse("trig"))
    sizes: tuple = (50, 100, 250, 500, 1000)
    replications: int = 200
    grid_1d: int = 256
    grid_2d: int = 128
    seed_base: int = 0
    penalty: PenaltyConfig = field(default_factory=PenaltyConfig)
    truncation_exponent: float = 0.1

    def __post_init__(self):
        if self.replications < 1:
            raise ConfigurationError("replications must be >= 1")
        if self.grid_1d < 16 or self.grid_2d < 16:
            raise ConfigurationError("quadrature grids must have at least 16 points")
        if not self.chains or not self.families or not self.sizes:
            raise ConfigurationError("chains, families and sizes must be non-empty")
        if any(int(n) < 4 for n in self.sizes):
            raise ConfigurationError("sample sizes must be >= 4")


@dataclass(frozen=True)
class BenchRow:
    chain: str
    basis: str
    n: int
    N: int
    mise_f: float | None
    se_f: float | None
    mise_pi: float
    se_pi: float


@dataclass
class BenchResult:
    rows: list

    def row(self, chain: str, basis: str, n: int) -> BenchRow:
        for r in self.rows:
            if r.chain == chain and r.basis == basis and r.n == n:
                return r
        raise KeyError((chain, basis, n))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for r in self.rows:
                w.writerow([r.chain, r.basis, r.n, r.N, _fmt(r.mise_f), _fmt(r.se_f),
                            _fmt(r.mise_pi), _fmt(r.se_pi)])

    @classmethod
    def from_csv(cls, path) -> "BenchResult":
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            rows = [BenchRow(d["chain"], d["basis"], int(d["n"]), int(d["N"]),
                             _parse(d["mise_f"]), _parse(d["se_f"]),
                             _parse(d["mise_pi"]), _parse(d["se_pi"])) for d in reader]
        return cls(rows)


def _fmt(v):
    return "" if v is None else repr(float(v))


def _parse(s):
    return None if s == "" else float(s)


def _spec_key(spec: ChainSpec):
    return spec.kind.value, tuple(sorted(spec.params.items())), spec.domain


@functools.lru_cache(maxsize=64)
def _truth_grids(key, grid_1d, grid_2d):
    kind, params, domain = key
    spec = ChainSpec(ChainKind(kind), dict(params), domain)
    nodes1, _ = midpoints(domain, grid_1d)
    nodes2, _ = midpoints(domain, grid_2d)
    f = true_stationary_density(spec, nodes1) if spec.has_stationary_density else None
    pi = true_transition_density(spec, nodes2[:, None], nodes2[None, :])
    return f, pi


def default_truth(spec: ChainSpec, transition, grid_1d: int, grid_2d: int):
    """Exact f and pi on the midpoint grids (f is None for ARCH)."""
    return _truth_grids(_spec_key(spec), grid_1d, grid_2d)


def _replicate(spec, family, n, seed, config, truth):
    sample = simulate(spec, n, seed)
    trans, _, _ = fit_transition(sample, family, spec.domain, config.penalty,
                                 config.truncation_exponent)
    f_true, pi_true = truth(spec, trans, config.grid_1d, config.grid_2d)
    mise_f = None if f_true is None else mise_1d(trans.f_tilde, f_true, spec.domain, config.grid_1d)
    mise_pi = mise_2d(trans, pi_true, spec.domain, config.grid_2d)
    return mise_f, mise_pi


def _replicate_task(args):
    spec, family, n, seed, config = args
    return _replicate(spec, family, n, seed, config, default_truth)


def _mean_se(values):
    arr = np.asarray(values, dtype=float)
    mean = float(np.mean(arr))
    se = float(np.std(arr, ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
    return mean, se


def run_bench(config: BenchConfig, jobs: int = 1, truth=None) -> BenchResult:
    """Run every (chain, family, n) cell over ``config.replications`` samples.

    Replication ``r`` uses seed ``seed_base + r``.  Results are gathered in
    replication order, so the output does not depend on `jobs`.  `truth`
    replaces the exact densities (signature of :func:`default_truth`) and
    forces serial execution.
    """
    if jobs < 1:
        raise ConfigurationError("jobs must be >= 1")
    pool = ProcessPoolExecutor(jobs) if jobs > 1 and truth is None else None
    rows = []
    try:
        for spec in config.chains:
            for family in config.families:
                for n in config.sizes:
                    n = int(n)
                    tasks = [(spec, family, n, config.seed_base + r, config)
                             for r in range(config.replications)]
                    if pool is not None:
                        out = list(pool.map(_replicate_task, tasks,
                                            chunksize=max(1, len(tasks) // (4 * jobs))))
                    else:
                        fn = truth or default_truth
                        out = [_replicate(*t, fn) for t in tasks]
                    f_vals = [o[0] for o in out]
                    mise_f, se_f = (None, None) if f_vals[0] is None else _mean_se(f_vals)
                    mise_pi, se_pi = _mean_se([o[1] for o in out])
                    rows.append(BenchRow(spec.label, family.name, n, config.replications,
                                         mise_f, se_f, mise_pi, se_pi))
                    log.info("%s %s n=%d: mise_f=%s mise_pi=%.4g", spec.label, family.name, n,
                             "-" if mise_f is None else f"{mise_f:.4g}", mise_pi)
    finally:
        if pool is not None:
            pool.shutdown()
    return BenchResult(rows)


def fit_log_slope(sizes, values) -> float:
    """Least-squares slope of ``log(values)`` against ``log(sizes)``."""
    sizes = np.asarray(sizes, dtype=float)
    values = np.asarray(values, dtype=float)
    if np.any(values <= 0) or np.any(sizes <= 0):
        raise ValueError("log-log slope needs positive sizes and MISE values")
    lx, ly = np.log(sizes), np.log(values)
    lx0 = lx - lx.mean()
    return float(np.sum(lx0 * (ly - ly.mean())) / np.sum(lx0 * lx0))


@dataclass(frozen=True)
class RateResult:
    chain: str
    basis: str
    target: str
    sizes: tuple
    means: tuple
    slope: float


def rate_experiment(chain: ChainSpec, family: BasisFamily, sizes, N: int = 100,
                    penalty: PenaltyConfig = PenaltyConfig(), target: str = "f",
                    seed_base: int = 0, jobs: int = 1, grid_1d: int = 256,
                    grid_2d: int = 128) -> RateResult:
    """Mean MISE at each size and its log-log slope in n.

    `target` is ``"f"`` (stationary density) or ``"pi"`` (transition density).
    """
    sizes = tuple(sorted({int(s) for s in sizes}))
    if len(sizes) < 4 or sizes[-1] < 10 * sizes[0]:
        raise ConfigurationError("need at least 4 distinct sizes spanning a decade")
    if target not in ("f", "pi"):
        raise ConfigurationError("target must be 'f' or 'pi'")
    if target == "f" and not chain.has_stationary_density:
        raise ConfigurationError(f"{chain.label} has no closed-form stationary density")
    cfg = BenchConfig(chains=(chain,), families=(family,), sizes=sizes, replications=N,
                      grid_1d=grid_1d, grid_2d=grid_2d, seed_base=seed_base, penalty=penalty)
    res = run_bench(cfg, jobs=jobs)
    means = tuple(r.mise_f if target == "f" else r.mise_pi for r in res.rows)
    return RateResult(chain.label, family.name, target, sizes, means, fit_log_slope(sizes, means))
