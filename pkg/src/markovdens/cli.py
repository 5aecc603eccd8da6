"""Command line interface: ``markovdens simulate | fit | bench | rate``.

Every subcommand accepts ``--config FILE``; its ``[<subcommand>]`` section
supplies defaults and explicit flags win.  Each run writes a manifest that
can be passed back through ``--config`` to repeat it.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .basis import BasisFamily, CapRule, make_collection
from .bench import BenchConfig, rate_experiment, run_bench
from .chains import PRESETS, simulate, read_sample_csv, write_sample_csv
from .config import (
    chain_from,
    chain_overrides,
    parse_float,
    parse_int,
    read_config,
    section,
    split_list,
    write_manifest,
)
from .errors import ConfigurationError
from .estimator import (
    PenaltyConfig,
    eval_1d,
    eval_2d_grid,
    quotient_transition,
    select_model_1d,
    select_model_2d,
    write_estimate_csv,
)

log = logging.getLogger("markovdens")

DEFAULT_CHAINS = ", ".join(PRESETS)


class UsageError(Exception):
    pass


def _merged(args, name, keys):
    """Flag values over the config section over defaults.  `keys` maps
    setting name -> default."""
    cfg = read_config(args.config) if args.config else None
    from_file = section(cfg, name)
    out = {}
    for key, default in keys.items():
        flag = getattr(args, key, None)
        out[key] = flag if flag is not None else from_file.get(key, default)
    return out, cfg


def _params(pairs):
    out = {}
    for item in pairs or []:
        if "=" not in item:
            raise UsageError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _prepare_out_dir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc.strerror}") from None
    return out


# ---------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    s, cfg = _merged(args, "simulate", {"chain": None, "n": None, "seed": 0, "out": "sample.csv"})
    if s["chain"] is None or s["n"] is None:
        raise UsageError("simulate needs --chain and --n")
    name = str(s["chain"]).strip()
    overrides = chain_overrides(cfg, name)
    overrides.update(_params(args.param))
    spec = chain_from(name, overrides)
    n = parse_int(s["n"], "n")
    seed = parse_int(s["seed"], "seed")
    sample = simulate(spec, n, seed)
    out = Path(s["out"])
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True, exist_ok=True)
    write_sample_csv(sample, out)
    manifest = out.with_name(out.stem + ".manifest.ini")
    write_manifest(manifest, "simulate", {"chain": name, "n": n, "seed": seed, "out": str(out)},
                   [out], [spec])
    print(f"wrote {n} values of {name} (seed {seed}) to {out}")
    return 0


def cmd_fit(args) -> int:
    s, _ = _merged(args, "fit", {"input": None, "family": "trig", "domain": None, "K": 5.0,
                                  "K2": 0.02, "mode": "f", "exponent": 0.1, "out": "fit"})
    if s["input"] is None:
        raise UsageError("fit needs --input")
    x = read_sample_csv(s["input"])
    family = BasisFamily.parse(str(s["family"]))
    mode = str(s["mode"])
    if mode not in ("f", "g", "pi"):
        raise UsageError("--mode must be f, g or pi")
    dom = s["domain"]
    if dom is None:
        domain = (float(x.min()), float(x.max()))
    else:
        parts = split_list(dom) if isinstance(dom, str) else list(dom)
        if len(parts) != 2:
            raise UsageError("--domain expects two numbers c d")
        domain = (parse_float(parts[0], "c"), parse_float(parts[1], "d"))
    if not domain[0] < domain[1]:
        raise UsageError("domain needs c < d")
    pen = PenaltyConfig(parse_float(s["K"], "K"), parse_float(s["K2"], "K2"))
    exponent = parse_float(s["exponent"], "exponent")
    n = len(x)
    if mode != "f" and n < 2:
        raise ConfigurationError("joint density needs at least two observations")
    if n < 4:
        raise ConfigurationError("need at least 4 observations to build a model collection")

    out = _prepare_out_dir(s["out"])
    outputs = []
    sel_f = sel_g = None
    if mode in ("f", "pi"):
        sel_f = select_model_1d(x, make_collection(family, n, CapRule.ONE_D, domain), pen,
                                details=True)
        write_estimate_csv(sel_f.estimate, out / "estimate_f.csv")
        outputs.append(out / "estimate_f.csv")
        print(f"f: selected D={sel_f.dim} criterion={sel_f.criterion!r}")
    if mode in ("g", "pi"):
        sel_g = select_model_2d(x, make_collection(family, n, CapRule.TWO_D, domain), pen,
                                details=True)
        write_estimate_csv(sel_g.estimate, out / "estimate_g.csv")
        outputs.append(out / "estimate_g.csv")
        print(f"g: selected D={sel_g.dim} criterion={sel_g.criterion!r}")

    grid_path = out / "grid.csv"
    with open(grid_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if mode == "f":
            xs = np.linspace(domain[0], domain[1], 200)
            w.writerow(["x", "f"])
            for xi, v in zip(xs.tolist(), eval_1d(sel_f.estimate, xs).tolist()):
                w.writerow([f"{xi:.17g}", f"{v:.17g}"])
        else:
            xs = np.linspace(domain[0], domain[1], 100)
            if mode == "g":
                vals = eval_2d_grid(sel_g.estimate, xs, xs)
            else:
                trans = quotient_transition(sel_f.estimate, sel_g.estimate, n, exponent)
                vals = trans.grid(xs, xs)
                print(f"pi: truncation level a_n={trans.a_n!r}")
            w.writerow(["x", "y", mode])
            for i, xi in enumerate(xs.tolist()):
                for j, yj in enumerate(xs.tolist()):
                    w.writerow([f"{xi:.17g}", f"{yj:.17g}", f"{vals[i, j]:.17g}"])
    outputs.append(grid_path)
    settings = dict(s, domain=list(domain), family=family.name, K=pen.K_1d, K2=pen.K_2d,
                    exponent=exponent, out=str(out))
    write_manifest(out / "manifest.ini", "fit", settings, outputs)
    return 0


def _bench_config(args):
    s, cfg = _merged(args, "bench", {
        "chains": DEFAULT_CHAINS, "families": "hist, trig", "sizes": "50, 100, 250, 500, 1000",
        "replications": 200, "grid_1d": 256, "grid_2d": 128, "seed": 0, "K": 5.0, "K2": 0.02,
        "exponent": 0.1, "out": "bench_out", "jobs": 1})
    chains = tuple(chain_from(name, chain_overrides(cfg, name)) for name in split_list(s["chains"]))
    families = tuple(BasisFamily.parse(f) for f in split_list(s["families"]))
    sizes = tuple(parse_int(v, "sizes") for v in split_list(s["sizes"]))
    config = BenchConfig(
        chains=chains, families=families, sizes=sizes,
        replications=parse_int(s["replications"], "replications"),
        grid_1d=parse_int(s["grid_1d"], "grid_1d"), grid_2d=parse_int(s["grid_2d"], "grid_2d"),
        seed_base=parse_int(s["seed"], "seed"),
        penalty=PenaltyConfig(parse_float(s["K"], "K"), parse_float(s["K2"], "K2")),
        truncation_exponent=parse_float(s["exponent"], "exponent"))
    return config, s


def cmd_bench(args) -> int:
    config, s = _bench_config(args)
    jobs = parse_int(s["jobs"], "jobs")
    out = _prepare_out_dir(s["out"])
    handler = logging.FileHandler(out / "bench.log", mode="w")
    handler.setFormatter(logging.Formatter("%(asctime)s %(message)s"))
    logging.getLogger("markovdens").addHandler(handler)
    try:
        result = run_bench(config, jobs=jobs)
    finally:
        logging.getLogger("markovdens").removeHandler(handler)
        handler.close()
    csv_path = out / "bench.csv"
    result.to_csv(csv_path)
    settings = {
        "chains": [c.label for c in config.chains], "families": [f.name for f in config.families],
        "sizes": list(config.sizes), "replications": config.replications,
        "grid_1d": config.grid_1d, "grid_2d": config.grid_2d, "seed": config.seed_base,
        "K": config.penalty.K_1d, "K2": config.penalty.K_2d,
        "exponent": config.truncation_exponent, "jobs": jobs, "out": str(out)}
    write_manifest(out / "manifest.ini", "bench", settings, [csv_path, out / "bench.log"],
                   list(config.chains))
    print(f"wrote {len(result.rows)} rows to {csv_path}")
    return 0


def cmd_rate(args) -> int:
    s, cfg = _merged(args, "rate", {
        "chain": "ar1", "family": "hist", "sizes": "100, 300, 1000, 3000, 10000",
        "replications": 100, "target": "f", "seed": 0, "K": 5.0, "K2": 0.02, "out": "rate_out",
        "jobs": 1})
    sizes = sorted({parse_int(v, "sizes") for v in split_list(s["sizes"])})
    if len(sizes) < 4:
        raise UsageError("rate needs at least 4 distinct sizes")
    name = str(s["chain"]).strip()
    spec = chain_from(name, chain_overrides(cfg, name))
    family = BasisFamily.parse(str(s["family"]))
    pen = PenaltyConfig(parse_float(s["K"], "K"), parse_float(s["K2"], "K2"))
    res = rate_experiment(spec, family, sizes, parse_int(s["replications"], "replications"),
                          pen, target=str(s["target"]), seed_base=parse_int(s["seed"], "seed"),
                          jobs=parse_int(s["jobs"], "jobs"))
    out = _prepare_out_dir(s["out"])
    csv_path = out / "rate.csv"
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "mise"])
        for n, m in zip(res.sizes, res.means):
            w.writerow([n, repr(m)])
        w.writerow(["slope", repr(res.slope)])
    for n, m in zip(res.sizes, res.means):
        print(f"n={n:>6d}  mean MISE {res.target} = {m:.6g}")
    print(f"slope = {res.slope:.6f}")
    settings = dict(s, chain=name, family=family.name, sizes=sizes, out=str(out))
    write_manifest(out / "manifest.ini", "rate", settings, [csv_path], [spec])
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="markovdens", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def shared(p):
        p.add_argument("--config", help="key=value config file or manifest")
        p.add_argument("--seed", type=int, help="RNG seed (default 0)")
        p.add_argument("--out", help="output path")
        p.add_argument("--jobs", type=int, help="worker processes (default 1)")

    p = sub.add_parser("simulate", help="simulate a benchmark chain to CSV")
    shared(p)
    p.add_argument("--chain", help="|".join(PRESETS))
    p.add_argument("--n", type=int)
    p.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="override a chain parameter")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="select and fit f, g or pi on a sample CSV")
    shared(p)
    p.add_argument("--input")
    p.add_argument("--family", help="hist | trig | haar | pp<r>")
    p.add_argument("--domain", nargs=2, type=float, metavar=("C", "D"))
    p.add_argument("--K", type=float, help="1-D penalty constant (default 5)")
    p.add_argument("--K2", type=float, help="2-D penalty constant (default 0.02)")
    p.add_argument("--mode", choices=("f", "g", "pi"))
    p.add_argument("--exponent", type=float, help="truncation a_n = n**exponent (default 0.1)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("bench", help="Monte-Carlo MISE table")
    shared(p)
    p.add_argument("--chains", help="comma list")
    p.add_argument("--families", help="comma list")
    p.add_argument("--sizes", help="comma list of n")
    p.add_argument("--replications", "-N", type=int)
    p.add_argument("--grid-1d", dest="grid_1d", type=int)
    p.add_argument("--grid-2d", dest="grid_2d", type=int)
    p.add_argument("--K", type=float)
    p.add_argument("--K2", type=float)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("rate", help="log-log MISE slope in n")
    shared(p)
    p.add_argument("--chain")
    p.add_argument("--family")
    p.add_argument("--sizes", help="comma list, at least 4 values")
    p.add_argument("--replications", "-N", type=int)
    p.add_argument("--target", choices=("f", "pi"))
    p.add_argument("--K", type=float)
    p.add_argument("--K2", type=float)
    p.set_defaults(func=cmd_rate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)
    # basicConfig is a no-op when the host already configured logging
    log.setLevel(logging.INFO)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (ConfigurationError, ValueError, OSError) as exc:
        print(f"markovdens: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
