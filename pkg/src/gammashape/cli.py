"""``gammashape`` command line.

Every command writes its outputs plus ``<out>.manifest.json``; running
``gammashape replay <manifest>`` re-executes the recorded configuration and
reproduces the outputs byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import (
    average_pep_mixture,
    crb_average,
    crb_mc_estimate,
    fit_distance_mixture,
    mle_variance_mc,
    power_scaled_params,
    ser_union_bound,
)
from .constellation import Constellation, generate_apsk, min_distance
from .design import DEFAULT_GRID, DesignConfig, pso_optimize, select_constellation
from .gamma import EmConfig, EmFailure, GammaMixture, GammaParams, fit_gamma_mixture_em, kl_divergence_empirical
from .gamma import squared_distance_samples
from .metrics import ChannelConfig, ebn0_to_noise_variance, evaluate_constellation
from .rng import DEFAULT_SEED
from .sim import SWEEP_COLUMNS, SimConfig, simulate_point, sweep_ebn0

# reference designs (alpha*, beta*)
PRESETS = {"radar": (4.71, 1.00), "tradeoff": (3.36, 1.00), "comm": (2.12, 18.13)}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- parsing helpers

def _pair(text):
    parts = [p for p in str(text).replace(":", ",").split(",") if p.strip()]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'lo,hi', got {text!r}")
    return (float(parts[0]), float(parts[1]))


def _bool(text):
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def parse_range(text: str) -> list:
    """'a:b:step' (inclusive), 'a:b' (step 1) or a comma list."""
    text = str(text).strip()
    try:
        return _parse_range(text)
    except ValueError as exc:
        raise UsageError(f"bad range {text!r}: {exc}") from exc


def _parse_range(text: str) -> list:
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) == 2:
            parts.append(1.0)
        if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
            raise UsageError(f"bad range {text!r}")
        start, stop, step = parts
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + k * step, 10) for k in range(n)]
    vals = [float(v) for v in text.split(",") if v.strip()]
    if not vals:
        raise UsageError(f"empty list {text!r}")
    return vals


def read_config_file(path) -> dict:
    """key = value lines; '#' starts a comment; keys use flag names."""
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{num}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            vals = [r[h] for h in header] if isinstance(r, dict) else list(r)
            w.writerow([_fmt(v) for v in vals])


def write_json(path, data) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=False) + "\n")


def _side_path(out: Path, suffix: str) -> Path:
    return out.with_name(out.stem + suffix)


# ---------------------------------------------------------------- shared inputs

def _add_common(p):
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--threads", type=int, default=None, help="worker threads, default all cores (results do not depend on it)")
    p.add_argument("--out", required=False, help="output path")


def _add_source(p):
    p.add_argument("--constellation", help="constellation JSON or CSV")
    p.add_argument("--preset", choices=sorted(PRESETS), help="reference design")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    _add_grid(p)


def _add_grid(p):
    p.add_argument("--m", type=int, default=16)
    p.add_argument("--lambda", dest="lam", type=float, default=0.05)
    p.add_argument("--power", type=float, default=1.0)
    p.add_argument("--num-rings", type=int, default=DEFAULT_GRID[0])
    p.add_argument("--points-per-ring", type=int, default=DEFAULT_GRID[1])
    p.add_argument("--max-radius", type=float, default=DEFAULT_GRID[2])
    p.add_argument("--likelihood", choices=("planar", "amplitude"), default="planar")


def _params(args, required=True):
    if getattr(args, "preset", None):
        a, b = PRESETS[args.preset]
        return GammaParams(a, b)
    if args.alpha is None or args.beta is None:
        if required:
            raise UsageError("need --alpha and --beta (or --preset)")
        return None
    try:
        return GammaParams(args.alpha, args.beta)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def load_constellation(path) -> Constellation:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"constellation file not found: {path}")
    try:
        if p.suffix.lower() == ".csv":
            return Constellation.from_csv(p)
        data = json.loads(p.read_text())
        if "constellation" in data:
            data = data["constellation"]
        return Constellation.from_dict(data)
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot parse constellation {path}: {exc}") from exc


def _constellation(args):
    """Returns (constellation, params or None)."""
    if getattr(args, "constellation", None):
        return load_constellation(args.constellation), _params(args, required=False)
    params = _params(args)
    cand = generate_apsk(args.num_rings, args.points_per_ring, args.max_radius)
    if args.m > len(cand):
        raise UsageError(f"--m {args.m} exceeds {len(cand)} candidates")
    return select_constellation(cand, params, args.m, args.lam, args.power, args.likelihood), params


def _threads(args) -> int:
    return max(1, int(args.threads or os.cpu_count() or 1))


# ---------------------------------------------------------------- commands

def cmd_candidates(args):
    try:
        cand = generate_apsk(args.num_rings, args.points_per_ring, args.max_radius)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    rows = [(float(z.real), float(z.imag), float(abs(z)), int(k))
            for z, k in zip(cand.points, cand.ring_index)]
    write_csv(args.out, ("re", "im", "rho", "ring"), rows)
    return [args.out]


def cmd_design(args):
    try:
        cfg = DesignConfig.at_ebn0(
            args.ebn0_db, omega_d=args.omega_d, M=args.m, alpha_bounds=tuple(args.alpha_bounds),
            beta_bounds=tuple(args.beta_bounds), lam=args.lam, P=args.power, n_mc=args.n_mc, pfa=args.pfa,
            n_particles=args.particles, n_iters=args.iters, seed=args.seed, likelihood=args.likelihood,
            snr_form=args.snr_form)
        cand = generate_apsk(args.num_rings, args.points_per_ring, args.max_radius)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if cfg.M > len(cand):
        raise UsageError(f"--m {cfg.M} exceeds {len(cand)} candidates")
    res = pso_optimize(cand, cfg)
    out = Path(args.out)
    write_json(out, res.to_dict())
    trace = _side_path(out, ".trace.csv")
    write_csv(trace, ("iteration", "objective"), list(enumerate(res.objective_trace)))
    print(f"alpha*={res.alpha_star:.6g} beta*={res.beta_star:.6g} F={res.objective:.6g}")
    return [out, trace]


def cmd_evaluate(args):
    const, _ = _constellation(args)
    s2 = ebn0_to_noise_variance(args.ebn0_db, const.M, const.avg_power)
    ch = ChannelConfig(s2, s2, 1.0, args.pfa)
    rep = evaluate_constellation(const, ch, args.n_mc, args.seed, args.snr_form)
    dmin = min_distance(const)
    for name, val in (("R", rep.mi_bits), ("R_norm", rep.mi_normalized), ("Pd_avg", rep.avg_pd),
                      ("d_min", dmin)):
        print(f"{name:8s} {val:.6f}")
    data = rep.to_dict()
    data["min_distance"] = dmin
    write_json(args.out, data)
    return [args.out]


def _mixture_for(args, params, threads=1):
    spec = args.mixture
    if spec is None or str(spec).startswith("fit:"):
        L = int(str(spec).split(":", 1)[1]) if spec else 3
        fit, _ = fit_distance_mixture(params, L, args.n_fit, args.seed, args.power, args.restarts)
        return fit.mixture
    p = Path(spec)
    if not p.is_file():
        raise UsageError(f"mixture file not found: {spec}")
    try:
        return GammaMixture.from_json(p)
    except (ValueError, KeyError) as exc:
        raise UsageError(f"cannot parse mixture {spec}: {exc}") from exc


def cmd_bound(args):
    params = _params(args, required=args.mixture is None or str(args.mixture).startswith("fit:"))
    mix = _mixture_for(args, params)
    rows = []
    for eb in parse_range(args.ebn0_range):
        s2 = ebn0_to_noise_variance(eb, args.m, args.power)
        pep = average_pep_mixture(mix, s2).avg_pep
        rows.append({"ebn0_db": eb, "pep": pep, "union_bound": ser_union_bound(args.m, pep)[0]})
    write_csv(args.out, ("ebn0_db", "pep", "union_bound"), rows)
    return [args.out]


def cmd_crb(args):
    const, params = _constellation(args)
    if params is None:
        raise UsageError("crb needs --alpha/--beta or --preset for the averaged bound")
    scaled = power_scaled_params(params, const.avg_power)
    if args.sigma_r2_range:
        pairs = [(10 * math.log10(const.avg_power / (s2 * math.log2(const.M))), s2)
                 for s2 in parse_range(args.sigma_r2_range)]
    else:
        pairs = [(eb, ebn0_to_noise_variance(eb, const.M, const.avg_power)) for eb in parse_range(args.ebn0_range)]
    rows = []
    for k, (eb, s2) in enumerate(pairs):
        mc = crb_mc_estimate(scaled, s2, args.n_mc, args.seed)[0]
        mle = float(np.mean([mle_variance_mc(complex(x), 1.0, s2, args.n_mle, args.seed + 7919 * k + i)[1]
                             for i, x in enumerate(const.points)]))
        rows.append({"ebn0_db": eb, "crb_closed": crb_average(scaled, s2), "crb_mc": mc, "mle_var": mle})
    write_csv(args.out, ("ebn0_db", "crb_closed", "crb_mc", "mle_var"), rows)
    return [args.out]


def cmd_fit_mixture(args):
    if args.samples:
        p = Path(args.samples)
        try:
            data = np.loadtxt(p, delimiter=",", ndmin=1, comments="#")
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read samples {args.samples}: {exc}") from exc
        if data.ndim > 1:
            data = data[:, 0]
        if not np.all(np.isfinite(data)) or np.any(data <= 0):
            raise UsageError("samples must be finite and strictly positive")
    else:
        params = _params(args)
        data = squared_distance_samples(power_scaled_params(params, args.power), args.n, args.seed)
    Ls = [int(v) for v in parse_range(args.l_range)]
    if any(L < 1 for L in Ls):
        raise UsageError("L must be >= 1")

    def fit(L):
        return fit_gamma_mixture_em(data, EmConfig(L=L, restarts=args.restarts, seed=args.seed,
                                                   max_iters=args.max_iters))

    try:
        with ThreadPoolExecutor(_threads(args)) as ex:
            fits = list(ex.map(fit, Ls))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    out = Path(args.out)
    doc = {"fits": []}
    rows = []
    for L, f in zip(Ls, fits):
        kl = kl_divergence_empirical(data, f.mixture)
        entry = f.mixture.to_dict(f.final_log_likelihood)
        entry.update({"L": L, "kl": kl, "iterations": f.iterations, "converged": f.converged})
        doc["fits"].append(entry)
        rows.append({"L": L, "kl": kl, "log_likelihood": f.final_log_likelihood,
                     "iterations": f.iterations, "converged": f.converged})
    if len(fits) == 1:
        doc = dict(doc["fits"][0])
    write_json(out, doc)
    kl_path = _side_path(out, ".kl.csv")
    write_csv(kl_path, ("L", "kl", "log_likelihood", "iterations", "converged"), rows)
    for r in rows:
        print(f"L={r['L']} KL={r['kl']:.3e} LL={r['log_likelihood']:.6f}")
    return [out, kl_path]


def cmd_simulate(args):
    const, _ = _constellation(args)
    s2 = ebn0_to_noise_variance(args.ebn0_db, const.M, const.avg_power)
    cfg = SimConfig(args.n_symbols, args.seed, args.ebn0_db, ChannelConfig(s2, s2, 1.0, args.pfa), args.n_pd)
    res = simulate_point(const, cfg)
    print(f"SER={res.ser:.6g} (log10 {math.log10(res.ser) if res.ser > 0 else float('-inf'):.3f}) "
          f"Pd={res.pd_empirical:.4f}")
    write_json(args.out, res.to_dict())
    return [args.out]


def cmd_sweep(args):
    if not args.constellation and not args.preset and (args.alpha is None or args.beta is None):
        raise UsageError("sweep needs --constellation, --preset or --alpha/--beta")
    const, params = _constellation(args)
    grid = parse_range(args.ebn0_range)
    mix = None
    if args.bounds:
        if params is None:
            raise UsageError("--bounds needs --alpha/--beta or --preset")
        mix = _mixture_for(args, params)
    cfg = SimConfig(args.n_symbols, args.seed, n_pd_trials=args.n_pd, n_crb=args.n_crb)
    rows = sweep_ebn0(const, grid, cfg, params if args.bounds else None, mix, args.pfa, threads=_threads(args))
    write_csv(args.out, SWEEP_COLUMNS, rows)
    return [args.out]


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gammashape", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("candidates", help="write an APSK candidate grid")
    _add_common(p)
    p.add_argument("--num-rings", type=int, default=DEFAULT_GRID[0])
    p.add_argument("--points-per-ring", type=int, default=DEFAULT_GRID[1])
    p.add_argument("--max-radius", type=float, default=DEFAULT_GRID[2])
    p.set_defaults(func=cmd_candidates)

    p = sub.add_parser("design", help="PSO search over (alpha, beta)")
    _add_common(p)
    _add_grid(p)
    p.add_argument("--omega-d", type=float, default=0.6)
    p.add_argument("--alpha-bounds", type=_pair, default=(2.0, 5.0))
    p.add_argument("--beta-bounds", type=_pair, default=(1.0, 20.0))
    p.add_argument("--ebn0-db", type=float, default=10.0)
    p.add_argument("--pfa", type=float, default=1e-3)
    p.add_argument("--particles", type=int, default=5)
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--n-mc", type=int, default=1000)
    p.add_argument("--snr-form", choices=("db", "linear"), default="db")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("evaluate", help="MI and detection metrics of a constellation")
    _add_common(p)
    _add_source(p)
    p.add_argument("--ebn0-db", type=float, default=10.0)
    p.add_argument("--pfa", type=float, default=1e-3)
    p.add_argument("--n-mc", type=int, default=100000)
    p.add_argument("--snr-form", choices=("db", "linear"), default="db")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bound", help="Gamma-mixture SER union bound")
    _add_common(p)
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--mixture", help="mixture JSON or fit:L")
    p.add_argument("--ebn0-range", default="0:15:1")
    p.add_argument("--m", type=int, default=16)
    p.add_argument("--power", type=float, default=1.0)
    p.add_argument("--n-fit", type=int, default=10 ** 6)
    p.add_argument("--restarts", type=int, default=5)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("crb", help="reflection-coefficient CRBs")
    _add_common(p)
    _add_source(p)
    p.add_argument("--ebn0-range", default="0:15:1")
    p.add_argument("--sigma-r2-range", default=None, help="explicit noise variances instead of --ebn0-range")
    p.add_argument("--n-mc", type=int, default=10 ** 6)
    p.add_argument("--n-mle", type=int, default=10 ** 4)
    p.set_defaults(func=cmd_crb)

    p = sub.add_parser("fit-mixture", help="EM fit of the squared-distance law")
    _add_common(p)
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--samples", help="CSV of positive samples (first column)")
    p.add_argument("--l-range", default="1:5")
    p.add_argument("--n", type=int, default=10 ** 6)
    p.add_argument("--power", type=float, default=1.0)
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--max-iters", type=int, default=500)
    p.set_defaults(func=cmd_fit_mixture)

    p = sub.add_parser("simulate", help="Monte-Carlo SER and P_d at one Eb/N0")
    _add_common(p)
    _add_source(p)
    p.add_argument("--ebn0-db", type=float, default=10.0)
    p.add_argument("--pfa", type=float, default=1e-3)
    p.add_argument("--n-symbols", type=int, default=10 ** 6)
    p.add_argument("--n-pd", type=int, default=10 ** 5)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="SER / P_d / bound / CRB versus Eb/N0")
    _add_common(p)
    _add_source(p)
    p.add_argument("--ebn0-range", default="0:15:0.5")
    p.add_argument("--pfa", type=float, default=1e-3)
    p.add_argument("--n-symbols", type=int, default=10 ** 6)
    p.add_argument("--n-pd", type=int, default=10 ** 5)
    p.add_argument("--n-crb", type=int, default=10 ** 6)
    p.add_argument("--bounds", action="store_true", help="add union-bound and CRB columns")
    p.add_argument("--mixture", help="mixture JSON or fit:L (default fit:3)")
    p.add_argument("--n-fit", type=int, default=10 ** 6)
    p.add_argument("--restarts", type=int, default=5)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("replay", help="re-run a command from its manifest")
    p.add_argument("manifest")
    p.add_argument("--out", help="write outputs here instead of the recorded path")
    p.set_defaults(func=None)
    return parser


_NON_CONFIG = {"func", "command", "config"}


def resolve_args(argv) -> argparse.Namespace:
    """Parse argv, filling unset flags from --config (flags win)."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        file_vals = read_config_file(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sub._actions}
        defaults = {}
        for key, raw in file_vals.items():
            if key not in known or key in _NON_CONFIG:
                raise UsageError(f"unknown config key {key!r} for {args.command}")
            act = known[key]
            if isinstance(act, argparse._StoreTrueAction):
                defaults[key] = _bool(raw)
            else:
                conv = act.type or str
                try:
                    defaults[key] = conv(raw)
                except (argparse.ArgumentTypeError, ValueError) as exc:
                    raise UsageError(f"config key {key}: {exc}") from exc
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    if args.command != "replay" and not args.out:
        raise UsageError("--out is required")
    return args


def _jsonable(v):
    if isinstance(v, tuple):
        return list(v)
    return v


def write_manifest(args, outputs) -> Path:
    cfg = {k: _jsonable(v) for k, v in sorted(vars(args).items()) if k not in _NON_CONFIG}
    man = {
        "command": args.command,
        "full_config": cfg,
        "seed": args.seed,
        "tool_version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "outputs": [str(p) for p in outputs],
    }
    path = Path(str(args.out) + ".manifest.json")
    write_json(path, man)
    return path


def _replay_args(manifest_path, out=None) -> argparse.Namespace:
    try:
        man = json.loads(Path(manifest_path).read_text())
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read manifest {manifest_path}: {exc}") from exc
    parser = build_parser()
    cmd = man["command"]
    sub = parser._subparsers._group_actions[0].choices[cmd]
    ns = sub.parse_args([])
    for k, v in man["full_config"].items():
        setattr(ns, k, tuple(v) if isinstance(v, list) else v)
    ns.command = cmd
    ns.config = None
    if out is not None:
        ns.out = out
    return ns


def run(args) -> list:
    return [Path(p) for p in args.func(args)]


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = resolve_args(argv)
        if args.command == "replay":
            args = _replay_args(args.manifest, args.out)
        outputs = run(args)
        write_manifest(args, outputs)
    except UsageError as exc:
        print(f"gammashape: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else 2
    except (EmFailure, FloatingPointError, ArithmeticError) as exc:
        print(f"gammashape: numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"gammashape: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
