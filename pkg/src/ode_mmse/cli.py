"""Command-line recipes writing CSV artifacts.

    ode-mmse analytical --n 8 --m 8 --sigma2 1 --eta 0.5 --t-max 3 --output out/
    ode-mmse gridsearch --alpha 1 10 50 100 --t-max 0.8 --output out/

Settings can come from an INI file (``--config``, section ``[experiment]``,
keys named like the long flags); flags given on the command line win.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    asymptotic_mse,
    grid_search_alpha,
    mmse_mse,
    mse_curve,
    write_functional_table,
)
from .detectors import EulerConfig, euler_trajectory, write_trajectory_csv
from .errors import ConfigError, OdeMmseError
from .model import (
    ChannelMatrix,
    SystemConfig,
    load_channel,
    make_rng,
    sample_channel,
    sample_transmission,
    save_channel,
)
from .montecarlo import EulerMethod, MonteCarloConfig, arithmetic_mse
from .schedules import Constant, InverseTime, Tabulated
from .spectral import gram_eigensystem

COMMANDS = (
    "analytical",
    "tode-analytical",
    "euler",
    "montecarlo",
    "compare",
    "gridsearch",
    "channel-gen",
)

_FLOATS = ("sigma2", "epsilon", "t_max", "dt", "quad_tol", "mc_step")
_INTS = ("n", "m", "trials", "seed", "threads")
_LISTS = ("eta", "alpha", "table_times", "table_values")
_STRINGS = ("schedule", "channel", "output", "eta_rule")


@dataclass
class Experiment:
    """Resolved settings for one run."""

    command: str
    system: SystemConfig
    channel: ChannelMatrix
    channel_source: str
    args: argparse.Namespace

    @property
    def header(self) -> dict:
        a = self.args
        return {
            "command": self.command,
            "version": __version__,
            "n": self.system.n,
            "m": self.system.m,
            "sigma2": self.system.sigma2,
            "seed": self.system.seed,
            "t_max": a.t_max,
            "dt": a.dt,
            "channel_source": self.channel_source,
            "channel_sha256": self.channel.digest(),
        }


def _add_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="INI file with an [experiment] section")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--sigma2", type=float)
    p.add_argument("--eta", type=float, nargs="+", help="constant regularization(s); default sigma2")
    p.add_argument("--schedule", choices=["constant", "inverse-time", "table"])
    p.add_argument("--alpha", type=float, nargs="+", help="inverse-time parameter(s)")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--table-times", type=float, nargs="+")
    p.add_argument("--table-values", type=float, nargs="+")
    p.add_argument("--t-max", type=float, help="time horizon (functional horizon T for gridsearch)")
    p.add_argument("--dt", type=float, help="Euler step and analytical grid step")
    p.add_argument("--mc-step", type=float, help="spacing of the Monte Carlo time grid")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--channel", help="channel file to load instead of sampling one")
    p.add_argument("--output", help="output directory")
    p.add_argument("--threads", type=int)
    p.add_argument("--quad-tol", type=float)
    p.add_argument("--eta-rule", choices=["endpoint", "average"])


DEFAULTS = {
    "n": 8,
    "m": 8,
    "sigma2": 1.0,
    "eta": None,
    "schedule": None,
    "alpha": None,
    "epsilon": 1e-8,
    "table_times": None,
    "table_values": None,
    "t_max": None,
    "dt": 1e-3,
    "mc_step": 0.1,
    "trials": 1000,
    "seed": 0,
    "channel": None,
    "output": ".",
    "threads": 1,
    "quad_tol": 1e-8,
    "eta_rule": "endpoint",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ode-mmse", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        _add_flags(sub.add_parser(name))
    return parser


def read_config(path) -> dict:
    cp = configparser.ConfigParser()
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not cp.has_section("experiment"):
        raise ConfigError(f"config {path} has no [experiment] section")
    out = {}
    for key, raw in cp.items("experiment"):
        dest = key.replace("-", "_")
        try:
            if dest in _FLOATS:
                out[dest] = float(raw)
            elif dest in _INTS:
                out[dest] = int(raw)
            elif dest in _LISTS:
                out[dest] = [float(v) for v in raw.replace(",", " ").split()]
            elif dest in _STRINGS:
                out[dest] = raw.strip()
            else:
                raise ConfigError(f"unknown config key {key!r}")
        except ValueError:
            raise ConfigError(f"bad value for {key!r}: {raw!r}") from None
    return out


def resolve(args: argparse.Namespace) -> argparse.Namespace:
    """Merge defaults < config file < flags."""
    merged = dict(DEFAULTS)
    explicit = set()
    if args.config:
        from_file = read_config(args.config)
        merged.update(from_file)
        explicit.update(from_file)
    for k, v in vars(args).items():
        if v is not None:
            merged[k] = v
            explicit.add(k)
    merged["explicit"] = explicit
    if merged["t_max"] is None:
        merged["t_max"] = 0.8 if args.command == "gridsearch" else 3.0
    return argparse.Namespace(**merged)


def make_schedule(a: argparse.Namespace, sigma2: float):
    kind = a.schedule or ("inverse-time" if a.alpha and a.command != "gridsearch" else "constant")
    if kind == "constant":
        return Constant(a.eta[0] if a.eta else sigma2)
    if kind == "inverse-time":
        if not a.alpha:
            raise ConfigError("inverse-time schedule needs --alpha")
        return InverseTime(a.alpha[0], sigma2, a.epsilon)
    if a.table_times is None or a.table_values is None:
        raise ConfigError("table schedule needs --table-times and --table-values")
    return Tabulated(a.table_times, a.table_values)


def setup(args: argparse.Namespace) -> Experiment:
    a = resolve(args)
    if a.channel:
        H = load_channel(a.channel)
        if {"n", "m"} & a.explicit:
            system = SystemConfig(a.n, a.m, a.sigma2, a.seed)
            H.check_conforms(system)
        else:
            system = SystemConfig(H.n, H.m, a.sigma2, a.seed)
        source = str(a.channel)
    else:
        system = SystemConfig(a.n, a.m, a.sigma2, a.seed)
        H = sample_channel(system, make_rng(system.seed))
        source = f"generated(seed={system.seed})"
    if not (a.t_max > 0 and a.dt > 0):
        raise ConfigError("t-max and dt must be positive")
    return Experiment(a.command, system, H, source, a)


def _grid(t_max: float, step: float) -> np.ndarray:
    k = round(t_max / step)
    if abs(k * step - t_max) > 1e-9 * max(1.0, t_max):
        raise ConfigError(f"t-max {t_max:g} is not a multiple of the grid step {step:g}")
    return step * np.arange(k + 1)


def _mc_grid(a) -> np.ndarray:
    ratio = a.mc_step / a.dt
    if abs(ratio - round(ratio)) > 1e-9 * ratio:
        raise ConfigError("mc-step must be a multiple of dt")
    return a.dt * round(ratio) * np.arange(round(a.t_max / (a.dt * round(ratio))) + 1)


def _outdir(a) -> Path:
    out = Path(a.output)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory: {exc}") from None
    return out


def cmd_channel_gen(exp: Experiment):
    path = save_channel(exp.channel, _outdir(exp.args) / "channel.txt")
    print(f"channel-gen: wrote {path} sha256={exp.channel.digest()}")


def cmd_analytical(exp: Experiment):
    a, sigma2 = exp.args, exp.system.sigma2
    eig = gram_eigensystem(exp.channel)
    grid = _grid(a.t_max, a.dt)
    etas = a.eta or [sigma2]
    out = _outdir(a)
    parts = []
    for eta in etas:
        curve = mse_curve(eig, sigma2, grid, eta=eta)
        name = "analytical.csv" if len(etas) == 1 else f"analytical_eta{eta:g}.csv"
        extra = {"asymptotic_mse": asymptotic_mse(eig, sigma2, eta), "mmse_mse": mmse_mse(eig, sigma2)}
        curve.to_csv(out / name, {**exp.header, **extra})
        parts.append(f"eta={eta:g} MSE(0)={curve.values[0]:.6g} MSE({a.t_max:g})={curve.values[-1]:.6g} "
                     f"MSE_inf={extra['asymptotic_mse']:.6g}")
    print("analytical: " + "; ".join(parts) + f" rows={grid.size}")


def cmd_tode_analytical(exp: Experiment):
    a, sigma2 = exp.args, exp.system.sigma2
    sched = make_schedule(a, sigma2)
    eig = gram_eigensystem(exp.channel)
    grid = _grid(a.t_max, a.dt)
    curve = mse_curve(eig, sigma2, grid, schedule=sched, engine="time-dependent", quad_tol=a.quad_tol)
    extra = {"mmse_mse": mmse_mse(eig, sigma2)}
    curve.to_csv(_outdir(a) / "tode_analytical.csv", {**exp.header, **extra})
    print(f"tode-analytical: MSE({a.t_max:g})={curve.values[-1]:.6g} "
          f"MSE_mmse={extra['mmse_mse']:.6g} rows={grid.size}")


def cmd_euler(exp: Experiment):
    a = exp.args
    sched = make_schedule(a, exp.system.sigma2)
    sample = sample_transmission(exp.channel, exp.system, make_rng(exp.system.seed, 0))
    times, states = euler_trajectory(exp.channel, sample.y, sched, EulerConfig(a.t_max, a.dt), a.eta_rule)
    header = {**exp.header, **sched.describe(), "eta_rule": a.eta_rule, "sample": "trial 0"}
    write_trajectory_csv(_outdir(a) / "euler_trajectory.csv", times, states, header)
    err = float(np.sum(np.abs(states[-1] - sample.s) ** 2))
    print(f"euler: steps={times.size - 1} final squared error={err:.6g}")


def _empirical(exp: Experiment, sched):
    a = exp.args
    mc = MonteCarloConfig(_mc_grid(a), a.trials, exp.system.seed)
    return arithmetic_mse(exp.channel, exp.system, EulerMethod(sched, a.dt, a.eta_rule), mc, a.threads)


def cmd_montecarlo(exp: Experiment):
    sched = make_schedule(exp.args, exp.system.sigma2)
    emp = _empirical(exp, sched)
    emp.to_csv(_outdir(exp.args) / "montecarlo.csv", exp.header)
    print(f"montecarlo: trials={emp.trials} points={emp.times.size} "
          f"MSE({emp.times[-1]:g})={emp.mean[-1]:.6g}±{emp.std_error[-1]:.2g}")


def cmd_compare(exp: Experiment):
    a, sigma2 = exp.args, exp.system.sigma2
    sched = make_schedule(a, sigma2)
    eig = gram_eigensystem(exp.channel)
    emp = _empirical(exp, sched)
    curve = mse_curve(eig, sigma2, emp.times, schedule=sched, quad_tol=a.quad_tol)
    z = (emp.mean - curve.values) / np.where(emp.std_error > 0, emp.std_error, np.inf)
    ref = asymptotic_mse(eig, sigma2, sched.eta_value) if isinstance(sched, Constant) else mmse_mse(eig, sigma2)
    path = _outdir(a) / "compare.csv"
    with path.open("w", newline="") as fh:
        for k, v in {**exp.header, **sched.describe(), "trials": emp.trials,
                     "eta_rule": a.eta_rule, "provenance": curve.provenance.value}.items():
            fh.write(f"# {k}: {v}\n")
        fh.write("t,analytical,empirical_mean,std_error,z,reference\n")
        for row in zip(emp.times, curve.values, emp.mean, emp.std_error, z):
            fh.write(",".join(f"{x:.17g}" for x in row) + f",{ref:.17g}\n")
    print(f"compare: points={emp.times.size} max|z|={np.max(np.abs(z)):.3g} reference={ref:.6g}")


def cmd_gridsearch(exp: Experiment):
    a, sigma2 = exp.args, exp.system.sigma2
    candidates = a.alpha or [1.0, 10.0, 50.0, 100.0]
    eig = gram_eigensystem(exp.channel)
    best, results = grid_search_alpha(candidates, eig, sigma2, a.t_max, a.dt, a.epsilon, a.quad_tol)
    header = {**exp.header, "T": a.t_max, "epsilon": a.epsilon, "best_alpha": best}
    write_functional_table(_outdir(a) / "functional.csv", results, header)
    table = " ".join(f"F({r.alpha:g})={r.value:.4f}" for r in results)
    print(f"gridsearch: best alpha={best:g} {table}")


HANDLERS = {
    "analytical": cmd_analytical,
    "tode-analytical": cmd_tode_analytical,
    "euler": cmd_euler,
    "montecarlo": cmd_montecarlo,
    "compare": cmd_compare,
    "gridsearch": cmd_gridsearch,
    "channel-gen": cmd_channel_gen,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        exp = setup(args)
        HANDLERS[args.command](exp)
    except OdeMmseError as exc:
        print(f"error: category={exc.category} message={exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
