"""Monte Carlo estimate of the arithmetic MSE ``E||x(t) - s||^2`` on a fixed channel."""

from __future__ import annotations

import csv
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .detectors import EulerConfig, euler_states, mmse_estimate, ode_gains
from .errors import ConfigError
from .model import ChannelMatrix, SystemConfig, make_rng, sample_transmission
from .quadrature import relaxation_gains
from .schedules import Constant, Schedule
from .spectral import gram_eigensystem

# fixed so results do not depend on the worker count
CHUNK = 1024


@dataclass(frozen=True, eq=False)
class MonteCarloConfig:
    time_grid: np.ndarray
    trials: int = 1000
    seed: int = 0

    def __post_init__(self):
        t = np.asarray(self.time_grid, dtype=float)
        if t.ndim != 1 or t.size == 0 or t[0] != 0 or np.any(np.diff(t) < 0):
            raise ConfigError("Monte Carlo time grid must start at 0 and ascend")
        if self.trials < 1:
            raise ConfigError(f"need at least one trial, got {self.trials}")
        object.__setattr__(self, "time_grid", t)


@dataclass(frozen=True, eq=False)
class EmpiricalMse:
    times: np.ndarray
    mean: np.ndarray
    std_error: np.ndarray
    trials: int
    warning: str | None = None
    params: dict = field(default_factory=dict)

    def to_csv(self, path, header: dict | None = None) -> Path:
        path = Path(path)
        meta = dict(self.params)
        meta.update(header or {})
        with path.open("w", newline="") as fh:
            for k, v in meta.items():
                fh.write(f"# {k}: {v}\n")
            w = csv.writer(fh)
            w.writerow(["t", "mean", "std_error", "trials"])
            for t, m, s in zip(self.times, self.mean, self.std_error):
                w.writerow([f"{t:.17g}", f"{m:.17g}", f"{s:.17g}", self.trials])
        return path


# Each method is prepared once per channel and grid, then maps a batch of
# received vectors Y (m, k) to estimates at every grid time, (T, n, k).


@dataclass(frozen=True)
class EulerMethod:
    schedule: Schedule
    dt: float = 1e-3
    eta_rule: str = "endpoint"

    def prepare(self, H: ChannelMatrix, times):
        cfg = EulerConfig(t_max=max(float(times[-1]), self.dt), dt=self.dt)
        record = cfg.step_index(times)
        return lambda Y: euler_states(H, Y, self.schedule, cfg, record, self.eta_rule)

    def describe(self):
        return {"method": "euler", "dt": self.dt, "eta_rule": self.eta_rule,
                **self.schedule.describe()}


@dataclass(frozen=True)
class OdeMethod:
    eta: float

    def prepare(self, H: ChannelMatrix, times):
        eig = gram_eigensystem(H)
        g = ode_gains(eig.eigenvalues, self.eta, times)
        g[np.asarray(times) == 0] = 1.0
        return _eigenbasis_apply(H, eig, g)

    def describe(self):
        return {"method": "ode-closed-form", **Constant(self.eta).describe()}


@dataclass(frozen=True)
class TodeMethod:
    schedule: Schedule
    quad_tol: float = 1e-8

    def prepare(self, H: ChannelMatrix, times):
        eig = gram_eigensystem(H)
        g = relaxation_gains(self.schedule, eig.eigenvalues, times, self.quad_tol)
        return _eigenbasis_apply(H, eig, g)

    def describe(self):
        return {"method": "tode-closed-form", **self.schedule.describe()}


@dataclass(frozen=True)
class MmseMethod:
    sigma2: float

    def prepare(self, H: ChannelMatrix, times):
        T = len(times)
        return lambda Y: np.broadcast_to(mmse_estimate(H, Y, self.sigma2), (T,) + (H.n, Y.shape[1]))

    def describe(self):
        return {"method": "mmse", "sigma2": self.sigma2}


def _eigenbasis_apply(H, eig, g):
    hh = H.entries.conj().T
    u = eig.basis

    def run(Y):
        b = eig.project(hh @ Y)
        return np.einsum("ij,tj,jk->tik", u, g, b)

    return run


def _chunk_stats(H, cfg, run, seed, lo, hi):
    samples = [sample_transmission(H, cfg, make_rng(seed, trial)) for trial in range(lo, hi)]
    S = np.stack([x.s for x in samples], axis=1)
    Y = np.stack([x.y for x in samples], axis=1)
    X = run(Y)
    err = np.sum(np.abs(X - S[None]) ** 2, axis=1)
    mean = err.mean(axis=1)
    m2 = np.sum((err - mean[:, None]) ** 2, axis=1)
    return hi - lo, mean, m2


def arithmetic_mse(
    H: ChannelMatrix, cfg: SystemConfig, method, mc: MonteCarloConfig, threads: int = 1
) -> EmpiricalMse:
    """Average ``||x(t) - s||^2`` over ``mc.trials`` draws of ``(s, w)``.

    Trial ``j`` draws from stream ``(mc.seed, j)``; trials are grouped in
    fixed chunks whose statistics are merged in chunk order, so the result is
    bitwise identical for any ``threads``.
    """
    H.check_conforms(cfg)
    times = mc.time_grid
    run = method.prepare(H, times)
    bounds = [(lo, min(lo + CHUNK, mc.trials)) for lo in range(0, mc.trials, CHUNK)]

    def job(b):
        return _chunk_stats(H, cfg, run, mc.seed, *b)

    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(job, bounds))
    else:
        parts = [job(b) for b in bounds]

    count, mean, m2 = parts[0]
    for nb, mb, m2b in parts[1:]:
        tot = count + nb
        delta = mb - mean
        mean = mean + delta * (nb / tot)
        m2 = m2 + m2b + delta**2 * (count * nb / tot)
        count = tot

    warning = None
    if count < 2:
        warning = "fewer than two trials; standard error reported as zero"
        warnings.warn(warning, RuntimeWarning, stacklevel=2)
        se = np.zeros_like(mean)
    else:
        se = np.sqrt(m2 / (count - 1) / count)
    params = {"n": cfg.n, "m": cfg.m, "sigma2": cfg.sigma2, "trials": count,
              "mc_seed": mc.seed, **method.describe()}
    return EmpiricalMse(times.copy(), mean, se, count, warning, params)
