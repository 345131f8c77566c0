"""Regularization schedules ``eta(t)`` and their running integrals ``xi(t)``.

Every schedule evaluates elementwise on arrays. ``xi`` is exact for all kinds:
closed forms for the constant and inverse-time schedules, and for tables the
trapezoid rule over the knots, which is exact for a piecewise-linear ``eta``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

DEFAULT_EPSILON = 1e-8


def _check_time(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(np.isnan(t)):
        raise ConfigError("time must be nonnegative")
    return t


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


@dataclass(frozen=True)
class Constant:
    eta_value: float

    def __post_init__(self):
        if not self.eta_value > 0:
            raise ConfigError(f"eta must be positive, got {self.eta_value}")

    def eta(self, t):
        t = _check_time(t)
        return _out(np.full_like(t, self.eta_value))

    def xi(self, t):
        t = _check_time(t)
        return _out(self.eta_value * t)

    def describe(self) -> dict:
        return {"schedule": "constant", "eta": self.eta_value}


@dataclass(frozen=True)
class InverseTime:
    """``eta(t) = 1/(alpha t + epsilon) + sigma2``, decaying to the noise level."""

    alpha: float
    sigma2: float
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        for name in ("alpha", "sigma2", "epsilon"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")

    def eta(self, t):
        t = _check_time(t)
        return _out(1.0 / (self.alpha * t + self.epsilon) + self.sigma2)

    def xi(self, t):
        t = _check_time(t)
        # log1p keeps ξ accurate for α t << ε
        return _out(np.log1p(self.alpha * t / self.epsilon) / self.alpha + self.sigma2 * t)

    def describe(self) -> dict:
        return {
            "schedule": "inverse-time",
            "alpha": self.alpha,
            "epsilon": self.epsilon,
            "sigma2": self.sigma2,
        }


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Piecewise-linear ``eta`` through ``(times, values)``; held at the last value."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        v = np.array(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or t.size == 0:
            raise ConfigError("table times and values must be equal-length 1-D arrays")
        if t[0] != 0 or np.any(np.diff(t) <= 0):
            raise ConfigError("table times must start at 0 and strictly increase")
        if np.any(~(v > 0)):
            raise ConfigError("table values must be strictly positive")
        cum = np.concatenate([[0.0], np.cumsum(np.diff(t) * (v[1:] + v[:-1]) / 2)])
        for arr in (t, v, cum):
            arr.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "_cum", cum)

    def eta(self, t):
        t = _check_time(t)
        return _out(np.interp(t, self.times, self.values))

    def xi(self, t):
        t = _check_time(t)
        k = np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, self.times.size - 1)
        t0 = self.times[k]
        e0 = self.values[k]
        e1 = np.interp(t, self.times, self.values)
        return _out(self._cum[k] + (t - t0) * (e0 + e1) / 2)

    def describe(self) -> dict:
        return {
            "schedule": "table",
            "times": " ".join(f"{x:.17g}" for x in self.times),
            "values": " ".join(f"{x:.17g}" for x in self.values),
        }


Schedule = Constant | InverseTime | Tabulated


@dataclass(frozen=True)
class XiValue:
    t: float
    xi: float


def eta_at(sched: Schedule, t: float) -> float:
    return sched.eta(t)


def xi_at(sched: Schedule, t: float) -> XiValue:
    return XiValue(float(t), float(sched.xi(t)))


def exponent(sched: Schedule, eigenvalues, t):
    """``a_i(t) = lambda_i t + xi(t)``; shape ``(..., n)`` for array ``t``."""
    t = np.asarray(t, dtype=float)
    lam = np.asarray(eigenvalues, dtype=float)
    return t[..., None] * lam + np.asarray(sched.xi(t))[..., None]
