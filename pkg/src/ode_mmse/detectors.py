"""MMSE detection and the ODE-MMSE / tODE-MMSE trajectories.

Closed-form trajectories are evaluated as ``n`` scalar problems in the
eigenbasis of ``H^H H``: with ``b = U^H H^H y`` every mode is ``g_i(t) b_i``.
The Euler integrator works on the dense system and serves as the
independent discretization.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg

from .errors import ConfigError, DimensionError, EulerStabilityError, NumericalError
from .model import ChannelMatrix, _conform
from .quadrature import gains_at, relaxation_gains
from .schedules import Schedule
from .spectral import GramEigenSystem, gram_eigensystem

DEFAULT_QUAD_TOL = 1e-8


def mmse_estimate(H: ChannelMatrix, y, sigma2: float) -> np.ndarray:
    """Solve ``(H^H H + sigma2 I) s = H^H y`` by Cholesky; works on column batches."""
    if not sigma2 > 0:
        raise ConfigError(f"sigma2 must be positive, got {sigma2}")
    y, _ = _conform(H, y)
    h = H.entries
    a = h.conj().T @ h + sigma2 * np.eye(H.n)
    try:
        return scipy.linalg.cho_solve(scipy.linalg.cho_factor(a), h.conj().T @ y)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Cholesky solve failed: {exc}") from None


@dataclass(frozen=True, eq=False)
class ClosedFormState:
    """Eigenbasis precomputation shared by every closed-form evaluation."""

    eig: GramEigenSystem
    projected_rhs: np.ndarray
    schedule: Schedule | None = None
    # H^H y as computed, so x(0) is returned without a round trip through U
    initial: np.ndarray | None = None

    def __post_init__(self):
        if self.projected_rhs.shape[0] != self.eig.n:
            raise DimensionError("projected right-hand side must have length n")

    @classmethod
    def from_observation(cls, H: ChannelMatrix, y, schedule=None, eig=None):
        y, _ = _conform(H, y)
        eig = eig or gram_eigensystem(H)
        hy = H.entries.conj().T @ y
        return cls(eig, eig.project(hy), schedule, hy)

    def matched_filter(self) -> np.ndarray:
        if self.initial is not None:
            return self.initial.copy()
        return self.eig.unproject(self.projected_rhs)


def equilibrium_point(state: ClosedFormState, eta: float) -> np.ndarray:
    if not eta > 0:
        raise ConfigError(f"eta must be positive, got {eta}")
    d = 1.0 / (state.eig.eigenvalues + eta)
    return state.eig.unproject(_scale(d, state.projected_rhs))


def ode_gains(eigenvalues, eta: float, t):
    """Constant-``eta`` gains ``e^{-ct}(1 - 1/c) + 1/c``, ``c = lambda + eta``."""
    c = np.asarray(eigenvalues) + eta
    t = np.asarray(t, dtype=float)
    return np.exp(-t[..., None] * c) * (1.0 - 1.0 / c) + 1.0 / c


def ode_trajectory_at(state: ClosedFormState, eta: float, t: float) -> np.ndarray:
    if not eta > 0:
        raise ConfigError(f"eta must be positive, got {eta}")
    if t < 0:
        raise ConfigError("time must be nonnegative")
    if t == 0:
        return state.matched_filter()
    g = ode_gains(state.eig.eigenvalues, eta, t)
    return state.eig.unproject(_scale(g, state.projected_rhs))


def tode_trajectory_at(
    state: ClosedFormState, t: float, quad_tol: float = DEFAULT_QUAD_TOL
) -> np.ndarray:
    if state.schedule is None:
        raise ConfigError("tODE trajectory needs a schedule")
    if t < 0:
        raise ConfigError("time must be nonnegative")
    if t == 0:
        return state.matched_filter()
    g = gains_at(state.schedule, state.eig.eigenvalues, t, quad_tol)
    return state.eig.unproject(_scale(g, state.projected_rhs))


def tode_trajectory(state: ClosedFormState, times, quad_tol: float = DEFAULT_QUAD_TOL):
    """States at every grid time, shape ``(len(times), n[, k])``."""
    g = relaxation_gains(state.schedule, state.eig.eigenvalues, times, quad_tol)
    return np.stack([state.eig.unproject(_scale(gk, state.projected_rhs)) for gk in g])


def _scale(g, b):
    return g * b if b.ndim == 1 else g[:, None] * b


@dataclass(frozen=True)
class EulerConfig:
    t_max: float
    dt: float = 1e-3

    def __post_init__(self):
        if not (0 < self.dt <= self.t_max):
            raise ConfigError(f"need 0 < dt <= t_max, got dt={self.dt}, t_max={self.t_max}")

    @property
    def steps(self) -> int:
        return int(round(self.t_max / self.dt))

    def step_times(self) -> np.ndarray:
        return self.dt * np.arange(self.steps + 1)

    def step_index(self, times) -> np.ndarray:
        """Step numbers for ``times``, which must sit on the Euler lattice."""
        times = np.asarray(times, dtype=float)
        idx = np.rint(times / self.dt).astype(int)
        if np.any(np.abs(idx * self.dt - times) > 1e-9 * np.maximum(1.0, times)):
            raise ConfigError("requested times are not multiples of the Euler step")
        if np.any(idx < 0) or np.any(idx > self.steps):
            raise ConfigError("requested times fall outside [0, t_max]")
        return idx


def step_etas(sched: Schedule, cfg: EulerConfig, eta_rule: str = "endpoint") -> np.ndarray:
    """Regularization used by step ``N`` (index 0 unused).

    ``"endpoint"`` takes ``eta(t_N)``. ``"average"`` takes
    ``(xi(t_N) - xi(t_{N-1})) / dt``, which keeps the integral of a schedule
    that is singular near ``t = 0``; inverse-time schedules need it for the
    scheme to converge to the continuous flow.
    """
    t = cfg.step_times()
    if eta_rule == "endpoint":
        return np.asarray(sched.eta(t), dtype=float)
    if eta_rule == "average":
        xi = np.asarray(sched.xi(t), dtype=float)
        return np.concatenate([[np.nan], np.diff(xi) / cfg.dt])
    raise ConfigError(f"unknown eta rule {eta_rule!r}")


def check_euler_stability(
    H: ChannelMatrix, sched: Schedule, cfg: EulerConfig, eta_rule: str = "endpoint"
) -> float:
    """Reject ``dt >= 2/(lambda_1 + max eta)``; returns the bound."""
    lam_max = np.linalg.norm(H.entries, 2) ** 2
    eta = step_etas(sched, cfg, eta_rule)[1:] if cfg.steps else np.asarray([sched.eta(0.0)])
    bound = 2.0 / (lam_max + float(np.max(eta)))
    if not cfg.dt < bound:
        raise EulerStabilityError(
            f"Euler step {cfg.dt:g} violates stability bound {bound:.6g}"
        )
    return bound


def euler_states(
    H: ChannelMatrix, Y, sched: Schedule, cfg: EulerConfig, record=None, eta_rule="endpoint"
):
    """Batched Euler integration; ``Y`` is ``(m,)`` or ``(m, k)``.

    Returns the states at step numbers ``record`` (default: every step),
    shape ``(len(record), n[, k])``.
    """
    check_euler_stability(H, sched, cfg, eta_rule)
    Y, _ = _conform(H, Y)
    h = H.entries
    gram = h.conj().T @ h
    b = h.conj().T @ Y
    steps = cfg.steps
    record = np.arange(steps + 1) if record is None else np.asarray(record)
    eta = step_etas(sched, cfg, eta_rule)
    out = np.empty((record.size,) + b.shape, dtype=np.complex128)
    slots = {}
    for j, r in enumerate(record):
        slots.setdefault(int(r), []).append(j)
    last = int(record.max()) if record.size else 0
    dt = cfg.dt
    db = dt * b
    x = b.copy()
    for j in slots.get(0, ()):
        out[j] = x
    for N in range(1, last + 1):
        x = x - dt * (gram @ x + eta[N] * x) + db
        for j in slots.get(N, ()):
            out[j] = x
    return out


def euler_trajectory(H: ChannelMatrix, y, sched: Schedule, cfg: EulerConfig, eta_rule="endpoint"):
    """``(times, states)`` of ``x_N = x_{N-1} - dt (H^H H + eta(t_N)) x_{N-1} + dt H^H y``."""
    states = euler_states(H, y, sched, cfg, eta_rule=eta_rule)
    return cfg.step_times(), states


def write_trajectory_csv(path, times, states, header: dict | None = None) -> Path:
    path = Path(path)
    states = np.asarray(states)
    with path.open("w", newline="") as fh:
        for k, v in (header or {}).items():
            fh.write(f"# {k}: {v}\n")
        w = csv.writer(fh)
        cols = ["t"]
        for i in range(states.shape[1]):
            cols += [f"re{i}", f"im{i}"]
        w.writerow(cols)
        for t, x in zip(times, states):
            row = [f"{t:.17g}"]
            for z in x:
                row += [f"{z.real:.17g}", f"{z.imag:.17g}"]
            w.writerow(row)
    return path

