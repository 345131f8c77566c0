"""Relaxation gains ``g_i(t)`` of the time-dependent gradient flow.

For ``a_i(t) = lambda_i t + xi(t)`` the scalar modes obey

    g_i(t) = exp(-a_i(t)) + int_0^t exp(-(a_i(t) - a_i(u))) du,

and the integrand never exceeds 1 because ``a_i`` is increasing. Integrals
over consecutive grid panels are chained with

    I(t_{k+1}) = exp(-(a(t_{k+1}) - a(t_k))) I(t_k) + int_{t_k}^{t_{k+1}} ...,

so a whole time grid costs one pass. Each panel is integrated by adaptive
Gauss-Kronrod 7/15 with bisection, vectorized over panels and eigenvalues.
The inverse-time schedule has a kink of width ``epsilon/alpha`` at ``t = 0``;
local bisection resolves it in a few dozen levels.
"""

from __future__ import annotations

import numpy as np

from .errors import QuadratureError
from .schedules import Schedule, exponent

# QUADPACK qk15 abscissae (nonnegative half) and weights
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WK[:-1], _WK[::-1]])
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[1:7:2] = _WG[:3]
GAUSS_WEIGHTS[7] = _WG[3]
GAUSS_WEIGHTS[9:15:2] = _WG[2::-1]

MAX_DEPTH = 80
MAX_INTERVALS = 2_000_000


def panel_integrals(sched: Schedule, eigenvalues, times, quad_tol: float = 1e-8):
    """``J[k, i] = int_{t_k}^{t_{k+1}} exp(a_i(u) - a_i(t_{k+1})) du``."""
    times = np.asarray(times, dtype=float)
    lam = np.asarray(eigenvalues, dtype=float)
    n_panels = times.size - 1
    out = np.zeros((n_panels, lam.size))
    if n_panels <= 0:
        return out
    a_ref = exponent(sched, lam, times[1:])

    lo, hi = times[:-1].copy(), times[1:].copy()
    pid = np.arange(n_panels)
    keep = hi > lo
    lo, hi, pid = lo[keep], hi[keep], pid[keep]
    total = 0
    for _ in range(MAX_DEPTH):
        if lo.size == 0:
            return out
        total += lo.size
        if total > MAX_INTERVALS:
            break
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        x = mid[:, None] + half[:, None] * NODES
        f = np.exp(exponent(sched, lam, x) - a_ref[pid][:, None, :])
        kr = half[:, None] * np.einsum("j,ijn->in", KRONROD_WEIGHTS, f)
        ga = half[:, None] * np.einsum("j,ijn->in", GAUSS_WEIGHTS, f)
        err = np.abs(kr - ga)
        ok = np.all(err <= quad_tol * np.abs(kr), axis=1) | (half <= 4 * np.spacing(mid))
        np.add.at(out, pid[ok], kr[ok])
        bad = ~ok
        lo, hi, mid, pid = lo[bad], hi[bad], mid[bad], pid[bad]
        lo, hi, pid = (
            np.concatenate([lo, mid]),
            np.concatenate([mid, hi]),
            np.concatenate([pid, pid]),
        )
    raise QuadratureError(
        f"adaptive quadrature did not reach relative tolerance {quad_tol:g}"
    )


def relaxation_gains(sched: Schedule, eigenvalues, times, quad_tol: float = 1e-8):
    """``g[k, i] = g_i(times[k])`` for an ascending grid starting at 0."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("time grid must be a nonempty 1-D array")
    if times[0] != 0 or np.any(np.diff(times) < 0):
        raise ValueError("time grid must start at 0 and be ascending")
    lam = np.asarray(eigenvalues, dtype=float)
    a = exponent(sched, lam, times)
    J = panel_integrals(sched, lam, times, quad_tol)
    decay = np.exp(-(a[1:] - a[:-1]))
    acc = np.zeros((times.size, lam.size))
    for k in range(times.size - 1):
        acc[k + 1] = decay[k] * acc[k] + J[k]
    return np.exp(-a) + acc


def gains_at(sched: Schedule, eigenvalues, t: float, quad_tol: float = 1e-8):
    """``g_i(t)`` from a single quadrature over ``[0, t]``."""
    return relaxation_gains(sched, eigenvalues, np.array([0.0, t]) if t > 0 else np.array([0.0]), quad_tol)[-1]
