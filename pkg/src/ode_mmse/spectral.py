"""Eigendecomposition of the Gram matrix ``H^H H``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DecompositionError
from .model import ChannelMatrix

CLAMP = 1e-12


@dataclass(frozen=True, eq=False)
class GramEigenSystem:
    """``H^H H = U diag(eigenvalues) U^H`` with eigenvalues sorted descending."""

    basis: np.ndarray
    eigenvalues: np.ndarray

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        u = self.basis
        return (u * self.eigenvalues) @ u.conj().T

    def project(self, v):
        """Coordinates of ``v`` (vector or column batch) in the eigenbasis."""
        return self.basis.conj().T @ v

    def unproject(self, v):
        return self.basis @ v


def gram_eigensystem(H: ChannelMatrix) -> GramEigenSystem:
    g = H.gram
    g = 0.5 * (g + g.conj().T)
    try:
        w, u = np.linalg.eigh(g)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(f"Hermitian eigensolver failed: {exc}") from None
    order = np.argsort(-w, kind="stable")
    w = w[order]
    u = u[:, order]
    # solver noise can push zero eigenvalues slightly negative
    w = np.where((w < 0) & (w > -CLAMP), 0.0, w)
    if np.any(w < 0):
        raise DecompositionError(f"Gram matrix has negative eigenvalue {w.min():.3e}")
    w.setflags(write=False)
    u.setflags(write=False)
    return GramEigenSystem(u, w)


def stability_margin(eig: GramEigenSystem, eta: float) -> float:
    """Slowest decay rate ``lambda_n + eta`` of the residual dynamics."""
    if not eta > 0:
        raise ConfigError(f"eta must be positive, got {eta}")
    return float(eig.eigenvalues[-1] + eta)
