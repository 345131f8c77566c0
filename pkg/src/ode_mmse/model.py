"""Complex Gaussian MIMO transmission model ``y = H s + w``."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DimensionError


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Independent generator for ``(seed, *stream)``.

    Distinct stream keys give statistically independent sequences, so Monte
    Carlo trials can be drawn in any order or on any worker.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(stream)))


@dataclass(frozen=True)
class SystemConfig:
    n: int
    m: int
    sigma2: float
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ConfigError(f"dimensions must be positive, got n={self.n}, m={self.m}")
        if not self.sigma2 > 0:
            raise ConfigError(f"sigma2 must be positive, got {self.sigma2}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must fit in 64 unsigned bits, got {self.seed}")


@dataclass(frozen=True, eq=False)
class ChannelMatrix:
    entries: np.ndarray

    def __post_init__(self):
        h = np.array(self.entries, dtype=np.complex128)
        if h.ndim != 2:
            raise DimensionError(f"channel must be a matrix, got shape {h.shape}")
        if not np.all(np.isfinite(h)):
            raise ConfigError("channel has non-finite entries")
        if not np.any(h):
            raise ConfigError("channel must not be the zero matrix")
        h.setflags(write=False)
        object.__setattr__(self, "entries", h)

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    @property
    def n(self) -> int:
        return self.entries.shape[1]

    @property
    def gram(self) -> np.ndarray:
        h = self.entries
        return h.conj().T @ h

    def check_conforms(self, cfg: SystemConfig):
        if (self.m, self.n) != (cfg.m, cfg.n):
            raise DimensionError(
                f"channel is {self.m}x{self.n} but config expects {cfg.m}x{cfg.n}"
            )

    def __eq__(self, other):
        if not isinstance(other, ChannelMatrix):
            return NotImplemented
        return self.entries.shape == other.entries.shape and bool(
            np.all(self.entries == other.entries)
        )

    __hash__ = None

    def to_text(self) -> str:
        lines = [f"{self.m} {self.n}"]
        for z in self.entries.ravel():
            lines.append(f"{z.real:.17g} {z.imag:.17g}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> ChannelMatrix:
        rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        try:
            m, n = int(rows[0][0]), int(rows[0][1])
            vals = [complex(float(re), float(im)) for re, im in rows[1:]]
        except (IndexError, ValueError) as exc:
            raise ConfigError(f"malformed channel file: {exc}") from None
        if len(vals) != m * n:
            raise ConfigError(f"channel file declares {m}x{n} but lists {len(vals)} entries")
        return cls(np.array(vals, dtype=np.complex128).reshape(m, n))

    def digest(self) -> str:
        """sha256 of the canonical text form; identifies the realization in outputs."""
        return hashlib.sha256(self.to_text().encode()).hexdigest()


def save_channel(H: ChannelMatrix, path) -> Path:
    path = Path(path)
    path.write_text(H.to_text())
    return path


def load_channel(path) -> ChannelMatrix:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read channel file: {exc}") from None
    return ChannelMatrix.from_text(text)


@dataclass(frozen=True, eq=False)
class TransmissionSample:
    s: np.ndarray
    w: np.ndarray
    y: np.ndarray


def complex_normal(rng: np.random.Generator, shape, var: float = 1.0) -> np.ndarray:
    # circular symmetry: re and im each carry half the variance
    scale = np.sqrt(var / 2.0)
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return scale * (re + 1j * im)


def sample_channel(cfg: SystemConfig, rng: np.random.Generator) -> ChannelMatrix:
    while True:
        h = complex_normal(rng, (cfg.m, cfg.n))
        if np.any(h):
            return ChannelMatrix(h)


def sample_transmission(
    H: ChannelMatrix, cfg: SystemConfig, rng: np.random.Generator
) -> TransmissionSample:
    H.check_conforms(cfg)
    s = complex_normal(rng, cfg.n)
    w = complex_normal(rng, cfg.m, cfg.sigma2)
    y = H.entries @ s + w
    return TransmissionSample(s, w, y)


def _conform(H: ChannelMatrix, y, x=None):
    y = np.asarray(y, dtype=np.complex128)
    if y.shape[0] != H.m:
        raise DimensionError(f"y has length {y.shape[0]}, channel has {H.m} rows")
    if x is not None:
        x = np.asarray(x, dtype=np.complex128)
        if x.shape[0] != H.n:
            raise DimensionError(f"x has length {x.shape[0]}, channel has {H.n} columns")
    return y, x


def objective_value(H: ChannelMatrix, y, eta: float, x) -> float:
    """Regularized least-squares cost ``||y - Hx||^2 + eta ||x||^2``."""
    if not eta > 0:
        raise ConfigError(f"eta must be positive, got {eta}")
    y, x = _conform(H, y, x)
    r = y - H.entries @ x
    return float(np.vdot(r, r).real + eta * np.vdot(x, x).real)


def objective_gradient(H: ChannelMatrix, y, eta: float, x) -> np.ndarray:
    y, x = _conform(H, y, x)
    h = H.entries
    return h.conj().T @ (h @ x) + eta * x - h.conj().T @ y
