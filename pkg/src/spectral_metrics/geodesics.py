"""Logarithmic intervals, local quadratic forms and path lengths.

To second order every distance in :mod:`spectral_metrics.distances` is a
quadratic form in the perturbation, and the symmetrized form induces a
length for paths ``tau -> f_tau``.  The length depends on the path only
through ``xdot = d/dtau log f_tau``; a path is stationary for it exactly
when the centred, variance-normalized ``xdot`` does not change with
``tau``.  Logarithmic intervals ``fa**(1-tau) * fb**tau`` have constant
``xdot`` and therefore qualify.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import core, distances
from .core import SpectrumGrid
from .errors import (
    InvalidGrid,
    PerturbationTooLarge,
    TooFewFrames,
    UnnormalizedDensity,
    ZeroSpeed,
)

# variance floor below which a frame's velocity is treated as zero
SPEED_FLOOR = 1e-12
# log-ratio spread below which two densities are on the same ray
RAY_TOL = 1e-9
_KL_NORMALIZATION_TOL = 1e-9


class QuadraticFormKind(enum.Enum):
    SYM = "sym"
    AG = "ag"
    KL = "kl"


def log_interval(fa: SpectrumGrid, fb: SpectrumGrid, tau: float) -> SpectrumGrid:
    """``fa**(1-tau) * fb**tau``; reproduces ``fa`` and ``fb`` at the ends."""
    core._check_same_size(fa, fb)
    tau = float(tau)
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [0, 1], got {tau!r}")
    return SpectrumGrid(np.power(fa.values, 1.0 - tau) * np.power(fb.values, tau))


def _centered_var(x: np.ndarray) -> float:
    d = x - np.mean(x)
    return float(np.mean(d * d))


def quadratic_form(f: SpectrumGrid, delta, kind=QuadraticFormKind.SYM) -> float:
    """Second-order coefficient of ``d(f, f + eps*delta)`` in ``eps``.

    ``SYM`` is the variance of ``delta/f`` over the grid and ``AG`` is half
    of it.  ``KL`` is ``(mean(delta**2/f) - mean(delta)**2)/2`` and needs a
    unit-mean ``f``.
    """
    kind = QuadraticFormKind(kind)
    core._check_same_size(f, delta)
    fv = f.values
    dv = core._vals(delta)
    if kind is QuadraticFormKind.KL:
        m = core.mean(f)
        if abs(m - 1.0) > _KL_NORMALIZATION_TOL:
            raise UnnormalizedDensity(f"KL quadratic form needs mean(f) = 1, got {m!r}")
        # mean(f * (delta/f - mean(delta))**2) equals the textbook form when mean(f) = 1
        c = dv / fv - np.mean(dv)
        return 0.5 * float(np.mean(fv * c * c))
    q = _centered_var(dv / fv)
    return q if kind is QuadraticFormKind.SYM else 0.5 * q


_MATCHING_DISTANCE = {
    QuadraticFormKind.SYM: distances._sym_raw,
    QuadraticFormKind.AG: distances._ag_raw,
    QuadraticFormKind.KL: distances._kl_raw,
}


def expansion_residual(f: SpectrumGrid, delta, eps: float, kind=QuadraticFormKind.SYM) -> float:
    """``|d(f, f + eps*delta) - eps**2 * quadratic_form(f, delta)|``."""
    kind = QuadraticFormKind(kind)
    core._check_same_size(f, delta)
    step = eps * core._vals(delta)
    if np.max(np.abs(step / f.values)) >= 1.0:
        raise PerturbationTooLarge(f"|eps*delta/f| reaches 1 at eps={eps!r}")
    # unclamped: tiny distances must not be rounded to zero here
    d = _MATCHING_DISTANCE[kind](f, SpectrumGrid(f.values + step))
    return abs(float(d) - eps * eps * quadratic_form(f, delta, kind))


def logpath_length(f0: SpectrumGrid, f1: SpectrumGrid) -> float:
    """Closed-form length of the logarithmic interval from ``f0`` to ``f1``.

    The standard deviation of ``log(f1/f0)`` over the grid; zero when the
    log ratio spreads by no more than 1e-9.
    """
    core._check_same_size(f0, f1)
    x = np.log(f1.values) - np.log(f0.values)
    if np.ptp(x) <= RAY_TOL:
        return 0.0
    return math.sqrt(_centered_var(x))


@dataclass(frozen=True, eq=False)
class GeodesicPath:
    """Frames ``f_tau`` sampled at increasing ``taus`` from 0 to 1.

    ``frames`` is a 2-D array with one row per ``tau``.  Paths built by
    :meth:`logarithmic` also carry ``log_velocity`` (the constant
    ``d/dtau log f_tau`` of a uniformly parametrized log interval) so the
    finite-difference derivative can be checked against it.
    """

    taus: np.ndarray
    frames: np.ndarray
    log_velocity: np.ndarray | None = None

    def __post_init__(self):
        taus = np.array(self.taus, dtype=float)
        frames = np.array(self.frames, dtype=float)
        if taus.ndim != 1 or taus.size < 2:
            raise TooFewFrames(f"a path needs at least 2 frames, got {taus.size}")
        if frames.ndim != 2 or frames.shape[0] != taus.size:
            raise ValueError(f"frames shape {frames.shape} does not match {taus.size} taus")
        if taus[0] != 0.0 or taus[-1] != 1.0 or np.any(np.diff(taus) <= 0):
            raise ValueError("taus must increase strictly from 0 to 1")
        if not np.all(np.isfinite(frames)) or np.any(frames <= 0):
            raise InvalidGrid("path frames must be finite and strictly positive")
        taus.flags.writeable = False
        frames.flags.writeable = False
        object.__setattr__(self, "taus", taus)
        object.__setattr__(self, "frames", frames)

    @property
    def m(self) -> int:
        return self.taus.size

    @property
    def n(self) -> int:
        return self.frames.shape[1]

    def frame(self, i: int) -> SpectrumGrid:
        return SpectrumGrid(self.frames[i])

    @classmethod
    def from_frames(cls, taus, frames) -> "GeodesicPath":
        rows = [core._vals(fr) for fr in frames]
        return cls(np.asarray(taus, dtype=float), np.vstack(rows))

    @classmethod
    def from_function(cls, func, m: int) -> "GeodesicPath":
        """Evaluate ``func(tau) -> SpectrumGrid`` at ``m`` uniform taus."""
        taus = np.linspace(0.0, 1.0, m)
        return cls.from_frames(taus, [func(t) for t in taus])

    @classmethod
    def logarithmic(cls, f0: SpectrumGrid, f1: SpectrumGrid, m: int, taus=None) -> "GeodesicPath":
        """Log interval between ``f0`` and ``f1`` at ``m`` uniform taus.

        With explicit ``taus`` (any increasing grid of [0, 1]) the frames are
        ``log_interval(f0, f1, taus[i])``; the exact velocity is attached
        only for the default uniform parametrization.
        """
        uniform = taus is None
        taus = np.linspace(0.0, 1.0, m) if uniform else np.asarray(taus, dtype=float)
        frames = np.vstack([log_interval(f0, f1, t).values for t in taus])
        velocity = np.log(f1.values) - np.log(f0.values) if uniform else None
        return cls(taus, frames, velocity)

    def log_velocity_fd(self) -> np.ndarray:
        """``d/dtau log f_tau`` by second-order finite differences.

        Central differences inside, second-order one-sided stencils at the
        end frames; nonuniform ``taus`` are handled.
        """
        if self.m < 3:
            raise TooFewFrames(f"finite differences need at least 3 frames, got {self.m}")
        steps = np.diff(self.taus)
        # a scalar spacing keeps the stencil weights exactly antisymmetric
        spacing = steps[0] if np.ptp(steps) <= 1e-12 * steps[0] else self.taus
        return np.gradient(np.log(self.frames), spacing, axis=0, edge_order=2)


def _speeds(xdot: np.ndarray) -> np.ndarray:
    c = xdot - np.mean(xdot, axis=1, keepdims=True)
    return np.mean(c * c, axis=1)


def path_length(path: GeodesicPath, exact: bool = False) -> float:
    """Length of a discretized path under the symmetrized metric.

    The per-frame speed is the grid standard deviation of
    ``d/dtau log f_tau``; speeds are integrated over ``tau`` with the
    trapezoid rule.  ``exact=True`` uses the attached analytic velocity of
    a uniform log interval instead of finite differences.
    """
    if exact:
        if path.log_velocity is None:
            raise ValueError("path carries no analytic velocity")
        xdot = np.broadcast_to(path.log_velocity, path.frames.shape)
    else:
        xdot = path.log_velocity_fd()
    speed = np.sqrt(_speeds(xdot))
    return float(np.trapezoid(speed, path.taus))


def normalized_velocity(path: GeodesicPath) -> np.ndarray:
    """Per-frame ``(xdot - mean xdot) / std(xdot)``.

    Raises
    ------
    ZeroSpeed
        If some frame's velocity variance is below the 1e-12 floor.
    """
    xdot = path.log_velocity_fd()
    c = xdot - np.mean(xdot, axis=1, keepdims=True)
    var = np.mean(c * c, axis=1)
    low = np.flatnonzero(var < SPEED_FLOOR)
    if low.size:
        i = int(low[0])
        raise ZeroSpeed(i, float(var[i]))
    return c / np.sqrt(var)[:, None]


def geodesic_residual(path: GeodesicPath) -> float:
    """Largest change of the normalized velocity between any two frames.

    Zero (up to rounding) for a geodesic.
    """
    v = normalized_velocity(path)
    return float(np.max(np.max(v, axis=0) - np.min(v, axis=0)))
