"""Moment-constrained approximation of a prior spectrum.

Given autocorrelations ``R_0..R_n`` and a prior density ``p``, find the
density matching them that is closest to ``p`` in ``delta_ag``.
Stationarity of the Lagrangian forces

    f = kappa * p / (1 - kappa * p * L),   L = sum_{k=-n}^{n} lambda_k e^{jk theta}

with ``kappa = mean(f / p)``.  The ``n + 2`` unknowns (``lambda_0..lambda_n``
with ``lambda_{-k} = lambda_k``, and ``kappa``) are found by damped Newton
iteration.  With a flat prior the answer is the all-pole maximum-entropy
spectrum, available in closed form from the Levinson-Durbin recursion.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import core, distances
from .core import SpectrumGrid, theta_grid
from .errors import (
    InfeasibleStart,
    NotConverged,
    NotPositiveDefinite,
    NumericallySingular,
    TooManyMoments,
)

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 200
CONTINUATION_STEPS = 8
DENOMINATOR_FLOOR = 1e-10
MAX_HALVINGS = 40
KAPPA_RTOL = 1e-8
# smallest continuation step before giving up
_MIN_DS = 1.0 / 1024


@dataclass(frozen=True, eq=False)
class MomentVector:
    """Autocorrelations ``R_0..R_n`` with a positive definite Toeplitz matrix."""

    r: np.ndarray

    def __post_init__(self):
        r = np.array(self.r, dtype=float)
        if r.ndim != 1 or r.size < 1:
            raise ValueError("moment vector must be a nonempty 1-D array")
        if not np.all(np.isfinite(r)):
            raise ValueError("moments must be finite")
        try:
            np.linalg.cholesky(toeplitz(r))
        except np.linalg.LinAlgError:
            raise NotPositiveDefinite(f"Toeplitz matrix of {r.tolist()} is not positive definite") from None
        r.flags.writeable = False
        object.__setattr__(self, "r", r)

    @property
    def order(self) -> int:
        return self.r.size - 1

    def __len__(self) -> int:
        return self.r.size


def toeplitz(r: np.ndarray) -> np.ndarray:
    idx = np.arange(len(r))
    return np.asarray(r)[np.abs(idx[:, None] - idx[None, :])]


def _cos_basis(order: int, n: int) -> np.ndarray:
    return np.cos(np.outer(np.arange(order + 1), theta_grid(n)))


def compute_moments(f: SpectrumGrid, n_moments: int) -> MomentVector:
    """``R_k = mean(f * cos(k theta))`` for ``k = 0..n_moments``."""
    if n_moments < 0:
        raise ValueError("n_moments must be nonnegative")
    if 4 * (n_moments + 1) > f.n:
        raise TooManyMoments(f"{n_moments + 1} moments need a grid of at least {4 * (n_moments + 1)} points, got {f.n}")
    return MomentVector(_cos_basis(n_moments, f.n) @ f.values / f.n)


def levinson_durbin(r) -> tuple[np.ndarray, float, np.ndarray]:
    """Solve the Yule-Walker equations for ``R_0..R_n``.

    Returns ``(a, g, k)``: monic predictor polynomial ``a`` (ascending powers),
    final prediction error variance ``g`` and reflection coefficients ``k``.

    Raises
    ------
    NumericallySingular
        If a reflection coefficient reaches magnitude ``1 - 1e-12``.
    """
    r = np.asarray(r, dtype=float)
    a = np.array([1.0])
    err = r[0]
    ks = np.zeros(len(r) - 1)
    for i in range(1, len(r)):
        acc = r[i] + np.dot(a[1:], r[i - 1 : 0 : -1])
        k = -acc / err
        if abs(k) >= 1.0 - 1e-12:
            raise NumericallySingular(f"reflection coefficient {i} has magnitude {abs(k)!r}")
        ks[i - 1] = k
        a = np.append(a, 0.0)
        a = a + k * a[::-1]
        err *= 1.0 - k * k
    return a, float(err), ks


def max_entropy_reference(moments: MomentVector, n: int = core.DEFAULT_GRID_SIZE) -> SpectrumGrid:
    """All-pole density ``g / |a(e^{j theta})|^2`` matching ``moments``."""
    a, g, _ = levinson_durbin(moments.r)
    z = np.exp(1j * theta_grid(n))
    return SpectrumGrid(g / np.abs(np.polynomial.polynomial.polyval(z, a)) ** 2)


@dataclass(frozen=True, eq=False)
class MomentSolution:
    """Stationary point of the moment-constrained ``delta_ag`` problem."""

    lambdas: np.ndarray
    kappa: float
    density: SpectrumGrid
    residual: float
    iterations: int
    kappa_error: float = field(default=0.0)

    def distance_to(self, prior: SpectrumGrid) -> float:
        return float(distances.delta_ag(self.density, prior))


class _Problem:
    """Residual map and Jacobian for a fixed prior on a fixed grid."""

    def __init__(self, moments: MomentVector, prior: np.ndarray):
        self.R = moments.r
        self.order = moments.order
        self.p = prior
        self.N = prior.size
        self.C = _cos_basis(self.order, self.N)
        self.B = self.C.copy()
        self.B[1:] *= 2.0
        self.scale = float(self.R[0])

    def denominator(self, x):
        lam, kappa = x[:-1], x[-1]
        return 1.0 - kappa * self.p * (lam @ self.B)

    def density(self, x, D=None):
        D = self.denominator(x) if D is None else D
        return x[-1] * self.p / D

    def residual(self, x, f):
        F = np.empty(self.order + 2)
        F[:-1] = self.C @ f / self.N - self.R
        F[-1] = 1.0 - np.mean(f / self.p) / x[-1]
        return F

    def merit(self, F) -> float:
        return float(np.max(np.abs(np.append(F[:-1] / self.scale, F[-1]))))

    def jacobian(self, x, f):
        kappa = x[-1]
        f2 = f * f
        J = np.empty((self.order + 2, self.order + 2))
        # d f / d lambda_j = f^2 B_j ;  d f / d kappa = f^2 / (kappa^2 p)
        df_dk = f2 / (kappa * kappa * self.p)
        J[:-1, :-1] = (self.C * f2) @ self.B.T / self.N
        J[:-1, -1] = self.C @ df_dk / self.N
        J[-1, :-1] = -(self.B @ (f2 / self.p)) / (self.N * kappa)
        J[-1, -1] = -np.mean(df_dk / self.p) / kappa + np.mean(f / self.p) / (kappa * kappa)
        return J

    def converged(self, F, tol) -> bool:
        return float(np.max(np.abs(F[:-1]))) <= tol and abs(F[-1]) <= KAPPA_RTOL * 1e-2

    def newton(self, x, tol, max_iter):
        """Damped Newton from ``x``; returns ``(x, f, F, iterations)``."""
        D = self.denominator(x)
        if np.min(D) < DENOMINATOR_FLOOR:
            raise InfeasibleStart(f"denominator reaches {np.min(D):.3e} at the starting point")
        f = self.density(x, D)
        F = self.residual(x, f)
        merit = self.merit(F)
        for it in range(max_iter):
            if self.converged(F, tol):
                return x, f, F, it
            J = self.jacobian(x, f)
            try:
                dx = np.linalg.solve(J, -F)
            except np.linalg.LinAlgError:
                raise NotConverged(it, float(np.max(np.abs(F[:-1]))), "singular Jacobian") from None
            t = 1.0
            for _ in range(MAX_HALVINGS):
                xt = x + t * dx
                Dt = self.denominator(xt)
                if xt[-1] > 0 and np.min(Dt) >= DENOMINATOR_FLOOR:
                    ft = self.density(xt, Dt)
                    Ft = self.residual(xt, ft)
                    mt = self.merit(Ft)
                    if mt < merit:
                        break
                t *= 0.5
            else:
                raise NotConverged(it, float(np.max(np.abs(F[:-1]))), "line search failed")
            x, f, F, merit = xt, ft, Ft, mt
        if self.converged(F, tol):
            return x, f, F, max_iter
        raise NotConverged(max_iter, float(np.max(np.abs(F[:-1]))))


def _max_entropy_start(moments: MomentVector) -> np.ndarray:
    """Flat-prior parameters reproducing the maximum-entropy spectrum."""
    a, g, _ = levinson_durbin(moments.r)
    # 1/f = |a|^2 / g = rho_0 + 2 sum rho_k cos(k theta) = 1/kappa - L
    rho = np.correlate(a, a, mode="full")[len(a) - 1 :] / g
    kappa = float(moments.r[0])
    lam = -rho
    lam[0] = 1.0 / kappa - rho[0]
    return np.append(lam, kappa)


def solve_ag_closest(
    moments: MomentVector,
    f_prior: SpectrumGrid,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    steps: int = CONTINUATION_STEPS,
) -> MomentSolution:
    """Density matching ``moments`` that is stationary for ``delta_ag(., f_prior)``.

    A constant prior is solved in closed form by Levinson-Durbin and then
    polished.  Otherwise the target moments are reached by continuation
    from those of the prior rescaled to ``R_0``, where ``lambda = 0`` solves
    the system exactly: ``R(s) = (1-s) R_prior + s R`` for ``s = 0 -> 1``,
    with damped Newton at each step warm-started from the last.  Every
    ``R(s)`` is the moment sequence of a positive mixture, hence valid.

    Parameters
    ----------
    moments : MomentVector
    f_prior : SpectrumGrid
        Prior density; the solution is sampled on the same grid.
    tol : float
        Maximum absolute moment mismatch accepted.
    max_iter : int
        Newton iteration budget, shared across continuation steps.
    steps : int
        Initial number of continuation steps; a step that fails is retried
        with half the increment.

    Raises
    ------
    NotConverged
        If Newton stalls, the budget runs out, or continuation cannot
        proceed (for some moment/prior pairs no minimizer with a positive
        denominator exists).
    """
    if tol < 1e-12:
        raise ValueError(f"tol must be at least 1e-12, got {tol!r}")
    if 4 * len(moments) > f_prior.n:
        raise TooManyMoments(f"{len(moments)} moments need a grid of at least {4 * len(moments)} points")

    prior = f_prior.values
    target = moments.r
    if np.all(prior == prior[0]):
        x = _max_entropy_start(moments)
        # constant prior c: the multipliers of c = 1 with kappa = R_0 / c
        x[-1] /= prior[0]
        try:
            x, f, F, used = _Problem(moments, prior).newton(x, tol, max_iter)
        except InfeasibleStart as exc:
            raise NotConverged(0, math.inf, str(exc)) from None
    else:
        c = float(target[0]) / core.mean(prior)
        start = _cos_basis(moments.order, prior.size) @ (c * prior) / prior.size
        x = np.append(np.zeros(len(target)), c)
        f, F = c * prior, np.append(start - target, 0.0)
        used, s, ds = 0, 0.0, 1.0 / max(int(steps), 1)
        while s < 1.0:
            s_next = min(1.0, s + ds)
            step_moments = MomentVector((1.0 - s_next) * start + s_next * target)
            try:
                x_new, f_new, F_new, it = _Problem(step_moments, prior).newton(x, tol, max_iter - used)
            except (NotConverged, InfeasibleStart) as exc:
                used += getattr(exc, "iterations", 0)
                if ds <= _MIN_DS or used >= max_iter:
                    raise NotConverged(
                        used, float(np.max(np.abs(F[:-1]))), f"continuation stalled at s={s:.4g}"
                    ) from None
                ds *= 0.5
                log.debug("halving continuation step to %g at s=%g", ds, s)
                continue
            used += it
            x, f, F, s = x_new, f_new, F_new, s_next

    density = SpectrumGrid(f)
    residual = float(np.max(np.abs(density.values @ _cos_basis(moments.order, prior.size).T / prior.size - target)))
    kappa = float(x[-1])
    kappa_error = abs(kappa - float(np.mean(f / prior))) / kappa
    if residual > tol or kappa_error > KAPPA_RTOL:
        raise NotConverged(used, residual, f"kappa inconsistency {kappa_error:.3e}")
    return MomentSolution(x[:-1].copy(), kappa, density, residual, used, kappa_error)


def moment_neutral_projection(p: np.ndarray, order: int) -> np.ndarray:
    """Remove from ``p`` its projection on ``1, cos(theta), ..., cos(order*theta)``.

    The result perturbs none of the moments ``R_0..R_order``.
    """
    p = np.asarray(p, dtype=float)
    C = _cos_basis(order, p.size)
    coef, *_ = np.linalg.lstsq(C.T, p, rcond=None)
    return p - C.T @ coef
