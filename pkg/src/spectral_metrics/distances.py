"""Distances between the shapes of two power spectral densities.

All measures are functions of the ratio ``Lambda = f1/f2`` and vanish
exactly when ``Lambda`` is constant, so they compare rays ``{c*f : c > 0}``
rather than densities.

``delta_ag``
    log of arithmetic over geometric mean of ``Lambda``; the log of the
    factor by which a one-step predictor designed for ``f2`` underperforms
    on a process with spectrum ``f1``.
``delta_sym``
    ``delta_ag`` symmetrized; log of arithmetic over harmonic mean.
``delta_kl``
    Kullback-Leibler divergence between the unit-mean normalizations.
``delta_smooth``
    log degradation of the optimal two-sided smoother designed for ``f2``.
``delta_rs``
    log ratio of two power means of ``Lambda``.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from . import core
from .core import SpectrumGrid, as_order
from .errors import BadOrder, MeanOverflow, NumericallySingular

# distances closer than this to zero are reported as exactly zero
ZERO_TOL = 1e-12
_SMOOTH_CROSSCHECK_RTOL = 1e-12


class Measure(enum.Enum):
    AG = "ag"
    SYM = "sym"
    KL = "kl"
    SMOOTH = "smooth"
    RS = "rs"


class DistanceValue(float):
    """A nonnegative distance that remembers which measure produced it.

    Behaves as a plain ``float``; ``math.inf`` marks an overflowed mean.
    """

    kind: Measure
    orders: tuple | None

    def __new__(cls, value: float, kind: Measure, orders=None):
        obj = super().__new__(cls, value)
        obj.kind = kind
        obj.orders = orders
        return obj

    @property
    def value(self) -> float:
        return float(self)

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self)

    def __repr__(self) -> str:
        label = self.kind.value
        if self.orders is not None:
            label += f"({self.orders[0]},{self.orders[1]})"
        return f"DistanceValue({float(self)!r}, {label})"


def _finish(value: float, kind: Measure, orders=None) -> DistanceValue:
    if math.isnan(value):
        raise NumericallySingular(f"{kind.value} distance evaluated to NaN")
    if abs(value) <= ZERO_TOL:
        value = 0.0
    elif value < 0.0:
        raise NumericallySingular(f"{kind.value} distance is negative ({value:.3e}) beyond rounding")
    return DistanceValue(value, kind, orders)


def _lam(f1: SpectrumGrid, f2: SpectrumGrid) -> np.ndarray:
    core._check_same_size(f1, f2)
    return core._vals(f1) / core._vals(f2)


def _log_mean(x: np.ndarray) -> float:
    with np.errstate(over="raise"):
        try:
            m = float(np.mean(x))
        except FloatingPointError:
            raise MeanOverflow(1.0, float(np.max(x))) from None
    if math.isinf(m):
        raise MeanOverflow(1.0, float(np.max(x)))
    return math.log(m)


def _ag_raw(f1, f2) -> float:
    lam = _lam(f1, f2)
    try:
        return _log_mean(lam) - float(np.mean(np.log(lam)))
    except MeanOverflow:
        return math.inf


def _sym_raw(f1, f2) -> float:
    lam = _lam(f1, f2)
    try:
        return _log_mean(lam) + _log_mean(1.0 / lam)
    except MeanOverflow:
        return math.inf


def _kl_raw(f1, f2) -> float:
    core._check_same_size(f1, f2)
    try:
        g1 = core.normalize(f1).values
        g2 = core.normalize(f2).values
    except MeanOverflow:
        return math.inf
    return float(np.mean(g1 * np.log(g1 / g2)))


def delta_ag(f1: SpectrumGrid, f2: SpectrumGrid) -> DistanceValue:
    """``log mean(f1/f2) - mean(log(f1/f2))``."""
    return _finish(_ag_raw(f1, f2), Measure.AG)


def rho_ag(f1: SpectrumGrid, f2: SpectrumGrid) -> float:
    """Mismatched-to-optimal prediction variance ratio, ``exp(delta_ag)``."""
    return math.exp(delta_ag(f1, f2))


def delta_sym(f1: SpectrumGrid, f2: SpectrumGrid) -> DistanceValue:
    """``log(mean(f1/f2) * mean(f2/f1))``.

    The log-mean terms of ``delta_ag(f1,f2) + delta_ag(f2,f1)`` cancel, so
    this is computed directly from the two arithmetic means.
    """
    return _finish(_sym_raw(f1, f2), Measure.SYM)


def delta_kl(f1: SpectrumGrid, f2: SpectrumGrid) -> DistanceValue:
    """KL divergence ``mean(g1 * log(g1/g2))`` with ``g = f / mean(f)``."""
    return _finish(_kl_raw(f1, f2), Measure.KL)


def rho_smooth(f1: SpectrumGrid, f2: SpectrumGrid) -> float:
    """Mismatched-to-optimal smoothing variance ratio.

    ``mean(f1/f2**2) * mean(1/f1) / mean(1/f2)**2``, cross-checked against
    the same quantity written as mean-square over squared mean of ``f1/f2``
    under the weight ``1/f1``.
    """
    core._check_same_size(f1, f2)
    a = core._vals(f1)
    b = core._vals(f2)
    inv_a = 1.0 / a
    inv_b = 1.0 / b
    with np.errstate(over="raise"):
        try:
            direct = float(np.mean(a * inv_b * inv_b)) * float(np.mean(inv_a)) / float(np.mean(inv_b)) ** 2
            lam = a * inv_b
            ms = core.weighted_mean(lam * lam, inv_a)
            am = core.weighted_mean(lam, inv_a)
            weighted = ms / (am * am)
        except FloatingPointError:
            return math.inf
    if not math.isfinite(direct):
        return math.inf
    if abs(direct - weighted) > _SMOOTH_CROSSCHECK_RTOL * direct:
        raise NumericallySingular(
            f"smoothing ratio forms disagree: {direct!r} vs {weighted!r}"
        )
    return direct


def delta_smooth(f1: SpectrumGrid, f2: SpectrumGrid) -> DistanceValue:
    """``log(rho_smooth(f1, f2))``."""
    return _finish(math.log(rho_smooth(f1, f2)), Measure.SMOOTH)


def delta_rs(f1: SpectrumGrid, f2: SpectrumGrid, r, s) -> DistanceValue:
    """``log M_s(f1/f2) - log M_r(f1/f2)`` for power-mean orders ``r < s``.

    ``(r, s) = (0, 1)`` reproduces :func:`delta_ag` and ``(-1, 1)``
    reproduces :func:`delta_sym`.
    """
    r, s = as_order(r), as_order(s)
    if not r.r < s.r:
        raise BadOrder(f"need r < s, got r={r}, s={s}")
    lam = core.SpectrumGrid(_lam(f1, f2))
    try:
        value = math.log(core.generalized_mean(lam, s)) - math.log(core.generalized_mean(lam, r))
    except MeanOverflow:
        value = math.inf
    return _finish(value, Measure.RS, (r.r, s.r))


_BY_NAME = {
    "ag": delta_ag,
    "sym": delta_sym,
    "kl": delta_kl,
    "smooth": delta_smooth,
}


def distance(name: str, f1: SpectrumGrid, f2: SpectrumGrid, r=None, s=None) -> DistanceValue:
    """Look a measure up by name (``ag``, ``sym``, ``kl``, ``smooth``, ``rs``)."""
    if name == "rs":
        return delta_rs(f1, f2, r, s)
    try:
        return _BY_NAME[name](f1, f2)
    except KeyError:
        raise ValueError(f"unknown measure {name!r}") from None
