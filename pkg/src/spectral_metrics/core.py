"""Spectral densities on a uniform frequency grid and their means.

A density ``f`` on ``[-pi, pi)`` is represented by its samples at
``theta_k = -pi + 2*pi*k/n``.  For smooth periodic integrands the sample
average is the trapezoid rule and converges geometrically, so every
``(1/2pi) * integral`` in this package is a plain mean over the grid.
Sums go through :func:`numpy.mean`, which uses pairwise summation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from numbers import Real
from typing import Sequence, Union

import numpy as np

from .errors import (
    DenominatorZeroOnCircle,
    InvalidGrid,
    LengthMismatch,
    MeanOverflow,
    NonpositiveSample,
)

MIN_GRID_SIZE = 16
DEFAULT_GRID_SIZE = 4096
# |den(e^{j theta})| below this on the grid is treated as a pole on the circle
DENOMINATOR_ATOL = 1e-12
# resolution of the construction-time pole check for RationalPsd
_POLE_CHECK_SIZE = 1 << 14


def theta_grid(n: int) -> np.ndarray:
    """Frequencies ``-pi + 2*pi*k/n`` for ``k = 0..n-1``."""
    return -np.pi + (2.0 * np.pi / n) * np.arange(n)


class SignedGrid:
    """Real samples on the uniform grid with no sign constraint.

    Used for logarithms of densities and for perturbation directions.
    """

    __slots__ = ("_values",)

    def __init__(self, values):
        arr = np.array(values, dtype=float)
        if arr.ndim != 1:
            raise InvalidGrid(f"grid samples must be one-dimensional, got shape {arr.shape}")
        if arr.size < MIN_GRID_SIZE:
            raise InvalidGrid(f"grid size {arr.size} is below the minimum {MIN_GRID_SIZE}")
        if not np.all(np.isfinite(arr)):
            raise InvalidGrid("grid samples must be finite")
        arr.flags.writeable = False
        self._values = arr

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def n(self) -> int:
        return self._values.size

    @property
    def theta(self) -> np.ndarray:
        return theta_grid(self.n)

    def __len__(self) -> int:
        return self._values.size

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._values
        return self._values.astype(dtype)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n}, min={self._values.min():.6g}, max={self._values.max():.6g})"


class SpectrumGrid(SignedGrid):
    """Strictly positive PSD samples on the uniform grid.

    Instances are immutable: the sample array is copied on construction
    and marked read-only.

    Parameters
    ----------
    values : array_like
        ``f(theta_k)`` for ``k = 0..n-1``, ``n >= 16``. Every sample must be
        finite and strictly positive; nothing is clamped.
    """

    __slots__ = ()

    def __init__(self, values):
        super().__init__(values)
        bad = np.flatnonzero(self._values <= 0.0)
        if bad.size:
            k = int(bad[0])
            raise InvalidGrid(
                f"sample {k} (theta={theta_grid(self.n)[k]:.6g}) is {self._values[k]!r}; "
                "spectral densities must be strictly positive"
            )

    @classmethod
    def constant(cls, c: float, n: int = DEFAULT_GRID_SIZE) -> "SpectrumGrid":
        return cls(np.full(n, float(c)))

    @classmethod
    def from_function(cls, func, n: int = DEFAULT_GRID_SIZE) -> "SpectrumGrid":
        """Sample a vectorized callable ``func(theta)`` on the grid."""
        return cls(func(theta_grid(n)))


GridLike = Union[SignedGrid, np.ndarray]


def _vals(f) -> np.ndarray:
    if isinstance(f, SignedGrid):
        return f.values
    return np.asarray(f, dtype=float)


def _check_same_size(*grids) -> int:
    sizes = {len(g) for g in grids}
    if len(sizes) != 1:
        raise LengthMismatch(f"grid sizes differ: {sorted(sizes)}")
    return sizes.pop()


@dataclass(frozen=True)
class RationalPsd:
    """``|num(z)|^2 / |den(z)|^2`` at ``z = e^{j theta}``.

    Coefficients are real and listed in ascending powers of ``z``.
    """

    num_coeffs: tuple
    den_coeffs: tuple

    def __init__(self, num_coeffs: Sequence[float], den_coeffs: Sequence[float]):
        num = tuple(float(c) for c in num_coeffs)
        den = tuple(float(c) for c in den_coeffs)
        if not num or not any(num):
            raise ValueError("numerator polynomial is identically zero")
        if not den or not any(den):
            raise ValueError("denominator polynomial is identically zero")
        if not all(math.isfinite(c) for c in num + den):
            raise ValueError("polynomial coefficients must be finite")
        object.__setattr__(self, "num_coeffs", num)
        object.__setattr__(self, "den_coeffs", den)
        dmin = float(np.min(np.abs(self._poly(self.den_coeffs, theta_grid(_POLE_CHECK_SIZE)))))
        if dmin < DENOMINATOR_ATOL:
            raise DenominatorZeroOnCircle(f"|den(e^(j theta))| reaches {dmin:.3e} on the unit circle")

    @staticmethod
    def _poly(coeffs, theta):
        return np.polynomial.polynomial.polyval(np.exp(1j * theta), np.asarray(coeffs))

    def denominator_modulus(self, theta) -> np.ndarray:
        return np.abs(self._poly(self.den_coeffs, np.asarray(theta, dtype=float)))

    def evaluate(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        num = np.abs(self._poly(self.num_coeffs, theta)) ** 2
        den = np.abs(self._poly(self.den_coeffs, theta)) ** 2
        return num / den


def sample_rational(psd: RationalPsd, n: int = DEFAULT_GRID_SIZE) -> SpectrumGrid:
    """Sample a rational PSD on the ``n``-point grid.

    Raises
    ------
    DenominatorZeroOnCircle
        If ``|den|`` drops below 1e-12 at a grid point.
    NonpositiveSample
        If the numerator vanishes at a grid point.
    """
    if n < MIN_GRID_SIZE:
        raise InvalidGrid(f"grid size {n} is below the minimum {MIN_GRID_SIZE}")
    theta = theta_grid(n)
    dmod = psd.denominator_modulus(theta)
    if np.min(dmod) < DENOMINATOR_ATOL:
        k = int(np.argmin(dmod))
        raise DenominatorZeroOnCircle(f"|den| = {dmod[k]:.3e} at theta={theta[k]!r}")
    values = psd.evaluate(theta)
    bad = np.flatnonzero(~(values > 0.0))
    if bad.size:
        k = int(bad[0])
        raise NonpositiveSample(float(theta[k]), float(values[k]))
    return SpectrumGrid(values)


# -- means -----------------------------------------------------------------


def mean(f: GridLike) -> float:
    """Uniform-grid quadrature of ``(1/2pi) * integral f``."""
    v = _vals(f)
    with np.errstate(over="raise"):
        try:
            return float(np.mean(v))
        except FloatingPointError:
            raise MeanOverflow(1.0, float(np.max(v))) from None


def geometric_mean(f: SpectrumGrid) -> float:
    """``exp(mean(log f))``, the Szego-Kolmogorov prediction error variance."""
    return math.exp(np.mean(np.log(_vals(f))))


def harmonic_mean(f: SpectrumGrid) -> float:
    """``1 / mean(1/f)``, the optimal smoothing error variance."""
    return 1.0 / float(np.mean(1.0 / _vals(f)))


@dataclass(frozen=True)
class MeanOrder:
    """Order ``r`` of a power mean, including ``0`` and ``+-inf``.

    ``r == 0`` is compared exactly, so ``MeanOrder(1e-300)`` is a genuine
    power mean rather than the geometric mean.
    """

    r: float

    def __post_init__(self):
        if math.isnan(float(self.r)):
            raise ValueError("mean order must not be NaN")
        object.__setattr__(self, "r", float(self.r))

    @classmethod
    def parse(cls, text: str) -> "MeanOrder":
        t = text.strip().lower()
        if t in ("inf", "+inf", "max"):
            return cls(math.inf)
        if t in ("-inf", "min"):
            return cls(-math.inf)
        if t in ("geo", "geometric"):
            return cls(0.0)
        return cls(float(t))

    @property
    def is_geometric(self) -> bool:
        return self.r == 0.0

    def __lt__(self, other: "MeanOrder") -> bool:
        return self.r < as_order(other).r

    def __float__(self) -> float:
        return self.r

    def __str__(self) -> str:
        return repr(self.r) if math.isfinite(self.r) else ("inf" if self.r > 0 else "-inf")


def as_order(r) -> MeanOrder:
    return r if isinstance(r, MeanOrder) else MeanOrder(r)


def generalized_mean(f: SpectrumGrid, r) -> float:
    """Power mean ``(mean f**r)**(1/r)``.

    ``r = 0`` gives the geometric mean, ``r = +-inf`` the max/min sample,
    and ``r = 1`` / ``r = -1`` are routed through :func:`mean` and
    :func:`harmonic_mean` so they agree exactly.

    Raises
    ------
    MeanOverflow
        If ``f**r`` overflows.
    """
    order = as_order(r).r
    v = _vals(f)
    if order == 0.0:
        return geometric_mean(f)
    if order == 1.0:
        return mean(f)
    if order == -1.0:
        return harmonic_mean(f)
    if order == math.inf:
        return float(np.max(v))
    if order == -math.inf:
        return float(np.min(v))
    with np.errstate(over="raise"):
        try:
            m = float(np.mean(np.power(v, order)))
        except FloatingPointError:
            raise MeanOverflow(order, float(np.max(v))) from None
    if not math.isfinite(m):
        raise MeanOverflow(order, float(np.max(v)))
    if m == 0.0:
        # f**r underflowed for every sample (r very negative, f large)
        raise MeanOverflow(order, float(np.max(v)))
    return m ** (1.0 / order)


def weighted_mean(g: GridLike, weight: GridLike) -> float:
    """Mean of ``g`` under the normalized weight density ``weight``.

    Returns ``sum(g*w) / sum(w)``; the caller supplies ``w`` itself
    (e.g. ``1/f1`` for the smoothing measure), not its reciprocal.
    """
    _check_same_size(g, weight)
    w = _vals(weight)
    return float(np.mean(_vals(g) * w) / np.mean(w))


# -- pointwise operations --------------------------------------------------


def ratio(f: SpectrumGrid, g: SpectrumGrid) -> SpectrumGrid:
    _check_same_size(f, g)
    return SpectrumGrid(_vals(f) / _vals(g))


def product(f: SpectrumGrid, g: SpectrumGrid) -> SpectrumGrid:
    _check_same_size(f, g)
    return SpectrumGrid(_vals(f) * _vals(g))


def power(f: SpectrumGrid, p: float) -> SpectrumGrid:
    return SpectrumGrid(np.power(_vals(f), float(p)))


def scale(f: SpectrumGrid, c: float) -> SpectrumGrid:
    if not c > 0:
        raise InvalidGrid(f"scale factor must be positive, got {c!r}")
    return SpectrumGrid(_vals(f) * float(c))


def log(f: SpectrumGrid) -> SignedGrid:
    return SignedGrid(np.log(_vals(f)))


def pointwise(f: SpectrumGrid, g=None, op: str = "ratio", arg: float | None = None):
    """Dispatch one of ``ratio``, ``product``, ``log``, ``power``, ``scale``.

    ``power`` and ``scale`` take their exponent/factor from ``arg`` (or from
    ``g`` when ``g`` is a plain number).
    """
    if isinstance(g, Real) and arg is None:
        g, arg = None, g
    if op == "ratio":
        return ratio(f, g)
    if op == "product":
        return product(f, g)
    if op == "log":
        return log(f)
    if op == "power":
        return power(f, arg)
    if op == "scale":
        return scale(f, arg)
    raise ValueError(f"unknown pointwise operation {op!r}")


def normalize(f: SpectrumGrid) -> SpectrumGrid:
    """Rescale ``f`` to unit mean.

    One correction pass absorbs the rounding of the first division, so the
    result's mean is 1 to about an ulp.
    """
    v = _vals(f) / mean(f)
    return SpectrumGrid(v / float(np.mean(v)))
