"""Exception hierarchy.

Every error raised on purpose by this package derives from
:class:`SpectralError`, so callers (and the CLI) can separate numerical
failures from programming errors.
"""


class SpectralError(Exception):
    """Base class for all package errors."""


class InvalidGrid(SpectralError, ValueError):
    """A sample array violates the positive-grid invariants."""


class LengthMismatch(SpectralError, ValueError):
    """Two grids that must share a size do not."""


class DenominatorZeroOnCircle(SpectralError, ValueError):
    """The denominator of a rational PSD vanishes on the unit circle."""


class NonpositiveSample(SpectralError, ValueError):
    """A rational PSD evaluates to zero at a grid point."""

    def __init__(self, theta, value):
        super().__init__(f"nonpositive sample {value!r} at theta={theta!r}")
        self.theta = theta
        self.value = value


class MeanOverflow(SpectralError, OverflowError):
    """``f**r`` (or a plain mean) overflowed in double precision."""

    def __init__(self, r, max_sample):
        super().__init__(f"overflow in generalized mean of order r={r!r} (max sample {max_sample!r})")
        self.r = r
        self.max_sample = max_sample


class BadOrder(SpectralError, ValueError):
    """Mean orders passed to ``delta_rs`` are not strictly increasing."""


class PerturbationTooLarge(SpectralError, ValueError):
    pass


class UnnormalizedDensity(SpectralError, ValueError):
    pass


class ZeroSpeed(SpectralError, ArithmeticError):
    """A path frame has vanishing speed, so the normalized velocity is undefined."""

    def __init__(self, frame, variance):
        super().__init__(f"zero speed at frame {frame} (variance {variance:.3e} below floor)")
        self.frame = frame
        self.variance = variance


class TooFewFrames(SpectralError, ValueError):
    pass


class GridTooCoarse(SpectralError, ArithmeticError):
    """Truncated spectral factor fails to reconstruct the source grid."""

    def __init__(self, residual, m, n):
        super().__init__(
            f"factorization residual {residual:.3e} exceeds 1e-4 with m={m}, n={n}; "
            "increase the coefficient count or the grid size"
        )
        self.residual = residual
        self.m = m
        self.n = n


class TooManyMoments(SpectralError, ValueError):
    pass


class NotPositiveDefinite(SpectralError, ValueError):
    """Toeplitz matrix of a moment sequence is not positive definite."""


class NumericallySingular(SpectralError, ArithmeticError):
    pass


class InfeasibleStart(SpectralError, ArithmeticError):
    pass


class NotConverged(SpectralError, ArithmeticError):
    def __init__(self, iterations, residual, detail=""):
        msg = f"solver did not converge after {iterations} iterations (residual {residual:.3e})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.iterations = iterations
        self.residual = residual


class SpecParseError(SpectralError, ValueError):
    """A spectrum specification document is malformed.

    ``field`` names the offending key path, e.g. ``"Rational.den"``.
    """

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
