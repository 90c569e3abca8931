"""Prediction and smoothing filters for a stationary process with PSD ``f``.

This module is the filtering-side oracle for the distances: it builds the
actual optimal filters and evaluates the error variance they attain on a
process with a possibly different spectrum, without going through the
closed-form ratios in :mod:`spectral_metrics.distances`.

Spectral factors come from the cepstrum.  With ``c_k`` the Fourier
coefficients of ``log f``, the outer factor is
``a(z) = exp(-sum_{k>=1} c_k z^k)`` and ``f = exp(c_0) / |a|^2`` on the
unit circle.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from scipy.signal import fftconvolve

from . import core
from ._workers import worker_count
from .core import SpectrumGrid
from .errors import GridTooCoarse, InvalidGrid

RECONSTRUCTION_LIMIT = 1e-4
MAX_FILTER_LEN = 4096
MIN_SAMPLES = 10_000
# samples per independently seeded substream; fixed so results do not
# depend on the number of workers
CHUNK_SAMPLES = 1 << 17
WARMUP_FACTOR = 4


def _cepstrum(f: SpectrumGrid, m: int) -> np.ndarray:
    """First ``m`` Fourier coefficients of ``log f`` (complex in general)."""
    n = f.n
    spec = np.fft.fft(np.log(f.values))[:m] / n
    # grid starts at -pi, so coefficient k picks up a factor (-1)**k
    spec[1::2] *= -1.0
    return spec


def exp_series(s: np.ndarray) -> np.ndarray:
    """Power-series coefficients of ``exp(S(z))`` where ``S = sum_{k>=1} s_k z^k``.

    ``s[0]`` is ignored.  Uses ``k b_k = sum_{j=1..k} j s_j b_{k-j}``.
    """
    m = len(s)
    b = np.zeros(m, dtype=np.result_type(s, float))
    b[0] = 1.0
    js = np.arange(m) * s
    for k in range(1, m):
        b[k] = np.dot(js[1 : k + 1], b[k - 1 :: -1]) / k
    return b


def _maybe_real(c: np.ndarray) -> np.ndarray:
    if np.max(np.abs(c.imag)) <= 1e-12 * max(1.0, float(np.max(np.abs(c.real)))):
        return np.ascontiguousarray(c.real)
    return c


def evaluate_polynomial_on_grid(coeffs: np.ndarray, n: int) -> np.ndarray:
    """``sum_k coeffs[k] * exp(j k theta)`` at the ``n`` grid frequencies."""
    m = len(coeffs)
    if m > n:
        raise ValueError(f"{m} coefficients do not fit an {n}-point grid")
    padded = np.zeros(n, dtype=complex)
    padded[:m] = coeffs
    padded[1::2] *= -1.0
    return np.fft.ifft(padded) * n


@dataclass(frozen=True, eq=False)
class OuterFactorization:
    """``f ~ g / |a(e^{j theta})|^2`` with ``a`` truncated to ``len(a_coeffs)`` terms.

    ``residual`` is the sup-norm relative reconstruction error on the
    source grid of size ``n``.
    """

    g: float
    a_coeffs: np.ndarray
    n: int
    residual: float

    @property
    def m(self) -> int:
        return len(self.a_coeffs)

    def frequency_response(self, n: int | None = None) -> np.ndarray:
        return evaluate_polynomial_on_grid(self.a_coeffs, n or self.n)

    def reconstruct(self, n: int | None = None) -> SpectrumGrid:
        return SpectrumGrid(self.g / np.abs(self.frequency_response(n)) ** 2)


def factorize(f: SpectrumGrid, m: int | None = None, check: bool = True) -> OuterFactorization:
    """Cepstral outer factorization of ``f`` with ``m`` coefficients.

    Parameters
    ----------
    f : SpectrumGrid
    m : int, optional
        Number of outer-function coefficients ``a_0 = 1, a_1, ..., a_{m-1}``.
        Defaults to ``n // 4``; must not exceed ``n // 2``.
    check : bool
        Raise :class:`GridTooCoarse` when the truncated factor reconstructs
        ``f`` with sup-norm relative error above 1e-4.
    """
    n = f.n
    m = n // 4 if m is None else int(m)
    if not 1 <= m <= n // 2:
        raise ValueError(f"coefficient count must be in [1, {n // 2}], got {m}")
    c = _cepstrum(f, m)
    g = math.exp(c[0].real)
    a = _maybe_real(exp_series(-c))
    a[0] = 1.0
    recon = g / np.abs(evaluate_polynomial_on_grid(a, n)) ** 2
    residual = float(np.max(np.abs(recon / f.values - 1.0)))
    if check and residual > RECONSTRUCTION_LIMIT:
        raise GridTooCoarse(residual, m, n)
    a.flags.writeable = False
    return OuterFactorization(g, a, n, residual)


def synthesis_filter(f: SpectrumGrid, m: int, check: bool = True) -> tuple[float, np.ndarray]:
    """Gain and truncated impulse response of ``1/a_f``.

    White noise of unit variance filtered by ``sqrt(gain) * h`` has
    spectrum ``gain * |h|^2``, which approximates ``f``.
    """
    n = f.n
    if not 1 <= m <= n // 2:
        raise ValueError(f"filter length must be in [1, {n // 2}], got {m}")
    c = _cepstrum(f, m)
    g = math.exp(c[0].real)
    h = _maybe_real(exp_series(c))
    h[0] = 1.0
    if check:
        recon = g * np.abs(evaluate_polynomial_on_grid(h, n)) ** 2
        residual = float(np.max(np.abs(recon / f.values - 1.0)))
        if residual > RECONSTRUCTION_LIMIT:
            raise GridTooCoarse(residual, m, n)
    return g, h


def prediction_variance(f: SpectrumGrid) -> float:
    """Optimal one-step prediction error variance (the geometric mean)."""
    return core.geometric_mean(f)


def smoothing_variance(f: SpectrumGrid) -> float:
    """Optimal past-and-future smoothing error variance (the harmonic mean)."""
    return core.harmonic_mean(f)


def mismatched_prediction_variance(
    f_true: SpectrumGrid,
    f_model: SpectrumGrid,
    m: int | None = None,
    closed_form: bool = False,
) -> float:
    """Error variance of the ``f_model``-optimal predictor on an ``f_true`` process.

    By default the predictor is the length-``m`` truncation of the outer
    factor of ``f_model`` and the variance is ``mean(|a(e^{j theta})|^2 f_true)``.
    A truncated predictor is still a valid (slightly suboptimal) predictor,
    so no reconstruction check is applied to it.  ``closed_form=True``
    returns the infinite-length limit ``mean(f_true/f_model) * g_model``.
    """
    core._check_same_size(f_true, f_model)
    if closed_form:
        return core.mean(f_true.values / f_model.values) * core.geometric_mean(f_model)
    fac = factorize(f_model, m, check=False)
    response = np.abs(fac.frequency_response()) ** 2
    return core.mean(response * f_true.values)


@dataclass(frozen=True, eq=False)
class SmoothingFilter:
    """Optimal two-sided smoother: error image ``b = h / f`` with ``mean(b) = 1``."""

    h: float
    b_values: SpectrumGrid


def smoothing_filter(f: SpectrumGrid) -> SmoothingFilter:
    h = core.harmonic_mean(f)
    b = SpectrumGrid(h / f.values)
    mb = core.mean(b)
    if abs(mb - 1.0) > 1e-10:
        raise ArithmeticError(f"smoothing filter has zero-lag coefficient {mb!r}, expected 1")
    return SmoothingFilter(h, b)


def mismatched_smoothing_variance(f_true: SpectrumGrid, f_model: SpectrumGrid) -> float:
    """Error variance of the ``f_model``-optimal smoother on an ``f_true`` process."""
    core._check_same_size(f_true, f_model)
    b = smoothing_filter(f_model).b_values.values
    return core.mean(b * b * f_true.values)


# -- Monte Carlo -----------------------------------------------------------


@dataclass(frozen=True)
class SimulationReport:
    empirical_variance: float
    analytic_variance: float
    standard_error: float
    samples: int
    filter_len: int
    seed: int

    @property
    def z_score(self) -> float:
        return (self.empirical_variance - self.analytic_variance) / self.standard_error

    def passed(self, n_se: float = 4.0) -> bool:
        return abs(self.z_score) <= n_se

    def to_dict(self) -> dict:
        return asdict(self)


def _chunk_moments(seed_seq, count, gain_filter, predictor, warmup):
    rng = np.random.default_rng(seed_seq)
    lh, la = len(gain_filter), len(predictor)
    noise = rng.standard_normal(count + warmup + (lh - 1) + (la - 1))
    u = fftconvolve(noise, gain_filter, mode="valid")
    # u_t - sum_{k>0} (-a_k) u_{t-k} is the convolution of u with a
    err = fftconvolve(u, predictor, mode="valid")[warmup:]
    mu = float(np.mean(err))
    d = err - mu
    return err.size, mu, float(np.dot(d, d))


def simulate_prediction(
    f_true: SpectrumGrid,
    f_model: SpectrumGrid,
    filter_len: int,
    samples: int,
    seed: int,
    workers: int | None = None,
) -> SimulationReport:
    """Monte Carlo estimate of the mismatched prediction error variance.

    A realization with spectrum ``f_true`` is synthesized by passing
    unit-variance Gaussian white noise through the truncated filter
    ``sqrt(g) / a_true``; the ``f_model`` predictor of the same length is
    applied and the sample variance of the prediction error is compared with
    the analytic ``mean(|a_model|^2 f_true)``.

    The sample budget is split into fixed-size substreams seeded from
    ``seed``; partial moments are merged in substream order, so the report
    does not depend on ``workers``.
    """
    if not 1 <= filter_len <= MAX_FILTER_LEN:
        raise ValueError(f"filter_len must be in [1, {MAX_FILTER_LEN}], got {filter_len}")
    if samples < MIN_SAMPLES:
        raise ValueError(f"samples must be at least {MIN_SAMPLES}, got {samples}")
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    core._check_same_size(f_true, f_model)

    g, h = synthesis_filter(f_true, filter_len)
    a = factorize(f_model, filter_len, check=False).a_coeffs
    if np.iscomplexobj(h) or np.iscomplexobj(a):
        raise InvalidGrid("simulation needs real filters; spectra must be even in theta")
    gain_filter = math.sqrt(g) * h
    analytic = core.mean(np.abs(evaluate_polynomial_on_grid(a, f_true.n)) ** 2 * f_true.values)

    counts = [CHUNK_SAMPLES] * (samples // CHUNK_SAMPLES)
    if samples % CHUNK_SAMPLES:
        counts.append(samples % CHUNK_SAMPLES)
    seeds = np.random.SeedSequence(seed).spawn(len(counts))
    warmup = WARMUP_FACTOR * filter_len
    jobs = [(s, c, gain_filter, a, warmup) for s, c in zip(seeds, counts)]
    nworkers = min(worker_count(workers), len(jobs))
    if nworkers > 1:
        with ThreadPoolExecutor(nworkers) as pool:
            parts = list(pool.map(lambda job: _chunk_moments(*job), jobs))
    else:
        parts = [_chunk_moments(*job) for job in jobs]

    # Chan et al. pairwise merge, in substream order
    total, mu, m2 = 0, 0.0, 0.0
    for cnt, cmu, cm2 in parts:
        delta = cmu - mu
        new_total = total + cnt
        m2 += cm2 + delta * delta * total * cnt / new_total
        mu += delta * cnt / new_total
        total = new_total
    var = m2 / (total - 1)
    se = var * math.sqrt(2.0 / (total - 1))
    return SimulationReport(var, analytic, se, samples, filter_len, int(seed))
