"""
Spectral estimators for ensembles of nonstationary signals.

Covers the ensemble periodogram, the time-averaged autocorrelation and its
Fourier transform, the maximum-absolute autocorrelation used to check
summability, closed forms for filtered nonstationary white noise, and the
two-dimensional generalized PSD.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .model import (
    AsymmetricLag,
    BiSpectrum,
    Ensemble,
    LagFunction,
    LtiFilter,
    NswkError,
    Spectrum,
    VarianceProfile,
    WindowTooLong,
    dft_grid,
    is_dft_grid,
    frequency_response,
)

logger = logging.getLogger(__name__)

__all__ = [
    "estimate_psd",
    "estimate_autocorrelation",
    "averaged_autocorrelation",
    "ensemble_averaged_autocorrelation",
    "ft_of_lag",
    "max_abs_autocorrelation",
    "AssumptionReport",
    "check_assumptions",
    "theoretical_avg_acf",
    "theoretical_psd_ns1",
    "estimate_generalized_psd",
    "noise_generalized_psd",
    "WkConvergence",
    "verify_wk_convergence",
]

ROW_BLOCK = 256
# direct sums are evaluated in slabs of this many frequencies
_DIRECT_CHUNK = 256


def _tree_sum(parts: list[np.ndarray]) -> np.ndarray:
    while len(parts) > 1:
        nxt = [parts[i] + parts[i + 1] for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


def estimate_psd(ensemble: Ensemble, N: int | None = None, threads: int = 1) -> Spectrum:
    """Ensemble-averaged periodogram of the first ``N`` samples.

    Returns ``mean_p |DFT_N(x_p[:N])|^2 / N`` on ``dft_grid(N)``.
    """
    K = ensemble.K
    N = K if N is None else int(N)
    if N < 1:
        raise NswkError(f"window length must be >= 1, got {N}")
    if N > K:
        raise WindowTooLong(f"window {N} exceeds signal length {K}")
    x = ensemble.data[:, :N]

    def block_sum(start: int) -> np.ndarray:
        X = np.fft.fft(x[start : start + ROW_BLOCK], axis=1)
        return np.sum(X.real**2 + X.imag**2, axis=0)

    starts = range(0, ensemble.P, ROW_BLOCK)
    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(block_sum, starts))
    else:
        parts = [block_sum(s) for s in starts]
    psd = _tree_sum(parts) / (ensemble.P * N)
    return Spectrum(dft_grid(N), np.fft.fftshift(psd))


def estimate_autocorrelation(ensemble: Ensemble, N: int | None = None) -> np.ndarray:
    """Sample autocorrelation matrix ``R[k1, k2] = mean_p x_p[k1] x_p[k2]``.

    Accumulates one outer product per realization in row order, so the
    result is symmetric and independent of BLAS threading.
    """
    N = ensemble.K if N is None else int(N)
    if N > ensemble.K:
        raise WindowTooLong(f"window {N} exceeds signal length {ensemble.K}")
    if ensemble.P == 1:
        logger.warning("autocorrelation from a single realization is not an ensemble estimate")
    x = ensemble.data[:, :N]
    R = np.zeros((N, N))
    tmp = np.empty((N, N))
    for row in x:
        np.multiply.outer(row, row, out=tmp)
        R += tmp
    R /= ensemble.P
    return R


def _as_square(R) -> np.ndarray:
    R = np.asarray(R, dtype=float)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise NswkError(f"expected a square matrix, got shape {R.shape}")
    return R


def averaged_autocorrelation(R, normalization: str = "unbiased") -> LagFunction:
    """Average of ``R(t, t - tau)`` over t for every lag tau.

    ``unbiased`` divides each lag by the number of terms ``K - |tau|``;
    ``biased`` divides by K, which makes its transform equal the K-point
    ensemble periodogram exactly.
    """
    R = _as_square(R)
    K = R.shape[0]
    if normalization not in ("unbiased", "biased"):
        raise NswkError(f"unknown normalization {normalization!r}")
    lags = np.arange(-(K - 1), K)
    vals = np.empty(lags.size)
    for i, tau in enumerate(lags):
        s = np.trace(R, offset=-int(tau))
        vals[i] = s / (K - abs(tau) if normalization == "unbiased" else K)
    return LagFunction(lags, vals)


def ensemble_averaged_autocorrelation(
    ensemble: Ensemble, N: int | None = None, normalization: str = "unbiased"
) -> LagFunction:
    """Averaged autocorrelation straight from the data, without forming R.

    Sums each realization's lag products with a zero-padded FFT, which costs
    O(P N log N) instead of O(P N^2). Agrees with
    ``averaged_autocorrelation(estimate_autocorrelation(ensemble, N))`` up to
    rounding.
    """
    N = ensemble.K if N is None else int(N)
    if N > ensemble.K:
        raise WindowTooLong(f"window {N} exceeds signal length {ensemble.K}")
    if normalization not in ("unbiased", "biased"):
        raise NswkError(f"unknown normalization {normalization!r}")
    nfft = 1 << (2 * N - 1).bit_length()
    x = ensemble.data[:, :N]
    parts = []
    for start in range(0, ensemble.P, ROW_BLOCK):
        X = np.fft.rfft(x[start : start + ROW_BLOCK], n=nfft, axis=1)
        parts.append(np.sum(X.real**2 + X.imag**2, axis=0))
    c = np.fft.irfft(_tree_sum(parts), n=nfft) / ensemble.P
    lags = np.arange(-(N - 1), N)
    # circular index of lag tau is tau mod nfft; the sequence is even in tau
    vals = c[np.abs(lags)]
    vals = vals / ((N - np.abs(lags)) if normalization == "unbiased" else N)
    return LagFunction(lags, vals)


def _fourier_sum(coef: np.ndarray, taus: np.ndarray, omegas: np.ndarray) -> np.ndarray:
    """``sum_tau coef[tau] exp(-j omega tau)`` for every omega (complex)."""
    if is_dft_grid(omegas):
        M = omegas.size
        folded = np.zeros(M)
        np.add.at(folded, np.mod(taus, M), coef)
        return np.fft.fftshift(np.fft.fft(folded))
    out = np.empty(omegas.size, dtype=complex)
    t = taus.astype(float)
    for s in range(0, omegas.size, _DIRECT_CHUNK):
        ph = np.outer(omegas[s : s + _DIRECT_CHUNK], t)
        out[s : s + _DIRECT_CHUNK] = np.cos(ph) @ coef - 1j * (np.sin(ph) @ coef)
    return out


def ft_of_lag(lagfn: LagFunction, omegas=None) -> Spectrum:
    """Fourier transform of a symmetric lag function on a frequency grid.

    Defaults to the DFT grid of size K where lags span -(K-1)..(K-1).
    Values below ``-eps`` (``eps = 1e-9 * max``) are clipped to ``-eps``
    and counted in ``Spectrum.n_clipped``.

    Raises
    ------
    AsymmetricLag
        The transform has an imaginary part above 1e-6 of its peak.
    """
    if omegas is None:
        omegas = dft_grid(int(np.max(np.abs(lagfn.lags))) + 1)
    omegas = np.asarray(omegas, dtype=float)
    X = _fourier_sum(lagfn.values, lagfn.lags, omegas)
    scale = float(np.max(np.abs(X))) if X.size else 0.0
    if X.size and np.max(np.abs(X.imag)) > 1e-6 * scale:
        raise AsymmetricLag(
            f"transform has imaginary part {np.max(np.abs(X.imag)):.3g} relative to peak {scale:.3g}"
        )
    vals = X.real.copy()
    eps = 1e-9 * float(np.max(np.abs(vals))) if vals.size else 0.0
    low = vals < -eps
    n_clipped = int(low.sum())
    if n_clipped:
        logger.info("ft_of_lag clipped %d bins below -%.3g", n_clipped, eps)
        vals[low] = -eps
    return Spectrum(omegas, vals, n_clipped=n_clipped)


def max_abs_autocorrelation(R) -> LagFunction:
    """``max_t |R(t, t - tau)|`` for every lag tau."""
    R = _as_square(R)
    K = R.shape[0]
    lags = np.arange(-(K - 1), K)
    vals = np.array([np.max(np.abs(np.diagonal(R, offset=-int(tau)))) for tau in lags])
    return LagFunction(lags, vals)


@dataclass
class AssumptionReport:
    """Finite-sample proxies for the boundedness and summability conditions.

    ``c_hat`` is the largest diagonal entry of R (bound on the correlation
    of |x|), ``rm_sum`` is the sum of the maximum-absolute autocorrelation
    over all lags.
    """

    c_hat: float
    rm_sum: float
    passed: bool
    nan_location: tuple[int, int] | None = None
    messages: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "C_hat": self.c_hat,
            "rm_sum": self.rm_sum,
            "passed": self.passed,
            "nan_location": list(self.nan_location) if self.nan_location else None,
            "messages": list(self.messages),
        }


def check_assumptions(R) -> AssumptionReport:
    R = _as_square(R)
    bad = np.argwhere(~np.isfinite(R))
    if bad.size:
        loc = (int(bad[0, 0]), int(bad[0, 1]))
        return AssumptionReport(
            c_hat=float("nan"),
            rm_sum=float("nan"),
            passed=False,
            nan_location=loc,
            messages=[f"non-finite autocorrelation at {loc}"],
        )
    c_hat = float(np.max(np.diag(R)))
    rm_sum = math.fsum(max_abs_autocorrelation(R).values)
    passed = math.isfinite(c_hat) and math.isfinite(rm_sum)
    msgs = [] if passed else ["bound or summability proxy is not finite"]
    return AssumptionReport(c_hat, rm_sum, passed, None, msgs)


def _h_autocorrelation(h: np.ndarray) -> np.ndarray:
    """``sum_k h[k] h[k - tau]`` for tau = -(L-1)..(L-1)."""
    return np.correlate(h, h, mode="full")


def theoretical_avg_acf(filt: LtiFilter, profile: VarianceProfile) -> LagFunction:
    """Closed-form averaged autocorrelation ``mean_var * (h * h(-.))(tau)``.

    Lags span -(K-1)..(K-1) with K the profile length; the full truncated
    impulse response contributes, lags beyond its support are zero.
    """
    K = len(profile)
    h = filt.impulse_response
    L = h.size
    ac = _h_autocorrelation(h)
    lags = np.arange(-(K - 1), K)
    vals = np.zeros(lags.size)
    keep = np.abs(lags) <= L - 1
    vals[keep] = ac[lags[keep] + (L - 1)]
    return LagFunction(lags, profile.mean_variance * vals)


def theoretical_psd_ns1(filt: LtiFilter, profile: VarianceProfile, omegas=None) -> Spectrum:
    """``mean_var * |H(omega)|^2`` from the exact rational response."""
    if omegas is None:
        omegas = dft_grid(len(profile))
    omegas = np.asarray(omegas, dtype=float)
    H = frequency_response(filt, omegas)
    return Spectrum(omegas, profile.mean_variance * np.abs(H) ** 2)


def _transform_axis(A: np.ndarray, grid: np.ndarray, axis: int) -> np.ndarray:
    """``sum_t A[..., t, ...] exp(-j grid t)`` along ``axis``."""
    K = A.shape[axis]
    M = grid.size
    if is_dft_grid(grid) and (M >= K or K % M == 0):
        F = np.fft.fft(A, n=max(M, K), axis=axis)
        if M < K:
            # the M-point grid is every (K // M)-th bin of the K-point DFT
            F = np.take(F, np.arange(M) * (K // M), axis=axis)
        return np.fft.fftshift(F, axes=axis)
    E = np.exp(-1j * np.outer(grid, np.arange(K)))
    return np.moveaxis(np.tensordot(E, A, axes=([1], [axis])), 0, axis)


def estimate_generalized_psd(R, u_grid=None, v_grid=None) -> BiSpectrum:
    """Generalized PSD ``K(u, v) = sum_{t1,t2} R(t1, t2) exp(-j(u t1 - v t2))``.

    Uses FFTs along rows and columns when a grid is a centered DFT grid
    compatible with K, and direct sums otherwise.
    """
    R = np.asarray(R)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise NswkError(f"expected a square matrix, got shape {R.shape}")
    K = R.shape[0]
    u = dft_grid(K) if u_grid is None else np.asarray(u_grid, dtype=float)
    v = u if v_grid is None else np.asarray(v_grid, dtype=float)
    A = _transform_axis(R.astype(complex), u, axis=0)
    # +j v t2 is the conjugate of the forward kernel
    B = np.conj(_transform_axis(np.conj(A), v, axis=1))
    return BiSpectrum(u, v, B)


def noise_generalized_psd(profile: VarianceProfile, u_grid, v_grid) -> BiSpectrum:
    """Generalized PSD of white noise with a known variance profile.

    ``K_w(u, v) = sum_t var[t] exp(-j (u - v) t)``.
    """
    u = np.asarray(u_grid, dtype=float)
    v = np.asarray(v_grid, dtype=float)
    t = np.arange(len(profile))
    diff = u[:, None] - v[None, :]
    vals = np.exp(-1j * diff[..., None] * t) @ profile.values
    return BiSpectrum(u, v, vals)


@dataclass
class WkConvergence:
    """Distances between N-window periodograms and the reference transform."""

    windows: list[int]
    distances: list[float]
    reference_lag: LagFunction
    psds: list[Spectrum]
    references: list[Spectrum]

    def rows(self):
        return list(zip(self.windows, self.distances))


def verify_wk_convergence(ensemble: Ensemble, windows, threads: int = 1) -> WkConvergence:
    """Sup-norm gap between each N-PSD and the transformed averaged ACF.

    The reference is the biased averaged autocorrelation over the largest
    window, transformed onto each window's own DFT grid. At the largest
    window the two sides coincide up to rounding.
    """
    windows = [int(n) for n in windows]
    if not windows:
        raise NswkError("no windows given")
    if windows != sorted(windows):
        raise NswkError("windows must be sorted ascending")
    if windows[0] < 1:
        raise NswkError("windows must be >= 1")
    n_max = windows[-1]
    if n_max > ensemble.K:
        raise WindowTooLong(f"window {n_max} exceeds signal length {ensemble.K}")
    R = estimate_autocorrelation(ensemble, n_max)
    ref_lag = averaged_autocorrelation(R, normalization="biased")
    psds, refs, dist = [], [], []
    for n in windows:
        psd = estimate_psd(ensemble, n, threads=threads)
        ref = ft_of_lag(ref_lag, psd.omegas)
        psds.append(psd)
        refs.append(ref)
        dist.append(float(np.max(np.abs(psd.values - ref.values))))
    return WkConvergence(windows, dist, ref_lag, psds, refs)
