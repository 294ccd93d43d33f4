"""
Fractional-bandwidth subsampling and sinc reconstruction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import EmptySpectrum, Ensemble, NswkError, Spectrum, ZeroSignal

__all__ = [
    "SamplingPlan",
    "fractional_bandwidth",
    "out_of_band_fraction",
    "make_plan",
    "subsample",
    "sinc_reconstruct",
    "MseReport",
    "reconstruction_mse",
]


@dataclass(frozen=True)
class SamplingPlan:
    """Keep every ``decimation_M``-th sample; requires ``pi / M > B``."""

    bandwidth_B: float
    decimation_M: int
    fraction: float = 0.9

    def __post_init__(self):
        if self.decimation_M < 1:
            raise NswkError(f"decimation factor must be >= 1, got {self.decimation_M}")
        if not math.pi / self.decimation_M > self.bandwidth_B:
            raise NswkError(
                f"plan violates the Nyquist margin: pi/{self.decimation_M} <= B={self.bandwidth_B}"
            )

    def to_dict(self) -> dict:
        return {"B": self.bandwidth_B, "M": self.decimation_M, "fraction": self.fraction}

    @classmethod
    def from_dict(cls, d: dict) -> "SamplingPlan":
        return cls(float(d["B"]), int(d["M"]), float(d.get("fraction", 0.9)))


def _radial_bins(spectrum: Spectrum):
    """Group bins by |omega|; returns (levels ascending, per-level sums)."""
    radius = np.round(np.abs(spectrum.omegas), 12)
    levels, inverse = np.unique(radius, return_inverse=True)
    sums = np.zeros(levels.size)
    np.add.at(sums, inverse, spectrum.values)
    return levels, sums


def fractional_bandwidth(spectrum: Spectrum, fraction: float = 0.9) -> float:
    """Smallest grid frequency B with ``sum_{|w| <= B} S >= fraction * total``."""
    if not 0.0 < fraction <= 1.0:
        raise NswkError(f"fraction must be in (0, 1], got {fraction}")
    if np.any(spectrum.values < -spectrum.eps):
        raise NswkError("spectrum has negative values")
    levels, sums = _radial_bins(spectrum)
    total = sums.sum()
    if not total > 0.0:
        raise EmptySpectrum("spectrum has zero total power")
    cum = np.cumsum(sums)
    # relative slack absorbs rounding in the cumulative sum when fraction == 1
    idx = int(np.argmax(cum >= fraction * total * (1.0 - 1e-12)))
    return float(levels[idx])


def out_of_band_fraction(spectrum: Spectrum, B: float) -> float:
    """Share of total spectral mass at ``|omega| > B``."""
    radius = np.round(np.abs(spectrum.omegas), 12)
    total = spectrum.values.sum()
    if not total > 0.0:
        raise EmptySpectrum("spectrum has zero total power")
    return float(spectrum.values[radius > round(B, 12)].sum() / total)


def make_plan(B: float, fraction: float = 0.9, K: int | None = None, max_decimation: int | None = None) -> SamplingPlan:
    """Largest integer decimation M with ``pi / M > B``.

    M is capped at ``max_decimation`` (default ``K // 4`` when K is known)
    so that a zero bandwidth still leaves at least four samples.
    """
    if not 0.0 <= B < math.pi:
        raise NswkError(f"bandwidth must be in [0, pi), got {B}")
    cap = max_decimation
    if cap is None and K is not None:
        cap = max(1, K // 4)
    if B == 0.0:
        if cap is None:
            raise NswkError("zero bandwidth needs K or max_decimation to bound the decimation")
        M = cap
    else:
        M = max(1, math.ceil(math.pi / B) - 1)
        # guard the strict inequality against rounding in pi / B
        while M > 1 and not math.pi / M > B:
            M -= 1
        while math.pi / (M + 1) > B:
            M += 1
        if cap is not None:
            M = min(M, cap)
    return SamplingPlan(float(B), int(M), float(fraction))


def subsample(ensemble: Ensemble, plan: SamplingPlan) -> Ensemble:
    """Keep indices 0, M, 2M, ... of every realization."""
    M = plan.decimation_M
    meta = {**ensemble.meta, "M": M, "K": ensemble.K}
    return Ensemble(ensemble.data[:, ::M], seed=ensemble.seed, meta=meta)


def sinc_kernel(n_samples: int, M: int, K: int) -> np.ndarray:
    """Matrix S with ``S[n, t] = sinc((t - n M) / M)`` (normalized sinc)."""
    t = np.arange(K)
    pos = np.arange(n_samples) * M
    S = np.sinc((t[None, :] - pos[:, None]) / M)
    # pin the interpolation property exactly at integer nodes
    S[:, t % M == 0] = 0.0
    S[np.arange(n_samples), pos] = 1.0
    return S


def sinc_reconstruct(samples: Ensemble, plan: SamplingPlan, K: int | None = None) -> Ensemble:
    """Truncated sinc series ``x_hat[t] = sum_n s[n] sinc((t - n M) / M)``."""
    M = plan.decimation_M
    if K is None:
        K = int(samples.meta.get("K", samples.K * M))
    n_expected = -(-K // M)
    if samples.K != n_expected:
        raise NswkError(f"{samples.K} samples inconsistent with K={K}, M={M}")
    S = sinc_kernel(samples.K, M, K)
    xh = samples.data @ S
    return Ensemble(xh, seed=samples.seed, meta={k: v for k, v in samples.meta.items() if k not in ("M", "K")})


@dataclass
class MseReport:
    pooled: float
    per_realization: np.ndarray

    def to_dict(self) -> dict:
        return {"pooled_percent": self.pooled, "per_realization_percent": self.per_realization.tolist()}


def reconstruction_mse(original: Ensemble, reconstructed: Ensemble) -> MseReport:
    """Normalized squared error in percent, pooled and per realization.

    Realizations with zero energy report NaN individually; the pooled value
    raises ZeroSignal when the whole ensemble has zero energy.
    """
    x, xh = original.data, reconstructed.data
    if x.shape != xh.shape:
        raise NswkError(f"shape mismatch {x.shape} vs {xh.shape}")
    err = np.sum((x - xh) ** 2, axis=1)
    energy = np.sum(x * x, axis=1)
    if not energy.sum() > 0.0:
        raise ZeroSignal("original ensemble has zero energy")
    with np.errstate(divide="ignore", invalid="ignore"):
        per = np.where(energy > 0, 100.0 * err / energy, np.nan)
    return MseReport(float(100.0 * err.sum() / energy.sum()), per)
