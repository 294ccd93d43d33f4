"""
Synthesis of class-NS1 ensembles.

Noise for realization ``p`` comes from its own Philox stream keyed by
``(seed, p)``, so any subset of rows can be regenerated independently
and results do not depend on how work is split across threads.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import signal

from .model import Ensemble, LtiFilter, NswkError, VarianceProfile

__all__ = [
    "TemporalModel",
    "IID",
    "paper_variance_profile",
    "constant_profile",
    "realization_rng",
    "generate_noise",
    "apply_filter",
    "synthesize",
]

# Rows are processed in fixed-size blocks; the partition never depends on
# the thread count, which keeps outputs bit-identical under parallelism.
ROW_BLOCK = 256


@dataclass(frozen=True)
class TemporalModel:
    """Coupling between successive realizations: ``iid`` or ``ar1``."""

    kind: str = "iid"
    rho: float = 0.0

    def __post_init__(self):
        if self.kind not in ("iid", "ar1"):
            raise NswkError(f"unknown temporal model {self.kind!r}")
        if self.kind == "ar1" and not abs(self.rho) < 1.0:
            raise NswkError(f"ar1 coupling needs |rho| < 1, got {self.rho}")

    @classmethod
    def parse(cls, text: str) -> "TemporalModel":
        """Parse ``iid`` or ``ar1:<rho>``."""
        if text == "iid":
            return cls("iid")
        if text.startswith("ar1:"):
            return cls("ar1", float(text[4:]))
        raise NswkError(f"cannot parse temporal model {text!r}")

    def __str__(self) -> str:
        return "iid" if self.kind == "iid" else f"ar1:{self.rho!r}"


IID = TemporalModel("iid")


def paper_variance_profile(K: int) -> VarianceProfile:
    """Step profile: the first ``K // 3`` samples have variance 1, the rest 0.1."""
    if K < 3:
        raise NswkError(f"paper profile needs K >= 3, got {K}")
    values = np.full(K, 0.1)
    values[: K // 3] = 1.0
    return VarianceProfile(values)


def constant_profile(K: int, value: float = 1.0) -> VarianceProfile:
    return VarianceProfile(np.full(K, float(value)))


def realization_rng(seed: int, p: int) -> np.random.Generator:
    """Counter-based generator for realization ``p`` of a run seeded with ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed) & 0xFFFF_FFFF_FFFF_FFFF, spawn_key=(int(p),))
    return np.random.Generator(np.random.Philox(ss))


def _standard_normals(seed: int, rows: range, K: int) -> np.ndarray:
    return np.stack([realization_rng(seed, p).standard_normal(K) for p in rows])


def _blocks(P: int):
    return [range(s, min(s + ROW_BLOCK, P)) for s in range(0, P, ROW_BLOCK)]


def _map_blocks(fn, P: int, threads: int):
    blocks = _blocks(P)
    if threads <= 1 or len(blocks) == 1:
        return [fn(b) for b in blocks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, blocks))


def generate_noise(
    profile: VarianceProfile,
    P: int,
    temporal: TemporalModel = IID,
    seed: int = 0,
    threads: int = 1,
) -> Ensemble:
    """Draw P realizations of zero-mean Gaussian noise with per-sample variance.

    With ``temporal.kind == "ar1"`` each sample index k carries its own
    stationary AR-1 chain across realizations,
    ``u_p = rho * u_{p-1} + sqrt(1 - rho^2) * z_p`` with ``u_0 = z_0``, so the
    marginal variance of every realization still equals the profile.
    """
    if P < 1:
        raise NswkError(f"P must be >= 1, got {P}")
    K = len(profile)
    z = np.concatenate(_map_blocks(lambda rows: _standard_normals(seed, rows, K), P, threads))
    if temporal.kind == "ar1":
        rho = temporal.rho
        gain = np.sqrt(1.0 - rho * rho)
        for p in range(1, P):
            z[p] = rho * z[p - 1] + gain * z[p]
    w = z * np.sqrt(profile.values)[None, :]
    return Ensemble(w, seed=seed, meta={"temporal": str(temporal)})


def apply_filter(noise: Ensemble, filt: LtiFilter, threads: int = 1) -> Ensemble:
    """Filter every realization by the exact recursion with zero initial state.

    The output keeps all K samples, including the start-up transient.
    """
    x = noise.data
    b, a = filt.ma, filt.denominator
    out = np.concatenate(_map_blocks(lambda rows: signal.lfilter(b, a, x[rows.start : rows.stop], axis=1), noise.P, threads))
    return Ensemble(out, seed=noise.seed, meta=dict(noise.meta))


def synthesize(
    filt: LtiFilter,
    profile: VarianceProfile,
    P: int,
    temporal: TemporalModel = IID,
    seed: int = 0,
    warmup: int = 0,
    threads: int = 1,
) -> Ensemble:
    """Noise generation followed by filtering; ``warmup`` drops a leading prefix."""
    x = apply_filter(generate_noise(profile, P, temporal, seed, threads), filt, threads)
    if warmup:
        if not 0 <= warmup < x.K:
            raise NswkError(f"warmup {warmup} must be in [0, K)")
        x = Ensemble(x.data[:, warmup:], seed=x.seed, meta={**x.meta, "warmup": warmup})
    return x
