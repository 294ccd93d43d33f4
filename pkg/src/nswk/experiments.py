"""
End-to-end experiment runners.

``run_fig1`` checks that windowed ensemble periodograms approach the
transform of the averaged autocorrelation; ``run_fig2`` compares estimates
with closed forms and scores subsampling + sinc reconstruction;
``run_bench`` times the 1-D PSD pipeline against the generalized PSD.
"""
from __future__ import annotations

import json
import statistics
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import io as nio
from .model import Ensemble, LtiFilter, NswkError, VarianceProfile, make_filter
from .sampling import (
    fractional_bandwidth,
    make_plan,
    out_of_band_fraction,
    reconstruction_mse,
    sinc_reconstruct,
    subsample,
)
from .spectral import (
    ensemble_averaged_autocorrelation,
    estimate_autocorrelation,
    estimate_generalized_psd,
    estimate_psd,
    theoretical_avg_acf,
    theoretical_psd_ns1,
    verify_wk_convergence,
)
from .synthesis import TemporalModel, constant_profile, paper_variance_profile, synthesize

__all__ = [
    "ExperimentConfig",
    "parse_profile",
    "build_inputs",
    "run_fig1",
    "run_fig2",
    "BenchRow",
    "run_bench",
]

PAPER_AR = (0.8, 0.1)
PAPER_WINDOWS = (400, 425, 450, 475, 500)


@dataclass
class ExperimentConfig:
    K: int = 500
    P: int = 2000
    ar: list[float] = field(default_factory=lambda: list(PAPER_AR))
    ma: list[float] = field(default_factory=lambda: [1.0])
    profile: str = "paper"
    temporal: str = "iid"
    windows: list[int] | None = None
    fraction: float = 0.9
    seed: int = 0
    out_dir: str = "out"
    warmup: int = 0
    bandwidth_source: str = "estimated"
    truncation_tol: float = 1e-10
    threads: int = 1

    def __post_init__(self):
        self.K, self.P, self.seed = int(self.K), int(self.P), int(self.seed)
        self.ar = [float(a) for a in self.ar]
        self.ma = [float(b) for b in self.ma]
        if self.windows is None:
            # same relative spacing as the 400..500 sweep at K = 500
            self.windows = sorted({max(1, round(self.K * n / 500)) for n in PAPER_WINDOWS})
        self.windows = sorted(int(n) for n in self.windows)
        if self.K < 1 or self.P < 1:
            raise NswkError("K and P must be positive")
        if self.windows and (self.windows[0] < 1 or self.windows[-1] > self.K):
            raise NswkError(f"windows must lie in [1, K={self.K}]")
        if self.bandwidth_source not in ("estimated", "theoretical"):
            raise NswkError("bandwidth_source must be 'estimated' or 'theoretical'")
        TemporalModel.parse(self.temporal)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(doc) - known
        if extra:
            raise NswkError(f"unknown config keys: {sorted(extra)}")
        return cls(**doc)

    def save(self, path) -> None:
        nio.write_json(path, self.to_dict())

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


def parse_profile(spec: str, K: int) -> VarianceProfile:
    """``paper`` | ``const:<v>`` | ``file:<path>`` (JSON with a ``variance`` array)."""
    if spec == "paper":
        return paper_variance_profile(K)
    if spec.startswith("const:"):
        return constant_profile(K, float(spec[6:]))
    if spec.startswith("file:"):
        prof = nio.read_model_json(spec[5:])["variance"]
        if prof is None:
            raise NswkError(f"{spec[5:]} has no 'variance' array")
        if len(prof) != K:
            raise NswkError(f"profile length {len(prof)} does not match K={K}")
        return prof
    raise NswkError(f"cannot parse profile spec {spec!r}")


def build_inputs(cfg: ExperimentConfig) -> tuple[LtiFilter, VarianceProfile, Ensemble]:
    filt = make_filter(cfg.ar, cfg.ma, cfg.truncation_tol)
    profile = parse_profile(cfg.profile, cfg.K + cfg.warmup)
    ens = synthesize(
        filt,
        profile,
        cfg.P,
        TemporalModel.parse(cfg.temporal),
        seed=cfg.seed,
        warmup=cfg.warmup,
        threads=cfg.threads,
    )
    if cfg.warmup:
        profile = VarianceProfile(profile.values[cfg.warmup :])
    return filt, profile, ens


def _out(cfg: ExperimentConfig, sub: str) -> Path:
    path = Path(cfg.out_dir) / sub
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_checked(path: Path, spec) -> None:
    spec.check()
    nio.write_spectrum(path, spec)


def run_fig1(cfg: ExperimentConfig, ensemble: Ensemble | None = None) -> dict:
    """Windowed periodograms vs. the transformed averaged autocorrelation."""
    if ensemble is None:
        _, _, ensemble = build_inputs(cfg)
    out = _out(cfg, "fig1")
    res = verify_wk_convergence(ensemble, cfg.windows, threads=cfg.threads)
    for n, psd in zip(res.windows, res.psds):
        _write_checked(out / f"psd_N{n}.csv", psd)
    _write_checked(out / "reference.csv", res.references[-1])
    nio.write_lag(out / "avg_acf_biased.csv", res.reference_lag)
    with open(out / "distances.csv", "w") as fh:
        fh.write("N,sup_distance\n")
        for n, d in res.rows():
            fh.write(f"{n},{d!r}\n")
    return {"windows": res.windows, "distances": res.distances, "result": res}


def run_fig2(cfg: ExperimentConfig, ensemble: Ensemble | None = None) -> dict:
    """Closed-form comparisons plus the subsampling/reconstruction score."""
    filt = make_filter(cfg.ar, cfg.ma, cfg.truncation_tol)
    if ensemble is None:
        filt, profile, ensemble = build_inputs(cfg)
    else:
        profile = parse_profile(cfg.profile, ensemble.K)
    out = _out(cfg, "fig2")
    K = ensemble.K

    nio.write_lag(out / "avg_acf_theory.csv", theoretical_avg_acf(filt, profile))
    _write_checked(out / "psd_theory.csv", theoretical_psd_ns1(filt, profile))
    windows = [n for n in cfg.windows if n <= K] or [K]
    for n in windows:
        nio.write_lag(out / f"avg_acf_N{n}.csv", ensemble_averaged_autocorrelation(ensemble, n))
        _write_checked(out / f"psd_N{n}.csv", estimate_psd(ensemble, n, cfg.threads))

    psd_full = estimate_psd(ensemble, K, cfg.threads)
    band_psd = psd_full if cfg.bandwidth_source == "estimated" else theoretical_psd_ns1(filt, profile)
    B = fractional_bandwidth(band_psd, cfg.fraction)
    plan = make_plan(B, cfg.fraction, K=K)
    samples = subsample(ensemble, plan)
    recon = sinc_reconstruct(samples, plan, K)
    mse = reconstruction_mse(ensemble, recon)

    M = plan.decimation_M
    with open(out / "realization.csv", "w") as fh:
        fh.write("k,x,x_hat,kept\n")
        for k, (a, b) in enumerate(zip(ensemble.data[0].tolist(), recon.data[0].tolist())):
            fh.write(f"{k},{a!r},{b!r},{int(k % M == 0)}\n")

    summary = {
        "B": B,
        "B_over_pi": B / np.pi,
        "M": M,
        "fraction": cfg.fraction,
        "pooled_mse_percent": mse.pooled,
        "out_of_band_percent": 100.0 * out_of_band_fraction(band_psd, B),
        "above_nyquist_percent": 100.0 * out_of_band_fraction(psd_full, np.pi / M),
        "bandwidth_source": cfg.bandwidth_source,
        "K": K,
        "P": ensemble.P,
        "seed": cfg.seed,
        "temporal": cfg.temporal,
    }
    nio.write_json(out / "summary.json", summary)
    nio.write_json(out / "plan.json", plan.to_dict())
    return summary


@dataclass
class BenchRow:
    P: int
    T: int
    psd_seconds: float
    gen_seconds: float

    @property
    def ratio(self) -> float:
        return self.gen_seconds / self.psd_seconds


def _median_time(fn, repeats: int) -> float:
    fn()  # warm caches and FFT plans
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def run_bench(sizes, repeats: int = 5, seed: int = 0) -> list[BenchRow]:
    """Median wall-clock time of both pipelines at each (P, T)."""
    rows = []
    for P, T in sizes:
        rng = np.random.default_rng([seed, P, T])
        ens = Ensemble(rng.standard_normal((P, T)), seed=seed)
        t_psd = _median_time(lambda: estimate_psd(ens, T), repeats)
        t_gen = _median_time(lambda: estimate_generalized_psd(estimate_autocorrelation(ens)), repeats)
        rows.append(BenchRow(int(P), int(T), t_psd, t_gen))
    return rows
