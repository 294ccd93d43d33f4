"""
Core value types: ensembles, LTI filters, variance profiles, spectra and
lag functions, plus the centered DFT frequency-grid convention.

All types are frozen after construction. Arrays are copied and marked
read-only so instances can be shared across threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, signal

__all__ = [
    "NswkError",
    "UnstableFilter",
    "NonConvergent",
    "WindowTooLong",
    "AsymmetricLag",
    "EmptySpectrum",
    "ZeroSignal",
    "InvariantViolation",
    "Ensemble",
    "VarianceProfile",
    "LtiFilter",
    "Spectrum",
    "BiSpectrum",
    "LagFunction",
    "dft_grid",
    "is_dft_grid",
    "make_filter",
    "frequency_response",
]

DEFAULT_TRUNCATION_TOL = 1e-10
DEFAULT_MAX_LENGTH = 1_000_000


class NswkError(ValueError):
    """Base class for input errors raised by this package."""


class UnstableFilter(NswkError):
    pass


class NonConvergent(NswkError):
    pass


class WindowTooLong(NswkError):
    pass


class AsymmetricLag(NswkError):
    pass


class EmptySpectrum(NswkError):
    pass


class ZeroSignal(NswkError):
    pass


class InvariantViolation(RuntimeError):
    """A computed object broke one of its type invariants."""


def _frozen(a, dtype=float) -> np.ndarray:
    out = np.array(a, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


# --------------------------------------------------------------------------
# frequency grid
# --------------------------------------------------------------------------

def dft_grid(n: int) -> np.ndarray:
    """Centered angular-frequency grid of ``n`` DFT bins in [-pi, pi).

    Bin ``n // 2`` is omega = 0; ordering matches ``np.fft.fftshift``.
    """
    if n < 1:
        raise NswkError(f"grid size must be >= 1, got {n}")
    return 2.0 * np.pi * np.fft.fftshift(np.fft.fftfreq(n))


def is_dft_grid(omegas) -> bool:
    omegas = np.asarray(omegas, dtype=float)
    if omegas.ndim != 1 or omegas.size == 0:
        return False
    return bool(np.array_equal(omegas, dft_grid(omegas.size)))


# --------------------------------------------------------------------------
# value types
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Ensemble:
    """P realizations of a length-K real signal, one realization per row.

    ``meta`` carries provenance such as the decimation factor and the
    original length of a subsampled ensemble.
    """

    data: np.ndarray
    seed: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim == 1:
            data = data[None, :]
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise NswkError(f"ensemble must be a non-empty P x K matrix, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise NswkError("ensemble contains non-finite samples")
        object.__setattr__(self, "data", _frozen(data))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "meta", dict(self.meta))

    @property
    def P(self) -> int:
        return self.data.shape[0]

    @property
    def K(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class VarianceProfile:
    """Per-sample variance of nonstationary white noise."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size < 1:
            raise NswkError("variance profile is empty")
        if not np.all(np.isfinite(v)):
            raise NswkError("variance profile has non-finite entries")
        if np.any(v < 0):
            raise NswkError("variance profile has negative entries")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def mean_variance(self) -> float:
        # fsum keeps the mean exactly permutation invariant
        return math.fsum(self.values) / self.values.size

    @property
    def max_variance(self) -> float:
        return float(self.values.max())

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class LtiFilter:
    """Stable rational filter ``H(z) = B(z) / (1 - sum_j ar[j] z^-(j+1))``."""

    ar: np.ndarray
    ma: np.ndarray
    impulse_response: np.ndarray
    truncation_tol: float

    def __post_init__(self):
        for name in ("ar", "ma", "impulse_response"):
            object.__setattr__(self, name, _frozen(np.asarray(getattr(self, name), dtype=float).ravel()))

    @property
    def length(self) -> int:
        return self.impulse_response.size

    @property
    def denominator(self) -> np.ndarray:
        return np.concatenate(([1.0], -self.ar))


@dataclass(frozen=True)
class Spectrum:
    """Real spectral density on a grid of angular frequencies.

    ``n_clipped`` counts bins that were raised to ``-eps`` because
    estimation noise pushed them further negative.
    """

    omegas: np.ndarray
    values: np.ndarray
    n_clipped: int = 0

    def __post_init__(self):
        om = np.asarray(self.omegas, dtype=float).ravel()
        val = np.asarray(self.values, dtype=float).ravel()
        if om.shape != val.shape:
            raise NswkError(f"grid/value length mismatch: {om.size} vs {val.size}")
        object.__setattr__(self, "omegas", _frozen(om))
        object.__setattr__(self, "values", _frozen(val))

    @property
    def eps(self) -> float:
        return 1e-9 * float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def check(self, symmetric: bool = True) -> None:
        """Raise InvariantViolation if the spectrum breaks its invariants."""
        if not np.all(np.isfinite(self.values)):
            raise InvariantViolation("spectrum has non-finite values")
        if np.any(self.values < -self.eps):
            raise InvariantViolation("spectrum has negative values beyond numerical tolerance")
        if symmetric and is_dft_grid(self.omegas):
            n = self.omegas.size
            # bin n//2 + d pairs with n//2 - d; for even n the -pi bin is self-paired
            c = n // 2
            d = np.arange(1, (n - 1) // 2 + 1)
            a, b = self.values[c + d], self.values[c - d]
            scale = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-300)
            if np.any(np.abs(a - b) > 1e-6 * scale + self.eps):
                raise InvariantViolation("spectrum is not symmetric in omega")


@dataclass(frozen=True)
class BiSpectrum:
    """Generalized PSD ``K(u, v)`` on a frequency-pair grid; rows index u."""

    u_grid: np.ndarray
    v_grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "u_grid", _frozen(np.asarray(self.u_grid, dtype=float).ravel()))
        object.__setattr__(self, "v_grid", _frozen(np.asarray(self.v_grid, dtype=float).ravel()))
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (self.u_grid.size, self.v_grid.size):
            raise NswkError(f"values shape {vals.shape} does not match grids")
        object.__setattr__(self, "values", _frozen(vals, dtype=complex))

    def hermitian_error(self) -> float:
        """Max relative deviation from K(u, v) = conj(K(v, u)); grids must match."""
        if not np.array_equal(self.u_grid, self.v_grid):
            raise NswkError("hermitian check needs identical u and v grids")
        k = self.values
        scale = max(float(np.max(np.abs(k))), 1e-300)
        return float(np.max(np.abs(k - k.conj().T)) / scale)


@dataclass(frozen=True)
class LagFunction:
    """Real sequence indexed by integer lags, usually -(K-1)..(K-1)."""

    lags: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        lags = np.asarray(self.lags, dtype=np.int64).ravel()
        vals = np.asarray(self.values, dtype=float).ravel()
        if lags.shape != vals.shape:
            raise NswkError(f"lag/value length mismatch: {lags.size} vs {vals.size}")
        object.__setattr__(self, "lags", _frozen(lags, dtype=np.int64))
        object.__setattr__(self, "values", _frozen(vals))

    def at(self, tau: int) -> float:
        idx = np.flatnonzero(self.lags == tau)
        return float(self.values[idx[0]]) if idx.size else 0.0

    def symmetry_error(self) -> float:
        """Max |f(tau) - f(-tau)| over lags present with their mirror."""
        lookup = dict(zip(self.lags.tolist(), self.values.tolist()))
        err = 0.0
        for tau, val in lookup.items():
            if -tau in lookup:
                err = max(err, abs(val - lookup[-tau]))
        return err


# --------------------------------------------------------------------------
# filters
# --------------------------------------------------------------------------

def _check_stable(ar: np.ndarray) -> None:
    if ar.size == 0:
        return
    roots = np.roots(np.concatenate(([1.0], -ar)))
    mod = np.abs(roots)
    if np.any(mod >= 1.0):
        raise UnstableFilter(
            f"characteristic root with modulus {mod.max():.6g} >= 1 for ar={ar.tolist()}"
        )


def _tail_energy_fn(ar: np.ndarray, ma: np.ndarray):
    """Return ``f(h_prefix) -> energy of h beyond len(h_prefix)`` (exact).

    The free response after the input has died out is driven by the last
    ``len(ar)`` outputs; its energy is a quadratic form in that state with
    the observability Gramian of the companion recursion.
    """
    q = ar.size
    if q == 0:
        return lambda h: 0.0
    A = np.zeros((q, q))
    A[0, :] = ar
    A[1:, :-1] = np.eye(q - 1)
    C = np.zeros((1, q))
    C[0, :] = ar
    # y[k] = C s[k-1] with s[k] = (y[k], ..., y[k-q+1]) once input is zero
    gram = linalg.solve_discrete_lyapunov(A.T, C.T @ C)

    def tail(h: np.ndarray) -> float:
        n = h.size
        # the state formula needs the feedforward input exhausted
        assert n >= ma.size
        s = np.zeros(q)
        take = min(q, n)
        s[:take] = h[n - 1 :: -1][:take]
        return float(max(s @ gram @ s, 0.0))

    return tail


def make_filter(
    ar=(),
    ma=(1.0,),
    truncation_tol: float = DEFAULT_TRUNCATION_TOL,
    max_length: int = DEFAULT_MAX_LENGTH,
) -> LtiFilter:
    """Build a stable LTI filter and its truncated impulse response.

    The truncation length L is the smallest length for which the first
    omitted sample satisfies ``|h[L]| <= tol * max|h|``, the energy beyond
    L is at most ``tol`` times the total energy, and the l1 norm beyond L
    is at most ``tol * min|H|`` (so the truncated DFT is within ``tol``
    relative of the exact response).

    Raises
    ------
    UnstableFilter
        A characteristic root lies on or outside the unit circle.
    NonConvergent
        L would exceed ``max_length``.
    """
    ar = np.atleast_1d(np.asarray(ar, dtype=float)).ravel()
    ma = np.atleast_1d(np.asarray(ma, dtype=float)).ravel()
    if ma.size == 0:
        raise NswkError("ma must be non-empty")
    if not (0.0 < truncation_tol < 1.0):
        raise NswkError(f"truncation_tol must be in (0, 1), got {truncation_tol}")
    if not (np.all(np.isfinite(ar)) and np.all(np.isfinite(ma))):
        raise NswkError("filter coefficients must be finite")
    _check_stable(ar)

    denom = np.concatenate(([1.0], -ar))
    tail_beyond = _tail_energy_fn(ar, ma)
    # |H| floor on a dense grid bounds the relative error of the truncated DFT
    dense = np.linspace(-np.pi, np.pi, 4097)
    h_floor = float(np.min(np.abs(np.polyval(ma[::-1], np.exp(-1j * dense)) / np.polyval(denom[::-1], np.exp(-1j * dense)))))
    n = max(64, 2 * (ma.size + ar.size))
    while True:
        n_eval = min(n, max_length + 1)
        impulse = np.zeros(n_eval)
        impulse[0] = 1.0
        h = signal.lfilter(ma, denom, impulse)
        rest = tail_beyond(h) if n_eval >= ma.size else np.inf
        e2 = h * h
        # tails[L] = energy of h[L:] including what lies past the buffer
        tails = np.concatenate((np.cumsum(e2[::-1])[::-1], [0.0])) + rest
        total = tails[0]
        peak = np.max(np.abs(h))
        if total == 0.0:
            return LtiFilter(ar, ma, np.zeros(1), truncation_tol)
        l1_tail = np.concatenate((np.cumsum(np.abs(h)[::-1])[::-1], [0.0]))
        nxt = np.concatenate((np.abs(h[1:]), [0.0]))
        ok = (
            (tails[1:] <= truncation_tol * total)
            & (nxt <= truncation_tol * peak)
            & (l1_tail[1:] <= truncation_tol * h_floor)
        )
        # an IIR tail continues past the buffer; only trust its first half
        usable = n_eval if ar.size == 0 else n_eval // 2
        hits = np.flatnonzero(ok[:usable])
        if hits.size:
            L = int(hits[0]) + 1
            return LtiFilter(ar, ma, h[:L], truncation_tol)
        if n_eval > max_length:
            raise NonConvergent(f"impulse response did not converge within {max_length} samples")
        n *= 2


def frequency_response(filt: LtiFilter, omegas) -> np.ndarray:
    """Exact rational frequency response ``H(omega)`` on the given grid."""
    omegas = np.asarray(omegas, dtype=float)
    z = np.exp(-1j * omegas)
    num = np.polyval(filt.ma[::-1], z)
    den = np.polyval(filt.denominator[::-1], z)
    return num / den
