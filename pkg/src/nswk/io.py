"""
File formats.

Ensemble CSV: a header line ``# P=<p> K=<k> seed=<s>`` (optionally followed
by extra ``key=value`` tokens such as ``M`` and ``orig_K``), then one
realization per row. Filters and profiles share one JSON document with keys
``ar``, ``ma`` and ``variance``. Spectra, lag functions and bispectra are
CSV tables with headers ``omega,value``, ``lag,value`` and ``u,v,re,im``.
"""
from __future__ import annotations

import io
import json
from pathlib import Path

import numpy as np

from .model import BiSpectrum, Ensemble, LagFunction, NswkError, Spectrum, VarianceProfile

__all__ = [
    "write_ensemble",
    "read_ensemble",
    "write_model_json",
    "read_model_json",
    "write_spectrum",
    "read_spectrum",
    "write_lag",
    "read_lag",
    "write_bispectrum",
    "read_bispectrum",
    "write_json",
]

FMT = "%.17g"


def _header_tokens(line: str) -> dict[str, str]:
    if not line.startswith("#"):
        raise NswkError("ensemble CSV must start with a '# P=.. K=.. seed=..' header")
    out = {}
    for tok in line[1:].split():
        key, sep, val = tok.partition("=")
        if not sep:
            raise NswkError(f"malformed header token {tok!r}")
        out[key] = val
    return out


def write_ensemble(path, ens: Ensemble) -> None:
    header = f"P={ens.P} K={ens.K} seed={ens.seed}"
    if "M" in ens.meta:
        header += f" M={ens.meta['M']} orig_K={ens.meta['K']}"
    with open(path, "w", newline="") as fh:
        fh.write(f"# {header}\n")
        np.savetxt(fh, ens.data, fmt=FMT, delimiter=",")


def read_ensemble(path) -> Ensemble:
    text = Path(path).read_text()
    first, _, body = text.partition("\n")
    tokens = _header_tokens(first)
    try:
        P, K = int(tokens["P"]), int(tokens["K"])
    except KeyError as exc:
        raise NswkError(f"ensemble header missing {exc.args[0]}") from None
    data = np.loadtxt(io.StringIO(body), delimiter=",", ndmin=2)
    if data.shape != (P, K):
        raise NswkError(f"header says {P}x{K} but file holds {data.shape[0]}x{data.shape[1]}")
    meta = {}
    if "M" in tokens:
        meta = {"M": int(tokens["M"]), "K": int(tokens["orig_K"])}
    return Ensemble(data, seed=int(tokens.get("seed", 0)), meta=meta)


def write_model_json(path, ar=(), ma=(1.0,), variance=None) -> None:
    doc = {"ar": [float(a) for a in ar], "ma": [float(b) for b in ma]}
    if variance is not None:
        doc["variance"] = [float(v) for v in np.asarray(variance).ravel()]
    write_json(path, doc)


def read_model_json(path) -> dict:
    """Return ``{"ar": list, "ma": list, "variance": VarianceProfile | None}``."""
    doc = json.loads(Path(path).read_text())
    variance = doc.get("variance")
    return {
        "ar": [float(a) for a in doc.get("ar", [])],
        "ma": [float(b) for b in doc.get("ma", [1.0])],
        "variance": VarianceProfile(variance) if variance is not None else None,
    }


def write_json(path, doc) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _write_table(path, header: str, cols) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        np.savetxt(fh, np.column_stack(cols), fmt=FMT, delimiter=",")


def _read_table(path, header: str) -> np.ndarray:
    with open(path) as fh:
        first = fh.readline().strip()
        if first != header:
            raise NswkError(f"expected header {header!r}, got {first!r}")
        return np.loadtxt(fh, delimiter=",", ndmin=2)


def write_spectrum(path, spec: Spectrum) -> None:
    _write_table(path, "omega,value", [spec.omegas, spec.values])


def read_spectrum(path) -> Spectrum:
    t = _read_table(path, "omega,value")
    return Spectrum(t[:, 0], t[:, 1])


def write_lag(path, lagfn: LagFunction) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("lag,value\n")
        for tau, val in zip(lagfn.lags.tolist(), lagfn.values.tolist()):
            fh.write(f"{tau},{val!r}\n")


def read_lag(path) -> LagFunction:
    t = _read_table(path, "lag,value")
    return LagFunction(t[:, 0].astype(np.int64), t[:, 1])


def write_bispectrum(path, bs: BiSpectrum) -> None:
    uu, vv = np.meshgrid(bs.u_grid, bs.v_grid, indexing="ij")
    _write_table(path, "u,v,re,im", [uu.ravel(), vv.ravel(), bs.values.real.ravel(), bs.values.imag.ravel()])


def read_bispectrum(path) -> BiSpectrum:
    t = _read_table(path, "u,v,re,im")
    u = np.unique(t[:, 0])
    v = np.unique(t[:, 1])
    vals = (t[:, 2] + 1j * t[:, 3]).reshape(u.size, v.size)
    # rows were written u-major in grid order, which may not be sorted
    u_grid = t[:: v.size, 0]
    v_grid = t[: v.size, 1]
    return BiSpectrum(u_grid, v_grid, vals)
