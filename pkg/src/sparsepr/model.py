"""Synthetic data model: sparse signals, Gaussian measurements, noise.

The measurement model is magnitude-only: each row a_i is a real or complex
Gaussian sampling vector and the datum is q_i = |<a_i, x>| (plus optional
additive Gaussian noise on the amplitudes).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .numerics import COMPLEX, REAL, check_mode, gaussian

_MAGIC_SIGNAL = "sparsepr-signal"
_MAGIC_ENSEMBLE = "sparsepr-ensemble"
_FORMAT_VERSION = 1


@dataclass(frozen=True)
class NoiseSpec:
    """Additive amplitude noise level; snr_db=None (or +inf) is noiseless."""

    snr_db: float | None = None

    @property
    def noiseless(self) -> bool:
        return self.snr_db is None or np.isinf(self.snr_db)

    def __post_init__(self):
        if self.snr_db is not None and np.isnan(self.snr_db):
            raise ValueError("snr_db must be finite when present")


@dataclass(frozen=True)
class SparseSignal:
    """Ground-truth k-sparse vector with known support."""

    vector: np.ndarray
    support: np.ndarray
    k: int

    def __post_init__(self):
        n = self.vector.shape[0]
        if not 1 <= self.k <= n:
            raise ValueError(f"k must satisfy 1 <= k <= {n}, got {self.k}")
        if not np.all(np.isfinite(self.vector)):
            raise ValueError("signal entries must be finite")
        nz = np.flatnonzero(self.vector)
        if len(self.support) != self.k or not np.array_equal(nz, self.support):
            raise ValueError("vector must be nonzero exactly on support")

    @property
    def n(self) -> int:
        return self.vector.shape[0]

    @property
    def mode(self) -> str:
        return REAL if np.isrealobj(self.vector) else COMPLEX


@dataclass(frozen=True)
class MeasurementEnsemble:
    """Sampling rows a_i plus amplitude data q_i.

    clean_amplitudes holds |<a_i, x>| for the generating signal; q equals
    it in the noiseless case.  clipped counts noisy amplitudes that were
    clamped at zero.
    """

    rows: np.ndarray
    q: np.ndarray
    clean_amplitudes: np.ndarray
    mode: str
    clipped: int = 0

    def __post_init__(self):
        if self.rows.ndim != 2:
            raise ValueError("rows must be an (m, n) array")
        m = self.rows.shape[0]
        if self.q.shape != (m,) or self.clean_amplitudes.shape != (m,):
            raise ValueError("q and clean_amplitudes must have length m")
        if np.any(self.q < 0):
            raise ValueError("amplitudes must be nonnegative")

    @property
    def m(self) -> int:
        return self.rows.shape[0]

    @property
    def n(self) -> int:
        return self.rows.shape[1]


def amplitudes(rows: np.ndarray, x: np.ndarray) -> np.ndarray:
    """|<a_i, x>| = |a_i^H x| for every row."""
    return np.abs(rows.conj() @ x)


def make_signal(n: int, k: int, seed, mode: str = REAL) -> SparseSignal:
    """Random k-sparse signal: uniform support, i.i.d. Gaussian nonzeros.

    Complex nonzeros are N(0,1) + j*N(0,1) per entry (twice the per-entry
    variance of the complex sampling rows, deliberately).
    """
    check_mode(mode)
    if not 1 <= k <= n:
        raise ValueError(f"k must satisfy 1 <= k <= n = {n}, got {k}")
    rng = np.random.default_rng(seed)
    support = np.sort(rng.choice(n, size=k, replace=False))
    if mode == REAL:
        values = rng.standard_normal(k)
        vector = np.zeros(n)
    else:
        values = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        vector = np.zeros(n, dtype=np.complex128)
    vector[support] = values
    return SparseSignal(vector=vector, support=support, k=k)


def measure(
    x: SparseSignal,
    m: int,
    seed,
    mode: str | None = None,
    noise: NoiseSpec = NoiseSpec(),
) -> MeasurementEnsemble:
    """Draw m Gaussian sampling rows and the amplitude data for signal x.

    Noisy amplitudes are q_i = max(0, |<a_i,x>| + eta_i) with
    eta_i ~ N(0, sigma^2) and sigma^2 = ||clean||^2 / (m * 10^(snr/10)),
    so the stated SNR is the amplitude-domain power ratio.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if mode is None:
        mode = x.mode
    check_mode(mode)
    rng = np.random.default_rng(seed)
    rows = gaussian(rng, (m, x.n), mode)
    clean = amplitudes(rows, x.vector)
    clipped = 0
    if noise.noiseless:
        q = clean.copy()
    else:
        sigma2 = float(clean @ clean) / (m * 10.0 ** (noise.snr_db / 10.0))
        eta = rng.standard_normal(m) * np.sqrt(sigma2)
        q = clean + eta
        clipped = int(np.count_nonzero(q < 0))
        q = np.maximum(q, 0.0)
    return MeasurementEnsemble(
        rows=rows, q=q, clean_amplitudes=clean, mode=mode, clipped=clipped
    )


# ---------------------------------------------------------------------------
# Flat binary serialization (for the CLI reconstruct workflow).
#
# Layout: one ASCII JSON header line terminated by '\n', then little-endian
# float64 payload.  Complex data is stored row-major with interleaved
# real/imag parts (numpy's native complex128 layout).
# ---------------------------------------------------------------------------


def _write_blob(path, header: dict, arrays) -> None:
    with open(path, "wb") as fh:
        fh.write((json.dumps(header, sort_keys=True) + "\n").encode("ascii"))
        for arr in arrays:
            fh.write(np.ascontiguousarray(arr).astype("<c16" if np.iscomplexobj(arr) else "<f8").tobytes())


def _read_blob(path, magic: str):
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("ascii"))
        payload = fh.read()
    if header.get("format") != magic or header.get("version") != _FORMAT_VERSION:
        raise ValueError(f"{path}: not a {magic} v{_FORMAT_VERSION} file")
    return header, payload


def save_signal(path, signal: SparseSignal) -> None:
    header = {
        "format": _MAGIC_SIGNAL,
        "version": _FORMAT_VERSION,
        "mode": signal.mode,
        "n": signal.n,
        "k": signal.k,
    }
    _write_blob(path, header, [signal.vector, signal.support.astype(np.float64)])


def load_signal(path) -> SparseSignal:
    header, payload = _read_blob(path, _MAGIC_SIGNAL)
    n, k, mode = header["n"], header["k"], header["mode"]
    dtype = "<f8" if mode == REAL else "<c16"
    vector = np.frombuffer(payload, dtype=dtype, count=n).copy()
    offset = n * np.dtype(dtype).itemsize
    support = np.frombuffer(payload, dtype="<f8", offset=offset, count=k).astype(np.intp)
    return SparseSignal(vector=vector, support=support, k=k)


def save_ensemble(path, ens: MeasurementEnsemble) -> None:
    header = {
        "format": _MAGIC_ENSEMBLE,
        "version": _FORMAT_VERSION,
        "mode": ens.mode,
        "m": ens.m,
        "n": ens.n,
        "clipped": ens.clipped,
    }
    _write_blob(path, header, [ens.rows, ens.q, ens.clean_amplitudes])


def load_ensemble(path) -> MeasurementEnsemble:
    header, payload = _read_blob(path, _MAGIC_ENSEMBLE)
    m, n, mode = header["m"], header["n"], header["mode"]
    row_dtype = "<f8" if mode == REAL else "<c16"
    rows = np.frombuffer(payload, dtype=row_dtype, count=m * n).reshape(m, n).copy()
    offset = m * n * np.dtype(row_dtype).itemsize
    q = np.frombuffer(payload, dtype="<f8", offset=offset, count=m).copy()
    offset += m * 8
    clean = np.frombuffer(payload, dtype="<f8", offset=offset, count=m).copy()
    return MeasurementEnsemble(
        rows=rows, q=q, clean_amplitudes=clean, mode=mode,
        clipped=int(header.get("clipped", 0)),
    )
