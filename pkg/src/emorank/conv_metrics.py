"""Objective voice-conversion metrics: spectral distortion, duration, contours.

Mel cepstral distortion averages, over a DTW-aligned frame path,
(10 * sqrt(2) / ln 10) * (1/M) * sqrt(sum of squared coefficient
differences), excluding the energy coefficient c0 by default.  Duration
difference compares total voiced time between two recordings.  The contour
report bundles both with DTW-aligned F0 and energy trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import dct

from .dsp import Waveform, frame, mel_filterbank, next_pow2, power_spectrogram
from .errors import (
    DimensionMismatchError,
    EmptyInputError,
    InvalidParamsError,
    NonFiniteError,
    OrderMismatchError,
)
from .features import (
    DEFAULT_F0_MAX_HZ,
    DEFAULT_F0_MIN_HZ,
    DEFAULT_PITCH_FRAME_MS,
    DEFAULT_PITCH_HOP_MS,
    DEFAULT_SILENCE_RMS,
    DEFAULT_VOICING_THRESHOLD,
    energy_contour,
    pitch_contour,
)
from .kernels import dtw_table

MCD_ALPHA = 10.0 * np.sqrt(2.0) / np.log(10.0)
DEFAULT_MCEP_ORDER = 24
DEFAULT_MCEP_BANDS = 40
DEFAULT_MCEP_FRAME_MS = 25.0
DEFAULT_MCEP_HOP_MS = 10.0
DDUR_MODES = ("voiced", "span")


@dataclass(eq=False)
class McepSequence:
    """Mel cepstral coefficients c0..order, one row per frame."""

    coeffs: np.ndarray
    frame_shift_ms: float

    @property
    def order(self) -> int:
        return self.coeffs.shape[1] - 1

    @property
    def n_frames(self) -> int:
        return self.coeffs.shape[0]


@dataclass(eq=False)
class AlignmentPath:
    """Monotone index pairs from (0, 0) to (n-1, m-1) plus total cost."""

    pairs: np.ndarray
    total_cost: float

    def __len__(self) -> int:
        return self.pairs.shape[0]


@dataclass(eq=False)
class EvaluationReport:
    """Per-pair conversion metrics with aligned prosody contours."""

    mcd_db: float
    ddur_s: float
    n_aligned_frames: int
    f0_conv: np.ndarray
    f0_ref: np.ndarray
    energy_conv: np.ndarray
    energy_ref: np.ndarray
    f0_path: np.ndarray
    energy_path: np.ndarray
    frame_shift_ms: float

    @property
    def aligned_f0(self) -> np.ndarray:
        """Columns (i, j, f0_conv[i], f0_ref[j]) along the F0 alignment."""
        i = self.f0_path[:, 0]
        j = self.f0_path[:, 1]
        return np.column_stack([i, j, self.f0_conv[i], self.f0_ref[j]])

    @property
    def aligned_energy(self) -> np.ndarray:
        """Columns (i, j, energy_conv[i], energy_ref[j]) along the energy alignment."""
        i = self.energy_path[:, 0]
        j = self.energy_path[:, 1]
        return np.column_stack([i, j, self.energy_conv[i], self.energy_ref[j]])

    def to_dict(self) -> dict:
        return {
            "mcd_db": float(self.mcd_db),
            "ddur_s": float(self.ddur_s),
            "n_aligned_frames": int(self.n_aligned_frames),
            "frame_shift_ms": float(self.frame_shift_ms),
            "aligned_f0": [[int(r[0]), int(r[1]), float(r[2]), float(r[3])]
                           for r in self.aligned_f0],
            "aligned_energy": [[int(r[0]), int(r[1]), float(r[2]), float(r[3])]
                               for r in self.aligned_energy],
        }


def mcep(waveform: Waveform, order: int = DEFAULT_MCEP_ORDER,
         frame_ms: float = DEFAULT_MCEP_FRAME_MS,
         hop_ms: float = DEFAULT_MCEP_HOP_MS,
         n_bands: int = DEFAULT_MCEP_BANDS,
         floor: float = 1e-10) -> McepSequence:
    """Mel cepstra: orthonormal DCT-II of the log Mel power spectrum."""
    if order < 1 or order >= n_bands:
        raise InvalidParamsError(f"order must be in [1, {n_bands - 1}], got {order}")
    sr = waveform.sample_rate
    frame_len = int(round(sr * frame_ms / 1000.0))
    hop = int(round(sr * hop_ms / 1000.0))
    frames = frame(waveform, frame_len, hop)
    power = power_spectrogram(frames, next_pow2(frame_len))
    bank = mel_filterbank(n_bands, next_pow2(frame_len), sr)
    log_mel = np.log(np.maximum(power @ bank.weights.T, floor))
    coeffs = dct(log_mel, type=2, norm="ortho", axis=1)[:, : order + 1]
    return McepSequence(coeffs, hop_ms)


def _as_sequence(x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise EmptyInputError("alignment input must be a non-empty sequence")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError("alignment input contains non-finite values")
    return arr


def dtw_align(a, b, distance: str = "euclidean") -> AlignmentPath:
    """Dynamic time warping with steps (1,0), (0,1), (1,1).

    Ties during backtracking prefer the diagonal step, then advancing the
    first sequence.  Cost is the Euclidean distance between frame vectors.
    """
    if distance != "euclidean":
        raise InvalidParamsError(f"unsupported distance {distance!r}")
    a = _as_sequence(a)
    b = _as_sequence(b)
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatchError(
            f"sequences have different widths: {a.shape[1]} vs {b.shape[1]}"
        )
    diff = a[:, None, :] - b[None, :, :]
    cost = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    table = dtw_table(cost)

    i, j = a.shape[0] - 1, b.shape[0] - 1
    path = [(i, j)]
    while i > 0 or j > 0:
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            diag, up, left = table[i - 1, j - 1], table[i - 1, j], table[i, j - 1]
            best = min(diag, up, left)
            if diag == best:
                i, j = i - 1, j - 1
            elif up == best:
                i -= 1
            else:
                j -= 1
        path.append((i, j))
    path.reverse()
    return AlignmentPath(np.array(path, dtype=np.int64), float(table[-1, -1]))


def mcd(a: McepSequence, b: McepSequence, include_c0: bool = False) -> float:
    """Mean Mel cepstral distortion in dB over the DTW-aligned path."""
    if a.order != b.order:
        raise OrderMismatchError(f"cepstral orders differ: {a.order} vs {b.order}")
    start = 0 if include_c0 else 1
    ca = a.coeffs[:, start:]
    cb = b.coeffs[:, start:]
    n_coeff = ca.shape[1]
    path = dtw_align(ca, cb).pairs
    diff = ca[path[:, 0]] - cb[path[:, 1]]
    per_frame = MCD_ALPHA / n_coeff * np.sqrt(np.einsum("ij,ij->i", diff, diff))
    return float(per_frame.mean())


def _voiced_duration_s(waveform: Waveform, mode: str, **pitch_kwargs) -> float:
    contour = pitch_contour(waveform, **pitch_kwargs)
    hop_s = contour.frame_shift_ms / 1000.0
    if mode == "voiced":
        return float(contour.voiced.sum()) * hop_s
    where = np.flatnonzero(contour.voiced)
    if where.size == 0:
        return 0.0
    return float(where[-1] - where[0] + 1) * hop_s


def ddur(converted: Waveform, reference: Waveform, mode: str = "voiced",
         **pitch_kwargs) -> float:
    """Absolute voiced-duration difference in seconds.

    Mode "voiced" counts all voiced frames; mode "span" measures first to
    last voiced frame inclusive.
    """
    if mode not in DDUR_MODES:
        raise InvalidParamsError(f"mode must be one of {DDUR_MODES}, got {mode!r}")
    conv = _voiced_duration_s(converted, mode, **pitch_kwargs)
    ref = _voiced_duration_s(reference, mode, **pitch_kwargs)
    return abs(ref - conv)


def contour_report(converted: Waveform, reference: Waveform,
                   mcep_order: int = DEFAULT_MCEP_ORDER,
                   ddur_mode: str = "voiced",
                   frame_ms: float = DEFAULT_PITCH_FRAME_MS,
                   hop_ms: float = DEFAULT_PITCH_HOP_MS,
                   fmin: float = DEFAULT_F0_MIN_HZ,
                   fmax: float = DEFAULT_F0_MAX_HZ,
                   voicing_threshold: float = DEFAULT_VOICING_THRESHOLD,
                   silence_rms: float = DEFAULT_SILENCE_RMS) -> EvaluationReport:
    """Evaluate one converted/reference pair.

    F0 and energy contours share the pitch framing so their frame indices
    are comparable; each contour is DTW-aligned on its own.  The reported
    n_aligned_frames is the F0 path length.
    """
    pitch_kwargs = dict(frame_ms=frame_ms, hop_ms=hop_ms, fmin=fmin, fmax=fmax,
                        voicing_threshold=voicing_threshold, silence_rms=silence_rms)
    f0_conv = pitch_contour(converted, **pitch_kwargs)
    f0_ref = pitch_contour(reference, **pitch_kwargs)
    en_conv = energy_contour(converted, frame_ms=frame_ms, hop_ms=hop_ms)
    en_ref = energy_contour(reference, frame_ms=frame_ms, hop_ms=hop_ms)

    f0_path = dtw_align(f0_conv.f0_hz, f0_ref.f0_hz)
    en_path = dtw_align(en_conv.energy, en_ref.energy)
    distortion = mcd(mcep(converted, order=mcep_order), mcep(reference, order=mcep_order))
    duration_gap = ddur(converted, reference, mode=ddur_mode, **pitch_kwargs)

    return EvaluationReport(
        mcd_db=distortion,
        ddur_s=duration_gap,
        n_aligned_frames=len(f0_path),
        f0_conv=f0_conv.f0_hz,
        f0_ref=f0_ref.f0_hz,
        energy_conv=en_conv.energy,
        energy_ref=en_ref.energy,
        f0_path=f0_path.pairs,
        energy_path=en_path.pairs,
        frame_shift_ms=hop_ms,
    )


def write_contour_csv(report: EvaluationReport, path) -> None:
    """Write aligned contours as CSV along the F0 alignment path.

    Energy columns reuse the F0 path indices, which is valid because both
    contours are computed on the same framing.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("path_idx,i,j,f0_conv,f0_ref,energy_conv,energy_ref\n")
        for idx, (i, j) in enumerate(report.f0_path):
            row = [str(idx), str(int(i)), str(int(j)),
                   repr(float(report.f0_conv[i])), repr(float(report.f0_ref[j])),
                   repr(float(report.energy_conv[i])), repr(float(report.energy_ref[j]))]
            handle.write(",".join(row) + "\n")
