"""Hot numeric kernels with numba-jitted and pure-NumPy implementations.

The two data-dependent loops that dominate runtime live here: the dynamic
programming table for time alignment and the per-frame normalized
autocorrelation used by pitch tracking.  Both exist twice, once jitted and
once in plain NumPy.  The jitted path is used when numba imports cleanly
and the EMORANK_NO_NUMBA environment variable is unset or falsy; the
module-level aliases dtw_table and autocorr_matrix point at the active
backend.  Both spellings stay importable so tests and benchmarks can
compare them directly.
"""

from __future__ import annotations

import os

import numpy as np

ENV_FLAG = "EMORANK_NO_NUMBA"

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def _flag_disables_numba() -> bool:
    value = os.environ.get(ENV_FLAG, "").strip().lower()
    return value not in ("", "0", "false", "no")


def dtw_table_numpy(cost: np.ndarray) -> np.ndarray:
    """Accumulated-cost table for steps {(1,0), (0,1), (1,1)}."""
    n, m = cost.shape
    table = np.empty((n, m))
    table[0, :] = np.cumsum(cost[0, :])
    table[:, 0] = np.cumsum(cost[:, 0])
    for i in range(1, n):
        row = table[i]
        prev = table[i - 1]
        for j in range(1, m):
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if row[j - 1] < best:
                best = row[j - 1]
            row[j] = cost[i, j] + best
    return table


def autocorr_matrix_numpy(frames: np.ndarray, lag_min: int, lag_max: int) -> np.ndarray:
    """Normalized autocorrelation per frame for lags lag_min..lag_max.

    r[f, k] = sum(x[n] x[n+tau]) / sqrt(sum_head(x^2) * sum_tail(x^2))
    with tau = lag_min + k, zero where either energy term vanishes.
    """
    n_frames, frame_len = frames.shape
    n_lags = lag_max - lag_min + 1
    sq = frames * frames
    prefix = np.zeros((n_frames, frame_len + 1))
    np.cumsum(sq, axis=1, out=prefix[:, 1:])
    total = prefix[:, frame_len]
    out = np.zeros((n_frames, n_lags))
    for k in range(n_lags):
        tau = lag_min + k
        num = np.einsum("ij,ij->i", frames[:, : frame_len - tau], frames[:, tau:])
        head = prefix[:, frame_len - tau]
        tail = total - prefix[:, tau]
        denom = np.sqrt(head * tail)
        np.divide(num, denom, out=out[:, k], where=denom > 0.0)
    return out


if HAVE_NUMBA:

    @njit(cache=True)
    def dtw_table_numba(cost):  # pragma: no cover - exercised via dispatch
        n, m = cost.shape
        table = np.empty((n, m))
        table[0, 0] = cost[0, 0]
        for j in range(1, m):
            table[0, j] = table[0, j - 1] + cost[0, j]
        for i in range(1, n):
            table[i, 0] = table[i - 1, 0] + cost[i, 0]
            for j in range(1, m):
                best = table[i - 1, j - 1]
                if table[i - 1, j] < best:
                    best = table[i - 1, j]
                if table[i, j - 1] < best:
                    best = table[i, j - 1]
                table[i, j] = cost[i, j] + best
        return table

    @njit(cache=True)
    def autocorr_matrix_numba(frames, lag_min, lag_max):  # pragma: no cover
        n_frames, frame_len = frames.shape
        n_lags = lag_max - lag_min + 1
        out = np.zeros((n_frames, n_lags))
        for f in range(n_frames):
            prefix = np.empty(frame_len + 1)
            prefix[0] = 0.0
            for n in range(frame_len):
                prefix[n + 1] = prefix[n] + frames[f, n] * frames[f, n]
            total = prefix[frame_len]
            for k in range(n_lags):
                tau = lag_min + k
                num = 0.0
                for n in range(frame_len - tau):
                    num += frames[f, n] * frames[f, n + tau]
                denom = prefix[frame_len - tau] * (total - prefix[tau])
                if denom > 0.0:
                    out[f, k] = num / np.sqrt(denom)
        return out

else:
    dtw_table_numba = None
    autocorr_matrix_numba = None


USE_NUMBA = HAVE_NUMBA and not _flag_disables_numba()

if USE_NUMBA:
    dtw_table = dtw_table_numba
    autocorr_matrix = autocorr_matrix_numba
else:
    dtw_table = dtw_table_numpy
    autocorr_matrix = autocorr_matrix_numpy


def active_backend() -> str:
    """Name of the backend the package is running on."""
    return "numba" if USE_NUMBA else "numpy"
