"""Complex linear combination of the current and past STFT frames.

Each output bin is a complex linear combination of the same bin in the
newest `order` frames of a ring buffer: with one tap this degenerates to a
point-wise complex mask; extra taps let the combination cancel or pass
periodic structure inside a frequency band.  A damped least-squares solver
provides the per-bin optimal coefficients for tests and benchmarks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

LS_DAMPING = 1e-8


@dataclass
class ClcConfig:
    """Combination span: `order` taps, optional future offset `lookahead`."""

    order: int = 5
    lookahead: int = 0

    def __post_init__(self) -> None:
        if self.order < 1:
            raise ConfigError(f"order must be >= 1, got {self.order}")
        if self.lookahead >= self.order:
            raise ConfigError(
                f"lookahead must be < order, got lookahead={self.lookahead} order={self.order}"
            )


class SpectrumHistory:
    """Ring of the newest `order` spectra; row 0 is the newest frame.

    Pre-filled with zero spectra at stream start, so the first order-1
    outputs are a transient by construction.
    """

    def __init__(self, order: int, n_bins: int, dtype=np.complex128):
        if order < 1:
            raise ConfigError(f"order must be >= 1, got {order}")
        self._frames = np.zeros((order, n_bins), dtype=dtype)

    @property
    def frames(self) -> np.ndarray:
        return self._frames

    @property
    def order(self) -> int:
        return self._frames.shape[0]

    @property
    def n_bins(self) -> int:
        return self._frames.shape[1]

    def reset(self) -> None:
        self._frames[:] = 0

    def push(self, spectrum: np.ndarray) -> None:
        """Insert the newest frame at row 0, dropping the oldest."""
        if spectrum.shape != (self.n_bins,):
            raise ValueError(f"expected ({self.n_bins},) spectrum, got {spectrum.shape}")
        frames = self._frames
        for i in range(self.order - 1, 0, -1):
            frames[i] = frames[i - 1]
        frames[0] = spectrum


def apply_coeffs(coeffs: np.ndarray, history: SpectrumHistory | np.ndarray) -> np.ndarray:
    """Combine history rows with complex coefficients: out[f] = sum_i coeffs[i,f] * hist[i,f]."""
    frames = history.frames if isinstance(history, SpectrumHistory) else np.asarray(history)
    coeffs = np.asarray(coeffs)
    if coeffs.shape != frames.shape:
        raise ValueError(f"coefficient shape {coeffs.shape} != history shape {frames.shape}")
    return np.sum(coeffs * frames, axis=0)


def identity_coeffs(order: int, n_bins: int, tap: int = 0, dtype=np.complex128) -> np.ndarray:
    """Coefficients that pass the frame at `tap` through unchanged."""
    if not 0 <= tap < order:
        raise ValueError(f"tap must lie in [0, {order}), got {tap}")
    coeffs = np.zeros((order, n_bins), dtype=dtype)
    coeffs[tap, :] = 1.0
    return coeffs


def history_matrix(series: np.ndarray, order: int, lookahead: int = 0) -> tuple[np.ndarray, slice]:
    """Build per-frame history rows for one bin's time series.

    Returns (rows, valid) where rows[j, i] = series[k - i + lookahead] for
    output frame k = valid.start + j; `series[valid]` are the aligned
    targets.  Only frames whose full combination span lies inside the series
    are produced.
    """
    series = np.asarray(series)
    start = order - 1 - lookahead
    stop = len(series) - lookahead
    if stop <= start:
        raise ValueError(f"series too short for order {order} (need > {order - 1} frames)")
    rows = np.empty((stop - start, order), dtype=series.dtype)
    for i in range(order):
        rows[:, i] = series[start - i + lookahead : stop - i + lookahead]
    return rows, slice(start, stop)


def ls_optimal(history_rows: np.ndarray, targets: np.ndarray, damping: float = LS_DAMPING) -> np.ndarray:
    """Damped least-squares coefficients for one bin.

    Solves min_a sum_k |rows[k] . a - targets[k]|^2 via the normal equations
    with Tikhonov damping on the diagonal, so degenerate (silent) bins stay
    well-posed instead of failing.
    """
    rows = np.asarray(history_rows, dtype=np.complex128)
    targets = np.asarray(targets, dtype=np.complex128)
    if rows.ndim != 2:
        raise ValueError(f"expected (frames, order) history rows, got shape {rows.shape}")
    n_frames, order = rows.shape
    if targets.shape != (n_frames,):
        raise ValueError(f"targets shape {targets.shape} != ({n_frames},)")
    if n_frames < order:
        raise ValueError(f"need at least {order} frames, got {n_frames}")
    gram = rows.conj().T @ rows
    gram[np.diag_indices(order)] += damping
    return np.linalg.solve(gram, rows.conj().T @ targets)


def ls_residual(history_rows: np.ndarray, targets: np.ndarray, coeffs: np.ndarray) -> float:
    """Sum of squared combination errors for given coefficients."""
    err = np.asarray(history_rows) @ np.asarray(coeffs) - np.asarray(targets)
    return float(np.sum(np.abs(err) ** 2))
