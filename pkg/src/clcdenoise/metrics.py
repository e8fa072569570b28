"""Scale-invariant SDR and related evaluation helpers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError

SI_SDR_CAP_DB = 100.0
_RESIDUAL_REL_FLOOR = 1e-12
MIN_EVAL_SAMPLES = 1600


def si_sdr(estimate: np.ndarray, reference: np.ndarray) -> float:
    """Scale-invariant SDR in dB.

    Both signals are mean-subtracted, the reference is rescaled to the
    projection of the estimate onto it, and the ratio of target power to
    residual power is returned in dB.  A residual below 1e-12 of the target
    power means the estimate is a rescaled reference up to rounding; that
    returns +inf, which reporting layers cap at 100 dB.
    """
    est = np.asarray(estimate, dtype=np.float64)
    ref = np.asarray(reference, dtype=np.float64)
    if est.shape != ref.shape:
        raise ValueError(f"shape mismatch: estimate {est.shape} vs reference {ref.shape}")
    if est.ndim != 1:
        raise ValueError("si_sdr expects 1-D signals")
    if not (np.all(np.isfinite(est)) and np.all(np.isfinite(ref))):
        raise DataError("si_sdr inputs must be finite")
    est = est - est.mean()
    ref = ref - ref.mean()
    ref_energy = np.dot(ref, ref)
    if ref_energy <= 0.0:
        raise DataError("si_sdr reference is silent after mean removal")
    target = (np.dot(est, ref) / ref_energy) * ref
    target_energy = np.dot(target, target)
    if target_energy <= 0.0:
        return -np.inf
    residual = est - target
    residual_energy = np.dot(residual, residual)
    if residual_energy <= _RESIDUAL_REL_FLOOR * target_energy:
        return np.inf
    return 10.0 * np.log10(target_energy / residual_energy)


def rmse(estimate: np.ndarray, reference: np.ndarray) -> float:
    est = np.asarray(estimate, dtype=np.float64)
    ref = np.asarray(reference, dtype=np.float64)
    if est.shape != ref.shape:
        raise ValueError(f"shape mismatch: estimate {est.shape} vs reference {ref.shape}")
    return float(np.sqrt(np.mean((est - ref) ** 2)))


@dataclass
class EvalResult:
    si_sdr_db: float  # capped at 100 dB for reporting
    rmse: float
    delay_applied: int
    samples: int
    exact_match: bool  # True when the uncapped SI-SDR was the +inf sentinel


def capped_si_sdr(value: float) -> tuple[float, bool]:
    """Cap the +inf sentinel at 100 dB; the flag marks an exact (rescaled) match."""
    if np.isinf(value) and value > 0:
        return SI_SDR_CAP_DB, True
    return float(value), False


def align_and_eval(
    enhanced: np.ndarray, reference: np.ndarray, delay_samples: int
) -> EvalResult:
    """Trim the pipeline delay off the enhanced signal, then score the overlap.

    enhanced[delay:] is compared against reference[:]; the common length must
    be at least MIN_EVAL_SAMPLES (0.1 s at 16 kHz) or the comparison is
    rejected as having insufficient data.
    """
    if delay_samples < 0:
        raise ValueError("delay_samples must be >= 0")
    enh = np.asarray(enhanced, dtype=np.float64)[delay_samples:]
    ref = np.asarray(reference, dtype=np.float64)
    n = min(len(enh), len(ref))
    if n < MIN_EVAL_SAMPLES:
        raise DataError(
            f"insufficient overlap for evaluation: {n} samples after removing "
            f"{delay_samples}-sample delay, need at least {MIN_EVAL_SAMPLES}"
        )
    enh = enh[:n]
    ref = ref[:n]
    raw = si_sdr(enh, ref)
    value, exact = capped_si_sdr(raw)
    return EvalResult(
        si_sdr_db=value,
        rmse=rmse(enh, ref),
        delay_applied=delay_samples,
        samples=n,
        exact_match=exact,
    )
