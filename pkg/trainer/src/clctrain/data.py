"""Paired-clip dataset loading in the mixer's on-disk format.

A dataset directory holds noisy/<id>.wav, clean/<id>.wav, and a
manifest.jsonl whose rows carry at least an "id" field.  Without a manifest
the noisy directory listing defines the ids.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .errors import DataError


@dataclass
class ClipPair:
    clip_id: str
    noisy: np.ndarray
    clean: np.ndarray


def _read_wav(path: Path, expect_rate: int) -> np.ndarray:
    try:
        rate, data = wavfile.read(path)
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise DataError(f"{path}: unreadable wav ({exc})") from exc
    if rate != expect_rate:
        raise DataError(f"{path}: sample rate {rate}, expected {expect_rate}")
    if data.ndim != 1:
        raise DataError(f"{path}: expected mono, got shape {data.shape}")
    if data.dtype == np.int16:
        return data.astype(np.float32) / 32768.0
    if data.dtype == np.float32:
        return data.astype(np.float32)
    raise DataError(f"{path}: unsupported sample format {data.dtype}")


def load_pairs(dataset_dir: str | Path, sample_rate: int = 16000) -> list[ClipPair]:
    root = Path(dataset_dir)
    noisy_dir = root / "noisy"
    clean_dir = root / "clean"
    manifest = root / "manifest.jsonl"
    if manifest.exists():
        ids = []
        for lineno, line in enumerate(manifest.read_text().splitlines(), start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{manifest}:{lineno}: bad JSON ({exc})") from exc
            if "id" not in row:
                raise DataError(f"{manifest}:{lineno}: row has no id field")
            ids.append(row["id"])
    else:
        ids = sorted(p.stem for p in noisy_dir.glob("*.wav"))
    if not ids:
        raise DataError(f"{root}: no clip pairs found")

    pairs = []
    for clip_id in ids:
        noisy = _read_wav(noisy_dir / f"{clip_id}.wav", sample_rate)
        clean = _read_wav(clean_dir / f"{clip_id}.wav", sample_rate)
        if len(noisy) != len(clean):
            raise DataError(
                f"{clip_id}: noisy has {len(noisy)} samples, clean {len(clean)}"
            )
        pairs.append(ClipPair(clip_id, noisy, clean))
    return pairs


def segment_pairs(
    pairs: list[ClipPair], segment_samples: int
) -> tuple[np.ndarray, np.ndarray]:
    """Cut pairs into equal-length segments and stack them.

    Clips shorter than the segment length are truncated to the shortest
    clip instead, so tiny toy sets still form one uniform batch axis.
    """
    shortest = min(len(p.noisy) for p in pairs)
    seg = min(segment_samples, shortest)
    if seg <= 0:
        raise DataError("empty clips in dataset")
    noisy_rows = []
    clean_rows = []
    for p in pairs:
        for start in range(0, len(p.noisy) - seg + 1, seg):
            noisy_rows.append(p.noisy[start : start + seg])
            clean_rows.append(p.clean[start : start + seg])
    return np.stack(noisy_rows), np.stack(clean_rows)
