"""Deterministic synthetic mixture generation.

Every mixture is fully described by a MixSpec: re-running the same spec on
the same source files reproduces the output byte-for-byte.  Noise clips are
circularly tiled from a seeded start offset, the summed noise is rescaled to
hit the target SNR on full-clip mean power, and the gain factor applies to
noisy and clean alike so the pair stays aligned.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .dsp import PIPELINE_SAMPLE_RATE, AudioChunk
from .errors import ConfigError, DataError
from .wavio import read_wav, write_wav_pcm16

SNR_CHOICES = (-5, 0, 5, 10, 20, 40)
GAIN_CHOICES = (-6, 0, 6)
MAX_NOISES = 4
SPEECH_RMS_FLOOR = 1e-6


@dataclass
class MixSpec:
    """Recipe for one synthetic noisy clip; enough to reproduce it exactly."""

    speech_id: str
    noise_ids: list[str]
    snr_db: int
    gain_db: int
    seed: int

    def __post_init__(self):
        if not 1 <= len(self.noise_ids) <= MAX_NOISES:
            raise ConfigError(f"noise_ids must have 1..{MAX_NOISES} entries, got {len(self.noise_ids)}")
        if self.snr_db not in SNR_CHOICES:
            raise ConfigError(f"snr_db must be one of {SNR_CHOICES}, got {self.snr_db}")
        if self.gain_db not in GAIN_CHOICES:
            raise ConfigError(f"gain_db must be one of {GAIN_CHOICES}, got {self.gain_db}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in u64")
        # choices are whole dB values; normalize 0.0 -> 0 so manifests
        # serialize identically no matter how the spec was constructed
        self.snr_db = int(self.snr_db)
        self.gain_db = int(self.gain_db)


@dataclass
class MixResult:
    noisy: AudioChunk
    clean: AudioChunk
    achieved_snr_db: float
    peak_scale: float


def measure_snr(clean: np.ndarray, noise: np.ndarray) -> float:
    """Energy-ratio SNR in dB: 10*log10(sum(clean^2)/sum(noise^2))."""
    c = np.asarray(clean, dtype=np.float64)
    n = np.asarray(noise, dtype=np.float64)
    ce = np.dot(c, c)
    ne = np.dot(n, n)
    if ce <= 0.0:
        raise DataError("measure_snr: clean signal has zero energy")
    if ne <= 0.0:
        return np.inf
    return float(10.0 * np.log10(ce / ne))


def _tile_from(noise: np.ndarray, length: int, offset: int) -> np.ndarray:
    """Circularly read `length` samples starting at `offset`."""
    idx = (offset + np.arange(length)) % len(noise)
    return noise[idx]


def mix(spec: MixSpec, speech: AudioChunk, noises: list[AudioChunk]) -> MixResult:
    """Combine speech with noises at the spec's SNR and gain.

    The per-noise start offsets come from a generator seeded with spec.seed,
    so the mixture is a pure function of (spec, inputs).
    """
    if len(noises) != len(spec.noise_ids):
        raise ValueError(f"expected {len(spec.noise_ids)} noise clips, got {len(noises)}")
    for chunk in (speech, *noises):
        if chunk.sample_rate != PIPELINE_SAMPLE_RATE:
            raise ConfigError(f"mixer inputs must be {PIPELINE_SAMPLE_RATE} Hz, got {chunk.sample_rate}")
    s = np.asarray(speech.samples, dtype=np.float64)
    if np.sqrt(np.mean(s * s)) <= SPEECH_RMS_FLOOR:
        raise DataError(f"speech {spec.speech_id!r} is silent, SNR undefined")

    rng = np.random.default_rng(spec.seed)
    total_noise = np.zeros(len(s), dtype=np.float64)
    for chunk in noises:
        n = np.asarray(chunk.samples, dtype=np.float64)
        if len(n) == 0:
            raise DataError("empty noise clip")
        offset = int(rng.integers(0, len(n)))
        total_noise += _tile_from(n, len(s), offset)

    p_speech = np.mean(s * s)
    p_noise = np.mean(total_noise * total_noise)
    if p_noise <= 0.0:
        raise DataError("all noise clips are silent, SNR undefined")
    # scale noise so 10*log10(p_speech / p_noise_scaled) == snr_db
    noise_scale = np.sqrt(p_speech / (p_noise * 10.0 ** (spec.snr_db / 10.0)))
    total_noise *= noise_scale

    gain = 10.0 ** (spec.gain_db / 20.0)
    clean = s * gain
    noisy = (s + total_noise) * gain

    peak = np.max(np.abs(noisy))
    peak_scale = 1.0
    if peak > 1.0:
        peak_scale = 1.0 / peak
        noisy *= peak_scale
        clean *= peak_scale

    achieved = measure_snr(clean, noisy - clean)
    return MixResult(
        noisy=AudioChunk(noisy, PIPELINE_SAMPLE_RATE),
        clean=AudioChunk(clean, PIPELINE_SAMPLE_RATE),
        achieved_snr_db=achieved,
        peak_scale=peak_scale,
    )


def mix_id(index: int, spec: MixSpec) -> str:
    return f"{index:05d}_{spec.speech_id}"


def load_manifest(path: str | Path, default_seed: int = 0) -> list[MixSpec]:
    """Parse a JSONL manifest of MixSpecs; entries without a seed get default_seed + line index."""
    specs = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: line {i + 1} is not valid JSON ({exc})") from exc
            try:
                specs.append(
                    MixSpec(
                        speech_id=row["speech_id"],
                        noise_ids=list(row["noise_ids"]),
                        snr_db=int(row["snr_db"]),
                        gain_db=int(row["gain_db"]),
                        seed=int(row.get("seed", default_seed + i)),
                    )
                )
            except KeyError as exc:
                raise DataError(f"{path}: line {i + 1} missing field {exc}") from exc
    return specs


def build_testset(
    specs: list[MixSpec],
    speech_dir: str | Path,
    noise_dir: str | Path,
    out_dir: str | Path,
    workers: int = 1,
) -> list[dict]:
    """Render every spec to out_dir/{noisy,clean}/<id>.wav plus a JSONL manifest.

    All referenced source files are checked up front and every missing path is
    reported in one error.  Rows are written in spec order regardless of the
    worker count, so regeneration is byte-identical.
    """
    speech_dir = Path(speech_dir)
    noise_dir = Path(noise_dir)
    out_dir = Path(out_dir)

    missing = []
    for spec in specs:
        p = speech_dir / f"{spec.speech_id}.wav"
        if not p.is_file():
            missing.append(str(p))
        for nid in spec.noise_ids:
            p = noise_dir / f"{nid}.wav"
            if not p.is_file():
                missing.append(str(p))
    if missing:
        unique = sorted(set(missing))
        raise DataError("missing input files:\n" + "\n".join(unique))

    noisy_dir = out_dir / "noisy"
    clean_dir = out_dir / "clean"
    noisy_dir.mkdir(parents=True, exist_ok=True)
    clean_dir.mkdir(parents=True, exist_ok=True)

    def render(item: tuple[int, MixSpec]) -> dict:
        idx, spec = item
        speech, rate = read_wav(speech_dir / f"{spec.speech_id}.wav")
        noises = []
        for nid in spec.noise_ids:
            n, nrate = read_wav(noise_dir / f"{nid}.wav")
            noises.append(AudioChunk(n, nrate))
        result = mix(spec, AudioChunk(speech, rate), noises)
        cid = mix_id(idx, spec)
        write_wav_pcm16(noisy_dir / f"{cid}.wav", result.noisy.samples, PIPELINE_SAMPLE_RATE)
        write_wav_pcm16(clean_dir / f"{cid}.wav", result.clean.samples, PIPELINE_SAMPLE_RATE)
        row = dict(asdict(spec))
        row["id"] = cid
        row["achieved_snr_db"] = result.achieved_snr_db
        row["peak_scale"] = result.peak_scale
        return row

    items = list(enumerate(specs))
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(render, items))
    else:
        rows = [render(item) for item in items]

    manifest_path = out_dir / "manifest.jsonl"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    return rows
