"""clcden command line: enhance, mix, eval, and bench over WAV files.

Exit codes: 0 success, 1 usage, 2 I/O, 3 data/format, 4 real-time budget.
CLC_NUM_THREADS caps file-level parallelism in directory modes.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .dsp import PIPELINE_SAMPLE_RATE, AudioChunk
from .engine import Enhancer, benchmark
from .errors import ClcError, ConfigError, DataError
from .metrics import align_and_eval
from .mixer import build_testset, load_manifest
from .wavio import read_wav, write_wav_pcm16
from .weights_io import load_weights

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_DATA = 3
EXIT_RT_BUDGET = 4

BENCH_REFERENCE = {"ms_per_frame": 1.0, "cpu": "Core i5 1.6GHz"}


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; this tool reserves 2 for I/O."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _worker_count() -> int:
    env = os.environ.get("CLC_NUM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"CLC_NUM_THREADS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def _seconds_at_least_one(value: str) -> float:
    try:
        s = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number {value!r}")
    if s < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return s


def _positive_int(value: str) -> int:
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {value!r}")
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def _read_pipeline_wav(path: Path) -> np.ndarray:
    samples, rate = read_wav(path)
    if rate != PIPELINE_SAMPLE_RATE:
        raise ConfigError(f"{path}: sample rate {rate}, pipeline requires {PIPELINE_SAMPLE_RATE}")
    return samples


def _enhance_one(
    weights, in_path: Path, out_path: Path, chunk_samples: int, compensate: bool
) -> tuple[str, float]:
    samples = _read_pipeline_wav(in_path)
    enhancer = Enhancer(weights)
    out = np.empty(len(samples), dtype=np.float64)
    t0 = time.perf_counter()
    pos = 0
    while pos < len(samples):
        n = min(chunk_samples, len(samples) - pos)
        chunk = enhancer.process(AudioChunk(samples[pos : pos + n], PIPELINE_SAMPLE_RATE))
        out[pos : pos + n] = chunk.samples
        pos += n
    elapsed = time.perf_counter() - t0
    if compensate:
        out = out[enhancer.delay_samples :]
    write_wav_pcm16(out_path, out, PIPELINE_SAMPLE_RATE)
    duration = len(samples) / PIPELINE_SAMPLE_RATE
    rtf = elapsed / duration if duration > 0 else 0.0
    return in_path.name, rtf


def cmd_enhance(args) -> int:
    _, weights = load_weights(args.model)
    chunk_samples = max(1, PIPELINE_SAMPLE_RATE * args.chunk_ms // 1000)
    in_path = Path(args.input)
    out_path = Path(args.output)
    if in_path.is_dir():
        files = sorted(in_path.glob("*.wav"))
        if not files:
            raise DataError(f"{in_path}: no .wav files found")
        out_path.mkdir(parents=True, exist_ok=True)
        jobs = [(f, out_path / f.name) for f in files]
    else:
        if not in_path.is_file():
            raise FileNotFoundError(f"{in_path}: no such file")
        if out_path.is_dir():
            out_path = out_path / in_path.name
        jobs = [(in_path, out_path)]

    def work(job):
        src, dst = job
        return _enhance_one(weights, src, dst, chunk_samples, args.compensate_delay)

    workers = min(_worker_count(), len(jobs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, jobs))
    else:
        results = [work(j) for j in jobs]
    for name, rtf in results:
        print(f"{name}: rtf={rtf:.3f}")
    return EXIT_OK


def cmd_mix(args) -> int:
    specs = load_manifest(args.manifest, default_seed=args.seed)
    rows = build_testset(
        specs, args.speech_dir, args.noise_dir, args.out_dir, workers=_worker_count()
    )
    print(f"wrote {len(rows)} pairs to {args.out_dir}")
    return EXIT_OK


def cmd_eval(args) -> int:
    enh_dir = Path(args.enhanced)
    ref_dir = Path(args.reference)
    if not enh_dir.is_dir():
        raise FileNotFoundError(f"{enh_dir}: not a directory")
    if not ref_dir.is_dir():
        raise FileNotFoundError(f"{ref_dir}: not a directory")
    enh_names = {p.name for p in enh_dir.glob("*.wav")}
    ref_names = {p.name for p in ref_dir.glob("*.wav")}
    common = sorted(enh_names & ref_names)
    problems = False
    for name in sorted(enh_names - ref_names):
        print(f"unmatched (only in enhanced): {name}", file=sys.stderr)
        problems = True
    for name in sorted(ref_names - enh_names):
        print(f"unmatched (only in reference): {name}", file=sys.stderr)
        problems = True
    if not common:
        raise DataError("no filenames common to both directories")

    rows = []
    for name in common:
        enh = _read_pipeline_wav(enh_dir / name)
        ref = _read_pipeline_wav(ref_dir / name)
        try:
            result = align_and_eval(enh, ref, args.delay_samples)
        except DataError as exc:
            print(f"skipped {name}: {exc}", file=sys.stderr)
            problems = True
            continue
        rows.append(
            {
                "file": name,
                "si_sdr_db": result.si_sdr_db,
                "rmse": result.rmse,
                "delay_applied": result.delay_applied,
                "samples": result.samples,
                "exact_match": result.exact_match,
            }
        )
    if not rows:
        raise DataError("no evaluable pairs")
    mean_si = float(np.mean([r["si_sdr_db"] for r in rows]))
    mean_rmse = float(np.mean([r["rmse"] for r in rows]))
    with open(args.report, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
        fh.write(
            json.dumps(
                {"file": "__mean__", "si_sdr_db": mean_si, "rmse": mean_rmse, "count": len(rows)},
                sort_keys=True,
            )
            + "\n"
        )
    print(f"mean si_sdr_db={mean_si:.2f} rmse={mean_rmse:.6f} files={len(rows)}")
    return EXIT_DATA if problems else EXIT_OK


def cmd_bench(args) -> int:
    _, weights = load_weights(args.model)
    enhancer = Enhancer(weights)
    report = benchmark(enhancer, args.seconds)
    payload = {
        "mean_us": report.mean_us,
        "p95_us": report.p95_us,
        "max_us": report.max_us,
        "rtf": report.rtf,
        "frames": report.frames,
        "clipped_samples": report.clipped_samples,
        "reference": BENCH_REFERENCE,
    }
    print(json.dumps(payload, sort_keys=True))
    return EXIT_RT_BUDGET if report.rtf >= 1.0 else EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="clcden", description="Streaming speech enhancement toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("enhance", help="enhance WAV file(s) with a CLCW model")
    p.add_argument("--model", required=True, help="CLCW weight file")
    p.add_argument("--input", required=True, help="input WAV file or directory")
    p.add_argument("--output", required=True, help="output WAV file or directory")
    p.add_argument("--chunk-ms", type=_positive_int, default=10, help="streaming chunk size in ms")
    p.add_argument(
        "--compensate-delay",
        action="store_true",
        help="trim the algorithmic latency from the output",
    )
    p.set_defaults(fn=cmd_enhance)

    p = sub.add_parser("mix", help="render a manifest of mixture recipes")
    p.add_argument("--manifest", required=True, help="JSONL manifest of mixture recipes")
    p.add_argument("--speech-dir", required=True)
    p.add_argument("--noise-dir", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument(
        "--seed", type=int, default=0, help="base seed for manifest rows without one"
    )
    p.set_defaults(fn=cmd_mix)

    p = sub.add_parser("eval", help="score enhanced clips against references")
    p.add_argument("--enhanced", required=True, help="directory of enhanced WAVs")
    p.add_argument("--reference", required=True, help="directory of reference WAVs")
    p.add_argument("--delay-samples", type=int, default=320)
    p.add_argument("--report", required=True, help="JSONL report output path")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("bench", help="measure per-frame latency and real-time factor")
    p.add_argument("--model", required=True, help="CLCW weight file")
    p.add_argument("--seconds", type=_seconds_at_least_one, default=30.0)
    p.set_defaults(fn=cmd_bench)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (FileNotFoundError, PermissionError, IsADirectoryError) as exc:
        print(f"clcden: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ClcError as exc:
        print(f"clcden: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"clcden: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(run())
