"""Command-line harness: mix two speech files, separate, evaluate.

Subcommands
    mix         decimate two mono WAVs to 8 kHz, mix them with a 2x2
                matrix, write mix1.wav/mix2.wav plus a manifest
    separate    run one separation method on a mixture pair, write
                estimate WAVs and a JSON-lines run record
    evaluate    score two estimates against two references, print the
                comparison table
    experiment  mix -> separate with every requested method -> evaluate,
                emit one combined report (text table + JSON lines)

All artifacts are written atomically (temp file + rename) and contain no
timestamps, so a fixed seed reproduces byte-identical outputs. The seed
falls back to the BSS_UWPD_SEED environment variable, then 42.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .audio_io import MixingMatrix, Signal, decimate_to_8k, mix, read_wav, write_wav
from .errors import BssError, DegenerateInputError, ParameterError
from .metrics import evaluate_pair
from .pipeline import (
    METHOD_FASTICA,
    METHOD_SOBI,
    SeparationResult,
    separate_baseline,
    separate_proposed,
)
from .separators import DEFAULT_SOBI_LAGS, IcaOptions

DEFAULT_MATRIX = ((2.0, 1.0), (1.0, 1.0))
MIX_PEAK = 0.9
METHOD_NAMES = ("proposed", "fastica", "sobi")

METRIC_COLUMNS = ("SIR", "SDR", "segSNR", "overallSNR")


@dataclass(frozen=True)
class ExperimentConfig:
    source_paths: tuple
    matrix: MixingMatrix
    methods: tuple
    seed: int
    output_dir: Path

    def __post_init__(self):
        if not self.methods:
            raise ParameterError("need at least one method")
        for name in self.methods:
            if name not in METHOD_NAMES:
                raise ParameterError(f"unknown method {name!r}")
        if len(set(map(str, self.source_paths))) != 2:
            raise ParameterError("source paths must be two distinct files")


def _atomic_write_bytes(path: Path, data: bytes):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def _atomic_write_text(path: Path, text: str):
    _atomic_write_bytes(path, text.encode())


def _atomic_write_wav(signal: Signal, path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    os.close(fd)
    try:
        write_wav(signal, tmp_name)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def _parse_matrix(text: str) -> MixingMatrix:
    parts = text.split(",")
    if len(parts) != 4:
        raise ParameterError(f"--matrix needs a11,a12,a21,a22, got {text!r}")
    a11, a12, a21, a22 = (float(p) for p in parts)
    return MixingMatrix(np.array([[a11, a12], [a21, a22]]))


def _parse_lags(text: str):
    if "-" in text and "," not in text:
        first, last = text.split("-", 1)
        return tuple(range(int(first), int(last) + 1))
    return tuple(int(p) for p in text.split(","))


def _default_seed() -> int:
    return int(os.environ.get("BSS_UWPD_SEED", "42"))


def _load_mixture_inputs(paths):
    signals = []
    for path in paths:
        if not Path(path).exists():
            raise OSError(f"input file not found: {path}")
        signals.append(decimate_to_8k(read_wav(path)))
    n = min(len(s) for s in signals)
    return [Signal(s.samples[:n], s.sample_rate_hz) for s in signals]


def _make_mixtures(sources, matrix: MixingMatrix):
    x1, x2 = mix(sources, matrix)
    peak = max(np.max(np.abs(x1.samples)), np.max(np.abs(x2.samples)))
    if peak <= 0.0:
        raise DegenerateInputError("mixtures are silent; nothing to write")
    scale = MIX_PEAK / peak
    return (
        Signal(x1.samples * scale, x1.sample_rate_hz),
        Signal(x2.samples * scale, x2.sample_rate_hz),
        scale,
    )


def _ica_options(args, seed=None) -> IcaOptions:
    return IcaOptions(
        contrast=args.contrast,
        tolerance=args.tol,
        max_iterations=args.max_iter,
        seed=args.seed if seed is None else seed,
    )


def _run_method(name: str, mixtures, opts: IcaOptions, lags) -> SeparationResult:
    if name == "proposed":
        return separate_proposed(mixtures[0], mixtures[1], opts)
    if name == "fastica":
        return separate_baseline(mixtures[0], mixtures[1], METHOD_FASTICA, opts)
    return separate_baseline(mixtures[0], mixtures[1], METHOD_SOBI, lags=lags)


def _run_record(name: str, result: SeparationResult, seed: int, estimate_names):
    return {
        "command": "separate",
        "method": name,
        "seed": seed,
        "selected_node": list(result.selected_node) if result.selected_node else None,
        "iterations": result.iterations,
        "converged": result.converged,
        "ill_conditioned": result.model.ill_conditioned,
        "estimates": list(estimate_names),
    }


def _metrics_rows(method: str, report):
    rows = []
    for index, source in enumerate(report.per_source, start=1):
        rows.append(
            {
                "method": method,
                "source": f"source {index}",
                "SIR": source.sir_db,
                "SDR": source.sdr_db,
                "segSNR": source.seg_snr_db,
                "overallSNR": source.overall_snr_db,
            }
        )
    rows.append(
        {
            "method": method,
            "source": "Average",
            **{
                column: float(np.mean([r[column] for r in rows]))
                for column in METRIC_COLUMNS
            },
        }
    )
    return rows


def _format_table(rows) -> str:
    header = f"{'method':<10} {'source':<10}" + "".join(
        f" {column:>12}" for column in METRIC_COLUMNS
    )
    lines = [header, "-" * len(header)]
    for row in rows:
        lines.append(
            f"{row['method']:<10} {row['source']:<10}"
            + "".join(f" {row[column]:>12.2f}" for column in METRIC_COLUMNS)
        )
    return "\n".join(lines)


def _jsonl(rows) -> str:
    return "".join(json.dumps(row, sort_keys=True) + "\n" for row in rows)


def cmd_mix(args) -> int:
    out = Path(args.out)
    matrix = _parse_matrix(args.matrix)
    sources = _load_mixture_inputs([args.source1, args.source2])
    mix1, mix2, scale = _make_mixtures(sources, matrix)
    _atomic_write_wav(mix1, out / "mix1.wav")
    _atomic_write_wav(mix2, out / "mix2.wav")
    manifest = {
        "matrix": [list(row) for row in matrix.entries.tolist()],
        "scale": scale,
        "sample_rate_hz": mix1.sample_rate_hz,
        "n_samples": len(mix1),
        "sources": [Path(args.source1).name, Path(args.source2).name],
        "mixtures": ["mix1.wav", "mix2.wav"],
    }
    _atomic_write_text(out / "mix_manifest.json", json.dumps(manifest, indent=2) + "\n")
    print(f"wrote mix1.wav, mix2.wav, mix_manifest.json to {out}")
    return 0


def cmd_separate(args) -> int:
    out = Path(args.out)
    mixtures = [read_wav(args.mix1), read_wav(args.mix2)]
    opts = _ica_options(args)
    result = _run_method(args.method, mixtures, opts, args.lags)
    names = [f"est_{args.method}_1.wav", f"est_{args.method}_2.wav"]
    for estimate, name in zip(result.estimates, names):
        _atomic_write_wav(_normalize_for_wav(estimate), out / name)
    record = _run_record(args.method, result, args.seed, names)
    records_path = out / "runs.jsonl"
    existing = records_path.read_text() if records_path.exists() else ""
    _atomic_write_text(records_path, existing + json.dumps(record, sort_keys=True) + "\n")
    print(f"wrote {', '.join(names)} and run record to {out}")
    return 0


def _normalize_for_wav(signal: Signal) -> Signal:
    peak = np.max(np.abs(signal.samples))
    if peak <= 0.0:
        return signal
    return Signal(signal.samples * (MIX_PEAK / peak), signal.sample_rate_hz)


def cmd_evaluate(args) -> int:
    estimates = (read_wav(args.estimate1), read_wav(args.estimate2))
    references = (read_wav(args.reference1), read_wav(args.reference2))
    report = evaluate_pair(estimates, references)
    rows = _metrics_rows(args.method_label, report)
    print(_format_table(rows))
    if args.json:
        _atomic_write_text(Path(args.json), _jsonl(rows))
    return 0


def cmd_experiment(args) -> int:
    config = ExperimentConfig(
        source_paths=(args.source1, args.source2),
        matrix=_parse_matrix(args.matrix),
        methods=tuple(args.methods.split(",")),
        seed=args.seed,
        output_dir=Path(args.out),
    )
    out = config.output_dir
    references = _load_mixture_inputs(config.source_paths)
    mix1, mix2, scale = _make_mixtures(references, config.matrix)

    results = {}
    failures = {}
    for name in config.methods:
        try:
            results[name] = _run_method(
                name, (mix1, mix2), _ica_options(args), args.lags
            )
        except BssError as exc:
            failures[name] = str(exc)

    # all computation done; emit artifacts, then score from the files so
    # every table cell is reproducible from the written WAVs alone
    _atomic_write_wav(mix1, out / "mix1.wav")
    _atomic_write_wav(mix2, out / "mix2.wav")
    ref_names = ["ref1.wav", "ref2.wav"]
    for reference, ref_name in zip(references, ref_names):
        _atomic_write_wav(reference, out / ref_name)
    manifest = {
        "matrix": [list(row) for row in config.matrix.entries.tolist()],
        "scale": scale,
        "sample_rate_hz": mix1.sample_rate_hz,
        "n_samples": len(mix1),
        "seed": config.seed,
        "methods": list(config.methods),
        "sources": [Path(p).name for p in config.source_paths],
        "mixtures": ["mix1.wav", "mix2.wav"],
        "references": ref_names,
    }
    _atomic_write_text(out / "mix_manifest.json", json.dumps(manifest, indent=2) + "\n")

    ref_signals = [read_wav(out / ref_name) for ref_name in ref_names]
    records = []
    table_rows = []
    for name in config.methods:
        if name not in results:
            continue
        result = results[name]
        names = [f"est_{name}_1.wav", f"est_{name}_2.wav"]
        for estimate, est_name in zip(result.estimates, names):
            _atomic_write_wav(_normalize_for_wav(estimate), out / est_name)
        records.append(_run_record(name, result, config.seed, names))
        est_signals = [read_wav(out / est_name) for est_name in names]
        report = evaluate_pair(est_signals, ref_signals)
        table_rows.extend(_metrics_rows(name, report))
    _atomic_write_text(out / "runs.jsonl", _jsonl(records))

    table = _format_table(table_rows)
    report_lines = [table]
    for name, message in failures.items():
        report_lines.append(f"FAILED {name}: {message}")
    _atomic_write_text(out / "report.txt", "\n".join(report_lines) + "\n")
    _atomic_write_text(out / "report.jsonl", _jsonl(table_rows))
    print("\n".join(report_lines))
    if failures:
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bss-uwpd",
        description="Blind two-channel speech separation with a critical-band "
        "wavelet packet filterbank and FastICA.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--seed", type=int, default=_default_seed())
        p.add_argument("--contrast", choices=("tanh", "gauss", "cube"), default="tanh")
        p.add_argument("--tol", type=float, default=1e-6)
        p.add_argument("--max-iter", type=int, default=200)
        p.add_argument("--lags", type=_parse_lags, default=DEFAULT_SOBI_LAGS,
                       help="SOBI lags, e.g. 1-20 or 1,2,5")

    p_mix = sub.add_parser("mix", help="decimate, mix, and write mixtures")
    p_mix.add_argument("source1")
    p_mix.add_argument("source2")
    p_mix.add_argument("--matrix", default="2,1,1,1", help="a11,a12,a21,a22")
    p_mix.add_argument("--out", required=True)
    p_mix.set_defaults(func=cmd_mix)

    p_sep = sub.add_parser("separate", help="separate one mixture pair")
    p_sep.add_argument("mix1")
    p_sep.add_argument("mix2")
    p_sep.add_argument("--method", choices=METHOD_NAMES, required=True)
    p_sep.add_argument("--out", required=True)
    add_common(p_sep)
    p_sep.set_defaults(func=cmd_separate)

    p_eval = sub.add_parser("evaluate", help="score estimates against references")
    p_eval.add_argument("estimate1")
    p_eval.add_argument("estimate2")
    p_eval.add_argument("reference1")
    p_eval.add_argument("reference2")
    p_eval.add_argument("--json", help="also write rows as JSON lines")
    p_eval.add_argument("--method-label", default="estimates")
    p_eval.set_defaults(func=cmd_evaluate)

    p_exp = sub.add_parser("experiment", help="mix, separate, evaluate end-to-end")
    p_exp.add_argument("source1")
    p_exp.add_argument("source2")
    p_exp.add_argument("--matrix", default="2,1,1,1", help="a11,a12,a21,a22")
    p_exp.add_argument("--methods", default="proposed,fastica,sobi",
                       help="comma-separated subset of proposed,fastica,sobi")
    p_exp.add_argument("--out", required=True)
    add_common(p_exp)
    p_exp.set_defaults(func=cmd_experiment)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (BssError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
