"""
Command-line surface: synth, fit, eval, spectrum, sweep, compare, params.
Each command prints a human summary and, where it produces results,
writes a RunReport next to its artifacts.

Exit codes: 0 ok, 1 usage, 2 data, 3 numerical/training.
Run from project root: python -m inrwave <command> --help
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import pandas as pd

from .capture_io import load_capture
from .errors import (
    EXIT_NUMERICAL,
    EXIT_OK,
    InrWaveError,
    InvalidInputError,
    TrainingDivergedError,
    UsageError,
    exit_code_for,
)
from .inr.counting import combined_param_count, double_param_count, param_count, separate_param_count
from .inr.forward import reconstruct
from .inr.persistence import MODEL_SUFFIX, load_model, save_model
from .inr.schemas import ArchKind, ArchSpec, InrModel
from .logging_config import configure_logging
from .pool import default_worker_count
from .reports import (
    NmseSummary,
    RunReport,
    compression_of,
    hash_inputs,
    model_entry,
    report_path_for,
    write_report,
)
from .services import (
    ARCH_CHOICES,
    DEFAULT_BUDGETS,
    FitRequest,
    check_trend,
    compare_budgets,
    fit_capture,
    run_sweep,
    with_capture_omega0,
)
from .spectrum import (
    DEFAULT_EXCLUDE_BELOW_HZ,
    DEFAULT_MIN_REL_MAGNITUDE,
    Spectrum,
    detect_sidebands,
    dft_magnitude,
    dominant_frequency,
    save_spectrum,
    spectrum_report,
)
from .synth import EventClass, EventSpec, Quantity, SynthSpec, gen, gen_suite, save_synth
from .training.config import TrainConfig, build_train_config, load_train_config
from .waveform import Waveform, WaveformSet, as_waveform_set, differential_waveform, nmse_percent, normalize_time

logger = logging.getLogger(__name__)


class _ArgumentParser(argparse.ArgumentParser):
    """Usage errors raise instead of exiting, so main() owns the exit code."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{self.prog}: {message}")


# ---------- Flag parsing helpers ----------


def _int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from e
    if not values:
        raise UsageError("expected at least one integer")
    return values


def _event_window(text: str | None) -> tuple[float, float] | None:
    if text is None:
        return None
    try:
        start, duration = (float(v) for v in text.split(":"))
    except ValueError as e:
        raise UsageError(f"--event-window expects START:DURATION in cycles, got {text!r}") from e
    return start, duration


def _train_config(args: argparse.Namespace) -> TrainConfig:
    overrides = {
        "learning_rate": args.lr,
        "epochs": args.epochs,
        "seed": args.seed,
        "omega0": args.omega0,
        "optimizer": args.optimizer,
        "batch_size": args.batch_size,
        "loss_report_stride": args.loss_report_stride,
        "beta1": args.beta1,
        "beta2": args.beta2,
        "eps": args.eps,
        "divergence_factor": args.divergence_factor,
    }
    if args.config:
        return load_train_config(args.config, **overrides)
    return build_train_config(overrides)


def _workers(args: argparse.Namespace) -> int:
    return args.workers if args.workers is not None else default_worker_count()


def _prefix(args: argparse.Namespace, default: Path) -> Path:
    return Path(args.out) if args.out else default


def _model_path(prefix: Path, label: str | None = None) -> Path:
    name = prefix.name if label is None else f"{prefix.name}.{label}"
    return prefix.with_name(name + MODEL_SUFFIX)


# ---------- synth ----------


def cmd_synth(args: argparse.Namespace) -> int:
    event = EventSpec(
        start_cycle=args.event_start,
        duration_cycles=args.event_duration,
        frequency_hz=args.event_freq,
        amplitude=args.event_amplitude,
        modulation_depth=args.depth,
        f_sideband_hz=args.f_sideband,
        sag_depth=args.sag_depth,
    )
    base = SynthSpec(
        event_class=EventClass(args.event_class),
        capture_cycles=args.cycles,
        samples_per_cycle=args.samples_per_cycle,
        quantity=Quantity(args.quantity),
        event=event,
        noise_std=args.noise_std,
        noise_relative=not args.absolute_noise,
        seed=args.seed,
        n_locations=args.locations,
    )
    if args.suite:
        out_dir = Path(args.out)
        for i, (spec, capture) in enumerate(gen_suite(args.suite, args.seed, base)):
            path, _ = save_synth(spec, capture, out_dir / f"event_{i:03d}.csv")
            print(f"{path}  {spec.event_class.value}  {capture.n_channels}x{capture.n_samples}")
        print(f"wrote {args.suite} captures to {out_dir}")
        return EXIT_OK
    capture = gen(base)
    path, side = save_synth(base, capture, args.out)
    print(f"wrote {path} ({capture.n_samples} samples x {capture.n_channels} channels) and {side.name}")
    return EXIT_OK


# ---------- fit ----------


def cmd_fit(args: argparse.Namespace) -> int:
    if args.arch == "single" and args.h is None:
        raise UsageError("--arch single needs --h")
    if args.arch != "single" and (args.h1 is None or args.h2 is None):
        raise UsageError(f"--arch {args.arch} needs --h1 and --h2")
    started = time.perf_counter()
    capture = load_capture(args.input)
    config = with_capture_omega0(_train_config(args), capture.spec.cycles(capture.n_samples))
    request = FitRequest(
        arch=args.arch,
        h=args.h,
        h1=args.h1,
        h2=args.h2,
        activation=args.activation,
        runs=args.runs,
        channel=args.channel,
        event_window_cycles=_event_window(args.event_window),
    )
    prefix = _prefix(args, Path(args.input).with_suffix(""))
    report = RunReport(command="fit", config={**config.model_dump(), "request": _request_dict(request)})
    report.input_hashes = hash_inputs([args.input])
    report_path = report_path_for(prefix)
    try:
        outcome = fit_capture(capture, request, config, _workers(args))
    except TrainingDivergedError as e:
        report.status = "diverged"
        report.failures = [e.to_dict()]
        report.wall_time_s = time.perf_counter() - started
        write_report(report, report_path)
        print(f"training diverged; partial report: {report_path}", file=sys.stderr)
        raise

    artifacts: list[str] = []
    for label, model in outcome.models:
        path = _model_path(prefix, label if args.arch == "separate" else None)
        save_model(model, path)
        artifacts.append(str(path))
        report.models.append(model_entry(label, model))
    report.nmse = NmseSummary(
        mean=outcome.stats.mean,
        min=outcome.stats.min,
        max=outcome.stats.max,
        std=outcome.stats.std,
        n=outcome.stats.n,
        per_channel=outcome.per_channel,
        transient_mean=outcome.transient_mean,
    )
    report.compression = compression_of(outcome.raw_samples, outcome.param_count)
    report.failures = [f.to_dict() for f in outcome.failures]
    report.artifacts = artifacts
    report.wall_time_s = time.perf_counter() - started
    write_report(report, report_path)

    print(f"fit {args.arch}: params {outcome.param_count}  NMSE {outcome.stats.mean:.4f}%", end="")
    if outcome.stats.n > 1:
        print(f" (std {outcome.stats.std:.4f}, best {outcome.stats.min:.4f}%, {outcome.stats.n} runs)", end="")
    print()
    for label, value in outcome.per_channel.items():
        print(f"  {label}: {value:.4f}%")
    if outcome.transient_mean is not None:
        print(f"  event window NMSE: {outcome.transient_mean:.4f}%")
    c = report.compression
    print(f"compression {c.ratio_fraction} = {c.ratio:.2f}x")
    for a in artifacts:
        print(f"model: {a}")
    print(f"report: {report_path}")
    return EXIT_OK


def _request_dict(request: FitRequest) -> dict[str, Any]:
    return {
        "arch": request.arch,
        "h": request.h,
        "h1": request.h1,
        "h2": request.h2,
        "activation": request.activation,
        "runs": request.runs,
        "channel": request.channel,
        "event_window_cycles": list(request.event_window_cycles) if request.event_window_cycles else None,
    }


# ---------- eval ----------


def _reconstruct_on(model: InrModel, capture: WaveformSet) -> WaveformSet:
    """Reconstruction matched to capture's channels by label."""
    labels = model.meta.labels
    missing = [l for l in labels if l not in capture.labels]
    if missing:
        if model.arch.kind is ArchKind.MULTI:
            raise InvalidInputError(
                f"model outputs {list(labels)} ({len(labels)} channels) but capture has "
                f"{list(capture.labels)} ({capture.n_channels} channels)"
            )
        if capture.n_channels != 1:
            raise InvalidInputError(f"model channel {labels[0]!r} not in capture channels {list(capture.labels)}")
    recon = as_waveform_set(reconstruct(model, normalize_time(capture.n_samples)))
    if missing:
        only = recon.channels[0]
        return WaveformSet((Waveform(only.samples, capture.spec, capture.labels[0], capture.units[0]),))
    return recon


def cmd_eval(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    capture = load_capture(args.input)
    models = [load_model(p) for p in args.model]
    recon_channels: dict[str, Waveform] = {}
    for model in models:
        for ch in _reconstruct_on(model, capture):
            recon_channels[ch.label] = ch
    labels = [l for l in capture.labels if l in recon_channels]
    per_channel = {l: nmse_percent(capture.channel(l), recon_channels[l]) for l in labels}
    values = list(per_channel.values())
    total_params = sum(param_count(m) for m in models)

    prefix = _prefix(args, Path(args.input).with_name(Path(args.input).stem + ".eval"))
    artifacts: list[str] = []
    if args.dump:
        out_dir = Path(args.dump)
        out_dir.mkdir(parents=True, exist_ok=True)
        for l in labels:
            raw = capture.channel(l)
            frame = pd.DataFrame({"time_s": raw.time_s(), "raw": raw.samples, "recon": recon_channels[l].samples})
            path = out_dir / f"{l}.recon.csv"
            frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
            artifacts.append(str(path))

    report = RunReport(
        command="eval",
        input_hashes=hash_inputs([args.input, *args.model]),
        models=[model_entry(m.meta.labels[0] if len(m.meta.labels) == 1 else "combined", m) for m in models],
        nmse=NmseSummary(
            mean=float(np.mean(values)),
            min=float(np.min(values)),
            max=float(np.max(values)),
            std=float(np.std(values)),
            n=len(values),
            per_channel=per_channel,
        ),
        compression=compression_of(capture.n_samples * len(labels), total_params),
        artifacts=artifacts,
    )
    report.wall_time_s = time.perf_counter() - started
    report_path = write_report(report, report_path_for(prefix))

    print(f"NMSE overall {report.nmse.mean:.4f}%")
    for l, v in per_channel.items():
        print(f"  {l}: {v:.4f}%")
    if artifacts:
        print(f"reconstructions: {Path(args.dump)}")
    print(f"report: {report_path}")
    return EXIT_OK


# ---------- spectrum ----------


def _print_dominant(name: str, s: Spectrum, exclude: float, min_rel: float) -> dict[str, Any]:
    mode = dominant_frequency(s, exclude, min_rel)
    flag = "" if mode.significant else " (below significance, noise floor)"
    print(f"{name}: f_dominant = {mode.frequency_hz:.1f} Hz, magnitude {mode.magnitude:.4g}{flag}")
    return mode._asdict()


def _print_sidebands(name: str, s: Spectrum, carrier: float, min_rel: float) -> dict[str, Any]:
    result = detect_sidebands(s, carrier, min_rel)
    if not result.found:
        print(f"{name}: no sideband pair about {carrier:.1f} Hz")
    for pair in result.pairs:
        print(
            f"{name}: sidebands {pair.lower.frequency_hz:.1f} / {pair.upper.frequency_hz:.1f} Hz "
            f"(f_sideband = {pair.offset_hz:.1f} Hz)"
        )
    return result.to_dict()


def cmd_spectrum(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    capture = load_capture(args.input)
    raw = capture.channel(args.channel) if args.channel else capture.channels[0]
    want_dominant = args.mode in ("dominant", "both")
    want_sidebands = args.mode in ("sidebands", "both")
    spectral: dict[str, Any] = {"channel": raw.label, "mode": args.mode}
    artifacts: list[str] = []
    inputs = [args.input]

    if args.model:
        inputs.append(args.model)
        model = load_model(args.model)
        recon = _reconstruct_on(model, capture).channel(raw.label)
        rep = spectrum_report(
            raw,
            recon,
            exclude_below_hz=args.exclude_below,
            carrier_hz=args.carrier if want_sidebands else None,
            min_rel_magnitude=args.min_rel,
            pre_event_cycles=args.differential,
            window=args.window,
        )
        spectral.update(rep.to_dict())
        spectra = {"raw": rep.raw, "recon": rep.recon}
        print(f"spectral NMSE {rep.spectral_nmse_percent:.4f}%")
    else:
        signal = differential_waveform(raw, args.differential) if args.differential else raw
        spectra = {"raw": dft_magnitude(signal, args.window)}

    for name, s in spectra.items():
        if want_dominant:
            spectral[f"{name}_dominant"] = _print_dominant(name, s, args.exclude_below, args.min_rel)
        if want_sidebands:
            spectral[f"{name}_sidebands"] = _print_sidebands(name, s, args.carrier, args.min_rel)
        if args.out:
            path = save_spectrum(s, Path(args.out) / f"{raw.label}.{name}.spectrum.csv")
            artifacts.append(str(path))

    if args.out:
        report = RunReport(
            command="spectrum",
            input_hashes=hash_inputs(inputs),
            spectral=spectral,
            artifacts=artifacts,
            wall_time_s=time.perf_counter() - started,
        )
        path = write_report(report, Path(args.out) / f"{raw.label}.spectrum.report.json")
        print(f"report: {path}")
    return EXIT_OK


# ---------- sweep ----------


def cmd_sweep(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    config = _train_config(args)
    if args.input:
        suite = [load_capture(p) for p in args.input]
        inputs = list(args.input)
    else:
        base = SynthSpec(quantity=Quantity(args.quantity))
        suite = [capture for _, capture in gen_suite(args.suite, args.suite_seed, base)]
        inputs = []
    table = run_sweep(
        suite, _int_list(args.h1), _int_list(args.h2), config, args.runs, _workers(args), args.channel
    )
    print(table.to_frame().to_string(index=False, float_format=lambda v: f"{v:.4f}"))

    trend = None
    if args.check_trend:
        trend = check_trend(table)
        rhos = ", ".join(f"h1={k}: {v:+.3f}" for k, v in trend.spearman_by_h1.items())
        print(f"trend check {'PASS' if trend.passed else 'FAIL'}: spearman {rhos}; best cell {trend.best_cell}")

    if args.out:
        csv_path = table.save_csv(args.out)
        report = RunReport(
            command="sweep",
            config={
                **config.model_dump(),
                "runs": args.runs,
                "n_events": len(suite),
                "quantity": None if args.input else args.quantity,
                "channel": args.channel,
            },
            input_hashes=hash_inputs(inputs),
            results=table.to_frame().to_dict(orient="records"),
            failures=[f.to_dict() for f in table.failures],
            artifacts=[str(csv_path)],
            wall_time_s=time.perf_counter() - started,
        )
        if trend is not None:
            report.config["trend_check"] = trend.to_dict()
        path = write_report(report, report_path_for(csv_path))
        print(f"table: {csv_path}\nreport: {path}")
    if trend is not None and not trend.passed:
        return EXIT_NUMERICAL
    return EXIT_OK


# ---------- compare ----------


def cmd_compare(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    capture = load_capture(args.input)
    config = with_capture_omega0(_train_config(args), capture.spec.cycles(capture.n_samples))
    budgets = _int_list(args.budgets) if args.budgets else list(DEFAULT_BUDGETS)
    comparison = compare_budgets(capture, budgets, config, args.runs, _workers(args))

    print(f"{'budget':>8} {'approach':>9} {'h1':>4} {'h2':>4} {'params':>7} {'mean_nmse':>10} {'std':>8}")
    for row in comparison.rows:
        if row.status != "ok":
            print(f"{row.budget:>8} {row.approach:>9}  FAILED: {row.message}")
            continue
        print(
            f"{row.budget:>8} {row.approach:>9} {row.h1:>4} {row.h2:>4} {row.params:>7} "
            f"{row.mean_nmse:>9.4f}% {row.std:>8.4f}"
        )
    prefix = _prefix(args, Path(args.input).with_name(Path(args.input).stem + ".compare"))
    report = RunReport(
        command="compare",
        config={**config.model_dump(), "runs": args.runs, "budgets": budgets},
        input_hashes=hash_inputs([args.input]),
        results=[row.to_dict() for row in comparison.rows],
        failures=[f.to_dict() for f in comparison.failures],
        wall_time_s=time.perf_counter() - started,
    )
    path = write_report(report, report_path_for(prefix))
    print(f"report: {path}")
    return EXIT_OK


# ---------- params ----------


def cmd_params(args: argparse.Namespace) -> int:
    if args.arch == "single":
        if args.h is None:
            raise UsageError("--arch single needs --h")
        count = param_count(ArchSpec.single(args.h))
    else:
        if args.h1 is None or args.h2 is None:
            raise UsageError(f"--arch {args.arch} needs --h1 and --h2")
        if args.arch == "double":
            count = double_param_count(args.h1, args.h2)
        elif args.arch == "separate":
            count = separate_param_count(args.h1, args.h2, args.channels)
        else:
            count = combined_param_count(args.h1, args.h2, args.channels)
    print(count)
    return EXIT_OK


# ---------- Parser ----------


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("training")
    g.add_argument("--config", help="JSON file with TrainConfig fields; flags below override it")
    g.add_argument("--lr", type=float, help="learning rate")
    g.add_argument("--epochs", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--omega0", type=float, help="first-layer frequency scale (default: scaled to capture length)")
    g.add_argument("--optimizer", choices=("adam", "sgd"))
    g.add_argument("--batch-size", type=int, help="minibatch size (default: full grid)")
    g.add_argument("--loss-report-stride", type=int)
    g.add_argument("--beta1", type=float, help="Adam first-moment decay")
    g.add_argument("--beta2", type=float, help="Adam second-moment decay")
    g.add_argument("--eps", type=float, help="Adam denominator epsilon")
    g.add_argument("--divergence-factor", type=float, help="abort when loss exceeds this multiple of the initial loss")


def _add_arch_flags(p: argparse.ArgumentParser, choices: Sequence[str]) -> None:
    p.add_argument("--arch", choices=choices, required=True)
    p.add_argument("--h", type=int, help="single-layer width")
    p.add_argument("--h1", type=int, help="first hidden layer width")
    p.add_argument("--h2", type=int, help="second hidden layer width")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="inrwave", description="Sinusoidal INR compression of power-system waveforms")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING (default; env INRWAVE_LOG_LEVEL)")
    parser.add_argument("--workers", type=int, default=None, help="worker processes (default: env INRWAVE_WORKERS)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate synthetic captures")
    p.add_argument("--class", dest="event_class", choices=[c.value for c in EventClass], default="steady")
    p.add_argument("--out", required=True, help="capture file, or directory with --suite")
    p.add_argument("--suite", type=int, help="generate a randomized suite of N events")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quantity", choices=[q.value for q in Quantity], default="voltage")
    p.add_argument("--cycles", type=int, default=62)
    p.add_argument("--samples-per-cycle", type=int, default=128)
    p.add_argument("--noise-std", type=float, default=0.005, help="fraction of each channel's fundamental amplitude")
    p.add_argument("--absolute-noise", action="store_true", help="treat --noise-std as an absolute level")
    p.add_argument("--event-start", type=float, default=30.0, help="cycles")
    p.add_argument("--event-duration", type=float, default=2.0, help="cycles")
    p.add_argument("--event-freq", type=float, default=900.0, help="Hz")
    p.add_argument("--event-amplitude", type=float, default=0.2)
    p.add_argument("--depth", type=float, default=0.3, help="modulation depth")
    p.add_argument("--f-sideband", type=float, default=5.0, help="Hz")
    p.add_argument("--sag-depth", type=float, default=0.4)
    p.add_argument("--locations", type=int, default=1)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fit", help="fit an INR model to a capture")
    p.add_argument("--input", required=True)
    _add_arch_flags(p, ARCH_CHOICES)
    p.add_argument("--activation", choices=("sine", "relu"), default="sine")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--channel", help="channel label for single/double (default: first)")
    p.add_argument("--event-window", help="START:DURATION in cycles; adds event-window NMSE")
    p.add_argument("--out", help="output prefix (default: input path without extension)")
    _add_train_flags(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("eval", help="score model(s) against a capture")
    p.add_argument("--model", nargs="+", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--dump", help="directory for <label>.recon.csv (time_s,raw,recon)")
    p.add_argument("--out", help="report prefix")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("spectrum", help="DFT analysis of a capture and optionally its reconstruction")
    p.add_argument("--input", required=True)
    p.add_argument("--model")
    p.add_argument("--channel")
    p.add_argument("--mode", choices=("dominant", "sidebands", "both"), default="dominant")
    p.add_argument("--carrier", type=float, default=60.0)
    p.add_argument("--exclude-below", type=float, default=DEFAULT_EXCLUDE_BELOW_HZ)
    p.add_argument("--min-rel", type=float, default=DEFAULT_MIN_REL_MAGNITUDE)
    p.add_argument("--differential", type=int, help="analyse the differential over N pre-event cycles")
    p.add_argument("--window", choices=("none", "hann"), default="none")
    p.add_argument("--out", help="directory for spectrum CSVs and report")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("sweep", help="h1 x h2 sensitivity sweep")
    p.add_argument("--h1", default="10,30,50")
    p.add_argument("--h2", default="10,30,50,70")
    p.add_argument("--input", nargs="+", help="capture files (default: generated suite)")
    p.add_argument("--suite", type=int, default=3)
    p.add_argument("--suite-seed", type=int, default=0)
    p.add_argument("--quantity", choices=[q.value for q in Quantity], default="voltage", help="generated suite only")
    p.add_argument("--channel", help="channel label to fit in every event (default: first)")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--check-trend", action="store_true")
    p.add_argument("--out", help="CSV table path")
    _add_train_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="separate vs combined models at matched budgets")
    p.add_argument("--input", required=True)
    p.add_argument("--budgets", help="comma-separated parameter budgets")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--out", help="report prefix")
    _add_train_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("params", help="closed-form parameter count")
    _add_arch_flags(p, ARCH_CHOICES)
    p.add_argument("--channels", type=int, default=3)
    p.set_defaults(func=cmd_params)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        configure_logging(args.log_level)
        return args.func(args)
    except InrWaveError as e:
        logger.debug("command failed", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return exit_code_for(e)


if __name__ == "__main__":
    raise SystemExit(main())
