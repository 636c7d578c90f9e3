#!/usr/bin/env python3
"""
End-to-end experiment run: synthesize captures -> fit -> compare -> analyse.
Prints one summary line per experiment and writes captures, models, tables
and RunReports under the output directory.

Run from project root: python3 scripts/reproduce_experiments.py [--quick]
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

# Ensure project root on path
PROJECT_ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

from inrwave.inr import ArchSpec, param_count, save_model
from inrwave.logging_config import configure_logging
from inrwave.reports import RunReport, compression_of, model_entry, report_path_for, write_report
from inrwave.services import check_trend, compare_budgets, run_sweep, with_capture_omega0
from inrwave.spectrum import fourier_param_count, spectrum_report, truncated_fourier
from inrwave.synth import EventClass, SynthSpec, gen, gen_suite, save_synth, single_class_suite
from inrwave.training import TrainConfig, fit, fit_multi_run
from inrwave.waveform import nmse_percent


def _suite_mean(suite, arch: ArchSpec, config: TrainConfig, runs: int, workers: int | None) -> float:
    values = []
    for _, capture in suite:
        cfg = with_capture_omega0(config, capture.spec.cycles(capture.n_samples))
        values.append(fit_multi_run(capture.channels[0], arch, cfg, runs, workers).stats.mean)
    return float(np.mean(values))


def main() -> None:
    parser = argparse.ArgumentParser(description="Reproduce the INR waveform experiments on synthetic data")
    parser.add_argument("--out", default=str(PROJECT_ROOT / "data" / "experiments"))
    parser.add_argument("--quick", action="store_true", help="few epochs/runs; checks plumbing, not accuracy")
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("--epochs", type=int, default=150)
    parser.add_argument("--batch-size", type=int, default=512, help="minibatch size; 0 = full grid")
    args = parser.parse_args()
    configure_logging()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    epochs, runs, events = (20, 1, 2) if args.quick else (args.epochs, 5, 5)
    config = TrainConfig(learning_rate=1e-3, epochs=epochs, batch_size=args.batch_size or None)
    started = time.perf_counter()

    # 1. Equal-budget single vs double, and the activation ablation
    suite = single_class_suite(EventClass.SUBCYCLE_OSCILLATION, events, args.seed)
    for i, (spec, capture) in enumerate(suite):
        save_synth(spec, capture, out / "subcycle" / f"event_{i:03d}.csv")
    single = _suite_mean(suite, ArchSpec.single(554), config, runs, args.workers)
    double = _suite_mean(suite, ArchSpec.double(30, 50), config, runs, args.workers)
    relu = _suite_mean(suite, ArchSpec.double(30, 50, activation="relu"), config, runs, args.workers)
    print(f"1. equal budget: single(554) {single:.4f}%  double(30,50) {double:.4f}%  ratio {double / single:.3f}")
    print(f"   activation:   sine {double:.4f}%  relu {relu:.4f}%  ratio {double / relu:.3f}")

    # Fourier baseline at the single-layer budget
    first = suite[0][1].channels[0]
    terms = (param_count(ArchSpec.single(554)) - 1) // 3
    fourier = nmse_percent(first, truncated_fourier(first, terms))
    print(f"   fourier({terms} terms, {fourier_param_count(terms)} params) on event 0: {fourier:.4f}%")

    # 2. Combined vs separate at matched budgets
    budgets = (1000, 3000, 8103)
    mixed = gen_suite(events, args.seed + 1)
    rows: dict[tuple[int, str], list[float]] = {}
    for _, capture in mixed:
        comparison = compare_budgets(capture, budgets, config, runs, args.workers)
        for r in comparison.rows:
            if r.mean_nmse is not None:
                rows.setdefault((r.budget, r.approach), []).append(r.mean_nmse)
    for b in budgets:
        c = np.mean(rows.get((b, "combined"), [np.nan]))
        s = np.mean(rows.get((b, "separate"), [np.nan]))
        print(f"2. budget {b:>5}: combined {c:.4f}%  separate {s:.4f}%")

    # 3. Spectral fidelity and compression of the combined model
    for event_class in (EventClass.SINGLE_MODE, EventClass.DUAL_MODE_MODULATED):
        spec = SynthSpec(event_class=event_class, seed=args.seed)
        capture = gen(spec)
        save_synth(spec, capture, out / f"{event_class.value}.csv")
        cfg = with_capture_omega0(config, capture.spec.cycles(capture.n_samples))
        model, report = fit(capture, ArchSpec.multi(50, 100, 3), cfg)
        model_path = save_model(model, out / f"{event_class.value}.model.json")
        raw = capture.channels[0]
        single_mode = event_class is EventClass.SINGLE_MODE
        rep = spectrum_report(
            raw,
            model,
            carrier_hz=None if single_mode else spec.system_freq_hz,
            pre_event_cycles=int(spec.event.start_cycle) - 1 if single_mode else None,
        )
        compression = compression_of(capture.n_samples * capture.n_channels, param_count(model))
        write_report(
            RunReport(
                command="reproduce",
                config=cfg.model_dump(),
                models=[model_entry("combined", model)],
                spectral=rep.to_dict(),
                compression=compression,
                results=[report.to_dict()],
                artifacts=[str(model_path)],
            ),
            report_path_for(out / event_class.value),
        )
        sb = rep.raw_sidebands.f_sideband_hz if rep.raw_sidebands else None
        print(
            f"3. {event_class.value}: NMSE {report.final_nmse_percent:.4f}%  "
            f"f_dominant raw {rep.raw_dominant.frequency_hz:.2f} / recon {rep.recon_dominant.frequency_hz:.2f} Hz  "
            f"sideband {sb}  compression {compression.ratio:.2f}x"
        )

    # 4. Sensitivity sweep
    sweep_suite = [capture for _, capture in gen_suite(3, args.seed + 2)]
    table = run_sweep(sweep_suite, [10, 30, 50], [10, 30, 50, 70], config, runs=min(runs, 3), workers=args.workers)
    table.save_csv(out / "sweep.csv")
    trend = check_trend(table)
    print(f"4. sweep: trend {'PASS' if trend.passed else 'FAIL'}  best cell {trend.best_cell}")

    print(f"done in {time.perf_counter() - started:.1f}s; artifacts in {out}")


if __name__ == "__main__":
    main()
