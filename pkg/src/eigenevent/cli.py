"""Command-line entry point: simulate, detect, evaluate, compare-baselines.

Exit codes: 0 success, 1 data error (malformed input files), 2 config
error (bad flags or paths).  Set EIGENEVENT_LOG=DEBUG|INFO|... for
verbosity.  Every subcommand accepts --dump-config to print its resolved
configuration and exit without running.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from .data import (
    DataError,
    Schema,
    citybn_schema,
    read_env_csv,
    read_records_csv,
    read_window_csv,
    windows_from_records,
)
from .detector import BASELINE_MODES, IndicatorConfig, detect_stream, write_detection_csv
from .evaluate import (
    DEFAULT_THRESHOLDS,
    EvalConfig,
    compare_baselines,
    evaluate_datasets,
    reference_comparison,
    write_amoc_csv,
    write_summary_json,
)
from .simulate import (
    InvalidConfig,
    benchmark_config,
    generate,
    read_truth_csv,
    write_dataset,
    write_truth_csv,
)

log = logging.getLogger("eigenevent")

EXIT_OK = 0
EXIT_DATA_ERROR = 1
EXIT_CONFIG_ERROR = 2


class ConfigError(Exception):
    pass


def _load_schema(path: str | None) -> Schema:
    if path is None:
        return citybn_schema()
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return Schema(
            regions=tuple(raw["regions"]),
            feature_attrs=tuple((a, tuple(levels)) for a, levels in raw["features"]),
            env_attrs=tuple((a, tuple(levels)) for a, levels in raw["environment"]),
        )
    except FileNotFoundError:
        raise ConfigError(f"schema file not found: {path}") from None
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise ConfigError(f"bad schema file {path}: {exc}") from None


def _parse_thresholds(spec: str) -> tuple[float, ...]:
    # "start:stop:step", endpoints inclusive.
    try:
        start, stop, step = (float(part) for part in spec.split(":"))
    except ValueError:
        raise ConfigError(f"bad threshold spec {spec!r}; expected start:stop:step") from None
    if step <= 0 or stop < start:
        raise ConfigError(f"bad threshold spec {spec!r}")
    count = int(round((stop - start) / step)) + 1
    decimals = max(len(part.split(".")[1]) if "." in part else 0 for part in spec.split(":"))
    values = tuple(round(start + i * step, decimals) for i in range(count))
    return tuple(v for v in values if v <= stop + 1e-12)


def _parse_indicators(spec: str) -> IndicatorConfig:
    names = {name.strip() for name in spec.split(",") if name.strip()}
    unknown = names - {"eigenvalue", "spatial", "feature"}
    if unknown:
        raise ConfigError(f"unknown indicators: {sorted(unknown)}")
    try:
        return IndicatorConfig(
            use_eigenvalue="eigenvalue" in names,
            use_spatial_vector="spatial" in names,
            use_feature_vector="feature" in names,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _dump_config(args: argparse.Namespace) -> int:
    resolved = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "dump_config")}
    print(json.dumps(resolved, indent=2, sort_keys=True, default=str))
    return EXIT_OK


def _load_dataset_windows(path: Path, schema: Schema, env_path: Path | None):
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
    if header.startswith("day,env,region"):
        return read_window_csv(path, schema)
    if header.startswith("region,day"):
        if env_path is None:
            raise ConfigError(f"{path} holds raw records; an environment CSV is required")
        records = read_records_csv(path, schema)
        env_by_day = read_env_csv(env_path, schema)
        return windows_from_records(records, env_by_day, schema)
    raise DataError(f"{path}:1: unrecognized header")


def _discover_datasets(directory: Path, schema: Schema) -> list[tuple[str, list]]:
    datasets = []
    for path in sorted(directory.glob("*.windows.csv")):
        dataset_id = path.name[: -len(".windows.csv")]
        datasets.append((dataset_id, read_window_csv(path, schema)))
    if not datasets:
        for path in sorted(directory.glob("*.records.csv")):
            dataset_id = path.name[: -len(".records.csv")]
            env_path = directory / f"{dataset_id}.env.csv"
            if not env_path.exists():
                raise ConfigError(f"missing environment CSV for dataset {dataset_id}")
            datasets.append((dataset_id, _load_dataset_windows(path, schema, env_path)))
    if not datasets:
        raise ConfigError(f"no datasets (*.windows.csv or *.records.csv) found in {directory}")
    return datasets


def _cmd_simulate(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    schema = citybn_schema()
    rng = np.random.default_rng(args.seed)
    releases: dict[str, int] = {}
    for k in range(args.datasets):
        dataset_id = f"ds{k:03d}"
        if args.release_day is not None:
            release_day = args.release_day
        else:
            # anywhere in year two, with room for the 14-day window
            release_day = int(rng.integers(args.days // 2 + 15, args.days - 14))
        config = benchmark_config(
            seed=args.seed * 100_000 + k,
            n_days=args.days,
            release_day=release_day,
            peak=args.peak,
            affected_regions=args.affected_regions,
            base_rate=args.base_rate,
            noise_level=args.noise,
        )
        dataset = generate(config)
        write_dataset(out_dir, dataset_id, dataset, schema)
        releases[dataset_id] = release_day
        log.info("wrote %s (release day %d)", dataset_id, release_day)
    write_truth_csv(out_dir / "truth.csv", releases)
    resolved = {
        "datasets": args.datasets,
        "days": args.days,
        "seed": args.seed,
        "peak": args.peak,
        "affected_regions": args.affected_regions,
        "base_rate": args.base_rate,
        "noise": args.noise,
        "release_day": args.release_day,
    }
    (out_dir / "sim_config.json").write_text(
        json.dumps(resolved, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(f"wrote {args.datasets} datasets to {out_dir}")
    return EXIT_OK


def _cmd_detect(args: argparse.Namespace) -> int:
    schema = _load_schema(args.schema)
    env_path = Path(args.env) if args.env else None
    input_path = Path(args.input)
    if not input_path.exists():
        raise ConfigError(f"input file not found: {input_path}")
    windows = _load_dataset_windows(input_path, schema, env_path)
    results = detect_stream(
        windows,
        indicators=_parse_indicators(args.indicators),
        min_history=args.min_history,
        baseline_mode=args.baseline_mode,
        fixed_history_len=args.fixed_history_len,
    )
    out_path = Path(args.output)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    write_detection_csv(out_path, results)
    if not args.no_plots:
        from .plots import save_pvalue_figure

        save_pvalue_figure(out_path.with_suffix(".png"), results)
    print(f"wrote {len(results)} detection rows to {out_path}")
    return EXIT_OK


def _eval_config(args: argparse.Namespace) -> EvalConfig:
    try:
        return EvalConfig(
            train_days=args.train_days,
            eval_days=args.eval_days,
            thresholds=_parse_thresholds(args.thresholds),
            baseline_mode=args.baseline_mode,
            fixed_history_len=args.fixed_history_len,
            indicators=_parse_indicators(args.indicators),
            min_history=args.min_history,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _gather(args: argparse.Namespace, data_dir: Path):
    schema = _load_schema(args.schema)
    if not data_dir.is_dir():
        raise ConfigError(f"data directory not found: {data_dir}")
    truth_path = Path(args.truth) if args.truth else data_dir / "truth.csv"
    if not truth_path.exists():
        raise ConfigError(f"truth file not found: {truth_path}")
    releases = read_truth_csv(truth_path)
    datasets = []
    for dataset_id, windows in _discover_datasets(data_dir, schema):
        if dataset_id not in releases:
            raise DataError(f"{truth_path}: no release day recorded for dataset {dataset_id!r}")
        datasets.append((dataset_id, windows, releases[dataset_id]))
    return datasets


def _cmd_evaluate(args: argparse.Namespace) -> int:
    if args.citybn_dir is None and args.data_dir is None:
        raise ConfigError("one of --data-dir or --citybn-dir is required")
    data_dir = Path(args.citybn_dir if args.citybn_dir else args.data_dir)
    cfg = _eval_config(args)
    datasets = _gather(args, data_dir)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    curve, summary, _ = evaluate_datasets(datasets, cfg, workers=args.workers)
    elapsed = time.perf_counter() - started
    summary["thresholds"] = {
        "count": len(cfg.thresholds),
        "start": cfg.thresholds[0],
        "stop": cfg.thresholds[-1],
    }
    summary["train_days"] = cfg.train_days
    summary["eval_days"] = cfg.eval_days
    # Wall-clock time is reported on stderr and stored only on request so
    # that rerun outputs stay byte-identical.
    summary["runtime_seconds"] = elapsed if args.timing else None
    if args.citybn_dir is not None:
        summary["benchmark_reproduction"] = reference_comparison(summary)
    write_amoc_csv(out_dir / "amoc.csv", curve)
    write_summary_json(out_dir / "summary.json", summary)
    if not args.no_plots:
        from .plots import save_amoc_figure

        save_amoc_figure(out_dir / "amoc.png", {cfg.baseline_mode: curve})
    log.info("evaluated %d datasets in %.2fs", len(datasets), elapsed)
    print(f"evaluated {len(datasets)} datasets in {elapsed:.2f}s; outputs in {out_dir}", file=sys.stderr)
    print(json.dumps({k: summary[k] for k in ("fp_per_month", "mean_delay", "auamoc")}, sort_keys=True))
    return EXIT_OK


def _cmd_compare_baselines(args: argparse.Namespace) -> int:
    if args.data_dir is None:
        raise ConfigError("--data-dir is required")
    cfg = _eval_config(args)
    modes = tuple(m.strip() for m in args.modes.split(",") if m.strip())
    unknown = set(modes) - set(BASELINE_MODES)
    if unknown:
        raise ConfigError(f"unknown baseline modes: {sorted(unknown)}")
    datasets = _gather(args, Path(args.data_dir))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    results = compare_baselines(datasets, cfg, modes=modes, workers=args.workers)
    comparison = {}
    for mode, payload in results.items():
        write_amoc_csv(out_dir / f"amoc_{mode}.csv", payload["curve"])
        comparison[mode] = payload["summary"]
    write_summary_json(out_dir / "comparison.json", comparison)
    if not args.no_plots:
        from .plots import save_amoc_figure

        save_amoc_figure(out_dir / "comparison.png", {m: results[m]["curve"] for m in modes})
    print(json.dumps({m: comparison[m]["auamoc"] for m in modes}, sort_keys=True))
    return EXIT_OK


def _add_common_eval_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--schema", default=None, help="schema JSON (defaults to the built-in benchmark schema)")
    parser.add_argument("--truth", default=None, help="truth CSV (default <data-dir>/truth.csv)")
    parser.add_argument("--train-days", type=int, default=365)
    parser.add_argument("--eval-days", type=int, default=365)
    parser.add_argument("--thresholds", default="0.020:0.250:0.001", help="alarm threshold sweep start:stop:step")
    parser.add_argument("--baseline-mode", default="dynamic", choices=BASELINE_MODES)
    parser.add_argument("--fixed-history-len", type=int, default=56)
    parser.add_argument("--indicators", default="eigenvalue,spatial")
    parser.add_argument("--min-history", type=int, default=5)
    parser.add_argument("--workers", type=int, default=1, help="parallel dataset workers (results identical for any N)")
    parser.add_argument("--no-plots", action="store_true", help="skip figure rendering")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eigenevent", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate synthetic benchmark datasets")
    p_sim.add_argument("--out", required=True, help="output directory")
    p_sim.add_argument("--datasets", type=int, default=20)
    p_sim.add_argument("--days", type=int, default=730)
    p_sim.add_argument("--seed", type=int, default=7)
    p_sim.add_argument("--peak", type=float, default=5.0, help="release peak multiplier")
    p_sim.add_argument("--affected-regions", type=int, default=2)
    p_sim.add_argument("--base-rate", type=float, default=3.0)
    p_sim.add_argument("--noise", type=float, default=0.0)
    p_sim.add_argument("--release-day", type=int, default=None, help="fixed release day (default: random in year two)")
    p_sim.set_defaults(func=_cmd_simulate)

    p_det = sub.add_parser("detect", help="run the detector over one dataset")
    p_det.add_argument("--input", required=True, help="window CSV or record CSV")
    p_det.add_argument("--env", default=None, help="environment CSV (required for record input)")
    p_det.add_argument("--output", required=True, help="per-day output CSV")
    p_det.add_argument("--schema", default=None)
    p_det.add_argument("--indicators", default="eigenvalue,spatial")
    p_det.add_argument("--min-history", type=int, default=5)
    p_det.add_argument("--baseline-mode", default="dynamic", choices=BASELINE_MODES)
    p_det.add_argument("--fixed-history-len", type=int, default=56)
    p_det.add_argument("--no-plots", action="store_true")
    p_det.set_defaults(func=_cmd_detect)

    p_eval = sub.add_parser("evaluate", help="threshold sweep and curve over many datasets")
    p_eval.add_argument("--data-dir", default=None, help="directory of simulated datasets plus truth.csv")
    p_eval.add_argument("--citybn-dir", default=None, help="directory of the original benchmark files; adds a reproduction report")
    p_eval.add_argument("--out", required=True)
    p_eval.add_argument("--timing", action="store_true", help="store wall-clock runtime in summary.json (breaks rerun byte-identity)")
    _add_common_eval_flags(p_eval)
    p_eval.set_defaults(func=_cmd_evaluate)

    p_cmp = sub.add_parser("compare-baselines", help="side-by-side baseline strategies")
    p_cmp.add_argument("--data-dir", required=True)
    p_cmp.add_argument("--out", required=True)
    p_cmp.add_argument("--modes", default=",".join(BASELINE_MODES))
    _add_common_eval_flags(p_cmp)
    p_cmp.set_defaults(func=_cmd_compare_baselines)

    for sub_parser in (p_sim, p_det, p_eval, p_cmp):
        sub_parser.add_argument("--dump-config", action="store_true", help="print resolved configuration and exit")
    return parser


def main(argv=None) -> int:
    level = os.environ.get("EIGENEVENT_LOG", "WARNING").upper()
    if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        level = "WARNING"
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.dump_config:
            return _dump_config(args)
        return args.func(args)
    except (ConfigError, InvalidConfig) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA_ERROR


def run(argv) -> int:
    """Programmatic entry point mirroring the console script."""
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())
