"""Command line entry point: ``sparse-ofdm [--config FILE] [--sweep key=a:b:step] ...``."""

from __future__ import annotations

import argparse
import sys
import warnings

from .config import ConfigError, SystemConfig, apply_overrides, calibrate_tau0, check, load, parse_text
from .harness import (
    baseline_rows,
    compare_with_baselines,
    comparison_csv,
    manifest,
    parse_axis,
    sweep,
    write_outputs,
)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="sparse-ofdm",
        description="Seeded Monte Carlo sweeps of sparse-OFDM neighbor discovery.",
    )
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override one configuration key (repeatable)")
    p.add_argument("--sweep", action="append", default=[], metavar="KEY=A:B:STEP",
                   help="sweep axis, inclusive range or comma list (repeatable, Cartesian product)")
    p.add_argument("--trials", type=int, default=100, help="frames per grid point (default 100)")
    p.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
    p.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    p.add_argument("--out", default="results", help="output directory (default ./results)")
    p.add_argument("--baselines", action="store_true",
                   help="append ALOHA and CSMA rows for every grid point")
    p.add_argument("--target", type=float, default=1e-3,
                   help="miss-rate target for baseline rows and --compare (default 1e-3)")
    p.add_argument("--compare", metavar="K1,K2,...",
                   help="also find the shortest frame meeting --target for each K and write comparison.csv")
    p.add_argument("--calibrate-tau0", type=float, metavar="FP",
                   help="calibrate tau0 at each grid point for this noise-only zeroton false-positive rate")
    p.add_argument("--census", action="store_true", help="also count devices the ideal peeling oracle cannot reach")
    return p


def _settings(pairs: list[str]) -> dict[str, str]:
    return parse_text("\n".join(pairs))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load(args.config) if args.config else SystemConfig()
        cfg = apply_overrides(cfg, _settings(args.set))
        if args.seed is not None:
            cfg = apply_overrides(cfg, {"master_seed": args.seed})
        axes = [parse_axis(s) for s in args.sweep]
        if args.trials < 1 or args.workers < 1:
            raise ConfigError(["--trials and --workers must be >= 1"])
        check(cfg)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    if args.calibrate_tau0 is not None:
        fp = args.calibrate_tau0
        if not 0 < fp < 1 or any(k == "tau0" for k, _ in axes):
            print("config error: --calibrate-tau0 needs 0 < FP < 1 and no tau0 sweep", file=sys.stderr)
            return 2
        cfg = cfg.replace(tau0=calibrate_tau0(cfg, fp))
        print(f"tau0 calibrated to {cfg.tau0:.6g} for zeroton false-positive rate {fp:g}")

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result = sweep(cfg, axes, trials=args.trials, workers=args.workers, census=args.census,
                       calibrate_fp=args.calibrate_tau0)
    if args.baselines:
        for p in result.points:
            result.extra_rows.extend(baseline_rows(p.cfg.k_active, p.cfg.snr_db, p.cfg.n_population, args.target))

    extra = {}
    if args.census:
        extra["unpeelable_devices"] = [p.unpeelable for p in result.points]
    if args.compare:
        ks = [int(k) for k in args.compare.split(",") if k.strip()]
        rows = compare_with_baselines(ks, args.target, cfg.snr_db, m_max_delay=cfg.m_max_delay,
                                      n_population=cfg.n_population, trials=args.trials,
                                      workers=args.workers, master_seed=cfg.master_seed)
        extra["comparison"] = [r.as_dict() for r in rows]
    data = manifest(cfg, axes, args.trials, args.workers, result, calibrate_tau0=args.calibrate_tau0, **extra)
    csv_path, man_path = write_outputs(args.out, result, data)
    if args.compare:
        (csv_path.parent / "comparison.csv").write_text(comparison_csv(rows))

    bad = 0
    for i, p in enumerate(result.points):
        if p.status != "ok":
            bad += 1
            print(f"point {i}: {p.status}", file=sys.stderr)
            continue
        print(f"point {i}: K={p.cfg.k_active} L={p.cfg.code_length} SNR={p.cfg.snr_db + 0.0:.2f} dB "
              f"miss={p.miss_rate:.3g} fa={p.fa_rate:.3g} err={p.error_rate:.3g} ({p.trials} trials)")
    print(f"wrote {csv_path} and {man_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
