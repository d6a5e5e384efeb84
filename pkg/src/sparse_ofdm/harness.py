"""Seeded Monte Carlo trials, parameter sweeps and the baseline comparison."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .baselines import (
    aloha_miss_probability,
    aloha_slots_for_target,
    csma_miss_probability,
    csma_slots_for_target,
    symbols_required,
)
from .channel import draw_scenario, transmit
from .codebook import Codebook
from .codec import codec_for
from .config import SystemConfig, apply_overrides, calibrate_tau0, min_c1, to_text, validate
from .decoder import PeelingDecoder
from .graph import build_graph, classify_components, peel
from .seeding import ROLE_TRIAL, derive_seed

CSV_COLUMNS = [
    "scheme",
    "point",
    "status",
    "n_population",
    "k_active",
    "b_bins",
    "m_max_delay",
    "t_degree",
    "c0",
    "c1",
    "c2",
    "c3",
    "code_rate",
    "tau0",
    "snr_db",
    "code_length",
    "n_slots",
    "trials",
    "misses",
    "false_alarms",
    "error_events",
    "delay_errors",
    "miss_rate",
    "miss_ci",
    "fa_rate",
    "fa_ci",
    "error_rate",
    "error_ci",
    "delay_error_rate",
]

CONFIDENCE_Z = 1.959963984540054  # two-sided 95 %


@dataclass(frozen=True)
class TrialMetrics:
    k_active: int
    misses: int
    false_alarms: int
    delay_errors: int
    code_length_samples: int
    unpeelable: int = 0  # ground-truth graph census: devices no peeling order reaches
    complex_components: int = 0

    @property
    def event_error(self) -> bool:
        return self.misses + self.false_alarms > 0


def run_trial(cfg: SystemConfig, trial_seed: int, census: bool = False) -> TrialMetrics:
    """One frame end to end; deterministic in ``(cfg, trial_seed)``."""
    codec = codec_for(cfg)
    codebook = Codebook(cfg, codec)
    scenario = draw_scenario(cfg, trial_seed)
    frame = transmit(cfg, codebook, scenario, trial_seed)
    out = PeelingDecoder(cfg, codec, codebook).run(frame)
    truth = dict(zip(scenario.devices, scenario.delays))
    found = out.detected
    delay_errors = sum(out.estimates[k].delay != truth[k] for k in found & truth.keys())
    unpeelable = complex_components = 0
    if census:
        graph = build_graph(scenario, codebook, cfg)
        unpeelable = len(truth) - len(peel(graph))
        comps = classify_components(graph)["components"]
        complex_components = sum(not (c["is_tree"] or c["is_unicyclic"]) for c in comps)
    return TrialMetrics(
        k_active=len(truth),
        misses=len(truth.keys() - found),
        false_alarms=len(found - truth.keys()),
        delay_errors=delay_errors,
        code_length_samples=cfg.code_length,
        unpeelable=unpeelable,
        complex_components=complex_components,
    )


def _trial_task(args) -> TrialMetrics:
    cfg, seed, census = args
    return run_trial(cfg, seed, census)


def trial_seed(cfg: SystemConfig, coords: Sequence[int], trial: int) -> int:
    return derive_seed(cfg.master_seed, ROLE_TRIAL, *coords, trial)


def wilson_half_width(successes: int, n: int, z: float = CONFIDENCE_Z) -> float:
    if n == 0:
        return math.nan
    p = successes / n
    denom = 1 + z * z / n
    return z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom


@dataclass
class PointSummary:
    cfg: SystemConfig
    coords: tuple[int, ...]
    trials: int = 0
    device_observations: int = 0
    misses: int = 0
    false_alarms: int = 0
    error_events: int = 0
    delay_errors: int = 0
    unpeelable: int = 0
    status: str = "ok"
    wall_time: float = 0.0

    def add(self, m: TrialMetrics) -> None:
        self.trials += 1
        self.device_observations += m.k_active
        self.misses += m.misses
        self.false_alarms += m.false_alarms
        self.error_events += int(m.event_error)
        self.delay_errors += m.delay_errors
        self.unpeelable += m.unpeelable

    @property
    def miss_rate(self) -> float:
        return self.misses / self.device_observations if self.device_observations else math.nan

    @property
    def fa_rate(self) -> float:
        return self.false_alarms / self.device_observations if self.device_observations else math.nan

    @property
    def error_rate(self) -> float:
        return self.error_events / self.trials if self.trials else math.nan

    @property
    def delay_error_rate(self) -> float:
        return self.delay_errors / self.device_observations if self.device_observations else math.nan

    def row(self, point: int) -> dict:
        c = self.cfg
        n_dev = self.device_observations
        return {
            "scheme": "sparse_ofdm",
            "point": point,
            "status": self.status,
            "n_population": c.n_population,
            "k_active": c.k_active,
            "b_bins": c.b_bins,
            "m_max_delay": c.m_max_delay,
            "t_degree": c.t_degree,
            "c0": c.c0,
            "c1": c.c1,
            "c2": c.c2,
            "c3": c.c3,
            "code_rate": c.code_rate,
            "tau0": c.tau0,
            "snr_db": c.snr_db,
            "code_length": c.code_length,
            "n_slots": "",
            "trials": self.trials,
            "misses": self.misses,
            "false_alarms": self.false_alarms,
            "error_events": self.error_events,
            "delay_errors": self.delay_errors,
            "miss_rate": self.miss_rate,
            "miss_ci": wilson_half_width(self.misses, n_dev),
            "fa_rate": self.fa_rate,
            "fa_ci": wilson_half_width(min(self.false_alarms, n_dev), n_dev),
            "error_rate": self.error_rate,
            "error_ci": wilson_half_width(self.error_events, self.trials),
            "delay_error_rate": self.delay_error_rate,
        }


@dataclass
class SweepResult:
    points: list[PointSummary] = field(default_factory=list)
    extra_rows: list[dict] = field(default_factory=list)
    wall_time: float = 0.0

    def rows(self) -> list[dict]:
        return [p.row(i) for i, p in enumerate(self.points)] + self.extra_rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in self.rows():
            writer.writerow({k: _fmt(row.get(k, "")) for k in CSV_COLUMNS})
        return buf.getvalue()


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return format(value + 0.0, ".10g")  # + 0.0 folds -0.0 into 0.0
    return str(value)


def parse_axis(spec: str) -> tuple[str, list]:
    """``key=a:b:step`` (inclusive range) or ``key=v1,v2,...``."""
    if "=" not in spec:
        raise ValueError(f"bad sweep spec {spec!r}; expected key=a:b:step or key=v1,v2")
    key, rhs = (s.strip() for s in spec.split("=", 1))
    if ":" in rhs:
        parts = rhs.split(":")
        if len(parts) != 3:
            raise ValueError(f"bad range {rhs!r}")
        a, b, step = (float(p) for p in parts)
        if step == 0 or (b - a) / step < 0:
            raise ValueError(f"empty range {rhs!r}")
        n = int(math.floor((b - a) / step + 1e-9)) + 1
        values = [a + i * step for i in range(n)]
        if all(float(p).is_integer() for p in parts):
            values = [int(round(v)) for v in values]
        else:
            values = [round(v, 12) for v in values]
        return key, values
    return key, [v.strip() for v in rhs.split(",") if v.strip()]


def grid_points(base: SystemConfig, axes: Sequence[tuple[str, list]]):
    """Yield ``(coords, cfg_or_None, violations)`` in row-major grid order."""
    if not axes:
        yield (), base, validate(base, warn=False)
        return
    keys = [k for k, _ in axes]
    for coords in itertools.product(*(range(len(v)) for _, v in axes)):
        settings = {k: axes[i][1][j] for i, (k, j) in enumerate(zip(keys, coords))}
        try:
            cfg = apply_overrides(base, settings)
        except (ValueError, TypeError) as exc:
            yield coords, None, [str(exc)]
            continue
        yield coords, cfg, validate(cfg, warn=False)


class _Runner:
    """Runs trial tasks in-process or on a bounded process pool, preserving order."""

    def __init__(self, workers: int):
        self.workers = max(1, int(workers))
        self.pool = ProcessPoolExecutor(max_workers=self.workers) if self.workers > 1 else None

    def map(self, tasks: list) -> list[TrialMetrics]:
        if self.pool is None or len(tasks) <= 1:
            return [_trial_task(t) for t in tasks]
        chunk = max(1, len(tasks) // (4 * self.workers))
        return list(self.pool.map(_trial_task, tasks, chunksize=chunk))

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        if self.pool is not None:
            self.pool.shutdown()


def sweep(
    base: SystemConfig,
    axes: Sequence[tuple[str, list]] = (),
    trials: int = 100,
    workers: int = 1,
    census: bool = False,
    calibrate_fp: float | None = None,
) -> SweepResult:
    """Run ``trials`` frames at every grid point.

    With ``calibrate_fp`` set, tau0 is recalibrated at each point so the
    noise-only zeroton false-positive rate matches that target.

    Trial seeds depend only on the master seed, the grid coordinates and the
    trial number, so the output is identical for any worker count. A point
    whose configuration is invalid is recorded with its violations and skipped.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    start = time.perf_counter()
    result = SweepResult()
    with _Runner(workers) as runner:
        for coords, cfg, violations in grid_points(base, axes):
            summary = PointSummary(cfg if cfg is not None else base, tuple(coords))
            t0 = time.perf_counter()
            if violations:
                summary.status = "config_error: " + "; ".join(violations)
            else:
                if calibrate_fp is not None:
                    cfg = summary.cfg = cfg.replace(tau0=calibrate_tau0(cfg, calibrate_fp))
                tasks = [(cfg, trial_seed(cfg, coords, t), census) for t in range(trials)]
                for metrics in runner.map(tasks):
                    summary.add(metrics)
            summary.wall_time = time.perf_counter() - t0
            result.points.append(summary)
    result.wall_time = time.perf_counter() - start
    return result


def baseline_rows(k: int, snr_db: float, n_population: int, target: float) -> list[dict]:
    snr = 10 ** (snr_db / 10)
    rows = []
    for scheme, slots, miss in (
        ("aloha", aloha_slots_for_target(k, target), lambda n: aloha_miss_probability(k, None, n)),
        ("csma", csma_slots_for_target(k, target), lambda n: csma_miss_probability(k, n)),
    ):
        rows.append(
            {
                "scheme": scheme,
                "point": "",
                "status": "analytic",
                "n_population": n_population,
                "k_active": k,
                "snr_db": snr_db,
                "code_length": symbols_required(n_population, snr, slots),
                "n_slots": slots,
                "miss_rate": miss(slots),
            }
        )
    return rows


# ---- sparse OFDM vs random access ----------------------------------------

DEFAULT_LADDER = [
    {"c0": c0, "c2": c2, "c3": c3}
    for c0 in (1, 2, 4, 6)
    for c2 in (4, 6)
    for c3 in (4, 6, 8)
]


def meets_target(cfg: SystemConfig, target: float, trials: int, coords=(), workers: int = 1) -> PointSummary:
    """Evaluate a frame design, stopping early once the target is provably missed."""
    summary = PointSummary(cfg, tuple(coords))
    allowed = math.floor(target * trials * cfg.k_active)
    batch = max(1, 4 * workers)
    with _Runner(workers) as runner:
        for lo in range(0, trials, batch):
            tasks = [(cfg, trial_seed(cfg, coords, t), False) for t in range(lo, min(trials, lo + batch))]
            for m in runner.map(tasks):
                summary.add(m)
            if summary.misses > allowed or summary.false_alarms > allowed:
                summary.status = "target_missed"
                return summary
    return summary


@dataclass
class ComparisonRow:
    k_active: int
    snr_db: float
    target: float
    sparse_ofdm_length: int | None
    aloha_symbols: int
    csma_symbols: int
    sparse_miss_rate: float = math.nan
    sparse_fa_rate: float = math.nan
    design: dict = field(default_factory=dict)

    @property
    def reduction_percent(self) -> float:
        if self.sparse_ofdm_length is None:
            return math.nan
        return 100.0 * (1.0 - self.sparse_ofdm_length / min(self.aloha_symbols, self.csma_symbols))

    def as_dict(self) -> dict:
        d = asdict(self)
        d["sparse_ofdm_length"] = "unreached" if self.sparse_ofdm_length is None else self.sparse_ofdm_length
        d["reduction_percent"] = self.reduction_percent
        return d


def compare_with_baselines(
    k_values: Iterable[int],
    target: float,
    snr_db: float,
    *,
    m_max_delay: int = 20,
    n_population: int = 2**38,
    ladder: Sequence[dict] = tuple(DEFAULT_LADDER),
    trials: int = 200,
    workers: int = 1,
    master_seed: int = 0,
    code_rate: float = 0.9,
) -> list[ComparisonRow]:
    """Shortest frame (over ``ladder``) meeting ``target`` vs ALOHA / CSMA symbol counts.

    Sparse OFDM counts samples, the baselines count symbols; one sample is
    taken as one symbol.
    """
    rows = []
    snr = 10 ** (snr_db / 10)
    for k in k_values:
        base = SystemConfig(
            n_population=n_population,
            k_active=k,
            b_bins=math.ceil(4.5 * k),
            m_max_delay=m_max_delay,
            t_degree=min(3, math.ceil(4.5 * k)),
            code_rate=code_rate,
            noise_variance=10 ** (-snr_db / 10),
            master_seed=master_seed,
        )
        base = base.replace(c1=min_c1(base.index_bits, code_rate))
        designs = sorted(
            (base.replace(**d) for d in ladder),
            key=lambda c: (c.code_length, c.c3, c.c2, c.c0),
        )
        found = None
        for j, cfg in enumerate(designs):
            if validate(cfg, warn=False):
                continue
            s = meets_target(cfg, target, trials, coords=(k, j), workers=workers)
            if s.status == "ok" and s.miss_rate <= target and s.fa_rate <= target:
                found = s
                break
        row = ComparisonRow(
            k_active=k,
            snr_db=snr_db,
            target=target,
            sparse_ofdm_length=found.cfg.code_length if found else None,
            aloha_symbols=symbols_required(n_population, snr, aloha_slots_for_target(k, target)),
            csma_symbols=symbols_required(n_population, snr, csma_slots_for_target(k, target)),
        )
        if found:
            row.sparse_miss_rate = found.miss_rate
            row.sparse_fa_rate = found.fa_rate
            row.design = {"c0": found.cfg.c0, "c1": found.cfg.c1, "c2": found.cfg.c2, "c3": found.cfg.c3}
        rows.append(row)
    return rows


def comparison_csv(rows: Sequence[ComparisonRow]) -> str:
    cols = [
        "k_active",
        "snr_db",
        "target",
        "sparse_ofdm_length",
        "aloha_symbols",
        "csma_symbols",
        "reduction_percent",
        "sparse_miss_rate",
        "sparse_fa_rate",
        "design",
    ]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        d = r.as_dict()
        d["design"] = " ".join(f"{k}={v}" for k, v in d["design"].items())
        writer.writerow({k: _fmt(d[k]) for k in cols})
    return buf.getvalue()


def manifest(base: SystemConfig, axes, trials: int, workers: int, result: SweepResult, **extra) -> dict:
    return {
        "package": "sparse_ofdm",
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "config": to_text(base),
        "master_seed": base.master_seed,
        "axes": [[k, list(v)] for k, v in axes],
        "trials": trials,
        "workers": workers,
        "sample_symbol_convention": "1 sample of sparse OFDM counted as 1 baseline symbol",
        "wall_time_s": round(result.wall_time, 3),
        "point_wall_time_s": [round(p.wall_time, 3) for p in result.points],
        **extra,
    }


def write_outputs(out_dir: str | Path, result: SweepResult, manifest_data: dict) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "results.csv"
    csv_path.write_text(result.to_csv())
    man_path = out / "manifest.json"
    man_path.write_text(json.dumps(manifest_data, indent=2, sort_keys=True) + "\n")
    return csv_path, man_path
