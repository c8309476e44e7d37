"""Command-line front end: analytic and simulated sweeps written as CSV.

Examples::

    uavcharge --sweep ratio=1:20:1 --capacity 1 --out ratio.csv
    uavcharge --figure fig3 --mode both --replications 200 --seed 7 --out fig3.csv
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .availability import conditional_availability, state_availability
from .coverage import COMPONENTS, coverage, coverage_inputs
from .energy import expected_profile
from .params import ConfigError, SystemConfig, default_config, format_config, load_config
from .queueing import solve_queue
from .simulation import SimScenario, simulate_cell, simulate_network

COLUMNS = ["axis", "value", "p_a", "p_cov", *COMPONENTS, "sim_p_a", "sim_p_cov", "sim_hw", "seed"]
FIGURE_EXTRA = ["ratio", "capacity", "n_uavs", "p_a_given_n", "ceiling", "sim_p_a_hw"]
AXES = {"ratio": "ratio", "capacity": "capacity_c", "theta": "theta"}
FIGURES = ("fig2", "fig3", "fig4", "fig5")
MODES = ("analytic", "sim", "both")
WORKER_ENV = "UAVCHARGE_WORKERS"


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple[float, ...]
    mode: str = "analytic"
    out: str | None = None

    def __post_init__(self) -> None:
        if self.axis not in AXES:
            raise ValueError(f"sweep axis must be one of {sorted(AXES)}")
        if not self.values:
            raise ValueError("sweep has no values")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")


@dataclass(frozen=True)
class RunOptions:
    mode: str = "analytic"
    method: str = "alzer"
    replications: int = 100
    seed: int = 0
    n_outer: int = 4096
    convention: str = "renorm"
    kernel: str = "backlog"


def parse_range(text: str) -> tuple[float, ...]:
    """``lo:hi:step`` (inclusive) or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range must be lo:hi:step, got {text!r}")
        lo, hi, step = (float(p) for p in parts)
        if step <= 0:
            raise ValueError("step must be > 0")
        if hi < lo:
            raise ValueError("range upper bound below lower bound")
        n = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return tuple(float(np.round(lo + k * step, 12)) for k in range(n))
    values = tuple(float(v) for v in text.split(",") if v.strip())
    if not values:
        raise ValueError("empty value list")
    return values


def parse_sweep(text: str, mode: str = "analytic", out: str | None = None) -> SweepSpec:
    if "=" not in text:
        raise ValueError(f"sweep must look like axis=lo:hi:step, got {text!r}")
    axis, rng = text.split("=", 1)
    return SweepSpec(axis.strip(), parse_range(rng.strip()), mode, out)


def _apply(cfg: SystemConfig, axis: str, value: float) -> SystemConfig:
    field = AXES[axis]
    if field == "capacity_c":
        if not float(value).is_integer():
            raise ValueError("capacity values must be integers")
        value = int(value)
    return cfg.with_overrides(**{field: value})


# --------------------------------------------------------------------------- point evaluation


def evaluate_point(cfg: SystemConfig, opts: RunOptions, want_cov: bool = True) -> dict:
    """Analytic and/or simulated metrics for one configuration; missing values are absent keys."""
    row: dict = {"seed": opts.seed}
    if opts.mode in ("analytic", "both"):
        inputs = coverage_inputs(cfg, opts.convention, opts.kernel)
        row["p_a"] = inputs.availability.p_a
        if want_cov:
            rep = coverage(cfg, opts.method, opts.n_outer, opts.seed, opts.convention, opts.kernel, inputs=inputs)
            row["p_cov"] = rep.p_cov_total
            row.update(rep.components)
    if opts.mode in ("sim", "both"):
        scen = SimScenario(replications=opts.replications, seed=opts.seed,
                           mode="full" if want_cov else "queue_only")
        est = simulate_network(scen, cfg, workers=1)
        row["sim_p_a"] = est["p_a"].estimate
        row["sim_p_a_hw"] = est["p_a"].half_width_95
        if want_cov:
            row["sim_p_cov"] = est["p_cov"].estimate
            row["sim_hw"] = est["p_cov"].half_width_95
        else:
            row["sim_hw"] = est["p_a"].half_width_95
    return row


def _point_task(args):
    cfg, opts, want_cov, base = args
    row = dict(base)
    row.update(evaluate_point(cfg, opts, want_cov))
    return row


def _workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKER_ENV, "1")))
    except ValueError:
        return 1


def _run_tasks(tasks: list) -> list[dict]:
    """Evaluate tasks, keeping input order whatever the completion order."""
    workers = _workers()
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_point_task, tasks))
    return [_point_task(t) for t in tasks]


def run_sweep(spec: SweepSpec, cfg: SystemConfig, opts: RunOptions) -> list[dict]:
    tasks = [(_apply(cfg, spec.axis, v), opts, True, {"axis": spec.axis, "value": v}) for v in spec.values]
    return _run_tasks(tasks)


def run_figure(figure: str, cfg: SystemConfig, opts: RunOptions, ratios=None, capacities=None) -> list[dict]:
    """Rows for one of the figure reproductions (see module docs for the layout)."""
    if figure not in FIGURES:
        raise ValueError(f"figure must be one of {FIGURES}")
    if figure == "fig2":
        return _figure2(cfg, opts, capacities)
    ratios = tuple(ratios) if ratios else None
    caps = tuple(capacities) if capacities else (1, 2, 3, 4, 5, 6)
    tasks = []
    if figure in ("fig3", "fig5"):
        ratios = ratios or tuple(float(r) for r in range(1, 21))
        for c in caps:
            for r in ratios:
                point = cfg.with_overrides(ratio=r, capacity_c=int(c))
                tasks.append((point, opts, figure == "fig5",
                              {"axis": "ratio", "value": r, "ratio": r, "capacity": int(c)}))
    else:
        ratios = ratios or (1.0, 5.0, 10.0, 20.0)
        for r in ratios:
            for c in caps:
                point = cfg.with_overrides(ratio=r, capacity_c=int(c))
                tasks.append((point, opts, True, {"axis": "capacity", "value": int(c), "ratio": r, "capacity": int(c)}))
    return _run_tasks(tasks)


def _figure2(cfg: SystemConfig, opts: RunOptions, capacities=None) -> list[dict]:
    """``P(a|N)`` against capacity for several cell sizes, with the zero-waiting ceiling."""
    caps = tuple(int(c) for c in capacities) if capacities else (1, 2, 3, 4, 5, 6)
    profile = expected_profile(cfg.net, cfg.energy)
    ceiling = state_availability(0, cfg.net, cfg.energy)
    rows = []
    for n in (4, 8, 12, 16, 20):
        for c in caps:
            point = cfg.with_overrides(capacity_c=c)
            row = {"axis": "capacity", "value": c, "capacity": c, "ratio": cfg.net.ratio, "n_uavs": n,
                   "ceiling": ceiling, "seed": opts.seed}
            if opts.mode in ("analytic", "both"):
                q = solve_queue(n, c, point.energy, profile, opts.kernel)
                row["p_a_given_n"] = conditional_availability(n, q, point.net, point.energy)
            if opts.mode in ("sim", "both"):
                est = simulate_cell(n, point, replications=opts.replications, seed=opts.seed)
                row["sim_p_a"] = est.estimate
                row["sim_hw"] = row["sim_p_a_hw"] = est.half_width_95
            rows.append(row)
    return rows


# --------------------------------------------------------------------------- output


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if not math.isfinite(value):
        return ""
    return repr(float(np.round(value, 10)))


def write_csv(rows: list[dict], cfg: SystemConfig, out, extra_columns=()) -> None:
    """Header comments echo the configuration, then a fixed column order."""
    cols = COLUMNS + [c for c in extra_columns if c not in COLUMNS]
    for line in format_config(cfg).splitlines():
        out.write(line if line.startswith("#") else f"# {line}")
        out.write("\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(cols)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) if c != "axis" else row.get(c, "") for c in cols])


def write_plot(rows: list[dict], path: str, y: str = "p_cov") -> None:
    """Static SVG of a column against ``value``, one line per series (needs matplotlib)."""
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:
        raise RuntimeError("plotting needs matplotlib (pip install 'artifact[plot]')") from exc
    series: dict = {}
    for r in rows:
        key = tuple((k, r[k]) for k in ("capacity", "ratio", "n_uavs") if k in r and k != r["axis"]
                    and not (r["axis"] == "capacity" and k == "capacity"))
        series.setdefault(key, []).append(r)
    fig, ax = plt.subplots(figsize=(6, 4))
    for key, pts in series.items():
        xs = [p["value"] for p in pts if y in p]
        ys = [p[y] for p in pts if y in p]
        if xs:
            ax.plot(xs, ys, marker="o", label=", ".join(f"{k}={v:g}" for k, v in key) or y)
        sy = "sim_p_a" if y in ("p_a", "p_a_given_n") else "sim_p_cov"
        sx = [p["value"] for p in pts if sy in p]
        if sx:
            ax.errorbar(sx, [p[sy] for p in pts if sy in p], yerr=[p.get("sim_hw", 0) for p in pts if sy in p],
                        fmt="x", capsize=2)
    ax.set_xlabel(rows[0]["axis"] if rows else "value")
    ax.set_ylabel(y)
    ax.grid(alpha=0.3)
    if len(series) > 1:
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


# --------------------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="uavcharge", description="Availability and coverage of battery-limited "
                                "UAV hotspots served from shared charging stations.")
    target = p.add_mutually_exclusive_group()
    target.add_argument("--figure", choices=FIGURES, help="reproduce one of the figure sweeps")
    target.add_argument("--sweep", metavar="AXIS=LO:HI:STEP", help="sweep ratio, capacity or theta")
    p.add_argument("--config", help="configuration file (key = value lines)")
    p.add_argument("--capacity", help="charging capacity c, or a list/range for figures")
    p.add_argument("--ratio", help="UAV-to-station density ratio, or a list/range for figures")
    p.add_argument("--mode", choices=MODES, default="analytic")
    p.add_argument("--replications", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("--method", choices=("alzer", "exact"), default="alzer")
    p.add_argument("--n-outer", type=int, default=4096, help="outer low-discrepancy sample count")
    p.add_argument("--convention", choices=("renorm", "shift", "include-n0"), default="renorm",
                   help="how empty cells enter the cell-size mixture")
    p.add_argument("--kernel", choices=("backlog", "departures"), default="backlog",
                   help="queue transition kernel")
    p.add_argument("--plot", metavar="SVG", help="also write a static SVG plot")
    return p


def _single_or_list(text: str | None):
    if text is None:
        return None
    return parse_range(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.seed < 0 or args.seed >= 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        if args.replications < 1:
            raise ValueError("replications must be >= 1")
        cfg = load_config(args.config) if args.config else default_config()
        opts = RunOptions(args.mode, args.method, args.replications, args.seed, args.n_outer,
                          args.convention, args.kernel)
        ratios, caps = _single_or_list(args.ratio), _single_or_list(args.capacity)
        extra: list[str] = []
        if args.figure:
            rows = run_figure(args.figure, cfg, opts, ratios, caps)
            extra = FIGURE_EXTRA
            y = {"fig2": "p_a_given_n", "fig3": "p_a"}.get(args.figure, "p_cov")
        else:
            if ratios:
                if len(ratios) > 1:
                    raise ValueError("--ratio takes a single value outside figure mode")
                cfg = cfg.with_overrides(ratio=ratios[0])
            if caps:
                if len(caps) > 1 or not caps[0].is_integer():
                    raise ValueError("--capacity takes a single integer outside figure mode")
                cfg = cfg.with_overrides(capacity_c=int(caps[0]))
            spec = parse_sweep(args.sweep, args.mode, args.out) if args.sweep else SweepSpec(
                "ratio", (cfg.net.ratio,), args.mode, args.out)
            rows = run_sweep(spec, cfg, opts)
            extra = ["sim_p_a_hw"]
            y = "p_cov"
        buf = io.StringIO()
        write_csv(rows, cfg, buf, extra)
        if args.out:
            try:
                Path(args.out).write_text(buf.getvalue())
            except OSError as exc:
                raise OSError(f"cannot write {args.out}: {exc.strerror}") from None
        else:
            sys.stdout.write(buf.getvalue())
        if args.plot:
            write_plot(rows, args.plot, y)
    except (ConfigError, ValueError, OSError, RuntimeError) as exc:
        print(f"uavcharge: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
