"""Batch experiment harness.

Examples
--------
::

    hgsg preset fig3 --out fig3.csv
    hgsg run --config experiment.yaml --out rows.csv --threads 4
    hgsg sweep --config sweep.yaml --out curve.csv --plot-script plot_curve.py

A config is a YAML mapping. Every axis may be a scalar or a list; one CSV
row is produced for each combination::

    function: f2            # f1 | f2 | f3 | f4, or a list
    d: 10
    schedule: one_pow2      # ten_pow2 | one_pow2 | exp_decay (aliases A, B, C)
    lambda: 1.0
    w: 0.5                  # scalar or per-dimension list
    p_max: [1, 2, 4]
    epsilon: [1.0e-4, 1.0e-6]
    indicator: absolute     # absolute | relative
    termination: modified   # modified | classic, or both as a list
    n_samples: 1000
    seed: 0
    max_points: 2000000
    max_level: 30

Exit status is 0 on success, 1 on a configuration error and 2 when
``--strict`` is given and at least one run hit a cap.
"""

from __future__ import annotations

import argparse
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
import csv
import io
import itertools
import logging
import sys
import time

import yaml

from hgsg.adaptive import INDICATOR_MODES, TERMINATION_MODES, AdaptiveConfig, run
from hgsg.exceptions import ConfigError
from hgsg.functions import FUNCTION_IDS, compute_metrics, make_test_function, reference_integral

logger = logging.getLogger(__name__)

COLUMNS = [
    "function", "d", "schedule", "lambda", "p_max", "indicator", "termination", "epsilon",
    "n_evals", "linf", "l2", "abs_integral_error", "reason",
]
TIMING_COLUMN = "wall_time_s"

PRESETS = {
    "fig3": {
        "function": "f4", "d": 2, "schedule": "ten_pow2", "epsilon": 1e-6, "p_max": [1, 2],
        "indicator": "absolute",
    },
    "fig4": {
        "function": "f1", "d": 2, "epsilon": 1e-6, "p_max": [1, 2], "indicator": "absolute",
    },
    "fig6": {
        "function": ["f2", "f3", "f4"], "d": 10, "schedule": "one_pow2", "p_max": [1, 2, 4],
        "epsilon": [1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8], "indicator": "absolute",
    },
    "fig7": {
        "function": ["f3", "f4"], "d": 100, "schedule": "exp_decay", "lambda": 1.0, "p_max": 1,
        "epsilon": 1e-6, "termination": ["classic", "modified"],
        "indicator": "absolute",
    },
    "table1": {
        "function": "f4", "d": [100, 200, 300, 400, 500, 600, 700], "schedule": "exp_decay",
        "lambda": 1.0, "p_max": 2, "epsilon": 1e-5, "indicator": "relative",
    },
    "table2": {
        "function": "f4", "d": 100, "schedule": "exp_decay", "lambda": [1.0, 2.5, 5.0, 7.5],
        "p_max": 2, "epsilon": 1e-6, "indicator": "relative",
    },
}


def _as_list(value):
    return list(value) if isinstance(value, (list, tuple)) else [value]


@dataclass
class ExperimentConfig:
    function: list = field(default_factory=lambda: ["f2"])
    d: list = field(default_factory=lambda: [2])
    schedule: str | None = None
    lam: list = field(default_factory=lambda: [1.0])
    w: object = None
    p_max: list = field(default_factory=lambda: [1])
    epsilon: list = field(default_factory=lambda: [1e-6])
    indicator: str = "absolute"
    termination: list = field(default_factory=lambda: ["modified"])
    n_samples: int = 1000
    seed: int = 0
    max_points: int = 2_000_000
    max_level: int = 30

    @classmethod
    def from_mapping(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config", "must be a mapping")
        data = dict(data)
        if "lambda" in data:
            data["lam"] = data.pop("lambda")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(unknown[0], "unknown configuration key")
        for name in ("function", "d", "lam", "p_max", "epsilon", "termination"):
            if name in data:
                data[name] = _as_list(data[name])
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        for fid in self.function:
            if fid not in FUNCTION_IDS:
                raise ConfigError("function", f"unknown function {fid!r}")
            if fid != "f1" and self.schedule is None:
                raise ConfigError("schedule", f"{fid} needs a coefficient schedule")
        for name in ("d", "p_max"):
            for v in getattr(self, name):
                if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                    raise ConfigError(name, f"must be a positive integer, got {v!r}")
        for v in self.epsilon:
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
                raise ConfigError("epsilon", f"must be positive, got {v!r}")
        for v in self.lam:
            if not isinstance(v, (int, float)) or not v > 0:
                raise ConfigError("lambda", f"must be positive, got {v!r}")
        if self.indicator not in INDICATOR_MODES:
            raise ConfigError("indicator", f"must be one of {INDICATOR_MODES}")
        for t in self.termination:
            if t not in TERMINATION_MODES:
                raise ConfigError("termination", f"must be one of {TERMINATION_MODES}")
        if not isinstance(self.n_samples, int) or self.n_samples < 1:
            raise ConfigError("n_samples", "must be a positive integer")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed", "must be an unsigned 64-bit integer")
        # builds each function once so shape errors surface before any run
        for fid, d, lam in itertools.product(self.function, self.d, self.lam):
            make_test_function(fid, d, self.schedule, lam, w=self.w)

    def cells(self) -> list:
        """All (function, lambda, d, p_max, termination, epsilon) combinations."""
        return list(itertools.product(self.function, self.lam, self.d, self.p_max,
                                      self.termination, self.epsilon))


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError("config", f"invalid YAML: {exc}") from exc
    return ExperimentConfig.from_mapping(data or {})


def run_cell(cfg: ExperimentConfig, cell, timing: bool = False) -> dict:
    fid, lam, d, p_max, termination, eps = cell
    tf = make_test_function(fid, d, cfg.schedule, lam, w=cfg.w)
    config = AdaptiveConfig(epsilon=eps, p_max=p_max, indicator=cfg.indicator,
                            termination=termination, max_points=cfg.max_points,
                            max_level=cfg.max_level, seed=cfg.seed, vectorized=True)
    t0 = time.perf_counter()
    state, report = run(tf, d, config)
    elapsed = time.perf_counter() - t0
    m = compute_metrics(tf, state, reference_integral(tf), cfg.n_samples, cfg.seed)
    row = {
        "function": fid, "d": d, "schedule": "" if fid == "f1" else cfg.schedule, "lambda": lam,
        "p_max": p_max, "indicator": cfg.indicator, "termination": termination, "epsilon": eps,
        "n_evals": report.n_evaluations, "linf": m.linf, "l2": m.l2,
        "abs_integral_error": abs(m.integral), "reason": report.reason,
    }
    if timing:
        row[TIMING_COLUMN] = elapsed
    logger.info("%s d=%d p=%d eps=%g %s: N=%d", fid, d, p_max, eps, termination, report.n_evaluations)
    return row


def _run_cell_args(args):
    return run_cell(*args)


def run_experiment(cfg: ExperimentConfig, threads: int = 1, timing: bool = False) -> list:
    """One row per cell, in cell order regardless of completion order."""
    cells = cfg.cells()
    if threads > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(_run_cell_args, [(cfg, c, timing) for c in cells]))
    return [run_cell(cfg, c, timing) for c in cells]


def sweep(cfg: ExperimentConfig, threads: int = 1, timing: bool = False) -> list:
    """Rows grouped into one series per non-epsilon setting, sorted by evaluations."""
    rows = run_experiment(cfg, threads, timing)

    def series(r):
        return (r["function"], r["lambda"], r["d"], r["p_max"], r["termination"])

    order = {}
    for r in rows:
        order.setdefault(series(r), len(order))
    return sorted(rows, key=lambda r: (order[series(r)], r["n_evals"], -r["epsilon"]))


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def format_csv(rows, timing: bool = False) -> str:
    columns = COLUMNS + ([TIMING_COLUMN] if timing else [])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


PLOT_STUB = '''"""Log-log convergence plot for a CSV written by hgsg."""
import csv
import sys
from collections import defaultdict

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else {csv_path!r}
metric = sys.argv[2] if len(sys.argv) > 2 else "linf"
series = defaultdict(list)
with open(path) as fh:
    for row in csv.DictReader(fh):
        key = (row["function"], row["d"], row["p_max"], row["termination"])
        series[key].append((int(row["n_evals"]), float(row[metric])))
for (fid, d, p, term), pts in series.items():
    n, e = zip(*sorted(pts))
    plt.loglog(n, e, marker="o", label=f"{{fid}} d={{d}} p={{p}} {{term}}")
plt.xlabel("function evaluations")
plt.ylabel(metric)
plt.legend()
plt.show()
'''


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="CSV output path (default: stdout)")
    common.add_argument("--seed", type=int, help="seed for the validation samples")
    common.add_argument("--threads", type=int, default=1, help="worker processes for independent cells")
    common.add_argument("--strict", action="store_true", help="exit 2 if any run was capped")
    common.add_argument("--timing", action="store_true",
                        help="append a wall time column (output is then not reproducible)")
    common.add_argument("--plot-script", help="also write a matplotlib script for the CSV")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="hgsg", description="Adaptive sparse grid benchmark harness.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p_run = sub.add_parser("run", parents=[common], help="one row per configured cell")
    p_run.add_argument("--config", required=True)
    p_sweep = sub.add_parser("sweep", parents=[common], help="convergence series over epsilon")
    p_sweep.add_argument("--config", required=True)
    p_preset = sub.add_parser("preset", parents=[common], help="run a built-in experiment")
    p_preset.add_argument("name", choices=sorted(PRESETS))
    p_preset.add_argument("--config", help="YAML overrides applied on top of the preset")
    return parser


def preset_config(name: str, overrides: dict | None = None) -> ExperimentConfig:
    if name not in PRESETS:
        raise ConfigError("preset", f"unknown preset {name!r}")
    data = dict(PRESETS[name])
    data.update(overrides or {})
    return ExperimentConfig.from_mapping(data)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "preset":
            overrides = {}
            if args.config:
                with open(args.config) as fh:
                    overrides = yaml.safe_load(fh) or {}
            cfg = preset_config(args.name, overrides)
        else:
            cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
            cfg.validate()
        if args.threads < 1:
            raise ConfigError("threads", "must be >= 1")
    except (ConfigError, OSError, yaml.YAMLError) as exc:
        print(f"hgsg: config error: {exc}", file=sys.stderr)
        return 1

    if len(cfg.epsilon) < 2 and args.command == "sweep":
        logger.warning("a sweep with fewer than two epsilon values is a single point per series")
    worker = sweep if args.command == "sweep" else run_experiment
    rows = worker(cfg, args.threads, args.timing)
    text = format_csv(rows, args.timing)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.plot_script:
        with open(args.plot_script, "w") as fh:
            fh.write(PLOT_STUB.format(csv_path=args.out or "results.csv"))
    if args.strict and any(r["reason"] != "converged" for r in rows):
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
