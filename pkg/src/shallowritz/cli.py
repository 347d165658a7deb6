"""Config-driven experiment runner and command-line interface.

Run configs are INI files (key-value with sections); every benchmark from
the study is also available as a named preset. Each run writes
machine-readable artifacts: report.json, trace.csv, model.json, and
cross_section.csv for 2D problems on request.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import ConfigurationError, make_example
from .ib2d import Grid2D, ib_report
from .network import (
    ACTIVATIONS,
    forward,
    init_params,
    load_checkpoint,
    save_checkpoint,
)
from .sampler import RngState
from .trainer import (
    ErrorReport,
    TrainConfig,
    energy_oracle,
    evaluate_errors,
    network_energy_eval,
    train,
)

OUT_ROOT_ENV = "SHALLOWRITZ_OUT_ROOT"
INIT_STREAM = 1 << 40  # reserved substream index for parameter initialization

EXPERIMENT_KINDS = (
    "train",
    "ablate-phi",
    "beta-sweep",
    "optimizer-compare",
    "fixed-vs-resample",
    "ib-compare",
    "points-sweep",
)


@dataclass
class RunConfig:
    """One experiment: which study to run, on which problem, with what budget."""

    experiment: str = "train"
    problem: int = 1
    width: int = 20
    out_dir: str = ""
    train: TrainConfig = field(default_factory=TrainConfig)
    widths: tuple = ()          # network widths for ib-compare / ablate-phi
    plain_widths: tuple = ()    # non-augmented widths for ablate-phi
    betas: tuple = ()           # beta-sweep values
    seeds: tuple = (0, 1, 2)    # optimizer-compare seeds
    grid_sizes: tuple = (80, 160, 320)  # ib-compare grids
    batch_sizes: tuple = ()     # points-sweep (m_domain, m_interface, m_boundary)
    n_test: int = 0             # 0 -> paper default of 100 * m_domain
    compute_oracle: bool = False
    cross_section: bool = False

    def validate(self):
        if self.experiment not in EXPERIMENT_KINDS:
            raise ConfigurationError(f"unknown experiment kind {self.experiment!r}")
        self.train.validate()
        if self.out_dir:
            parent = Path(self.out_dir).resolve().parent
            if not parent.exists():
                raise ConfigurationError(f"output location {parent} does not exist")


PRESETS = {
    "example1": {
        "run": {"experiment": "train", "problem": 1, "width": 20,
                "compute_oracle": True, "cross_section": True},
        "train": {"beta": 200.0, "m_domain": 200, "m_interface": 80, "m_boundary": 80},
    },
    "example2": {
        "run": {"experiment": "train", "problem": 2, "width": 20,
                "cross_section": True},
        "train": {"beta": 200.0, "m_domain": 1600, "m_interface": 160,
                  "m_boundary": 160},
    },
    "example3": {
        "run": {"experiment": "train", "problem": 3, "width": 40,
                "cross_section": True},
        "train": {"beta": 200.0, "m_domain": 400, "m_interface": 80,
                  "m_boundary": 80},
    },
    "example4": {
        "run": {"experiment": "train", "problem": 4, "width": 30},
        "train": {"beta": 100.0, "m_domain": 216, "m_interface": 216,
                  "m_boundary": 216},
    },
    "example5": {
        "run": {"experiment": "train", "problem": 5, "width": 10},
        "train": {"beta": 100.0, "m_domain": 500, "m_interface": 1065,
                  "m_boundary": 1065},
    },
    "table1": {
        "run": {"experiment": "ib-compare", "problem": 1,
                "widths": (10, 20, 30), "grid_sizes": (80, 160, 320)},
        "train": {"beta": 200.0, "m_domain": 200, "m_interface": 80,
                  "m_boundary": 80},
    },
    "table2": {
        "run": {"experiment": "ablate-phi", "problem": 2,
                "widths": (10, 20, 30), "plain_widths": (10, 30, 500)},
        "train": {"beta": 200.0, "m_domain": 1600, "m_interface": 160,
                  "m_boundary": 160},
    },
    "table3": {
        "run": {"experiment": "beta-sweep", "problem": 2, "width": 30,
                "betas": (1.0, 10.0, 100.0)},
        "train": {"m_domain": 1600, "m_interface": 160, "m_boundary": 160},
    },
    "table7": {
        "run": {"experiment": "points-sweep", "problem": 5, "width": 10,
                "batch_sizes": ((100, 278, 278), (200, 496, 496),
                                (500, 1065, 1065))},
        "train": {"beta": 100.0},
    },
    "fig2": {
        "run": {"experiment": "fixed-vs-resample", "problem": 1, "width": 30,
                "compute_oracle": True},
        "train": {"beta": 200.0, "m_domain": 1600, "m_interface": 160,
                  "m_boundary": 160, "test_points": 1_000_000,
                  "trace_stride": 100},
    },
    # beta=10 keeps plain gradient descent stable at the shared learning
    # rate 5e-3; at beta=200 its boundary-term curvature exceeds 2/lr
    "fig3": {
        "run": {"experiment": "optimizer-compare", "problem": 1, "width": 20,
                "seeds": (0, 1, 2)},
        "train": {"beta": 10.0, "m_domain": 200, "m_interface": 80,
                  "m_boundary": 80, "trace_stride": 1},
    },
}


def preset_config(name):
    if name not in PRESETS:
        raise ConfigurationError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        )
    payload = PRESETS[name]
    cfg = RunConfig(**payload.get("run", {}))
    cfg.train = dataclasses.replace(TrainConfig(), **payload.get("train", {}))
    return cfg


def _parse_tuple(text, caster=int):
    return tuple(caster(tok) for tok in text.replace(",", " ").split())


def _parse_batches(text):
    out = []
    for token in text.split():
        parts = token.split(":")
        if len(parts) != 3:
            raise ConfigurationError(
                f"batch size {token!r} must look like m_domain:m_interface:m_boundary"
            )
        out.append(tuple(int(p) for p in parts))
    return tuple(out)


def load_config(path):
    """Read a RunConfig from an INI file with [run], [train], [experiment]."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigurationError(f"cannot read config file {path}")

    cfg = RunConfig()
    if parser.has_section("run"):
        section = parser["run"]
        cfg.experiment = section.get("experiment", cfg.experiment)
        problem = section.get("problem", str(cfg.problem))
        cfg.problem = int(problem) if problem.isdigit() else problem
        cfg.width = section.getint("width", cfg.width)
        cfg.out_dir = section.get("out", cfg.out_dir)
        cfg.compute_oracle = section.getboolean("compute_oracle", cfg.compute_oracle)
        cfg.cross_section = section.getboolean("cross_section", cfg.cross_section)

    if parser.has_section("train"):
        section = parser["train"]
        tc = cfg.train
        tc.optimizer = section.get("optimizer", tc.optimizer)
        tc.learning_rate = section.getfloat("learning_rate", tc.learning_rate)
        tc.iterations = section.getint("iterations", tc.iterations)
        tc.beta = section.getfloat("beta", tc.beta)
        tc.m_domain = section.getint("m_domain", tc.m_domain)
        tc.m_interface = section.getint("m_interface", tc.m_interface)
        tc.m_boundary = section.getint("m_boundary", tc.m_boundary)
        tc.sampling = section.get("sampling", tc.sampling)
        tc.seed = section.getint("seed", tc.seed)
        tc.trace_stride = section.getint("trace_stride", tc.trace_stride)
        tc.precision = section.get("precision", tc.precision)
        tc.activation = section.get("activation", tc.activation)
        tc.init_scheme = section.get("init_scheme", tc.init_scheme)
        tc.init_phi_scale = section.getfloat("init_phi_scale", tc.init_phi_scale)
        tc.test_points = section.getint("test_points", tc.test_points)

    if parser.has_section("experiment"):
        section = parser["experiment"]
        if "widths" in section:
            cfg.widths = _parse_tuple(section["widths"])
        if "plain_widths" in section:
            cfg.plain_widths = _parse_tuple(section["plain_widths"])
        if "betas" in section:
            cfg.betas = _parse_tuple(section["betas"], float)
        if "seeds" in section:
            cfg.seeds = _parse_tuple(section["seeds"])
        if "grid_sizes" in section:
            cfg.grid_sizes = _parse_tuple(section["grid_sizes"])
        if "batch_sizes" in section:
            cfg.batch_sizes = _parse_batches(section["batch_sizes"])
        cfg.n_test = section.getint("n_test", cfg.n_test)

    return cfg


def default_out_root():
    return Path(os.environ.get(OUT_ROOT_ENV, "runs"))


# ---------------------------------------------------------------------------
# single runs and cross sections
# ---------------------------------------------------------------------------


def run_single(problem, width, tcfg: TrainConfig, out_dir=None, n_test=0,
               compute_oracle=False, label=""):
    """Train once and produce the full artifact set for that run."""
    activation = ACTIVATIONS[tcfg.activation]
    params0 = init_params(problem.dim, width, RngState(tcfg.seed).child(INIT_STREAM),
                          augmented=tcfg.augmented, scheme=tcfg.init_scheme,
                          phi_scale=tcfg.init_phi_scale)
    started = time.perf_counter()
    params, trace = train(problem, params0, tcfg)
    wall = time.perf_counter() - started

    if n_test <= 0:
        n_test = 100 * tcfg.m_domain
    report = evaluate_errors(problem, params, n_test,
                             RngState(tcfg.seed).child(INIT_STREAM + 1),
                             activation, tcfg.augmented)
    report = dataclasses.replace(
        report,
        m_domain=tcfg.m_domain,
        m_interface=tcfg.m_interface,
        m_boundary=tcfg.m_boundary,
        beta=tcfg.beta,
        seed=tcfg.seed,
        wall_clock_s=wall,
        final_loss=trace.train_loss[-1],
        optimizer=tcfg.optimizer,
        n_test=n_test,
    )
    if compute_oracle:
        estimate = energy_oracle(
            problem, network_energy_eval(params, problem, activation, tcfg.augmented),
            tcfg.beta,
        )
        report = dataclasses.replace(report, oracle_energy=estimate.value)

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        save_checkpoint(out / "model.json", params, problem.dim,
                        tcfg.activation, tcfg.augmented)
        trace.write_csv(out / "trace.csv")
        with open(out / "report.json", "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2)
    if label:
        print(f"[{label}] rel_linf={report.rel_linf:.4e} rel_l2={report.rel_l2:.4e} "
              f"({wall:.1f}s)")
    return report, params, trace


def cross_section_rows(predict, problem, axis, count):
    """(coordinate, model, exact) rows along the y=0 or x=0 line."""
    if problem.dim != 2:
        raise ConfigurationError("cross sections are defined for 2D problems only")
    if axis not in ("x", "y"):
        raise ConfigurationError(f"axis must be 'x' or 'y', got {axis!r}")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    k = 0 if axis == "x" else 1
    lo, hi = problem.domain.bounding_box[0, k], problem.domain.bounding_box[1, k]
    coords = lo + (np.arange(count) + 0.5) * ((hi - lo) / count)
    points = np.zeros((count, 2))
    points[:, k] = coords
    inside = problem.domain.contains(points)
    points = points[inside]
    return np.column_stack(
        [points[:, k], predict(points), problem.u_exact(points)]
    )


def emit_cross_sections(params, problem, axis, count, path=None,
                        activation=None, augmented=True):
    """Sample the trained network and exact solution along an axis line."""
    act = activation or ACTIVATIONS["sigmoid"]
    phi = problem.phi if augmented else None
    rows = cross_section_rows(
        lambda pts: forward(params, pts, phi, act), problem, axis, count
    )
    if path is not None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["coordinate", "u_model", "u_exact"])
            writer.writerows(rows.tolist())
    return rows


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------


def _trailing_mean(trace, window=1000):
    cutoff = trace.iterations[-1] - window
    values = [loss for it, loss in zip(trace.iterations, trace.train_loss)
              if it > cutoff]
    return float(np.mean(values))


def run_experiment(cfg: RunConfig):
    """Execute the configured experiment; returns the list of reports."""
    cfg.validate()
    problem = make_example(cfg.problem)
    out = Path(cfg.out_dir) if cfg.out_dir else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)

    kind = cfg.experiment
    reports = []
    summary = {"experiment": kind, "problem": problem.name}

    if kind == "train":
        report, params, _ = run_single(
            problem, cfg.width, cfg.train, out, cfg.n_test,
            cfg.compute_oracle, label=f"{problem.name} N={cfg.width}",
        )
        reports.append(report)
        if cfg.cross_section and problem.dim == 2 and out is not None:
            emit_cross_sections(params, problem, "x", 401,
                                out / "cross_section.csv",
                                ACTIVATIONS[cfg.train.activation],
                                cfg.train.augmented)
        summary["report"] = report.to_dict()

    elif kind == "ablate-phi":
        rows = []
        for width in (cfg.widths or (cfg.width,)):
            tcfg = dataclasses.replace(cfg.train, augmented=True)
            sub = out / f"aug_n{width}" if out else None
            report, _, _ = run_single(problem, width, tcfg, sub, cfg.n_test,
                                      label=f"with level set N={width}")
            reports.append(report)
            rows.append(report.to_dict())
        for width in (cfg.plain_widths or (cfg.width,)):
            tcfg = dataclasses.replace(cfg.train, augmented=False)
            sub = out / f"plain_n{width}" if out else None
            report, _, _ = run_single(problem, width, tcfg, sub, cfg.n_test,
                                      label=f"no level set N={width}")
            reports.append(report)
            rows.append(report.to_dict())
        summary["reports"] = rows

    elif kind == "beta-sweep":
        betas = cfg.betas or (1.0, 10.0, 100.0)
        rows = []
        for beta in betas:
            tcfg = dataclasses.replace(cfg.train, beta=float(beta))
            sub = out / f"beta{beta:g}" if out else None
            report, _, _ = run_single(problem, cfg.width, tcfg, sub, cfg.n_test,
                                      label=f"beta={beta:g}")
            reports.append(report)
            rows.append(report.to_dict())
        summary["reports"] = rows
        summary["l2_reduction_per_decade"] = [
            rows[i]["rel_l2"] / rows[i + 1]["rel_l2"] for i in range(len(rows) - 1)
        ]

    elif kind == "optimizer-compare":
        rows = {"adam": [], "sgd": []}
        for optimizer in ("adam", "sgd"):
            for seed in cfg.seeds:
                tcfg = dataclasses.replace(cfg.train, optimizer=optimizer,
                                           seed=int(seed), trace_stride=1)
                sub = out / f"{optimizer}_seed{seed}" if out else None
                report, _, trace = run_single(problem, cfg.width, tcfg, sub,
                                              cfg.n_test,
                                              label=f"{optimizer} seed={seed}")
                reports.append(report)
                rows[optimizer].append(
                    {"seed": int(seed), "trailing_mean_loss": _trailing_mean(trace),
                     **report.to_dict()}
                )
        summary["reports"] = rows
        summary["adam_trailing_mean"] = float(
            np.mean([r["trailing_mean_loss"] for r in rows["adam"]])
        )
        summary["sgd_trailing_mean"] = float(
            np.mean([r["trailing_mean_loss"] for r in rows["sgd"]])
        )

    elif kind == "fixed-vs-resample":
        oracle = energy_oracle(problem, problem.exact_eval(), cfg.train.beta)
        summary["exact_energy"] = oracle.value
        summary["exact_energy_converged"] = oracle.converged
        modes = {"fixed": "fixed-midpoint", "resample": "resample-per-iteration"}
        for label, mode in modes.items():
            tcfg = dataclasses.replace(cfg.train, sampling=mode)
            sub = out / label if out else None
            report, _, trace = run_single(problem, cfg.width, tcfg, sub,
                                          cfg.n_test, label=label)
            reports.append(report)
            final_test = next(
                (v for v in reversed(trace.test_loss) if v is not None), None
            )
            summary[label] = {
                "final_train_loss": trace.train_loss[-1],
                "final_test_loss": final_test,
                "trailing_mean_loss": _trailing_mean(trace),
                **report.to_dict(),
            }
        summary["overfit_signature"] = bool(
            summary["fixed"]["final_train_loss"] < summary["exact_energy"]
            and (summary["fixed"]["final_test_loss"] or math.inf)
            >= summary["exact_energy"]
        )

    elif kind == "ib-compare":
        ib_rows = []
        for m in cfg.grid_sizes:
            result, u_grid = ib_report(problem, int(m))
            ib_rows.append(result)
            if out is not None:
                np.savetxt(out / f"ib_solution_m{m}.csv", u_grid, delimiter=",")
            print(f"[ib m={m}] rel_linf={result['rel_linf']:.4e}")
        net_rows = []
        for width in (cfg.widths or (cfg.width,)):
            sub = out / f"net_n{width}" if out else None
            report, _, _ = run_single(problem, width, cfg.train, sub, cfg.n_test,
                                      label=f"net N={width}")
            reports.append(report)
            net_rows.append(report.to_dict())
        summary["ib"] = ib_rows
        summary["network"] = net_rows

    elif kind == "points-sweep":
        batches = cfg.batch_sizes or ((cfg.train.m_domain, cfg.train.m_interface,
                                       cfg.train.m_boundary),)
        rows = []
        for m_domain, m_interface, m_boundary in batches:
            tcfg = dataclasses.replace(cfg.train, m_domain=int(m_domain),
                                       m_interface=int(m_interface),
                                       m_boundary=int(m_boundary))
            sub = out / f"m{m_domain}" if out else None
            report, _, _ = run_single(problem, cfg.width, tcfg, sub, cfg.n_test,
                                      label=f"M={m_domain}")
            reports.append(report)
            rows.append(report.to_dict())
        summary["reports"] = rows

    if out is not None:
        with open(out / "summary.json", "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2)
    return reports, summary


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------


def _config_from_args(args):
    if args.config:
        cfg = load_config(args.config)
    elif args.preset:
        cfg = preset_config(args.preset)
    else:
        raise ConfigurationError("supply --preset or --config")
    if args.seed is not None:
        cfg.train.seed = args.seed
    if args.precision is not None:
        cfg.train.precision = args.precision
    if args.iterations is not None:
        cfg.train.iterations = args.iterations
    if args.out:
        cfg.out_dir = args.out
    elif not cfg.out_dir:
        name = args.preset or Path(args.config).stem
        cfg.out_dir = str(default_out_root() / name)
    return cfg


def _add_common_run_flags(sub):
    sub.add_argument("--preset", help="named preset (example1..example5, table1, ...)")
    sub.add_argument("--config", help="INI run configuration file")
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--precision", choices=("double", "single"), default=None)
    sub.add_argument("--iterations", type=int, default=None,
                     help="override the iteration budget")
    sub.add_argument("--out", help="output directory (default from "
                     f"${OUT_ROOT_ENV} or ./runs)")


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="shallowritz",
        description="Mesh-free energy-minimizing solver for elliptic problems "
        "with interface point sources, plus a finite-difference baseline.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    train_cmd = commands.add_parser("train", help="run one training job")
    _add_common_run_flags(train_cmd)

    exp_cmd = commands.add_parser("experiment", help="run a study preset")
    _add_common_run_flags(exp_cmd)

    eval_cmd = commands.add_parser("eval", help="evaluate a saved model")
    eval_cmd.add_argument("--model", required=True)
    eval_cmd.add_argument("--problem", required=True)
    eval_cmd.add_argument("--n-test", type=int, default=20_000)
    eval_cmd.add_argument("--seed", type=int, default=0)
    eval_cmd.add_argument("--cross-section", choices=("x", "y"))
    eval_cmd.add_argument("--count", type=int, default=401)
    eval_cmd.add_argument("--out", help="CSV path for the cross section")

    ib_cmd = commands.add_parser("ib", help="finite-difference baseline")
    ib_cmd.add_argument("--example", type=int, default=1)
    ib_cmd.add_argument("--m", type=int, default=80)
    ib_cmd.add_argument("--m-gamma", type=int, default=None)
    ib_cmd.add_argument("--out", help="directory for the grid solution CSV")

    oracle_cmd = commands.add_parser("oracle", help="dense energy of the exact solution")
    oracle_cmd.add_argument("--example", type=int, default=1)
    oracle_cmd.add_argument("--beta", type=float, default=200.0)
    oracle_cmd.add_argument("--resolution", type=int, default=256)

    args = parser.parse_args(argv)

    if args.command in ("train", "experiment"):
        cfg = _config_from_args(args)
        if args.command == "train":
            cfg.experiment = "train"
        _, summary = run_experiment(cfg)
        print(json.dumps(summary, indent=2))
        return 0

    if args.command == "eval":
        params, meta = load_checkpoint(args.model)
        problem = make_example(
            int(args.problem) if str(args.problem).isdigit() else args.problem
        )
        activation = ACTIVATIONS[meta["activation"]]
        report = evaluate_errors(problem, params, args.n_test,
                                 RngState(args.seed), activation,
                                 meta["augmented"])
        print(json.dumps(report.to_dict(), indent=2))
        if args.cross_section:
            rows = emit_cross_sections(params, problem, args.cross_section,
                                       args.count, args.out, activation,
                                       meta["augmented"])
            if not args.out:
                for coord, model_u, exact_u in rows:
                    print(f"{coord:.6f},{model_u:.6e},{exact_u:.6e}")
        return 0

    if args.command == "ib":
        problem = make_example(args.example)
        result, u_grid = ib_report(problem, args.m, args.m_gamma)
        print(json.dumps(result, indent=2))
        if args.out:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            np.savetxt(out / f"ib_solution_m{args.m}.csv", u_grid, delimiter=",")
        return 0

    if args.command == "oracle":
        problem = make_example(args.example)
        estimate = energy_oracle(problem, problem.exact_eval(), args.beta,
                                 args.resolution)
        print(json.dumps({
            "example": args.example,
            "beta": args.beta,
            "energy": estimate.value,
            "previous": estimate.previous,
            "rel_change": estimate.rel_change,
            "converged": estimate.converged,
            "resolution": estimate.resolution,
        }, indent=2))
        return 0

    return 1


if __name__ == "__main__":
    sys.exit(main())
