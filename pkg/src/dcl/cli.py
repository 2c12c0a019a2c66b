"""Command-line front end: simulate, verify, converge.

Exit codes: 0 success, 2 configuration error (bad manifest, unknown
suite), 3 solver failure (guard tripped; the partial artifact is kept).

Artifacts are written atomically (temp file + rename).  ``report.csv``
has the fixed column schema

    t, l2_ux, E, h1, h2, h3, off_manifold, nt_quantity

with ``nt_quantity`` blank off the sphere, and ``manifest.json`` echoes
the resolved configuration as canonical JSON (sorted keys) together with
the row checksum and exit status.  Identical manifest and seed give a
byte-identical report.  The environment variable ``DCL_THREADS`` caps the
parallelism of convergence sweeps (default 1, the reference mode).
"""

import argparse
import concurrent.futures
import csv
import hashlib
import io
import json
import os
import sys
from dataclasses import dataclass, replace

import numpy as np

from .curves import h1_distance, resample, sup_distance
from .errors import ConfigError, DclError
from .flow import FlowConfig, epsilon_continuation, evolve
from .invariants import energy_report
from .manifolds import by_name
from .presets import make_initial
from .verify import SUITES, run_suite

CSV_COLUMNS = (
    "t", "l2_ux", "E", "h1", "h2", "h3", "off_manifold", "nt_quantity"
)

_CONFIG_KEYS = {
    "a", "b", "epsilon", "N_g", "dt", "T", "integrator",
    "picard_tol", "picard_max_iter", "quadrature_nodes", "dealias",
    "mode_cutoff", "manifold", "initial_condition",
}
_MANIFEST_KEYS = {"config", "output_dir", "stride", "seed"}


@dataclass
class RunManifest:
    config: FlowConfig
    manifold: object
    initial_condition: str
    output_dir: str
    stride: int
    seed: int
    raw: dict


def parse_manifest(payload):
    """Validate a manifest dictionary; unknown keys are rejected."""
    if not isinstance(payload, dict):
        raise ConfigError("manifest must be a JSON object")
    unknown = set(payload) - _MANIFEST_KEYS
    if unknown:
        raise ConfigError(f"unknown manifest keys: {sorted(unknown)}")
    missing = {"config", "output_dir"} - set(payload)
    if missing:
        raise ConfigError(f"missing manifest keys: {sorted(missing)}")
    config = payload["config"]
    if not isinstance(config, dict):
        raise ConfigError("manifest config must be a JSON object")
    unknown = set(config) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in ("manifold", "initial_condition", "N_g", "dt", "T"):
        if key not in config:
            raise ConfigError(f"config is missing {key!r}")
    try:
        manifold = by_name(config["manifold"])
    except KeyError as exc:
        raise ConfigError(str(exc)) from exc
    solver_keys = {
        k: v for k, v in config.items()
        if k not in ("manifold", "initial_condition")
    }
    try:
        flow_config = FlowConfig(**solver_keys)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad flow config: {exc}") from exc
    stride = payload.get("stride", 1)
    seed = payload.get("seed", 0)
    if not isinstance(stride, int) or stride < 1:
        raise ConfigError("stride must be a positive integer")
    if not isinstance(seed, int):
        raise ConfigError("seed must be an integer")
    steps = flow_config.n_steps()
    if steps and steps % stride:
        raise ConfigError(
            f"stride {stride} does not divide the step count {steps}"
        )
    return RunManifest(
        config=flow_config,
        manifold=manifold,
        initial_condition=config["initial_condition"],
        output_dir=payload["output_dir"],
        stride=stride,
        seed=seed,
        raw=payload,
    )


def load_manifest(path):
    try:
        with open(path, encoding="utf-8") as handle:
            payload = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read manifest {path}: {exc}") from exc
    return parse_manifest(payload)


def _fmt(value):
    return f"{float(value):.17g}"


def _atomic_write(path, data):
    tmp = f"{path}.tmp-{os.getpid()}"
    mode = "wb" if isinstance(data, bytes) else "w"
    with open(tmp, mode) as handle:
        handle.write(data)
    os.replace(tmp, path)


def report_rows(trajectory):
    rows = []
    for t, state in zip(trajectory.times, trajectory.states):
        rep = energy_report(state, t)
        rows.append(
            {
                "t": _fmt(rep.t),
                "l2_ux": _fmt(rep.l2_ux),
                "E": _fmt(rep.E),
                "h1": _fmt(rep.hm_norms[0]),
                "h2": _fmt(rep.hm_norms[1]),
                "h3": _fmt(rep.hm_norms[2]),
                "off_manifold": _fmt(rep.off_manifold),
                "nt_quantity": (
                    _fmt(rep.nt_quantity) if rep.nt_quantity is not None else ""
                ),
            }
        )
    return rows


def rows_to_csv(rows):
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS, lineterminator="\r\n")
    writer.writeheader()
    writer.writerows(rows)
    return buffer.getvalue()


def parse_report_csv(text):
    """Round-trip helper: rows of report.csv as dictionaries of floats."""
    reader = csv.DictReader(io.StringIO(text))
    out = []
    for row in reader:
        parsed = {
            k: (float(v) if v != "" else None) for k, v in row.items()
        }
        out.append(parsed)
    return out


def _checkpoint_payload(state, t):
    return {
        "t": t,
        "manifold": state.manifold.name,
        "samples": [[float(x) for x in row] for row in state.output_samples()],
    }


def cmd_simulate(manifest, checkpoints_every=0):
    """Run one simulation and write its artifact; returns the exit code."""
    out_dir = manifest.output_dir
    os.makedirs(out_dir, exist_ok=True)
    u0 = make_initial(
        manifest.initial_condition, manifest.manifold,
        manifest.config.N_g, manifest.seed,
    )
    trajectory = evolve(u0, manifest.config, stride=manifest.stride)
    rows = report_rows(trajectory)
    csv_text = rows_to_csv(rows)
    _atomic_write(os.path.join(out_dir, "report.csv"), csv_text.encode())

    if checkpoints_every:
        for idx, (t, state) in enumerate(
            zip(trajectory.times, trajectory.states)
        ):
            if idx % checkpoints_every == 0:
                _atomic_write(
                    os.path.join(out_dir, f"checkpoint_{idx}.json"),
                    json.dumps(_checkpoint_payload(state, t), sort_keys=True),
                )
    _atomic_write(
        os.path.join(out_dir, "checkpoint_final.json"),
        json.dumps(
            _checkpoint_payload(trajectory.final, trajectory.times[-1]),
            sort_keys=True,
        ),
    )

    status = 0 if trajectory.failure is None else 3
    echo = {
        "manifest": manifest.raw,
        "report_sha256": hashlib.sha256(csv_text.encode()).hexdigest(),
        "snapshots": len(rows),
        "exit_status": status,
        "failure": trajectory.failure,
    }
    _atomic_write(
        os.path.join(out_dir, "manifest.json"),
        json.dumps(echo, sort_keys=True, indent=2) + "\n",
    )
    if trajectory.failure:
        print(f"solver failure: {trajectory.failure}", file=sys.stderr)
    return status


def cmd_verify(suite, grids=(64, 128), seed=0):
    try:
        checks = run_suite(suite, tuple(grids), seed)
    except KeyError as exc:
        raise ConfigError(str(exc)) from exc
    for check in checks:
        print(check.line())
    return 0 if all(c.passed for c in checks) else 1


def _threads():
    try:
        return max(1, int(os.environ.get("DCL_THREADS", "1")))
    except ValueError:
        return 1


def cmd_converge(manifest, mode, levels=3):
    """Self-refinement study in epsilon, grid size, or time step."""
    if levels < 3:
        raise ConfigError("convergence studies need at least 3 levels")
    out_dir = manifest.output_dir
    os.makedirs(out_dir, exist_ok=True)
    cfg = manifest.config

    if mode == "epsilon":
        base_eps = cfg.epsilon if cfg.epsilon > 0 else 1e-3
        eps_list = [base_eps * 0.5**i for i in range(levels)]
        u0 = make_initial(
            manifest.initial_condition, manifest.manifold, cfg.N_g, manifest.seed
        )
        rows = epsilon_continuation(u0, cfg, eps_list)
        header = ["epsilon", "h1_to_zero", "h1_to_prev", "failure"]
        table = [
            [
                _fmt(r["epsilon"]),
                _fmt(r["h1_to_zero"]) if np.isfinite(r["h1_to_zero"]) else "",
                _fmt(r["h1_to_prev"]) if np.isfinite(r["h1_to_prev"]) else "",
                r["failure"] or "",
            ]
            for r in rows
        ]
    elif mode == "dt":
        configs = [replace(cfg, dt=cfg.dt * 0.5**i) for i in range(levels)]
        finals = _run_levels(manifest, configs)
        header = ["dt", "h1_diff_to_next", "observed_order", "failure"]
        table = []
        diffs = []
        for i, (level_cfg, traj) in enumerate(zip(configs, finals)):
            fail = traj.failure or ""
            diff = ""
            if (
                i + 1 < len(finals)
                and traj.failure is None
                and finals[i + 1].failure is None
            ):
                diffs.append(h1_distance(traj.final, finals[i + 1].final))
                diff = _fmt(diffs[-1])
            order = ""
            if len(diffs) >= 2 and diffs[-1] > 0 and i + 1 < len(finals):
                order = _fmt(np.log2(diffs[-2] / diffs[-1]))
            table.append([_fmt(level_cfg.dt), diff, order, fail])
    elif mode == "grid":
        grids = [cfg.N_g * 2**i for i in range(levels)]
        configs = [replace(cfg, N_g=n) for n in grids]
        finals = _run_levels(manifest, configs)
        header = ["N_g", "sup_diff_to_finest", "failure"]
        finest = finals[-1]
        table = []
        for level_cfg, traj in zip(configs, finals):
            diff = ""
            if traj.failure is None and finest.failure is None:
                coarse_up = resample(traj.final, finest.final.n)
                diff = _fmt(sup_distance(coarse_up, finest.final))
            table.append([str(level_cfg.N_g), diff, traj.failure or ""])
    else:
        raise ConfigError(f"unknown convergence mode {mode!r}")

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\r\n")
    writer.writerow(header)
    writer.writerows(table)
    _atomic_write(os.path.join(out_dir, f"converge_{mode}.csv"), buffer.getvalue())
    print(buffer.getvalue(), end="")
    return 0


def _run_levels(manifest, configs):
    def one(level_cfg):
        u0 = make_initial(
            manifest.initial_condition, manifest.manifold,
            level_cfg.N_g, manifest.seed,
        )
        return evolve(u0, level_cfg, stride=level_cfg.n_steps() or 1)

    workers = _threads()
    if workers == 1:
        return [one(c) for c in configs]
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, configs))


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dcl",
        description="Dispersive closed-curve flow laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one simulation manifest")
    p_sim.add_argument("--manifest", required=True)
    p_sim.add_argument(
        "--checkpoints", type=int, default=0, metavar="K",
        help="also dump every K-th snapshot as a curve checkpoint",
    )

    p_ver = sub.add_parser("verify", help="run a verification suite")
    p_ver.add_argument("--suite", required=True)
    p_ver.add_argument("--grids", default="64,128")
    p_ver.add_argument("--seed", type=int, default=0)

    p_con = sub.add_parser("converge", help="run a convergence study")
    p_con.add_argument("--manifest", required=True)
    p_con.add_argument("--mode", required=True, choices=("epsilon", "grid", "dt"))
    p_con.add_argument("--levels", type=int, default=3)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            manifest = load_manifest(args.manifest)
            return cmd_simulate(manifest, checkpoints_every=args.checkpoints)
        if args.command == "verify":
            if args.suite not in SUITES:
                raise ConfigError(
                    f"unknown suite {args.suite!r}; choose from {SUITES}"
                )
            grids = tuple(int(g) for g in args.grids.split(",") if g)
            if not grids:
                raise ConfigError("at least one grid size is required")
            return cmd_verify(args.suite, grids, args.seed)
        if args.command == "converge":
            manifest = load_manifest(args.manifest)
            return cmd_converge(manifest, args.mode, args.levels)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DclError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
