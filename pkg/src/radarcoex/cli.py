"""Command-line entry point: seeded Monte Carlo runs, projector export,
scenario validation.

simulate  --scenario S --trials N --seed S0 --out DIR [--workers W]
project   --scenario S --channels DUMP --out FILE
validate  --scenario S

Outputs are deterministic byte-for-byte for identical arguments, independent
of the worker count: every trial derives its own seed (seed0 + trial) and all
files are written by the parent process in a fixed order.  The default output
directory can be set with the RADARCOEX_OUT environment variable.

Exit codes: 0 ok, 1 validation error, 2 numerical failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channel import generate_channels, augment_radar_channel, load_channels
from .equivalence import (
    build_equivalent_model,
    draw_sample,
    simulate_direct,
    simulate_equivalent,
    split_precoder,
    usage_vector,
)
from .channel import complex_gaussian, matrix_rng, KIND_PRECODER_INIT
from .metrics import TrialReport, build_report
from .numerics import NumericsError
from .projection import build_projector, save_projectors
from .scenario import Scenario, ScenarioError, load_scenario, validate_scenario
from .solver import IterationTrace, run_wsmmse

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3

EQUIVALENCE_TOL = 1e-10


@dataclass(frozen=True)
class RunManifest:
    scenario_path: str
    seeds: tuple[int, ...]
    outputs: str
    emitted_files: tuple[tuple[str, str], ...]  # (relative path, sha256)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run_trial(s: Scenario, seed: int) -> tuple[TrialReport, IterationTrace]:
    """One full trial: channels -> projectors -> equivalent model -> solve -> report."""
    c = generate_channels(s, seed)
    projs = [
        build_projector(augment_radar_channel(c, l, s.serving), s.sigma_th)
        for l in range(s.topology.L)
    ]
    eq = build_equivalent_model(s, c, projs)
    state, trace = run_wsmmse(eq, s, seed=seed)
    report = build_report(eq, state, s, c, projs)
    return report, trace


def _trace_header(s: Scenario) -> list[str]:
    cols = ["iter", "objective"]
    cols += [f"usage_bs{m}" for m in range(s.topology.M)]
    cols += [f"usage_rad{l}" for l in range(s.topology.L)]
    cols += ["kkt_residual", "slackness_residual", "dual_converged"]
    return cols


def _trace_rows(trace: IterationTrace) -> list[list[str]]:
    rows = []
    for i in range(len(trace.objective)):
        row = [str(i + 1), _fmt(trace.objective[i])]
        row += [_fmt(u) for u in trace.power_usage[i]]
        row += [
            _fmt(trace.kkt_residual[i]),
            _fmt(trace.slackness_residual[i]),
            str(int(trace.dual_converged[i])),
        ]
        rows.append(row)
    return rows


def _summary_header(s: Scenario) -> list[str]:
    t = s.topology
    cols = ["trial", "seed", "converged", "iterations", "sum_wmse", "sum_rate"]
    cols += [f"mse_user{k}" for k in range(t.K)]
    cols += [f"wmse_user{k}" for k in range(t.K)]
    for m in range(t.M):
        cols += [f"usage_bs{m}", f"slack_bs{m}"]
    for l in range(t.L):
        cols += [f"usage_rad{l}", f"slack_rad{l}", f"leak_rad{l}"]
    for l in range(t.L):
        served = set(s.serving.users_of_radar[l])
        cols += [f"intf_rad{l}_user{k}" for k in range(t.K) if k not in served]
    return cols


def _summary_row(s: Scenario, trial: int, seed: int, rep: TrialReport) -> list[str]:
    t = s.topology
    row = [
        str(trial),
        str(seed),
        str(int(rep.converged)),
        str(rep.iterations_used),
        _fmt(rep.sum_wmse),
        _fmt(rep.optional_sum_rate),
    ]
    row += [_fmt(v) for v in rep.per_user_mse]
    row += [_fmt(v) for v in rep.per_user_wmse]
    for m in range(t.M):
        row += [_fmt(rep.usage_bs[m]), _fmt(rep.slack_bs[m])]
    for l in range(t.L):
        row += [_fmt(rep.usage_radar[l]), _fmt(rep.slack_radar[l]), _fmt(rep.radar_leakage[l])]
    for l in range(t.L):
        row += [_fmt(p) for _, p in rep.radar_interference[l]]
    return row


def _write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    lines = [",".join(header)] + [",".join(r) for r in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_simulate(
    scenario_path: str,
    trials: int,
    seed0: int,
    out_dir: str,
    workers: int = 1,
) -> RunManifest:
    s = load_scenario(scenario_path)
    if trials < 1:
        raise ScenarioError("trials must be >= 1")
    seeds = [seed0 + t for t in range(trials)]

    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_trial, [s] * trials, seeds))
    else:
        results = [run_trial(s, seed) for seed in seeds]

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        emitted: list[tuple[str, str]] = []
        trace_header = _trace_header(s)
        for t, (rep, trace) in enumerate(results):
            trace_path = out / f"trace_trial{t:04d}.csv"
            _write_csv(trace_path, trace_header, _trace_rows(trace))
            written.append(trace_path)
            emitted.append((trace_path.name, _sha256(trace_path)))

        summary_path = out / "summary.csv"
        _write_csv(
            summary_path,
            _summary_header(s),
            [_summary_row(s, t, seeds[t], rep) for t, (rep, _) in enumerate(results)],
        )
        written.append(summary_path)
        emitted.append((summary_path.name, _sha256(summary_path)))

        manifest = RunManifest(
            scenario_path=str(scenario_path),
            seeds=tuple(seeds),
            outputs=str(out),
            emitted_files=tuple(emitted),
        )
        manifest_path = out / "manifest.json"
        manifest_path.write_text(
            json.dumps(
                {
                    "scenario_path": manifest.scenario_path,
                    "seeds": list(manifest.seeds),
                    "outputs": manifest.outputs,
                    "emitted_files": [
                        {"path": p, "sha256": h} for p, h in manifest.emitted_files
                    ],
                },
                indent=2,
                sort_keys=True,
            )
            + "\n",
            encoding="utf-8",
        )
        written.append(manifest_path)
    except BaseException:
        for p in written:
            p.unlink(missing_ok=True)
        raise
    verify_manifest(out / "manifest.json")
    return manifest


def verify_manifest(manifest_path) -> None:
    """Check that every file a manifest lists exists and matches its hash."""
    doc = json.loads(Path(manifest_path).read_text(encoding="utf-8"))
    base = Path(manifest_path).parent
    for entry in doc["emitted_files"]:
        p = base / entry["path"]
        if not p.exists():
            raise OSError(f"manifest lists missing file {p}")
        if _sha256(p) != entry["sha256"]:
            raise OSError(f"manifest hash mismatch for {p}")


def cmd_project(scenario_path: str, channel_dump: str, out: str) -> None:
    s = load_scenario(scenario_path)
    c = load_channels(channel_dump)
    t = s.topology
    if len(c.H_radar) != t.K or (t.K and len(c.H_radar[0]) != t.L):
        raise ScenarioError("channel dump user/radar counts do not match scenario")
    for k in range(t.K):
        for l in range(t.L):
            if c.H_radar[k][l].shape != (t.n_r, t.n_rad):
                raise ScenarioError(
                    f"channel dump matrix radar_k{k}_l{l} has shape "
                    f"{c.H_radar[k][l].shape}, expected ({t.n_r}, {t.n_rad})"
                )
    projs = []
    leakage = []
    for l in range(t.L):
        aug = augment_radar_channel(c, l, s.serving)
        proj = build_projector(aug, s.sigma_th)
        projs.append(proj)
        from .projection import leakage_bound

        leakage.append(leakage_bound(proj, aug))
    out_path = Path(out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    save_projectors(projs, out_path)
    # Leakage certificate rides along in the same archive.
    with np.load(out_path) as data:
        arrays = {name: data[name] for name in data.files}
    for l, leak in enumerate(leakage):
        arrays[f"leakage_rad{l}"] = np.array(leak)
    np.savez(out_path, **arrays)


def cmd_validate(scenario_path: str) -> int:
    try:
        s = load_scenario(scenario_path)
    except ScenarioError as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    violations = validate_scenario(s)
    if violations:
        print("validation failed: " + "; ".join(violations), file=sys.stderr)
        return EXIT_VALIDATION

    # One-trial dry run: the two signal paths must agree to 1e-10.
    c = generate_channels(s, s.seed)
    projs = [
        build_projector(augment_radar_channel(c, l, s.serving), s.sigma_th)
        for l in range(s.topology.L)
    ]
    eq = build_equivalent_model(s, c, projs)
    F = [
        complex_gaussian(matrix_rng(s.seed, KIND_PRECODER_INIT, 1, k), eq.m_t[k], s.d[k])
        for k in range(s.topology.K)
    ]
    blocks = {
        (k, kind, station): blk
        for k in range(s.topology.K)
        for (kind, station), blk in split_precoder(s, k, F[k]).items()
    }
    sample = draw_sample(s, s.seed)
    direct = simulate_direct(s, c, projs, blocks, sample)
    equiv = simulate_equivalent(eq, F, sample)
    dev = max(
        float(np.abs(direct.y[k] - equiv.y[k]).max()) for k in range(s.topology.K)
    )
    if dev > EQUIVALENCE_TOL:
        print(
            f"dry-run equivalence check failed: deviation {dev:.3e} > {EQUIVALENCE_TOL}",
            file=sys.stderr,
        )
        return EXIT_NUMERICAL
    usage = usage_vector(eq, F)
    direct_usage = np.zeros_like(usage)
    t = s.topology
    for m in range(t.M):
        direct_usage[m] = sum(
            np.linalg.norm(blocks[(k, "bs", m)]) ** 2 for k in s.serving.users_of_bs[m]
        )
    for l in range(t.L):
        direct_usage[t.M + l] = sum(
            np.linalg.norm(projs[l].P @ blocks[(k, "radar", l)]) ** 2
            for k in s.serving.users_of_radar[l]
        )
    if float(np.abs(usage - direct_usage).max()) > EQUIVALENCE_TOL:
        print("dry-run power audit mismatch", file=sys.stderr)
        return EXIT_NUMERICAL
    print("ok")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="radarcoex")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run seeded Monte Carlo trials")
    sim.add_argument("--scenario", required=True)
    sim.add_argument("--trials", type=int, default=1)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", default=os.environ.get("RADARCOEX_OUT", "out"))
    sim.add_argument("--workers", type=int, default=1)

    proj = sub.add_parser("project", help="build projectors from a channel dump")
    proj.add_argument("--scenario", required=True)
    proj.add_argument("--channels", required=True)
    proj.add_argument("--out", required=True)

    val = sub.add_parser("validate", help="validate a scenario and dry-run the model")
    val.add_argument("--scenario", required=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            cmd_simulate(args.scenario, args.trials, args.seed, args.out, args.workers)
            return EXIT_OK
        if args.command == "project":
            cmd_project(args.scenario, args.channels, args.out)
            return EXIT_OK
        if args.command == "validate":
            return cmd_validate(args.scenario)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
