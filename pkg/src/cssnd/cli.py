"""Command-line frontend.

Subcommands: gen, analyze, export, solve, check, bench.  Exit code 0 on
success, 1 on a domain error (bad instance, unusable arguments), 2 on a
usage error.  Primary output files are byte-deterministic for fixed inputs;
run manifests additionally carry wall-clock telemetry and are written next
to the primary output as <output>.manifest.json.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import platform
import sys
import time
from pathlib import Path

from . import __version__
from .analysis import compute_requirements
from .core import CssndError, build_time_space_network, expand_commodities
from .dmam import run_dmam, solution_to_assignment
from .instgen import generate_instance, size_class
from .io import instance_digest, load_instance, save_instance
from .model import (
    ModelOptions,
    build_mip,
    check_solution,
    export_lp,
    export_mps,
    read_solution,
)


def _file_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_manifest(
    out_path: str | Path | None,
    command: str,
    args: argparse.Namespace,
    instance_hash: str,
    wall_clock: dict[str, float],
    manifest_path: str | None,
) -> None:
    target = manifest_path or (f"{out_path}.manifest.json" if out_path else None)
    if target is None:
        return
    flags = {
        k: v
        for k, v in sorted(vars(args).items())
        if k not in ("func", "manifest") and v is not None
    }
    manifest = {
        "command": command,
        "instance_hash": instance_hash,
        "seed": getattr(args, "seed", None),
        "flags": flags,
        "versions": {
            "cssnd": __version__,
            "python": platform.python_version(),
        },
        "wall_clock": wall_clock,
    }
    Path(target).write_text(json.dumps(manifest, indent=2) + "\n")


def cmd_gen(args) -> int:
    t0 = time.perf_counter()
    instance = generate_instance(args.size, args.k, args.seed)
    save_instance(instance, args.out)
    _write_manifest(
        args.out,
        "gen",
        args,
        instance_digest(instance),
        {"total": time.perf_counter() - t0},
        args.manifest,
    )
    return 0


def cmd_analyze(args) -> int:
    t0 = time.perf_counter()
    instance = load_instance(args.input)
    summary = compute_requirements(instance, in_transit=args.in_transit)
    lines = ["kind,period,value"]
    for t in range(1, instance.period_count + 1):
        lines.append(f"phi,{t},{summary.phi_at(t)}")
    lines.append(f"gamma,,{summary.gamma}")
    lines.append(f"theta,,{summary.theta}")
    Path(args.out).write_text("\n".join(lines) + "\n")
    _write_manifest(
        args.out,
        "analyze",
        args,
        _file_digest(args.input),
        {"total": time.perf_counter() - t0},
        args.manifest,
    )
    return 0


def _parse_vi(raw: str | None) -> tuple[bool, bool]:
    if not raw:
        return False, False
    names = {piece.strip() for piece in raw.split(",") if piece.strip()}
    unknown = names - {"gamma", "phi"}
    if unknown:
        raise CssndError(f"unknown valid-inequality family: {', '.join(unknown)}")
    return "gamma" in names, "phi" in names


def cmd_export(args) -> int:
    t0 = time.perf_counter()
    instance = load_instance(args.input)
    vi_gamma, vi_phi = _parse_vi(args.vi)
    near_opt = frozenset({args.nearopt} if args.nearopt else ())
    options = ModelOptions(
        add_vi_gamma=vi_gamma,
        add_vi_phi=vi_phi,
        near_opt=near_opt,
        strong_forcing=args.strong_forcing,
        shift_restriction=args.lam,
        literal_shift_rule=args.literal_shift,
    )
    tsn = build_time_space_network(instance.physical, instance.period_count)
    tcs, _ = expand_commodities(instance)
    analysis = None
    if vi_gamma or vi_phi or near_opt:
        analysis = compute_requirements(instance)
    model = build_mip(instance, tsn, tcs, analysis=analysis, options=options)
    if args.format == "lp":
        Path(args.out).write_text(export_lp(model))
    else:
        text, sidecar = export_mps(model)
        Path(args.out).write_text(text)
        Path(f"{args.out}.names.json").write_text(
            json.dumps(sidecar, indent=2, sort_keys=True) + "\n"
        )
    _write_manifest(
        args.out,
        "export",
        args,
        _file_digest(args.input),
        {"total": time.perf_counter() - t0},
        args.manifest,
    )
    return 0


def _schedule_document(solution, report, digest: str) -> dict:
    tsn = solution.tsn
    book = solution.book

    def arc_entry(arc_id: int) -> dict:
        arc = tsn.arcs[arc_id - 1]
        return {
            "arc": arc.id,
            "kind": arc.kind,
            "from": [arc.phys_from, arc.depart],
            "to": [arc.phys_to, arc.arrive],
        }

    cycles = []
    for cycle in solution.cycles:
        carried = sorted(
            book.by_id[pid].tc_id for pid in cycle.carried_paths
        )
        cycles.append(
            {
                "asset": cycle.asset_id,
                "kind": cycle.kind,
                "carried_tcs": carried,
                "arcs": [arc_entry(a) for a in cycle.arc_seq],
            }
        )
    selected = []
    for oc_id in sorted(solution.selected):
        path = solution.selected[oc_id]
        selected.append(
            {
                "oc": oc_id,
                "tc": path.tc_id,
                "kind": path.kind,
                "mode": path.mode,
                "arcs": list(path.arcs),
                "cost": path.cost,
            }
        )
    return {
        "instance_hash": digest,
        "config": report["config"],
        "summary": {
            k: report[k]
            for k in (
                "owned_used",
                "leased",
                "on_time",
                "early",
                "tardy",
                "outsourced",
                "total_cost",
            )
        },
        "cost_breakdown": solution.cost_breakdown(),
        "selected": selected,
        "cycles": cycles,
        "outsourced": sorted(solution.outsourced),
    }


REPORT_COLUMNS = [
    "instance",
    "n_physical",
    "k",
    "v1",
    "v2",
    "config",
    "owned",
    "leased",
    "on_time",
    "early",
    "tardy",
    "outsourced",
    "total_cost",
]


def _report_row(instance, name, report) -> str:
    return ",".join(
        str(v)
        for v in (
            name,
            instance.physical.node_count,
            len(instance.commodities),
            instance.owned_assets,
            instance.leasable_assets,
            report["config"],
            report["owned_used"],
            report["leased"],
            report["on_time"],
            report["early"],
            report["tardy"],
            report["outsourced"],
            f"{report['total_cost']:.6f}",
        )
    )


def cmd_solve(args) -> int:
    t0 = time.perf_counter()
    instance = load_instance(args.input)
    digest = _file_digest(args.input)
    solution, report = run_dmam(instance, args.config)
    if args.out:
        document = _schedule_document(solution, report, digest)
        Path(args.out).write_text(json.dumps(document, indent=2) + "\n")
    if args.report:
        lines = [",".join(REPORT_COLUMNS)]
        lines.append(_report_row(instance, Path(args.input).stem, report))
        Path(args.report).write_text("\n".join(lines) + "\n")
    if args.sol:
        assignment = solution_to_assignment(solution)
        lines = [f"{name} {value:g}" for name, value in assignment.items()]
        Path(args.sol).write_text("\n".join(lines) + "\n")
    summary = report.copy()
    timings = summary.pop("timings")
    summary.pop("cycle_counts")
    print(json.dumps(summary))
    _write_manifest(
        args.out or args.report,
        "solve",
        args,
        digest,
        {**timings, "total": time.perf_counter() - t0},
        args.manifest,
    )
    return 0


def cmd_check(args) -> int:
    t0 = time.perf_counter()
    instance = load_instance(args.input)
    tsn = build_time_space_network(instance.physical, instance.period_count)
    tcs, _ = expand_commodities(instance)
    model = build_mip(instance, tsn, tcs)
    assignment = read_solution(Path(args.sol).read_text())
    result = check_solution(instance, tsn, tcs, model, assignment)
    verdict = {
        "feasible": result.feasible,
        "objective": result.objective,
        "violations": result.violations[:20],
        "violation_count": len(result.violations),
        "summary": result.summary,
        "instance_hash": _file_digest(args.input),
        "manifest": {
            "command": "check",
            "versions": {"cssnd": __version__,
                         "python": platform.python_version()},
            "wall_clock": {"total": time.perf_counter() - t0},
        },
    }
    print(json.dumps(verdict, indent=2))
    _write_manifest(
        None,
        "check",
        args,
        verdict["instance_hash"],
        {"total": time.perf_counter() - t0},
        args.manifest,
    )
    return 0 if result.feasible else 1


def cmd_bench(args) -> int:
    t0 = time.perf_counter()
    sizes = [s.strip() for s in args.sizes.split(",") if s.strip()]
    header = [
        "instance",
        "size",
        "n_physical",
        "k",
        "seed",
        "obj_r",
        "obj_c",
        "obj_a",
        "time_r",
        "time_c",
        "time_a",
    ]
    rows = [",".join(header)]
    for size in sizes:
        cls = size_class(size)
        for index in range(args.per_size):
            k = cls.k_options[index % len(cls.k_options)]
            seed = args.seed + index
            instance = generate_instance(cls, k, seed)
            objectives = {}
            times = {}
            for config in "rca":
                start = time.perf_counter()
                _, report = run_dmam(instance, config)
                times[config] = time.perf_counter() - start
                objectives[config] = report["total_cost"]
            rows.append(
                ",".join(
                    [
                        f"bench.{cls.label}.c{k}.s{seed}",
                        cls.label,
                        str(cls.n_physical),
                        str(k),
                        str(seed),
                        f"{objectives['r']:.6f}",
                        f"{objectives['c']:.6f}",
                        f"{objectives['a']:.6f}",
                        f"{times['r']:.3f}",
                        f"{times['c']:.3f}",
                        f"{times['a']:.3f}",
                    ]
                )
            )
    Path(args.out).write_text("\n".join(rows) + "\n")
    _write_manifest(
        args.out,
        "bench",
        args,
        "",
        {"total": time.perf_counter() - t0},
        args.manifest,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cssnd",
        description=(
            "Capacity-scaling service network design: generate instances, "
            "export the exact model, solve with the merge heuristic, and "
            "check solutions."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a random instance")
    gen.add_argument("--size", required=True,
                     choices=["small", "medium", "large", "xlarge"])
    gen.add_argument("--k", type=int, required=True)
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--out", required=True)
    gen.add_argument("--manifest")
    gen.set_defaults(func=cmd_gen)

    analyze = sub.add_parser("analyze", help="per-period requirement profile")
    analyze.add_argument("--in", dest="input", required=True)
    analyze.add_argument("--out", required=True)
    analyze.add_argument("--in-transit", action="store_true",
                         help="intersect transit supports instead of windows")
    analyze.add_argument("--manifest")
    analyze.set_defaults(func=cmd_analyze)

    export = sub.add_parser("export", help="write the model as LP or MPS")
    export.add_argument("--in", dest="input", required=True)
    export.add_argument("--format", choices=["lp", "mps"], default="lp")
    export.add_argument("--vi", help="comma list from: gamma, phi")
    export.add_argument("--nearopt", type=int, choices=[21, 22, 23])
    export.add_argument("--lambda", dest="lam", type=float)
    export.add_argument("--literal-shift", action="store_true")
    export.add_argument("--strong-forcing", action="store_true")
    export.add_argument("--out", required=True)
    export.add_argument("--manifest")
    export.set_defaults(func=cmd_export)

    solve = sub.add_parser("solve", help="run the merge heuristic")
    solve.add_argument("--in", dest="input", required=True)
    solve.add_argument("--config", choices=["r", "c", "a"], default="a")
    solve.add_argument("--out", help="schedule JSON path")
    solve.add_argument("--report", help="report CSV path")
    solve.add_argument("--sol", help="write the schedule as model variable values")
    solve.add_argument("--manifest")
    solve.set_defaults(func=cmd_solve)

    check = sub.add_parser("check", help="verify an external solution file")
    check.add_argument("--in", dest="input", required=True)
    check.add_argument("--sol", required=True)
    check.add_argument("--manifest")
    check.set_defaults(func=cmd_check)

    bench = sub.add_parser("bench", help="run all configs over a suite")
    bench.add_argument("--sizes", default="small,medium,large")
    bench.add_argument("--per-size", type=int, default=3)
    bench.add_argument("--seed", type=int, default=1)
    bench.add_argument("--out", required=True)
    bench.add_argument("--manifest")
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CssndError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
