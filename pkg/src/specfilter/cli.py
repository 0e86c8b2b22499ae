"""Command-line front end: optimize filters, evaluate them, compare traces.

Every run is reproducible from its flags: all randomness hangs off ``--seed``
and floats are written with round-trip precision, so identical invocations
produce byte-identical filter and trace files.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np

from .als import AlsConfig, optimize_als, optimize_als_multistart, random_filter
from .colorimetry import EvaluationReport, evaluate
from .errors import SpecFilterError
from .gradient import GaConfig, optimize_ga, optimize_ga_multistart
from .ingest import load_cmf, load_scene_set, load_sensor_set, read_manifest, read_spectral_csv
from .solution import FilterSolution
from .spectra import DEFAULT_GRID, SensorSet, SpectralCurve
from .vora import vora_value


def _fmt(value: float) -> str:
    """Shortest decimal that round-trips the float exactly."""
    return repr(float(value))


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


def _digest(chunks: list[tuple[str, bytes]]) -> str:
    h = hashlib.sha256()
    for label, data in chunks:
        h.update(label.encode("utf-8"))
        h.update(b"\x00")
        h.update(data)
        h.update(b"\x00")
    return "sha256:" + h.hexdigest()


def _file_bytes(path: str) -> bytes:
    with open(path, "rb") as handle:
        return handle.read()


def _load_camera(path: str) -> SensorSet:
    return load_sensor_set(read_spectral_csv(path), DEFAULT_GRID)


def _filter_csv(f: SpectralCurve) -> str:
    lines = ["wavelength,transmittance"]
    for wl, value in zip(f.grid.wavelengths(), f.values):
        lines.append(f"{_fmt(wl)},{_fmt(value)}")
    return "\n".join(lines) + "\n"


def _trace_csv(solution: FilterSolution) -> str:
    lines = ["iteration,vora_value,residual"]
    for point in solution.trace:
        lines.append(f"{point.iteration},{_fmt(point.vora_value)},{_fmt(point.residual)}")
    return "\n".join(lines) + "\n"


def _iteration_filters_csv(solution: FilterSolution) -> str:
    header = "wavelength," + ",".join(f"iter{p.iteration}" for p in solution.trace)
    lines = [header]
    wavelengths = solution.filter.grid.wavelengths()
    for i, wl in enumerate(wavelengths):
        cells = [_fmt(wl)] + [_fmt(p.filter_values[i]) for p in solution.trace]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _stats_row(report: EvaluationReport) -> str:
    s = report.delta_e
    return (
        "vora_value,mean,median,p95,p99,max\n"
        f"{_fmt(report.vora)},{_fmt(s.mean)},{_fmt(s.median)},"
        f"{_fmt(s.p95)},{_fmt(s.p99)},{_fmt(s.max)}\n"
    )


def _stats_table(rows: list[tuple[str, EvaluationReport]]) -> str:
    header = f"{'Method':<14}{'Vora-Value':>12}{'mean':>9}{'median':>9}{'95%':>9}{'99%':>9}{'max':>9}"
    lines = [header, "-" * len(header)]
    for name, report in rows:
        s = report.delta_e
        lines.append(
            f"{name:<14}{float(report.vora):>12.4f}{s.mean:>9.3f}{s.median:>9.3f}"
            f"{s.p95:>9.3f}{s.p99:>9.3f}{s.max:>9.3f}"
        )
    return "\n".join(lines) + "\n"


def _report_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _evaluation_payload(report: EvaluationReport) -> dict:
    return {
        "vora_value": float(report.vora),
        "delta_e": {
            "mean": report.delta_e.mean,
            "median": report.delta_e.median,
            "p95": report.delta_e.p95,
            "p99": report.delta_e.p99,
            "max": report.delta_e.max,
        },
        "pair_count": report.pair_count,
        "negative_xyz_count": report.negative_xyz_count,
        "correction_mode": report.correction_mode,
        "provenance": dict(report.provenance),
    }


def cmd_optimize(args) -> int:
    camera = _load_camera(args.camera)
    cmf = load_cmf(args.cmf)
    rng = np.random.default_rng(args.seed)
    initial = (
        random_filter(DEFAULT_GRID, rng) if args.init == "random" else "ones"
    )

    started = time.perf_counter()
    if args.optimizer == "als":
        config = AlsConfig(epsilon=args.epsilon, max_iterations=args.max_iters, initial_filter=initial)
        if args.starts > 1:
            solution = optimize_als_multistart(camera, cmf, config, starts=args.starts, seed=args.seed)
        else:
            solution = optimize_als(camera, cmf, config)
    else:
        config = GaConfig(
            step_rule=args.step_rule,
            fixed_step=args.fixed_step,
            epsilon=args.epsilon,
            max_iterations=args.max_iters,
            initial_filter=initial,
        )
        if args.starts > 1:
            solution = optimize_ga_multistart(camera, cmf, config, starts=args.starts, seed=args.seed)
        else:
            solution = optimize_ga(camera, cmf, config)
    elapsed_ms = (time.perf_counter() - started) * 1000.0

    os.makedirs(args.out, exist_ok=True)
    _write(os.path.join(args.out, "filter.csv"), _filter_csv(solution.filter))
    _write(os.path.join(args.out, "trace.csv"), _trace_csv(solution))
    _write(
        os.path.join(args.out, "iteration_filters.csv"), _iteration_filters_csv(solution)
    )

    chunks = [("camera", _file_bytes(args.camera)), ("cmf", _cmf_bytes(args.cmf))]
    payload = {
        "command": "optimize",
        "optimizer": args.optimizer,
        "inputs": {"camera": args.camera, "cmf": args.cmf, "digest": _digest(chunks)},
        "config": {
            "epsilon": args.epsilon,
            "max_iterations": args.max_iters,
            "init": args.init,
            "seed": args.seed,
            "starts": args.starts,
            "step_rule": args.step_rule if args.optimizer == "ga" else None,
        },
        "camera_channel_peaks": [float(v) for v in camera.channel_peaks()],
        "solution": {
            "vora_value": float(solution.score),
            "initial_vora_value": float(solution.trace[0].vora_value),
            "iterations": solution.iterations,
            "converged": solution.converged,
            "correction_matrix": [[float(v) for v in row] for row in solution.correction.m],
        },
        "outputs": {
            "filter": "filter.csv",
            "trace": "trace.csv",
            "iteration_filters": "iteration_filters.csv",
        },
        "timing_ms": elapsed_ms,
    }
    _write(os.path.join(args.out, "report.json"), _report_json(payload))

    if not solution.converged:
        print(
            f"warning: did not converge within {args.max_iters} iterations", file=sys.stderr
        )
        return 2
    print(
        f"{args.optimizer}: vora_value {float(solution.score):.6f} "
        f"after {solution.iterations} iterations -> {args.out}"
    )
    return 0


def _cmf_bytes(choice: str) -> bytes:
    if choice.startswith("file:"):
        return _file_bytes(choice[len("file:"):])
    return choice.encode("utf-8")


def _load_filter(path: str) -> SpectralCurve:
    table = read_spectral_csv(path)
    if table.columns.shape[1] != 1:
        raise SpecFilterError(f"filter file must have exactly one data column: {path}")
    return table.curves(DEFAULT_GRID)[0]


def cmd_evaluate(args) -> int:
    manifest = read_manifest(args.scenes)
    camera_path = args.camera or manifest.camera
    if camera_path is None:
        raise SpecFilterError("no camera file given (flag --camera or manifest key 'camera')")
    cmf_choice = args.cmf or manifest.cmf
    camera = _load_camera(camera_path)
    cmf = load_cmf(cmf_choice)
    scenes = load_scene_set(manifest, DEFAULT_GRID)
    filter_curve = _load_filter(args.filter) if args.filter else None

    provenance = (
        ("camera", camera_path),
        ("cmf", cmf_choice),
        ("illuminants", manifest.illuminants or ""),
        ("reflectances", manifest.reflectances or ""),
    )
    started = time.perf_counter()
    report = evaluate(
        camera,
        filter_curve,
        cmf,
        scenes,
        correction_mode=args.correction,
        provenance=provenance,
    )
    elapsed_ms = (time.perf_counter() - started) * 1000.0

    os.makedirs(args.out, exist_ok=True)
    _write(os.path.join(args.out, "evaluation.csv"), _stats_row(report))
    label = "filtered" if filter_curve is not None else "baseline"
    _write(os.path.join(args.out, "evaluation.txt"), _stats_table([(label, report)]))

    chunks = [("camera", _file_bytes(camera_path)), ("cmf", _cmf_bytes(cmf_choice))]
    if manifest.illuminants:
        chunks.append(("illuminants", _file_bytes(manifest.illuminants)))
    if manifest.reflectances:
        chunks.append(("reflectances", _file_bytes(manifest.reflectances)))
    if args.filter:
        chunks.append(("filter", _file_bytes(args.filter)))
    payload = {
        "command": "evaluate",
        "inputs": {
            "camera": camera_path,
            "cmf": cmf_choice,
            "scenes": args.scenes,
            "filter": args.filter,
            "digest": _digest(chunks),
        },
        "camera_channel_peaks": [float(v) for v in camera.channel_peaks()],
        "evaluation": _evaluation_payload(report),
        "timing_ms": elapsed_ms,
    }
    _write(os.path.join(args.out, "report.json"), _report_json(payload))

    print(_stats_table([(label, report)]), end="")
    return 0


def _read_trace(path: str) -> list[tuple[int, float, float]]:
    rows = []
    with open(path, "r", encoding="utf-8") as handle:
        lines = [ln.strip() for ln in handle if ln.strip()]
    if not lines or lines[0].split(",")[:2] != ["iteration", "vora_value"]:
        raise SpecFilterError(f"{path} is not a trace CSV (expected iteration,vora_value,residual)")
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != 3:
            raise SpecFilterError(f"{path} line {lineno}: expected 3 cells, got {len(cells)}")
        try:
            rows.append((int(cells[0]), float(cells[1]), float(cells[2])))
        except ValueError:
            raise SpecFilterError(f"{path} line {lineno}: non-numeric trace row") from None
    if not rows:
        raise SpecFilterError(f"{path} has no trace rows")
    return rows


def _read_iteration_filters(path: str) -> list[np.ndarray]:
    table = read_spectral_csv(path)
    return [table.resampled_columns(DEFAULT_GRID)[:, j] for j in range(table.columns.shape[1])]


def cmd_trace_compare(args) -> int:
    traces = [
        (args.label_a, _read_trace(args.trace_a), args.filters_a),
        (args.label_b, _read_trace(args.trace_b), args.filters_b),
    ]

    evaluator = None
    if args.scenes and args.camera:
        manifest = read_manifest(args.scenes)
        camera = _load_camera(args.camera)
        cmf = load_cmf(args.cmf or manifest.cmf)
        scenes = load_scene_set(manifest, DEFAULT_GRID)

        def evaluator(filter_values: np.ndarray) -> float:
            curve = SpectralCurve(DEFAULT_GRID, filter_values)
            report = evaluate(camera, curve, cmf, scenes, correction_mode=args.correction)
            return report.delta_e.mean

    lines = ["iteration,method,vora_value,mean_delta_e"]
    for label, rows, filters_path in traces:
        iteration_filters = (
            _read_iteration_filters(filters_path) if filters_path and evaluator else None
        )
        for idx, (iteration, vora, _) in enumerate(rows):
            if iteration_filters is not None and idx < len(iteration_filters):
                mean_de = _fmt(evaluator(iteration_filters[idx]))
            else:
                mean_de = ""
            lines.append(f"{iteration},{label},{_fmt(vora)},{mean_de}")

    os.makedirs(args.out, exist_ok=True)
    _write(os.path.join(args.out, "compare.csv"), "\n".join(lines) + "\n")
    print(f"wrote {os.path.join(args.out, 'compare.csv')}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specfilter",
        description="Design and evaluate spectral filters that make a camera more colorimetric.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    opt = sub.add_parser("optimize", help="solve for the filter maximizing the Vora-Value")
    opt.add_argument("--camera", required=True, help="camera sensitivities CSV (wavelength,r,g,b)")
    opt.add_argument("--cmf", default="cie1931", help="cie1931 or file:<path>")
    opt.add_argument("--optimizer", choices=("als", "ga"), default="als")
    opt.add_argument("--epsilon", type=float, default=1e-9, help="minimum Vora-Value gain per iteration")
    opt.add_argument("--max-iters", type=int, default=10_000)
    opt.add_argument("--init", choices=("ones", "random"), default="ones")
    opt.add_argument("--seed", type=int, default=0)
    opt.add_argument("--starts", type=int, default=1, help="restarts for seeded multistart (>1 enables)")
    opt.add_argument("--step-rule", choices=("backtracking", "fixed"), default="backtracking",
                     help="gradient-ascent step rule (ga only)")
    opt.add_argument("--fixed-step", type=float, default=0.1, help="step size for --step-rule fixed")
    opt.add_argument("--out", default=".", help="output directory")
    opt.set_defaults(func=cmd_optimize)

    ev = sub.add_parser("evaluate", help="color-error statistics over a scene collection")
    ev.add_argument("--camera", help="camera CSV (falls back to the manifest's camera)")
    ev.add_argument("--filter", help="filter CSV from a prior optimize run")
    ev.add_argument("--cmf", help="cie1931 or file:<path> (falls back to the manifest)")
    ev.add_argument("--scenes", required=True, help="dataset manifest file")
    ev.add_argument("--correction", choices=("per-illuminant", "global"), default="per-illuminant")
    ev.add_argument("--out", default=".", help="output directory")
    ev.set_defaults(func=cmd_evaluate)

    cmp_parser = sub.add_parser("trace-compare", help="merge two convergence traces for plotting")
    cmp_parser.add_argument("trace_a")
    cmp_parser.add_argument("trace_b")
    cmp_parser.add_argument("--label-a", default="a")
    cmp_parser.add_argument("--label-b", default="b")
    cmp_parser.add_argument("--filters-a", help="iteration_filters.csv for trace A")
    cmp_parser.add_argument("--filters-b", help="iteration_filters.csv for trace B")
    cmp_parser.add_argument("--camera", help="camera CSV for per-iteration mean delta E")
    cmp_parser.add_argument("--cmf", help="cie1931 or file:<path>")
    cmp_parser.add_argument("--scenes", help="dataset manifest for per-iteration mean delta E")
    cmp_parser.add_argument("--correction", choices=("per-illuminant", "global"), default="per-illuminant")
    cmp_parser.add_argument("--out", default=".", help="output directory")
    cmp_parser.set_defaults(func=cmd_trace_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SpecFilterError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
