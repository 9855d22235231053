"""Headless driver: generate foams, reproduce timings, serve the HTTP API.

Exit codes: 0 success, 2 bad arguments (argparse), 3 unreadable/malformed
input. Artifact bytes are identical to what the HTTP service serves for the
same input and parameters.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from statistics import mean, pstdev
from typing import List, Optional

from .angle_opt import OptimizerConfig, optimize_rotation
from .depth_raster import DEFAULT_SPACE, DEFAULT_SUPERSAMPLE, DesignSpace
from .errors import FoamForgeError
from .foam_export import ExportFormat, render_slice_svg, write_mesh
from .mesh_core import EulerAngles, center_mesh, format_from_extension, load_mesh
from .pipeline import generate_foam, generation_time_ms, warmup

REPORT_SCHEMA_VERSION = 1


def _parse_triple(text: str, sep: str, cast, what: str):
    parts = text.split(sep)
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"{what} must be three values separated by '{sep}'")
    try:
        return tuple(cast(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{what} has a non-numeric component: {text!r}")


def _res_triple(text: str):
    return _parse_triple(text.lower(), "x", int, "--res")


def _block_triple(text: str):
    return _parse_triple(text.lower(), "x", float, "--block")


def _angle_triple(text: str):
    return _parse_triple(text, ",", float, "--angles")


def _load_input(path: str):
    data = Path(path).read_bytes()
    return center_mesh(load_mesh(data, format_from_extension(path)))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="foamforge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate the two foam blocks for a mesh")
    gen.add_argument("--input", required=True, help="mesh file (.stl/.ply/.obj)")
    gen.add_argument("--res", type=_res_triple, default=(DEFAULT_SPACE.nx, DEFAULT_SPACE.ny, DEFAULT_SPACE.nz), metavar="NXxNYxNZ")
    gen.add_argument("--block", type=_block_triple, default=(DEFAULT_SPACE.bx, DEFAULT_SPACE.by, DEFAULT_SPACE.bz), metavar="BXxBYxBZ")
    gen.add_argument("--angles", type=_angle_triple, default=(0.0, 0.0, 0.0), metavar="P,T,F")
    gen.add_argument("--optimize", action="store_true", help="initialize angles by the greedy foam-volume search first")
    gen.add_argument("--supersample", type=int, default=DEFAULT_SUPERSAMPLE)
    gen.add_argument("--out-dir", required=True)
    gen.add_argument("--format", choices=("stl", "ply"), default="stl")
    gen.add_argument("--slices", choices=("svg", "json"), default="svg")
    gen.add_argument("--report", choices=("json",), default="json")

    bench = sub.add_parser("bench", help="time the generation step at several resolutions")
    bench.add_argument("--input", required=True)
    bench.add_argument("--res-list", default="10,15,20,25,30", help="comma-separated N values, expanded to NxNxN")
    bench.add_argument("--block", type=_block_triple, default=(DEFAULT_SPACE.bx, DEFAULT_SPACE.by, DEFAULT_SPACE.bz), metavar="BXxBYxBZ")
    bench.add_argument("--runs", type=int, default=5)
    bench.add_argument("--supersample", type=int, default=DEFAULT_SUPERSAMPLE)
    bench.add_argument("--single-thread", action="store_true", help="record single-threaded execution in the report")

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--port", type=int, default=int(os.environ.get("FOAMFORGE_PORT", 8787)))
    serve.add_argument("--host", default=os.environ.get("FOAMFORGE_HOST", "127.0.0.1"))
    serve.add_argument("--spool-dir", default=os.environ.get("FOAMFORGE_SPOOL_DIR"))
    serve.add_argument("--max-upload-bytes", type=int, default=int(os.environ.get("FOAMFORGE_MAX_UPLOAD", 256 * 1024 * 1024)))
    serve.add_argument("--supersample", type=int, default=int(os.environ.get("FOAMFORGE_SUPERSAMPLE", DEFAULT_SUPERSAMPLE)))
    serve.add_argument("--snapshot-path", default=os.environ.get("FOAMFORGE_SNAPSHOT"))
    return parser


def cmd_generate(args) -> int:
    try:
        mesh = _load_input(args.input)
    except (OSError, FoamForgeError) as exc:
        print(f"error: cannot load {args.input}: {exc}", file=sys.stderr)
        return 3
    try:
        space = DesignSpace(*args.res, *(float(b) for b in args.block))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    warmup()

    angles = EulerAngles(*args.angles)
    opt_report = None
    if args.optimize:
        opt_report = optimize_rotation(mesh, space, OptimizerConfig(), start=angles, supersample=args.supersample)
        angles = opt_report.angles

    result = generate_foam(mesh, space, angles, supersample=args.supersample)
    bm = result.block_map

    fmt = ExportFormat.STL_BINARY if args.format == "stl" else ExportFormat.PLY_ASCII
    outputs: List[str] = []
    for name, region_mesh in (("foam_plus", result.mesh_plus), ("foam_minus", result.mesh_minus)):
        path = out_dir / f"{name}.{args.format}"
        path.write_bytes(write_mesh(region_mesh, fmt))
        outputs.append(path.name)

    slice_dir = out_dir / "slices"
    slice_dir.mkdir(exist_ok=True)
    if args.slices == "svg":
        for i in range(bm.space.nx):
            (slice_dir / f"{i:03d}.svg").write_text(render_slice_svg(result.slices, i))
        outputs.append(f"slices/*.svg ({bm.space.nx} layers)")
    else:
        (slice_dir / "slices.json").write_text(bm.to_json())
        outputs.append("slices/slices.json")

    report = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "params": {
            "input": str(args.input),
            "resolution": list(args.res),
            "block_size_mm": [float(b) for b in args.block],
            "angles_deg": list(angles.as_tuple()),
            "supersample": args.supersample,
            "optimized": bool(args.optimize),
        },
        "f_score": bm.foam_block_count / space.total_blocks,
        "foam_blocks": bm.foam_block_count,
        "occupied_blocks": bm.occupied_block_count,
        "gap": result.gap_report.to_json_obj() if result.gap_report else None,
        "timing_ms": result.timing_ms,
        "optimizer": opt_report.to_json_obj() if opt_report else None,
        "outputs": outputs,
    }
    (out_dir / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(f"wrote {', '.join(outputs)} and report.json to {out_dir}")
    return 0


def cmd_bench(args) -> int:
    try:
        mesh = _load_input(args.input)
    except (OSError, FoamForgeError) as exc:
        print(f"error: cannot load {args.input}: {exc}", file=sys.stderr)
        return 3
    if args.runs < 1:
        print("error: --runs must be >= 1", file=sys.stderr)
        return 2
    name = Path(args.input).stem
    resolutions = [int(n) for n in args.res_list.split(",") if n.strip()]
    warmup()
    rows = []
    for n in resolutions:
        space = DesignSpace(n, n, n, *(float(b) for b in args.block))
        generation_time_ms(mesh, space, supersample=args.supersample)  # warm run, untimed
        times = [generation_time_ms(mesh, space, supersample=args.supersample) for _ in range(args.runs)]
        rows.append(
            {
                "model": name,
                "vertex_count": mesh.vertex_count,
                "resolution": f"{n}x{n}x{n}",
                "mean_ms": round(mean(times), 3),
                "std_ms": round(pstdev(times), 3),
                "runs": args.runs,
            }
        )
    report = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "environment": {
            "single_threaded": True,
            "note": "generation pipeline is sequential; timing covers rotate/render/reduce/map/split only"
            + (" (--single-thread requested)" if args.single_thread else ""),
        },
        "rows": rows,
    }
    header = f"{'model':<16} {'#V':>8} {'resolution':>12} {'mean ms':>9} {'std ms':>8}"
    print(header)
    print("-" * len(header))
    for r in rows:
        print(f"{r['model']:<16} {r['vertex_count']:>8} {r['resolution']:>12} {r['mean_ms']:>9.2f} {r['std_ms']:>8.2f}")
    print(json.dumps(report, sort_keys=True))
    return 0


def cmd_serve(args) -> int:  # pragma: no cover - interactive entry point
    import uvicorn

    from .foam_service import create_app

    app = create_app(
        spool_dir=args.spool_dir,
        max_upload_bytes=args.max_upload_bytes,
        supersample=args.supersample,
        snapshot_path=args.snapshot_path,
    )
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "generate":
        return cmd_generate(args)
    if args.command == "bench":
        return cmd_bench(args)
    if args.command == "serve":
        return cmd_serve(args)
    parser.error(f"unknown command {args.command!r}")
    return 2


def entry() -> None:  # console-script shim
    sys.exit(main())


if __name__ == "__main__":
    entry()
