"""Batch command-line front-end for every pipeline.

Subcommands: dataset, decompose, edit, sketch, generate, metrics,
simulate, serve. All paths are explicit flags or positionals; there are
no implicit config files. Errors exit nonzero with a single
machine-parsable ``ErrorClass: message`` line on stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io as fio
from .fields import FieldError
from .hhd import decompose, apply_edit_sequence, parse_edit_script
from .metrics import METRIC_NAMES, evaluate, format_report
from .poisson import SolveOptions
from .sim import Inflow, SmokeState, step_smoke
from .sketch import (
    SketchImage,
    parse_strokes,
    rasterize_sketch,
    sketch_to_field_baseline,
    trace_streamlines,
)
from .synth import CATEGORIES, generate_dataset


def _cmd_dataset(args) -> int:
    categories = args.category or list(CATEGORIES)
    counts = {cat: args.count for cat in categories}
    records = generate_dataset(counts, args.seed, args.out,
                               width=args.width, height=args.height,
                               sketches=not args.no_sketches)
    print(f"wrote {len(records)} samples to {args.out}")
    return 0


def _cmd_decompose(args) -> int:
    field = fio.read_field(args.input)
    result = decompose(field, SolveOptions(tolerance=args.tolerance))
    prefix = Path(args.out_prefix)
    for name, part in (("div_free", result.div_free),
                       ("curl_free", result.curl_free),
                       ("harmonic", result.harmonic)):
        fio.write_field(part, prefix.parent / f"{prefix.name}.{name}.vf2")
    for label, report in (("div_free", result.div_free_report),
                          ("curl_free", result.curl_free_report)):
        print(f"{label} solve: {report.iterations} iterations, "
              f"residual {report.final_residual:.3e}")
    return 0


def _cmd_edit(args) -> int:
    field = fio.read_field(args.input)
    edits = parse_edit_script(Path(args.script).read_text(encoding="utf-8"))
    out = apply_edit_sequence(field, edits, SolveOptions(tolerance=args.tolerance))
    fio.write_field(out, args.out)
    print(f"applied {len(edits)} edits -> {args.out}")
    return 0


def _cmd_sketch(args) -> int:
    field = fio.read_field(args.input)
    lines = trace_streamlines(field, density=args.density, step=args.step,
                              max_steps=args.max_steps)
    img = rasterize_sketch(lines, field_width=field.width, field_height=field.height)
    fio.write_pgm(img.data, args.out)
    print(f"traced {len(lines)} streamlines -> {args.out}")
    return 0


def _cmd_generate(args) -> int:
    path = Path(args.input)
    strokes = None
    if path.suffix == ".pgm":
        img = SketchImage(fio.read_pgm(path))
    else:
        strokes = parse_strokes(path.read_text(encoding="utf-8"))
        from .sketch import strokes_to_sketch
        img = strokes_to_sketch(strokes)
    field = sketch_to_field_baseline(img, strokes=strokes,
                                     opts=SolveOptions(tolerance=args.tolerance))
    fio.write_field(field, args.out)
    print(f"generated {field.width}x{field.height} field -> {args.out}")
    return 0


def _cmd_metrics(args) -> int:
    a = fio.read_field(args.a)
    b = fio.read_field(args.b)
    which = tuple(args.metrics.split(",")) if args.metrics else None
    report = evaluate(a, b, which, SolveOptions(tolerance=args.tolerance))
    print(format_report(report))
    return 0


def _parse_inflow(text: str) -> Inflow:
    parts = [float(x) for x in text.split(",")]
    if len(parts) == 5:
        parts.append(1.0)
    if len(parts) != 6:
        raise ValueError("inflow must be cx,cy,radius,angle,speed[,density]")
    cx, cy, radius, angle, speed, density = parts
    return Inflow(center=(cx, cy), radius=radius, angle=angle,
                  speed=speed, density=density)


def _cmd_simulate(args) -> int:
    force = fio.read_field(args.input)
    inflows = [_parse_inflow(s) for s in args.inflow or []]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    state = SmokeState.zeros(force.width, force.height)
    opts = SolveOptions(tolerance=args.tolerance)
    written = 0
    for step in range(1, args.steps + 1):
        state = step_smoke(state, force, args.dt, inflows, opts)
        if step % args.frame_every == 0:
            img = np.round(np.clip(state.density.data, 0.0, 1.0) * 255.0).astype(np.uint8)
            fio.write_pgm(img, out / f"density_{written:04d}.pgm")
            if args.export_velocity:
                fio.write_field(state.velocity, out / f"velocity_{written:04d}.vf2")
            written += 1
    print(f"simulated {args.steps} steps, wrote {written} frames to {out}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app

    config = ServiceConfig(
        persist_dir=Path(args.persist_dir) if args.persist_dir else None,
        session_ttl=args.session_ttl,
        provider=args.provider,
        tolerance=args.tolerance,
    )
    uvicorn.run(create_app(config), host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flowedit",
                                     description="2D vector field design toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_tolerance(p):
        p.add_argument("--tolerance", type=float, default=1e-10,
                       help="relative solver tolerance")

    p = sub.add_parser("dataset", help="generate (field, pseudo-sketch) pairs")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, required=True, help="samples per category")
    p.add_argument("--category", action="append", choices=CATEGORIES,
                   help="repeatable; default: all six categories")
    p.add_argument("--width", type=int, default=256)
    p.add_argument("--height", type=int, default=256)
    p.add_argument("--no-sketches", action="store_true")
    p.set_defaults(func=_cmd_dataset)

    p = sub.add_parser("decompose", help="split a field into its three components")
    p.add_argument("input")
    p.add_argument("--out-prefix", required=True)
    add_tolerance(p)
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("edit", help="apply an edit script to a field")
    p.add_argument("input")
    p.add_argument("--script", required=True)
    p.add_argument("--out", required=True)
    add_tolerance(p)
    p.set_defaults(func=_cmd_edit)

    p = sub.add_parser("sketch", help="trace a pseudo-sketch from a field")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    p.add_argument("--density", type=int, default=8)
    p.add_argument("--step", type=float, default=0.25)
    p.add_argument("--max-steps", type=int, default=1000)
    p.set_defaults(func=_cmd_sketch)

    p = sub.add_parser("generate", help="sketch or strokes to field (baseline provider)")
    p.add_argument("input", help=".pgm raster or stroke polyline text file")
    p.add_argument("--out", required=True)
    add_tolerance(p)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("metrics", help="evaluate field a against reference b")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--metrics", help=f"comma list from {','.join(METRIC_NAMES)}")
    add_tolerance(p)
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("simulate", help="run the smoke simulator with a force field")
    p.add_argument("input", help="force field (.vf2)")
    p.add_argument("--out", required=True)
    p.add_argument("--steps", type=int, default=150)
    p.add_argument("--dt", type=float, default=0.5)
    p.add_argument("--inflow", action="append",
                   help="cx,cy,radius,angle,speed[,density]; repeatable")
    p.add_argument("--frame-every", type=int, default=1)
    p.add_argument("--export-velocity", action="store_true")
    add_tolerance(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--persist-dir")
    p.add_argument("--session-ttl", type=float)
    p.add_argument("--provider", default="baseline")
    add_tolerance(p)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FieldError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
