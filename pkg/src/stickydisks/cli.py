"""Command-line interface: generate, analyze, flex, jam, render.

Exit codes
  0  success (jam: jammed; flex: all steps completed)
  1  bad flags, or an unreadable input for ``render``
  2  ``generate`` could not place the disks
  3  ``analyze`` / ``flex`` / ``jam`` input does not parse or validate
  4  ``jam``: not jammed (witness written); ``flex``: trajectory left the contact stratum
  5  other analysis failure (rigid input to ``flex``, degenerate gauge, LP failure)
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from importlib import metadata
from pathlib import Path

import numpy as np

from . import generators as gen
from .combinatorics import embedding_is_planar, pebble_game_2_3
from .errors import (
    EmptyPacking,
    InvalidTolerance,
    NonpositiveRadius,
    NotInContact,
    OverlapError,
    PackingFormatError,
    PlacementFailure,
    RankTolAmbiguous,
    StickyDiskError,
    StratumExit,
)
from .jamming import isostatic_count_check, spine_decomposition, tensegrity_flex_lp
from .manifold import displacement_profile, fiber_dimension, follow_flex
from .packing import (
    ContactGraph,
    DiskPacking,
    Tolerances,
    contact_graph,
    dumps,
    dumps_value,
    load,
    packing_from_dict,
    packing_to_dict,
    validate,
)
from .rigidity import bar_stresses, build_jacobian, flex_space, numerical_rank, rigidity_matrix

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PLACEMENT = 2
EXIT_INVALID = 3
EXIT_VERDICT = 4
EXIT_FAILURE = 5

KINDS = ("sequential", "hex", "tricusp", "fig5a", "fig5b", "chain", "triangle")
DEFAULT_OUT = {
    "generate": "packing.json",
    "analyze": "analysis.json",
    "flex": "trajectory.jsonl",
    "jam": "verdict.json",
    "render": "figure.svg",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse with exit status 1 on bad flags."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="PRNG seed (default 0)")
    p.add_argument("--tol-contact", type=float, default=1e-9, help="relative contact tolerance")
    p.add_argument("--tol-rank", type=float, default=1e-8, help="relative rank threshold")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for batch inputs")
    p.add_argument("--out", type=Path, default=None, help="main output path")
    p.add_argument("--dump-matrix", action="store_true", help="write M and R as CSV next to the output")
    p.add_argument("--figure", action="store_true", help="also render an SVG figure next to the output")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="stickydisks", description="Rigidity and jamming analysis of planar disk packings.")
    parser.add_argument("--version", action="version", version=tool_version())
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", parents=[common], help="construct a packing")
    g.add_argument("--kind", choices=KINDS, required=True)
    g.add_argument("--n", type=int, default=10, help="number of disks (sequential, tricusp, chain)")
    g.add_argument("--rings", type=int, default=1, help="rings of the hexagonal patch")
    g.add_argument("--radius-min", type=float, default=1.0)
    g.add_argument("--radius-max", type=float, default=2.0)

    a = sub.add_parser("analyze", parents=[common], help="contact graph and rigidity report")
    a.add_argument("inputs", nargs="+", type=Path)

    f = sub.add_parser("flex", parents=[common], help="follow a nontrivial flex")
    f.add_argument("input", type=Path)
    f.add_argument("--steps", type=int, default=100)
    f.add_argument("--h", type=float, default=1e-3)
    f.add_argument("--drop-edge", type=int, default=None,
                   help="index of a contact to remove from the constraint set")

    j = sub.add_parser("jam", parents=[common], help="first-order jamming verdict in a tri-cusp")
    j.add_argument("input", type=Path)

    r = sub.add_parser("render", parents=[common], help="SVG of a packing or trajectory frame")
    r.add_argument("input", type=Path)
    r.add_argument("--frame", type=int, default=None, help="trajectory line to draw (JSONL input)")
    r.add_argument("--stress", action="store_true", help="color contacts by the sign of a bar stress")
    r.add_argument("--flex", action="store_true", help="draw a nontrivial flex as arrows")
    return parser


# ----------------------------------------------------------------- helpers


def _tol(args) -> Tolerances:
    try:
        return Tolerances(args.tol_contact, args.tol_rank)
    except InvalidTolerance as exc:
        raise UsageError(str(exc)) from exc


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def _sibling(out: Path, suffix: str) -> Path:
    return out.with_name(out.name.rsplit(".", 1)[0] + suffix)


def _write_manifest(args, argv, outputs, inputs, t0):
    out = args.out
    flags = {k: (str(v) if isinstance(v, Path) else [str(x) for x in v] if isinstance(v, list) else v)
             for k, v in sorted(vars(args).items()) if k != "handler"}
    manifest = {
        "subcommand": args.command,
        "argv": list(argv),
        "flags": flags,
        "seed": args.seed,
        "version": tool_version(),
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
        "duration_s": round(time.perf_counter() - t0, 6),
    }
    path = _sibling(out, ".manifest.json")
    _write(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _load_valid(path: Path, tol: Tolerances):
    """Load and validate; returns (packing, graph) or raises StickyDiskError."""
    packing = load(path)
    report = validate(packing, tol)
    if not report.valid:
        raise OverlapError(f"overlapping pairs: {[list(p) for p in report.overlaps]}", report)
    return packing, contact_graph(packing, tol)


def _csv(path: Path, A: np.ndarray) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, np.atleast_2d(A) if A.size else np.zeros((0, A.shape[1] if A.ndim == 2 else 0)),
               delimiter=",", fmt="%.17g")
    return path


# ------------------------------------------------------------- subcommands


def cmd_generate(args, tol):
    try:
        config = gen.GeneratorConfig(seed=args.seed, n=args.n, radius_range=(args.radius_min, args.radius_max))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.n < 2 or args.rings < 1:
        raise UsageError("--n must be >= 2 and --rings >= 1")
    kind = args.kind
    if kind == "sequential":
        packing, _ = gen.sequential_packing(config, tol)
    elif kind == "hex":
        packing = gen.hexagonal_patch(args.rings)
    elif kind == "tricusp":
        if args.n < 4:
            raise UsageError("tricusp needs --n >= 4")
        packing, _ = gen.tri_cusp_packing(config, args.n - 3, tol=tol)
    elif kind == "fig5a":
        packing, _ = gen.fig5a(tol)
    elif kind == "fig5b":
        packing, _ = gen.fig5b(tol)
    elif kind == "chain":
        packing = gen.unit_chain(args.n)
    else:
        packing = gen.triangle_packing()
    outputs = [_write(args.out, dumps(packing))]
    if args.figure:
        from .plotting import render_packing

        outputs.append(render_packing(_sibling(args.out, ".svg"), packing, contact_graph(packing, tol)))
    return EXIT_OK, outputs


def analyze_packing(packing: DiskPacking, graph: ContactGraph, tol: Tolerances) -> dict:
    """The analysis record written by ``analyze``."""
    n, m = packing.n, graph.m
    sparsity = pebble_game_2_3(graph)
    M = build_jacobian(packing, graph, tol)
    ambiguous = False
    try:
        info_m = numerical_rank(M, tol)[3]
        fs = flex_space(packing, graph, tol)
        fiber = fiber_dimension(packing, graph, tol)
    except RankTolAmbiguous:
        ambiguous = True
        info_m = numerical_rank(M, tol, strict=False)[3]
        info_r = numerical_rank(rigidity_matrix(packing, graph, tol), tol, strict=False)[3]
        fiber = 2 * n - info_r.rank
    nontrivial = fiber - 3
    if ambiguous or m > 2 * n - 3 or fiber != 2 * n - m:
        verdict = "non-generic-suspect"
    elif nontrivial == 0:
        verdict = "rigid"
    else:
        verdict = "flexible"
    return {
        "n": n,
        "m": m,
        "laman_sparse": sparsity.is_laman_sparse,
        "laman_graph": sparsity.is_laman_graph,
        "violating_subgraph": list(sparsity.violating_subgraph) if sparsity.violating_subgraph else None,
        "planar_embedding": embedding_is_planar(packing, graph),
        "rank_M": info_m.rank,
        "flex_dim_nontrivial": nontrivial,
        "pi_kernel_dim": fiber,
        "generic_fiber_dim": 2 * n - m,
        "rank_ambiguous": ambiguous,
        "verdict": verdict,
    }


def _analyze_one(path, tol_contact, tol_rank):
    tol = Tolerances(tol_contact, tol_rank)
    try:
        packing, graph = _load_valid(path, tol)
    except OverlapError as exc:
        return {"input": str(path), "error": str(exc), "overlaps": [list(p) for p in exc.report.overlaps]}
    except (StickyDiskError, OSError) as exc:
        return {"input": str(path), "error": str(exc)}
    rec = {"input": str(path)}
    rec.update(analyze_packing(packing, graph, tol))
    return rec


def cmd_analyze(args, tol):
    paths = list(args.inputs)
    if args.jobs > 1 and len(paths) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            records = list(ex.map(_analyze_one, paths, [tol.contact] * len(paths), [tol.rank] * len(paths)))
    else:
        records = [_analyze_one(p, tol.contact, tol.rank) for p in paths]
    failed = [r for r in records if "error" in r]
    for r in failed:
        print(f"validation failed for {r['input']}: {r['error']}", file=sys.stderr)
    body = records[0] if len(records) == 1 else records
    text = dumps_value(body) + "\n"
    outputs = [_write(args.out, text)]
    sys.stdout.write(text)
    ok = [(p, r) for p, r in zip(paths, records) if "error" not in r]
    if args.dump_matrix or args.figure:
        for idx, (path, _) in enumerate(ok):
            packing, graph = _load_valid(path, tol)
            tag = "" if len(paths) == 1 else f".{idx}"
            if args.dump_matrix:
                outputs.append(_csv(_sibling(args.out, f"{tag}.M.csv"), build_jacobian(packing, graph, tol)))
                outputs.append(_csv(_sibling(args.out, f"{tag}.R.csv"), rigidity_matrix(packing, graph, tol)))
            if args.figure:
                from .plotting import packing_figure, save_svg, singular_value_figure

                outputs.append(save_svg(packing_figure(packing, graph), _sibling(args.out, f"{tag}.svg")))
                info = numerical_rank(build_jacobian(packing, graph, tol), tol, strict=False)[3]
                outputs.append(save_svg(singular_value_figure(info.singular_values, info.threshold,
                                                              "contact Jacobian"),
                                        _sibling(args.out, f"{tag}.sigma.svg")))
    return (EXIT_INVALID if failed else EXIT_OK), outputs


def _trajectory_lines(traj, profile):
    lines = []
    for k, state in enumerate(traj.states):
        rec = {"step": k}
        rec.update(packing_to_dict(state))
        rec["residual"] = traj.residuals[k]
        rec["displacement"] = float(profile[k])
        rec["direction"] = traj.directions[k - 1].reshape(-1, 2).tolist() if k > 0 else None
        rec["newton_iterations"] = len(traj.newton_histories[k - 1]) - 1 if k > 0 else 0
        lines.append(dumps_value(rec))
    return "\n".join(lines) + "\n"


def cmd_flex(args, tol):
    packing, graph = _load_valid(args.input, tol)
    if args.drop_edge is not None:
        if not 0 <= args.drop_edge < graph.m:
            raise UsageError(f"--drop-edge must lie in [0, {graph.m})")
        graph = graph.without_edge(args.drop_edge)
    fs = flex_space(packing, graph, tol)
    direction = None
    if fs.nontrivial_dim > 1:
        coeff = np.random.default_rng(args.seed).standard_normal(fs.nontrivial_dim)
        direction = coeff @ fs.nontrivial
    code = EXIT_OK
    event = None
    try:
        traj = follow_flex(packing, graph, args.steps, args.h, direction=direction, tol=tol)
    except StratumExit as exc:
        traj = exc.trajectory
        code = EXIT_VERDICT
        event = {"type": type(exc).__name__, "step": exc.step, "message": str(exc)}
        print(f"flex aborted: {exc}", file=sys.stderr)
    profile = displacement_profile(traj)
    outputs = [_write(args.out, _trajectory_lines(traj, profile))]
    rows = ["step,residual,displacement"]
    rows += [f"{k},{traj.residuals[k]:.17g},{profile[k]:.17g}" for k in range(len(traj.states))]
    outputs.append(_write(_sibling(args.out, ".csv"), "\n".join(rows) + "\n"))
    summary = {"steps_completed": len(traj.states) - 1, "max_residual": max(traj.residuals),
               "nontrivial_displacement": float(profile[-1]), "event": event}
    outputs.append(_write(_sibling(args.out, ".summary.json"), dumps_value(summary) + "\n"))
    if args.figure:
        from .plotting import save_svg, trajectory_figure

        outputs.append(save_svg(trajectory_figure(np.arange(len(profile)), profile, traj.residuals),
                                _sibling(args.out, ".svg")))
    return code, outputs


def _fraction_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


def cmd_jam(args, tol):
    packing, graph = _load_valid(args.input, tol)
    verdict = tensegrity_flex_lp(packing, graph, tol)
    spine, rattlers = spine_decomposition(packing, graph, tol)
    count = isostatic_count_check(packing, graph)
    out = {
        "jammed": verdict.jammed,
        "m": count["m"],
        "bound": count["bound"],
        "isostatic": count["isostatic"],
        "stage": verdict.stage,
        "max_slack": float(verdict.max_slack),
        "max_slack_exact": _fraction_str(Fraction(verdict.max_slack)),
        "witness": verdict.witness.tolist() if verdict.witness is not None else None,
        "slacks": [{"edge": list(e), "rate": float(v)} for e, v in verdict.slacks.items()],
        "spine": list(spine),
        "rattlers": list(rattlers),
    }
    text = dumps_value(out) + "\n"
    outputs = [_write(args.out, text)]
    sys.stdout.write(text)
    if args.figure:
        from .plotting import render_packing

        outputs.append(render_packing(_sibling(args.out, ".svg"), packing, graph, flex=verdict.witness))
    return (EXIT_OK if verdict.jammed else EXIT_VERDICT), outputs


def cmd_render(args, tol):
    from .plotting import render_packing

    try:
        text = args.input.read_text()
        flex = None
        if args.frame is not None:
            lines = [ln for ln in text.splitlines() if ln.strip()]
            rec = json.loads(lines[args.frame])
            packing = packing_from_dict(rec)
            if rec.get("direction") is not None:
                flex = np.asarray(rec["direction"], dtype=float)
        else:
            packing = packing_from_dict(json.loads(text))
        graph = contact_graph(packing, tol)
    except (OSError, ValueError, IndexError, StickyDiskError) as exc:
        print(f"cannot read {args.input}: {exc}", file=sys.stderr)
        return EXIT_USAGE, []
    edge_values = None
    if args.stress:
        omega = bar_stresses(packing, graph, tol)
        if omega.shape[0]:
            edge_values = omega[0]
    if args.flex and flex is None:
        fs = flex_space(packing, graph, tol)
        if fs.nontrivial_dim:
            flex = fs.nontrivial[0]
    return EXIT_OK, [render_packing(args.out, packing, graph, edge_values=edge_values, flex=flex)]


HANDLERS = {
    "generate": cmd_generate,
    "analyze": cmd_analyze,
    "flex": cmd_flex,
    "jam": cmd_jam,
    "render": cmd_render,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    t0 = time.perf_counter()
    if args.out is None:
        args.out = Path(DEFAULT_OUT[args.command])
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    outputs = []
    try:
        tol = _tol(args)
        code, outputs = HANDLERS[args.command](args, tol)
    except UsageError as exc:
        parser.error(str(exc))
    except PlacementFailure as exc:
        print(f"placement failed: {exc}", file=sys.stderr)
        code = EXIT_PLACEMENT
    except (StickyDiskError, OSError) as exc:
        code = EXIT_INVALID if _is_input_error(exc) and args.command != "generate" else EXIT_FAILURE
        if isinstance(exc, OverlapError) and exc.report is not None:
            print(f"invalid packing: overlaps {[list(p) for p in exc.report.overlaps]}", file=sys.stderr)
        else:
            print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
    inputs = getattr(args, "inputs", None) or ([args.input] if hasattr(args, "input") else [])
    _write_manifest(args, argv, outputs, inputs, t0)
    return code


def _is_input_error(exc) -> bool:
    return isinstance(exc, (OSError, OverlapError, EmptyPacking, NonpositiveRadius, PackingFormatError,
                            NotInContact))


if __name__ == "__main__":
    sys.exit(main())
