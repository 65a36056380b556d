"""Command line: ``rpm-lab {gen,flatten,render,embed,supported,resist,verify}``.

Exit status is 0 on success, 1 when a verification fails, 2 on usage or
input errors and 3 on internal errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import traceback

import numpy as np

from . import diagnostics, experiments, formats
from .maps import TriangulationError
from .necklace import build_rooted, check_word, glued_map
from .render import render_svg
from .uniformize import FlatteningError, layout

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load_layout(text: str):
    """A layout file, or a bare triangulation that is flattened on the spot."""
    if any(line.split()[:1] == ["layout"] for line in text.splitlines()):
        return formats.parse_layout(text)
    return layout(formats.parse(text))


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from exc


# -- subcommands ---------------------------------------------------------------------

def cmd_gen(args) -> int:
    if (args.word is None) == (args.random_word is None):
        raise UsageError("give exactly one of --word and --random-word")
    if args.word is not None:
        try:
            word = check_word(args.word)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        if not word:
            raise UsageError("the word must be nonempty")
        k = args.root if args.root is not None else 1
    else:
        if args.random_word < 1:
            raise UsageError("--random-word needs a positive length")
        word, k = experiments.sample_unbiased(args.random_word, args.seed)
        if args.root is not None:
            k = args.root
    if not 1 <= k <= len(word):
        raise UsageError(f"--root must lie in 1..{len(word)}")
    if args.lower is not None:
        t = glued_map(word, check_word(args.lower))
    else:
        t = build_rooted(word, k)
    _write(formats.emit(t), args.out)
    return EXIT_OK


def cmd_flatten(args) -> int:
    t = formats.parse(_read(args.input))
    _write(formats.emit_layout(layout(t)), args.out)
    return EXIT_OK


def cmd_render(args) -> int:
    lay = _load_layout(_read(args.input))
    flowers = [int(v) for v in args.half_flowers.split(",") if v.strip()] if args.half_flowers else []
    bad = [v for v in flowers if not 0 <= v < lay.triangulation.n_vertices]
    if bad:
        raise UsageError(f"no such vertex: {bad}")
    _write(render_svg(lay, flowers, size=args.size, max_radius=args.radius), args.out)
    return EXIT_OK


def cmd_embed(args) -> int:
    lay = _load_layout(_read(args.input))
    emb = diagnostics.center_embedding(lay.triangulation, lay)
    _write(formats.emit_points(emb.g), args.out)
    return EXIT_OK


def cmd_supported(args) -> int:
    pts = formats.parse_points(_read(args.input))
    try:
        fractions = diagnostics.supported_curve(pts, args.delta, args.s_grid)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    rows = [{"delta": args.delta, "s": int(s) if float(s).is_integer() else s, "fraction": float(f),
             "n": len(pts), "seed": args.seed} for s, f in zip(args.s_grid, fractions)]
    if args.format == "json":
        _write(json.dumps(rows, indent=1) + "\n", args.out)
    else:
        _write(formats.write_curve(rows), args.out)
    return EXIT_OK


def cmd_resist(args) -> int:
    t = formats.parse(_read(args.input))
    if args.rmax < 1:
        raise UsageError("--rmax must be at least 1")
    curve = diagnostics.resistance_curve(t, args.rmax)
    if args.format == "json":
        _write(json.dumps([{"r": r, "resistance": x} for r, x in curve], indent=1) + "\n", args.out)
    else:
        _write("r,resistance\n" + "".join(f"{r},{x!r}\n" for r, x in curve), args.out)
    return EXIT_OK


def _table_text(table: experiments.Table, fmt: str) -> str:
    if fmt == "json":
        return json.dumps({"name": table.name, "passed": table.passed, "rows": table.rows,
                           "notes": table.notes}, indent=1, default=str) + "\n"
    return table.to_csv()


def cmd_verify(args) -> int:
    base = experiments.TrialConfig()
    n = args.n if args.n is not None else base.n
    trials = args.trials if args.trials is not None else base.trials
    config = experiments.TrialConfig(n=n, trials=trials, seed=args.seed, workers=args.workers)
    lemma = args.lemma
    if lemma == "eq12":
        tables = [experiments.verify_eq12(max_len=args.max_len, seed=args.seed)]
    elif lemma == "3.4":
        tables = [experiments.verify_degree_tail(config)]
    elif lemma == "3.5":
        tables = [experiments.verify_boundary_tail(config)]
    elif lemma == "3.6":
        t = args.trials if args.trials is not None else 2000
        tables = [experiments.verify_root_distance(
            experiments.TrialConfig(trials=t, seed=args.seed, workers=args.workers))]
    else:
        t = args.trials if args.trials is not None else 1000
        tables = [experiments.verify_local_convergence(
            args.radius, base.n_list, base.m, t, seed=args.seed, workers=args.workers)]
    for table in tables:
        text = _table_text(table, args.format)
        if args.out and args.out != "-":
            os.makedirs(args.out, exist_ok=True)
            ext = "json" if args.format == "json" else "csv"
            with open(os.path.join(args.out, f"{table.name}.{ext}"), "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        status = "pass" if table.passed else "FAIL"
        print(f"{table.name}: {status}", file=sys.stderr)
    return EXIT_OK if all(t.passed for t in tables) else EXIT_FAIL


# -- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--seed", type=int, default=0)
    shared.add_argument("--out", default=None, help="output file (a directory for verify)")
    shared.add_argument("--format", choices=("text", "csv", "json"), default="text")

    p = argparse.ArgumentParser(prog="rpm-lab", description="Necklace triangulations and their flattenings.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[shared], help="build a necklace triangulation")
    g.add_argument("--word")
    g.add_argument("--random-word", type=int, metavar="N")
    g.add_argument("--root", type=int, help="1-based letter whose face is the root")
    g.add_argument("--lower", help="second word glued below the real line")
    g.set_defaults(func=cmd_gen)

    f = sub.add_parser("flatten", parents=[shared], help="flatten a triangulation file")
    f.add_argument("input", nargs="?", default="-")
    f.set_defaults(func=cmd_flatten)

    r = sub.add_parser("render", parents=[shared], help="SVG of a layout or triangulation")
    r.add_argument("input", nargs="?", default="-")
    r.add_argument("--half-flowers", default="", help="comma-separated vertex ids")
    r.add_argument("--size", type=float, default=800.0)
    r.add_argument("--radius", type=float, default=None, help="only faces with |center| <= radius")
    r.set_defaults(func=cmd_render)

    e = sub.add_parser("embed", parents=[shared], help="normalized face-center point set")
    e.add_argument("input", nargs="?", default="-")
    e.set_defaults(func=cmd_embed)

    s = sub.add_parser("supported", parents=[shared], help="supported-point fraction curve")
    s.add_argument("input", nargs="?", default="-")
    s.add_argument("--delta", type=float, default=0.25)
    s.add_argument("--s-grid", type=_float_list, default=[float(x) for x in range(2, 65, 2)])
    s.set_defaults(func=cmd_supported)

    x = sub.add_parser("resist", parents=[shared], help="dual-graph effective resistance curve")
    x.add_argument("input", nargs="?", default="-")
    x.add_argument("--rmax", type=int, default=20)
    x.set_defaults(func=cmd_resist)

    v = sub.add_parser("verify", parents=[shared], help="run one of the Monte-Carlo checks")
    v.add_argument("--lemma", required=True, choices=("3.4", "3.5", "3.6", "3.2", "eq12"))
    v.add_argument("--max-len", type=int, default=4)
    v.add_argument("--n", type=int, default=None)
    v.add_argument("--trials", type=int, default=None)
    v.add_argument("--radius", type=int, default=1, help="ball radius for 3.2")
    v.add_argument("--workers", type=int, default=None)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, TriangulationError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"rpm-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (diagnostics.EmbeddingError, FlatteningError, ValueError) as exc:
        print(f"rpm-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
