"""Command-line interface.

Subcommands:
    synth    synthesize one word into trajectory / SVG / PNG files
    sweep    run the maturity protocol and emit the metrics table
    analyze  count velocity peaks in a trajectory file
    compare  similarity score between two word images
    glyphs   list and validate a glyph library

A JSON config file (``--config``) mirrors the flag names and overrides
any flags given on the command line.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .errors import (
    GlyphFileError,
    InfeasibleMaturityError,
    LegibilityError,
    MissingGlyphError,
    ParameterDomainError,
    TrajectoryFileError,
)
from .evaluation import (
    SimilarityWeights,
    count_velocity_peaks,
    extract_features,
    maturity_curve,
    similarity,
    sweep_table,
)
from .evolution import EvolutionConfig, scale_noise
from .kinematics import WriterProfile, synthesize_word
from .plan import builtin_library, default_guides, glyph_width, load_glyph_library
from .render import InkModel, load_png, render_offline, save_png
from .trajio import export_svg, export_trajectory, import_trajectory

_ERRORS = (
    ParameterDomainError,
    MissingGlyphError,
    InfeasibleMaturityError,
    LegibilityError,
    GlyphFileError,
    TrajectoryFileError,
    ValueError,
    OSError,
)


def _add_profile_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k-sigma", type=float, default=0.04,
                   help="pulse width constant in [0, 0.04] (default 0.04)")
    p.add_argument("--k-t", type=float, default=0.04,
                   help="base inter-onset delay in seconds (default 0.04)")
    p.add_argument("--k-alpha", type=float, default=0.2,
                   help="maximum angle delay in seconds (default 0.2)")
    p.add_argument("--k-d", type=float, default=None,
                   help="amplitude scale (default: grid pitch)")
    p.add_argument("--eps-t", type=float, default=None,
                   help="onset noise std in seconds (default: from E)")
    p.add_argument("--eps-d", type=float, default=None,
                   help="amplitude noise fraction (default: from E)")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")


def _load_library(args: argparse.Namespace):
    if getattr(args, "glyph_file", None):
        return load_glyph_library(args.glyph_file)
    return builtin_library()


def _profile_for(args: argparse.Namespace, E: float) -> WriterProfile:
    eps_D_auto, eps_t_auto = scale_noise(E)
    return WriterProfile(
        K_sigma=args.k_sigma,
        K_t=args.k_t,
        K_alpha=args.k_alpha,
        K_D=args.k_d,
        eps_t=args.eps_t if args.eps_t is not None else eps_t_auto,
        eps_D=args.eps_d if args.eps_d is not None else eps_D_auto,
        rng_seed=args.seed,
    )


def _cmd_synth(args: argparse.Namespace) -> int:
    glyphs, grid = _load_library(args)
    profile = _profile_for(args, args.E)
    cfg = EvolutionConfig(E=args.E, rng_seed=args.seed)
    traj = synthesize_word(args.word, profile, cfg, grid, glyphs, dt=args.dt)
    formats = [f.strip() for f in args.formats.split(",") if f.strip()]
    unknown = set(formats) - {"traj", "svg", "png"}
    if unknown:
        raise ValueError(f"unknown format(s): {', '.join(sorted(unknown))}")
    prefix = Path(args.out or f"{args.word}_E{args.E:g}_s{args.seed}")
    ink = InkModel(nib_radius=args.nib_radius)
    written = []
    if "traj" in formats:
        out = prefix.with_suffix(".traj")
        export_trajectory(traj, out)
        written.append(out)
    if "svg" in formats:
        out = prefix.with_suffix(".svg")
        export_svg(traj, ink, out)
        written.append(out)
    if "png" in formats:
        out = prefix.with_suffix(".png")
        save_png(render_offline(traj, ink, args.resolution), out)
        written.append(out)
    for out in written:
        print(out)
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    glyphs, grid = _load_library(args)
    E_values = [float(v) for v in args.E.split(",") if v.strip()]
    if not E_values:
        raise ValueError("need at least one E value")
    profile = _profile_for(args, E_values[0])
    rows = maturity_curve(
        args.word, profile, E_values, args.seeds, grid, glyphs,
        resolution=args.resolution, dt=args.dt,
    )
    table = sweep_table(rows)
    if args.out:
        import os as _os
        tmp = Path(args.out).with_name(Path(args.out).name + ".tmp")
        try:
            tmp.write_text(table, encoding="utf-8")
            _os.replace(tmp, args.out)
        finally:
            tmp.unlink(missing_ok=True)
        print(args.out)
    else:
        sys.stdout.write(table)
    return 0


def _cmd_analyze(args: argparse.Namespace) -> int:
    traj = import_trajectory(args.trajectory)
    print(count_velocity_peaks(traj, prominence=args.prominence))
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    guides = default_guides(builtin_library()[1])
    w = SimilarityWeights(alpha=args.alpha, beta=args.beta)
    fa = extract_features(load_png(args.image_a), guides, args.resolution)
    fb = extract_features(load_png(args.image_b), guides, args.resolution)
    print(f"{similarity(fa, fb, w):.6f}")
    return 0


def _cmd_glyphs(args: argparse.Namespace) -> int:
    glyphs, grid = _load_library(args)
    for letter in sorted(glyphs):
        g = glyphs[letter]
        g.validate_on(grid)
        n_segments = 1 + sum(1 for d in g.pen_down if not d)
        print(
            f"{letter}  nodes={len(g.nodes)}  segments={n_segments}  "
            f"width={glyph_width(g, grid):.2f}mm"
        )
    print(f"# {len(glyphs)} glyph(s) on a {grid.n_cols}x{grid.n_rows} grid, "
          f"pitch {grid.pitch:g}mm")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scriptogen",
        description="Synthetic handwriting with controllable graphic maturity.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesize a word")
    p.add_argument("--word", required=True)
    p.add_argument("--E", type=float, default=100.0,
                   help="percentage of plan points kept (default 100)")
    _add_profile_flags(p)
    p.add_argument("--dt", type=float, default=0.005)
    p.add_argument("--resolution", type=float, default=10.0, help="px per mm")
    p.add_argument("--nib-radius", type=float, default=0.2)
    p.add_argument("--glyph-file", default=None)
    p.add_argument("--out", default=None, help="output path prefix")
    p.add_argument("--formats", default="traj,svg,png",
                   help="comma list of traj,svg,png (default all)")
    p.add_argument("--config", default=None, help="JSON config overriding flags")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("sweep", help="maturity metrics over E values")
    p.add_argument("--word", required=True)
    p.add_argument("--E", default="100,50,20",
                   help="comma list of E values (default 100,50,20)")
    p.add_argument("--seeds", type=int, default=10,
                   help="samples per E value (default 10)")
    _add_profile_flags(p)
    p.add_argument("--dt", type=float, default=0.005)
    p.add_argument("--resolution", type=float, default=10.0)
    p.add_argument("--glyph-file", default=None)
    p.add_argument("--out", default=None, help="write table here instead of stdout")
    p.add_argument("--config", default=None, help="JSON config overriding flags")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("analyze", help="count velocity peaks in a trajectory file")
    p.add_argument("trajectory")
    p.add_argument("--prominence", type=float, default=0.05)
    p.add_argument("--config", default=None, help="JSON config overriding flags")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("compare", help="similarity between two word images")
    p.add_argument("image_a")
    p.add_argument("image_b")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--resolution", type=float, default=10.0)
    p.add_argument("--config", default=None, help="JSON config overriding flags")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("glyphs", help="list and validate a glyph library")
    p.add_argument("--glyph-file", default=None)
    p.add_argument("--config", default=None, help="JSON config overriding flags")
    p.set_defaults(func=_cmd_glyphs)

    return parser


def _apply_config(args: argparse.Namespace) -> None:
    """Config file values take precedence over command-line flags."""
    if not getattr(args, "config", None):
        return
    with open(args.config, encoding="utf-8") as fh:
        values = json.load(fh)
    if not isinstance(values, dict):
        raise ValueError("config file must hold a JSON object")
    for key, value in values.items():
        dest = key.replace("-", "_")
        if not hasattr(args, dest):
            raise ValueError(f"config key {key!r} is not a known setting")
        setattr(args, dest, value)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args)
        return args.func(args)
    except _ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
