"""
Command-line interface.

Exit codes: 0 success, 1 validation failure, 2 parse error, 3 numerical
domain error.

Points are written ``x,y,z``. If any component carries an ``a`` suffix
(``0,0,2a``) the point is read in units of the first object's bounding radius
relative to its center; otherwise components are absolute coordinates in cm.
"""

import argparse
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from .analysis import reference_frame, run_compare, run_report
from .config import load_config
from .errors import ConfigError, DomainError
from .maps import GridSpec, MapJob, run_map
from .scene import validate_regime

EXIT_OK, EXIT_VALIDATION, EXIT_PARSE, EXIT_DOMAIN = 0, 1, 2, 3

#: (name, quantity, mode, source distance in units of a)
FIGURE_FAMILIES = [
    ("local_Fzz_r6", "F_zz_r6", "local", None),
    ("local_Fxx_r6", "F_xx_r6", "local", None),
    ("nonlocal_Fzz_d2", "F_zz", "nonlocal", 2.0),
    ("nonlocal_Fxx_d2", "F_xx", "nonlocal", 2.0),
    ("nonlocal_Fxz_d2", "F_xz", "nonlocal", 2.0),
    ("nonlocal_Fzz_d5", "F_zz", "nonlocal", 5.0),
    ("nonlocal_Fxx_d5", "F_xx", "nonlocal", 5.0),
    ("nonlocal_Fxz_d5", "F_xz", "nonlocal", 5.0),
]


def parse_point(text, scene):
    """Parse ``x,y,z`` with the optional ``a`` suffix convention."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise ConfigError(text, "a point needs three comma-separated components")
    relative = any(p.endswith("a") for p in parts)
    try:
        vals = np.array([float(p[:-1] if p.endswith("a") else p) for p in parts])
    except ValueError:
        raise ConfigError(text, "malformed point component") from None
    if relative:
        center, a = reference_frame(scene)
        return center + vals * a
    return vals


def read_points(path, scene, per_line):
    """Read a points file: ``per_line`` points per line, blank and '#' lines skipped."""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read points file: {exc.strerror}") from None
    out = []
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != 3 * per_line:
            raise ConfigError(f"{path}:{n}", f"expected {3 * per_line} values, got {len(fields)}")
        pts = [parse_point(",".join(fields[3 * k : 3 * k + 3]), scene) for k in range(per_line)]
        out.append(pts if per_line > 1 else pts[0])
    if not out:
        raise ConfigError(str(path), "no points found")
    return out


def _emit(text, out):
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_validate(args):
    scene, _ = load_config(args.config)
    points = [parse_point(p, scene) for p in args.point or []]
    report = validate_regime(scene, points)
    print("\n".join(report.lines()))
    return EXIT_VALIDATION if report.status == "fail" else EXIT_OK


def cmd_map(args):
    scene, defaults = load_config(args.config)
    src = parse_point(args.src, scene) if args.src else None
    job = MapJob(
        quantity=args.quantity,
        mode=args.mode,
        src=None if src is None else tuple(src),
        engine=args.engine,
        L=args.L or defaults.L,
        resolution=args.resolution or defaults.resolution,
    )
    grid = GridSpec(normal=args.plane, offset=args.offset, extent=args.extent, samples=args.samples, mask=args.mask)
    if job.physical and validate_regime(scene).status == "fail" and not args.force:
        print("regime validation failed; rerun with --force to map anyway", file=sys.stderr)
        return EXIT_VALIDATION
    result = run_map(scene, job, grid, args.out)
    if args.png:
        from .plotting import plot_map

        plot_map(result, f"{args.out}.png", args.quantity)
    print(f"wrote {args.out}.csv and {args.out}.pgm")
    return EXIT_OK


def cmd_compare(args):
    scene, defaults = load_config(args.config)
    pairs = read_points(args.points, scene, per_line=2)
    table = run_compare(scene, pairs, L=args.L or 10, resolution=args.resolution or defaults.resolution)
    _emit(table.to_csv(), args.out)
    return EXIT_OK


def _policy(text):
    if text in ("optimal", "x", "y", "z"):
        return text
    try:
        v = [float(c) for c in text.split(",")]
    except ValueError:
        raise ConfigError("--field", f"expected optimal, x, y, z or nx,ny,nz, got {text!r}") from None
    return v


def cmd_report(args):
    scene, defaults = load_config(args.config)
    qubits = read_points(args.qubits, scene, per_line=1)
    report = run_report(scene, qubits, _policy(args.field), L=args.L or defaults.L, resolution=defaults.resolution)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(f"{args.out}_qubits.csv").write_text(report.qubits_csv())
        Path(f"{args.out}_pairs.csv").write_text(report.pairs_csv())
        from .plotting import plot_report

        plot_report(report, f"{args.out}_rates.png")
    sys.stdout.write(report.to_text())
    return EXIT_VALIDATION if report.regime.status == "fail" else EXIT_OK


def cmd_figures(args):
    scene, _ = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    grid = GridSpec(samples=args.samples)
    center, a = reference_frame(scene)
    orders = list(range(1, args.L_max + 1))
    start = time.perf_counter()
    for name, quantity, mode, d in FIGURE_FAMILIES:
        src = None if d is None else tuple(center + np.array([0.0, 0.0, d * a]))
        results = []
        for L in orders:
            job = MapJob(quantity=quantity, mode=mode, src=src, L=L)
            results.append(run_map(scene, job, grid, out / f"{name}_L{L}"))
        if args.png:
            from .plotting import plot_family

            plot_family(results, [f"L = {L}" for L in orders], out / f"{name}.png", f"{quantity} ({mode})")
    print(f"wrote {2 * len(FIGURE_FAMILIES) * len(orders)} map files to {out} in {time.perf_counter() - start:.1f} s")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="ewjn", description="Magnetic Johnson-noise correlation tensors near small metal objects.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check the quasistatic regime conditions")
    v.add_argument("config")
    v.add_argument("--point", action="append", help="query point (repeatable)")
    v.set_defaults(func=cmd_validate)

    m = sub.add_parser("map", help="write a CSV and PGM map of one tensor entry")
    m.add_argument("config")
    m.add_argument("--quantity", default="F_zz", help="F_ij, F_ij_r6 or NCF_ij")
    m.add_argument("--mode", choices=["local", "nonlocal"], default="local")
    m.add_argument("--src", help="source point for nonlocal maps, e.g. 0,0,2a")
    m.add_argument("--engine", choices=["multipole", "integral"], default="multipole")
    m.add_argument("--L", type=int)
    m.add_argument("--resolution", type=int)
    m.add_argument("--plane", choices=list("xyz"), default="y", help="normal axis of the map plane")
    m.add_argument("--offset", type=float, default=0.0, help="plane offset in units of a")
    m.add_argument("--extent", type=float, default=5.5, help="half-width in units of a")
    m.add_argument("--samples", type=int, default=220)
    m.add_argument("--mask", type=float, default=1.05, help="mask radius in units of a")
    m.add_argument("--png", action="store_true", help="also render a PNG")
    m.add_argument("--force", action="store_true", help="map physical units even if validation fails")
    m.add_argument("--out", required=True, help="output prefix")
    m.set_defaults(func=cmd_map)

    c = sub.add_parser("compare", help="compare the multipole and integral engines")
    c.add_argument("config")
    c.add_argument("--points", required=True, help="file of x,y,z,xs,ys,zs lines")
    c.add_argument("--L", type=int, default=10)
    c.add_argument("--resolution", type=int, default=40)
    c.add_argument("--out", help="CSV path (default stdout)")
    c.set_defaults(func=cmd_compare)

    r = sub.add_parser("report", help="qubit decoherence report")
    r.add_argument("config")
    r.add_argument("--qubits", required=True, help="file of x,y,z lines")
    r.add_argument("--field", default="optimal", help="optimal, x, y, z or nx,ny,nz")
    r.add_argument("--L", type=int)
    r.add_argument("--out", help="prefix for CSV and PNG outputs")
    r.set_defaults(func=cmd_report)

    f = sub.add_parser("figures", help="regenerate all map families for L = 1..L_max")
    f.add_argument("config")
    f.add_argument("--out", required=True, help="output directory")
    f.add_argument("--L-max", dest="L_max", type=int, default=5)
    f.add_argument("--samples", type=int, default=220)
    f.add_argument("--png", action="store_true", help="also render one PNG panel per family")
    f.set_defaults(func=cmd_figures)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except ConfigError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
