"""Command-line front end wiring the library into reproducible runs.

Each subcommand is a thin wrapper over the library modules; the CLI adds
argument parsing, exit codes, and run manifests for written artifacts.

Exit codes: 0 when the requested check passed (or an informational
command succeeded), 2 when a certification, replay, or audit did not
pass, 1 on input, format, or validation errors.  Diagnostics go to
standard error, results to standard output.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from collections.abc import Sequence

from ..asymptotic import (
    family_coefficients,
    modified_family_performance,
    solve_family_weights,
)
from ..blueprint import (
    Blueprint,
    ThresholdFunction,
    balance_residual,
    blueprint_hash,
    builtin_dstar,
    completeness,
    format_blueprint,
    perturb_mu,
    perturb_pairwise,
    read_blueprint,
    soundness_at,
)
from ..certifier import (
    STATUS_VERIFIED,
    PointModel,
    argmax_refine,
    canonical_bytes,
    certificate_text,
    certify,
    grid_values,
    read_certificate,
    replay,
)
from ..errors import BisectGapError, FormatError
from ..mixture import (
    build_instance,
    edge_triangle_slacks,
    estimate_mixture_completeness,
    estimate_mixture_soundness,
    load_instance,
    save_instance,
    sdp_value,
    uncorrelatedness,
    weighted_balance,
)
from ..rigor import Interval, constants
from .manifest import RunManifest, sha256_file

AUDIT_BALANCE_TOL = 1e-9
MODIFIED_CHECK_B = 0.05


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse reserves exit code 2; here that code means non-verification,
    so usage problems are rerouted to the validation-error path instead."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        raise _UsageError(message)


def _default_threads() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def _stderr(line: str) -> None:
    print(line, file=sys.stderr)


def _write_text(path: str | os.PathLike, text: str) -> None:
    tmp = os.fspath(path) + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, os.fspath(path))


def _ival(iv: Interval) -> str:
    return f"[{iv.lo!r}, {iv.hi!r}]"


def _load_blueprint(spec: str) -> tuple[Blueprint, dict[str, str]]:
    """Resolve a --blueprint argument: the builtin name or a file path."""
    bp = builtin_dstar() if spec == "dstar" else read_blueprint(spec)
    return bp, {"blueprint": blueprint_hash(bp)}


def _load_thresholds(spec: str, bp: Blueprint) -> ThresholdFunction:
    """Resolve a --thresholds argument.

    "zero" means the all-zero threshold function; anything else is a path
    to a text file with one `symbol value` (or `symbol = value`) line per
    bias symbol, `#` comments allowed.
    """
    if spec == "zero":
        return ThresholdFunction.constant(bp.symbols())
    values: dict[str, float] = {}
    with open(spec) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.replace("=", " ").split()
            if len(parts) != 2:
                raise FormatError(f"{spec}:{lineno}: expected 'symbol value'")
            symbol, text = parts
            if symbol in values:
                raise FormatError(f"{spec}:{lineno}: duplicate threshold for {symbol}")
            try:
                values[symbol] = float(text)
            except ValueError:
                raise FormatError(f"{spec}:{lineno}: bad value {text!r}") from None
    missing = sorted(set(bp.symbols()) - set(values))
    extra = sorted(set(values) - set(bp.symbols()))
    if missing:
        raise FormatError(f"{spec}: no threshold for {', '.join(missing)}")
    if extra:
        raise FormatError(f"{spec}: unknown symbol {', '.join(extra)}")
    return ThresholdFunction(values)


# ---------------------------------------------------------------- certify


def _cmd_certify(args: argparse.Namespace, argv: Sequence[str]) -> int:
    bp, inputs = _load_blueprint(args.blueprint)
    extra: dict[str, object] = {}
    if args.cells is not None:
        extra["cells"] = args.cells
    if args.eps_floor is not None:
        extra["eps_floor"] = args.eps_floor
    start = time.monotonic()
    cert = certify(
        bp,
        args.bound,
        max_depth=args.max_depth,
        workers=args.threads,
        checkpoint=args.checkpoint,
        wave_budget=args.wave_budget,
        time_budget_s=args.time_budget,
        log=None if args.quiet else _stderr,
        **extra,
    )
    elapsed = time.monotonic() - start
    if cert is None:
        where = args.checkpoint or "no checkpoint was given"
        _stderr(f"budget exhausted before a verdict; resume from {where}")
        return 2
    depth = max((region.depth for region, _ in cert.regions), default=0)
    print(
        f"{cert.status}: bound {args.bound!r}, {len(cert.regions)} regions, "
        f"max depth {depth}, {elapsed:.1f}s"
    )
    if args.out:
        config = dict(cert.settings)
        config["bound"] = args.bound
        manifest = RunManifest("certify", tuple(argv), config, inputs)
        body = canonical_bytes(certificate_text(cert)).decode()
        _write_text(args.out, body + f"# manifest {manifest.fingerprint()}\n")
        manifest.wall_time_s = elapsed
        manifest.output_hashes = {str(args.out): sha256_file(args.out)}
        manifest.write_sidecar(args.out)
        print(f"wrote {args.out}")
    return 0 if cert.status == STATUS_VERIFIED else 2


def _cmd_replay(args: argparse.Namespace, argv: Sequence[str]) -> int:
    cert = read_certificate(args.certificate)
    bp = None
    if args.blueprint is not None:
        bp, _ = _load_blueprint(args.blueprint)
    result = replay(
        cert, bp, workers=args.threads, log=None if args.quiet else _stderr
    )
    if result.status != "verified":
        where = "" if result.region_index is None else f" at region {result.region_index}"
        _stderr(f"replay mismatch{where}: {result.detail}")
        return 2
    print(
        f"replay ok: certificate status {cert.status}, "
        f"{len(cert.regions)} regions, bound {cert.bound!r}"
    )
    return 0 if cert.status == STATUS_VERIFIED else 2


# ------------------------------------------------------------------- eval


def _cmd_eval(args: argparse.Namespace, argv: Sequence[str]) -> int:
    bp, _ = _load_blueprint(args.blueprint)
    t = _load_thresholds(args.thresholds, bp)
    comp = completeness(bp)
    sound = soundness_at(bp, t, cells=args.cells)
    resid = balance_residual(bp, t)
    ratio = sound / constants().c_gw
    print(f"blueprint {bp.name} ({blueprint_hash(bp)[:16]})")
    print(f"thresholds {args.thresholds}")
    print(f"completeness     in {_ival(comp)}")
    print(f"soundness        in {_ival(sound)}")
    print(f"soundness / c_GW in {_ival(ratio)}")
    print(f"balance residual in {_ival(resid)}")
    return 0


# ---------------------------------------------------------------- contour


def _cmd_contour(args: argparse.Namespace, argv: Sequence[str]) -> int:
    bp, inputs = _load_blueprint(args.blueprint)
    model = PointModel.from_blueprint(bp)
    start = time.monotonic()
    centers, values = grid_values(model, args.grid)
    ratios = values / constants().c_gw.mid
    t1, t2, peak = argmax_refine(model, args.grid)
    manifest = RunManifest(
        "contour",
        tuple(argv),
        {"blueprint": args.blueprint, "grid": args.grid},
        inputs,
    )
    lines = [
        "# midpoint grid of the reduced soundness surface;"
        " non-rigorous point values, not certified bounds",
        f"# manifest {manifest.fingerprint()}",
        "t1,t2,s_over_cgw",
    ]
    for i in range(args.grid):
        row = float(centers[i])
        for j in range(args.grid):
            lines.append(f"{row!r},{float(centers[j])!r},{float(ratios[i, j])!r}")
    text = "\n".join(lines) + "\n"
    summary = (
        f"grid {args.grid}x{args.grid}: max s/c_GW = {float(ratios.max()):.7f}, "
        f"refined peak {peak / constants().c_gw.mid:.7f} at "
        f"t1={t1:.6f}, t2={t2:.6f}"
    )
    if args.out:
        _write_text(args.out, text)
        manifest.wall_time_s = time.monotonic() - start
        manifest.output_hashes = {str(args.out): sha256_file(args.out)}
        manifest.write_sidecar(args.out)
        print(f"{summary}; wrote {args.out}")
    else:
        sys.stdout.write(text)
        _stderr(summary)
    return 0


# --------------------------------------------------------------- simulate


def _cmd_simulate(args: argparse.Namespace, argv: Sequence[str]) -> int:
    bp, _ = _load_blueprint(args.blueprint)
    comp = estimate_mixture_completeness(bp, args.dim, args.samples, args.seed)
    print(
        f"completeness ~ {comp.value:.6f} +/- {comp.stderr:.6f}  "
        f"(dim {args.dim}, {comp.n_samples} samples, seed {args.seed})"
    )
    if args.thresholds is not None:
        t = _load_thresholds(args.thresholds, bp)
        sound = estimate_mixture_soundness(bp, t, args.dim, args.samples, args.seed)
        print(
            f"soundness(t) ~ {sound.value:.6f} +/- {sound.stderr:.6f}  "
            f"(dim {args.dim}, {sound.n_samples} samples, seed {args.seed})"
        )
    return 0


# -------------------------------------------------------------- discretize


def _cmd_discretize(args: argparse.Namespace, argv: Sequence[str]) -> int:
    bp, inputs = _load_blueprint(args.blueprint)
    if args.mu_floor is not None:
        bp = perturb_mu(bp, args.mu_floor)
    if args.pairwise_shift is not None:
        bp = perturb_pairwise(bp, args.pairwise_shift)
    start = time.monotonic()
    inst = build_instance(bp, args.dim, args.eps, args.samples, args.seed)
    save_instance(inst, args.out)
    manifest = RunManifest(
        "discretize",
        tuple(argv),
        {
            "blueprint": args.blueprint,
            "dim": args.dim,
            "eps": args.eps,
            "samples": args.samples,
            "seed": args.seed,
            "mu_floor": args.mu_floor,
            "pairwise_shift": args.pairwise_shift,
        },
        inputs,
    )
    manifest.wall_time_s = time.monotonic() - start
    manifest.output_hashes = {str(args.out): sha256_file(args.out)}
    manifest.write_sidecar(args.out)
    print(
        f"wrote {args.out}: {len(inst.vertices)} vertices, {len(inst.edges)} edges, "
        f"good fraction {inst.good_fraction:.5f}"
    )
    return 0


def _cmd_audit(args: argparse.Namespace, argv: Sequence[str]) -> int:
    failures: list[str] = []
    trends: dict[tuple[str, int], list[tuple[float, float, str]]] = {}
    for path in args.instances:
        inst = load_instance(path)
        slacks = edge_triangle_slacks(inst)
        balance = weighted_balance(inst)
        sdp = sdp_value(inst)
        unc = uncorrelatedness(inst)
        print(f"{path}: {inst.name} dim={inst.dim} eps={inst.eps!r} "
              f"samples={inst.n_samples} seed={inst.seed}")
        print(f"  vertices {len(inst.vertices)}  edges {len(inst.edges)}  "
              f"good fraction {inst.good_fraction:.5f}")
        print(f"  weighted balance  {balance:+.3e}")
        if slacks.size:
            print(f"  min triangle slack {slacks.min():.6f} "
                  f"({slacks.shape[0]} non-auxiliary edges)")
            if slacks.min() <= 0.0:
                failures.append(f"{path}: non-strict triangle slack {slacks.min():.6f}")
        else:
            failures.append(f"{path}: no non-auxiliary edges")
        print(f"  sdp value         {sdp:.6f}")
        print(f"  uncorrelatedness  {unc:.8f}")
        if abs(balance) > AUDIT_BALANCE_TOL:
            failures.append(f"{path}: weighted balance {balance:+.3e} off zero")
        trends.setdefault((inst.name, inst.dim), []).append((inst.eps, unc, path))
    rising = len(failures)
    for trend in trends.values():
        if len(trend) < 2:
            continue
        by_eps = sorted(trend, key=lambda row: -row[0])
        for (e_hi, u_hi, p_hi), (e_lo, u_lo, p_lo) in zip(by_eps, by_eps[1:]):
            if e_lo < e_hi and u_lo > u_hi + 1e-12:
                failures.append(
                    f"uncorrelatedness rises from {u_hi:.8f} ({p_hi}, eps {e_hi!r}) "
                    f"to {u_lo:.8f} ({p_lo}, eps {e_lo!r}) as eps shrinks"
                )
    if any(len(t) > 1 for t in trends.values()) and len(failures) == rising:
        print("uncorrelatedness is nonincreasing as eps shrinks")
    if failures:
        for failure in failures:
            _stderr(f"audit failure: {failure}")
        return 2
    print("audit passed")
    return 0


# ----------------------------------------------------------------- taylor


def _blabel(multiple: int) -> str:
    if multiple == 0:
        return "0"
    if multiple == 1:
        return "b"
    if multiple == -1:
        return "-b"
    return f"{multiple}b"


def _cmd_taylor(args: argparse.Namespace, argv: Sequence[str]) -> int:
    table = family_coefficients()
    weights = solve_family_weights()
    check = modified_family_performance(MODIFIED_CHECK_B)
    w = (weights.w1, weights.w2, weights.w3)

    print(f"hyperplane constant acos(b_GW)/pi = {table.constant:.12f}")
    print()
    header = f"{'pair':>10}  {'alpha/b^2':>12}  {'quartic/b^4':>12}  {'mixed/b^4':>12}  {'weight':>10}"
    print(header)
    for row, weight in zip(table.rows, w):
        pair = f"({_blabel(row.pattern[0])}, {_blabel(row.pattern[1])})"
        alpha, quartic, mixed = row.report
        print(f"{pair:>10}  {alpha:+12.6f}  {quartic:+12.6f}  {mixed:+12.6f}  {weight:10.6f}")
    print()
    print(f"weighted quartic residual {weights.residual:+.6f} (per b^4)")
    print(f"modified weights at b = {MODIFIED_CHECK_B!r}: performance {check.performance:.12f}, "
          f"predicted bound {check.predicted:.12f}, deviation {check.deviation:+.3e}")
    for note in table.notes:
        print(f"note: {note}")

    if args.out:
        manifest = RunManifest(
            "taylor", tuple(argv), {"modified_b": MODIFIED_CHECK_B}, {}
        )
        lines = [
            "# quartic coefficient table, report normalization"
            " (alpha per b^2; quartic columns per b^4)",
            f"# manifest {manifest.fingerprint()}",
            "pattern_b1,pattern_b2,alpha,quartic,mixed,weight",
        ]
        for row, weight in zip(table.rows, w):
            alpha, quartic, mixed = row.report
            lines.append(
                f"{row.pattern[0]},{row.pattern[1]},{alpha!r},{quartic!r},{mixed!r},{weight!r}"
            )
        lines.append(f"# weighted quartic residual {weights.residual!r}")
        _write_text(args.out, "\n".join(lines) + "\n")
        manifest.output_hashes = {str(args.out): sha256_file(args.out)}
        manifest.write_sidecar(args.out)
        print(f"wrote {args.out}")
    return 0


# ---------------------------------------------------------------- builtin


def _cmd_builtin(args: argparse.Namespace, argv: Sequence[str]) -> int:
    bp = builtin_dstar()
    manifest = RunManifest(
        "builtin", tuple(argv), {"name": args.name},
        {"blueprint": blueprint_hash(bp)},
    )
    text = format_blueprint(bp)
    if not text.endswith("\n"):
        text += "\n"
    _write_text(args.out, text + f"\n# manifest {manifest.fingerprint()}\n")
    manifest.output_hashes = {str(args.out): sha256_file(args.out)}
    manifest.write_sidecar(args.out)
    print(f"wrote {args.out} (blueprint {blueprint_hash(bp)[:16]})")
    return 0


# ----------------------------------------------------------------- parser


def _build_parser() -> _Parser:
    parser = _Parser(prog="bisectgap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("certify", help="branch-and-bound soundness certification")
    p.add_argument("--blueprint", default="dstar", help="blueprint file, or 'dstar'")
    p.add_argument("--bound", type=float, required=True,
                   help="certify soundness < bound * c_GW for balanced thresholds")
    p.add_argument("--max-depth", type=int, default=40)
    p.add_argument("--cells", type=int, default=None, help="quadrature cells per evaluation")
    p.add_argument("--eps-floor", type=float, default=None, help="smallest region width split")
    p.add_argument("--out", default=None, help="write the certificate here")
    p.add_argument("--checkpoint", default=None, help="resume file, kept fresh during the run")
    p.add_argument("--wave-budget", type=int, default=None, help="stop after this many waves")
    p.add_argument("--time-budget", type=float, default=None, help="stop after this many seconds")
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--quiet", action="store_true", help="suppress progress lines")
    p.set_defaults(func=_cmd_certify)

    p = sub.add_parser("replay", help="independently re-check a certificate")
    p.add_argument("certificate", help="certificate file to re-check")
    p.add_argument("--blueprint", default=None, help="blueprint file, or 'dstar' (default)")
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=_cmd_replay)

    p = sub.add_parser("eval", help="interval completeness/soundness of a blueprint")
    p.add_argument("--blueprint", default="dstar")
    p.add_argument("--thresholds", default="zero", help="'zero' or a symbol-value file")
    p.add_argument("--cells", type=int, default=None)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("contour", help="midpoint grid of the reduced soundness surface")
    p.add_argument("--blueprint", default="dstar")
    p.add_argument("--grid", type=int, default=200)
    p.add_argument("--out", default=None, help="CSV path (stdout when omitted)")
    p.set_defaults(func=_cmd_contour)

    p = sub.add_parser("simulate", help="finite-dimensional Monte Carlo estimates")
    p.add_argument("--blueprint", default="dstar")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--thresholds", default=None,
                   help="also estimate soundness: 'zero' or a symbol-value file")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("discretize", help="build an eps-net instance file")
    p.add_argument("--blueprint", default="dstar")
    p.add_argument("--dim", type=int, choices=(2, 3), required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="instance file to write")
    p.add_argument("--mu-floor", type=float, default=None,
                   help="push marginals this far from 0 before discretizing")
    p.add_argument("--pairwise-shift", type=float, default=None,
                   help="shift pairwise biases toward uncorrelated first")
    p.set_defaults(func=_cmd_discretize)

    p = sub.add_parser("audit", help="re-check instance invariants")
    p.add_argument("instances", nargs="+", help="instance files (several: trend check too)")
    p.set_defaults(func=_cmd_audit)

    p = sub.add_parser("taylor", help="quartic coefficient table and weight solution")
    p.add_argument("--out", default=None, help="also write the table as CSV")
    p.set_defaults(func=_cmd_taylor)

    p = sub.add_parser("builtin", help="write a builtin blueprint file")
    p.add_argument("name", choices=("dstar",))
    p.add_argument("--out", default="dstar.bp")
    p.set_defaults(func=_cmd_builtin)

    return parser


def run(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args, argv)
    except _UsageError as exc:
        _stderr(f"error: {exc}")
        return 1
    except (BisectGapError, OSError) as exc:
        _stderr(f"error: {exc}")
        return 1


def main() -> None:
    sys.exit(run())
