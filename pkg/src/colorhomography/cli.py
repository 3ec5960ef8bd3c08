"""Command line: ``colorhomography {calibrate,apply,evaluate,synth}``.

Exit codes: 0 success, 2 input error, 3 solver failure.
"""
import argparse
import sys
import warnings
from pathlib import Path

import numpy as np

from . import chart_io
from .colorimetry import WhitePoint
from .estimators import make_corrector
from .exceptions import ColorHomographyError, InvalidWhitePoint, MissingColumn, ParseError
from .solvers import apply_correction
from .synthdata import SynthConfig, generate

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SOLVER = 3

CONVENTION = "row-vector convention: xyz = rgb * H"


class InputError(Exception):
    pass


def _positive_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (np.isfinite(value) and value > 0):
        raise argparse.ArgumentTypeError(f"must be > 0: {text!r}")
    return value


def _nonneg_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (np.isfinite(value) and value >= 0):
        raise argparse.ArgumentTypeError(f"must be >= 0: {text!r}")
    return value


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return value


def _seed(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be in [0, 2**64): {text!r}")
    return value


def _white(text):
    try:
        return WhitePoint.from_value(text)
    except InvalidWhitePoint as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _range(text):
    try:
        lo, hi = (float(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo,hi: {text!r}") from None
    if not 0 < lo <= hi:
        raise argparse.ArgumentTypeError(f"need 0 < lo <= hi: {text!r}")
    return lo, hi


def _fraction(text):
    value = _nonneg_float(text)
    if value >= 1:
        raise argparse.ArgumentTypeError(f"must be in [0, 1): {text!r}")
    return value


def build_parser():
    parser = argparse.ArgumentParser(prog="colorhomography", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    cal = sub.add_parser("calibrate", help="fit an RGB->XYZ correction matrix")
    cal.add_argument("--method", choices=["ls", "als", "ransac"], required=True)
    cal.add_argument("--input", required=True)
    cal.add_argument("--output", required=True)
    cal.add_argument("--epsilon", type=_positive_float, default=1e-10)
    cal.add_argument("--max-iters", type=_positive_int, default=1000)
    cal.add_argument("--threshold", type=_positive_float, default=2.0, help="RANSAC inlier threshold in ΔE*uv")
    cal.add_argument("--max-trials", type=_positive_int, default=2000)
    cal.add_argument("--min-consensus", type=_positive_float, default=0.8)
    cal.add_argument("--seed", type=_seed, default=0)
    cal.add_argument("--white", type=_white, default=WhitePoint.from_value("d65"))

    app = sub.add_parser("apply", help="append corrected XYZ columns to a chart CSV")
    app.add_argument("--matrix", required=True)
    app.add_argument("--input", required=True)
    app.add_argument("--output", required=True)
    app.add_argument("--name", help="column suffix (defaults to the matrix file's method)")
    app.add_argument("--keep-shading", action="store_true", help="do not divide by the gray reference even if present")

    ev = sub.add_parser("evaluate", help="ΔE statistics of every corrected column group")
    ev.add_argument("--input", required=True)
    ev.add_argument("--space", choices=["lab", "luv"], required=True)
    ev.add_argument("--white", type=_white, default=WhitePoint.from_value("d65"))
    ev.add_argument("--reference", help="chart CSV whose X,Y,Z are the ground truth (matched by patch_id)")
    ev.add_argument("--output", required=True)

    syn = sub.add_parser("synth", help="write a synthetic shaded chart and its ground truth")
    syn.add_argument("--n", type=int, required=True)
    syn.add_argument("--seed", type=_seed, required=True)
    syn.add_argument("--shading", type=_range, default=(0.2, 1.0))
    syn.add_argument("--noise", type=_nonneg_float, default=0.0)
    syn.add_argument("--outliers", type=_fraction, default=0.0)
    syn.add_argument("--output", required=True)
    return parser


def _load(path):
    try:
        return chart_io.load_patches(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    except (ParseError, MissingColumn) as exc:
        raise InputError(f"{path}: {exc}") from None


def write_matrix(path, matrix_normalized, gain, metadata):
    lines = [f"# {CONVENTION}"]
    lines += [f"# {key}: {value}" for key, value in metadata.items()]
    lines.append(f"# gain: {gain!r}")
    lines += [" ".join(repr(float(v)) for v in row) for row in matrix_normalized]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_matrix(path):
    """Return ``(matrix, metadata)`` where ``matrix`` already includes the gain."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    meta = {}
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            key, sep, value = stripped[1:].partition(":")
            if sep:
                meta[key.strip()] = value.strip()
            continue
        try:
            row = [float(v) for v in stripped.split()]
        except ValueError:
            raise InputError(f"{path}: line {lineno}: non-numeric matrix entry") from None
        if len(row) != 3:
            raise InputError(f"{path}: line {lineno}: expected 3 numbers, got {len(row)}")
        rows.append(row)
    if len(rows) != 3:
        raise InputError(f"{path}: expected 3 matrix rows, got {len(rows)}")
    H = np.array(rows)
    try:
        gain = float(meta.get("gain", "1"))
    except ValueError:
        raise InputError(f"{path}: malformed gain") from None
    if not (np.all(np.isfinite(H)) and np.isfinite(gain)):
        raise InputError(f"{path}: non-finite matrix")
    return gain * H, meta


def cmd_calibrate(args, out):
    records = _load(args.input)
    if any(r.xyz is None for r in records):
        raise InputError(f"{args.input}: calibration needs X,Y,Z columns")
    A = chart_io.stack(records, "rgb")
    B = chart_io.stack(records, "xyz")
    if args.method == "ls":
        model = make_corrector("ls")
    elif args.method == "als":
        model = make_corrector("als", epsilon=args.epsilon, max_iters=args.max_iters)
    else:
        if args.min_consensus > 1:
            raise InputError("--min-consensus must be in (0, 1]")
        model = make_corrector(
            "ransac",
            inlier_threshold=args.threshold,
            max_trials=args.max_trials,
            min_consensus_fraction=args.min_consensus,
            random_state=args.seed,
            white_point=args.white,
        )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        model.fit(A, B)
    result = model.fit_result_
    meta = {"method": args.method, "patches": len(records)}
    if args.method == "als":
        meta.update(epsilon=args.epsilon, max_iters=args.max_iters, iterations=result.n_iter, converged=result.converged)
        meta["residual"] = repr(result.residual_history[-1])
        print(f"als: {result.n_iter} iterations, converged={result.converged}, residual={result.residual_history[-1]:.6g}", file=out)
    elif args.method == "ransac":
        white = ",".join(repr(v) for v in args.white)
        meta.update(seed=args.seed, threshold=args.threshold, max_trials=args.max_trials, min_consensus=args.min_consensus, white=white)
        meta.update(trials=result.n_trials, consensus=len(result.inliers))
        meta["inliers"] = " ".join(str(i) for i in result.inliers)
        print(f"ransac: {result.n_trials} trials, consensus {len(result.inliers)}/{len(records)}, seed={args.seed}", file=out)
    else:
        print(f"ls: residual={result.residual_history[-1]:.6g}", file=out)
    write_matrix(args.output, result.H_rgb, result.gain, meta)


def cmd_apply(args, out):
    matrix, meta = read_matrix(args.matrix)
    records = _load(args.input)
    name = args.name or meta.get("method", "corrected")
    if not name or any(c in name for c in ", \t"):
        raise InputError(f"invalid column suffix {name!r}")
    shading_removed = not args.keep_shading and all(r.gray_rgb is not None for r in records)
    rgb = chart_io.remove_shading(records) if shading_removed else chart_io.stack(records, "rgb")
    corrected = apply_correction(matrix, rgb)
    for rec, xyz in zip(records, corrected):
        rec.corrected[name] = xyz
    chart_io.write_patches(records, args.output)
    print(f"apply: {len(records)} patches -> X_{name},Y_{name},Z_{name} (shading removed: {shading_removed})", file=out)


def cmd_evaluate(args, out):
    records = _load(args.input)
    if args.reference:
        ref_records = {r.patch_id: r for r in _load(args.reference)}
        try:
            reference = np.array([ref_records[r.patch_id].xyz for r in records], dtype=float)
        except KeyError as exc:
            raise InputError(f"{args.reference}: no patch {exc.args[0]!r}") from None
        if reference.ndim != 2:
            raise InputError(f"{args.reference}: reference needs X,Y,Z columns")
    else:
        if any(r.xyz is None for r in records):
            raise InputError(f"{args.input}: evaluation needs reference X,Y,Z columns")
        reference = chart_io.stack(records, "xyz")
    methods = list(records[0].corrected) if records else []
    if not methods:
        raise InputError(f"{args.input}: no corrected X_<method>,Y_<method>,Z_<method> columns")
    rows = []
    for method in methods:
        corrected = np.array([r.corrected[method] for r in records])
        rows.append((method, chart_io.evaluate(corrected, reference, args.white, args.space)))
    text = chart_io.format_stats(rows)
    Path(args.output).write_text(text, encoding="utf-8")
    out.write(text)


def cmd_synth(args, out):
    try:
        cfg = SynthConfig(
            n_patches=args.n,
            seed=args.seed,
            shading_range=args.shading,
            noise_sigma=args.noise,
            outlier_fraction=args.outliers,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from None
    inst = generate(cfg)
    output = Path(args.output)
    comments = [f"synthetic chart: n={cfg.n_patches} seed={cfg.seed} shading={cfg.shading_range[0]!r},{cfg.shading_range[1]!r} "
                f"noise={cfg.noise_sigma!r} outliers={cfg.outlier_fraction!r}"]
    chart_io.write_patches(inst.to_records(), output, comments=comments)
    truth_records = [chart_io.PatchRecord(r.patch_id, r.rgb, b) for r, b in zip(inst.to_records(False), inst.B_clean)]
    chart_io.write_patches(truth_records, sidecar_path(output, ".truth.csv"), comments=["noise-free ground-truth XYZ"])
    sidecar_path(output, ".truth.json").write_text(inst.truth_json(), encoding="utf-8")
    print(f"synth: wrote {output} ({cfg.n_patches} patches, {len(inst.outlier_indices)} outliers)", file=out)


def sidecar_path(output, suffix):
    output = Path(output)
    return output.with_name(output.stem + suffix)


COMMANDS = {
    "calibrate": cmd_calibrate,
    "apply": cmd_apply,
    "evaluate": cmd_evaluate,
    "synth": cmd_synth,
}


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        COMMANDS[args.command](args, stdout)
    except InputError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT
    except ColorHomographyError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_SOLVER
    return EXIT_OK


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
