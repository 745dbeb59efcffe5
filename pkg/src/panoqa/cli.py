"""Command line interface.

Subcommands: extract, train, predict, evaluate, viewports, plus a
subbands debug dump. Every artifact-producing run writes the fully
resolved configuration to a sidecar file next to its output, so the
run can be repeated from the sidecar alone (it is valid --config
input). Exit codes: 0 success, 1 validation problem, 2 I/O problem,
3 numerical failure.
"""

import argparse
import csv
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from .config import RunConfig, parse_config_text, run_config_from
from .dataset import extract_dataset_features, extract_image_features, load_manifest
from .errors import (DegenerateDataError, ImageFormatError, PanoqaError,
                     ValidationError)
from .evaluation import run_trials
from .raster import load_erp, write_pgm, write_png
from .regression import SvrParams, grid_search_svr, read_model, train_svr, write_model
from .viewport import render_viewports
from .wavelet import haar_decompose, subband_entropy

_DEFAULTS = RunConfig()

# flag name -> RunConfig field; every tunable is reachable from the CLI
_FLAG_FIELDS = [
    ("--levels", "levels", int, "wavelet decomposition depth (1-3)"),
    ("--m0", "equator_count", int, "viewports on the equator ring"),
    ("--fov", "fov", float, "viewport field of view, degrees"),
    ("--viewport-size", "viewport_size", int, "viewport side length, pixels"),
    ("--zca-patch", "zca_patch", int, "whitening patch side (odd)"),
    ("--zca-epsilon", "zca_epsilon", float, "whitening eigenvalue floor"),
    ("--mscn-radius", "mscn_radius", int, "normalization window radius"),
    ("--mscn-sigma", "mscn_sigma", float, "normalization window sigma"),
    ("--mscn-c", "mscn_c", float, "contrast stabilizer"),
    ("--svr-c", "svr_cost", float, "regression cost bound"),
    ("--svr-gamma", "svr_gamma", float, "RBF width (default 1/n_features)"),
    ("--svr-epsilon", "svr_epsilon", float, "insensitive-tube half width"),
    ("--trials", "trials", int, "number of split-train-test trials"),
    ("--split", "train_fraction", float, "training fraction per trial"),
    ("--seed", "seed", int, "master random seed"),
    ("--jobs", "jobs", int, "parallel workers for extraction"),
]

_BOOL_FLAGS = [
    ("--zca", "zca_enabled", "whitening stage (--no-zca disables it)"),
    ("--grid-search", "grid_search", "cross-validated hyperparameter search"),
    ("--strict", "strict", "fail the run on the first bad image"),
]


def _add_config_flags(parser):
    parser.add_argument("--config", metavar="FILE",
                        help="config file of 'key = value' lines; flags win")
    parser.add_argument("--sidecar", metavar="FILE",
                        help="where to write the resolved config "
                             "(default: next to the output)")
    for flag, field, ftype, help_text in _FLAG_FIELDS:
        parser.add_argument(flag, dest=field, type=ftype, default=None,
                            help=f"{help_text} (default: "
                                 f"{getattr(_DEFAULTS, field)})")
    for flag, field, help_text in _BOOL_FLAGS:
        parser.add_argument(flag, dest=field, default=None,
                            action=argparse.BooleanOptionalAction,
                            help=f"{help_text} (default: "
                                 f"{getattr(_DEFAULTS, field)})")


def _resolve_config(args):
    overrides = {}
    if args.config:
        overrides.update(parse_config_text(Path(args.config).read_text(encoding="utf-8")))
    cfg = run_config_from(overrides)
    flag_values = {}
    for name in _RUN_FIELD_NAMES:
        value = getattr(args, name, None)
        if value is not None:
            flag_values[name] = value
    return run_config_from(flag_values, base=cfg)


_RUN_FIELD_NAMES = [f.name for f in fields(RunConfig)]


def _write_sidecar(args, cfg, default_anchor):
    """Write the resolved config next to the run's output artifact."""
    if args.sidecar:
        target = Path(args.sidecar)
    elif default_anchor is None:
        return
    else:
        anchor = Path(default_anchor)
        target = (anchor / "config.txt" if anchor.is_dir()
                  else anchor.with_name(anchor.name + ".config.txt"))
    target.write_text(cfg.canonical_text(), encoding="ascii")


def _add_mos_scale(parser):
    parser.add_argument("--mos-scale", nargs=2, type=float, metavar=("LO", "HI"),
                        default=None, help="valid score range for validation")


def _format_float(x):
    return format(float(x), ".17g")


def write_feature_csv(path, ids, matrix):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id"] + [f"f{i}" for i in range(matrix.shape[1])])
        for row_id, row in zip(ids, matrix):
            writer.writerow([row_id] + [_format_float(v) for v in row])


def read_feature_csv(path):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: empty feature file") from None
        if len(header) < 2 or header[0] != "id" or \
                header[1:] != [f"f{i}" for i in range(len(header) - 1)]:
            raise ValidationError(f"{path}: malformed feature header")
        width = len(header) - 1
        ids = []
        rows = []
        for lineno, cells in enumerate(reader, start=2):
            if not cells:
                continue
            if len(cells) != width + 1:
                raise ValidationError(
                    f"{path} line {lineno}: expected {width + 1} cells, got {len(cells)}")
            ids.append(cells[0])
            try:
                rows.append([float(c) for c in cells[1:]])
            except ValueError:
                raise ValidationError(
                    f"{path} line {lineno}: non-numeric feature value") from None
    if not ids:
        raise ValidationError(f"{path}: no feature rows")
    return ids, np.array(rows)


def _cmd_extract(args):
    cfg = _resolve_config(args)
    manifest = load_manifest(args.manifest,
                             mos_scale=tuple(args.mos_scale) if args.mos_scale else None)
    result = extract_dataset_features(
        manifest, cfg.pipeline(), cache_dir=args.cache_dir,
        jobs=cfg.jobs, strict=cfg.strict)
    write_feature_csv(args.out, result.ids, result.matrix)
    _write_sidecar(args, cfg, args.out)
    print(f"extracted {len(result.ids)}/{len(manifest)} images "
          f"({result.cache_hits} cache hits, {result.cache_misses} misses, "
          f"{len(result.failures)} failures)")
    for failed_id, reason in result.failures:
        print(f"failed: {failed_id}: {reason}", file=sys.stderr)
    return 0


def _paired_training_data(feature_ids, matrix, manifest):
    mos_map = manifest.mos_by_id()
    if len(feature_ids) != len(manifest):
        raise ValidationError(
            f"feature file holds {len(feature_ids)} rows but the manifest "
            f"holds {len(manifest)}")
    missing = [i for i in feature_ids if i not in mos_map]
    if missing:
        raise ValidationError(f"feature ids not present in manifest: {missing[:5]}")
    targets = np.array([mos_map[i] for i in feature_ids])
    return matrix, targets


def _cmd_train(args):
    cfg = _resolve_config(args)
    ids, matrix = read_feature_csv(args.features)
    manifest = load_manifest(args.manifest,
                             mos_scale=tuple(args.mos_scale) if args.mos_scale else None)
    x, y = _paired_training_data(ids, matrix, manifest)
    params = cfg.svr_params()
    if cfg.grid_search:
        cost, gamma, score = grid_search_svr(x, y, epsilon=params.epsilon, seed=cfg.seed)
        print(f"grid search selected c={cost:g} gamma={gamma:g} (cv rmse {score:.4f})")
        params = SvrParams(cost=cost, gamma=gamma, epsilon=params.epsilon)
    model = train_svr(x, y, params)
    write_model(args.model_out, model)
    _write_sidecar(args, cfg, args.model_out)
    predictions = model.predict(x)
    inside = int(np.sum(np.abs(predictions - y) <= params.epsilon + 1e-9))
    print(f"trained on {x.shape[0]} rows, {model.coefficients.size} support vectors, "
          f"epsilon-tube satisfaction {inside}/{x.shape[0]}")
    if not model.converged:
        print("warning: solver hit the iteration cap before reaching tolerance",
              file=sys.stderr)
    return 0


def _cmd_predict(args):
    cfg = _resolve_config(args)
    model = read_model(args.model)
    source = Path(args.input)
    if source.suffix.lower() == ".csv":
        ids, matrix = read_feature_csv(source)
        if matrix.shape[1] != model.feature_dim:
            raise ValidationError(
                f"feature width {matrix.shape[1]} does not match model width "
                f"{model.feature_dim}")
        scores = model.predict(matrix)
        for row_id, score in zip(ids, scores):
            print(f"{row_id},{score:.6f}")
    else:
        features = extract_image_features(load_erp(source), cfg.pipeline())
        if features.size != model.feature_dim:
            raise ValidationError(
                f"extracted width {features.size} does not match model width "
                f"{model.feature_dim}; check --levels")
        print(f"{model.predict(features):.6f}")
    _write_sidecar(args, cfg, None)
    return 0


def _cmd_evaluate(args):
    cfg = _resolve_config(args)
    manifest = load_manifest(args.manifest,
                             mos_scale=tuple(args.mos_scale) if args.mos_scale else None)
    result = extract_dataset_features(
        manifest, cfg.pipeline(), cache_dir=args.cache_dir,
        jobs=cfg.jobs, strict=cfg.strict)
    if result.failures:
        for failed_id, reason in result.failures:
            print(f"failed: {failed_id}: {reason}", file=sys.stderr)
    mos_map = manifest.mos_by_id()
    scores = np.array([mos_map[i] for i in result.ids])
    groups = None
    if args.by_reference:
        ref_map = {e.path: e.reference for e in manifest.entries}
        groups = [ref_map[i] for i in result.ids]
        if any(g is None for g in groups):
            raise ValidationError(
                "--by-reference needs a reference column covering every image")
    summary = run_trials(result.matrix, scores, trials=cfg.trials,
                         train_fraction=cfg.train_fraction, seed=cfg.seed,
                         svr=cfg.svr_params(), groups=groups,
                         grid_search=cfg.grid_search)
    _write_trial_report(args.out, summary)
    _write_sidecar(args, cfg, args.out)
    stats = summary.metric_summary()
    print(f"dataset {manifest.name}: {len(result.ids)} images, "
          f"train {summary.train_size} / test {summary.test_size}, "
          f"{len(summary.results)} trials, {summary.failure_count} failed")
    for metric in ("srocc", "plcc", "rmse"):
        median, mean, std = stats[metric]
        print(f"{metric}: median {median:.4f} mean {mean:.4f} std {std:.4f}")
    return 0


def _write_trial_report(path, summary):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial", "seed", "srocc", "plcc", "rmse", "error"])
        for r in summary.results:
            writer.writerow([
                r.index, r.seed,
                "" if r.failed else _format_float(r.srocc),
                "" if r.failed else _format_float(r.plcc),
                "" if r.failed else _format_float(r.rmse),
                r.error or "",
            ])
        fh.write("# summary\n")
        fh.write(f"# train_size,{summary.train_size}\n")
        fh.write(f"# test_size,{summary.test_size}\n")
        fh.write(f"# failed_trials,{summary.failure_count}\n")
        for metric, (median, mean, std) in summary.metric_summary().items():
            fh.write(f"# {metric},median,{_format_float(median)}"
                     f",mean,{_format_float(mean)},std,{_format_float(std)}\n")


def _cmd_viewports(args):
    cfg = _resolve_config(args)
    erp = load_erp(args.image)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    views = render_viewports(erp, cfg.pipeline().sampling_config())
    lines = []
    for index, (spec, view) in enumerate(zip(views.specs, views.rasters)):
        name = f"viewport_{index:03d}.png"
        write_png(out_dir / name, view)
        lines.append(f"{name} lon={spec.longitude:.4f} lat={spec.latitude:.4f} "
                     f"fov={spec.fov:g} size={spec.size}")
    (out_dir / "viewports.txt").write_text("\n".join(lines) + "\n", encoding="ascii")
    _write_sidecar(args, cfg, out_dir)
    print(f"wrote {views.count} viewports to {out_dir}")
    return 0


def _cmd_subbands(args):
    cfg = _resolve_config(args)
    erp = load_erp(args.image)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for subbands in haar_decompose(erp, cfg.levels):
        for label, band in zip(("ll", "hl", "lh", "hh"), subbands.bands()):
            write_pgm(out_dir / f"level{subbands.level}_{label}.pgm",
                      band, normalize=True)
            print(f"level{subbands.level}_{label}: "
                  f"entropy {subband_entropy(band):.4f} bits")
    _write_sidecar(args, cfg, out_dir)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="panoqa",
        description="No-reference quality assessment for 360-degree "
                    "equirectangular images.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="extract feature vectors for a manifest")
    p.add_argument("manifest", help="dataset manifest CSV")
    p.add_argument("--out", required=True, help="output feature CSV")
    p.add_argument("--cache-dir", default=None, help="feature cache directory")
    _add_mos_scale(p)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("train", help="train a regression model from features")
    p.add_argument("features", help="feature CSV from extract")
    p.add_argument("manifest", help="dataset manifest CSV with scores")
    p.add_argument("--model-out", required=True, help="output model file")
    _add_mos_scale(p)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("predict", help="score an image or a feature CSV")
    p.add_argument("input", help="image file, or feature CSV from extract")
    p.add_argument("--model", required=True, help="model file from train")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("evaluate", help="run the split-trial protocol on a manifest")
    p.add_argument("manifest", help="dataset manifest CSV")
    p.add_argument("--out", required=True, help="output per-trial CSV report")
    p.add_argument("--cache-dir", default=None, help="feature cache directory")
    p.add_argument("--by-reference", action="store_true",
                   help="split by reference content instead of per image")
    _add_mos_scale(p)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("viewports", help="dump planned viewports as PNG files")
    p.add_argument("image", help="equirectangular image")
    p.add_argument("--out-dir", required=True, help="output directory")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_viewports)

    p = sub.add_parser("subbands", help="dump wavelet subbands as PGM files")
    p.add_argument("image", help="input image")
    p.add_argument("--out-dir", required=True, help="output directory")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_subbands)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:          # includes manifest/model format errors
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ImageFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DegenerateDataError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except PanoqaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
