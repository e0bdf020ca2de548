"""Command-line entry point: ``galmorph <command> ...``.

Exit status is 0 on success, 2 for usage errors and 1 for data errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

import numpy as np

from galmorph import CLASSES, pca, synth
from galmorph.errors import GalmorphError, ManifestError, PcaError
from galmorph.evaluation import (
    DEFAULT_FOLDS,
    DEFAULT_RUNS,
    DEFAULT_SEED,
    best_per_class,
    cross_validate,
    report_tables,
)
from galmorph.fractal import BINARY, DEFAULT_Q_GRID, GRAY, spectrum
from galmorph.learn import ALGORITHMS
from galmorph.pipeline import DEFAULT_COMPONENTS, FEATURE_CONFIGS, build_features
from galmorph.raster import load_image, save_image
from galmorph.standardize import standardize

IMAGE_SUFFIXES = (".pgm", ".png")


class StageError(Exception):
    """A data error tagged with the failing stage and input."""

    def __init__(self, stage: str, source, cause: Exception):
        super().__init__(f"{stage}: {source}: {type(cause).__name__}: {cause}")


def load_manifest(path) -> list[tuple[Path, str]]:
    """Rows of (image path, label); paths are relative to the manifest's folder."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ManifestError(f"{path}: cannot read manifest: {exc.strerror}") from exc
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] != ["path", "label"]:
        raise ManifestError(f"{path}: line 1: expected header 'path,label'")
    out = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise ManifestError(f"{path}: line {lineno}: expected 2 fields, got {len(row)}")
        rel, label = row[0].strip(), row[1].strip()
        if label not in CLASSES:
            raise ManifestError(f"{path}: line {lineno}: unknown label {label!r}; expected one of {CLASSES}")
        if not rel:
            raise ManifestError(f"{path}: line {lineno}: empty path")
        img_path = Path(rel) if Path(rel).is_absolute() else path.parent / rel
        if not img_path.is_file():
            raise ManifestError(f"{path}: line {lineno}: image not found: {img_path}")
        out.append((img_path, label))
    if not out:
        raise ManifestError(f"{path}: manifest lists no images")
    return out


def _inputs(src) -> list[tuple[Path, str]]:
    """Manifest rows, or the sorted images of a directory with empty labels."""
    src = Path(src)
    if src.is_dir():
        files = sorted(p for p in src.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
        if not files:
            raise ManifestError(f"{src}: no .pgm or .png images in directory")
        return [(p, "") for p in files]
    return load_manifest(src)


def _load(path: Path, stage: str):
    try:
        return load_image(path)
    except GalmorphError as exc:
        raise StageError(stage, path, exc) from exc


def _standardized(rows, stage: str):
    out = []
    for p, _ in rows:
        img = _load(p, stage)
        try:
            out.append(standardize(img))
        except GalmorphError as exc:
            raise StageError(f"{stage} (standardize)", p, exc) from exc
    return out


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _choice_list(choices):
    def parse(text: str) -> list[str]:
        items = [t.strip() for t in text.split(",") if t.strip()]
        bad = [t for t in items if t not in choices]
        if bad or not items:
            raise argparse.ArgumentTypeError(f"invalid choice(s) {bad or text!r}; expected from {list(choices)}")
        return items

    return parse


def _variance(text: str) -> float:
    v = float(text)
    if not 0.0 < v <= 1.0:
        raise argparse.ArgumentTypeError(f"variance target must be in (0, 1], got {v}")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


# ---- commands ---------------------------------------------------------------


def cmd_standardize(args) -> None:
    rows = _inputs(args.inp)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    images = _standardized(rows, "standardize")
    names = []
    for (p, _), img in zip(rows, images):
        name = p.stem + ".pgm"
        save_image(img, out / name)
        names.append(name)
    if any(label for _, label in rows):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["path", "label"])
        for name, (_, label) in zip(names, rows):
            w.writerow([name, label])
        _write(out / "manifest.csv", buf.getvalue())
    print(f"standardized {len(images)} image(s) into {out}")


def cmd_fd(args) -> None:
    rows = _inputs(args.inp)
    q_grid = sorted(args.q_grid)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["path", "label", "q", "d_q", "r2", "clamped"])
    for p, label in rows:
        img = _load(p, "fd")
        try:
            if args.standardize:
                img = standardize(img)
            spec = spectrum(img, q_grid, mode=args.mode, plus_one=args.plus_one, multi_offset=args.multi_offset)
        except GalmorphError as exc:
            raise StageError("fd", p, exc) from exc
        for q, d, r2 in zip(spec.q_values, spec.dimensions, spec.fit_r2):
            w.writerow([str(p), label, repr(q), repr(d), repr(r2), int(spec.clamped)])
    _write(Path(args.out), buf.getvalue())
    print(f"wrote spectra for {len(rows)} image(s) to {args.out}")


def _pca_vectors(args, stage):
    rows = load_manifest(args.manifest)
    images = _standardized(rows, stage) if args.standardize else [_load(p, stage) for p, _ in rows]
    shapes = {img.shape for img in images}
    if len(shapes) != 1:
        raise StageError(stage, args.manifest, PcaError(f"images differ in shape {sorted(shapes)}; use --standardize"))
    return rows, np.stack([pca.image_vector(img) for img in images])


def _n_components(args, model: pca.PcaModel) -> int:
    if args.variance is not None:
        return pca.select_components(model, args.variance)
    n = args.components if args.components is not None else min(DEFAULT_COMPONENTS, model.n_components)
    if n > model.n_components:
        raise PcaError(f"{n} components requested, model has {model.n_components}")
    return n


def cmd_pca_fit(args) -> None:
    rows, X = _pca_vectors(args, "pca fit")
    try:
        model = pca.fit(X)
        n = _n_components(args, model)
    except GalmorphError as exc:
        raise StageError("pca fit", args.manifest, exc) from exc
    _write(Path(args.model), model.to_json())
    if args.cumvar:
        _write(Path(args.cumvar), model.cumvar_csv())
    print(f"fitted PCA on {len(rows)} image(s): {model.n_components} components, {n} selected")


def cmd_pca_project(args) -> None:
    try:
        model = pca.PcaModel.from_json(Path(args.model).read_text())
    except (OSError, ValueError, KeyError, GalmorphError) as exc:
        raise StageError("pca project", args.model, exc) from exc
    rows, X = _pca_vectors(args, "pca project")
    try:
        n = _n_components(args, model)
        coeffs = pca.project(model, X, n)
    except GalmorphError as exc:
        raise StageError("pca project", args.manifest, exc) from exc
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["path", "label", *(f"pc{i + 1}" for i in range(n))])
    for (p, label), row in zip(rows, coeffs):
        w.writerow([str(p), label, *(repr(float(v)) for v in row)])
    _write(Path(args.out), buf.getvalue())
    print(f"projected {len(rows)} image(s) onto {n} component(s)")


def cmd_experiment(args) -> None:
    rows = load_manifest(args.manifest)
    labels = [label for _, label in rows]
    if args.raw:
        images = [_load(p, "experiment") for p, _ in rows]
    else:
        images = _standardized(rows, "experiment")
    try:
        source = build_features(images, labels)
    except (GalmorphError, ValueError) as exc:
        raise StageError("experiment (features)", args.manifest, exc) from exc
    n = _n_components(args, source.model)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    reports = []
    for config in args.features:
        data = source.dataset(config, n)
        column = source.label(config, n)
        for algo in args.algos:
            try:
                rep = cross_validate(
                    data, algo, k=args.folds, runs=args.runs, base_seed=args.seed,
                    stratified=not args.unstratified, features=column,
                )
            except (GalmorphError, ValueError) as exc:
                raise StageError(f"experiment ({algo}, {column})", args.manifest, exc) from exc
            reports.append(rep)
            slug = f"{algo}_{config.replace('+', '_')}"
            _write(out / f"confusion_{slug}.csv", rep.confusion.to_csv())

    grid = report_tables(reports)
    _write(out / "accuracy.txt", grid.to_text())
    _write(out / "accuracy.csv", grid.to_csv())

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["algorithm", "features", "run", "seed", "accuracy_percent"])
    for rep in reports:
        for r, (seed, acc) in enumerate(zip(rep.seeds, rep.run_accuracies)):
            w.writerow([rep.algorithm, rep.features, r, seed, repr(acc)])
    _write(out / "runs.csv", buf.getvalue())

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["algorithm", "features", *(f"{c}_percent" for c in CLASSES)])
    for rep in reports:
        w.writerow([rep.algorithm, rep.features, *(repr(a) for a in rep.per_class_accuracy())])
    _write(out / "per_class.csv", buf.getvalue())

    lines = []
    for name, rep in best_per_class(reports):
        acc = rep.per_class_accuracy()[CLASSES.index(name)]
        lines.append(f"best for {name}: {rep.algorithm} with {rep.features} ({acc:.1f}%)")
        lines.append(rep.confusion.to_csv().rstrip("\n"))
        lines.append("")
    _write(out / "best_per_class.txt", "\n".join(lines))

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["class", "count", "mean_fdv", "min_fdv", "max_fdv"])
    lab = np.array(labels)
    for c in CLASSES:
        v = source.fdv[lab == c]
        if v.size:
            w.writerow([c, v.size, repr(float(v.mean())), repr(float(v.min())), repr(float(v.max()))])
    _write(out / "fd_by_class.csv", buf.getvalue())
    _write(out / "cumvar.csv", source.model.cumvar_csv())

    sys.stdout.write(grid.to_text())


def cmd_synth(args) -> None:
    if len(args.counts) != len(CLASSES):
        raise _Usage(f"--counts needs {len(CLASSES)} values ({','.join(CLASSES)}), got {len(args.counts)}")
    try:
        images, labels = synth.generate_dataset(tuple(args.counts), base_seed=args.seed, size=args.size)
    except ValueError as exc:
        raise _Usage(str(exc)) from exc
    manifest = synth.write_dataset(images, labels, args.out)
    print(f"wrote {len(images)} image(s) and {manifest}")


class _Usage(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="galmorph", description="Galaxy morphology pipeline")
    p.add_argument("--version", action="version", version="%(prog)s 0.1.0")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("standardize", help="center, orient and resize images to 128x128")
    s.add_argument("--in", dest="inp", required=True, help="image directory or manifest CSV")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_standardize)

    s = sub.add_parser("fd", help="generalized fractal dimension spectra")
    s.add_argument("--in", dest="inp", required=True, help="manifest CSV or image directory")
    s.add_argument("--mode", choices=(GRAY, BINARY), default=GRAY)
    s.add_argument("--q-grid", type=_float_list, default=list(DEFAULT_Q_GRID), help="comma-separated Q values")
    s.add_argument("--out", required=True, help="output CSV")
    s.add_argument("--standardize", action="store_true", help="standardize images first")
    s.add_argument("--plus-one", action="store_true", help="gray mode: add 1 to every box range")
    s.add_argument("--multi-offset", action="store_true", help="average over the four corner-anchored grids")
    s.set_defaults(func=cmd_fd)

    s = sub.add_parser("pca", help="fit or apply a PCA model")
    pca_sub = s.add_subparsers(dest="pca_command", required=True)
    for name, func in (("fit", cmd_pca_fit), ("project", cmd_pca_project)):
        c = pca_sub.add_parser(name)
        c.add_argument("--manifest", required=True)
        c.add_argument("--model", required=True, help="model JSON (written by fit, read by project)")
        sel = c.add_mutually_exclusive_group()
        sel.add_argument("--variance", type=_variance, help="keep components up to this explained variance")
        sel.add_argument("--components", type=_positive, help="keep this many components")
        c.add_argument("--standardize", action="store_true", help="standardize images first")
        if name == "fit":
            c.add_argument("--cumvar", help="also write the cumulative variance CSV here")
        else:
            c.add_argument("--out", required=True, help="coefficients CSV")
        c.set_defaults(func=func)

    s = sub.add_parser("experiment", help="cross-validated accuracy tables")
    s.add_argument("--manifest", required=True)
    s.add_argument("--features", type=_choice_list(FEATURE_CONFIGS), default=["pcs", "pcs+fdv"],
                   help=f"comma-separated from {','.join(FEATURE_CONFIGS)}")
    s.add_argument("--algos", type=_choice_list(ALGORITHMS), default=list(ALGORITHMS))
    sel = s.add_mutually_exclusive_group()
    sel.add_argument("--variance", type=_variance, help="choose the PC count by explained variance")
    sel.add_argument("--components", type=_positive, help=f"PC count (default {DEFAULT_COMPONENTS})")
    s.add_argument("--folds", type=_positive, default=DEFAULT_FOLDS)
    s.add_argument("--runs", type=_positive, default=DEFAULT_RUNS)
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.add_argument("--unstratified", action="store_true", help="plain random folds")
    s.add_argument("--raw", action="store_true", help="skip standardization (images must share a shape)")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_experiment)

    s = sub.add_parser("synth", help="generate a synthetic galaxy set")
    s.add_argument("--counts", type=_int_list, default=list(synth.DEFAULT_COUNTS),
                   help="elliptical,spiral,irregular counts")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--size", type=int, default=256)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    raw = list(sys.argv[1:] if argv is None else argv)
    # let "--q-grid -2,-1,0" through: argparse would read "-2,-1,0" as a flag
    argv, i = [], 0
    while i < len(raw):
        if raw[i] == "--q-grid" and i + 1 < len(raw) and raw[i + 1].startswith("-"):
            argv.append(f"--q-grid={raw[i + 1]}")
            i += 2
        else:
            argv.append(raw[i])
            i += 1
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except _Usage as exc:
        parser.print_usage(sys.stderr)
        print(f"galmorph {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except StageError as exc:
        print(f"galmorph {exc}", file=sys.stderr)
        return 1
    except (GalmorphError, OSError, ValueError) as exc:
        print(f"galmorph {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
