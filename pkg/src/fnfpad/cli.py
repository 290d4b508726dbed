"""Command-line pipeline: synth, extract, stats, classify, render.

Exit codes: 0 success, 1 usage or input-format error, 2 partial failure
(some pairs could not be read and were skipped).
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, classify, render, synthgen
from .features import FEATURE_NAMES, FeatureConfig, extract_features, illumination_of
from .illumcues import pearson_matrix
from .imageio import read_image
from .imgcore import ImageError, PairedCapture, fft2_logmag, radial_spectrum, to_grayscale
from .manifest import ManifestError, read_manifest
from .quality import lcs_map, ocl_block, ocl_map, ridge_profile
from .report import TableError, dumps_report, features_csv, file_digest, read_features_csv, run_report
from .stats import build_separation_report

EXIT_OK, EXIT_USAGE, EXIT_PARTIAL = 0, 1, 2


class UsageError(Exception):
    """Reported on stderr and mapped to exit code 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for partial data failures here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


# -- synth ---------------------------------------------------------------

def synth_counts(args) -> dict[str, int]:
    """Per-class pair counts requested by a ``synth`` invocation."""
    classes = [c.strip() for c in args.classes.split(",") if c.strip()]
    bad = [c for c in classes if c not in synthgen.KINDS]
    if bad or not classes:
        raise UsageError(f"invalid class {bad[0] if bad else args.classes!r}; "
                         f"valid classes: {', '.join(synthgen.KINDS)}")
    if args.count < 1:
        raise UsageError("--count must be >= 1")
    return {c: args.count for c in classes}


def cmd_synth(args) -> int:
    counts = synth_counts(args)
    manifest = synthgen.generate_dataset(args.out, counts, seed=args.seed, fmt=args.format,
                                         jobs=args.jobs, config_path=args.config)
    print(f"wrote {sum(counts.values())} pairs to {manifest}")
    return EXIT_OK


# -- extract -------------------------------------------------------------

def _feature_config(args) -> FeatureConfig:
    data = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
    overrides = {"ocl_block": args.ocl_block, "lcs_block": args.lcs_block,
                 "patch_size": args.patch_size, "mi_bins": args.mi_bins}
    data.update({k: v for k, v in overrides.items() if v is not None})
    if args.realism_block is not None:
        data.setdefault("texture", {})["realism_block"] = args.realism_block
    try:
        return FeatureConfig.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid feature config: {exc}") from None


def _extract_one(task):
    label, flash_path, nonflash_path, cfg = task
    try:
        pair = PairedCapture(read_image(flash_path), read_image(nonflash_path), label)
        return label.pair_id, extract_features(pair, cfg), None
    except (OSError, ImageError, ValueError) as exc:
        return label.pair_id, None, str(exc)


def cmd_extract(args) -> int:
    cfg = _feature_config(args)
    try:
        entries = read_manifest(args.manifest)
    except ManifestError as exc:
        raise UsageError(f"malformed manifest {args.manifest}: {exc}") from None
    except OSError as exc:
        raise UsageError(f"cannot read manifest: {exc}") from None
    tasks = [(e.label, e.flash, e.nonflash, cfg) for e in entries]
    if args.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_extract_one, tasks, chunksize=4))
    else:
        results = [_extract_one(t) for t in tasks]
    results.sort(key=lambda r: r[0])

    vectors, warnings, skipped = [], [], []
    for pid, vec, err in results:
        if vec is None:
            msg = f"pair {pid}: unreadable, skipped ({err})"
            _warn(msg)
            warnings.append(msg)
            skipped.append(pid)
            continue
        vectors.append(vec)
        for name, reason in vec.flags.items():
            warnings.append(f"pair {pid}: {name} flagged: {reason}")

    _write(args.out, features_csv(vectors))
    if args.report:
        doc = run_report(
            "extract", args.deterministic,
            input={"manifest": Path(args.manifest).name, "sha256": file_digest(args.manifest)},
            config=cfg.to_dict(),
            feature_names=list(FEATURE_NAMES),
            pairs=[{"pair_id": v.pair_id, "label": v.label, "pai_type": v.pai_type,
                    "values": v.as_dict(), "flags": v.flags} for v in vectors],
            skipped=skipped,
            warnings=warnings,
        )
        _write(args.report, dumps_report(doc))
    print(f"extracted {len(vectors)} of {len(entries)} pairs")
    return EXIT_PARTIAL if skipped else EXIT_OK


# -- stats ---------------------------------------------------------------

def _read_table(path):
    try:
        return read_features_csv(path)
    except (OSError, TableError) as exc:
        raise UsageError(str(exc)) from None


def separation_sections(table) -> tuple[dict, dict, list[str]]:
    y = table.is_genuine
    if y.sum() < 2 or (~y).sum() < 2:
        raise UsageError("stats needs at least two genuine and two spoof rows")
    groups: dict[str, list[str]] = {"flash": [], "nonflash": [], "paired": []}
    for name in table.names:
        groups[illumination_of(name)].append(name)
    sections, tops, warnings = {}, {}, []
    for illum, names in groups.items():
        gen, spf, kept = {}, {}, []
        for name in names:
            col = table.column(name)
            g, s = col[y], col[~y]
            g, s = g[~np.isnan(g)], s[~np.isnan(s)]
            if g.size < 2 or s.size < 2:
                warnings.append(f"{name}: fewer than two unflagged samples per class, omitted")
                continue
            gen[name], spf[name] = g, s
            kept.append(name)
        rep = build_separation_report({"genuine": gen, "spoof": spf}, illum, kept)
        sections[illum] = rep.to_dict()["features"]
        if rep.features:
            best = rep.top()
            tops[illum] = {"name": best.name, "fdr": best.fdr}
    return sections, tops, warnings


def cmd_stats(args) -> int:
    table = _read_table(args.features)
    sections, tops, warnings = separation_sections(table)
    for w in warnings:
        _warn(w)
    doc = run_report(
        "stats", args.deterministic,
        input={"features": Path(args.features).name, "sha256": file_digest(args.features)},
        counts={"genuine": int(table.is_genuine.sum()), "spoof": int((~table.is_genuine).sum())},
        separation=sections, top=tops, warnings=warnings,
    )
    _write(args.out, dumps_report(doc))
    for illum, t in tops.items():
        fdr = "inf" if t["fdr"] is None else f"{t['fdr']:.4g}"
        print(f"top {illum} feature: {t['name']} (FDR {fdr})")
    return EXIT_OK


# -- classify ------------------------------------------------------------

def _aligned(table, names) -> np.ndarray:
    missing = [n for n in names if n not in table.names]
    if missing:
        raise UsageError(f"feature table lacks model features: {', '.join(missing[:5])}")
    return table.values[:, [table.names.index(n) for n in names]]


def cmd_classify(args) -> int:
    if (args.train is None) == (args.model is None):
        raise UsageError("give exactly one of --train or --model")
    train_metrics = None
    if args.model:
        try:
            model = classify.load_model(args.model)
        except classify.ModelFormatError as exc:
            raise UsageError(str(exc)) from None
        except OSError as exc:
            raise UsageError(f"cannot read model: {exc}") from None
    else:
        train = _read_table(args.train)
        try:
            model = classify.train_fisher_lda(train.values, train.is_genuine, train.names, ridge=args.ridge)
        except (ValueError, np.linalg.LinAlgError) as exc:
            raise UsageError(f"training failed: {exc}") from None
        train_metrics = classify.evaluate_model(model, train.values, train.is_genuine)
        if args.model_out:
            _write(args.model_out, classify.dumps_model(model))

    test_metrics, predictions = None, []
    if args.test:
        test = _read_table(args.test)
        X = _aligned(test, model.feature_names)
        scores = model.score(X)
        test_metrics = classify.evaluate(scores > model.threshold, test.is_genuine)
        predictions = [{"pair_id": pid, "score": float(s), "genuine": bool(s > model.threshold)}
                       for pid, s in zip(test.pair_ids, scores)]
    doc = run_report(
        "classify", args.deterministic,
        model={"features": len(model.feature_names), "threshold": model.threshold, "bias": model.bias},
        classifier={"train": train_metrics, "test": test_metrics},
        predictions=predictions,
    )
    if args.out:
        _write(args.out, dumps_report(doc))
    for split, m in (("train", train_metrics), ("test", test_metrics)):
        if m:
            print(f"{split}: accuracy {m['accuracy']:.4f} apcer {m['apcer']} bpcer {m['bpcer']}")
    return EXIT_OK


# -- render --------------------------------------------------------------

def _gray_input(path):
    try:
        return read_image(path)
    except (OSError, ImageError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None


def cmd_render(args) -> int:
    outputs: list[tuple[str, str]] = []
    if args.kind == "radial-spectrum":
        profiles = {Path(p).stem: radial_spectrum(fft2_logmag(to_grayscale(_gray_input(p))), args.bins)
                    for p in args.inputs}
        outputs.append(("radial-spectrum", render.radial_spectrum_svg(profiles)))
    else:
        for p in args.inputs:
            img = _gray_input(p)
            stem = Path(p).stem
            try:
                if args.kind == "ocl-map":
                    svg = render.ocl_map_svg(ocl_map(to_grayscale(img), args.block_size or 16), f"OCL map: {stem}")
                elif args.kind == "corr-heatmap":
                    mat, _ = pearson_matrix(img)
                    svg = render.corr_heatmap_svg(mat, title=f"channel Pearson: {stem}")
                else:
                    gray = to_grayscale(img)
                    bs = args.block_size or 32
                    grid = lcs_map(gray, bs)
                    r, c = grid.rows // 2, grid.cols // 2
                    block = gray[r * bs:(r + 1) * bs, c * bs:(c + 1) * bs]
                    _, profile = ridge_profile(block, ocl_block(block)[2])
                    svg = render.profile_svg(profile, f"ridge-valley profile: {stem} block ({r}, {c})")
            except (ImageError, ValueError) as exc:
                raise UsageError(f"{p}: {exc}") from None
            outputs.append((f"{stem}.{args.kind}", svg))
    out = Path(args.out)
    if len(outputs) == 1 and out.suffix == ".svg":
        _write(out, outputs[0][1])
    else:
        for name, svg in outputs:
            _write(out / f"{name}.svg", svg)
    print(f"wrote {len(outputs)} SVG file(s)")
    return EXIT_OK


# -- parser --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fnfpad", description="Flash/non-flash presentation attack analysis")
    p.add_argument("--version", action="version", version=f"fnfpad {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", help="generate a synthetic paired dataset")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--count", type=int, default=50, help="pairs per class (default 50)")
    s.add_argument("--classes", default=",".join(synthgen.KINDS), help="comma-separated classes")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--format", choices=("png", "ppm"), default="png")
    s.add_argument("--config", help="generator config JSON (default: bundled v1)")
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_synth)

    e = sub.add_parser("extract", help="compute feature vectors for a manifest")
    e.add_argument("manifest")
    e.add_argument("--out", required=True, help="feature CSV path")
    e.add_argument("--report", help="run report JSON path")
    e.add_argument("--config", help="feature config JSON")
    e.add_argument("--jobs", type=int, default=1)
    e.add_argument("--deterministic", action="store_true", help="omit timestamps from reports")
    e.add_argument("--ocl-block", type=int)
    e.add_argument("--lcs-block", type=int)
    e.add_argument("--patch-size", type=int)
    e.add_argument("--realism-block", type=int)
    e.add_argument("--mi-bins", type=int)
    e.set_defaults(func=cmd_extract)

    st = sub.add_parser("stats", help="genuine/spoof separation statistics")
    st.add_argument("features", help="feature CSV")
    st.add_argument("--out", required=True, help="report JSON path")
    st.add_argument("--deterministic", action="store_true")
    st.set_defaults(func=cmd_stats)

    c = sub.add_parser("classify", help="train and/or evaluate the linear classifier")
    c.add_argument("--train", help="training feature CSV")
    c.add_argument("--model", help="existing model file (instead of --train)")
    c.add_argument("--test", help="test feature CSV")
    c.add_argument("--model-out", help="where to save the trained model")
    c.add_argument("--out", help="metrics report JSON path")
    c.add_argument("--ridge", type=float, default=1e-6)
    c.add_argument("--deterministic", action="store_true")
    c.set_defaults(func=cmd_classify)

    r = sub.add_parser("render", help="draw SVG figures")
    r.add_argument("kind", choices=render.KINDS)
    r.add_argument("inputs", nargs="+", help="image files")
    r.add_argument("--out", required=True, help="SVG file (single output) or directory")
    r.add_argument("--block-size", type=int)
    r.add_argument("--bins", type=int, default=16, help="radial spectrum bins")
    r.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        print("fnfpad: error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"fnfpad: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
