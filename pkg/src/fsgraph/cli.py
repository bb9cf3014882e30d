"""``fsg`` command-line interface."""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .benchmark import BenchConfig, parse_config, report_json, roc_csv, run_synth_benchmark
from .exceptions import FormatError, NumericalError, UndefinedMetricError
from .graph import build_graph, edge_list_tsv
from .localize import mask_to_gray8, to_gray8
from .metrics import confusion, f1, mcc, roc_auc
from .patching import load_pgm, sample_patches, save_pgm
from .pipeline import DEFAULT_TAU, DETECTION_METHODS, LOCALIZATION_METHODS, decide, detection_statistic, localize, similarity_matrix
from .similarity import ResidualSimilarity, load_matrix, save_matrix
from .synth import DEFAULT_MODELS, make_forgery, render

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_IO = 3
EXIT_FORMAT = 4
EXIT_NUMERIC = 5

UNSPEC = "(no published value)"


def _is_matrix_file(path: str) -> bool:
    with open(path, "rb") as fh:
        return fh.read(3) == b"FSM"


def _load_input(args):
    """Return (patches or None, S, timings) from an image or FSM matrix path."""
    if _is_matrix_file(args.input):
        t0 = time.perf_counter()
        S = load_matrix(args.input)
        return None, S, {"features_ms": 0.0, "graph_ms": (time.perf_counter() - t0) * 1000.0}
    img = load_pgm(args.input)
    return similarity_matrix(img, args.patch_size, args.overlap, ResidualSimilarity(args.gamma))


def _emit(report: dict, out: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _strip_timing(report: dict, keep: bool) -> dict:
    if not keep:
        report.pop("timing", None)
    return report


def cmd_detect(args) -> int:
    patches, S, timing = _load_input(args)
    t0 = time.perf_counter()
    stat = detection_statistic(S, args.method, args.t, args.laplacian)
    timing["detection_ms"] = (time.perf_counter() - t0) * 1000.0
    tau = DEFAULT_TAU[args.method] if args.tau is None else args.tau
    res = decide(stat, args.method, tau)
    timing["runtime_ms"] = sum(timing.values())
    report = {
        "input": os.path.basename(args.input),
        "method": res.method,
        "statistic": res.statistic,
        "decision": res.decision,
        "tau": res.tau,
        "t": args.t,
        "n": int(S.shape[0]),
        "timing": timing,
    }
    _emit(_strip_timing(report, not args.no_timing), args.out)
    return EXIT_OK


def _parse_alpha(text: str):
    if text in ("auto", "all"):
        return text
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("alpha must be 'auto', 'all' or a community id") from None


def cmd_localize(args) -> int:
    if args.k < 2:
        raise ValueError(f"k must be >= 2, got {args.k}")
    img = load_pgm(args.input)
    t0 = time.perf_counter()
    if args.matrix:
        patches = sample_patches(img, args.patch_size, args.overlap)
        S = load_matrix(args.matrix)
        timing = {"features_ms": 0.0, "graph_ms": (time.perf_counter() - t0) * 1000.0}
    else:
        patches, S, timing = similarity_matrix(img, args.patch_size, args.overlap, ResidualSimilarity(args.gamma))
    t1 = time.perf_counter()
    alpha = args.alpha
    if alpha == "auto" and args.k > 2:
        alpha = "all"
    res = localize(
        S, patches, args.method, t=args.t, k=args.k, alpha=alpha,
        window=args.window, sigma=args.sigma, thresh=args.mask_threshold, seed=args.seed,
    )
    timing["detection_ms"] = (time.perf_counter() - t1) * 1000.0
    timing["runtime_ms"] = sum(timing.values())

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    single = len(res.alphas) == 1
    files = {}
    for a in res.alphas:
        suffix = "" if single else f"_c{a}"
        save_pgm(out / f"mask{suffix}.pgm", mask_to_gray8(res.masks[a]))
        save_pgm(out / f"pnorm{suffix}.pgm", to_gray8(res.maps[a].P_norm))
        files[str(a)] = {"mask": f"mask{suffix}.pgm", "pnorm": f"pnorm{suffix}.pgm"}
    (out / "partition.tsv").write_text(res.partition.to_tsv())
    (out / "patches.tsv").write_text(patches.to_tsv())

    report = {
        "input": os.path.basename(args.input),
        "method": args.method,
        "k": res.partition.k,
        "alphas": res.alphas,
        "community_sizes": [int(s) for s in res.partition.sizes()],
        "statistic": res.partition.score,
        "n": len(patches),
        "files": files,
        "mask_threshold": args.mask_threshold,
        "timing": timing,
    }
    if args.gt:
        gt = load_pgm(args.gt) > 0
        a = res.alphas[0]
        mask = res.masks[a].astype(bool)
        sm = res.smoothed[a]
        scores = {}
        for name, pred, score_map in (("alpha", mask, sm), ("complement", ~mask, 1.0 - sm)):
            c = confusion(pred, gt)
            try:
                auc = roc_auc(score_map, gt)
            except UndefinedMetricError:
                auc = None
            scores[name] = {"mcc": mcc(c), "f1": f1(c), "auc": auc,
                            "iou": c.TP / max(1, c.TP + c.FP + c.FN)}
        # the complement is reported too; the mask itself is never chosen using gt
        report["scores"] = {**scores, "threshold_mode": "fixed"}
    _emit(_strip_timing(report, not args.no_timing), str(out / "report.json"))
    if not args.quiet:
        _emit(_strip_timing(dict(report), not args.no_timing), None)
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.config:
        cfg = parse_config(Path(args.config).read_text())
    else:
        cfg = BenchConfig()
    overrides = {}
    if args.n is not None:
        overrides.update(n_forged=args.n, n_unaltered=args.n)
    if args.seed is not None:
        overrides["seed"] = args.seed
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    report = run_synth_benchmark(cfg, include_timing=not args.no_timing)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for size, entry in report["sizes"].items():
        for method, vals in entry["methods"].items():
            (out / f"roc_{method}_{size}.csv").write_text(roc_csv(vals["roc"]))
    (out / "report.json").write_text(report_json(report))
    if not args.quiet:
        summary = {
            size: {m: {"auc": v["auc"], "pd_at_pfa": v["pd_at_pfa"], "map": v["map"]} for m, v in e["methods"].items()}
            for size, e in report["sizes"].items()
        }
        _emit(summary, None)
    return EXIT_OK


def cmd_matrix_export(args) -> int:
    img = load_pgm(args.input)
    patches, S, _ = similarity_matrix(img, args.patch_size, args.overlap, ResidualSimilarity(args.gamma))
    save_matrix(args.out, S)
    if args.patches_out:
        Path(args.patches_out).write_text(patches.to_tsv())
    return EXIT_OK


def cmd_matrix_import(args) -> int:
    S = load_matrix(args.input)
    if args.out:
        save_matrix(args.out, S)
    iu = np.triu_indices(S.shape[0], 1)
    _emit({"n": int(S.shape[0]), "mean": float(S[iu].mean()), "min": float(S[iu].min()),
           "max": float(S[iu].max())}, None)
    return EXIT_OK


def cmd_graph_export(args) -> int:
    _, S, _ = _load_input(args)
    text = edge_list_tsv(build_graph(S, args.t))
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_synth(args) -> int:
    models = {m.id: m for m in DEFAULT_MODELS}
    if args.model not in models:
        raise ValueError(f"unknown model {args.model!r}; choose from {sorted(models)}")
    img = render(models[args.model], args.width, args.height, args.seed)
    if args.donor_model:
        if args.donor_model not in models:
            raise ValueError(f"unknown model {args.donor_model!r}")
        donor = render(models[args.donor_model], args.width, args.height, args.seed + 1)
        case = make_forgery(img, donor, args.block, args.seed)
        img = case.forged_image
        if args.mask_out:
            save_pgm(args.mask_out, mask_to_gray8(case.gt_mask))
    save_pgm(args.out, img)
    return EXIT_OK


def _add_patch_args(p, overlap: float) -> None:
    p.add_argument("--patch-size", type=int, default=128, help="patch side in pixels (default 128)")
    p.add_argument("--overlap", type=float, default=overlap, help=f"patch overlap fraction (default {overlap})")
    p.add_argument("--gamma", type=float, default=1.0, help=f"residual similarity scale (default 1.0) {UNSPEC}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fsg", description="Forensic similarity graph forgery detection and localization")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="image-level forgery decision")
    p.add_argument("input", help="binary PGM image or FSM similarity matrix")
    _add_patch_args(p, 0.5)
    p.add_argument("--method", choices=DETECTION_METHODS, default="spectral-gap")
    p.add_argument("--tau", type=float, default=None,
                   help=f"decision threshold (defaults: spectral-gap 100, modularity 0.025; baselines 0.5 {UNSPEC})")
    p.add_argument("--t", type=float, default=0.0, help="edge threshold (default 0)")
    p.add_argument("--laplacian", choices=("unnormalized", "normalized"), default="unnormalized")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.add_argument("--no-timing", action="store_true", help="omit timing fields from the report")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("localize", help="pixel-level forgery localization")
    p.add_argument("input", help="binary PGM image")
    p.add_argument("--matrix", help="precomputed FSM matrix for the image's patch grid")
    _add_patch_args(p, 0.75)
    p.add_argument("--method", choices=LOCALIZATION_METHODS, default="spectral")
    p.add_argument("--t", type=float, default=None, help="edge threshold (default 0; 0.7 for modularity-loc)")
    p.add_argument("--k", type=int, default=2, help="number of communities (default 2)")
    p.add_argument("--alpha", type=_parse_alpha, default="auto",
                   help="community to map: 'auto' (smaller of two), 'all', or an id")
    p.add_argument("--window", type=int, default=32, help="Gaussian smoothing window (default 32)")
    p.add_argument("--sigma", type=float, default=None, help=f"Gaussian sigma (default window/6) {UNSPEC}")
    p.add_argument("--mask-threshold", type=float, default=0.25, help=f"mask threshold (default 0.25) {UNSPEC}")
    p.add_argument("--seed", type=int, default=0, help="k-means start vertex for k > 2")
    p.add_argument("--gt", help="ground-truth mask PGM; adds MCC/F1/AUC scores to the report")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--no-timing", action="store_true")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_localize)

    p = sub.add_parser("bench", help="synthetic block-splice detection benchmark")
    p.add_argument("--config", help="key = value benchmark configuration file")
    p.add_argument("--n", type=int, default=None, help="override forged and unaltered counts")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--no-timing", action="store_true")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("matrix", help="similarity matrix import/export")
    msub = p.add_subparsers(dest="matrix_command", required=True)
    q = msub.add_parser("export", help="compute an image's similarity matrix and write FSM")
    q.add_argument("input")
    _add_patch_args(q, 0.5)
    q.add_argument("--out", required=True)
    q.add_argument("--patches-out", help="also write the patch grid as TSV")
    q.set_defaults(func=cmd_matrix_export)
    q = msub.add_parser("import", help="validate an FSM file (optionally rewrite it canonically)")
    q.add_argument("input")
    q.add_argument("--out")
    q.set_defaults(func=cmd_matrix_import)

    p = sub.add_parser("graph", help="graph utilities")
    gsub = p.add_subparsers(dest="graph_command", required=True)
    q = gsub.add_parser("export", help="write the thresholded edge list as TSV")
    q.add_argument("input", help="binary PGM image or FSM matrix")
    _add_patch_args(q, 0.5)
    q.add_argument("--t", type=float, default=0.0)
    q.add_argument("--out")
    q.set_defaults(func=cmd_graph_export)

    p = sub.add_parser("synth", help="render a synthetic image or block splice")
    p.add_argument("--model", default=DEFAULT_MODELS[0].id)
    p.add_argument("--donor-model", help="splice a block from this model into the image")
    p.add_argument("--block", type=int, default=256)
    p.add_argument("--width", type=int, default=512)
    p.add_argument("--height", type=int, default=512)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--mask-out")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    threads = os.environ.get("FSG_THREADS")
    try:
        if threads:
            from threadpoolctl import threadpool_limits

            with threadpool_limits(limits=max(1, int(threads))):
                return args.func(args)
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"fsg: no such file: {exc.filename}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"fsg: I/O error on {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO
    except FormatError as exc:
        print(f"fsg: format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except (NumericalError, UndefinedMetricError) as exc:
        print(f"fsg: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"fsg: invalid argument: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
