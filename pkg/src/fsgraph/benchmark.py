"""Synthetic block-splice detection benchmark."""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass

import numpy as np

from .exceptions import FormatError, NumericalError
from .graph import build_graph
from .metrics import POLARITY, mean_average_precision, mean_similarity, min_similarity, pd_at_pfa, roc_auc, roc_curve
from .modularity import fast_greedy
from .pipeline import DETECTION_METHODS, similarity_matrix
from .similarity import ResidualSimilarity
from .spectral import laplacian_spectrum
from .synth import DEFAULT_MODELS, SourceModel, make_forgery, render

__all__ = ["BenchConfig", "parse_config", "run_synth_benchmark", "image_statistics", "report_json", "roc_csv"]


@dataclass(frozen=True)
class BenchConfig:
    width: int = 512
    height: int = 512
    n_forged: int = 100
    n_unaltered: int = 100
    block_sizes: tuple[int, ...] = (64, 128, 256)
    patch_size: int = 128
    overlap: float = 0.5
    methods: tuple[str, ...] = DETECTION_METHODS
    models: tuple[SourceModel, ...] = DEFAULT_MODELS
    seed: int = 0
    gamma: float = 1.0
    pfa: float = 0.05
    modularity_t: float = 0.0
    eigensolver: str = "auto"

    def __post_init__(self):
        if len(self.models) < 2:
            raise ValueError("the benchmark needs at least 2 source models")
        if self.n_forged < 1 or self.n_unaltered < 1:
            raise ValueError("need at least one forged and one unaltered image (AUC is undefined otherwise)")
        unknown = set(self.methods) - set(DETECTION_METHODS)
        if unknown:
            raise ValueError(f"unknown methods {sorted(unknown)}")


def _parse_model(text: str) -> SourceModel:
    parts = text.split()
    if not parts:
        raise FormatError("empty model line")
    kw: dict = {"id": parts[0]}
    for tok in parts[1:]:
        if "=" not in tok:
            raise FormatError(f"model field {tok!r} is not key=value")
        key, val = tok.split("=", 1)
        if key == "noise_sigma":
            kw["noise_sigma"] = float(val)
        elif key == "quant":
            kw["quantization_step"] = int(val)
        elif key == "gradient":
            kw["gradient"] = float(val)
        elif key == "texture":
            lo, hi = (float(v) for v in val.split(":"))
            kw["texture_sigma"] = (lo, hi)
        elif key == "blur":
            if val == "none":
                kw["blur_kernel"] = None
            elif val == "binomial":
                kw["blur_kernel"] = DEFAULT_MODELS[1].blur_kernel
            else:
                w = [float(v) for v in val.split(",")]
                if len(w) != 9:
                    raise FormatError("blur needs 9 comma-separated weights, 'binomial' or 'none'")
                kw["blur_kernel"] = tuple(tuple(w[r * 3 : r * 3 + 3]) for r in range(3))
        else:
            raise FormatError(f"unknown model field {key!r}")
    return SourceModel(**kw)


def parse_config(text: str) -> BenchConfig:
    """Read ``key = value`` lines; ``#`` starts a comment.

    ``model = <id> noise_sigma=.. quant=.. blur=none|binomial|w1,..,w9 texture=lo:hi``
    may repeat; when present it replaces the default models.
    """
    kw: dict = {}
    models = []
    ints = {"width", "height", "n_forged", "n_unaltered", "patch_size", "seed"}
    floats = {"overlap", "gamma", "pfa", "modularity_t"}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        try:
            if key in ints:
                kw[key] = int(val)
            elif key in floats:
                kw[key] = float(val)
            elif key == "block_sizes":
                kw[key] = tuple(int(v) for v in val.replace(",", " ").split())
            elif key == "methods":
                kw[key] = tuple(v for v in val.replace(",", " ").split())
            elif key == "eigensolver":
                kw[key] = val
            elif key == "model":
                models.append(_parse_model(val))
            else:
                raise FormatError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"line {lineno}: bad value for {key}: {val!r}") from None
    if models:
        kw["models"] = tuple(models)
    try:
        return BenchConfig(**kw)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def _seed(*parts: int) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def image_statistics(img, cfg: BenchConfig, provider=None) -> dict[str, float]:
    provider = provider or ResidualSimilarity(cfg.gamma)
    _, S, _ = similarity_matrix(img, cfg.patch_size, cfg.overlap, provider)
    out = {}
    if "spectral-gap" in cfg.methods:
        out["spectral-gap"] = laplacian_spectrum(build_graph(S, 0.0), "unnormalized", cfg.eigensolver).fiedler_value
    if "modularity" in cfg.methods:
        try:
            out["modularity"] = fast_greedy(build_graph(S, cfg.modularity_t)).q_opt
        except NumericalError:
            out["modularity"] = 0.0
    if "mean-sim" in cfg.methods:
        out["mean-sim"] = mean_similarity(S)
    if "min-sim" in cfg.methods:
        out["min-sim"] = min_similarity(S)
    return out


def _donor_model(i: int, n_models: int) -> tuple[int, int]:
    host = i % n_models
    donor = (host + 1 + (i // n_models) % (n_models - 1)) % n_models
    return host, donor


def run_synth_benchmark(cfg: BenchConfig, provider=None, include_timing: bool = False) -> dict:
    """Render unaltered and spliced images, score every method, summarize ROC/AUC."""
    t0 = time.perf_counter()
    provider = provider or ResidualSimilarity(cfg.gamma)
    models = cfg.models
    M = len(models)

    unaltered = []
    for i in range(cfg.n_unaltered):
        img = render(models[i % M], cfg.width, cfg.height, _seed(cfg.seed, 0, i))
        unaltered.append(image_statistics(img, cfg, provider))

    sizes = {}
    for block in cfg.block_sizes:
        forged = []
        for i in range(cfg.n_forged):
            h, d = _donor_model(i, M)
            host = render(models[h], cfg.width, cfg.height, _seed(cfg.seed, 1, i))
            donor = render(models[d], cfg.width, cfg.height, _seed(cfg.seed, 2, i))
            case = make_forgery(host, donor, block, _seed(cfg.seed, 3, i))
            forged.append(image_statistics(case.forged_image, cfg, provider))
        labels = np.r_[np.zeros(len(unaltered)), np.ones(len(forged))]
        per_method = {}
        for method in cfg.methods:
            scores = np.array([s[method] for s in unaltered] + [s[method] for s in forged])
            pol = POLARITY[method]
            pfa_pts, pd_pts = roc_curve(scores, labels, pol)
            per_method[method] = {
                "auc": roc_auc(scores, labels, pol),
                "map": mean_average_precision(scores, labels, pol),
                "pd_at_pfa": pd_at_pfa(scores, labels, cfg.pfa, pol),
                "mean_statistic_forged": float(np.mean(scores[labels == 1])),
                "mean_statistic_unaltered": float(np.mean(scores[labels == 0])),
                "roc": [[float(a), float(b)] for a, b in zip(pfa_pts, pd_pts)],
            }
        sizes[str(block)] = {"block_size": block, "relative_area": block**2 / cfg.patch_size**2, "methods": per_method}

    cfg_dict = asdict(cfg)
    cfg_dict["models"] = [asdict(m) for m in cfg.models]
    report = {"config": cfg_dict, "pfa": cfg.pfa, "sizes": sizes}
    if "spectral-gap" in cfg.methods:
        report["relative_size_auc"] = [
            {"relative_area": v["relative_area"], "auc": v["methods"]["spectral-gap"]["auc"]}
            for v in sorted(sizes.values(), key=lambda v: v["block_size"])
        ]
    if include_timing:
        report["runtime_ms"] = (time.perf_counter() - t0) * 1000.0
    return report


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def roc_csv(points) -> str:
    return "pfa,pd\n" + "".join(f"{format(a, '.17g')},{format(b, '.17g')}\n" for a, b in points)
