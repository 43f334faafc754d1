"""Synthetic end-to-end experiment: box resampling vs. rejection sampling.

A linear two-stage generator stands in for a style-based GAN: noise ``z``
is mapped to a latent ``w = M_map z + b_map`` and rendered to an "image"
vector ``x = M_syn w + b_syn``. The baseline draws ``z`` from the standard
normal, labels each image and keeps it until every category holds its
quota. The resampling method projects the kept latents onto the factor
basis of ``M_map``, takes per-category coordinate boxes and draws uniformly
inside them. Both sets are scored for diversity (mean pairwise image
distance) and for label retention.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import formats, kernels, matcore, rng
from .basis import compute_basis
from .coords import project_batch
from .errors import (
    BudgetExhaustedError,
    FormatError,
    InvalidArgumentError,
    InvalidInputError,
)
from .sampler import generate_for_category
from .semantics import (
    CATEGORY_NAMES,
    N_CATEGORIES,
    LabelerSpec,
    compute_ranges,
    label_indices,
)

THREADS_ENV = "FACTORFORGE_THREADS"


def worker_threads(default=None):
    """Worker cap from ``FACTORFORGE_THREADS``; results never depend on it."""
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw == "":
        return default or min(N_CATEGORIES, os.cpu_count() or 1)
    try:
        value = int(raw)
    except ValueError:
        value = 0
    if value < 1:
        raise InvalidArgumentError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return value


# -- generator stand-in ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GeneratorSpec:
    mapping: np.ndarray
    mapping_offset: np.ndarray
    synthesis: np.ndarray
    synthesis_offset: np.ndarray

    def __post_init__(self):
        arrays = {}
        for name in ("mapping", "mapping_offset", "synthesis", "synthesis_offset"):
            arr = np.array(getattr(self, name), dtype=np.float64)
            if not np.isfinite(arr).all():
                raise InvalidInputError(f"{name} has non-finite entries")
            arr.setflags(write=False)
            arrays[name] = arr
        M, b, S, c = (arrays[n] for n in ("mapping", "mapping_offset", "synthesis", "synthesis_offset"))
        if M.ndim != 2 or M.shape[0] != M.shape[1] or b.shape != (M.shape[0],):
            raise InvalidInputError(f"mapping must be d x d with a length-d offset, got {M.shape}, {b.shape}")
        if S.ndim != 2 or S.shape[1] != M.shape[0] or c.shape != (S.shape[0],):
            raise InvalidInputError(f"synthesis must be p x d with a length-p offset, got {S.shape}, {c.shape}")
        for name, arr in arrays.items():
            object.__setattr__(self, name, arr)

    @property
    def dim(self):
        return self.mapping.shape[0]

    @property
    def image_dim(self):
        return self.synthesis.shape[0]

    def map_noise(self, Z):
        return matcore.affine_rows(Z, self.mapping, self.mapping_offset)

    def render(self, latents):
        """Images for an ``(n, d)`` latent batch; row-independent bitwise."""
        latents = np.asarray(latents, dtype=np.float64)
        if latents.ndim != 2 or latents.shape[1] != self.dim:
            raise InvalidArgumentError(f"latents must have shape (n, {self.dim}), got {latents.shape}")
        return matcore.affine_rows(latents, self.synthesis, self.synthesis_offset)


def synth_generate(spec, w):
    """Image vector ``M_syn @ w + b_syn`` for one latent."""
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 1 or w.shape[0] != spec.dim:
        raise InvalidArgumentError(f"latent must have shape ({spec.dim},), got {w.shape}")
    return spec.render(w[None, :])[0]


def synthetic_model(dim=64, image_dim=64, model_seed=0, age_mean=45.0, age_std=15.0):
    """Random generator plus a labeler with analytically known category odds.

    The composite maps from noise to gender and age scores are orthogonal,
    so under ``z ~ N(0, I)`` gender is a fair coin independent of age, and
    age is ``N(age_mean, age_std**2)``. With the defaults every category has
    probability above 7%.
    """
    if dim < 2 or image_dim < dim:
        raise InvalidArgumentError("need dim >= 2 and image_dim >= dim")
    g = np.random.default_rng(model_seed)
    U, _ = np.linalg.qr(g.standard_normal((dim, dim)))
    V, _ = np.linalg.qr(g.standard_normal((dim, dim)))
    spectrum = np.geomspace(3.0, 0.3, dim)
    mapping = (U * spectrum) @ V.T
    mapping_offset = 0.1 * g.standard_normal(dim)
    synthesis = g.standard_normal((image_dim, dim)) / math.sqrt(dim)
    synthesis_offset = 0.1 * g.standard_normal(image_dim)
    spec = GeneratorSpec(mapping, mapping_offset, synthesis, synthesis_offset)

    composite = synthesis @ mapping
    mean_image = synthesis @ mapping_offset + synthesis_offset
    a_dir, g_dir = np.linalg.qr(g.standard_normal((dim, 2)))[0].T
    pinv = np.linalg.pinv(composite.T)
    u_age = age_std * (pinv @ a_dir)
    u_gender = pinv @ g_dir
    labeler = LabelerSpec(
        gender_weights=u_gender,
        gender_offset=-float(u_gender @ mean_image),
        age_weights=u_age,
        age_offset=age_mean - float(u_age @ mean_image),
    )
    return spec, labeler


def category_probabilities(labeler, spec):
    """Exact category probabilities of the labeler under ``z ~ N(0, I)``.

    Valid when the two composite functionals are orthogonal in noise space
    (true for :func:`synthetic_model`); raises otherwise.
    """
    composite = spec.synthesis @ spec.mapping
    mean_image = spec.synthesis @ spec.mapping_offset + spec.synthesis_offset
    a = composite.T @ labeler.age_weights
    gvec = composite.T @ labeler.gender_weights
    if abs(a @ gvec) > 1e-9 * np.linalg.norm(a) * np.linalg.norm(gvec):
        raise InvalidArgumentError("gender and age scores are correlated; no closed form")
    age_mu = labeler.age_weights @ mean_image + labeler.age_offset
    age_sd = np.linalg.norm(a)
    g_mu = labeler.gender_weights @ mean_image + labeler.gender_offset
    g_sd = np.linalg.norm(gvec)

    def phi(x):
        return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))

    p_male = 1.0 - phi(-g_mu / g_sd)
    p_young = phi((labeler.young_threshold - age_mu) / age_sd)
    p_old = 1.0 - phi((labeler.old_threshold - age_mu) / age_sd)
    bands = (p_young, 1.0 - p_young - p_old, p_old)
    return [(1.0 - p_male) * b for b in bands] + [p_male * b for b in bands]


def save_model(directory, spec, labeler):
    """Write ``model.json`` plus FCK1 arrays into ``directory``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    files = {
        "mapping": spec.mapping,
        "mapping_offset": spec.mapping_offset,
        "synthesis": spec.synthesis,
        "synthesis_offset": spec.synthesis_offset,
        "gender_weights": labeler.gender_weights,
        "age_weights": labeler.age_weights,
    }
    for name, arr in files.items():
        formats.write_matrix(d / f"{name}.fck", arr)
    doc = {
        "generator": {n: f"{n}.fck" for n in ("mapping", "mapping_offset", "synthesis", "synthesis_offset")},
        "labeler": {
            "gender_weights": "gender_weights.fck",
            "gender_offset": labeler.gender_offset,
            "age_weights": "age_weights.fck",
            "age_offset": labeler.age_offset,
            "young_threshold": labeler.young_threshold,
            "old_threshold": labeler.old_threshold,
        },
    }
    path = d / "model.json"
    formats.write_json(path, doc)
    return path


def load_model(path):
    """Read a ``model.json``; matrix paths resolve relative to its folder."""
    path = Path(path)
    doc = formats.read_json(path)
    base = path.parent
    try:
        gen = doc["generator"]
        lab = doc["labeler"]

        def mat(rel):
            return formats.read_matrix(base / rel)

        def vec(rel):
            m = mat(rel)
            if m.shape[0] != 1:
                raise FormatError(f"{rel}: expected a 1 x n vector")
            return m[0]

        spec = GeneratorSpec(
            mat(gen["mapping"]), vec(gen["mapping_offset"]),
            mat(gen["synthesis"]), vec(gen["synthesis_offset"]),
        )
        labeler = LabelerSpec(
            vec(lab["gender_weights"]), float(lab["gender_offset"]),
            vec(lab["age_weights"]), float(lab["age_offset"]),
            float(lab.get("young_threshold", 30.0)), float(lab.get("old_threshold", 60.0)),
        )
    except FormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: invalid model file: {exc!r}") from exc
    if labeler.dim != spec.image_dim:
        raise FormatError(f"{path}: labeler dim {labeler.dim} != image dim {spec.image_dim}")
    return spec, labeler


# -- rejection baseline ------------------------------------------------------


@dataclass
class BaselineResult:
    """Accepted latents per category in draw order.

    ``fill_draws[c]`` is the number of draws consumed when category ``c``
    reached its quota; ``draws`` is the total.
    """

    batches: dict
    fill_draws: dict
    draws: int

    def labels(self):
        return [c for c in sorted(self.batches) for _ in range(len(self.batches[c]))]

    def stacked(self):
        return np.concatenate([self.batches[c] for c in sorted(self.batches)], axis=0)


def baseline_collect(spec, labeler, n_per_category, seed, max_draws, chunk=8192):
    """Sample noise, map, render, label, keep until each category has ``n``.

    Draw ``i`` uses noise from stream ``BASELINE_STREAM`` at sample index ``i``.
    Raises BudgetExhaustedError naming the short categories if ``max_draws``
    runs out first.
    """
    if isinstance(n_per_category, bool) or int(n_per_category) != n_per_category or n_per_category < 1:
        raise InvalidArgumentError(f"n_per_category must be >= 1, got {n_per_category!r}")
    if int(max_draws) != max_draws or max_draws < n_per_category:
        raise InvalidArgumentError("max_draws must be an integer >= n_per_category")
    if labeler.dim != spec.image_dim:
        raise InvalidArgumentError(f"labeler expects {labeler.dim}-dim images, generator makes {spec.image_dim}")
    n = int(n_per_category)
    max_draws = int(max_draws)
    seed = rng.check_seed(seed)
    kept = {c: [] for c in range(N_CATEGORIES)}
    have = dict.fromkeys(range(N_CATEGORIES), 0)
    fill = {}
    start = 0
    while start < max_draws and len(fill) < N_CATEGORIES:
        m = min(chunk, max_draws - start)
        Z = rng.normals(seed, rng.BASELINE_STREAM, start, m, spec.dim)
        W = spec.map_noise(Z)
        cats, _ = label_indices(labeler, spec.render(W))
        for c in range(N_CATEGORIES):
            need = n - have[c]
            if need == 0:
                continue
            rows = np.flatnonzero(cats == c)[:need]
            if rows.size:
                kept[c].append(W[rows])
                have[c] += rows.size
                if have[c] == n:
                    fill[c] = start + int(rows[-1]) + 1
        start += m
    if len(fill) < N_CATEGORIES:
        short = [CATEGORY_NAMES[c] for c in range(N_CATEGORIES) if c not in fill]
        raise BudgetExhaustedError(
            f"{max_draws} draws did not fill: {', '.join(short)}",
            unfilled=short,
            draws=max_draws,
            filled={CATEGORY_NAMES[c]: d for c, d in sorted(fill.items())},
        )
    batches = {c: np.concatenate(kept[c], axis=0) for c in range(N_CATEGORIES)}
    return BaselineResult(batches, fill, max(fill.values()))


# -- scoring -----------------------------------------------------------------


class DistanceMetric:
    """Pairwise distance between image vectors.

    Subclasses implement ``__call__``; ``one_to_many`` and ``mean_pairwise``
    have generic fallbacks built on it.
    """

    name = "custom"

    def __call__(self, a, b):
        raise NotImplementedError

    def one_to_many(self, a, B):
        return np.array([self(a, b) for b in B], dtype=np.float64)

    def mean_pairwise(self, X):
        n = X.shape[0]
        total = 0.0
        for i in range(n - 1):
            d = self.one_to_many(X[i], X[i + 1:])
            total = total + float(np.cumsum(d)[-1])
        return total / (n * (n - 1) / 2.0)


class EuclideanMetric(DistanceMetric):
    name = "euclidean"

    def __call__(self, a, b):
        diff = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
        return float(np.sqrt(diff @ diff))

    def one_to_many(self, a, B):
        D = B - a
        return np.sqrt(np.einsum("ij,ij->i", D, D))

    def mean_pairwise(self, X):
        return float(kernels.mean_pairwise_euclidean(X))


class ManhattanMetric(DistanceMetric):
    name = "manhattan"

    def __call__(self, a, b):
        return float(np.abs(np.asarray(a, dtype=np.float64) - b).sum())

    def one_to_many(self, a, B):
        return np.abs(B - a).sum(axis=1)


class CosineMetric(DistanceMetric):
    """``1 - cos(a, b)``; zero vectors are at distance 1 from everything."""

    name = "cosine"

    def __call__(self, a, b):
        return float(self.one_to_many(np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)[None])[0])

    def one_to_many(self, a, B):
        na = np.linalg.norm(a)
        nb = np.linalg.norm(B, axis=1)
        denom = na * nb
        sim = np.divide(B @ a, denom, out=np.zeros(B.shape[0]), where=denom > 0)
        return 1.0 - sim


class CallableMetric(DistanceMetric):
    def __init__(self, fn, name=None):
        self._fn = fn
        self.name = name or getattr(fn, "__name__", "custom")

    def __call__(self, a, b):
        return float(self._fn(a, b))


METRICS = {m.name: m for m in (EuclideanMetric(), ManhattanMetric(), CosineMetric())}


def get_metric(metric):
    if isinstance(metric, DistanceMetric):
        return metric
    if isinstance(metric, str):
        try:
            return METRICS[metric]
        except KeyError:
            raise InvalidArgumentError(
                f"unknown metric {metric!r}; choose from {', '.join(METRICS)}"
            ) from None
    if callable(metric):
        return CallableMetric(metric)
    raise InvalidArgumentError(f"not a metric: {metric!r}")


def mean_pairwise_distance(images, metric="euclidean"):
    """Average ``metric`` over all unordered pairs of images."""
    try:
        X = np.ascontiguousarray(np.asarray(images, dtype=np.float64))
    except ValueError as exc:
        raise InvalidArgumentError(f"images must share one dimension: {exc}") from exc
    if X.ndim != 2:
        raise InvalidArgumentError(f"expected a list of equal-length vectors, got shape {X.shape}")
    if X.shape[0] < 2:
        raise InvalidArgumentError("need at least two images for a pairwise mean")
    return get_metric(metric).mean_pairwise(X)


def retention_rate(latents, spec, labeler, category):
    """Fraction of latents whose rendered image is labeled ``category``."""
    latents = np.asarray(latents, dtype=np.float64)
    if latents.ndim != 2 or latents.shape[0] == 0:
        raise InvalidArgumentError("retention needs a non-empty (n, d) latent batch")
    if not 0 <= category < N_CATEGORIES:
        raise InvalidArgumentError(f"category index must be in 0..5, got {category}")
    cats, _ = label_indices(labeler, spec.render(latents))
    return int(np.count_nonzero(cats == category)) / latents.shape[0]


# -- full comparison ---------------------------------------------------------


@dataclass
class ExperimentConfig:
    dim: int = 64
    image_dim: int = 64
    k: int | None = None
    n_per_category: int = 1000
    seed: int = 1
    model_seed: int = 0
    metric: str = "euclidean"
    max_draws: int = 10 ** 6

    def validate(self):
        for name in ("dim", "image_dim", "n_per_category", "max_draws"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise InvalidArgumentError(f"{name} must be a positive integer, got {value!r}")
        if self.n_per_category < 2:
            raise InvalidArgumentError("n_per_category must be >= 2 to score diversity")
        if self.k is not None and not 1 <= self.k <= self.dim:
            raise InvalidArgumentError(f"k must be in [1, {self.dim}]")
        rng.check_seed(self.seed)
        rng.check_seed(self.model_seed)
        get_metric(self.metric)


@dataclass
class CategoryResult:
    index: int
    name: str
    ours_diversity: float
    baseline_diversity: float
    retention: float
    n_ours: int
    n_baseline: int


@dataclass
class ExperimentReport:
    seed: int
    metric: str
    categories: list = field(default_factory=list)
    dim: int = 0
    k: int = 0
    model_seed: int = 0
    baseline_draws: int = 0

    def to_json(self):
        return {
            "seed": self.seed,
            "metric": self.metric,
            "dim": self.dim,
            "k": self.k,
            "model_seed": self.model_seed,
            "baseline_draws": self.baseline_draws,
            "categories": [asdict(c) for c in self.categories],
        }

    def dumps(self):
        return formats.dump_json(self.to_json())

    def table(self):
        """Plain-text summary: diversity by age band and gender, then retention."""
        by = {c.index: c for c in self.categories}
        bands = ("Young", "Middle-aged", "Old")
        lines = [
            f"Diversity ({self.metric} mean pairwise distance), seed {self.seed}",
            f"{'':<12}{'Ours':>24}{'Rejection baseline':>26}",
            f"{'':<12}{'Female':>12}{'Male':>12}{'Female':>13}{'Male':>13}",
        ]
        for b, band in enumerate(bands):
            f, m = by[b], by[3 + b]
            lines.append(
                f"{band:<12}{f.ours_diversity:>12.4f}{m.ours_diversity:>12.4f}"
                f"{f.baseline_diversity:>13.4f}{m.baseline_diversity:>13.4f}"
            )
        lines.append("")
        lines.append("Label retention of resampled latents")
        lines.append(f"{'':<12}{'Young':>10}{'Middle-aged':>14}{'Old':>10}")
        for g, gname in enumerate(("Female", "Male")):
            cells = "".join(
                f"{100 * by[3 * g + b].retention:>{w}.1f}%" for b, w in zip(range(3), (9, 13, 9))
            )
            lines.append(f"{gname:<12}{cells}")
        return "\n".join(lines) + "\n"


def run_comparison(config=None, spec=None, labeler=None):
    """Run the full experiment and return an :class:`ExperimentReport`.

    The generator and labeler come from :func:`synthetic_model` unless both
    are supplied. Every number in the report is a function of the config.
    """
    config = config or ExperimentConfig()
    config.validate()
    if (spec is None) != (labeler is None):
        raise InvalidArgumentError("pass both spec and labeler, or neither")
    if spec is None:
        spec, labeler = synthetic_model(config.dim, config.image_dim, config.model_seed)
    metric = get_metric(config.metric)
    basis = compute_basis(spec.mapping, config.k)
    base = baseline_collect(spec, labeler, config.n_per_category, config.seed, config.max_draws)
    coords = {c: project_batch(basis, batch) for c, batch in base.batches.items()}
    table = compute_ranges(coords)

    def score(c):
        ours = generate_for_category(table, basis, c, config.n_per_category, config.seed)
        theirs = base.batches[c]
        return CategoryResult(
            index=c,
            name=CATEGORY_NAMES[c],
            ours_diversity=float(metric.mean_pairwise(spec.render(ours))),
            baseline_diversity=float(metric.mean_pairwise(spec.render(theirs))),
            retention=retention_rate(ours, spec, labeler, c),
            n_ours=int(ours.shape[0]),
            n_baseline=int(theirs.shape[0]),
        )

    with ThreadPoolExecutor(max_workers=worker_threads()) as pool:
        results = list(pool.map(score, range(N_CATEGORIES)))
    return ExperimentReport(
        seed=config.seed,
        metric=metric.name,
        categories=results,
        dim=spec.dim,
        k=basis.k,
        model_seed=config.model_seed,
        baseline_draws=base.draws,
    )
