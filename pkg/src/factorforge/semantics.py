"""Semantic labels, the linear stand-in labeler, and per-category range tables.

Six categories form a gender x age-band grid, indexed row-major::

    0 female_young   1 female_middle   2 female_old
    3 male_young     4 male_middle     5 male_old

Age bands: young below ``young_threshold``, middle on the closed interval
``[young_threshold, old_threshold]``, old above ``old_threshold``.
"""

import enum
from dataclasses import dataclass

import numpy as np

from . import formats
from .errors import EmptyDataError, FormatError, InvalidArgumentError, InvalidInputError

N_CATEGORIES = 6


class Gender(enum.IntEnum):
    FEMALE = 0
    MALE = 1


class AgeBand(enum.IntEnum):
    YOUNG = 0
    MIDDLE = 1
    OLD = 2


CATEGORY_NAMES = tuple(
    f"{g.name.lower()}_{a.name.lower()}" for g in Gender for a in AgeBand
)


def category_index(name):
    """Index of a category name such as ``"male_old"``; -1 if unknown."""
    try:
        return CATEGORY_NAMES.index(name)
    except ValueError:
        return -1


@dataclass(frozen=True)
class SemanticLabel:
    gender: Gender
    age_band: AgeBand

    @property
    def category_index(self):
        return 3 * int(self.gender) + int(self.age_band)

    @property
    def name(self):
        return CATEGORY_NAMES[self.category_index]

    @classmethod
    def from_index(cls, index):
        if not 0 <= index < N_CATEGORIES:
            raise InvalidArgumentError(f"category index must be in 0..5, got {index}")
        return cls(Gender(index // 3), AgeBand(index % 3))


@dataclass(frozen=True, eq=False)
class LabelerSpec:
    """Linear labeler: ``u_g . x + b_g > 0`` is male; ``u_a . x + b_a`` is age."""

    gender_weights: np.ndarray
    gender_offset: float
    age_weights: np.ndarray
    age_offset: float
    young_threshold: float = 30.0
    old_threshold: float = 60.0

    def __post_init__(self):
        ug = np.array(self.gender_weights, dtype=np.float64)
        ua = np.array(self.age_weights, dtype=np.float64)
        if ug.ndim != 1 or ug.shape != ua.shape or ug.size == 0:
            raise InvalidInputError(
                f"labeler functionals must be equal-length vectors, got {ug.shape} and {ua.shape}"
            )
        scalars = (self.gender_offset, self.age_offset, self.young_threshold, self.old_threshold)
        if not (np.isfinite(ug).all() and np.isfinite(ua).all() and np.isfinite(scalars).all()):
            raise InvalidInputError("labeler parameters must be finite")
        if not self.young_threshold < self.old_threshold:
            raise InvalidInputError("young_threshold must be below old_threshold")
        ug.setflags(write=False)
        ua.setflags(write=False)
        object.__setattr__(self, "gender_weights", ug)
        object.__setattr__(self, "age_weights", ua)
        for name in ("gender_offset", "age_offset", "young_threshold", "old_threshold"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def dim(self):
        return self.gender_weights.shape[0]


def _functional(X, u, b):
    # fixed summation order so a row's score never depends on its batch
    acc = X[:, 0] * u[0]
    for j in range(1, u.shape[0]):
        acc = acc + X[:, j] * u[j]
    return acc + b


def age_band(score, young_threshold=30.0, old_threshold=60.0):
    if score < young_threshold:
        return AgeBand.YOUNG
    if score > old_threshold:
        return AgeBand.OLD
    return AgeBand.MIDDLE


def score_images(spec, images):
    """Gender and age scores for an ``(n, p)`` image batch."""
    images = np.asarray(images, dtype=np.float64)
    if images.ndim != 2 or images.shape[1] != spec.dim:
        raise InvalidArgumentError(
            f"images must have shape (n, {spec.dim}), got {images.shape}"
        )
    return (
        _functional(images, spec.gender_weights, spec.gender_offset),
        _functional(images, spec.age_weights, spec.age_offset),
    )


def label_indices(spec, images):
    """Category index per image row, with the age scores; vectorised."""
    gender, age = score_images(spec, images)
    band = np.where(age < spec.young_threshold, 0, np.where(age > spec.old_threshold, 2, 1))
    return 3 * (gender > 0).astype(np.int64) + band, age


def assign_label(spec, image):
    """Label one image vector; returns ``(SemanticLabel, age_score)``."""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 1 or image.shape[0] != spec.dim:
        raise InvalidArgumentError(
            f"image must have shape ({spec.dim},), got {image.shape}"
        )
    gender, age = score_images(spec, image[None, :])
    score = float(age[0])
    g = Gender.MALE if gender[0] > 0 else Gender.FEMALE
    return SemanticLabel(g, age_band(score, spec.young_threshold, spec.old_threshold)), score


def partition_by_label(coords, labels):
    """Group coordinate rows by category.

    ``labels`` holds :class:`SemanticLabel` objects or integer category
    indices. Returns ``{index: (m, k) array}`` for present categories only,
    rows in input order.
    """
    coords = np.asarray(coords, dtype=np.float64)
    labels = list(labels)
    if coords.ndim == 1 and coords.size == 0:
        coords = coords.reshape(0, 0)
    if coords.ndim != 2 or coords.shape[0] != len(labels):
        raise InvalidArgumentError(
            f"{len(labels)} labels for coordinates of shape {coords.shape}"
        )
    idx = np.array(
        [lab.category_index if isinstance(lab, SemanticLabel) else int(lab) for lab in labels],
        dtype=np.int64,
    )
    if idx.size and (idx.min() < 0 or idx.max() >= N_CATEGORIES):
        raise InvalidArgumentError("category indices must be in 0..5")
    return {int(c): coords[idx == c] for c in range(N_CATEGORIES) if np.any(idx == c)}


@dataclass(frozen=True, eq=False)
class CategoryRange:
    lo: np.ndarray
    hi: np.ndarray
    count: int


class CategoryRangeTable:
    """Per-category, per-channel closed intervals ``[lo, hi]``.

    Categories never observed are absent; ``table[c]`` raises ``KeyError``
    for them.
    """

    def __init__(self, k, ranges):
        self.k = int(k)
        self._ranges = {}
        for c in sorted(ranges):
            r = ranges[c]
            lo = np.array(r.lo, dtype=np.float64)
            hi = np.array(r.hi, dtype=np.float64)
            if not 0 <= c < N_CATEGORIES:
                raise InvalidInputError(f"category index {c} out of range")
            if lo.shape != (self.k,) or hi.shape != (self.k,):
                raise InvalidInputError(f"category {c}: bounds must have length {self.k}")
            if int(r.count) < 1:
                raise InvalidInputError(f"category {c}: count must be >= 1")
            if not (np.isfinite(lo).all() and np.isfinite(hi).all()) or np.any(lo > hi):
                raise InvalidInputError(f"category {c}: need finite bounds with min <= max")
            lo.setflags(write=False)
            hi.setflags(write=False)
            self._ranges[int(c)] = CategoryRange(lo, hi, int(r.count))

    def __contains__(self, c):
        return c in self._ranges

    def __getitem__(self, c):
        return self._ranges[c]

    def present(self):
        return list(self._ranges)

    def __eq__(self, other):
        if not isinstance(other, CategoryRangeTable):
            return NotImplemented
        return (
            self.k == other.k
            and self.present() == other.present()
            and all(
                a.count == b.count
                and a.lo.tobytes() == b.lo.tobytes()
                and a.hi.tobytes() == b.hi.tobytes()
                for a, b in zip(self._ranges.values(), other._ranges.values())
            )
        )

    def __repr__(self):
        cats = ", ".join(f"{CATEGORY_NAMES[c]}:{r.count}" for c, r in self._ranges.items())
        return f"CategoryRangeTable(k={self.k}, {cats})"

    def to_json(self):
        return {
            "k": self.k,
            "categories": [
                {
                    "index": c,
                    "name": CATEGORY_NAMES[c],
                    "count": r.count,
                    "min": [float(v) for v in r.lo],
                    "max": [float(v) for v in r.hi],
                }
                for c, r in self._ranges.items()
            ],
        }

    @classmethod
    def from_json(cls, obj, source="<json>"):
        try:
            k = obj["k"]
            entries = obj["categories"]
            if not isinstance(k, int) or isinstance(k, bool) or k < 1:
                raise FormatError(f"{source}: 'k' must be a positive integer")
            ranges = {}
            for e in entries:
                c = e["index"]
                if not isinstance(c, int) or not 0 <= c < N_CATEGORIES:
                    raise FormatError(f"{source}: bad category index {c!r}")
                if c in ranges:
                    raise FormatError(f"{source}: category {c} listed twice")
                if "name" in e and e["name"] != CATEGORY_NAMES[c]:
                    raise FormatError(f"{source}: name {e['name']!r} does not match index {c}")
                lo, hi, count = e["min"], e["max"], e["count"]
                if not isinstance(count, int) or isinstance(count, bool):
                    raise FormatError(f"{source}: category {c}: count must be an integer")
                if len(lo) != k or len(hi) != k:
                    raise FormatError(
                        f"{source}: category {c}: min/max lengths {len(lo)}/{len(hi)} != k={k}"
                    )
                ranges[c] = CategoryRange(
                    np.array(lo, dtype=np.float64), np.array(hi, dtype=np.float64), count
                )
            return cls(k, ranges)
        except FormatError:
            raise
        except (KeyError, TypeError, ValueError, InvalidInputError) as exc:
            raise FormatError(f"{source}: invalid range table: {exc!r}") from exc


def compute_ranges(partition, k=None):
    """Exact per-channel min and max of every non-empty category subset."""
    ranges = {}
    for c, subset in sorted(partition.items()):
        subset = np.asarray(subset, dtype=np.float64)
        if subset.shape[0] == 0:
            continue
        if k is None:
            k = subset.shape[1]
        elif subset.shape[1] != k:
            raise InvalidArgumentError(f"category {c} has {subset.shape[1]} channels, expected {k}")
        ranges[c] = CategoryRange(subset.min(axis=0), subset.max(axis=0), subset.shape[0])
    if not ranges:
        raise EmptyDataError("no category has any samples")
    return CategoryRangeTable(k, ranges)


def save_ranges(path, table):
    formats.write_json(path, table.to_json())


def load_ranges(path):
    return CategoryRangeTable.from_json(formats.read_json(path), str(path))


def ranges_io(table, path):
    """Write ``table`` as JSON and read it back."""
    save_ranges(path, table)
    return load_ranges(path)


_BAND_NAMES = ("young", "middle", "old")


def labels_to_json(labels, age_scores):
    return [
        {
            "index": i,
            "gender": lab.gender.name.lower(),
            "age_band": _BAND_NAMES[lab.age_band],
            "age_score": float(score),
        }
        for i, (lab, score) in enumerate(zip(labels, age_scores))
    ]


def labels_from_json(obj, source="<json>"):
    """Parse a label file into ``(labels, age_scores)`` ordered by ``index``."""
    try:
        rows = sorted(obj, key=lambda e: e["index"])
        if [e["index"] for e in rows] != list(range(len(rows))):
            raise FormatError(f"{source}: label indices must be 0..n-1")
        labels = [
            SemanticLabel(Gender[e["gender"].upper()], AgeBand(_BAND_NAMES.index(e["age_band"])))
            for e in rows
        ]
        scores = [float(e["age_score"]) for e in rows]
    except FormatError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise FormatError(f"{source}: invalid label file: {exc!r}") from exc
    return labels, scores


def save_labels(path, labels, age_scores):
    formats.write_json(path, labels_to_json(labels, age_scores))


def load_labels(path):
    return labels_from_json(formats.read_json(path), str(path))
