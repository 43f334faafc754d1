"""Uniform resampling of factor coordinates inside a category's box.

Each channel is drawn independently and uniformly between the category's
observed extremes, then mapped back to a latent through the basis. No
labeler is consulted, so boxes may contain points the labeler would put in
another category.
"""

import numpy as np

from . import rng
from .coords import reconstruct_batch
from .errors import EmptyCategoryError, InvalidArgumentError
from .semantics import CATEGORY_NAMES, N_CATEGORIES


def _count(n):
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise InvalidArgumentError(f"sample count must be a nonnegative integer, got {n!r}")
    return int(n)


def sample_uniform_box(table, category, n, seed):
    """``(n, k)`` coordinates uniform in the closed box of ``category``.

    Sample ``i``, channel ``j`` uses the counter ``(i, j, category)`` under key
    ``seed``; value is ``lo + u * (hi - lo)`` with ``u`` in ``[0, 1)``, capped
    at ``hi`` against rounding.
    """
    n = _count(n)
    if not isinstance(category, (int, np.integer)) or not 0 <= category < N_CATEGORIES:
        raise EmptyCategoryError(f"unknown category {category!r}")
    if category not in table:
        raise EmptyCategoryError(f"category {CATEGORY_NAMES[category]} has no observed samples")
    box = table[category]
    u = rng.uniforms(seed, int(category), 0, n, table.k)
    return np.minimum(box.lo + u * (box.hi - box.lo), box.hi)


def generate_for_category(table, basis, category, n, seed):
    """Latents ``F @ alpha`` for ``n`` box samples of ``category``."""
    if table.k != basis.k:
        raise InvalidArgumentError(f"range table has k={table.k}, basis has k={basis.k}")
    return reconstruct_batch(basis, sample_uniform_box(table, category, n, seed))
