"""Quality indicators for objective-space point sets."""

from __future__ import annotations

import numpy as np

from evoflow.errors import InvalidArgument, ShapeError
from evoflow.tensor import as_matrix, as_vector


def igd(approx, reference, chunk: int = 4096) -> float:
    """Inverted generational distance: mean over reference points of the distance to the nearest approximation point."""
    approx = as_matrix(approx, "approx")
    reference = as_matrix(reference, "reference")
    if approx.shape[0] == 0 or reference.shape[0] == 0:
        raise InvalidArgument("igd needs non-empty point sets")
    if approx.shape[1] != reference.shape[1]:
        raise ShapeError("igd point sets differ in objective count")
    nearest = np.empty(reference.shape[0])
    for start in range(0, reference.shape[0], chunk):
        diff = reference[start : start + chunk, None, :] - approx[None, :, :]
        nearest[start : start + chunk] = np.sqrt(np.min(np.sum(diff * diff, axis=2), axis=1))
    return float(np.mean(nearest))


def hypervolume_2d(front, ref_point) -> float:
    """Exact area dominated by a two-objective point set and bounded by ``ref_point``.

    Points are swept by ascending first objective; a point adds the strip
    between its second objective and the lowest one seen so far, so dominated
    points add nothing.
    """
    front = as_matrix(front, "front")
    ref = as_vector(ref_point, "ref_point")
    if front.shape[1] != 2 or ref.size != 2:
        raise ShapeError("hypervolume_2d needs two objectives")
    weak = np.all(front <= ref, axis=1) & np.any(front < ref, axis=1)
    if not np.all(weak):
        bad = int(np.flatnonzero(~weak)[0])
        raise InvalidArgument(f"point {bad} does not dominate the reference point")
    order = np.lexsort((front[:, 1], front[:, 0]))
    area = 0.0
    level = ref[1]
    for f1, f2 in front[order]:
        if f2 < level:
            area += (ref[0] - f1) * (level - f2)
            level = f2
    return float(area)
