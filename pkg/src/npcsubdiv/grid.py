"""Finite windows of grid-indexed points with boundary extension.

GridData stores points of one backend over an integer box.  Reads outside the
window are synthesized by the extension policy; interior bookkeeping (which
output indices are free of synthesized values) is handled by the box
arithmetic helpers below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import DomainError, StructuralError
from .masks import Mask
from .spaces import SpaceDescriptor, SpacePoint, descriptor_from_json, \
    descriptor_to_json, point_from_json, point_to_json, random_point

CONSTANT_NEAREST = "constant_nearest"
PERIODIC = "periodic"
EXTENSIONS = (CONSTANT_NEAREST, PERIODIC)


def _as_box_vec(v, name="index"):
    if np.isscalar(v):
        v = (v,)
    return tuple(int(x) for x in v)


@dataclass(eq=False)
class GridData:
    """Points indexed by the integer box lo..hi (inclusive), row-major storage."""

    descriptor: SpaceDescriptor
    lo: tuple
    hi: tuple
    points: np.ndarray  # object array, shape hi - lo + 1
    extension: str

    def __post_init__(self):
        self.lo = _as_box_vec(self.lo)
        self.hi = _as_box_vec(self.hi)
        if len(self.lo) != len(self.hi):
            raise StructuralError("window corners disagree in length")
        if any(h < l for l, h in zip(self.lo, self.hi)):
            raise StructuralError("empty window")
        if self.extension not in EXTENSIONS:
            raise StructuralError(f"unknown extension policy {self.extension!r}")
        shape = tuple(h - l + 1 for l, h in zip(self.lo, self.hi))
        if self.points.shape != shape:
            raise StructuralError(
                f"points shape {self.points.shape} does not match window {shape}")

    @property
    def dim(self) -> int:
        return len(self.lo)

    def window(self):
        return self.lo, self.hi

    def indices(self):
        for local in product(*(range(h - l + 1) for l, h in zip(self.lo, self.hi))):
            yield tuple(l + o for l, o in zip(local, self.lo))

    def get(self, index) -> SpacePoint:
        index = _as_box_vec(index)
        if len(index) != self.dim:
            raise StructuralError(f"index length {len(index)}, expected {self.dim}")
        local = []
        for i, l, h in zip(index, self.lo, self.hi):
            if i < l or i > h:
                if self.extension == CONSTANT_NEAREST:
                    i = min(max(i, l), h)
                else:
                    i = (i - l) % (h - l + 1) + l
            local.append(i - l)
        return self.points[tuple(local)]


def grid_from_function(descriptor, lo, hi, fn, extension=CONSTANT_NEAREST) -> GridData:
    lo, hi = _as_box_vec(lo), _as_box_vec(hi)
    shape = tuple(h - l + 1 for l, h in zip(lo, hi))
    pts = np.empty(shape, dtype=object)
    for local in product(*(range(n) for n in shape)):
        idx = tuple(l + o for l, o in zip(local, lo))
        pt = fn(idx)
        if pt.descriptor != descriptor:
            raise StructuralError(
                f"point at {idx} has descriptor {pt.descriptor}, expected {descriptor}")
        pts[local] = pt
    return GridData(descriptor, lo, hi, pts, extension)


def grid_from_points(descriptor, lo, hi, points, extension=CONSTANT_NEAREST) -> GridData:
    """Builds a grid from a row-major flat list of points."""
    lo, hi = _as_box_vec(lo), _as_box_vec(hi)
    shape = tuple(h - l + 1 for l, h in zip(lo, hi))
    flat = list(points)
    if len(flat) != int(np.prod(shape)):
        raise StructuralError(
            f"{len(flat)} points supplied for window of size {int(np.prod(shape))}")
    pts = np.empty(shape, dtype=object)
    for k, local in enumerate(product(*(range(n) for n in shape))):
        if flat[k].descriptor != descriptor:
            raise StructuralError("all points must share the grid descriptor")
        pts[local] = flat[k]
    return GridData(descriptor, lo, hi, pts, extension)


def random_grid(descriptor, lo, hi, rng, extension=CONSTANT_NEAREST) -> GridData:
    return grid_from_function(descriptor, lo, hi,
                              lambda idx: random_point(descriptor, rng), extension)


# -- box arithmetic -----------------------------------------------------------

def refined_window(lo, hi):
    """Output window of one subdivision step: the doubled box."""
    return tuple(2 * l for l in lo), tuple(2 * h for h in hi)


def refined_interior(mask: Mask, lo, hi):
    """Output indices whose stencil only reads inside lo..hi and that the
    doubled window actually stores.

    With support box [Mlo, Mhi], output index i needs inputs j in
    [ceil((i-Mhi)/2), floor((i-Mlo)/2)]; requiring that range inside the box
    gives i in [2*lo + Mhi - 1, 2*hi + Mlo + 1].  For one-sided masks that
    range can overrun the doubled box [2*lo, 2*hi], where values are not
    stored, so each side is clamped to it.  May come back empty.
    """
    mlo, mhi = mask.support_box()
    out_lo = tuple(2 * l + max(mh - 1, 0) for l, mh in zip(lo, mhi))
    out_hi = tuple(2 * h + min(ml + 1, 0) for h, ml in zip(hi, mlo))
    return out_lo, out_hi


def box_is_empty(lo, hi) -> bool:
    return any(h < l for l, h in zip(lo, hi))


def box_intersect(a, b):
    lo = tuple(max(x, y) for x, y in zip(a[0], b[0]))
    hi = tuple(min(x, y) for x, y in zip(a[1], b[1]))
    return lo, hi


def box_indices(lo, hi):
    if box_is_empty(lo, hi):
        return
    for idx in product(*(range(l, h + 1) for l, h in zip(lo, hi))):
        yield idx


def minimal_window_width(mask: Mask, levels: int) -> int:
    """Smallest hi-lo gap whose interior survives the given number of levels.

    Each refinement shrinks the gap by need = max(Mhi-1, 0) - min(Mlo+1, 0)
    (the clamped per-side margins of refined_interior), so the level-n gap is
    2^n*(width - need) + need; solving for >= 0 gives the bound below.
    """
    mlo, mhi = mask.support_box()
    need = max(max(mh - 1, 0) - min(ml + 1, 0) for ml, mh in zip(mlo, mhi))
    if need <= 0:
        return 0
    return math.ceil(need * (1.0 - 0.5 ** levels))


def check_interior_depth(mask: Mask, lo, hi, levels: int):
    """Interior boxes for levels 0..levels; raises when one becomes empty."""
    boxes = [(tuple(lo), tuple(hi))]
    for n in range(levels):
        nxt = refined_interior(mask, *boxes[-1])
        if box_is_empty(*nxt):
            raise DomainError(
                f"interior vanishes at level {n + 1}; window needs per-axis "
                f"hi-lo >= {minimal_window_width(mask, levels)}")
        boxes.append(nxt)
    return boxes


# -- JSON ----------------------------------------------------------------------

def grid_to_json(x: GridData) -> dict:
    return {"descriptor": descriptor_to_json(x.descriptor),
            "window": {"lo": list(x.lo), "hi": list(x.hi)},
            "extension": x.extension,
            "points": [point_to_json(x.get(i)) for i in x.indices()]}


def grid_from_json(obj: dict) -> GridData:
    try:
        desc = descriptor_from_json(obj["descriptor"])
        lo = tuple(obj["window"]["lo"])
        hi = tuple(obj["window"]["hi"])
        extension = obj["extension"]
        points = [point_from_json(desc, p) for p in obj["points"]]
    except (KeyError, TypeError) as exc:
        raise StructuralError("bad grid object") from exc
    return grid_from_points(desc, lo, hi, points, extension)
