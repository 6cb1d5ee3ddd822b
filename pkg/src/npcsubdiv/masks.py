"""Nonnegative subdivision masks on the integer grid.

A mask is a finitely supported array of nonnegative coefficients indexed by
Z^s.  This module validates the basic sum rule (unit mass on every parity
coset), iterates masks under the dyadic refinement recursion, builds box
gauges from the support, and forms tensor products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .errors import NumericError, ResourceError, StructuralError

SUM_RULE_TOL = 1e-12
ITERATED_SUPPORT_CAP = 2 ** 22


@dataclass(eq=False)
class Mask:
    """Coefficients a_i >= 0 on the box offset + [0, shape); dim = s."""

    dim: int
    offset: tuple
    coeffs: np.ndarray

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=float)
        if arr.ndim != self.dim:
            raise StructuralError(
                f"coeffs must be {self.dim}-dimensional, got {arr.ndim}")
        if arr.size == 0:
            raise StructuralError("mask must not be empty")
        if not np.all(np.isfinite(arr)):
            raise NumericError("mask coefficients must be finite")
        if arr.min() < 0.0:
            raise StructuralError("mask coefficients must be nonnegative")
        if arr.max() <= 0.0:
            raise StructuralError("mask needs at least one positive coefficient")
        arr.flags.writeable = False
        self.coeffs = arr
        self.offset = tuple(int(o) for o in self.offset)
        if len(self.offset) != self.dim:
            raise StructuralError("offset length must equal dim")

    def support_box(self):
        """Bounding box (lo, hi) of the nonzero coefficients, inclusive."""
        nz = np.nonzero(self.coeffs)
        lo = tuple(int(ix.min()) + o for ix, o in zip(nz, self.offset))
        hi = tuple(int(ix.max()) + o for ix, o in zip(nz, self.offset))
        return lo, hi

    def value(self, index) -> float:
        local = tuple(int(i) - o for i, o in zip(_as_index(index, self.dim), self.offset))
        if any(l < 0 or l >= n for l, n in zip(local, self.coeffs.shape)):
            return 0.0
        return float(self.coeffs[local])

    def nonzero_items(self):
        """Yields (index tuple, coefficient) over the support."""
        for local in zip(*np.nonzero(self.coeffs)):
            idx = tuple(int(l) + o for l, o in zip(local, self.offset))
            yield idx, float(self.coeffs[local])


def _as_index(index, dim):
    if np.isscalar(index):
        index = (index,)
    index = tuple(int(i) for i in index)
    if len(index) != dim:
        raise StructuralError(f"index has length {len(index)}, expected {dim}")
    return index


def make_mask(offset, coeffs) -> Mask:
    arr = np.array(coeffs, dtype=float)
    if np.isscalar(offset):
        offset = (offset,)
    return Mask(arr.ndim, tuple(offset), arr)


def _trimmed(mask: Mask) -> Mask:
    lo, hi = mask.support_box()
    sl = tuple(slice(l - o, h - o + 1) for l, h, o in zip(lo, hi, mask.offset))
    return Mask(mask.dim, lo, mask.coeffs[sl])


def translate(mask: Mask, shift) -> Mask:
    shift = _as_index(shift, mask.dim)
    return Mask(mask.dim, tuple(o + s for o, s in zip(mask.offset, shift)), mask.coeffs)


# -- reference masks ----------------------------------------------------------

def bspline_mask() -> Mask:
    """Midpoint mask (1/2, 1, 1/2) at offset -1; generates the hat function."""
    return make_mask((-1,), [0.5, 1.0, 0.5])


def chaikin_mask() -> Mask:
    """Corner-cutting mask (1/4, 3/4, 3/4, 1/4) at offset 0."""
    return make_mask((0,), [0.25, 0.75, 0.75, 0.25])


def delta_mask(dim: int = 1) -> Mask:
    return Mask(dim, (0,) * dim, np.ones((1,) * dim))


def tensor_power(mask: Mask, s: int) -> Mask:
    out = mask
    for _ in range(s - 1):
        out = tensor_product(out, mask)
    return out


# -- validation ----------------------------------------------------------------

@dataclass
class ZhouReport:
    """Univariate convergence screens on the support-translated mask.

    endpoint_ok checks 0 < a_0 < 1 and 0 < a_N < 1 (first and last
    coefficient); endpoint_literal_ok checks the narrower first-two-coefficient
    variant 0 < a_0, a_1 < 1.  Both are necessary-condition screens, not
    convergence proofs.
    """

    support_gcd_ok: bool
    endpoint_ok: bool
    endpoint_literal_ok: bool


@dataclass
class MaskReport:
    sum_rule_ok: bool
    coset_residuals: dict
    residual: float
    nonnegative_ok: bool
    support_box: tuple
    univariate_zhou: ZhouReport | None = None
    notes: list = field(default_factory=list)


def coset_sums(mask: Mask) -> dict:
    """Sum of coefficients on each parity coset of Z^s."""
    sums = {}
    for parity in product((0, 1), repeat=mask.dim):
        sl = tuple(slice((p - o) % 2, None, 2) for p, o in zip(parity, mask.offset))
        sums[parity] = float(mask.coeffs[sl].sum())
    return sums


def center_translation(mask: Mask):
    """Integer shift minimizing the per-axis half-width of the support box."""
    lo, hi = mask.support_box()
    return tuple(-((l + h) // 2) for l, h in zip(lo, hi))


def recenter(mask: Mask):
    """Translated copy whose support straddles the origin, plus the shift."""
    t = center_translation(mask)
    return translate(_trimmed(mask), t), t


def validate_mask(mask: Mask) -> MaskReport:
    sums = coset_sums(mask)
    residuals = {p: abs(s - 1.0) for p, s in sums.items()}
    residual = max(residuals.values())
    sum_rule_ok = residual <= SUM_RULE_TOL
    nonnegative_ok = bool(mask.coeffs.min() >= 0.0)
    notes = []
    t = center_translation(mask)
    if any(t):
        notes.append(f"default gauge recenters support by translation {t}")
    zhou = None
    if mask.dim == 1:
        m = _trimmed(mask)
        coeffs = m.coeffs
        n_last = coeffs.shape[0] - 1
        positive = [i for i in range(1, n_last + 1) if coeffs[i] > 0.0]
        support_gcd_ok = bool(positive) and math.gcd(*positive) == 1
        endpoint_ok = bool(0.0 < coeffs[0] < 1.0 and 0.0 < coeffs[n_last] < 1.0)
        literal_ok = bool(0.0 < coeffs[0] < 1.0
                          and n_last >= 1 and 0.0 < coeffs[1] < 1.0)
        zhou = ZhouReport(support_gcd_ok, endpoint_ok, literal_ok)
        if endpoint_ok != literal_ok:
            notes.append("endpoint screens disagree: last-coefficient vs "
                         "second-coefficient variant")
    else:
        notes.append("support-zonotope screen not evaluated for dim >= 2")
    return MaskReport(sum_rule_ok=sum_rule_ok,
                      coset_residuals=residuals,
                      residual=residual,
                      nonnegative_ok=nonnegative_ok,
                      support_box=mask.support_box(),
                      univariate_zhou=zhou,
                      notes=notes)


def require_sum_rule(mask: Mask):
    """Raises unless every parity coset sums to 1 within tolerance."""
    report = validate_mask(mask)
    if not report.sum_rule_ok:
        raise StructuralError(
            f"mask violates the sum rule (residual {report.residual:.3e})")


def stencil(mask: Mask, index):
    """(j, weight) pairs with weight = a_{index - 2j} > 0."""
    mlo, mhi = mask.support_box()
    ranges = [range(-(-(i - mh) // 2), (i - ml) // 2 + 1)
              for i, ml, mh in zip(index, mlo, mhi)]
    out = []
    for j in product(*ranges):
        w = mask.value(tuple(i - 2 * jj for i, jj in zip(index, j)))
        if w > 0.0:
            out.append((j, w))
    return out


# -- iteration -----------------------------------------------------------------

def _upsample2(mask: Mask) -> Mask:
    shape = tuple(2 * (n - 1) + 1 for n in mask.coeffs.shape)
    arr = np.zeros(shape)
    arr[tuple(slice(None, None, 2) for _ in shape)] = mask.coeffs
    return Mask(mask.dim, tuple(2 * o for o in mask.offset), arr)


def _convolve(a: Mask, b: Mask) -> Mask:
    """Full convolution; iterates over the (small) support of a."""
    shape = tuple(na + nb - 1 for na, nb in zip(a.coeffs.shape, b.coeffs.shape))
    if math.prod(shape) > ITERATED_SUPPORT_CAP:
        raise ResourceError(
            f"iterated mask support {math.prod(shape)} exceeds cap {ITERATED_SUPPORT_CAP}")
    out = np.zeros(shape)
    for local in zip(*np.nonzero(a.coeffs)):
        sl = tuple(slice(l, l + n) for l, n in zip(local, b.coeffs.shape))
        out[sl] += a.coeffs[local] * b.coeffs
    offset = tuple(oa + ob for oa, ob in zip(a.offset, b.offset))
    return Mask(a.dim, offset, out)


def iterated_mask(mask: Mask, n: int) -> Mask:
    """n-fold mask iteration: a^(0) = delta, a^(n+1)_i = sum_j a_{i-2j} a^(n)_j."""
    if n < 0:
        raise StructuralError("iteration level must be >= 0")
    out = delta_mask(mask.dim)
    for _ in range(n):
        out = _trimmed(_convolve(mask, _upsample2(out)))
    return out


# -- gauges --------------------------------------------------------------------

@dataclass(eq=False)
class BoxGauge:
    """Minkowski functional of the box prod_k [-c_k, c_k]."""

    half_widths: np.ndarray

    def __post_init__(self):
        c = np.array(self.half_widths, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise StructuralError("half widths must form a nonempty vector")
        if not np.all(np.isfinite(c)) or c.min() <= 0.0:
            raise StructuralError("half widths must be positive and finite")
        c.flags.writeable = False
        self.half_widths = c


def gauge_value(gauge: BoxGauge, v) -> float:
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.shape != gauge.half_widths.shape:
        raise StructuralError(
            f"vector has shape {v.shape}, gauge expects {gauge.half_widths.shape}")
    return float(np.max(np.abs(v) / gauge.half_widths))


def unit_gauge(dim: int) -> BoxGauge:
    return BoxGauge(np.ones(dim))


def default_gauge(mask: Mask) -> BoxGauge:
    """Smallest origin-centered integer box containing the recentred support."""
    centered, _ = recenter(mask)
    lo, hi = centered.support_box()
    c = [max(abs(l), abs(h), 1) for l, h in zip(lo, hi)]
    return BoxGauge(np.array(c, dtype=float))


# -- products ------------------------------------------------------------------

def tensor_product(a: Mask, b: Mask) -> Mask:
    coeffs = np.multiply.outer(a.coeffs, b.coeffs)
    return Mask(a.dim + b.dim, a.offset + b.offset, coeffs)


# -- JSON ----------------------------------------------------------------------

def mask_to_json(mask: Mask) -> dict:
    return {"dim": mask.dim,
            "offset": list(mask.offset),
            "coeffs": mask.coeffs.tolist()}


def mask_from_json(obj: dict) -> Mask:
    try:
        return Mask(int(obj["dim"]), tuple(obj["offset"]), np.array(obj["coeffs"], dtype=float))
    except (KeyError, TypeError) as exc:
        raise StructuralError(f"bad mask object: {obj!r}") from exc
