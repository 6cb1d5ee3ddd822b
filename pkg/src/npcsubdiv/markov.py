"""Characteristic Markov chain of a nonnegative mask.

The chain lives on the integer lattice: one step from state i lands on j
with probability a_{i-2j}, and n steps land on j with the iterated-mask
weight a^(n)_{i-2^n j}.  Exact kernel arithmetic is the primary tool here;
Monte Carlo simulation exists to exercise the path-space semantics and to
cross-check the exact marginals.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .grid import GridData
from .linear import RefinableSamples
from .masks import (Mask, default_gauge, gauge_value, iterated_mask, recenter,
                    require_sum_rule, stencil)
from .spaces import BarycenterProblem, distance, weighted_barycenter
from .subdivision import iterate

__all__ = [
    "KernelRow",
    "kernel_row",
    "simulate_chain",
    "StationaryReport",
    "stationary_from_refinable",
    "lp_moment",
    "dispersion_gap",
    "BallConfinement",
    "ball_confinement",
    "nonassociativity_gap",
]

INTERPOLATORY_TOL = 1e-9
BALL_GAUGE_TOL = 1e-12


def _as_state(v, dim):
    if isinstance(v, (int, np.integer)):
        v = (v,)
    state = []
    for c in v:
        ic = int(c)
        if ic != c:
            raise DomainError("lattice states must be integer vectors")
        state.append(ic)
    if len(state) != dim:
        raise DomainError(f"state has dimension {len(state)}, mask expects {dim}")
    return tuple(state)


@dataclass(eq=False)
class KernelRow:
    """Exact n-step transition probabilities out of a single state."""

    start: tuple
    steps: int
    probs: dict  # j -> a^(n)_{start - 2^n j}


def kernel_row(mask: Mask, start, steps: int) -> KernelRow:
    """Marginal of the chain after `steps` steps from `start`.

    Rows are stochastic because the iterated mask inherits the sum rule on
    the residue classes mod 2^steps, and they compose: splitting `steps` as
    m + n and chaining the two rows reproduces the joint row exactly.
    """
    start = _as_state(start, mask.dim)
    if steps < 0:
        raise DomainError("steps must be >= 0")
    require_sum_rule(mask)
    if steps == 0:
        return KernelRow(start=start, steps=0, probs={start: 1.0})
    level = iterated_mask(mask, steps)
    scale = 2 ** steps
    probs = {}
    for idx, w in level.nonzero_items():
        num = tuple(s - v for s, v in zip(start, idx))
        if any(t % scale for t in num):
            continue
        probs[tuple(t // scale for t in num)] = w
    return KernelRow(start=start, steps=steps, probs=probs)


def simulate_chain(mask: Mask, start, steps: int, trials: int, seed) -> dict:
    """Empirical marginal of X_steps over independent trajectories.

    Trial t draws from the sub-stream keyed (seed, t), so runs are
    reproducible and trials are independent.  One-step rows are cached per
    visited state with renormalized weights (the renormalization is a no-op
    up to float round-off thanks to the sum rule).  Returns a map from the
    final state to its relative frequency.
    """
    start = _as_state(start, mask.dim)
    if steps < 0:
        raise DomainError("steps must be >= 0")
    if trials < 1:
        raise DomainError("trials must be >= 1")
    require_sum_rule(mask)
    if steps == 0:
        return {start: 1.0}

    rows = {}

    def row(state):
        cached = rows.get(state)
        if cached is None:
            pairs = stencil(mask, state)
            total = sum(w for _, w in pairs)
            acc, cum = 0.0, []
            for _, w in pairs:
                acc += w / total
                cum.append(acc)
            cum[-1] = 1.0  # close the top bin against round-off
            cached = rows[state] = ([j for j, _ in pairs], cum)
        return cached

    counts = {}
    for trial in range(trials):
        draws = np.random.default_rng([seed, trial]).random(steps)
        state = start
        for u in draws:
            targets, cum = row(state)
            state = targets[bisect_right(cum, u)]
        counts[state] = counts.get(state, 0) + 1
    return {j: c / trials for j, c in counts.items()}


@dataclass(eq=False)
class StationaryReport:
    """Stationary distribution candidate read off refinable samples."""

    pi: dict  # j -> pi_j
    interpolatory: tuple | None  # lattice point k with pi ~ delta_k, if any
    residual: float  # sup-norm defect of one exact kernel application


def stationary_from_refinable(samples: RefinableSamples) -> StationaryReport:
    """Builds pi_j = (level-n sample at integer -j) and checks stationarity.

    The residual applies the one-step kernel once: pi'_j = sum_i pi_i a_{i-2j},
    and reports sup_j |pi_j - pi'_j|.  This equals the gap between the
    integer samples at cascade levels n and n+1, so it vanishes only as fast
    as the cascade converges at the integers.
    """
    if samples.level < 1:
        raise DomainError("cascade level must be >= 1")
    require_sum_rule(samples.mask)
    scale = 2 ** samples.level
    pi = {}
    for idx, w in samples.items():
        if any(v % scale for v in idx):
            continue
        pi[tuple(-(v // scale) for v in idx)] = w

    image = {}
    for i, wi in pi.items():
        for idx, a in samples.mask.nonzero_items():
            num = tuple(ik - vk for ik, vk in zip(i, idx))
            if any(t % 2 for t in num):
                continue
            j = tuple(t // 2 for t in num)
            image[j] = image.get(j, 0.0) + wi * a
    residual = max(abs(pi.get(j, 0.0) - image.get(j, 0.0))
                   for j in set(pi) | set(image))

    interpolatory = None
    for j, w in pi.items():
        if w >= 1.0 - INTERPOLATORY_TOL:
            interpolatory = j
    return StationaryReport(pi=pi, interpolatory=interpolatory, residual=residual)


def lp_moment(mask: Mask, ell, steps: int, p: float, k) -> float:
    """E_ell ||X_steps - k||^p, exactly, with the Euclidean norm on Z^s."""
    if p < 1.0:
        raise DomainError("p must be >= 1")
    k = _as_state(k, mask.dim)
    row = kernel_row(mask, ell, steps)
    return sum(w * math.dist(j, k) ** p for j, w in row.probs.items())


def dispersion_gap(mask: Mask, ell, steps: int, p: float) -> float:
    """E_ell ||X_{2n} - X_n||^p via two exact n-step hops (n = steps).

    Interpolatory masks drive this to 0 as n grows; masks whose stationary
    distribution charges two distinct states keep it bounded away from 0.
    """
    if p < 1.0:
        raise DomainError("p must be >= 1")
    first = kernel_row(mask, ell, steps)
    total = 0.0
    for j, wj in first.probs.items():
        second = kernel_row(mask, j, steps)
        for i, wi in second.probs.items():
            total += wj * wi * math.dist(i, j) ** p
    return total


@dataclass(eq=False)
class BallConfinement:
    confined: bool
    gauge_radius: float


def ball_confinement(mask: Mask, start, steps: int) -> BallConfinement:
    """Checks the trap property of the doubled gauge ball.

    The mask is recentred so its support sits inside the gauge body; when the
    start satisfies gauge(start) <= 2^steps, every reachable state after
    `steps` steps (and after the two following step counts, the "thereafter"
    clause) must have gauge value <= 2.  gauge_radius is the largest gauge
    value seen over the checked steps.
    """
    if steps < 0:
        raise DomainError("steps must be >= 0")
    centred, _ = recenter(mask)
    gauge = default_gauge(mask)
    start = _as_state(start, mask.dim)
    confined = True
    radius = 0.0
    for m in (steps, steps + 1, steps + 2):
        row = kernel_row(centred, start, m)
        for j in row.probs:
            rho = gauge_value(gauge, j)
            radius = max(radius, rho)
            if rho > 2.0 + BALL_GAUGE_TOL:
                confined = False
    return BallConfinement(confined=confined, gauge_radius=radius)


def nonassociativity_gap(mask: Mask, x: GridData, index, steps: int) -> float:
    """Distance between nested and one-shot barycenters at one output node.

    Nested: the level-`steps` subdivision value at `index`.  One-shot: the
    barycenter of the original data under the n-step kernel weights.  The two
    use identical weights, so the gap is 0 on euclidean data; on curved
    backends conditioning does not associate and the gap can be positive.
    """
    index = _as_state(index, mask.dim)
    trace = iterate(mask, x, steps)
    lo, hi = trace.interiors[steps]
    if any(i < l or i > h for i, l, h in zip(index, lo, hi)):
        raise DomainError(f"index {index} is not interior at level {steps}")
    nested = trace.levels[steps].get(index)

    row = kernel_row(mask, index, steps)
    points, weights = [], []
    for j, w in row.probs.items():
        points.append(x.get(j))
        weights.append(w)
    total = sum(weights)
    problem = BarycenterProblem(points=points,
                                weights=[w / total for w in weights])
    return distance(nested, weighted_barycenter(problem))
