"""Exact sampling of point-process realizations and of the generative priors.

Reproducibility contract: every sampler takes an RngStream (a seed plus a
stream id) and derives a fresh counter-based generator from it, so identical
streams reproduce identical output and distinct stream ids are independent.
Monte Carlo harnesses assign stream id = replication index, which makes
parallel and serial execution agree bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .core import TWO_PI, IntensityModel, ModelError, PointPattern, PriorSpec

# Stick-breaking truncation default; residual mass stays below 1e-6 for
# base masses up to about 10.
STICK_DEFAULT = 500


@dataclass(frozen=True)
class RngStream:
    """Seedable random stream: (seed, stream_id) fully determines the output."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed & (2**64 - 1),
                                    spawn_key=(self.stream_id & (2**64 - 1),))
        return np.random.Generator(np.random.Philox(ss))


RngLike = Union[RngStream, np.random.Generator]


def as_generator(rng: RngLike) -> np.random.Generator:
    """Accept either an RngStream or an already-derived generator.

    Harness code derives one generator per replication and threads it through
    the sampling and inference steps sequentially.
    """
    if isinstance(rng, np.random.Generator):
        return rng
    return rng.generator()


def derive_seed(*tags) -> int:
    """Stable 64-bit seed derived from integer tags (for sub-harnesses)."""
    state = np.random.SeedSequence(entropy=[int(t) & (2**64 - 1) for t in tags])
    a, b = state.generate_state(2, dtype=np.uint64)[:2]
    return int(a ^ (b << 1)) & (2**63 - 1)


def _sample_shape_inversion(model: IntensityModel, size: int,
                            gen: np.random.Generator,
                            table_nodes: int = 4096) -> np.ndarray:
    """Draw from the normalized shape via a tabulated inverse CDF."""
    nodes, cdf = model.shape_cdf_table(table_nodes)
    u = gen.random(size)
    idx = np.searchsorted(cdf, u, side="right") - 1
    idx = np.clip(idx, 0, table_nodes - 1)
    width = cdf[idx + 1] - cdf[idx]
    frac = np.where(width > 0, (u - cdf[idx]) / np.where(width > 0, width, 1.0), 0.0)
    return nodes[idx] + frac * (nodes[idx + 1] - nodes[idx])


def _sample_shape_thinning(model: IntensityModel, size: int,
                           gen: np.random.Generator,
                           sup_bound: Optional[float]) -> np.ndarray:
    window = model.window
    if sup_bound is None:
        sup_bound = float(np.max(model(window.grid(4096)))) * 1.001
    out = np.empty(size)
    filled = 0
    while filled < size:
        block = max(64, 2 * (size - filled))
        cand = gen.uniform(window.a, window.b, block)
        accept = gen.random(block) * sup_bound <= model(cand)
        kept = cand[accept]
        take = min(kept.size, size - filled)
        out[filled:filled + take] = kept[:take]
        filled += take
    return out


def _sample_mixture_points(model: IntensityModel, size: int,
                           gen: np.random.Generator) -> np.ndarray:
    spec = model.kernel
    probs = model.atom_weights / model.total_mass
    which = gen.choice(model.atom_locations.size, size=size, p=probs)
    centers = model.atom_locations[which]
    if spec.kind == "von_mises":
        return np.mod(gen.vonmises(centers, spec.kappa), TWO_PI)
    pts = gen.normal(centers, spec.sigma)
    # Gaussian kernels leak outside interval windows; resample strays so the
    # pattern stays inside.  Leakage above the mass tolerance is a modeling
    # error that validate() reports.
    window = model.window
    for _ in range(1000):
        bad = (pts < window.a) | (pts > window.b)
        if not np.any(bad):
            return pts
        pts[bad] = gen.normal(centers[bad], spec.sigma)
    raise ModelError("mixture leaks too much mass outside the window to sample")


def sample_nhpp(model: IntensityModel, exposure: float, rng: RngLike,
                method: str = "auto", sup_bound: Optional[float] = None) -> PointPattern:
    """Sample one realization with intensity exposure * lambda.

    The count is Poisson(exposure * w); given the count, locations are i.i.d.
    draws from the normalized shape.  Closed-form intensities use tabulated
    inverse-CDF sampling by default, or thinning when requested (the
    acceptance bound defaults to the grid supremum times 1.001).
    """
    if not exposure > 0:
        raise ModelError("exposure must be positive")
    gen = as_generator(rng)
    n = int(gen.poisson(exposure * model.total_mass))
    if n == 0:
        return PointPattern.empty(model.window)
    if model.kind == "kernel_mixture":
        pts = _sample_mixture_points(model, n, gen)
    elif method == "thinning":
        pts = _sample_shape_thinning(model, n, gen, sup_bound)
    else:
        pts = _sample_shape_inversion(model, n, gen)
    return PointPattern(model.window, pts)


def log_pattern_density(model: IntensityModel, pattern: PointPattern,
                        exposure: float) -> float:
    """Log density of an observed pattern under exposure * lambda.

    This is the exchangeable form: the product of normalized-shape values
    times the Poisson count probability (with the factorial).
    """
    m = pattern.count
    w = model.total_mass
    total = m * math.log(exposure * w) - math.lgamma(m + 1) - exposure * w
    if m:
        total += float(np.sum(np.log(model.normalized(pattern.points))))
    return total


def sample_crp(prior: PriorSpec, n: int, rng: RngLike):
    """Sequential Chinese-restaurant draw of n latent locations.

    Returns (locations, labels): the first location is a base draw; each
    subsequent one repeats an earlier location with probability 1/(|alpha|+k)
    each, or is a fresh base draw with probability |alpha|/(|alpha|+k).
    """
    if n < 0:
        raise ModelError("n must be nonnegative")
    gen = as_generator(rng)
    theta = prior.total_mass_alpha
    locations = np.empty(n)
    labels = np.empty(n, dtype=int)
    table_locs = []
    if n == 0:
        return locations, labels
    base_u = gen.random(n)          # decision uniforms, one per customer
    fresh = sample_base(prior, n, gen)
    fresh_used = 0
    for k in range(n):
        if k == 0 or base_u[k] * (theta + k) < theta:
            table_locs.append(fresh[fresh_used])
            fresh_used += 1
            labels[k] = len(table_locs) - 1
        else:
            # repeat one of the k earlier draws uniformly (reusing the
            # residual of the decision uniform, which is uniform on [0, k))
            j = min(int(base_u[k] * (theta + k) - theta), k - 1)
            labels[k] = labels[j]
        locations[k] = table_locs[labels[k]]
    return locations, labels


def sample_base(prior: PriorSpec, size: int, gen: np.random.Generator) -> np.ndarray:
    """i.i.d. draws from the normalized base measure."""
    window = prior.window
    if prior.uniform_base:
        return gen.uniform(window.a, window.b, size)
    edges, cdf = prior.base_cdf_table()
    u = gen.random(size)
    idx = np.searchsorted(cdf, u, side="right") - 1
    idx = np.clip(idx, 0, edges.size - 2)
    width = cdf[idx + 1] - cdf[idx]
    frac = np.where(width > 0, (u - cdf[idx]) / np.where(width > 0, width, 1.0), 0.0)
    return edges[idx] + frac * (edges[idx + 1] - edges[idx])


def sample_prior_intensity(prior: PriorSpec, kernel, truncation: int = STICK_DEFAULT,
                           rng: RngLike = RngStream(0)) -> IntensityModel:
    """Draw an intensity from the proper prior (finite beta only).

    The weight is Gamma(|alpha| - gamma, beta); the shape is a stick-breaking
    draw truncated at the given number of sticks with the tail mass lumped
    onto the final stick.  Sampling from the improper limit is undefined and
    rejected.
    """
    from .kernels import mixture_intensity

    if prior.is_improper:
        raise ModelError("cannot sample an intensity from the improper prior")
    if truncation < 1:
        raise ModelError("truncation must be at least 1")
    gen = as_generator(rng)
    w = float(gen.gamma(prior.weight_shape, prior.beta))
    if truncation == 1:
        sticks = np.ones(1)
    else:
        v = gen.beta(1.0, prior.total_mass_alpha, truncation - 1)
        remaining = np.concatenate([[1.0], np.cumprod(1.0 - v)])
        sticks = np.empty(truncation)
        sticks[:-1] = v * remaining[:-1]
        sticks[-1] = remaining[-1]          # lump the tail onto the last stick
    locations = sample_base(prior, truncation, gen)
    return mixture_intensity(kernel, locations, w * sticks)
