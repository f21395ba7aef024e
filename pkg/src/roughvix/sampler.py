"""Exact simulation of the log-forward-variance Gaussian vector.

Sampling is Cholesky-based: a sample is ``mean + L @ G`` with ``G`` a
vector of independent standard normals.  Fine and coarse grids are
coupled by index restriction — the coarse vector is exactly the fine
vector at every second grid point.

Reproducibility contract
------------------------
All randomness flows from one 64-bit root seed.  A stream is the Philox
counter-based generator seeded by ``SeedSequence(root_seed, spawn_key=key)``
where `key` is a tuple of small integers identifying its role (documented
in docs/formats.md).  Standard normals are produced by inverse-CDF from
53-bit uniforms, so a stream's output is a pure function of (seed, key)
and the draw count.  Work is split into fixed-size batches that depend
only on the grid size, never on scheduling, so results are bit-identical
across runs and worker counts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import FactorizationError, UsageError
from .model import ModelParams, gaussian_spec

__all__ = [
    "CholeskyFactor",
    "GaussianSample",
    "cholesky_factor",
    "factor_for",
    "sample_fine",
    "restrict_to_coarse",
    "stream_for",
    "batch_size",
    "batch_sizes",
]

_JITTER_SCALE = 1e-12
# Target elements per sample block: bounds peak memory regardless of n.
_BLOCK_BUDGET = 2**24

# Stream-key domains (first component of every spawn key).
DOMAIN_MC = 1
DOMAIN_MLMC = 2
DOMAIN_PILOT = 3
DOMAIN_EXPERIMENT = 4


@dataclass(frozen=True, eq=False)
class CholeskyFactor:
    """Lower-triangular factor of a covariance matrix.

    Attributes
    ----------
    L : numpy.ndarray
        Lower-triangular matrix with ``L @ L.T`` reconstructing the
        covariance up to rounding.
    source_key : tuple
        Identifier of what was factored (parameter set and grid size, or
        a caller-supplied tag).
    jittered : bool
        True if the documented jitter retry was needed.
    """

    L: np.ndarray
    source_key: tuple
    jittered: bool = False


@dataclass(frozen=True, eq=False)
class GaussianSample:
    """A draw (or batch of draws) of ``(X_T^{u_i})`` for ``i = 0..n``.

    `values` has shape ``(n+1,)`` for a single draw or ``(n+1, m)`` for a
    batch of m draws; axis 0 always indexes the grid.
    """

    values: np.ndarray
    grid_n: int


def cholesky_factor(cov: np.ndarray, source_key: tuple = ()) -> CholeskyFactor:
    """Factor a symmetric PSD matrix, retrying once with diagonal jitter.

    The covariance is a Gram matrix, hence PSD in exact arithmetic;
    rounding can still make the floating-point matrix slightly
    indefinite.  On failure, ``1e-12 * trace/(n+1)`` is added to the
    diagonal and the factorization retried once.

    Raises
    ------
    FactorizationError
        If the matrix is indefinite even after the jitter retry.
    """
    try:
        return CholeskyFactor(np.linalg.cholesky(cov), source_key, jittered=False)
    except np.linalg.LinAlgError:
        pass
    if not np.any(cov):
        # Degenerate but valid: the zero matrix factors as L = 0 (a
        # deterministic model, e.g. zero vol-of-vol).
        return CholeskyFactor(np.zeros_like(cov), source_key, jittered=False)
    jitter = _JITTER_SCALE * np.trace(cov) / cov.shape[0]
    bumped = cov + jitter * np.eye(cov.shape[0])
    try:
        return CholeskyFactor(np.linalg.cholesky(bumped), source_key, jittered=True)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(
            f"covariance matrix is not positive semidefinite even after "
            f"jitter {jitter:.3e} (key={source_key})"
        ) from exc


_factor_cache: dict = {}


def factor_for(params: ModelParams, n: int) -> CholeskyFactor:
    """Cached Cholesky factor of the covariance for (`params`, `n`)."""
    key = (params, n)
    hit = _factor_cache.get(key)
    if hit is None:
        cov = gaussian_spec(params, n).cov
        hit = cholesky_factor(cov, source_key=key)
        hit.L.flags.writeable = False
        if len(_factor_cache) >= 64:
            _factor_cache.pop(next(iter(_factor_cache)))
        _factor_cache[key] = hit
    return hit


def stream_for(seed: int, *key: int) -> np.random.Generator:
    """Philox stream for the given root seed and spawn-key tuple."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(seed, spawn_key=key))
    )


def _standard_normals(stream: np.random.Generator, shape) -> np.ndarray:
    """Inverse-CDF standard normals from 53-bit uniforms (no rejection)."""
    raw = stream.integers(0, 1 << 53, size=shape, dtype=np.uint64)
    uniforms = (raw.astype(np.float64) + 0.5) * 2.0**-53
    return ndtri(uniforms)


def sample_fine(
    factor: CholeskyFactor,
    mean: np.ndarray,
    stream: np.random.Generator,
    size: int | None = None,
) -> GaussianSample:
    """Draw from ``N(mean, L L^T)`` as ``mean + L @ G``.

    Parameters
    ----------
    factor : CholeskyFactor
        Factor whose dimension matches `mean`.
    mean : numpy.ndarray
        Mean vector of length n+1.
    stream : numpy.random.Generator
        Source of randomness (see :func:`stream_for`).
    size : int, optional
        If given, draw a batch of `size` samples; values get shape
        ``(n+1, size)``.
    """
    dim = mean.shape[0]
    if factor.L.shape != (dim, dim):
        raise UsageError(
            f"factor dimension {factor.L.shape} does not match mean length {dim}"
        )
    shape = (dim,) if size is None else (dim, size)
    normals = _standard_normals(stream, shape)
    values = factor.L @ normals
    values += mean if size is None else mean[:, None]
    return GaussianSample(values=values, grid_n=dim - 1)


def restrict_to_coarse(fine: GaussianSample) -> GaussianSample:
    """Coarse sample at every second grid point (indices 0, 2, ..., n).

    Because the grid is uniform, the restricted vector is exactly the
    Gaussian vector of the grid with half as many steps, coupled to the
    fine sample through shared randomness.  Requires an even step count.
    """
    if fine.grid_n % 2 != 0:
        raise UsageError(
            f"restriction needs an even step count, got n={fine.grid_n}"
        )
    return GaussianSample(values=fine.values[::2], grid_n=fine.grid_n // 2)


def batch_size(n: int) -> int:
    """Samples per batch at grid size `n` (fixed partition, memory-bounded)."""
    return max(1, min(32_768, _BLOCK_BUDGET // (n + 1)))


def batch_sizes(n: int, total: int) -> list:
    """The fixed partition of `total` samples into batches at grid size `n`."""
    if total < 1:
        raise UsageError(f"sample count must be >= 1, got {total}")
    width = batch_size(n)
    full, rest = divmod(total, width)
    return [width] * full + ([rest] if rest else [])
