"""Exact sampling of the normalized rectangular-increment field of the
fractional Brownian sheet.

The separable covariance E[X_ij X_i'j'] = r_alpha(i-i') r_beta(j-j') makes
X = A G B^T an exact sampler, where G is a matrix of independent standard
normals and A, B are square roots of the per-axis Toeplitz covariances.  Each
axis uses the order-2N circulant extension of the Toeplitz matrix, whose FFT
eigenvalues are nonnegative for fractional Gaussian noise; a dense Cholesky
factorization stands by as fallback.

Randomness is counter-based: Philox4x64 keyed by (master_seed, stream_index),
with Gaussian variates from numpy's ziggurat standard_normal.  Identical
SeedSpec inputs give bit-identical fields on any platform with the same numpy
build, regardless of how many replications run concurrently.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .kernels import _hurst_value, fgn_autocovariance

__all__ = [
    "EmbeddingError",
    "SeedSpec",
    "IncrementField",
    "SheetGrid",
    "circulant_factor",
    "sample_fgn",
    "sample_increment_field",
    "coarse_grain",
    "reconstruct_sheet",
    "save_field",
    "load_field",
]

# Circulant eigenvalues of fGn are nonnegative in theory; anything below this
# is a bug, not rounding noise.
_EIG_TOL = -1e-9

_MAGIC = b"FBSFLD01"
_HEADER = struct.Struct("<8sII dd")  # magic, N, M, alpha, beta; 32 bytes


class EmbeddingError(RuntimeError):
    """Circulant embedding produced a significantly negative eigenvalue."""


@dataclass(frozen=True)
class SeedSpec:
    """Deterministic stream identity: (master_seed, stream_index) fixes every draw."""

    master_seed: int
    stream_index: int = 0

    def __post_init__(self) -> None:
        for name in ("master_seed", "stream_index"):
            v = getattr(self, name)
            if not 0 <= int(v) < 2**64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {v!r}")

    def generator(self) -> np.random.Generator:
        return np.random.Generator(
            np.random.Philox(key=[self.master_seed, self.stream_index])
        )


@dataclass(frozen=True)
class IncrementField:
    """N x M matrix of normalized rectangle increments of the sheet.

    Entries have zero mean and unit variance in law, with separable
    correlation r_alpha(i-i') r_beta(j-j').
    """

    alpha: float
    beta: float
    N: int
    M: int
    data: np.ndarray

    def __post_init__(self) -> None:
        _hurst_value(self.alpha)
        _hurst_value(self.beta)
        if self.data.shape != (self.N, self.M):
            raise ValueError(
                f"data shape {self.data.shape} does not match grid ({self.N}, {self.M})"
            )


@dataclass(frozen=True)
class SheetGrid:
    """Sheet values W(i/N, j/M) on the (N+1) x (M+1) lattice; zero on the axes."""

    alpha: float
    beta: float
    N: int
    M: int
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.values.shape != (self.N + 1, self.M + 1):
            raise ValueError(
                f"values shape {self.values.shape} does not match ({self.N + 1}, {self.M + 1})"
            )


def circulant_factor(gamma, N: int) -> np.ndarray:
    """Eigenvalues of the order-2N circulant extension of [r_gamma(i - i')].

    First row (r(0), .., r(N), r(N-1), .., r(1)); eigenvalues in [-1e-9, 0)
    are clamped to 0, anything lower raises EmbeddingError.
    """
    g = _hurst_value(gamma)
    if N < 1:
        raise ValueError("N must be >= 1")
    r = fgn_autocovariance(g, np.arange(N + 1))
    row = np.concatenate([r, r[-2:0:-1]])
    eig = np.fft.rfft(row).real
    lo = eig.min()
    if lo < _EIG_TOL:
        raise EmbeddingError(
            f"circulant embedding failed for gamma={g}, N={N}: eigenvalue {lo:.3e} "
            f"below tolerance {_EIG_TOL:.0e}; falling back to dense Cholesky is required"
        )
    eig = np.clip(eig, 0.0, None)
    # rfft of the symmetric row carries N+1 distinct values; mirror back to 2N
    return np.concatenate([eig, eig[-2:0:-1]])


class _AxisFactor:
    """Square root of one axis' Toeplitz covariance, applied along a chosen axis.

    Spectral form consumes 2N input normals per output row of N; the Cholesky
    fallback consumes N.
    """

    def __init__(self, gamma: float, N: int):
        self.N = N
        try:
            eig = circulant_factor(gamma, N)
            self.sqrt_eig = np.sqrt(eig[: N + 1])  # rfft layout
            self.L = None
            self.draw_len = 2 * N
        except EmbeddingError:
            idx = np.arange(N)
            cov = fgn_autocovariance(gamma, idx[:, None] - idx[None, :])
            self.sqrt_eig = None
            self.L = np.linalg.cholesky(cov)
            self.draw_len = N

    def apply(self, g: np.ndarray, axis: int) -> np.ndarray:
        if self.L is not None:
            return np.tensordot(self.L, g, axes=([1], [axis])) if axis == 0 else g @ self.L.T
        spec = np.fft.rfft(g, axis=axis)
        shape = [1, 1]
        shape[axis] = self.sqrt_eig.size
        spec *= self.sqrt_eig.reshape(shape)
        out = np.fft.irfft(spec, n=2 * self.N, axis=axis)
        sl = [slice(None), slice(None)]
        sl[axis] = slice(0, self.N)
        return out[tuple(sl)]


def sample_fgn(gamma, N: int, seed: SeedSpec) -> np.ndarray:
    """Exact stationary Gaussian vector with autocovariance r_gamma."""
    factor = _AxisFactor(_hurst_value(gamma), N)
    g = seed.generator().standard_normal(factor.draw_len)
    return factor.apply(g.reshape(-1, 1), axis=0)[:, 0]


def sample_increment_field(alpha, beta, N: int, M: int, seed: SeedSpec) -> IncrementField:
    """Exact sample of the normalized increment field on an N x M grid."""
    a = _hurst_value(alpha)
    b = _hurst_value(beta)
    fa = _AxisFactor(a, N)
    fb = _AxisFactor(b, M)
    g = seed.generator().standard_normal((fa.draw_len, fb.draw_len))
    x = fb.apply(fa.apply(g, axis=0), axis=1)
    return IncrementField(a, b, N, M, np.ascontiguousarray(x))


def coarse_grain(field: IncrementField, k: int, l: int) -> IncrementField:
    """Aggregate k x l blocks of increments and renormalize to unit variance.

    The result is exactly the normalized increment field of the same
    underlying sheet on the (N/k) x (M/l) grid.
    """
    if k < 1 or l < 1 or field.N % k or field.M % l:
        raise ValueError(
            f"block shape ({k}, {l}) must divide the grid ({field.N}, {field.M})"
        )
    n2, m2 = field.N // k, field.M // l
    blocks = field.data.reshape(n2, k, m2, l).sum(axis=(1, 3))
    scale = float(k) ** -field.alpha * float(l) ** -field.beta
    return IncrementField(field.alpha, field.beta, n2, m2, scale * blocks)


def reconstruct_sheet(field: IncrementField) -> SheetGrid:
    """Sheet values on the lattice by double cumulative summation.

    W is zero on the axes; rectangle increments of the output reproduce
    N^{-alpha} M^{-beta} X up to rounding.
    """
    w = np.zeros((field.N + 1, field.M + 1))
    scale = float(field.N) ** -field.alpha * float(field.M) ** -field.beta
    w[1:, 1:] = np.cumsum(np.cumsum(scale * field.data, axis=0), axis=1)
    return SheetGrid(field.alpha, field.beta, field.N, field.M, w)


def save_field(field: IncrementField, path) -> None:
    """Binary dump: 32-byte header (magic, N, M as uint32, alpha, beta as
    float64, all little-endian) followed by row-major float64 increments."""
    header = _HEADER.pack(_MAGIC, field.N, field.M, field.alpha, field.beta)
    data = np.ascontiguousarray(field.data, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data.tobytes())


def load_field(path) -> IncrementField:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, n, m, alpha, beta = _HEADER.unpack(header)
        if magic != _MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        payload = fh.read()
    data = np.frombuffer(payload, dtype="<f8")
    if data.size != n * m:
        raise ValueError(f"{path}: expected {n * m} values, found {data.size}")
    return IncrementField(alpha, beta, n, m, data.reshape(n, m).copy())
