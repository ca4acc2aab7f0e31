"""Independent brute-force oracles used to pin expected values.

Everything here deliberately avoids the library's production code paths:
covariances are assembled densely, sums run over explicit index ranges, and
Gaussian moments come from a recursive Isserlis pairing expansion.
"""

import math
from functools import lru_cache

import numpy as np

from fbsheet.kernels import interval_inner_product


def axis_cell_matrix(gamma: float, N: int) -> np.ndarray:
    """Dense matrix of grid-cell inner products via the four-corner formula."""
    out = np.empty((N, N))
    for i in range(N):
        for j in range(N):
            out[i, j] = interval_inner_product(
                gamma, (i / N, (i + 1) / N), (j / N, (j + 1) / N)
            )
    return out


def grid_covariance_sum_bruteforce(gamma: float, q: int, N: int) -> float:
    """O(N^2) double sum of cell inner products to the q-th power."""
    c = axis_cell_matrix(gamma, N)
    return math.fsum((c**q).ravel())


def dense_increment_covariance(alpha: float, beta: float, N: int, M: int) -> np.ndarray:
    """Covariance of the raw (unnormalized) rectangle increments, row-major."""
    return np.kron(axis_cell_matrix(alpha, N), axis_cell_matrix(beta, M))


def t1_second_moment_trace_q2(alpha: float, beta: float, N: int, M: int,
                              phi: float) -> float:
    """E[T1^2] for q = 2 from the variance of a Gaussian quadratic form.

    For q = 2, T1 = phi^2 (dW^T S dW - tr(S^2)) with S the increment
    covariance, so Var = 2 tr(S^4).
    """
    s = dense_increment_covariance(alpha, beta, N, M)
    return phi**4 * 2.0 * float(np.trace(np.linalg.matrix_power(s, 4)))


def t1_second_moment_direct(alpha: float, beta: float, q: int, N: int, M: int,
                            phi: float) -> float:
    """E[T1^2] by direct summation over all four cell indices of the 2D grid.

    Same pairing combinatorics as the production formula but evaluated on the
    joint NM x NM covariance instead of the per-axis factorization.
    """
    c = dense_increment_covariance(alpha, beta, N, M)
    total = 0.0
    for p in range(0, q - 1):
        m = q - 1 - p
        w_p = math.factorial(p) ** 2 * math.comb(q - 1, p) ** 4
        for k in range(0, m + 1):
            w_k = (math.factorial(m) * math.comb(m, k)) ** 2
            pattern = np.einsum(
                "ik,il,jk,jl,ij,kl->",
                c**k, c ** (m - k), c ** (m - k), c**k,
                c ** (p + 1), c ** (p + 1),
            )
            total += w_p * w_k * float(pattern)
    return phi**4 / math.factorial(q - 1) ** 4 * total


def hermite_monomials(n: int) -> dict:
    """Coefficients {power: coef} of the probabilists' polynomial He_n."""
    a, b = {0: 1.0}, {1: 1.0}
    if n == 0:
        return a
    for k in range(1, n):
        c: dict = {}
        for pw, cf in b.items():
            c[pw + 1] = c.get(pw + 1, 0.0) + cf
        for pw, cf in a.items():
            c[pw] = c.get(pw, 0.0) - k * cf
        a, b = b, c
    return b


def gaussian_moment(cov: np.ndarray, exponents) -> float:
    """E[prod_i x_i^{e_i}] for a centered Gaussian vector, by Isserlis recursion."""
    cov = np.asarray(cov, dtype=float)

    @lru_cache(maxsize=None)
    def rec(e: tuple) -> float:
        total_deg = sum(e)
        if total_deg == 0:
            return 1.0
        if total_deg % 2 == 1:
            return 0.0
        i = next(k for k, v in enumerate(e) if v > 0)
        e1 = list(e)
        e1[i] -= 1
        acc = 0.0
        for j, v in enumerate(e1):
            if v > 0:
                e2 = list(e1)
                e2[j] -= 1
                acc += v * cov[i, j] * rec(tuple(e2))
        return acc

    return rec(tuple(int(v) for v in exponents))


def t1_second_moment_isserlis(alpha: float, beta: float, q: int, N: int, M: int,
                              phi: float) -> float:
    """E[T1^2] from scratch: expand ||D V~||^2 into Hermite polynomials of the
    standardized increments and take Gaussian moments by Isserlis pairing.

    Feasible only for tiny grids; the recursion walks all pair partitions of
    monomials up to degree 4(q-1).
    """
    n = N * M
    sig = dense_increment_covariance(alpha, beta, N, M)
    nrm = np.sqrt(np.diag(sig))
    rho = sig / np.outer(nrm, nrm)
    cmat = sig * np.outer(nrm, nrm) ** (q - 1)
    he = hermite_monomials(q - 1)
    terms = []
    for u in range(n):
        for v in range(n):
            for p1, c1 in he.items():
                for p2, c2 in he.items():
                    terms.append((u, v, p1, p2, cmat[u, v] * c1 * c2))

    def expo(u, v, p1, p2, extra=None):
        e = [0] * n
        e[u] += p1
        e[v] += p2
        if extra is not None:
            u2, v2, p3, p4 = extra
            e[u2] += p3
            e[v2] += p4
        return e

    mean_q = math.fsum(
        cf * gaussian_moment(rho, expo(u, v, p1, p2)) for u, v, p1, p2, cf in terms
    )
    mean_q2 = math.fsum(
        cf * cf2 * gaussian_moment(rho, expo(u, v, p1, p2, (u2, v2, p3, p4)))
        for u, v, p1, p2, cf in terms
        for u2, v2, p3, p4, cf2 in terms
    )
    prefactor = phi**2 / math.factorial(q - 1) ** 2
    return prefactor**2 * (mean_q2 - mean_q**2)
