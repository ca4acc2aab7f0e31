"""Experiment orchestration: Monte Carlo verification of the central limit
cases, non-central Cauchy/covariance studies in the Hermite regime, rate
tables on exact moments, and Hurst estimation from simulated sheets.

Replications run one stream each (stream_index = replication id) and land in
position-indexed arrays, so reports are bit-identical at any thread count.
All Monte Carlo moments are reported next to exactly evaluated counterparts.
"""

from __future__ import annotations

import json
import math
import subprocess
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import exact_moments, normalization
from .kernels import _hurst_value, _order_value, hermite_sheet_covariance
from .simulator import IncrementField, SeedSpec, SheetGrid, coarse_grain, sample_increment_field
from .variations import normalized_variation, partial_sum_process

__all__ = [
    "ExperimentConfig",
    "ReportRow",
    "ks_distance",
    "fit_rate_exponent",
    "run_clt_experiment",
    "run_noncentral_study",
    "run_rate_study",
    "covariance_check",
    "estimate_hurst",
    "write_report_csv",
    "write_samples_csv",
    "write_covariance_csv",
    "write_metadata_json",
    "REPORT_HEADER",
]

REPORT_HEADER = "kind,alpha,beta,q,N,M,reps,ks,mean,var,exact_ev2,rate_bound,seconds"
SAMPLES_HEADER = "kind,alpha,beta,q,N,M,rep,value"
COVARIANCE_HEADER = (
    "kind,alpha,beta,q,N,M,reps,t1,s1,t2,s2,mc_cov,exact_cov,mc_se,abs_dev"
)

EXPERIMENT_KINDS = ("clt", "noncentral", "rate", "hurst")

# Point pairs used by default in covariance checks: diagonal variances plus
# cross terms of the partial-sum process.
DEFAULT_COVARIANCE_POINTS = ((1.0, 1.0), (0.5, 0.5), (0.25, 0.75), (0.75, 0.25), (0.5, 1.0))


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one verification run."""

    alpha: float
    beta: float
    q: int
    grid_sizes: tuple
    replications: int
    master_seed: int
    experiment_kind: str
    threads: int | None = None
    measure_time: bool = True

    def __post_init__(self) -> None:
        _hurst_value(self.alpha)
        _hurst_value(self.beta)
        _order_value(self.q)
        if self.experiment_kind not in EXPERIMENT_KINDS:
            raise ValueError(f"experiment_kind must be one of {EXPERIMENT_KINDS}")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not self.grid_sizes:
            raise ValueError("grid_sizes must be nonempty")
        for n, m in self.grid_sizes:
            if n < 1 or m < 1:
                raise ValueError("grid sizes must be >= 1")
        if self.experiment_kind == "noncentral":
            self._check_nested()

    def _check_nested(self) -> None:
        sizes = list(self.grid_sizes)
        for (n1, m1), (n2, m2) in zip(sizes, sizes[1:]):
            if n2 != 2 * n1 or m2 != 2 * m1:
                raise ValueError(
                    "noncentral studies need dyadically nested grids "
                    f"(each level doubling both sides); got {sizes}"
                )


@dataclass(frozen=True)
class ReportRow:
    """One grid size's results; exact fields are bit-reproducible."""

    N: int
    M: int
    replications: int
    ks_distance: float
    sample_mean: float
    sample_variance: float
    exact_expected_square: float
    rate_bound: float
    wall_time_seconds: float


def _phi_normal(x: np.ndarray) -> np.ndarray:
    return np.array([0.5 * (1.0 + math.erf(v / math.sqrt(2.0))) for v in x])


def ks_distance(samples) -> float:
    """Two-sided Kolmogorov distance between the empirical CDF and the
    standard normal, evaluated at the sorted sample points."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n == 0:
        raise ValueError("ks_distance needs a nonempty sample")
    cdf = _phi_normal(x)
    upper = np.abs(np.arange(1, n + 1) / n - cdf)
    lower = np.abs(np.arange(0, n) / n - cdf)
    return float(np.maximum(upper, lower).max())


def fit_rate_exponent(points) -> float:
    """Slope of the least-squares line through (log x, log y)."""
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 3:
        raise ValueError("need at least 3 points to fit a rate exponent")
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    if min(xs) <= 0 or min(ys) <= 0:
        raise ValueError("rate fits require strictly positive coordinates")
    if len(set(xs)) < len(xs):
        raise ValueError("abscissae must be distinct")
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def _map_replications(reps: int, threads: int | None, fn) -> list:
    out = [None] * reps
    if threads is None or threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for rep, res in zip(range(reps), pool.map(fn, range(reps))):
                out[rep] = res
    else:
        for rep in range(reps):
            out[rep] = fn(rep)
    return out


def run_clt_experiment(config: ExperimentConfig) -> list[ReportRow]:
    """Monte Carlo check of asymptotic normality for the Gaussian regimes.

    For each grid size: simulate `replications` independent fields (stream
    index = replication id), form the normalized variations, and report their
    Kolmogorov distance to the standard normal next to the exact second
    moment and the rate-bound value.
    """
    regime = normalization.classify_regime(config.alpha, config.beta, config.q)
    if regime.case_id == 6:
        raise ValueError(
            "both exponents exceed the threshold: no central limit theorem; "
            "run the non-central study instead"
        )
    rows = []
    for n, m in config.grid_sizes:
        start = time.perf_counter()

        def one(rep: int, n=n, m=m) -> float:
            f = sample_increment_field(
                config.alpha, config.beta, n, m, SeedSpec(config.master_seed, rep)
            )
            return normalized_variation(f, config.q).tildeV

        samples = np.array(_map_replications(config.replications, config.threads, one))
        elapsed = time.perf_counter() - start if config.measure_time else 0.0
        rows.append(
            ReportRow(
                N=n,
                M=m,
                replications=config.replications,
                ks_distance=ks_distance(samples),
                sample_mean=float(np.mean(samples)),
                sample_variance=float(np.var(samples, ddof=1)),
                exact_expected_square=exact_moments.expected_square(
                    config.alpha, config.beta, config.q, n, m
                ).value,
                rate_bound=normalization.berry_esseen_rate(
                    config.alpha, config.beta, config.q, n, m
                ),
                wall_time_seconds=elapsed,
            )
        )
    return rows


@dataclass(frozen=True)
class NoncentralReport:
    """Outcome of a non-central study: per-level rows, the exact kernel table,
    and the cross-level Monte Carlo vs exact covariances."""

    rows: list
    exact_levels: list  # dicts: N, M, h_norm_sq, qfact_h_norm_sq, step_diff_sq
    cross_levels: list  # dicts: coarse/fine grids, exact_cov, mc_cov, mc_se
    samples: np.ndarray = field(repr=False, default=None)


def run_noncentral_study(config: ExperimentConfig) -> NoncentralReport:
    """Exact and Monte Carlo study of the L^2 convergence in the Hermite regime.

    Exact part: kernel norms per level, q! * ||h||^2 -> 1, and the Cauchy
    differences ||h_{2N,2M}-h_{N,M}||^2.  Monte Carlo part: one fine field per
    replication, coarse-grained to every level, giving the joint samples whose
    cross-level covariance is compared with q! <h_level, h_level'>.
    """
    regime = normalization.classify_regime(config.alpha, config.beta, config.q)
    if regime.case_id != 6:
        raise ValueError("the non-central study applies only when both exponents exceed 1 - 1/(2q)")
    a, b, q = config.alpha, config.beta, config.q
    levels = list(config.grid_sizes)
    n_fine, m_fine = levels[-1]
    qf = math.factorial(q)

    inner = {}
    for i, (n1, m1) in enumerate(levels):
        for n2, m2 in levels[i:]:
            inner[(n1, m1, n2, m2)] = exact_moments.kernel_inner_product(
                a, b, q, ((n1, m1), (n2, m2))
            ).value
    exact_levels = []
    for i, (n, m) in enumerate(levels):
        h2 = inner[(n, m, n, m)]
        step = None
        if i + 1 < len(levels):
            n2, m2 = levels[i + 1]
            step = inner[(n2, m2, n2, m2)] + h2 - 2.0 * inner[(n, m, n2, m2)]
        exact_levels.append(
            {"N": n, "M": m, "h_norm_sq": h2, "qfact_h_norm_sq": qf * h2, "step_diff_sq": step}
        )

    start = time.perf_counter()

    def one(rep: int) -> list[float]:
        fine = sample_increment_field(a, b, n_fine, m_fine, SeedSpec(config.master_seed, rep))
        vals = []
        for n, m in levels:
            f = coarse_grain(fine, n_fine // n, m_fine // m)
            vals.append(normalized_variation(f, q).tildeV)
        return vals

    samples = np.array(_map_replications(config.replications, config.threads, one))
    elapsed = time.perf_counter() - start if config.measure_time else 0.0

    cross_levels = []
    for i in range(len(levels)):
        for j in range(i + 1, len(levels)):
            (n1, m1), (n2, m2) = levels[i], levels[j]
            prod = (samples[:, i] - samples[:, i].mean()) * (samples[:, j] - samples[:, j].mean())
            mc_cov = float(np.mean(prod))
            mc_se = float(np.std(prod, ddof=1) / math.sqrt(config.replications))
            cross_levels.append(
                {
                    "N": n1, "M": m1, "N2": n2, "M2": m2,
                    "exact_cov": qf * inner[(n1, m1, n2, m2)],
                    "mc_cov": mc_cov,
                    "mc_se": mc_se,
                }
            )

    rows = []
    per_level_time = elapsed / len(levels)
    for i, (n, m) in enumerate(levels):
        vals = samples[:, i]
        rows.append(
            ReportRow(
                N=n,
                M=m,
                replications=config.replications,
                ks_distance=ks_distance(vals),
                sample_mean=float(np.mean(vals)),
                sample_variance=float(np.var(vals, ddof=1)),
                exact_expected_square=qf * inner[(n, m, n, m)],
                rate_bound=float("nan"),
                wall_time_seconds=per_level_time,
            )
        )
    return NoncentralReport(rows=rows, exact_levels=exact_levels, cross_levels=cross_levels, samples=samples)


def run_rate_study(config: ExperimentConfig) -> list[ReportRow]:
    """Deterministic rate rows: exact E[V~^2] and the rate bound per grid.

    No simulation; the Monte Carlo columns are written as NaN and the fitted
    slope of |E[V~^2] - 1| against N is available via fit_rate_exponent.
    """
    rows = []
    for n, m in config.grid_sizes:
        rows.append(
            ReportRow(
                N=n,
                M=m,
                replications=0,
                ks_distance=float("nan"),
                sample_mean=float("nan"),
                sample_variance=float("nan"),
                exact_expected_square=exact_moments.expected_square(
                    config.alpha, config.beta, config.q, n, m
                ).value,
                rate_bound=(
                    normalization.berry_esseen_rate(config.alpha, config.beta, config.q, n, m)
                    if normalization.classify_regime(config.alpha, config.beta, config.q).case_id != 6
                    else float("nan")
                ),
                wall_time_seconds=0.0,
            )
        )
    return rows


@dataclass(frozen=True)
class CovariancePair:
    p1: tuple
    p2: tuple
    mc_cov: float
    exact_cov: float
    mc_se: float

    @property
    def abs_dev(self) -> float:
        return abs(self.mc_cov - self.exact_cov)


@dataclass(frozen=True)
class CovarianceReport:
    pairs: list
    max_abs_dev: float
    wall_time_seconds: float


def covariance_check(config: ExperimentConfig, points=None) -> CovarianceReport:
    """Monte Carlo covariance of the partial-sum process against the Hermite
    sheet covariance, over all pairs of the given evaluation points."""
    regime = normalization.classify_regime(config.alpha, config.beta, config.q)
    if regime.case_id != 6:
        raise ValueError("covariance checks target the Hermite regime (case 6)")
    pts = [tuple(p) for p in (points if points is not None else DEFAULT_COVARIANCE_POINTS)]
    n, m = config.grid_sizes[-1]
    start = time.perf_counter()

    def one(rep: int) -> list[float]:
        f = sample_increment_field(
            config.alpha, config.beta, n, m, SeedSpec(config.master_seed, rep)
        )
        return partial_sum_process(f, config.q, pts)

    vals = np.array(_map_replications(config.replications, config.threads, one))
    elapsed = time.perf_counter() - start if config.measure_time else 0.0
    centered = vals - vals.mean(axis=0, keepdims=True)
    pairs = []
    for i in range(len(pts)):
        for j in range(i, len(pts)):
            prod = centered[:, i] * centered[:, j]
            mc = float(np.mean(prod))
            se = float(np.std(prod, ddof=1) / math.sqrt(config.replications))
            exact = hermite_sheet_covariance(
                config.q, config.alpha, config.beta, pts[i], pts[j]
            )
            pairs.append(CovariancePair(pts[i], pts[j], mc, exact, se))
    return CovarianceReport(
        pairs=pairs,
        max_abs_dev=max(p.abs_dev for p in pairs),
        wall_time_seconds=elapsed,
    )


def estimate_hurst(sheet: SheetGrid, levels: int = 3) -> tuple[float, float]:
    """Log-regression Hurst estimates from axis-wise quadratic variations.

    For dyadic coarsenings along one axis at a time, the mean squared
    rectangle increment scales as N^{-2 alpha} M^{-2 beta}; regressing its log
    on log N at fixed M gives slope -2 alpha_hat, and symmetrically for beta.
    Needs `levels` >= 3 dyadic scales per axis.
    """
    if levels < 3:
        raise ValueError("need at least 3 dyadic scales per axis")
    n, m = sheet.N, sheet.M
    if n % 2 ** (levels - 1) or m % 2 ** (levels - 1):
        raise ValueError(
            f"grid ({n}, {m}) does not support {levels} dyadic scales per axis"
        )
    w = sheet.values

    def rect_qv(step_i: int, step_j: int) -> float:
        ws = w[::step_i, ::step_j]
        inc = ws[1:, 1:] - ws[:-1, 1:] - ws[1:, :-1] + ws[:-1, :-1]
        return float(np.mean(inc**2))

    pts_a = [(n // 2**k, rect_qv(2**k, 1)) for k in range(levels)]
    pts_b = [(m // 2**k, rect_qv(1, 2**k)) for k in range(levels)]
    alpha_hat = -0.5 * fit_rate_exponent(pts_a)
    beta_hat = -0.5 * fit_rate_exponent(pts_b)
    return alpha_hat, beta_hat


# ---------------------------------------------------------------------------
# Serialization: CSV reports with round-trip float formatting, JSON sidecar
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(float(x))
    return str(x)


def write_report_csv(path, config: ExperimentConfig, rows) -> None:
    lines = [REPORT_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                _fmt(v)
                for v in (
                    config.experiment_kind,
                    config.alpha,
                    config.beta,
                    config.q,
                    r.N,
                    r.M,
                    r.replications,
                    r.ks_distance,
                    r.sample_mean,
                    r.sample_variance,
                    r.exact_expected_square,
                    r.rate_bound,
                    r.wall_time_seconds,
                )
            )
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_samples_csv(path, config: ExperimentConfig, grid, samples) -> None:
    n, m = grid
    lines = [SAMPLES_HEADER]
    for rep, v in enumerate(samples):
        lines.append(
            ",".join(
                _fmt(x)
                for x in (
                    config.experiment_kind, config.alpha, config.beta, config.q,
                    n, m, rep, float(v),
                )
            )
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_covariance_csv(path, config: ExperimentConfig, report: CovarianceReport) -> None:
    n, m = config.grid_sizes[-1]
    lines = [COVARIANCE_HEADER]
    for p in report.pairs:
        lines.append(
            ",".join(
                _fmt(x)
                for x in (
                    config.experiment_kind, config.alpha, config.beta, config.q,
                    n, m, config.replications,
                    p.p1[0], p.p1[1], p.p2[0], p.p2[1],
                    p.mc_cov, p.exact_cov, p.mc_se, p.abs_dev,
                )
            )
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _git_hash() -> str:
    try:
        out = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
            check=False,
            text=True,
        )
        return out.stdout.strip() or "nogit"
    except OSError:
        return "nogit"


def write_metadata_json(path, config: ExperimentConfig, extra=None) -> None:
    from . import __version__

    payload = {
        "config": {
            "alpha": config.alpha,
            "beta": config.beta,
            "q": config.q,
            "grid_sizes": [list(g) for g in config.grid_sizes],
            "replications": config.replications,
            "master_seed": config.master_seed,
            "experiment_kind": config.experiment_kind,
        },
        "seed": config.master_seed,
        "library_version": __version__,
        "git_hash": _git_hash(),
    }
    if extra:
        payload.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def default_report_name(config: ExperimentConfig) -> str:
    return (
        f"{config.experiment_kind}_{config.alpha:g}_{config.beta:g}"
        f"_q{config.q}_{config.master_seed}.csv"
    )
