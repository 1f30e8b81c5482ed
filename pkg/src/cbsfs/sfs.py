"""Expected and simulated site frequency spectra, and the continuum density.

The analytic route is the order-statistic expectation S_l (a Beta-weighted
quadrature of the mean tallest-excursion height), combined into per-class
expected branch lengths E[L_k | Z0] and mutation counts mu * E[L_k | Z0].
The large-n shape of k * E[xi_k] is the Kingman constant plus the
distortion g1, whose evaluation needs the first two derivatives of the h1
kernel; the bounded-remainder residual g2 is computed as exactly that: the
scaled difference between the exact expectation and the two leading terms.

The simulated route replays the genealogy sampler and either averages
mu * L_k directly or draws Poisson counts with those means.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from ._mc import map_replicates, mean_and_se
from .genealogy import Lk_all, sample_population, sample_zetas
from .model import ModelParams, canonical_density
from .specfun import (
    DEFAULT_QUAD,
    EULER_GAMMA,
    H_closed,
    QuadratureSpec,
    adaptive_quad,
    gamma_upper_zero,
    h1_deriv,
)


@dataclass(frozen=True)
class SfsRow:
    k: int
    expected_L: float
    expected_xi: float
    mc_mean: float | None = None
    mc_se: float | None = None


@dataclass(frozen=True)
class SfsTable:
    n: int
    rows: tuple[SfsRow, ...]

    def __post_init__(self) -> None:
        for row in self.rows:
            if row.expected_L < 0:
                raise ValueError(f"expected_L must be >= 0 at k={row.k}")

    def expected_xi_array(self) -> np.ndarray:
        return np.array([row.expected_xi for row in self.rows])


@dataclass(frozen=True)
class DensityCurve:
    points: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        fs = [f for _, f in self.points]
        if any(f <= 0 for f in fs):
            raise ValueError("density values must be positive")
        if any(a <= b for a, b in zip(fs, fs[1:])):
            raise ValueError("density must decrease along the grid")


def s_ell(
    params: ModelParams,
    n: int,
    ell: int,
    z0: float,
    spec: QuadratureSpec = DEFAULT_QUAD,
) -> float:
    """Mean tallest-excursion height over the l-th of n ordered uniforms.

    S_0 = 0; otherwise the Beta(l, n-l+1) expectation of
    (z0 v / beta) * H(2 theta z0 v), by adaptive quadrature with
    breakpoints at the Beta bulk (the density is a sharp spike for large n).
    """
    if not (0 <= ell <= n):
        raise IndexError(f"need 0 <= ell <= n, got ell={ell}, n={n}")
    if not z0 > 0:
        raise ValueError(f"z0 must be positive, got {z0}")
    if ell == 0:
        return 0.0
    log_norm = special.gammaln(n + 1) - special.gammaln(ell) - special.gammaln(n - ell + 1)
    two_theta_z0 = 2.0 * params.theta * z0

    def integrand(v: float) -> float:
        log_pdf = log_norm + (ell - 1) * math.log(v) + (n - ell) * math.log1p(-v)
        return math.exp(log_pdf) * (z0 * v / params.beta) * H_closed(two_theta_z0 * v)

    mean = ell / (n + 1)
    sd = math.sqrt(mean * (1 - mean) / (n + 2))
    points = sorted({max(1e-12, mean - 8 * sd), mean, min(1 - 1e-12, mean + 8 * sd)})
    return adaptive_quad(integrand, 0.0, 1.0, spec, points=points)


def _s_table(params: ModelParams, n: int, z0: float, spec: QuadratureSpec) -> np.ndarray:
    return np.array([s_ell(params, n, ell, z0, spec) for ell in range(n + 1)])


def expected_Lk(
    params: ModelParams,
    n: int,
    k: int,
    z0: float,
    spec: QuadratureSpec = DEFAULT_QUAD,
    _s: np.ndarray | None = None,
) -> float:
    """E[L_k | Z0 = z0] = (n-k)(2 S_k - S_{k-1} - S_{k+1}) + S_{k+1} - S_{k-1}."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if not (1 <= k <= n - 1):
        raise IndexError(f"need 1 <= k <= n-1, got k={k}")
    if _s is not None:
        s_km, s_k, s_kp = _s[k - 1], _s[k], _s[k + 1]
    else:
        s_km = s_ell(params, n, k - 1, z0, spec)
        s_k = s_ell(params, n, k, z0, spec)
        s_kp = s_ell(params, n, k + 1, z0, spec)
    return (n - k) * (2.0 * s_k - s_km - s_kp) + s_kp - s_km


def _z0_quad_nodes(params: ModelParams, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    # Gauss-Laguerre with weight t e^{-t} integrates the Gamma(2, 2 theta)
    # law exactly after t = 2 theta z
    t, w = special.roots_genlaguerre(nodes, 1.0)
    return t / (2.0 * params.theta), w


def expected_sfs(
    params: ModelParams,
    n: int,
    z0: float | None = None,
    spec: QuadratureSpec = DEFAULT_QUAD,
    z0_nodes: int = 40,
) -> SfsTable:
    """Expected L_k and xi_k for k = 1..n-1, conditioned on z0 or averaged
    over the stationary population-size law when z0 is None."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if z0 is not None:
        s = _s_table(params, n, z0, spec)
        lk = np.array(
            [expected_Lk(params, n, k, z0, spec, _s=s) for k in range(1, n)]
        )
    else:
        zs, ws = _z0_quad_nodes(params, z0_nodes)
        lk = np.zeros(n - 1)
        for z, w in zip(zs, ws):
            s = _s_table(params, n, float(z), spec)
            lk += w * np.array(
                [expected_Lk(params, n, k, float(z), spec, _s=s) for k in range(1, n)]
            )
    rows = tuple(
        SfsRow(k=k, expected_L=float(lk[k - 1]), expected_xi=float(params.mu * lk[k - 1]))
        for k in range(1, n)
    )
    return SfsTable(n=n, rows=rows)


def g1(z: float, u: float, spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Distortion of the expected spectrum against the 1/k shape.

    Continuous on z > 0, 0 <= u <= 1 with g1(z, 0) = 0 (the u log u terms
    have a removable limit; u below 1e-300 is clamped to that limit before
    log() can produce -inf).
    """
    if not z > 0:
        raise ValueError(f"g1 requires z > 0, got {z}")
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"g1 requires 0 <= u <= 1, got {u}")
    if u < 1e-300:
        return 0.0
    log_u = math.log(u)
    log_2z = math.log(2.0 * z)
    x = 2.0 * z * u
    term_const = u * (-2.0 * log_u - 1.0 - 2.0 * EULER_GAMMA - 2.0 * log_2z)
    term_z = z * u * (2.0 * (1.0 - 3.0 * u) * (log_u + log_2z) + 11.0 / 3.0 - 7.0 * u)
    term_z2 = (
        (2.0 / 3.0)
        * z * z * u * u
        * (6.0 * (1.0 - 2.0 * u) * (log_u + log_2z) + 5.0 - 7.0 * u)
    )
    term_h = 2.0 * u * h1_deriv(x, 1, spec) - 2.0 * z * u * (1.0 - u) * h1_deriv(x, 2, spec)
    return term_const + term_z + term_z2 + term_h


def g2_residual(
    params: ModelParams,
    n: int,
    k: int,
    z0: float,
    spec: QuadratureSpec = DEFAULT_QUAD,
    _s: np.ndarray | None = None,
) -> float:
    """Scaled remainder after the 1/k and g1/k terms are removed:
    (n^2/sqrt(k)) * (beta E[L_k|Z0]/z0 - 1/k - g1(theta z0, k/n)/k)."""
    lk = expected_Lk(params, n, k, z0, spec, _s=_s)
    lead = 1.0 / k + g1(params.theta * z0, k / n, spec) / k
    return (n * n / math.sqrt(k)) * (params.beta * lk / z0 - lead)


def _sfs_replicate(args, rng) -> np.ndarray:
    params, n, z0, mode = args
    config = sample_population(params, n, rng, condition_z0=z0)
    zetas = sample_zetas(params, config, rng)
    lk = Lk_all(config, zetas)
    if mode == "poisson-counts":
        return rng.poisson(params.mu * lk).astype(float)
    return params.mu * lk


SIMULATE_MODES = ("expected-lengths", "poisson-counts")


def simulate_sfs(
    params: ModelParams,
    n: int,
    reps: int,
    seed: int,
    z0: float | None = None,
    mode: str = "expected-lengths",
    workers: int = 1,
    with_expected: bool = True,
    spec: QuadratureSpec = DEFAULT_QUAD,
) -> SfsTable:
    """Monte-Carlo spectrum over seeded replicates.

    "expected-lengths" averages mu * L_k per replicate; "poisson-counts"
    draws the mutation counts themselves (same means, larger variance).
    Analytic columns are filled alongside unless with_expected is False.
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if mode not in SIMULATE_MODES:
        raise ValueError(f"mode must be one of {SIMULATE_MODES}, got {mode!r}")
    values = map_replicates(_sfs_replicate, (params, n, z0, mode), reps, seed, workers)
    mean, se = mean_and_se(values)
    if with_expected:
        analytic = expected_sfs(params, n, z0, spec)
        lk = [row.expected_L for row in analytic.rows]
    else:
        lk = [math.nan] * (n - 1)
    rows = tuple(
        SfsRow(
            k=k,
            expected_L=lk[k - 1],
            expected_xi=params.mu * lk[k - 1],
            mc_mean=float(mean[k - 1]),
            mc_se=float(se[k - 1]),
        )
        for k in range(1, n)
    )
    return SfsTable(n=n, rows=rows)


def mean_density(params: ModelParams, r: float) -> float:
    """Density of the mean frequency measure at carrier mass r > 0:
    (mu/beta) (e^{-2 theta r}/(theta r) + e^{-2 theta r} + 2 theta r Gamma(0, 2 theta r))."""
    if not r > 0:
        raise ValueError(f"mean_density requires r > 0 (it diverges at 0), got {r}")
    x = 2.0 * params.theta * r
    decay = math.exp(-x)
    return (params.mu / params.beta) * (
        decay / (params.theta * r) + decay + x * gamma_upper_zero(x)
    )


def density_curve(params: ModelParams, grid) -> DensityCurve:
    rs = sorted(float(r) for r in grid)
    return DensityCurve(points=tuple((r, mean_density(params, r)) for r in rs))


def density_branch_check(
    params: ModelParams, r: float, spec: QuadratureSpec = DEFAULT_QUAD
) -> float:
    """Quadrature route to the non-spine part of the density (without mu):
    (1/theta) int_0^inf q_t(r) dt, to compare with e^{-2 theta r}/(beta theta r)."""
    if not r > 0:
        raise ValueError(f"density_branch_check requires r > 0, got {r}")
    return (
        adaptive_quad(lambda t: canonical_density(params, t, r), 0.0, math.inf, spec)
        / params.theta
    )


def density_spine_check(
    params: ModelParams, r: float, spec: QuadratureSpec = DEFAULT_QUAD
) -> float:
    """Quadrature route to the spine part of the density (without mu):
    (2 theta/beta) r int_0^1 (1+u)/u^2 e^{-2 theta r/u} du, to compare with
    (1/beta)(e^{-2 theta r} + 2 theta r Gamma(0, 2 theta r))."""
    if not r > 0:
        raise ValueError(f"density_spine_check requires r > 0, got {r}")
    x = 2.0 * params.theta * r

    def integrand(u: float) -> float:
        return (1.0 + u) / (u * u) * math.exp(-x / u)

    return (x / params.beta) * adaptive_quad(integrand, 0.0, 1.0, spec)


def g1_curve(z_values, u_grid, spec: QuadratureSpec = DEFAULT_QUAD) -> list[list[float]]:
    """Rows (u, g1(z_1, u), ..., g1(z_m, u)) for export; u = 0 rows are exact 0."""
    zs = [float(z) for z in z_values]
    rows = []
    for u in u_grid:
        u = float(u)
        rows.append([u] + [g1(z, u, spec) for z in zs])
    return rows
