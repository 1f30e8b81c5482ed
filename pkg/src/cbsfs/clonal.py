"""Moments of the clonal subpopulation and their Monte-Carlo verification.

The clonal mass at time 0 — individuals carrying the genotype of the
population MRCA — has conditional moments E[Z_cl^n | Z0] =
E[Z0^n e^{-mu L_n} | Z0] with L_n the population-rooted tree length, which
reduce to signed combinations of Euler Beta factors in the rescaled
mutation rate alpha = mu/(2 beta theta).  The Beta combinations nearly
cancel for large n, so each factor is evaluated through log-Gamma and the
(n-1)- and (n-1)(n-2)-weighted terms are assembled as pre-multiplied
brackets that vanish identically at n = 1, 2 instead of dividing by zero.

Two independent Monte-Carlo routes back the closed forms: the genealogy
route (sample a replicate, compute L_n from the branch depths) and the
uniform product representation over n+1 independent uniforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from ._mc import map_replicates, mean_and_se
from .genealogy import population_tree_length, sample_population, sample_zetas
from .model import ModelParams, z0_moment
from .specfun import beta_fn


@dataclass(frozen=True)
class MomentReport:
    n: int
    analytic: float
    mc_mean: float | None = None
    mc_se: float | None = None
    reps: int | None = None

    def __post_init__(self) -> None:
        if self.mc_se is not None and self.mc_se < 0:
            raise ValueError("mc_se must be nonnegative")
        if not math.isfinite(self.analytic):
            raise ValueError("analytic moment must be finite")


@dataclass(frozen=True)
class ClonalSummary:
    e_r: float
    e_zcl: float
    cov_r_z0: float
    normalized_cov: float
    note: str


def u_moment(alpha: float, k: int, a: float) -> float:
    """E[U^{alpha+a} (1 - U^{1+alpha})^{k-1}] = Beta(k, 1 + a/(1+alpha))/(1+alpha)."""
    if k < 1:
        raise ValueError(f"u_moment requires k >= 1, got {k}")
    if a < 0 or alpha < 0:
        raise ValueError(f"u_moment requires a, alpha >= 0, got a={a}, alpha={alpha}")
    b = a / (1.0 + alpha)
    return beta_fn(k, 1.0 + b) / (1.0 + alpha)


def e_zcl_pow_r(params: ModelParams, n: int) -> float:
    """E[Z_cl^{n-1} R], the joint clonal-mass / clonal-fraction moment.

    alpha = 0 means no mutations, so the clone is the whole population and
    the value is E[Z0^{n-1}] exactly (the Beta factor at argument
    alpha/(1+alpha) diverges there; its alpha-weighted limit is 1).
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    a = params.alpha
    if a == 0.0:
        return z0_moment(params, n - 1)
    bracket = (
        beta_fn(n, (2.0 + a) / (1.0 + a))
        + beta_fn(n, a / (1.0 + a))
        - 2.0 / n
    )
    return a / (1.0 + a) ** n * bracket * z0_moment(params, n - 1)


def _scaled_brackets(alpha: float, n: int) -> dict[str, float]:
    """The six Beta combinations with their (1+alpha)^{-n} and 1/(n-1)(n-2)
    prefactors stripped; see zcl_moment_ratio_scaled for the assembly."""
    a = alpha
    q0 = a / (1.0 + a)
    q1 = 1.0 / (1.0 + a)
    q2 = (2.0 + a) / (1.0 + a)
    q3 = (3.0 + a) / (1.0 + a)
    b_q2 = beta_fn(n, q2)
    b_q3 = beta_fn(n, q3)
    b_q1 = beta_fn(n, q1)
    b_q0 = beta_fn(n, q0)
    # (n-1) beta(n-1, q0) continued through Gamma(n)Gamma(q0)/Gamma(n-1+q0)
    nm1_beta = math.exp(
        special.gammaln(n) + special.gammaln(q0) - special.gammaln(n - 1 + q0)
    )
    return {
        "A": 1.0 / n - b_q2,
        "A0": 1.0 / n - 2.0 * b_q2 + b_q3,
        "B": a * b_q0 - 2.0 * (1.0 + a) / n + (2.0 + a) * b_q2,
        "A2": ((1.0 + a) - (2.0 + a) * b_q2 - b_q1 + (3.0 + a) * b_q3) / (2.0 + a),
        "B0": a * b_q0 - 3.0 * (1.0 + a) / n + 3.0 * (2.0 + a) * b_q2 - (3.0 + a) * b_q3,
        "B2": (
            a * (1.0 + a) * nm1_beta
            - (2.0 + 2.0 * a) * (1.0 + a) / n
            - 2.0 * (1.0 + a) ** 2
            + 2.0 * (3.0 + 2.0 * a) * (2.0 + a) * b_q2
            + (2.0 + a) * b_q1
            - (4.0 + 2.0 * a) * (3.0 + a) * b_q3
        )
        / (2.0 + a),
    }


def zcl_moment_ratio_scaled(params: ModelParams, n: int) -> float:
    """(1+alpha)^n E[Z_cl^n] / E[Z0^n], the overflow-free moment ratio.

    This is the quantity whose n^{alpha/(1+alpha)}-scaled limit is
    (2 alpha/(2+alpha)) Gamma(alpha/(1+alpha)).
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    a = params.alpha
    if a == 0.0:
        return 1.0
    t = _scaled_brackets(a, n)
    # brackets: A carries no prefactor; A2, B0, B carry 1/(n-1); B2 carries
    # 1/((n-1)(n-2)) — all pre-multiplied out above
    inner = (
        3.0 * t["A0"]
        + 2.0 * ((n - 1) * t["A"] - t["A2"] + t["B0"])
        + (n - 2) * t["B"]
        - t["B2"]
    )
    return 2.0 / (n + 1) * inner


def e_zcl_pow(params: ModelParams, n: int) -> float:
    """E[Z_cl^n]; may overflow to inf for n large enough that E[Z0^n] does
    (use zcl_moment_ratio_scaled for asymptotics)."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    a = params.alpha
    if a == 0.0:
        return z0_moment(params, n)
    return zcl_moment_ratio_scaled(params, n) * (1.0 + a) ** (-n) * z0_moment(params, n)


def clonal_summary(params: ModelParams) -> ClonalSummary:
    """First moments of the clonal fraction R and mass Z_cl.

    ``normalized_cov`` is Cov(R, Z0)/(E[R] E[Z0]) = -1 + 3/(alpha+3), an
    exact identity of the closed forms.  The Pearson coefficient is a
    different number: it needs Var(R), which has no closed form here and
    is only Monte-Carlo estimable (E[R^n] = E[e^{-mu L_n}]).
    """
    a = params.alpha
    e_z0 = 1.0 / params.theta
    e_r = 2.0 / ((a + 1.0) * (a + 2.0))
    e_zcl = 6.0 / ((a + 1.0) * (a + 2.0) * (a + 3.0)) * e_z0
    cov = -2.0 * a / ((a + 1.0) * (a + 2.0) * (a + 3.0)) * e_z0
    return ClonalSummary(
        e_r=e_r,
        e_zcl=e_zcl,
        cov_r_z0=cov,
        normalized_cov=-1.0 + 3.0 / (a + 3.0),
        note=(
            "normalized_cov = Cov(R,Z0)/(E[R]E[Z0]); the Pearson "
            "coefficient requires Var(R), closed form unavailable, "
            "Monte-Carlo estimable via E[R^n] = E[e^(-mu L_n)]"
        ),
    )


MC_STATISTICS = ("zpow_r", "zpow")


def _clonal_replicate(args, rng) -> float:
    params, n, statistic = args
    config = sample_population(params, n, rng)
    zetas = sample_zetas(params, config, rng)
    length = population_tree_length(config, zetas)
    power = n - 1 if statistic == "zpow_r" else n
    return config.z0 ** power * math.exp(-params.mu * length)


def mc_clonal(
    params: ModelParams,
    n: int,
    reps: int,
    seed: int,
    statistic: str = "zpow_r",
    workers: int = 1,
) -> MomentReport:
    """Genealogy-route Monte Carlo for E[Z_cl^{n-1} R] or E[Z_cl^n].

    Each replicate samples an unconditioned population-rooted genealogy
    and evaluates Z0^p e^{-mu L_n}; the total length L_n comes from the
    branch depths (equal to the built tree's length, which is asserted
    separately in the tree tests).
    """
    if statistic not in MC_STATISTICS:
        raise ValueError(f"statistic must be one of {MC_STATISTICS}, got {statistic!r}")
    if reps < 100:
        raise ValueError(f"need reps >= 100, got {reps}")
    values = map_replicates(_clonal_replicate, (params, n, statistic), reps, seed, workers)
    mean, se = mean_and_se(values)
    analytic = e_zcl_pow_r(params, n) if statistic == "zpow_r" else e_zcl_pow(params, n)
    return MomentReport(
        n=n, analytic=analytic, mc_mean=float(mean[0]), mc_se=float(se[0]), reps=reps
    )


def v_representation_check(
    params: ModelParams, n: int, reps: int, seed: int
) -> MomentReport:
    """Second, tree-free Monte-Carlo route to E[Z_cl^{n-1} R]:
    E[Z0^{n-1}] * E[min(V_1..V_{n+1})^alpha * prod_{j=2}^n V_j^alpha]
    over independent uniforms V."""
    if reps < 100:
        raise ValueError(f"need reps >= 100, got {reps}")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0]))
    a = params.alpha
    scale = z0_moment(params, n - 1)
    v = rng.uniform(size=(reps, n + 1))
    stat = v.min(axis=1) ** a
    if n >= 2:
        stat = stat * np.prod(v[:, 1:n] ** a, axis=1)
    values = scale * stat
    mean = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(reps))
    return MomentReport(
        n=n, analytic=e_zcl_pow_r(params, n), mc_mean=mean, mc_se=se, reps=reps
    )
