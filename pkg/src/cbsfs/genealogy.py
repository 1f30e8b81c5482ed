"""Exact simulation of the sampled ancestral structure.

A replicate is built in three steps: sample the population interval and
the n leaf positions (:func:`sample_population`), attach to every ordered
position the interval length it governs (:func:`intervals`), and draw one
branch depth per interval (:func:`sample_zetas`).  The pair
(positions, depths) is the ancestral point measure; everything downstream
(trees, mutation counts, admissible lengths) is a deterministic function
of it.

The closed-form window statistics at the bottom (:func:`tmrca_consecutive`,
:func:`admissible_length`, :func:`Lk_total`) are the fast route used by the
Monte-Carlo estimators; the explicit tree in :mod:`cbsfs.tree` is the slow
geometric oracle they are tested against.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class LeafConfig:
    """A sampled population interval with ordered leaf positions.

    ``positions`` has length n+2: the interval endpoints -e_g and e_d at
    ranks 0 and n+1 and the n sample leaves in between, strictly
    increasing, with the spine leaf at position exactly 0.0 at rank
    ``spine_index``.  ``labels[i]`` is the original sample index (0 for the
    spine individual) of the leaf at rank i+1.
    """

    n: int
    e_g: float
    e_d: float
    z0: float
    positions: tuple[float, ...]
    spine_index: int
    labels: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if len(self.positions) != self.n + 2:
            raise ValueError("positions must have length n + 2")
        if len(self.labels) != self.n:
            raise ValueError("labels must have length n")
        if self.positions[0] != -self.e_g or self.positions[-1] != self.e_d:
            raise ValueError("positions must start at -e_g and end at e_d")
        if abs(self.z0 - (self.e_g + self.e_d)) > 1e-12 * max(1.0, self.z0):
            raise ValueError("z0 must equal e_g + e_d")
        if any(a >= b for a, b in zip(self.positions, self.positions[1:])):
            raise ValueError("positions must be strictly increasing")
        if not (1 <= self.spine_index <= self.n):
            raise ValueError("spine_index must lie in [1, n]")
        if self.positions[self.spine_index] != 0.0:
            raise ValueError("positions[spine_index] must be exactly 0.0")

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "n": self.n,
            "e_g": self.e_g,
            "e_d": self.e_d,
            "z0": self.z0,
            "positions": list(self.positions),
            "spine_index": self.spine_index,
            "labels": list(self.labels),
        }


def leaf_config_from_dict(data: dict) -> LeafConfig:
    return LeafConfig(
        n=int(data["n"]),
        e_g=float(data["e_g"]),
        e_d=float(data["e_d"]),
        z0=float(data["z0"]),
        positions=tuple(float(x) for x in data["positions"]),
        spine_index=int(data["spine_index"]),
        labels=tuple(int(x) for x in data["labels"]),
    )


@dataclass(frozen=True)
class ZetaVector:
    """Branch depths, one per rank 0..n+1; the spine rank has depth 0."""

    zetas: tuple[float, ...]

    def __post_init__(self) -> None:
        if any(not (math.isfinite(z) and z >= 0.0) for z in self.zetas):
            raise ValueError("branch depths must be finite and nonnegative")

    def __len__(self) -> int:
        return len(self.zetas)

    def to_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "zetas": list(self.zetas)}


def zeta_vector_from_dict(data: dict) -> ZetaVector:
    return ZetaVector(zetas=tuple(float(z) for z in data["zetas"]))


@dataclass(frozen=True)
class AncestralPointMeasure:
    """Atoms (position, branch depth) for the n sample leaves, rank order."""

    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        xs = [x for x, _ in self.atoms]
        if any(a >= b for a, b in zip(xs, xs[1:])):
            raise ValueError("atom positions must be strictly increasing")
        if not any(x == 0.0 and d == 0.0 for x, d in self.atoms):
            raise ValueError("the spine atom (0, 0) is missing")


def sample_population(
    params: ModelParams,
    n: int,
    rng: np.random.Generator,
    condition_z0: float | None = None,
    max_retries: int = 64,
) -> LeafConfig:
    """Draw a population interval and n uniform sample leaves on it.

    Unconditioned, the two interval arms are independent Exp(2 theta).
    Conditioned on total size z, the left arm is Uniform(0, z) — the
    conditional law of an exponential given the sum.  Position ties are a
    probability-zero event; if floating point produces one the replicate
    is logged and redrawn rather than perturbed.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if condition_z0 is not None and not condition_z0 > 0:
        raise ValueError(f"condition_z0 must be positive, got {condition_z0}")
    scale = 1.0 / (2.0 * params.theta)
    for _ in range(max_retries):
        if condition_z0 is None:
            e_g = rng.exponential(scale)
            e_d = rng.exponential(scale)
        else:
            e_g = rng.uniform(0.0, condition_z0)
            e_d = condition_z0 - e_g
        z0 = e_g + e_d
        leaves = np.empty(n)
        leaves[0] = 0.0  # the spine individual
        if n > 1:
            leaves[1:] = z0 * rng.uniform(size=n - 1) - e_g
        order = np.argsort(leaves, kind="stable")
        positions = np.concatenate(([-e_g], leaves[order], [e_d]))
        if np.any(np.diff(positions) <= 0.0):
            logger.warning("position collision (probability-zero); redrawing replicate")
            continue
        spine_index = 1 + int(np.nonzero(leaves[order] == 0.0)[0][0])
        return LeafConfig(
            n=n,
            e_g=float(e_g),
            e_d=float(e_d),
            z0=float(z0),
            positions=tuple(float(x) for x in positions),
            spine_index=spine_index,
            labels=tuple(int(i) for i in order),
        )
    raise RuntimeError(f"could not draw distinct positions in {max_retries} attempts")


def intervals(config: LeafConfig) -> np.ndarray:
    """Interval length governed by each rank: the gap toward the spine side.

    Ranks left of the spine own the gap to their right neighbour, ranks
    right of it the gap to their left neighbour, and the spine rank owns
    the zero-length singleton; the lengths tile the interval, summing to z0.
    """
    pos = np.asarray(config.positions)
    out = np.empty(config.n + 2)
    for k in range(config.n + 2):
        if pos[k] < 0.0:
            out[k] = pos[k + 1] - pos[k]
        elif pos[k] > 0.0:
            out[k] = pos[k] - pos[k - 1]
        else:
            out[k] = 0.0
    return out


def sample_zeta_star(params: ModelParams, delta: float, rng: np.random.Generator) -> float:
    """One draw of the tallest-excursion height on an interval of mass delta.

    Distributed as log(1 + 2 theta delta / E) / (2 beta theta) with E a unit
    exponential; delta = 0 returns exactly 0 and consumes no randomness.
    """
    if delta < 0:
        raise ValueError(f"delta must be nonnegative, got {delta}")
    if delta == 0.0:
        return 0.0
    e = rng.exponential(1.0)
    while e == 0.0:  # probability-zero underflow guard
        e = rng.exponential(1.0)
    return math.log1p(2.0 * params.theta * delta / e) / (2.0 * params.beta * params.theta)


def sample_zetas(params: ModelParams, config: LeafConfig, rng: np.random.Generator) -> ZetaVector:
    """Independent branch depths, one per rank, each scaled by its interval.

    Draws one unit exponential per rank in a single vectorized call (the
    zero-length spine interval yields exactly 0 regardless of its draw).
    """
    lengths = intervals(config)
    e = rng.exponential(1.0, size=config.n + 2)
    while np.any(e == 0.0):  # probability-zero underflow guard
        e = rng.exponential(1.0, size=config.n + 2)
    zetas = np.log1p(2.0 * params.theta * lengths / e) / (2.0 * params.beta * params.theta)
    return ZetaVector(zetas=tuple(float(z) for z in zetas))


def ancestral_measure(config: LeafConfig, zetas: ZetaVector) -> AncestralPointMeasure:
    """Restrict (position, depth) pairs to the n sample leaves."""
    return AncestralPointMeasure(
        atoms=tuple(
            (config.positions[k], zetas.zetas[k]) for k in range(1, config.n + 1)
        )
    )


def tmrca_consecutive(config: LeafConfig, zetas: ZetaVector, j: int, l: int) -> float:
    """Depth of the MRCA of the consecutive leaves at ranks j..l.

    The window maximum of the depths, dropping the endpoint whose side of
    the spine makes its own branch irrelevant; a singleton window is its
    own ancestor at depth 0.
    """
    n = config.n
    if not (1 <= j <= l <= n):
        raise IndexError(f"need 1 <= j <= l <= n, got j={j}, l={l}, n={n}")
    if j == l:
        return 0.0
    x = config.positions
    z = zetas.zetas
    if x[j] >= 0.0:
        return max(z[j + 1 : l + 1])
    if x[l] <= 0.0:
        return max(z[j:l])
    return max(z[j : l + 1])


def admissible_length(config: LeafConfig, zetas: ZetaVector, j: int, l: int) -> float:
    """Branch length carrying mutations shared by exactly the ranks j..l.

    The stretch between the window MRCA and the shallower of the two
    flanking branches, clamped at 0.  Flanks at the interval endpoints
    (ranks 0 and n+1) count as infinitely deep: in the sample-rooted tree
    a mutation there would sit above the sample MRCA and be carried by
    all n leaves, which is outside the window sizes k <= n-1 allowed here.
    """
    n = config.n
    k = l - j + 1
    if not (1 <= j <= l <= n):
        raise IndexError(f"need 1 <= j <= l <= n, got j={j}, l={l}, n={n}")
    if k > n - 1:
        raise IndexError(f"window size {k} must be <= n-1 = {n - 1}")
    x = config.positions
    z = zetas.zetas
    mrca = tmrca_consecutive(config, zetas, j, l)
    left = math.inf if j - 1 == 0 else z[j - 1]
    right = math.inf if l + 1 == n + 1 else z[l + 1]
    if x[j] > 0.0:
        top = min(z[j], right)
    elif x[l] < 0.0:
        top = min(left, z[l])
    else:
        top = min(left, right)
    return max(top - mrca, 0.0)


def Lk_total(config: LeafConfig, zetas: ZetaVector, k: int) -> float:
    """Total branch length carrying mutations shared by exactly k leaves."""
    n = config.n
    if not (1 <= k <= n - 1):
        raise IndexError(f"need 1 <= k <= n-1, got k={k}, n={n}")
    return sum(
        admissible_length(config, zetas, j, j + k - 1) for j in range(1, n - k + 2)
    )


def Lk_all(config: LeafConfig, zetas: ZetaVector) -> np.ndarray:
    """All of L_1..L_{n-1} for one replicate (index k-1 holds L_k)."""
    return np.array([Lk_total(config, zetas, k) for k in range(1, config.n)])


def sample_tree_length(config: LeafConfig, zetas: ZetaVector) -> float:
    """Total length of the sample-rooted tree: spine to the deepest sample
    branch plus all sample branch depths."""
    z = zetas.zetas
    interior = z[1 : config.n + 1]
    return max(interior) + sum(interior)


def population_tree_length(config: LeafConfig, zetas: ZetaVector) -> float:
    """Total length of the population-rooted tree: spine to the population
    MRCA plus all sample branch depths."""
    z = zetas.zetas
    return max(z) + sum(z[1 : config.n + 1])
