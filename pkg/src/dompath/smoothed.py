"""rho-perturbation of the edge weight vectors and hull-size trials.

The distance and loss vectors of the socket graph are each normalised,
rotated by a random angle drawn from a truncated exponential law, and
scaled back. Perturbed weights may be negative, so shortest paths on the
perturbed graph use a label-correcting search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .graph import G2Explicit
from .hull import HullResult, exact_hull
from .psp import INF, PathSummary, hybrid_weights


class PerturbationAborted(RuntimeError):
    """Too many draws rejected; rho is too large for this instance."""


class NegativeCycle(RuntimeError):
    pass


def sample_angle(rho: float, rng: np.random.Generator, size=None):
    """Exp(mean rho) conditioned on [0, pi], by inverse CDF."""
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    u = rng.random(size)
    mass = -math.expm1(-math.pi / rho)
    return -rho * np.log1p(-u * mass)


def rho_perturb(u: np.ndarray, rho: float, rng: np.random.Generator) -> np.ndarray:
    """Rotate unit vector u by a random angle towards a uniform orthogonal direction."""
    u = np.asarray(u, dtype=float)
    norm = float(np.linalg.norm(u))
    if norm == 0:
        raise ValueError("zero vector")
    if abs(norm - 1) > 1e-9:
        raise ValueError(f"expected a unit vector, norm is {norm}")
    if len(u) < 2:
        raise ValueError("need at least two coordinates")
    theta = float(sample_angle(rho, rng))
    while True:
        g = rng.standard_normal(len(u))
        w = g - (g @ u) * u
        wn = float(np.linalg.norm(w))
        if wn > 1e-12:
            break
    w /= wn
    return math.cos(theta) * u + math.sin(theta) * w


@dataclass
class PerturbationConfig:
    rho: float
    seed: int = 0
    trials: int = 100
    # "cycles": reject draws creating a negative cycle in dist or loss
    # "entries": reject any draw with a negative entry
    # "none": never reject (a negative cycle then raises)
    policy: str = "cycles"
    max_reject_rate: float = 0.5

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if self.policy not in ("cycles", "entries", "none"):
            raise ValueError(f"unknown rejection policy {self.policy!r}")


@dataclass
class TrialReport:
    m: int
    rho: float
    bound: float
    B: list = field(default_factory=list)
    rejected_draws: int = 0
    rejections: list = field(default_factory=list)      # per trial

    @property
    def mean_B(self) -> float:
        return float(np.mean(self.B)) if self.B else float("nan")


def smoothed_bound(m: int, rho: float) -> float:
    """Expected hull size bound 4*pi*sqrt(2m)/rho."""
    return 4.0 * math.pi * math.sqrt(2.0 * m) / rho


def perturb_weights(dist: np.ndarray, loss: np.ndarray, rho: float,
                    rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    out = []
    for vec in (dist, loss):
        n = float(np.linalg.norm(vec))
        if n == 0:
            out.append(vec.copy())
        else:
            out.append(rho_perturb(vec / n, rho, rng) * n)
    return out[0], out[1]


def lc_shortest(g2: G2Explicit, lam: float, dest: int) -> PathSummary:
    """Shortest path to ``dest`` at lam on possibly negative weights."""
    w1 = hybrid_weights(g2.dist, g2.loss, lam)
    out = kernels.label_correcting_sp(g2.n_nodes, g2.indptr, g2.dst, w1, g2.dist, g2.loss,
                                      math.isinf(lam))
    if out["negative_cycle"]:
        raise NegativeCycle(f"negative cycle at lambda={lam}")
    v = g2.dest_node(dest)
    if not np.isfinite(out["k1"][v]):
        raise ValueError(f"destination {dest} unreachable")
    edges = []
    node = v
    while node != 0:
        k = int(out["pred"][node])
        edges.append(k)
        node = int(g2.src[k])
    edges.reverse()
    g1_edges = tuple(int(g2.g1_edge[k]) for k in edges if g2.g1_edge[k] >= 0)
    return PathSummary(float(out["dist"][v]), float(out["loss"][v]), tuple(edges), g1_edges)


def has_negative_cycle(g2: G2Explicit) -> bool:
    """True when some lam in [0, inf] admits a negative cycle.

    A cycle's hybrid weight is loss + lam * dist, so checking the pure
    loss and pure distance weights covers every lam.
    """
    for lam in (0.0, INF):
        w1 = hybrid_weights(g2.dist, g2.loss, lam)
        if kernels.label_correcting_sp(g2.n_nodes, g2.indptr, g2.dst, w1, g2.dist,
                                       g2.loss, math.isinf(lam))["negative_cycle"]:
            return True
    return False


def perturbed_hull(g2: G2Explicit, dest: int) -> HullResult:
    return exact_hull(lambda lam, dcap: lc_shortest(g2, lam, dest))


def smoothed_trial(g2: G2Explicit, dest: int, cfg: PerturbationConfig) -> TrialReport:
    """Hull size of the perturbed instance for ``cfg.trials`` independent draws."""
    if g2.n_edges < 2:
        raise ValueError("need at least two edges to perturb")
    report = TrialReport(g2.n_edges, cfg.rho, smoothed_bound(g2.n_edges, cfg.rho))
    for trial in range(cfg.trials):
        rng = np.random.default_rng([cfg.seed, trial])
        before = report.rejected_draws
        while True:
            dist, loss = perturb_weights(g2.dist, g2.loss, cfg.rho, rng)
            g = g2.with_weights(dist, loss)
            if cfg.policy == "entries":
                bad = bool((dist < 0).any() or (loss < 0).any())
            elif cfg.policy == "cycles":
                bad = has_negative_cycle(g)
            else:
                bad = False
            if not bad:
                break
            report.rejected_draws += 1
            drawn = report.rejected_draws + len(report.B)
            if drawn >= 20 and report.rejected_draws / drawn > cfg.max_reject_rate:
                raise PerturbationAborted(
                    f"{report.rejected_draws} of {drawn} draws rejected under policy "
                    f"{cfg.policy!r}; rho={cfg.rho:g} is too large for m={g2.n_edges}")
        report.B.append(perturbed_hull(g, dest).size)
        report.rejections.append(report.rejected_draws - before)
    return report
