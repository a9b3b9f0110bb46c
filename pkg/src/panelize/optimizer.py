"""Per-panel minimum-weight sizing.

Deterministic bounded pattern search on the unit cube (the box of design
bounds, normalised), restarted from a seeded set of starting points. Points
are ranked feasibility first: any feasible design beats any infeasible one,
feasible designs compare by weight and infeasible ones by their largest
constraint violation.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .sizing import (DEFAULT_ANALYZER, AnalysisResult, Constraints, DesignBounds, Material,
                     PanelDesign, PanelGeometry, PanelLoads, analyze_grid)

log = logging.getLogger(__name__)

OPTIMAL = "OPTIMAL"
INFEASIBLE = "INFEASIBLE"

# all 26 neighbours of the origin in {-1, 0, 1}^3
_DIRECTIONS = np.array([d for d in itertools.product((-1, 0, 1), repeat=3) if any(d)], dtype=float)


@dataclass(frozen=True)
class SearchConfig:
    n_starts: int = 8
    initial_step: float = 0.25
    min_step: float = 1e-6
    max_evaluations: int = 20000


@dataclass
class OptimizeResult:
    design: PanelDesign
    analysis: AnalysisResult
    status: str
    evaluations: int
    violation: float

    @property
    def feasible(self) -> bool:
        return self.status == OPTIMAL


class _Problem:
    def __init__(self, material, loads, geom, bounds, analyzer, constraints):
        self.material, self.loads, self.geom = material, loads, geom
        self.lo, self.hi = bounds.lower, bounds.upper
        self.analyzer, self.constraints = analyzer, constraints
        self.cache = {}

    def design(self, u) -> PanelDesign:
        u = np.clip(u, 0.0, 1.0)
        # exact bound values at the faces of the box
        x = np.where(u >= 1.0, self.hi, self.lo + u * (self.hi - self.lo))
        return PanelDesign.from_array(x)

    def evaluate(self, u):
        key = tuple(self.design(u).as_array())
        hit = self.cache.get(key)
        if hit is None:
            res = self.analyzer.analyze(PanelDesign(*key), self.material, self.loads, self.geom)
            feas = self.constraints.feasible(res, self.material)
            viol = self.constraints.violation(res, self.material)
            rank = (0, res.weight, 0.0) if feas else (1, max(viol, 0.0), res.weight)
            hit = (rank, res, viol)
            self.cache[key] = hit
        return hit


def _search(prob: _Problem, u0, cfg: SearchConfig):
    u = np.clip(np.asarray(u0, dtype=float), 0.0, 1.0)
    best = prob.evaluate(u)
    step = cfg.initial_step
    while step >= cfg.min_step and len(prob.cache) < cfg.max_evaluations:
        trial = np.clip(u + step * _DIRECTIONS, 0.0, 1.0)
        ranked = [(prob.evaluate(p)[0], i) for i, p in enumerate(trial)]
        rank, i = min(ranked)
        if rank < best[0]:
            u, best = trial[i], prob.evaluate(trial[i])
        else:
            step *= 0.5
    return u, best


def optimize_panel(material: Material, loads: PanelLoads, geom: PanelGeometry,
                   bounds: DesignBounds, analyzer=None, seed: int = 0,
                   constraints: Constraints = Constraints(),
                   config: SearchConfig = SearchConfig()) -> OptimizeResult:
    """Minimise panel weight subject to the buckling and stress constraints.

    Starts: the lower and upper corners of the box plus ``n_starts - 2``
    points drawn from ``numpy.random.default_rng(seed)``.
    """
    prob = _Problem(material, loads, geom, bounds, analyzer or DEFAULT_ANALYZER, constraints)
    rng = np.random.default_rng(seed)
    starts = [np.zeros(3), np.ones(3)]
    starts += list(rng.random((max(config.n_starts - 2, 0), 3)))
    best_u, best = None, None
    for u0 in starts[:max(config.n_starts, 1)]:
        u, hit = _search(prob, u0, config)
        if best is None or hit[0] < best[0]:
            best_u, best = u, hit
    rank, res, viol = best
    status = OPTIMAL if rank[0] == 0 else INFEASIBLE
    design = prob.design(best_u)
    if status == INFEASIBLE:
        log.warning("no feasible design in bounds; most feasible point violates by %.3g", viol)
    return OptimizeResult(design, res, status, len(prob.cache), viol)


@dataclass
class GridOracle:
    weight: float             # lightest feasible grid weight (inf if none)
    design: Optional[PanelDesign]
    n_feasible: int
    weights: np.ndarray
    feasible: np.ndarray


def grid_oracle(material: Material, loads: PanelLoads, geom: PanelGeometry, bounds: DesignBounds,
                n: int = 50, constraints: Constraints = Constraints()) -> GridOracle:
    """Exhaustive ``n**3`` evaluation of the surrogate on a uniform grid."""
    axes = [np.linspace(lo, hi, n) for lo, hi in zip(bounds.lower, bounds.upper)]
    T, TS, HS = np.meshgrid(*axes, indexing="ij")
    sigma, lam, weight = analyze_grid(T, TS, HS, material, loads, geom)
    if constraints.tol > 0:
        ok = (sigma / material.sigma_y - 1 <= constraints.tol) & \
             (1 - lam / constraints.lambda_min <= constraints.tol)
    else:
        ok = (lam > constraints.lambda_min) & (sigma < material.sigma_y)
    if not ok.any():
        return GridOracle(float("inf"), None, 0, weight, ok)
    i = int(np.argmin(np.where(ok, weight, np.inf)))
    d = PanelDesign(float(T.flat[i]), float(TS.flat[i]), float(HS.flat[i]))
    return GridOracle(float(weight.flat[i]), d, int(ok.sum()), weight, ok)
