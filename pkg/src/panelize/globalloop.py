"""Global/local sizing loop.

Each iteration optimises every panel independently under loads that stay
frozen for the whole iteration, sums the panel weights, and asks a global
load provider for the next set of panel loads. The loop stops when the
percentage change of the total weight drops below the user threshold or the
iteration budget runs out.

Panel optimisations may run on a process pool. Each panel's multistart seed
is derived from ``(seed, panel id)`` only, and results are merged by panel
id, so the history does not depend on the number of workers.
"""
from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Protocol, Sequence

import numpy as np

from .errors import OptimizationError
from .optimizer import INFEASIBLE, OptimizeResult, SearchConfig, optimize_panel
from .sizing import (DEFAULT_ANALYZER, Constraints, DesignBounds, Material, PanelDesign,
                     PanelGeometry, PanelLoads, effective_thickness)

log = logging.getLogger(__name__)

CONVERGED = "CONVERGED"
MAX_ITERATIONS = "MAX_ITERATIONS"
NOT_CONVERGED_FEASIBILITY = "NOT_CONVERGED_FEASIBILITY"
PROVIDER_FAILED = "PROVIDER_FAILED"


@dataclass(frozen=True)
class PanelSpec:
    panel_id: int
    geom: PanelGeometry
    material: Material
    bounds: DesignBounds


@dataclass(frozen=True)
class LoopConfig:
    convergence_threshold_pct: float = 0.5
    max_iterations: int = 10
    worker_count: int = 1
    seed: int = 0
    search: SearchConfig = SearchConfig()

    def __post_init__(self):
        if not self.convergence_threshold_pct > 0:
            raise ValueError("convergence threshold must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.worker_count < 1:
            raise ValueError("worker_count must be >= 1")


@dataclass
class IterationRecord:
    iteration: int
    total_weight: float
    delta_pct: Optional[float]
    designs: dict                        # panel id -> OptimizeResult
    loads: dict                          # panel id -> PanelLoads used this iteration
    infeasible_panels: list = field(default_factory=list)
    global_flags: list = field(default_factory=list)

    def to_record(self) -> dict:
        rows = []
        for pid in sorted(self.designs):
            r = self.designs[pid]
            rows.append(design_record(pid, r))
        return {"iteration": self.iteration, "total_weight": self.total_weight,
                "delta_pct": self.delta_pct, "designs": rows,
                "infeasible_panels": list(self.infeasible_panels),
                "global_flags": list(self.global_flags)}


def design_record(pid: int, r: OptimizeResult, n_stiff: Optional[int] = None) -> dict:
    rec = {"panel": pid, "t": r.design.t, "t_stiff": r.design.t_stiff, "h_stiff": r.design.h_stiff,
           "weight": r.analysis.weight, "sigma_vm_max": r.analysis.sigma_vm_max,
           "lambda_p": r.analysis.lambda_record(), "status": r.status}
    if n_stiff is not None:
        rec["n_stiff"] = n_stiff
    return rec


@dataclass
class LoopResult:
    history: list
    status: str
    error: Optional[str] = None

    @property
    def final(self) -> Optional[IterationRecord]:
        return self.history[-1] if self.history else None


class LoadProvider(Protocol):
    def loads(self, iteration: int, specs: Sequence[PanelSpec],
              designs: Optional[dict]) -> dict: ...

    def global_flags(self, specs: Sequence[PanelSpec], designs: dict, loads: dict) -> list: ...


class _FlagMixin:
    """Flags panels whose current design breaks a constraint under ``loads``.

    The designs were sized for the previous loads; after redistribution they
    need not stay feasible, and that is reported rather than hidden.
    """

    analyzer = DEFAULT_ANALYZER
    constraints = Constraints()

    def global_flags(self, specs, designs, loads) -> list:
        flags = []
        for s in specs:
            res = self.analyzer.analyze(designs[s.panel_id].design, s.material, loads[s.panel_id],
                                        s.geom)
            if res.sigma_vm_max >= s.material.sigma_y:
                flags.append(f"panel {s.panel_id}: stress exceeds yield under updated loads")
            if res.lambda_p is not None and not res.lambda_p > self.constraints.lambda_min:
                flags.append(f"panel {s.panel_id}: buckling factor below "
                             f"{self.constraints.lambda_min} under updated loads")
        return flags


@dataclass
class ConstantLoads(_FlagMixin):
    """Returns the same loads every iteration (a fixed point of the loop)."""

    per_panel: dict
    default: Optional[PanelLoads] = None

    def loads(self, iteration, specs, designs) -> dict:
        out = {}
        for s in specs:
            ld = self.per_panel.get(s.panel_id, self.default)
            if ld is None:
                raise OptimizationError(f"no loads given for panel {s.panel_id}")
            out[s.panel_id] = ld
        return out


@dataclass
class StiffnessRedistribution(_FlagMixin):
    """Toy global model: panels side by side share an axial force.

    Panel ``i`` carries ``F * k_i / sum(k)`` where ``k = E * t_eff * b`` is the
    extensional stiffness of its current design, spread over its width as
    ``nx = -share / b``
    (``total_force`` is a compressive magnitude, N). ``shear_flow`` is added
    unchanged to every panel. Before the first iteration each panel is taken
    at the middle of its bounds.

    With this rule every panel sees the same membrane stress ``F / sum(E b t_eff)``
    (per unit E), so when yield rather than buckling sizes the panels any
    design is self-consistent and the loop can oscillate. It settles in the
    buckling-governed range.
    """

    total_force: float
    shear_flow: float = 0.0

    def loads(self, iteration, specs, designs) -> dict:
        ks = {}
        for s in specs:
            d = designs[s.panel_id].design if designs else \
                PanelDesign.from_array(0.5 * (s.bounds.lower + s.bounds.upper))
            ks[s.panel_id] = s.material.E * effective_thickness(d, s.geom) * s.geom.b
        total = math.fsum(ks[s.panel_id] for s in specs)
        if not total > 0:
            raise OptimizationError("assembled stiffness is not positive")
        return {s.panel_id: PanelLoads(nx=-self.total_force * ks[s.panel_id] / total / s.geom.b,
                                       nxy=self.shear_flow)
                for s in specs}


def panel_seed(seed: int, panel_id: int) -> int:
    return int(np.random.SeedSequence([seed, panel_id]).generate_state(1)[0])


def _optimize_task(args):
    spec, loads, seed, search, analyzer, constraints = args
    return spec.panel_id, optimize_panel(spec.material, loads, spec.geom, spec.bounds,
                                         analyzer=analyzer, seed=seed,
                                         constraints=constraints, config=search)


def assemble_weight(designs: dict, specs: Sequence[PanelSpec], analyzer=None) -> float:
    """Total mass of the panels in ``specs`` at the given designs (order independent)."""
    analyzer = analyzer or DEFAULT_ANALYZER
    weights = []
    for s in specs:
        if s.panel_id not in designs:
            raise OptimizationError(f"missing design for panel {s.panel_id}")
        d = designs[s.panel_id]
        d = d.design if isinstance(d, OptimizeResult) else d
        weights.append(analyzer.analyze(d, s.material, PanelLoads(), s.geom).weight)
    return math.fsum(weights)


def run_global_local(specs: Sequence[PanelSpec], provider: LoadProvider,
                     config: LoopConfig = LoopConfig(), analyzer=None,
                     constraints: Constraints = Constraints()) -> LoopResult:
    specs = sorted(specs, key=lambda s: s.panel_id)
    ids = [s.panel_id for s in specs]
    if len(set(ids)) != len(ids):
        raise OptimizationError("duplicate panel id in the loop input")
    analyzer = analyzer or DEFAULT_ANALYZER
    history: list = []
    any_infeasible = False
    pool = ProcessPoolExecutor(config.worker_count) if config.worker_count > 1 and len(specs) > 1 else None
    try:
        try:
            loads = provider.loads(1, specs, None)
        except Exception as exc:  # provider is user code
            log.error("load provider failed before the first iteration: %s", exc)
            return LoopResult(history, PROVIDER_FAILED, str(exc))
        prev = None
        for it in range(1, config.max_iterations + 1):
            tasks = [(s, loads[s.panel_id], panel_seed(config.seed, s.panel_id), config.search,
                      analyzer, constraints) for s in specs]
            mapped = pool.map(_optimize_task, tasks) if pool else map(_optimize_task, tasks)
            results = dict(mapped)
            total = assemble_weight(results, specs, analyzer)
            delta = None if prev is None else 100.0 * (total - prev) / prev
            bad = sorted(pid for pid, r in results.items() if r.status == INFEASIBLE)
            any_infeasible |= bool(bad)
            rec = IterationRecord(it, total, delta, results, dict(loads), bad)
            history.append(rec)
            log.info("iteration %d: weight %.6g kg, delta %s%%", it, total,
                     "-" if delta is None else f"{delta:.4g}")
            try:
                # queried after every iteration, the last one included, so the
                # recorded flags always describe the assembled final design
                next_loads = provider.loads(it + 1, specs, results)
                rec.global_flags = list(provider.global_flags(specs, results, next_loads))
            except Exception as exc:
                log.error("load provider failed after iteration %d: %s", it, exc)
                return LoopResult(history, PROVIDER_FAILED, str(exc))
            if delta is not None and abs(delta) < config.convergence_threshold_pct:
                return LoopResult(history, NOT_CONVERGED_FEASIBILITY if any_infeasible else CONVERGED)
            loads, prev = next_loads, total
        return LoopResult(history, NOT_CONVERGED_FEASIBILITY if any_infeasible else MAX_ITERATIONS)
    finally:
        if pool is not None:
            pool.shutdown()


def default_workers() -> int:
    return max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count() or 1)
