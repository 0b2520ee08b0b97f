"""Derivative-free search for local filters that keep the pipeline output entangled.

Two strategies are offered: an exhaustive scan over identical diagonal
filters ``diag(1, sqrt(r))`` and a seeded genetic algorithm over either the
diagonal strength alone or the full ``U diag(1, sqrt(r)) V`` parameterisation.
Candidates are evaluated in vectorised batches, one generation at a time.
"""

from __future__ import annotations

import functools
import json
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from .adaptation import LocalFilter, PipelineSpec, damping_spec, evolve, filter_matrix
from .entanglement import concurrence_matrix, min_pt_eigenvalue
from .errors import DomainError, NoFeasiblePoint
from .states import BellKind

INFEASIBLE = -1.0
TIE_TOL = 1e-9
MIN_SUCCESS = 1e-12


class Objective(str, Enum):
    CONCURRENCE = "concurrence"
    MIN_PT = "min_pt"  # maximises -(smallest partial-transpose eigenvalue)


class SearchSpace(str, Enum):
    DIAGONAL = "diagonal"
    FULL = "full"


@dataclass(frozen=True)
class GAConfig:
    population: int = 64
    generations: int = 200
    tournament: int = 4
    elitism: int = 4
    mutation_sigma: float = 0.05
    crossover_prob: float = 0.5
    stall_generations: int = 50

    def __post_init__(self):
        if self.population < 2 or self.generations < 1:
            raise DomainError("population must be >= 2 and generations >= 1")
        if not 0 <= self.elitism < self.population:
            raise DomainError("elitism must be smaller than the population")
        if not 1 <= self.tournament <= self.population:
            raise DomainError("tournament size must be between 1 and the population")


@dataclass(frozen=True)
class OptimizationProblem:
    template: PipelineSpec
    objective: Objective = Objective.CONCURRENCE
    space: SearchSpace = SearchSpace.DIAGONAL
    s_min: float = 0.0
    seed: int = 0
    ga: GAConfig = field(default_factory=GAConfig)

    def __post_init__(self):
        object.__setattr__(self, "objective", Objective(self.objective))
        object.__setattr__(self, "space", SearchSpace(self.space))
        if not self.template.slots:
            raise DomainError("the pipeline template has no filter slots to optimise")
        if self.s_min < 0:
            raise DomainError("s_min must be non-negative")

    @classmethod
    def for_damping(cls, p: float, gamma: float, kind: BellKind | str = BellKind.PHI_MINUS,
                    identical: bool = True, **kwargs) -> "OptimizationProblem":
        """Werner(p) -> filters -> amplitude damping(gamma) on both qubits.

        With ``identical=False`` the two qubits get independent slots ``F_A``
        and ``F_B``.
        """
        if identical:
            template = damping_spec(p, gamma, kind, "F")
        else:
            a = damping_spec(p, gamma, kind, "F_A")
            b = damping_spec(p, gamma, kind, "F_B")
            template = PipelineSpec(a.configuration, a.stages_a, b.stages_b, a.input_kind, a.input_p)
        return cls(template, **kwargs)

    @property
    def genes_per_slot(self) -> int:
        return 1 if self.space is SearchSpace.DIAGONAL else 7

    @property
    def n_genes(self) -> int:
        return self.genes_per_slot * len(self.template.slots)


@dataclass(frozen=True)
class OptimizationResult:
    filters: dict
    objective: float
    success_rate: float
    evaluations: int
    converged: bool
    seed: int | None = None
    history: tuple = ()

    @property
    def best_r(self) -> float:
        return next(iter(self.filters.values())).r

    def to_dict(self, digits: int = 12) -> dict:
        def fmt(x):
            return float(f"{x:.{digits}g}")

        return {
            "filters": {k: {"r": fmt(f.r), "u_angles": [fmt(a) for a in f.u_angles],
                            "v_angles": [fmt(a) for a in f.v_angles]}
                        for k, f in self.filters.items()},
            "best_r": fmt(self.best_r),
            "objective": fmt(self.objective),
            "success_rate": fmt(self.success_rate),
            "evaluations": self.evaluations,
            "converged": self.converged,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def decode(problem: OptimizationProblem, genes: np.ndarray) -> tuple[dict, list]:
    """Map normalised genes ``(n, d)`` in ``[0, 1]`` to slot matrices and filter parameters."""
    genes = np.atleast_2d(genes)
    n = genes.shape[0]
    k = problem.genes_per_slot
    mats, params = {}, []
    for i, name in enumerate(problem.template.slots):
        g = genes[:, i * k:(i + 1) * k]
        r = g[:, 0]
        if k == 1:
            u = v = np.zeros((n, 3))
        else:
            scale = np.array([2 * np.pi, np.pi, 2 * np.pi])
            u = g[:, 1:4] * scale
            v = g[:, 4:7] * scale
        mats[name] = filter_matrix(r, u, v)
        params.append((name, r, u, v))
    return mats, params


def evaluate(problem: OptimizationProblem, genes: np.ndarray):
    """Return ``(objective, success_rate, fitness)`` arrays for a batch of genes.

    ``fitness`` equals the objective where the success rate meets
    ``max(s_min, 1e-12)`` and ``-1`` elsewhere.
    """
    mats, _ = decode(problem, genes)
    rho, s = evolve(problem.template, mats)
    if problem.objective is Objective.CONCURRENCE:
        obj = np.atleast_1d(concurrence_matrix(rho))
    else:
        obj = -np.atleast_1d(min_pt_eigenvalue(rho))
    s = np.atleast_1d(s)
    feasible = s >= max(problem.s_min, MIN_SUCCESS)
    return obj, s, np.where(feasible, obj, INFEASIBLE)


def better(f1: float, s1: float, f2: float, s2: float) -> bool:
    """Higher fitness wins; within ``1e-9`` the higher success rate wins."""
    if f1 > f2 + TIE_TOL:
        return True
    return abs(f1 - f2) <= TIE_TOL and s1 > s2


def _compare(a, b) -> int:
    if better(a[0], a[1], b[0], b[1]):
        return -1
    if better(b[0], b[1], a[0], a[1]):
        return 1
    return 0


def _filters_at(problem: OptimizationProblem, gene_row: np.ndarray) -> dict:
    _, params = decode(problem, gene_row[None, :])
    return {name: LocalFilter(float(r[0]), tuple(u[0]), tuple(v[0])) for name, r, u, v in params}


def grid_search_diag(problem: OptimizationProblem, r_steps: int = 200) -> OptimizationResult:
    """Exhaustive scan of ``r = k/(r_steps-1)`` with the same diagonal filter in every slot."""
    if problem.space is not SearchSpace.DIAGONAL:
        raise DomainError("grid_search_diag needs the diagonal search space")
    if r_steps < 2:
        raise DomainError("r_steps must be at least 2")
    rs = np.linspace(0.0, 1.0, r_steps)
    genes = np.repeat(rs[:, None], len(problem.template.slots), axis=1)
    obj, s, fit = evaluate(problem, genes)
    if np.all(fit == INFEASIBLE):
        raise NoFeasiblePoint("no filter strength meets the success-rate constraint")
    best = None
    for i in range(r_steps):
        if fit[i] == INFEASIBLE:
            continue
        if best is None or better(fit[i], s[i], fit[best], s[best]):
            best = i
    return OptimizationResult(
        filters=_filters_at(problem, genes[best]),
        objective=float(obj[best]),
        success_rate=float(s[best]),
        evaluations=r_steps,
        converged=True,
    )


def genetic_optimize(problem: OptimizationProblem) -> OptimizationResult:
    """Seeded genetic algorithm; returns the best individual ever seen.

    Tournament selection, uniform crossover, Gaussian mutation on genes
    normalised to ``[0, 1]`` (clipped), and elitism.  The first individual of
    the initial population is the do-nothing filter so the result is never
    worse than leaving the pipeline unfiltered.
    """
    cfg = problem.ga
    rng = np.random.default_rng(problem.seed)
    d = problem.n_genes
    k = problem.genes_per_slot

    pop = rng.random((cfg.population, d))
    pop[0] = 0.0
    pop[0, ::k] = 1.0
    obj, s, fit = evaluate(problem, pop)
    evaluations = cfg.population

    def best_index(idx):
        b = idx[0]
        for i in idx[1:]:
            if better(fit[i], s[i], fit[b], s[b]):
                b = i
        return b

    b = best_index(list(range(cfg.population)))
    best = (pop[b].copy(), float(fit[b]), float(obj[b]), float(s[b]))
    history = [best[1]]
    last_improvement = 0

    for gen in range(1, cfg.generations + 1):
        order = sorted(range(cfg.population), key=functools.cmp_to_key(lambda i, j: _compare((fit[i], s[i]), (fit[j], s[j]))))
        elite = order[:cfg.elitism]
        children = []
        for _ in range(cfg.population - cfg.elitism):
            pa = best_index(list(rng.choice(cfg.population, cfg.tournament, replace=False)))
            pb = best_index(list(rng.choice(cfg.population, cfg.tournament, replace=False)))
            mask = rng.random(d) < cfg.crossover_prob
            child = np.where(mask, pop[pa], pop[pb]) + rng.normal(0.0, cfg.mutation_sigma, d)
            children.append(np.clip(child, 0.0, 1.0))
        children = np.array(children).reshape(-1, d)
        c_obj, c_s, c_fit = evaluate(problem, children) if len(children) else (np.empty(0),) * 3
        evaluations += len(children)
        pop = np.vstack([pop[elite], children])
        obj = np.concatenate([obj[elite], c_obj])
        s = np.concatenate([s[elite], c_s])
        fit = np.concatenate([fit[elite], c_fit])

        b = best_index(list(range(cfg.population)))
        # the record never moves down, even inside the tie-break tolerance
        if fit[b] >= best[1] and better(fit[b], s[b], best[1], best[3]):
            best = (pop[b].copy(), float(fit[b]), float(obj[b]), float(s[b]))
            last_improvement = gen
        history.append(best[1])

    if best[1] == INFEASIBLE:
        raise NoFeasiblePoint("no individual met the success-rate constraint")
    return OptimizationResult(
        filters=_filters_at(problem, best[0]),
        objective=best[2],
        success_rate=best[3],
        evaluations=evaluations,
        converged=cfg.generations - last_improvement >= cfg.stall_generations,
        seed=problem.seed,
        history=tuple(history),
    )


def problem_config(problem: OptimizationProblem) -> dict:
    """JSON-ready run configuration (everything except the pipeline itself)."""
    return {
        "objective": problem.objective.value,
        "space": problem.space.value,
        "seed": problem.seed,
        "s_min": problem.s_min,
        "ga": asdict(problem.ga),
    }
