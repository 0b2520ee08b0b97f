"""Phase diagram over (gamma, p) for the Werner -> filter -> damping pipeline.

Every grid cell is classified by whether the two singlet-type inputs survive
the unfiltered pipeline, and cells where both die are handed to the filter
optimiser to see whether adaptation recovers entanglement.
"""

from __future__ import annotations

import csv
import io
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from enum import Enum
from pathlib import Path

import numpy as np

from .adaptation import damping_spec, evolve
from .entanglement import DEFAULT_TOL, concurrence_matrix, min_pt_eigenvalue
from .errors import DomainError, NoFeasiblePoint
from .optimize import GAConfig, OptimizationProblem, genetic_optimize, grid_search_diag
from .states import BellKind

P_DEAD_BAND = 1e-8
RECOVERED_TOL = 1e-10
THREADS_ENV = "ESD_ADAPT_THREADS"


class Classification(str, Enum):
    DEPOLARIZING_BROKEN = "DepolarizingBroken"
    PRESERVING = "Preserving"
    ESD_PHI_ONLY = "ESD_PhiOnly"
    ESD_BOTH_RECOVERED = "ESD_Both_Recovered"
    ESD_BOTH_UNRECOVERED = "ESD_Both_Unrecovered"

    @property
    def index(self) -> int:
        return list(Classification).index(self)


CSV_COLUMNS = (
    "gamma", "p", "min_pt_eig_phi", "min_pt_eig_psi", "phi_entangled", "psi_entangled",
    "best_r", "filtered_concurrence", "success_rate", "classification",
)


@dataclass(frozen=True)
class ScanRecord:
    gamma: float
    p: float
    phi_entangled_unfiltered: bool
    psi_entangled_unfiltered: bool
    min_pt_eig_phi: float
    min_pt_eig_psi: float
    best_r: float | None
    filtered_concurrence: float
    success_rate: float
    classification: Classification
    best_input: str | None = None

    def csv_row(self) -> list[str]:
        def num(x):
            return "" if x is None else f"{x:.12g}"

        return [
            num(self.gamma), num(self.p), num(self.min_pt_eig_phi), num(self.min_pt_eig_psi),
            str(self.phi_entangled_unfiltered).lower(), str(self.psi_entangled_unfiltered).lower(),
            num(self.best_r), num(self.filtered_concurrence), num(self.success_rate),
            self.classification.value,
        ]


@dataclass(frozen=True)
class ScanConfig:
    gamma_steps: int = 50
    p_steps: int = 50
    gamma_min: float = 0.01
    gamma_max: float = 1.0
    p_min: float = 0.05
    p_max: float = 1.0
    r_steps: int = 200
    seed: int = 0
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if self.gamma_steps < 2 or self.p_steps < 2:
            raise DomainError("grid needs at least 2 steps per axis")
        if not (0 <= self.gamma_min < self.gamma_max <= 1 and 0 <= self.p_min < self.p_max <= 1):
            raise DomainError("grid ranges must be increasing sub-intervals of [0, 1]")

    @property
    def gammas(self) -> np.ndarray:
        return np.linspace(self.gamma_min, self.gamma_max, self.gamma_steps)

    @property
    def ps(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.p_steps)

    @classmethod
    def from_dict(cls, data: dict) -> "ScanConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise DomainError(f"unknown scan config keys: {sorted(unknown)}")
        return cls(**data)


def _unfiltered(p: float, gamma: float, kind: BellKind):
    rho, _ = evolve(damping_spec(p, gamma, kind, None))
    return min_pt_eigenvalue(rho), concurrence_matrix(rho)


def recover(p: float, gamma: float, r_steps: int = 200, seed: int = 0):
    """Search for a filter restoring entanglement; returns ``(best_r, concurrence, S, input)``.

    Both singlet-type inputs are tried with identical diagonal filters; if
    neither gives a positive concurrence, a genetic search over full filters
    (unitaries included) on the PhiMinus input is the fallback, and
    ``best_r`` is then the strength of its filter.
    """
    best = None
    for kind in (BellKind.PHI_MINUS, BellKind.PSI_MINUS):
        try:
            res = grid_search_diag(OptimizationProblem.for_damping(p, gamma, kind), r_steps)
        except NoFeasiblePoint:
            continue
        if best is None or res.objective > best[1] + 1e-12:
            best = (res.best_r, res.objective, res.success_rate, kind.value)
    if best is None or best[1] <= RECOVERED_TOL:
        try:
            res = genetic_optimize(OptimizationProblem.for_damping(
                p, gamma, BellKind.PHI_MINUS, space="full", seed=seed, ga=GAConfig()))
            if best is None or res.objective > best[1]:
                best = (res.best_r, res.objective, res.success_rate, BellKind.PHI_MINUS.value)
        except NoFeasiblePoint:
            pass
    return best


def classify_point(gamma: float, p: float, r_steps: int = 200, seed: int = 0,
                   tol: float = DEFAULT_TOL) -> ScanRecord:
    """Classify one grid cell; filter optimisation runs only when both inputs die."""
    gamma = float(gamma)
    p = float(p)
    if not (0 <= gamma <= 1 and 0 <= p <= 1):
        raise DomainError("gamma and p must lie in [0, 1]")
    phi_pt, phi_c = _unfiltered(p, gamma, BellKind.PHI_MINUS)
    psi_pt, psi_c = _unfiltered(p, gamma, BellKind.PSI_MINUS)
    phi_ent = phi_pt < -tol
    psi_ent = psi_pt < -tol
    base = dict(gamma=gamma, p=p, phi_entangled_unfiltered=phi_ent, psi_entangled_unfiltered=psi_ent,
                min_pt_eig_phi=phi_pt, min_pt_eig_psi=psi_pt)

    if p <= 1 / 3 + P_DEAD_BAND:
        return ScanRecord(**base, best_r=None, filtered_concurrence=max(phi_c, psi_c), success_rate=1.0,
                          classification=Classification.DEPOLARIZING_BROKEN)
    if phi_ent and psi_ent:
        return ScanRecord(**base, best_r=None, filtered_concurrence=max(phi_c, psi_c), success_rate=1.0,
                          classification=Classification.PRESERVING)
    if psi_ent or phi_ent:
        # Only one input dies; a local unitary swaps inputs, so no filter is needed.
        # Damping always hits PhiMinus first, so psi_ent is expected here.
        return ScanRecord(**base, best_r=None, filtered_concurrence=max(phi_c, psi_c), success_rate=1.0,
                          classification=Classification.ESD_PHI_ONLY,
                          best_input=(BellKind.PSI_MINUS if psi_ent else BellKind.PHI_MINUS).value)

    found = recover(p, gamma, r_steps, seed)
    if found is not None and found[1] > RECOVERED_TOL:
        r, c, s, kind = found
        return ScanRecord(**base, best_r=r, filtered_concurrence=c, success_rate=s,
                          classification=Classification.ESD_BOTH_RECOVERED, best_input=kind)
    r, c, s, kind = found if found is not None else (None, 0.0, 0.0, None)
    return ScanRecord(**base, best_r=r, filtered_concurrence=c, success_rate=s,
                      classification=Classification.ESD_BOTH_UNRECOVERED, best_input=kind)


def _classify_args(args):
    return classify_point(*args)


def worker_count(workers: int | None = None) -> int:
    """Resolve parallelism: explicit value, else ``ESD_ADAPT_THREADS`` (0 = all cores), else 1."""
    if workers is None:
        env = os.environ.get(THREADS_ENV)
        workers = int(env) if env not in (None, "") else 1
    if workers <= 0:
        workers = os.cpu_count() or 1
    return workers


@dataclass
class ScanResult:
    config: ScanConfig
    records: list
    summary: dict = field(default_factory=dict)

    def grid(self) -> np.ndarray:
        """Classification indices shaped ``(p_steps, gamma_steps)``, row 0 = smallest p."""
        idx = [r.classification.index for r in self.records]
        return np.array(idx, dtype=np.uint8).reshape(self.config.p_steps, self.config.gamma_steps)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.records:
            w.writerow(r.csv_row())
        return buf.getvalue()


def scan_grid(config: ScanConfig | None = None, workers: int | None = None, **overrides) -> ScanResult:
    """Evaluate every cell, p outer and gamma inner; output order never depends on scheduling."""
    config = replace(config or ScanConfig(), **overrides)
    points = [(g, p, config.r_steps, config.seed, config.tol) for p in config.ps for g in config.gammas]
    n = worker_count(workers)
    if n == 1:
        records = [_classify_args(a) for a in points]
    else:
        with ProcessPoolExecutor(max_workers=n) as pool:
            records = list(pool.map(_classify_args, points, chunksize=max(1, len(points) // (4 * n))))
    counts = Counter(r.classification.value for r in records)
    summary = {c.value: counts.get(c.value, 0) for c in Classification}
    return ScanResult(config, records, summary)


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


PALETTE = {
    Classification.DEPOLARIZING_BROKEN: "#9e9e9e",
    Classification.PRESERVING: "#ffffff",
    Classification.ESD_PHI_ONLY: "#3b7dd8",
    Classification.ESD_BOTH_RECOVERED: "#e8892b",
    Classification.ESD_BOTH_UNRECOVERED: "#c62828",
}


def write_pgm(result: ScanResult, path) -> None:
    """Binary greymap, one byte per cell holding the classification index.

    The image is flipped vertically so that p grows upwards.
    """
    grid = result.grid()[::-1]
    h, w = grid.shape
    header = f"P5\n{w} {h}\n{len(Classification) - 1}\n".encode("ascii")
    Path(path).write_bytes(header + grid.tobytes())


def write_svg(result: ScanResult, path, cell: int = 8) -> None:
    grid = result.grid()[::-1]
    h, w = grid.shape
    classes = list(Classification)
    legend_h = 18 * len(classes) + 10
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w * cell + 220}" '
             f'height="{max(h * cell, legend_h)}" shape-rendering="crispEdges">']
    for i in range(h):
        for j in range(w):
            color = PALETTE[classes[grid[i, j]]]
            parts.append(f'<rect x="{j * cell}" y="{i * cell}" width="{cell}" height="{cell}" fill="{color}"/>')
    x0 = w * cell + 10
    for k, c in enumerate(classes):
        y = 10 + 18 * k
        parts.append(f'<rect x="{x0}" y="{y}" width="12" height="12" fill="{PALETTE[c]}" stroke="#000"/>')
        parts.append(f'<text x="{x0 + 18}" y="{y + 11}" font-size="12" font-family="sans-serif">{c.value}</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")


def filter_profile(p: float, gammas, r_steps: int = 200):
    """Best diagonal filter strength and concurrence along a gamma sweep at fixed p.

    For each gamma both singlet-type inputs are scanned and the better one is
    kept.  Returns a list of ``(gamma, best_r, concurrence, input)``.
    """
    out = []
    for g in gammas:
        best = None
        for kind in (BellKind.PHI_MINUS, BellKind.PSI_MINUS):
            res = grid_search_diag(OptimizationProblem.for_damping(p, g, kind), r_steps)
            if best is None or res.objective > best[2] + 1e-12:
                best = (float(g), res.best_r, res.objective, kind.value)
        out.append(best)
    return out


def record_dict(record: ScanRecord) -> dict:
    d = asdict(record)
    d["classification"] = record.classification.value
    return d
