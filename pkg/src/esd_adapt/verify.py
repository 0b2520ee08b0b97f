"""Self-check suites run by ``esd-adapt verify``.

Each suite counts individual checks and the failures among them.  All
tolerances are multiplied by ``tol_scale`` so the command can be forced to
fail (``tol_scale=0``) when testing the exit path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import adaptation as ad
from . import channels as ch
from .entanglement import concurrence, min_pt_eigenvalue, partial_transpose_A
from .linalg import SIGMA_X, hermitian_defect, eigvals_hermitian, kron
from .states import (
    BellKind,
    Side,
    TwoQubitState,
    bell,
    random_density,
    random_unitary,
    werner,
)


@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    failures: int = 0
    worst: float = 0.0
    notes: list = field(default_factory=list)

    def check(self, error: float, tol: float, what: str = "") -> None:
        self.checks += 1
        self.worst = max(self.worst, float(error))
        if not error <= tol:
            self.failures += 1
            if len(self.notes) < 5:
                self.notes.append(f"{what}: {error:.3e} > {tol:.1e}")

    @property
    def passed(self) -> bool:
        return self.failures == 0 and self.checks > 0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: {self.checks - self.failures}/{self.checks} ok (worst {self.worst:.3e})"


def bisect_predicate(pred, lo: float, hi: float, xtol: float = 1e-10) -> float:
    """Locate the switch point of a predicate that is False at ``lo`` and True at ``hi``."""
    if pred(lo) or not pred(hi):
        raise ValueError("predicate must be False at lo and True at hi")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _random_states(rng, n):
    return [random_density(rng, rank=1 + i % 4) for i in range(n)]


def suite_kraus(rng, scale) -> SuiteResult:
    res = SuiteResult("kraus_completeness")
    grid = np.linspace(0, 1, 11)
    family = [ch.depolarizing(x) for x in grid] + [ch.amplitude_damping(x) for x in grid]
    for x in grid:
        s = random_unitary(rng)[:, 0]
        family.append(ch.replace_channel(x, s))
    family += [ch.random_channel(rng, 1 + i % 4) for i in range(50)]
    for i in range(50):
        a, b = family[rng.integers(len(family))], family[rng.integers(len(family))]
        c = ch.compose(a, b)
        res.check(abs(len(c) - len(a) * len(b)), 0, "compose size")
        family.append(c)
    for c in family:
        res.check(c.completeness_defect(), 1e-10 * scale, c.label)
    return res


def suite_apply(rng, scale, n) -> SuiteResult:
    res = SuiteResult("apply_preserves_state")
    for i in range(n):
        state = random_density(rng, rank=1 + i % 4)
        pick = i % 4
        if pick == 0:
            chan = ch.depolarizing(rng.random())
        elif pick == 1:
            chan = ch.amplitude_damping(rng.random())
        elif pick == 2:
            chan = ch.replace_channel(rng.random(), random_unitary(rng)[:, 0])
        else:
            chan = ch.random_channel(rng, 1 + int(rng.integers(4)))
        side = Side.A if rng.random() < 0.5 else Side.B
        out = ch.apply_matrix(chan, state.rho, side)
        res.check(abs(np.trace(out).real - 1), 1e-10 * scale, "trace")
        res.check(hermitian_defect(out), 1e-10 * scale, "hermiticity")
        res.check(max(0.0, -eigvals_hermitian(out)[-1]), 1e-9 * scale, "positivity")
    return res


def suite_lu_invariance(rng, scale, n) -> SuiteResult:
    res = SuiteResult("concurrence_local_unitary_invariance")
    for state in _random_states(rng, n):
        u = kron(random_unitary(rng), random_unitary(rng))
        moved = u @ state.rho @ u.conj().T
        res.check(abs(concurrence(moved) - concurrence(state)), 1e-9 * scale, "LU")
    return res


def suite_ppt_agreement(rng, scale, n, band: float = 1e-8) -> SuiteResult:
    res = SuiteResult("ppt_concurrence_agreement")
    skipped = 0
    for state in _random_states(rng, n):
        c = concurrence(state)
        lo = min_pt_eigenvalue(state)
        if c <= band and abs(lo) <= band:
            skipped += 1
            continue
        res.check(0.0 if (c > band) == (lo < -band) else 1.0, 0.5 * scale, "sign mismatch")
        res.check(max(0.0, -0.5 - lo), 1e-12 * scale, "pt lower bound")
    res.notes.append(f"{skipped} states in dead-band")
    return res


def suite_pt_involution(rng, scale, n) -> SuiteResult:
    res = SuiteResult("partial_transpose_involution")
    for state in _random_states(rng, n):
        twice = partial_transpose_A(partial_transpose_A(state))
        res.check(float(np.max(np.abs(twice - state.rho))), 1e-15 * scale, "involution")
        res.check(abs(np.trace(partial_transpose_A(state)).real - 1), 1e-12 * scale, "trace")
    return res


def suite_closed_forms(rng, scale) -> SuiteResult:
    res = SuiteResult("closed_form_cross_checks")
    samples = 1 - rng.random((100, 2))  # (0, 1]
    for p1, p2 in samples:
        formula = ad.loss_concurrence(p1, p2)
        state = ad.loss_pipeline_state(p1, p2)
        piped, _ = ad.run_pipeline(ad.loss_spec(p1, p2))
        res.check(float(np.max(np.abs(state.rho - piped.state.rho))), 1e-12 * scale, "loss state")
        if formula >= 1e-6:
            res.check(abs(concurrence(state) - formula), 1e-9 * scale, "loss concurrence")
        swapped, rep = ad.run_pipeline(ad.loss_spec(p1, p2, SIGMA_X))
        res.check(abs(rep.concurrence - p1 * p2), 1e-9 * scale, "swap concurrence")
        res.check(float(np.max(np.abs(swapped.state.rho - ad.swapped_loss_state(p1, p2).rho))),
                  1e-12 * scale, "swap state")
    for p1 in np.arange(1, 10) / 10:
        x = bisect_predicate(lambda p2: min_pt_eigenvalue(ad.loss_pipeline_state(p1, p2)) < 0, 0.0, 1.0)
        res.check(abs(x - ad.loss_separability_threshold(p1)), 1e-6 * scale, "threshold")
    for p1, p2 in [(0.5, 0.5), (0.8, 0.3), (0.9, 0.9)]:
        cs = [ad.post_channel_filter_limit(p1, p2, e)[0] for e in (1e-1, 1e-2, 1e-3)]
        res.check(abs(cs[-1] - np.sqrt(p1 * p2)) / np.sqrt(p1 * p2), 0.02 * scale, "limit")
        res.check(0.0 if cs[0] < cs[1] < cs[2] else 1.0, 0.5 * scale, "limit monotone")
    x = bisect_predicate(lambda p: min_pt_eigenvalue(werner(BellKind.PSI_MINUS, p)) < 0, 0.0, 1.0)
    res.check(abs(x - 1 / 3), 1e-6 * scale, "werner boundary")
    singlet = bell(BellKind.PSI_MINUS)
    for p in np.linspace(0, 1, 20):
        out = ch.apply(ch.depolarizing(p), singlet, Side.B)
        res.check(float(np.max(np.abs(out.rho - werner(BellKind.PSI_MINUS, p).rho))), 1e-12 * scale, "werner")
    for g in np.arange(1, 20) * 0.05:
        damp = ch.amplitude_damping(g)
        for kind in (BellKind.PSI_MINUS, BellKind.PHI_MINUS):
            out = ch.apply(damp, ch.apply(damp, bell(kind), Side.A), Side.B)
            res.check(max(0.0, min_pt_eigenvalue(out) + 1e-10), 0.0, "damping preserves")
    for p in np.linspace(1 / 3 + 0.01, 0.99, 22)[1:-1]:
        for g in np.linspace(0.05, 1.0, 22)[1:-1]:
            sr = min(1.0, 0.5 * ad.filter_bound(p, g))
            out, _ = ad.run_pipeline(ad.damping_spec(p, g, BellKind.PSI_MINUS, ad.LocalFilter(sr)))
            res.check(max(0.0, min_pt_eigenvalue(out.state) + 1e-12), 0.0, "filter bound")
    return res


def run_verification(n_random: int = 1000, seed: int = 2008, tol_scale: float = 1.0) -> list[SuiteResult]:
    rng = np.random.default_rng(seed)
    return [
        suite_kraus(rng, tol_scale),
        suite_apply(rng, tol_scale, n_random),
        suite_lu_invariance(rng, tol_scale, max(1, n_random // 5)),
        suite_ppt_agreement(rng, tol_scale, n_random),
        suite_pt_involution(rng, tol_scale, n_random),
        suite_closed_forms(rng, tol_scale),
    ]
