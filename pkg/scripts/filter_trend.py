"""Best diagonal filter strength and the resulting concurrence along gamma at fixed p.

Prints one row per gamma for both Bell inputs, next to the analytic filter bound.
"""
import argparse

import numpy as np

from esd_adapt.adaptation import damping_spec, filter_bound, run_pipeline
from esd_adapt.optimize import OptimizationProblem, grid_search_diag


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--p", type=float, default=0.6)
    parser.add_argument("--gammas", type=int, default=10)
    parser.add_argument("--r-steps", type=int, default=200)
    args = parser.parse_args()

    print(f"{'gamma':>6} {'input':>9} {'C_plain':>10} {'best_r':>8} {'C_best':>10} {'S':>8} {'bound':>8}")
    for gamma in np.linspace(0.1, 0.95, args.gammas):
        for kind in ("PhiMinus", "PsiMinus"):
            plain = run_pipeline(damping_spec(args.p, gamma, kind, None))[1].concurrence
            res = grid_search_diag(OptimizationProblem.for_damping(args.p, gamma, kind), args.r_steps)
            bound = filter_bound(args.p, gamma)
            print(f"{gamma:6.3f} {kind:>9} {plain:10.6f} {res.best_r:8.4f} {res.objective:10.6f} "
                  f"{res.success_rate:8.4f} {bound:8.4f}")


if __name__ == "__main__":
    main()
