"""Asymmetric loss channels: unadapted, bit-flip adapted and limit-filtered concurrence.

Writes a CSV over a p1 x p2 grid so the three surfaces can be compared.
"""
import argparse
import csv
import sys

import numpy as np

from esd_adapt.adaptation import loss_pipeline_state, loss_spec, post_channel_filter_limit, run_pipeline
from esd_adapt.entanglement import concurrence
from esd_adapt.linalg import SIGMA_X


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps", type=int, default=11)
    parser.add_argument("--eps", type=float, default=1e-3)
    args = parser.parse_args()

    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["p1", "p2", "plain", "bit_flip", "limit_filter", "limit_success"])
    for p1 in np.linspace(0.1, 1.0, args.steps):
        for p2 in np.linspace(0.1, 1.0, args.steps):
            plain = concurrence(loss_pipeline_state(p1, p2))
            flipped = run_pipeline(loss_spec(p1, p2, SIGMA_X))[1].concurrence
            limit, s = post_channel_filter_limit(p1, p2, args.eps)
            w.writerow([f"{x:.6g}" for x in (p1, p2, plain, flipped, limit, s)])


if __name__ == "__main__":
    main()
