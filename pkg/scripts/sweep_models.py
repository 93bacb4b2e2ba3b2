"""Write norm/length curves for the two closed-form models to CSV.

Usage: python3 scripts/sweep_models.py [OUTDIR]

Produces ``detector_sweep.csv`` and ``two_state_sweep.csv`` with an extra
``ratio`` column (exact_norm / lower_bound). The detector ratio tends to 1
as dt shrinks; the equal two-state superposition tends to sqrt(2).
"""

import csv
import math
import sys
from pathlib import Path

import numpy as np

from rqslab.dynamics import characteristic_time, delta_psi, energy_variance
from rqslab.models import DetectorModel, TwoStateModel, detector_context, two_state_context
from rqslab.rqsl import discrete_length, norm_limit, reference_section_length


def sweep(ctx, fractions):
    t_char = characteristic_time(ctx)
    dh = energy_variance(ctx)
    for frac in fractions:
        dt = float(frac * t_char)
        exact = delta_psi(ctx, dt).norm()
        bound = norm_limit(dh, dt, ctx.hbar)
        yield {
            "dt": dt,
            "exact_norm": exact,
            "lower_bound": bound,
            "discrete_length": discrete_length(ctx, dt),
            "quadrature_length": reference_section_length(ctx, dt),
            "ratio": exact / bound,
        }


def write(path, rows):
    rows = list(rows)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows({k: format(v, ".17g") for k, v in r.items()} for r in rows)
    return rows


def main(outdir="."):
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    grid = np.geomspace(1e-5, 1e-1, 25)
    c = 1 / math.sqrt(2)
    cases = {
        "detector_sweep.csv": detector_context(DetectorModel.from_c2(0.6, 1.0)),
        "two_state_sweep.csv": two_state_context(TwoStateModel(c, c, 0.0, 1.0)),
    }
    for name, ctx in cases.items():
        rows = write(out / name, sweep(ctx, grid))
        print(f"{name}: ratio {rows[0]['ratio']:.9f} at smallest dt, {rows[-1]['ratio']:.9f} at largest")


if __name__ == "__main__":
    main(*sys.argv[1:2])
