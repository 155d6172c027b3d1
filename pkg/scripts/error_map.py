"""Per-node error of raw PINN inference vs the hybrid solve on the fine grid.

Writes ``pinn_error.csv`` and ``hybrid_error.csv`` (signed u - u*) for the
four-sine benchmark, plus the error maxima over the one-cell boundary collar
and the remaining interior.
"""

import argparse
from pathlib import Path

import numpy as np

from pinnmg import data_path
from pinnmg.classic import Grid2D, write_grid_csv
from pinnmg.hybrid import HybridConfig, infer_on_grid, solve_hybrid
from pinnmg.problems import get_problem
from pinnmg.sampling import make_training_set


def collar_split(err):
    collar = np.zeros(err.shape, dtype=bool)
    collar[1, 1:-1] = collar[-2, 1:-1] = collar[1:-1, 1] = collar[1:-1, -2] = True
    inner = np.zeros_like(collar)
    inner[2:-2, 2:-2] = True
    return np.abs(err[collar]).max(), np.abs(err[inner]).max()


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ckpt", default=str(data_path("pretrain.ckpt")))
    ap.add_argument("--coarse", type=int, default=64)
    ap.add_argument("--fine", type=int, default=512)
    ap.add_argument("--out", default="runs/error_map")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    problem = get_problem("foursines")
    cfg = HybridConfig(coarse=args.coarse, fine=args.fine, checkpoint=args.ckpt)
    grid, report, train = solve_hybrid(problem, cfg, make_training_set(problem, "sobol", (100, 100), 2000))
    exact = Grid2D.sample(args.fine, problem.exact).values
    raw = infer_on_grid(train.params, train.config, args.fine, problem)
    header = f"# ckpt={args.ckpt};coarse={args.coarse};fine={args.fine}\n"
    for name, values in (("pinn", raw.values), ("hybrid", grid.values)):
        err = values - exact
        write_grid_csv(Grid2D(args.fine, err), out / f"{name}_error.csv", header=header)
        c, i = collar_split(err)
        print(f"{name:6s} Linf {np.abs(err).max():.3e}  collar {c:.3e}  interior {i:.3e}")


if __name__ == "__main__":
    main()
