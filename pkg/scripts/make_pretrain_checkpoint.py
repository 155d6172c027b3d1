"""Regenerate the shipped ``pinnmg/data/pretrain.ckpt``.

Trains a LAAF-5 tanh 4H x 50 surrogate on the two-mode ``pretrain`` source
and stores it in float32. Takes roughly 10-20 minutes on one core.
"""

import argparse
import logging
import time

from pinnmg import data_path
from pinnmg.net import NetworkConfig, save_checkpoint
from pinnmg.problems import get_problem
from pinnmg.sampling import make_training_set
from pinnmg.train import TrainSchedule, XavierInit, train_pinn


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(data_path("pretrain.ckpt")))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--adam", type=int, default=2000)
    ap.add_argument("--lbfgs", type=int, default=5000)
    ap.add_argument("--precision", type=int, default=32, choices=(32, 64))
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    problem = get_problem("pretrain")
    config = NetworkConfig.mlp([50] * 4, "laaf-tanh", 5, args.precision)
    tset = make_training_set(problem, "sobol", (100, 100), 2000)
    t0 = time.perf_counter()
    report = train_pinn(config, XavierInit(args.seed), tset, problem,
                        TrainSchedule(adam_epochs=args.adam, lbfgs_max_epochs=args.lbfgs))
    elapsed = time.perf_counter() - t0
    prov = (f"problem=pretrain;net={config.describe()};set=sobol:100x100+2000;seed={args.seed};"
            f"adam={report.adam_epochs};lbfgs={report.lbfgs_epochs};stop={report.stop_reason};"
            f"final_loss={report.final_loss:.6e}")
    save_checkpoint(config, report.params, prov, args.out)
    print(f"wrote {args.out}: loss {report.final_loss:.3e} after {elapsed:.0f}s ({report.stop_reason})")


if __name__ == "__main__":
    main()
