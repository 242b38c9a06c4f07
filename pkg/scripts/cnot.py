"""Six-mode CNOT case study: tabulated settings, fresh resynthesis, perturbed blocks."""
import argparse
from pathlib import Path

from ums.experiments import cnot_case_study
from ums.io import write_json
from ums.linalg import RngSeed
from ums.optimizer import OptimizerConfig


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--alpha", type=float, default=0.1)
    ap.add_argument("--out", type=Path, default=Path("results/cnot"))
    args = ap.parse_args()

    for k, mode in enumerate(["verify_tables", "resynthesize", "perturbed_blocks"]):
        rep = cnot_case_study(mode, OptimizerConfig(), RngSeed(args.seed).spawn(k), args.alpha)
        res = rep.pop("result", None)
        if res is not None:
            rep["synthesis"] = res.to_json()
        write_json(rep, args.out / f"{mode}.json")
        print(f"{mode}: 1-F = {rep['infidelity']:.3e}")


if __name__ == "__main__":
    main()
