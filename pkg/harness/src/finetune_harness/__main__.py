"""Run the four-strategy comparison end to end.

Usage: python -m finetune_harness [workdir] [--steps N] [--seed S]
"""

import argparse
import json
import sys
import tempfile

from .harness import prepare_artifacts, run_comparison


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="finetune_harness")
    parser.add_argument("workdir", nargs="?", default=None)
    parser.add_argument("--steps", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    workdir = args.workdir or tempfile.mkdtemp(prefix="finetune-harness-")
    print(f"preparing artifacts in {workdir}", flush=True)
    config = prepare_artifacts(workdir, seed=args.seed)
    config.steps = args.steps
    summary = run_comparison(config)
    print(json.dumps(
        {
            name: {
                "step0_val_loss": s["step0_val_loss"],
                "best_val_loss": s["best_val_loss"],
                "best_step": s["best_step"],
                "val_bleu": s["val_bleu"],
            }
            for name, s in summary["strategies"].items()
        },
        indent=2,
    ))
    print(f"summary: {summary['summary_path']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
