import argparse
import json
import sys
from typing import List, Optional

from pipeline.experiment_config import load_experiment_config
from pipeline.orchestrator import ExperimentOrchestrator
from utils.errors import InvalidArgumentError, NodalNetError


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Experiment JSON file or preset name")
    common.add_argument("--out", help="Output path")
    common.add_argument("--seed", type=int, help="Override the dataset seed")
    common.add_argument("--threads", type=int, help="Worker threads (overrides NODALNET_THREADS)")
    common.add_argument("--dry-run", action="store_true", help="Validate the config only")

    parser = argparse.ArgumentParser(
        prog="nodalnet",
        description="Learn PDE flow maps in nodal space and use them as predictive solvers",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("generate", parents=[common], help="Generate a trajectory dataset (NTDF)")

    train = commands.add_parser("train", parents=[common], help="Train a model (NPMC)")
    train.add_argument("data", help="NTDF dataset")
    train.add_argument("--resume", help="Checkpoint to continue training from")

    predict = commands.add_parser("predict", parents=[common], help="Roll a model out (CSV)")
    predict.add_argument("model", help="NPMC checkpoint")
    predict.add_argument("--ic", required=True, help="CSV of nodal values or a named initial condition")
    predict.add_argument("--steps", type=int, required=True, help="Number of model steps")

    evaluate = commands.add_parser("evaluate", parents=[common], help="Score a model against the reference")
    evaluate.add_argument("model", nargs="?", help="NPMC checkpoint")
    evaluate.add_argument("--oracle", action="store_true",
                          help="Score the reference stepper itself (pipeline self-test)")
    evaluate.add_argument("--ic", action="append", help="Named initial condition (repeatable)")

    inspect = commands.add_parser("inspect", help="Print an NTDF or NPMC header")
    inspect.add_argument("path")
    return parser


def run(args: argparse.Namespace) -> dict:
    if args.command == "inspect":
        return ExperimentOrchestrator(threads=1).inspect(args.path)

    config = load_experiment_config(args.config) if args.config else None
    if config is not None and args.seed is not None:
        config = config.with_seed(args.seed)
    orchestrator = ExperimentOrchestrator(config, threads=args.threads)
    try:
        return dispatch(args, orchestrator)
    finally:
        orchestrator.logger.print_summary()


def dispatch(args: argparse.Namespace, orchestrator: ExperimentOrchestrator) -> dict:
    config = orchestrator.config
    if args.command == "generate":
        return orchestrator.generate(args.out, dry_run=args.dry_run)
    if args.dry_run:
        return {"command": args.command, "dry_run": True, "config": config.name if config else None}
    if not args.out:
        raise InvalidArgumentError(f"{args.command} needs --out")

    if args.command == "train":
        log_every = config.training.log_every if config else 1

        def print_loss(epoch: int, loss: float, lr: float):
            if epoch % log_every == 0:
                print(f"epoch {epoch} loss {loss:.6e} lr {lr:.3e}", flush=True)

        return orchestrator.train(args.data, args.out, resume=args.resume, on_epoch=print_loss)
    if args.command == "predict":
        return orchestrator.predict(args.model, args.ic, args.steps, args.out)
    return orchestrator.evaluate(args.model, args.out, oracle=args.oracle, ic_names=args.ic)


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for NodalNet"""
    args = build_parser().parse_args(argv)
    try:
        summary = run(args)
    except NodalNetError as exc:
        print(json.dumps(exc.to_dict()))
        return exc.exit_code
    except OSError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return 1

    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
