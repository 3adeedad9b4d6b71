"""Command-line entry point for channel prediction experiments."""
import argparse
import os
import sys
import typing
from typing import Any, Dict, List, Optional
import logging

import yaml
from pydantic import ValidationError

from app.config import settings
from app.exceptions import ChannelPredictionError
from app.harness import run_ablation
from app.harness.ablation_planner import ABLATIONS
from app.kpin.network import KpinNetwork
from app.kpin.training import kpin_predict, train
from app.metrics.aggregation import nse_profile
from app.models.schemas import ScenarioConfig
from app.orchestrator.scenario_orchestrator import KNOWN_METHODS, run_scenario, scenario_orchestrator
from app.predictors.base_predictor import EvaluationWindow
from app.storage.artifact_store import ArtifactStore

# Configure logging
logging.basicConfig(
    level=getattr(logging, settings.log_level),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)


def _parse_value(text: str) -> Any:
    return yaml.safe_load(text)


def add_config_flags(parser: argparse.ArgumentParser):
    """One --flag per ScenarioConfig field; unset flags keep the file or default value."""
    group = parser.add_argument_group("scenario")
    for name, info in ScenarioConfig.model_fields.items():
        flag = f"--{name.replace('_', '-')}"
        nargs = "+" if typing.get_origin(info.annotation) is list else None
        group.add_argument(flag, dest=name, type=_parse_value, nargs=nargs, default=None, help=info.description)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kpin", description="Hybrid model-based/data-driven channel prediction")
    sub = parser.add_subparsers(dest="command", required=True)

    commands = {
        "generate": "Generate a channel/signal replay file",
        "fit": "Identify the AR model and SSM from received signals",
        "train": "Train the KPIN gain network",
        "test": "Roll a trained KPIN over the evaluation window",
        "run": "Evaluate methods over every seed of a scenario",
        "ablate": "Run a named ablation sweep",
    }
    for name, help_text in commands.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="Scenario YAML file")
        p.add_argument("--seed", type=int, help="Monte Carlo seed (run/ablate: replaces the seed list)")
        p.add_argument("--out-dir", default=settings.results_dir, help="Output directory")
        p.add_argument("--format", choices=["csv", "json"], default=settings.default_format, help="Table format")
        add_config_flags(p)
        if name in ("fit", "train", "test"):
            p.add_argument("--replay", help="Replay file written by generate (inside --out-dir)")
        if name in ("train", "test"):
            p.add_argument("--model", help="Model file written by fit (inside --out-dir)")
        if name == "test":
            p.add_argument("--checkpoint", default="kpin.ckpt", help="Checkpoint written by train")
            p.add_argument("--entries", action="store_true", help="Include predicted entries in the trace")
        if name == "run":
            p.add_argument("--methods", nargs="+", default=["AR", "ARKF", "KPIN"], choices=KNOWN_METHODS)
        if name == "ablate":
            p.add_argument("--name", required=True, choices=sorted(ABLATIONS))
    return parser


def load_config(args: argparse.Namespace) -> ScenarioConfig:
    overrides: Dict[str, Any] = {
        name: getattr(args, name) for name in ScenarioConfig.model_fields if getattr(args, name) is not None
    }
    if args.seed is not None and args.command in ("run", "ablate"):
        overrides["seeds"] = [args.seed]
    if args.config:
        return ScenarioConfig.from_yaml(args.config, **overrides)
    return ScenarioConfig(**overrides)


def seed_of(args: argparse.Namespace, cfg: ScenarioConfig) -> int:
    return args.seed if args.seed is not None else cfg.seeds[0]


def build_window(args: argparse.Namespace, cfg: ScenarioConfig, store: ArtifactStore) -> EvaluationWindow:
    """Evaluation window from a replay file, or freshly generated when none is given."""
    channels = signals = None
    if getattr(args, "replay", None):
        channels, signals = store.load_replay(args.replay)
    state = scenario_orchestrator.run_seed(cfg, seed_of(args, cfg), [], channels=channels, signals=signals)
    if state.get("error"):
        raise ChannelPredictionError(state["error"])
    window = state["window"]
    if getattr(args, "model", None):
        ssm, autocov = store.load_model(args.model)
        window = EvaluationWindow(
            config=cfg, seed=window.seed, channels=window.channels, signals=window.signals,
            ar=window.ar, autocov=autocov, ssm=ssm,
        )
    return window


def cmd_generate(args: argparse.Namespace, cfg: ScenarioConfig, store: ArtifactStore):
    seed = seed_of(args, cfg)
    state = scenario_orchestrator.run_seed(cfg, seed, [])
    if state.get("error"):
        raise ChannelPredictionError(state["error"])
    store.save_replay(f"replay_seed{seed}.npz", state["channels"], state["signals"])


def cmd_fit(args: argparse.Namespace, cfg: ScenarioConfig, store: ArtifactStore):
    window = build_window(args, cfg, store)
    store.save_model(
        f"model_seed{window.seed}.json", window.ssm, window.autocov, window.ar.epsilon, cfg.config_hash()
    )
    logger.info(f"Stability margin of the identified transition: {window.ssm.stability_margin():.4f}")


def cmd_train(args: argparse.Namespace, cfg: ScenarioConfig, store: ArtifactStore):
    window = build_window(args, cfg, store)
    net = KpinNetwork(
        state_dim=window.ssm.state_dim,
        obs_dim=window.ssm.obs_dim,
        hidden_dim=cfg.hidden_dim,
        update_hidden=cfg.gru_update,
        seed=window.seed,
    )
    labels = None if cfg.strategy == "S3" else window.train_channels()

    def checkpoint(epoch: int, objective: float, trained: KpinNetwork):
        store.save_checkpoint("kpin_latest.ckpt", trained, epoch + 1)

    result = train(window.train_signals(), window.ssm, net, cfg.train_config(window.seed), labels, checkpoint)
    store.save_checkpoint("kpin.ckpt", result.net, len(result.losses))
    store.save_training_log("training_log.csv", result)


def cmd_test(args: argparse.Namespace, cfg: ScenarioConfig, store: ArtifactStore):
    window = build_window(args, cfg, store)
    net, epoch = store.load_checkpoint(args.checkpoint)
    logger.info(f"Testing checkpoint {args.checkpoint} (epoch {epoch}) over L={window.horizon}")
    trace = kpin_predict(window.test_signals(), window.ssm, net, window.horizon, window.warmup)
    trace = trace.with_ground_truth(window.test_channels().vectors())
    store.save_trace(f"trace_seed{window.seed}.csv", trace, include_entries=args.entries)


def cmd_run(args: argparse.Namespace, cfg: ScenarioConfig, store: ArtifactStore):
    result = run_scenario(cfg, args.methods)
    if not result.reports:
        raise ChannelPredictionError("No method produced a report")
    store.save_reports(f"reports_{cfg.config_hash()}", result.reports)
    store.save_table(f"summary_{cfg.config_hash()}.{args.format}", result.summary(), args.format)
    for method in args.methods:
        if any(r.method == method for r in result.reports):
            store.save_table(f"profile_{method}.{args.format}", nse_profile(result.reports, method), args.format)
    print(result.summary().to_string(index=False))


def cmd_ablate(args: argparse.Namespace, cfg: ScenarioConfig, store: ArtifactStore):
    table = run_ablation(args.name, cfg)
    store.save_table(f"ablation_{args.name}.{args.format}", table, args.format)


COMMANDS = {
    "generate": cmd_generate,
    "fit": cmd_fit,
    "train": cmd_train,
    "test": cmd_test,
    "run": cmd_run,
    "ablate": cmd_ablate,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        store = ArtifactStore(args.out_dir)
        logger.info(f"{args.command}: config {cfg.config_hash()}, output {os.path.abspath(store.root)}")
        COMMANDS[args.command](args, cfg, store)
    except (ChannelPredictionError, ValidationError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
