"""Per-seed scenario pipeline: channel generation, observation, identification, evaluation."""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Literal, Optional, Sequence, TypedDict
import logging

import numpy as np
import pandas as pd
from langgraph.graph import END, StateGraph

from app.ar_ssm.ssm import build_ssm
from app.ar_ssm.yule_walker import estimate_autocovariances, fit_ar
from app.channel.generators import ChannelSequence, generate_ar_oracle, generate_surrogate
from app.config import settings
from app.exceptions import ConfigurationError
from app.metrics.aggregation import summarize
from app.models.schemas import EvalReport, PilotConfig, ScenarioConfig
from app.predictors.base_predictor import EvaluationWindow
from app.predictors.kpin_predictor import create_predictor
from app.signal.observation import SignalSequence, observe
from app.signal.pilot import TransformedPilot, make_pilot, rho_for_snr, transform_pilot

logger = logging.getLogger(__name__)

KNOWN_METHODS = ("AR", "ARKF", "KPIN", "KPIN_MLP", "S1", "S2")
NOISE_SEED_OFFSET = 20_000


class ScenarioState(TypedDict):
    """State of one seed moving through the scenario graph."""
    config: ScenarioConfig
    seed: int
    methods: List[str]
    channels: Optional[ChannelSequence]
    pilot: Optional[TransformedPilot]
    signals: Optional[SignalSequence]
    window: Optional[EvaluationWindow]
    reports: List[EvalReport]
    error: Optional[str]


@dataclass
class ScenarioResult:
    """Reports of every (seed, method) pair and their per-method aggregate."""
    reports: List[EvalReport] = field(default_factory=list)
    failed_seeds: List[int] = field(default_factory=list)

    def table(self) -> pd.DataFrame:
        return pd.DataFrame([r.to_row() for r in self.reports])

    def summary(self) -> pd.DataFrame:
        return summarize(self.reports)


def oracle_model(cfg: ScenarioConfig) -> tuple:
    """Phi = [c_1 I, ..., c_p I] and Sigma_u = var * I of the AR-oracle channel."""
    mn = cfg.n_rx * cfg.n_tx
    phi = np.hstack([c * np.eye(mn) for c in cfg.oracle_coefficients])
    return phi, cfg.oracle_noise_var * np.eye(mn)


class ScenarioOrchestrator:
    """Runs the per-seed pipeline as a LangGraph workflow."""

    def __init__(self):
        """Initialize the orchestrator."""
        self.graph = self._build_graph()

    def _build_graph(self) -> StateGraph:
        """Build the scenario workflow."""
        workflow = StateGraph(ScenarioState)

        workflow.add_node("generate_channel", self._generate_channel)
        workflow.add_node("observe", self._observe)
        workflow.add_node("identify", self._identify)
        workflow.add_node("evaluate_methods", self._evaluate_methods)

        workflow.set_entry_point("generate_channel")
        for node, nxt in (("generate_channel", "observe"), ("observe", "identify"), ("identify", "evaluate_methods")):
            workflow.add_conditional_edges(node, self._continue_or_abort, {"continue": nxt, "abort": END})
        workflow.add_edge("evaluate_methods", END)

        return workflow.compile()

    def _continue_or_abort(self, state: ScenarioState) -> Literal["continue", "abort"]:
        return "abort" if state.get("error") else "continue"

    def _generate_channel(self, state: ScenarioState) -> ScenarioState:
        """
        Generate T + L slots of ground-truth channel.

        Args:
            state: Current scenario state

        Returns:
            Updated state with channels
        """
        cfg, seed = state["config"], state["seed"]
        if state["channels"] is not None:
            if state["channels"].length < cfg.total_length:
                message = f"Replayed channel has {state['channels'].length} slots, scenario needs {cfg.total_length}"
                logger.error(f"Seed {seed}: {message}")
                state["error"] = message
            return state
        try:
            cond = cfg.dynamic_condition()
            if cfg.channel_kind == "ar_oracle":
                phi, sigma_u = oracle_model(cfg)
                state["channels"] = generate_ar_oracle(
                    phi, sigma_u, cfg.n_rx, cfg.n_tx, len(cfg.oracle_coefficients),
                    cfg.total_length, seed, slot_ms=cond.slot_ms
                )
            else:
                state["channels"] = generate_surrogate(
                    cond, cfg.surrogate_params(seed), cfg.n_rx, cfg.n_tx, cfg.total_length
                )
            logger.info(f"Seed {seed}: generated {cfg.total_length} slots of {cfg.channel_kind} channel")
        except Exception as e:
            logger.error(f"Seed {seed}: channel generation failed: {e}")
            state["error"] = str(e)
        return state

    def _observe(self, state: ScenarioState) -> ScenarioState:
        """Transmit pilots at the power that meets the target SNR on the training prefix."""
        cfg, seed = state["config"], state["seed"]
        try:
            pilot = make_pilot(PilotConfig(n_tx=cfg.n_tx, tau=cfg.tau, sigma_v=cfg.sigma_v))
            if state["signals"] is not None:
                state["pilot"] = transform_pilot(pilot, state["signals"].rho, cfg.n_rx)
                return state
            power = state["channels"].slice(0, cfg.train_length).mean_power()
            rho = rho_for_snr(cfg.snr_db, cfg.sigma_v, pilot, power)
            q = transform_pilot(pilot, rho, cfg.n_rx)
            state["pilot"] = q
            state["signals"] = observe(state["channels"], q, cfg.sigma_v, seed + NOISE_SEED_OFFSET)
        except Exception as e:
            logger.error(f"Seed {seed}: observation failed: {e}")
            state["error"] = str(e)
        return state

    def _identify(self, state: ScenarioState) -> ScenarioState:
        """Fit AR(p) and the SSM on the training prefix of the received signals."""
        cfg, seed = state["config"], state["seed"]
        try:
            train_signals = state["signals"].slice(0, cfg.train_length)
            autocov = estimate_autocovariances(train_signals, state["pilot"], cfg.sigma_v, cfg.p)
            ar = fit_ar(autocov, cfg.epsilon)
            ssm = build_ssm(ar, state["pilot"], cfg.sigma_v)
            state["window"] = EvaluationWindow(
                config=cfg,
                seed=seed,
                channels=state["channels"],
                signals=state["signals"],
                ar=ar,
                autocov=autocov,
                ssm=ssm,
            )
        except Exception as e:
            logger.error(f"Seed {seed}: identification failed: {e}")
            state["error"] = str(e)
        return state

    def _evaluate_methods(self, state: ScenarioState) -> ScenarioState:
        """Evaluate every requested method; a failing method is logged and skipped."""
        seed = state["seed"]
        for method in state["methods"]:
            try:
                predictor = create_predictor(method)
                state["reports"].append(predictor.evaluate(state["window"]))
            except Exception as e:
                logger.error(f"Seed {seed}: method {method} failed: {e}")
        return state

    def run_seed(
        self,
        cfg: ScenarioConfig,
        seed: int,
        methods: Sequence[str],
        channels: Optional[ChannelSequence] = None,
        signals: Optional[SignalSequence] = None
    ) -> ScenarioState:
        """
        Run the pipeline for one seed.

        Args:
            cfg: Scenario configuration
            seed: Monte Carlo seed
            methods: Methods to evaluate
            channels: Replayed channels used instead of generating new ones
            signals: Replayed signals used instead of observing the channels

        Returns:
            Final graph state
        """
        initial_state: ScenarioState = {
            "config": cfg,
            "seed": seed,
            "methods": list(methods),
            "channels": channels,
            "pilot": None,
            "signals": signals,
            "window": None,
            "reports": [],
            "error": None,
        }
        return self.graph.invoke(initial_state)


# Global scenario orchestrator instance
scenario_orchestrator = ScenarioOrchestrator()


def _run_seed(cfg: ScenarioConfig, seed: int, methods: Sequence[str]) -> tuple:
    final_state = scenario_orchestrator.run_seed(cfg, seed, methods)
    return final_state["reports"], final_state.get("error")


def run_scenario(cfg: ScenarioConfig, methods: Sequence[str], max_workers: Optional[int] = None) -> ScenarioResult:
    """
    Evaluate methods on every seed of a scenario.

    Seeds run in a process pool when max_workers > 1; reports are collected in seed order.

    Args:
        cfg: Scenario configuration
        methods: Subset of AR, ARKF, KPIN, KPIN_MLP, S1, S2
        max_workers: Pool width (defaults to settings.max_workers)

    Returns:
        Reports per method per seed
    """
    unknown = [m for m in methods if m not in KNOWN_METHODS]
    if unknown or not methods:
        raise ConfigurationError(f"Unknown or empty method set: {unknown or methods}")

    workers = max_workers or settings.max_workers
    logger.info(f"Running scenario {cfg.config_hash()} on seeds {cfg.seeds} with methods {list(methods)}")
    if workers > 1 and len(cfg.seeds) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_seed, [cfg] * len(cfg.seeds), cfg.seeds, [list(methods)] * len(cfg.seeds)))
    else:
        outcomes = [_run_seed(cfg, seed, methods) for seed in cfg.seeds]

    result = ScenarioResult()
    for seed, (reports, error) in zip(cfg.seeds, outcomes):
        result.reports.extend(reports)
        if error:
            result.failed_seeds.append(seed)
    logger.info(f"Scenario finished: {len(result.reports)} reports, {len(result.failed_seeds)} failed seeds")
    return result
