"""Artifact store for replay files, models, checkpoints, traces and result tables."""
import json
import os
import struct
from typing import Any, Dict, List, Optional, Tuple
import logging

import numpy as np
import pandas as pd

from app.ar_ssm.ssm import Ssm, build_ssm
from app.ar_ssm.yule_walker import ArModel, AutocovarianceSet
from app.channel.generators import ChannelSequence
from app.config import settings
from app.exceptions import ArtifactError
from app.kpin.network import PARAM_ORDER, KpinNetwork, KpinParameters
from app.kpin.training import TrainResult
from app.models.schemas import EvalReport
from app.predictors.trace import PredictionTrace
from app.signal.observation import SignalSequence
from app.signal.pilot import TransformedPilot

logger = logging.getLogger(__name__)

CHECKPOINT_MAGIC = b"KPINCKPT"
CHECKPOINT_VERSION = 1
MODEL_VERSION = 1


def _interleave(a: np.ndarray) -> np.ndarray:
    """Complex array -> float64 array with a trailing (real, imag) axis."""
    a = np.asarray(a)
    return np.stack([a.real, a.imag], axis=-1).astype("<f8")


def _deinterleave(a: np.ndarray) -> np.ndarray:
    return a[..., 0] + 1j * a[..., 1]


def _complex_to_json(a: np.ndarray) -> Dict[str, Any]:
    a = np.asarray(a)
    return {"shape": list(a.shape), "re": a.real.ravel().tolist(), "im": a.imag.ravel().tolist()}


def _complex_from_json(d: Dict[str, Any]) -> np.ndarray:
    return (np.asarray(d["re"]) + 1j * np.asarray(d["im"])).reshape(d["shape"])


class ArtifactStore:
    """Reads and writes experiment artifacts under a results directory."""

    def __init__(self, root: Optional[str] = None):
        """
        Initialize the artifact store.

        Args:
            root: Results directory (defaults to settings.results_dir)
        """
        self.root = root or settings.results_dir

    def path(self, name: str) -> str:
        """Absolute-or-relative path of an artifact, creating parent directories."""
        full = os.path.join(self.root, name)
        os.makedirs(os.path.dirname(full) or ".", exist_ok=True)
        return full

    def _existing(self, name: str) -> str:
        full = os.path.join(self.root, name)
        if not os.path.exists(full):
            raise ArtifactError(f"Artifact not found: {full}")
        return full

    # Replay files

    def save_replay(self, name: str, channels: ChannelSequence, signals: Optional[SignalSequence] = None) -> str:
        """
        Write channels (and optionally signals) as interleaved real/imag doubles.

        Args:
            name: File name (.npz)
            channels: Channel sequence
            signals: Signals observed from the channels

        Returns:
            Path of the written file
        """
        header = {
            "n_rx": channels.n_rx,
            "n_tx": channels.n_tx,
            "length": channels.length,
            "slot_ms": channels.slot_ms,
            "seed": channels.seed,
        }
        arrays = {"channels": _interleave(channels.frames)}
        if signals is not None:
            header.update({"sigma_v": signals.sigma_v, "rho": signals.rho, "signal_seed": signals.seed})
            arrays["signals"] = _interleave(signals.observations)
        path = self.path(name)
        with open(path, "wb") as fh:
            np.savez(fh, header=np.array(json.dumps(header)), **arrays)
        logger.info(f"Saved replay file {path}")
        return path

    def load_replay(self, name: str) -> Tuple[ChannelSequence, Optional[SignalSequence]]:
        """Read a replay file written by save_replay."""
        with np.load(self._existing(name)) as data:
            header = json.loads(str(data["header"]))
            channels = ChannelSequence(
                frames=_deinterleave(data["channels"]),
                slot_ms=header["slot_ms"],
                seed=header["seed"],
            )
            signals = None
            if "signals" in data.files:
                signals = SignalSequence(
                    observations=_deinterleave(data["signals"]),
                    sigma_v=header["sigma_v"],
                    rho=header["rho"],
                    seed=header["signal_seed"],
                )
        if channels.length != header["length"]:
            raise ArtifactError(f"Replay header says {header['length']} slots, body has {channels.length}")
        return channels, signals

    # Model files

    def save_model(self, name: str, ssm: Ssm, autocov: AutocovarianceSet, epsilon: float,
                   config_hash: Optional[str] = None) -> str:
        """Write the fitted AR model, SSM pilot and autocovariances as JSON."""
        payload = {
            "version": MODEL_VERSION,
            "config_hash": config_hash,
            "p": ssm.p,
            "epsilon": epsilon,
            "sigma_v": ssm.sigma_v,
            "rho": ssm.q.rho,
            "n_rx": ssm.q.n_rx,
            "phi": _complex_to_json(ssm.phi),
            "sigma_u": _complex_to_json(ssm.sigma_u),
            "q": _complex_to_json(ssm.q.q),
            "autocov": [_complex_to_json(c) for c in autocov.c_hat],
        }
        path = self.path(name)
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
        logger.info(f"Saved model file {path}")
        return path

    def load_model(self, name: str) -> Tuple[Ssm, AutocovarianceSet]:
        """Rebuild the SSM and autocovariances from a model file."""
        with open(self._existing(name), "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        if payload.get("version") != MODEL_VERSION:
            raise ArtifactError(f"Unsupported model file version {payload.get('version')}")
        ar = ArModel(
            p=payload["p"],
            phi=_complex_from_json(payload["phi"]),
            sigma_u=_complex_from_json(payload["sigma_u"]),
            epsilon=payload["epsilon"],
        )
        q = TransformedPilot(q=_complex_from_json(payload["q"]), rho=payload["rho"], n_rx=payload["n_rx"])
        autocov = AutocovarianceSet(c_hat=[_complex_from_json(c) for c in payload["autocov"]])
        return build_ssm(ar, q, payload["sigma_v"]), autocov

    # Checkpoints

    def save_checkpoint(self, name: str, net: KpinNetwork, epoch: Optional[int] = None) -> str:
        """
        Versioned binary checkpoint: magic, version, header length, JSON header, then
        little-endian doubles of every tensor in declared order.
        """
        header = {
            "state_dim": net.state_dim,
            "obs_dim": net.obs_dim,
            "hidden_dim": net.hidden_dim,
            "update_hidden": net.update_hidden,
            "seed": net.seed,
            "epoch": epoch,
            "tensors": [[n, list(net.params[n].shape)] for n in PARAM_ORDER],
        }
        encoded = json.dumps(header).encode("utf-8")
        body = net.params.flatten().astype("<f8").tobytes()
        path = self.path(name)
        with open(path, "wb") as fh:
            fh.write(CHECKPOINT_MAGIC)
            fh.write(struct.pack("<II", CHECKPOINT_VERSION, len(encoded)))
            fh.write(encoded)
            fh.write(body)
        logger.debug(f"Saved checkpoint {path} (epoch={epoch})")
        return path

    def load_checkpoint(self, name: str) -> Tuple[KpinNetwork, Optional[int]]:
        """Read a checkpoint; returns the network and the epoch it was written at."""
        with open(self._existing(name), "rb") as fh:
            raw = fh.read()
        if raw[:len(CHECKPOINT_MAGIC)] != CHECKPOINT_MAGIC:
            raise ArtifactError(f"{name} is not a KPIN checkpoint")
        offset = len(CHECKPOINT_MAGIC)
        version, header_len = struct.unpack_from("<II", raw, offset)
        if version != CHECKPOINT_VERSION:
            raise ArtifactError(f"Unsupported checkpoint version {version}")
        offset += 8
        header = json.loads(raw[offset:offset + header_len].decode("utf-8"))
        body = np.frombuffer(raw, dtype="<f8", offset=offset + header_len)

        tensors, pos = {}, 0
        for tensor_name, shape in header["tensors"]:
            size = int(np.prod(shape))
            if pos + size > body.size:
                raise ArtifactError(f"Checkpoint body is truncated at tensor {tensor_name}")
            tensors[tensor_name] = body[pos:pos + size].reshape(shape).copy()
            pos += size
        if pos != body.size:
            raise ArtifactError(f"Checkpoint body has {body.size - pos} trailing values")

        net = KpinNetwork(
            state_dim=header["state_dim"],
            obs_dim=header["obs_dim"],
            hidden_dim=header["hidden_dim"],
            update_hidden=header["update_hidden"],
            seed=header["seed"],
            params=KpinParameters(tensors),
        )
        return net, header["epoch"]

    # Tables

    def save_trace(self, name: str, trace: PredictionTrace, include_entries: bool = False) -> str:
        path = self.path(name)
        trace.to_frame(include_entries).to_csv(path, index=False)
        logger.info(f"Saved trace {path}")
        return path

    def save_training_log(self, name: str, result: TrainResult) -> str:
        frame = pd.DataFrame({
            "epoch": np.arange(1, len(result.losses) + 1),
            "objective": result.losses,
            "wall_ms": result.epoch_ms,
        })
        path = self.path(name)
        frame.to_csv(path, index=False)
        logger.info(f"Saved training log {path}")
        return path

    def save_reports(self, name: str, reports: List[EvalReport]) -> Tuple[str, str]:
        """One CSV row per report plus a JSON sidecar with per-step NSE and the full config."""
        csv_path = self.save_table(f"{name}.csv", pd.DataFrame([r.to_row() for r in reports]), "csv")
        json_path = self.path(f"{name}.json")
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump([r.model_dump(mode="json") for r in reports], fh, indent=2)
        return csv_path, json_path

    def load_reports(self, name: str) -> List[EvalReport]:
        with open(self._existing(f"{name}.json"), "r", encoding="utf-8") as fh:
            return [EvalReport(**r) for r in json.load(fh)]

    def save_table(self, name: str, frame: pd.DataFrame, fmt: Optional[str] = None) -> str:
        fmt = fmt or settings.default_format
        path = self.path(name)
        if fmt == "json":
            frame.to_json(path, orient="records", indent=2)
        else:
            frame.to_csv(path, index=False)
        logger.info(f"Saved table {path}")
        return path

    def load_table(self, name: str) -> pd.DataFrame:
        path = self._existing(name)
        if path.endswith(".json"):
            return pd.read_json(path, orient="records")
        return pd.read_csv(path)


# Global artifact store instance
artifact_store = ArtifactStore()
