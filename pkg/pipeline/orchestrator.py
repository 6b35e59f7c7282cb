"""
End-to-end driver: generate, train, predict, evaluate, inspect.

Every command returns a JSON-native summary; main.py prints it.
"""

import json
import os
import time
from typing import Any, Dict, List, Optional

from config import Config
from core.types import GridSet, NodalState
from evaluation.metrics import EvaluationMetrics
from evaluation.rollout import evaluate_against_reference, oracle_flow_map, predict
from model.network import NetworkParams
from pipeline.experiment_config import ExperimentConfig, extrapolation_factor, training_horizon
from sampling.validation import named_initial_condition
from solvers.trajectory import generate_dataset
from tools.csv_tool import read_ic_csv, write_slices, write_trajectory_csv
from tools.npmc_tool import NPMCTool, load_checkpoint, save_checkpoint
from tools.ntdf_tool import NTDFTool
from training.optimizer import AdamState
from training.trainer import TrainHistory, train_with_state
from utils.errors import (
    DimensionError,
    FormatError,
    InvalidArgumentError,
    TrainingDivergedError,
)
from utils.logger import NodalNetLogger
from utils.parallel import map_ordered


class ExperimentOrchestrator:
    """
    Runs the pipeline stages for one experiment config
    """

    def __init__(self, config: Optional[ExperimentConfig] = None, threads: Optional[int] = None):
        self.config = config
        self.threads = Config.THREADS if threads is None else threads
        self.logger = NodalNetLogger()
        self._grid: Optional[GridSet] = None

    def _require_config(self) -> ExperimentConfig:
        if self.config is None:
            raise InvalidArgumentError("This command needs --config")
        return self.config

    @property
    def grid(self) -> GridSet:
        if self._grid is None:
            self._grid = self._require_config().grid.build()
        return self._grid

    def _timed(self, stage: str, started: float):
        self.logger.log_timing(stage, time.perf_counter() - started)

    # ---- generate ----

    def generate(self, out_path: Optional[str], dry_run: bool = False) -> Dict[str, Any]:
        """
        Solve the reference PDE for every sampled initial condition and write NTDF
        """
        config = self._require_config()
        self.logger.log_stage("generate", "start", {"name": config.name, "dry_run": dry_run})
        summary = {
            "command": "generate",
            "name": config.name,
            "pde": config.pde.kind,
            "n_sequences": config.dataset.n_sequences,
            "n_steps": config.dataset.n_steps,
            "dt": config.dataset.dt,
            "n_nodes": self.grid.n_nodes,
            "n_components": config.pde.n_components,
        }
        if dry_run:
            summary["dry_run"] = True
            return summary
        if not out_path:
            raise InvalidArgumentError("generate needs --out")

        started = time.perf_counter()
        dataset = generate_dataset(
            config.pde,
            config.build_sampler(),
            self.grid,
            config.dataset.n_sequences,
            config.dataset.n_steps,
            config.dataset.dt,
            config.dataset.seed,
            self.threads,
        )
        dataset.metadata["experiment"] = config.name
        dataset.metadata["sampler"] = config.sampler_config
        size = NTDFTool().write(dataset, out_path)
        self._timed("generate", started)

        summary.update({
            "path": out_path,
            "bytes": size,
            "oracle_substeps": dataset.metadata["oracle_substeps"],
            "seed": config.dataset.seed,
        })
        return summary

    # ---- train ----

    def train(self, data_path: str, model_out: str, resume: Optional[str] = None,
              on_epoch=None) -> Dict[str, Any]:
        """
        Train on an NTDF dataset and write an NPMC checkpoint plus history CSV
        """
        config = self._require_config()
        dims = config.network_dims
        self.logger.log_stage("train", "start", {"data": data_path, "dims": dims.to_dict()})
        dataset = NTDFTool().read(data_path)
        if dataset.grid != self.grid:
            self.logger.logger.warning("Dataset grid differs from the grid described by the config")

        initial = None
        if resume:
            params, history, adam = load_checkpoint(resume, expected_dims=dims)
            if adam is None:
                raise FormatError(f"Checkpoint {resume} carries no optimizer state to resume from")
            initial = (params, AdamState.from_dict(adam, params), TrainHistory.from_dict(history))

        started = time.perf_counter()
        try:
            result = train_with_state(
                dataset, dims, config.training,
                init_seed=config.network.init_seed,
                init_output_scale=config.network.output_scale,
                initial=initial,
                on_epoch=on_epoch,
                threads=self.threads,
            )
        except TrainingDivergedError as exc:
            self.logger.log_error(exc, "train")
            if exc.params is not None:
                salvage = model_out + ".diverged"
                save_checkpoint(exc.params, exc.history.to_dict(include_timing=False), salvage,
                                exc.adam_state.to_dict())
                self.logger.logger.error(f"Last finite parameters written to {salvage}")
            raise
        self._timed("train", started)

        save_checkpoint(result.params, result.history.to_dict(include_timing=False), model_out,
                        result.adam_state.to_dict())
        history_path = os.path.splitext(model_out)[0] + "_history.csv"
        result.history.to_csv(history_path)

        summary = {"command": "train", "path": model_out, "history": history_path,
                   "parameters": result.params.count, "steps": result.adam_state.step,
                   "model_hash": result.params.sha256()}
        summary.update(result.history.summary())
        return summary

    # ---- predict ----

    def _initial_state(self, ic_source: str, params: NetworkParams) -> NodalState:
        dims = params.dims
        if os.path.exists(ic_source):
            return read_ic_csv(ic_source, dims.n_nodes, dims.n_components)
        field = named_initial_condition(ic_source)
        state = field.on_grid(self.grid)
        if state.values.size != dims.n_inputs:
            raise DimensionError(
                f"Initial condition has {state.values.size} values, model expects {dims.n_inputs}"
            )
        return state

    def predict(self, model_path: str, ic_source: str, steps: int, out_csv: str) -> Dict[str, Any]:
        """
        Roll the model out from a CSV or named initial condition and write the trajectory CSV
        """
        params, _, _ = load_checkpoint(model_path)
        state = self._initial_state(ic_source, params)
        dt = self.config.dataset.dt if self.config is not None else 1.0
        self.logger.log_stage("predict", "start", {"ic": ic_source, "steps": steps})

        started = time.perf_counter()
        sequence = predict(params, state, steps, dt)
        self._timed("predict", started)

        grid = self.grid if self.config is not None else None
        if grid is not None and grid.n_nodes != params.dims.n_nodes:
            raise DimensionError(
                f"Config grid has {grid.n_nodes} nodes, model was trained on {params.dims.n_nodes}"
            )
        rows = write_trajectory_csv(sequence, grid, out_csv)
        return {
            "command": "predict",
            "path": out_csv,
            "rows": rows,
            "steps": sequence.n_steps,
            "truncated": sequence.n_steps < steps,
        }

    # ---- evaluate ----

    def evaluate(self, model_path: Optional[str], out_json: str, oracle: bool = False,
                 ic_names: Optional[List[str]] = None) -> Dict[str, Any]:
        """
        Score the model (or the reference stepper itself) on named out-of-sample ICs

        Writes one JSON document keyed by IC name plus per-time CSV slices in
        <out_json stem>_slices/<ic>/.
        """
        config = self._require_config()
        names = ic_names or config.evaluation.initial_conditions
        if not names:
            raise InvalidArgumentError("No initial conditions to evaluate (evaluation.initial_conditions)")
        dt = config.dataset.dt

        if oracle:
            model = oracle_flow_map(config.pde, self.grid, dt)
        else:
            if not model_path:
                raise InvalidArgumentError("evaluate needs a model path unless --oracle is given")
            model, _, _ = load_checkpoint(model_path, expected_dims=config.network_dims)

        extra = {
            "experiment": config.name,
            "training_horizon": training_horizon(config),
            "extrapolation_factor": extrapolation_factor(config),
        }
        self.logger.log_stage("evaluate", "start", {"ics": names, "oracle": oracle})

        def run(name: str):
            return evaluate_against_reference(
                model, config.pde, named_initial_condition(name), self.grid,
                config.evaluation.horizon, dt, dict(extra, ic_name=name),
            )

        started = time.perf_counter()
        # oracle steppers keep per-instance state; evaluate them one at a time
        results = map_ordered(run, names, 1 if oracle else self.threads)
        self._timed("evaluate", started)

        slice_root = os.path.splitext(out_json)[0] + "_slices"
        document, slices = {}, {}
        for name, (report, prediction, reference) in zip(names, results):
            document[name] = report.to_dict()
            slices[name] = write_slices(prediction, reference, self.grid,
                                        config.evaluation.slice_times,
                                        os.path.join(slice_root, name))
            EvaluationMetrics.print_metrics_report(report)

        with open(out_json, "w") as handle:
            json.dump(document, handle, indent=2, sort_keys=True)
            handle.write("\n")

        return {
            "command": "evaluate",
            "path": out_json,
            "slices": slices,
            "final_relative_l2": {n: document[n]["relative_l2"][-1] for n in names},
            "blowup_step": {n: document[n]["blowup_step"] for n in names},
        }

    # ---- inspect ----

    def inspect(self, path: str) -> Dict[str, Any]:
        """Decoded NTDF or NPMC header, plus the training summary for checkpoints"""
        with open(path, "rb") as handle:
            raw = handle.read()
        if raw[:4] == NTDFTool.MAGIC:
            header = NTDFTool().read_header(raw)
            header["size_ok"] = len(raw) == NTDFTool().expected_size(header)
            return header
        header = NPMCTool().read_header(raw)
        _, trailer = NPMCTool().decode(raw)
        header["seed"] = trailer.get("seed")
        header["history"] = TrainHistory.from_dict(trailer.get("history") or {}).summary()
        header["optimizer_step"] = (trailer.get("adam") or {}).get("step")
        return header
