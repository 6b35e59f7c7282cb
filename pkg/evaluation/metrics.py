import json
import sys
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from config import Config
from core.types import TrajectorySequence
from utils.errors import DimensionError


@dataclass
class ErrorReport:
    """Per-time errors of a prediction against a reference trajectory"""

    times: List[float]
    relative_l2: List[float]
    linf: List[float]
    component_relative_l2: List[List[float]] = field(default_factory=list)
    blowup_step: Optional[int] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def write(self, path: str):
        with open(path, "w") as handle:
            handle.write(self.to_json())
            handle.write("\n")

    def at_time(self, t: float) -> Dict[str, Any]:
        """Errors at the report time closest to t"""
        index = int(np.argmin(np.abs(np.asarray(self.times) - t)))
        return {
            "time": self.times[index],
            "relative_l2": self.relative_l2[index],
            "linf": self.linf[index],
            "component_relative_l2": [c[index] for c in self.component_relative_l2],
        }


def relative_l2(prediction: np.ndarray, reference: np.ndarray) -> float:
    denominator = max(float(np.linalg.norm(reference)), Config.RELATIVE_L2_FLOOR)
    return float(np.linalg.norm(prediction - reference)) / denominator


def compute_error_metrics(prediction: TrajectorySequence, reference: TrajectorySequence,
                          threshold: float = Config.BLOWUP_THRESHOLD) -> ErrorReport:
    """
    Relative L2 and Linf error per output time

    Args:
        prediction: Model rollout; may be shorter than the reference when it stopped early
        reference: Reference trajectory on the same grid and times
        threshold: Relative L2 above which the rollout counts as blown up

    Returns:
        ErrorReport; series end at the blow-up step when there is one
    """
    if prediction.states[0].layout != reference.states[0].layout:
        raise DimensionError(
            f"Prediction layout {prediction.states[0].layout} differs from reference "
            f"{reference.states[0].layout}"
        )
    if prediction.n_steps > reference.n_steps:
        raise DimensionError("Prediction has more steps than the reference")

    n_components = reference.states[0].n_components
    times, rel, linf = [], [], []
    components: List[List[float]] = [[] for _ in range(n_components)]
    blowup = None
    for k, (p, r) in enumerate(zip(prediction.states, reference.states)):
        if not np.isclose(p.time, r.time, rtol=1e-9, atol=1e-12):
            raise DimensionError(f"Step {k}: prediction time {p.time} differs from reference {r.time}")
        error = relative_l2(p.values, r.values)
        times.append(r.time)
        rel.append(error)
        linf.append(float(np.max(np.abs(p.values - r.values))))
        for c in range(n_components):
            components[c].append(relative_l2(p.component(c), r.component(c)))
        if error > threshold:
            blowup = k
            break
    if blowup is None and prediction.n_steps < reference.n_steps:
        blowup = prediction.n_steps + 1

    return ErrorReport(times=times, relative_l2=rel, linf=linf,
                       component_relative_l2=components, blowup_step=blowup)


class EvaluationMetrics:
    """Text summaries of error reports"""

    @staticmethod
    def summarize(report: ErrorReport) -> Dict[str, Any]:
        rel = np.asarray(report.relative_l2)
        return {
            "steps": len(report.times) - 1,
            "final_time": report.times[-1],
            "final_relative_l2": float(rel[-1]),
            "max_relative_l2": float(rel.max()),
            "max_linf": float(np.max(report.linf)),
            "blowup_step": report.blowup_step,
        }

    @staticmethod
    def print_metrics_report(report: ErrorReport, stream=sys.stderr):
        """Print formatted metrics report"""
        summary = EvaluationMetrics.summarize(report)
        meta = report.metadata

        print("\n" + "=" * 80, file=stream)
        print("EVALUATION METRICS REPORT", file=stream)
        print("=" * 80, file=stream)

        if meta:
            print(f"\nPDE: {meta.get('pde', {}).get('kind', '?')}", file=stream)
            print(f"Initial condition: {meta.get('ic', {})}", file=stream)
            print(f"Model: {meta.get('model_hash', '?')}", file=stream)
            print(f"Training horizon: {meta.get('training_horizon')}  "
                  f"Rollout horizon: {meta.get('rollout_horizon')}  "
                  f"Extrapolation: {meta.get('extrapolation_factor')}x", file=stream)
        print(f"\nSteps: {summary['steps']} (t = {summary['final_time']:.4g})", file=stream)
        print(f"Final relative L2: {summary['final_relative_l2']:.4e}", file=stream)
        print(f"Max relative L2: {summary['max_relative_l2']:.4e}", file=stream)
        print(f"Max Linf: {summary['max_linf']:.4e}", file=stream)
        for c, series in enumerate(report.component_relative_l2):
            if len(report.component_relative_l2) > 1:
                print(f"  Component {c} final relative L2: {series[-1]:.4e}", file=stream)
        if report.blowup_step is not None:
            print(f"\nBlow-up detected at step {report.blowup_step}", file=stream)
        print("=" * 80, file=stream)
