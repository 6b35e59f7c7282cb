import os
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from core.types import GridSet, NodalState, TrajectorySequence
from utils.errors import DimensionError, FormatError

FLOAT_FORMAT = "%.17g"


def _node_columns(grid: Optional[GridSet], n_nodes: int) -> pd.DataFrame:
    frame = pd.DataFrame({"node": np.arange(n_nodes)})
    if grid is None:
        return frame
    for axis, name in enumerate(("x", "y")[:grid.dim]):
        frame[name] = grid.nodes[:, axis]
    return frame


def write_trajectory_csv(sequence: TrajectorySequence, grid: Optional[GridSet], path: str) -> int:
    """
    One row per (component, node), one column per output time

    Without a grid only the node index is written.

    Returns:
        Number of rows written
    """
    n_components = sequence.states[0].n_components
    blocks = []
    for c in range(n_components):
        frame = _node_columns(grid, sequence.states[0].n_nodes)
        frame.insert(0, "component", c)
        for state in sequence.states:
            frame[f"t={state.time:.10g}"] = state.component(c)
        blocks.append(frame)
    table = pd.concat(blocks, ignore_index=True)
    if n_components == 1:
        table = table.drop(columns="component")
    table.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return len(table)


def read_ic_csv(path: str, n_nodes: int, n_components: int = 1) -> NodalState:
    """
    Initial state from a CSV of nodal values

    The file needs a "value" column (or a single column); rows are in
    storage order, component-major for systems.
    """
    try:
        table = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise FormatError(f"Cannot parse initial-condition CSV {path}: {exc}") from exc
    if "value" in table.columns:
        values = table["value"].to_numpy(dtype=np.float64)
    elif table.shape[1] == 1:
        values = table.iloc[:, 0].to_numpy(dtype=np.float64)
    else:
        raise FormatError(f"Initial-condition CSV {path} needs a 'value' column")
    expected = n_nodes * n_components
    if values.size != expected:
        raise DimensionError(f"Initial condition has {values.size} values, model expects {expected}")
    return NodalState(values, n_components=n_components)


def write_slices(prediction: TrajectorySequence, reference: TrajectorySequence, grid: GridSet,
                 times: Sequence[float], out_dir: str) -> List[str]:
    """
    Prediction vs reference at selected times, one CSV per (time, component)

    Files are named slice_t{time}_c{component}.csv with columns
    node, x[, y], prediction, reference. Times past the end of the
    prediction are skipped.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    predicted_times = prediction.times
    for t in times:
        matches = np.flatnonzero(np.isclose(predicted_times, t, rtol=1e-9, atol=1e-12))
        if matches.size == 0:
            continue
        k = int(matches[0])
        p, r = prediction.states[k], reference.states[k]
        for c in range(p.n_components):
            frame = _node_columns(grid, grid.n_nodes)
            frame["prediction"] = p.component(c)
            frame["reference"] = r.component(c)
            path = os.path.join(out_dir, f"slice_t{t:g}_c{c}.csv")
            frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
            paths.append(path)
    return paths
