import json
import math
import os
import struct
from typing import Any, Dict, Optional, Tuple

import numpy as np

from config import Config
from core.grid import make_uniform_periodic_grid
from core.types import Domain, GridSet, TrajectoryDataset
from utils.errors import (
    BadMagicError,
    FormatError,
    TruncatedPayloadError,
    VersionMismatchError,
)


class NTDFTool:
    """Tool for reading and writing NTDF trajectory files"""

    MAGIC = b"NTDF"
    # magic, version, d, N, L, n_L, dt, M
    HEADER = struct.Struct("<4sIIIIIdQ")

    def write(self, dataset: TrajectoryDataset, path: str, sidecar: bool = True) -> int:
        """
        Write a dataset to an NTDF file

        Args:
            dataset: Dataset to encode
            path: Destination file
            sidecar: Also write metadata and grid domain to path + ".json"

        Returns:
            Number of bytes written to the NTDF file
        """
        grid = dataset.grid
        payload = self.encode(dataset)
        with open(path, "wb") as handle:
            handle.write(payload)

        if sidecar:
            document = {
                "metadata": dataset.metadata,
                "grid": {"domain": grid.domain.to_dict(), "uniform": grid.uniform},
            }
            with open(path + ".json", "w") as handle:
                json.dump(document, handle, indent=2, sort_keys=True)

        return len(payload)

    def encode(self, dataset: TrajectoryDataset) -> bytes:
        grid = dataset.grid
        header = self.HEADER.pack(
            self.MAGIC,
            Config.NTDF_VERSION,
            grid.dim,
            grid.n_nodes,
            dataset.n_components,
            dataset.n_steps,
            float(dataset.dt),
            dataset.n_sequences,
        )
        parts = [
            header,
            np.ascontiguousarray(grid.nodes, dtype="<f8").tobytes(),
            np.ascontiguousarray(grid.permutation, dtype="<u8").tobytes(),
            np.ascontiguousarray(dataset.as_array(), dtype="<f8").tobytes(),
        ]
        return b"".join(parts)

    def read_header(self, raw: bytes) -> Dict[str, Any]:
        """Decode and validate the fixed-size header"""
        if len(raw) < 4 or raw[:4] != self.MAGIC:
            raise BadMagicError(f"Not an NTDF file (magic {raw[:4]!r})")
        if len(raw) < self.HEADER.size:
            raise TruncatedPayloadError(f"NTDF header needs {self.HEADER.size} bytes, got {len(raw)}")

        _, version, dim, n_nodes, n_components, n_steps, dt, n_sequences = self.HEADER.unpack_from(raw)
        if version != Config.NTDF_VERSION:
            raise VersionMismatchError(f"NTDF version {version} is not supported (expected {Config.NTDF_VERSION})")

        return {
            "format": "NTDF",
            "version": version,
            "dim": dim,
            "n_nodes": n_nodes,
            "n_components": n_components,
            "n_steps": n_steps,
            "dt": dt,
            "n_sequences": n_sequences,
        }

    def expected_size(self, header: Dict[str, Any]) -> int:
        n = header["n_nodes"]
        return (
            self.HEADER.size
            + 8 * n * header["dim"]
            + 8 * n
            + 8 * header["n_sequences"] * (header["n_steps"] + 1) * n * header["n_components"]
        )

    def read(self, path: str) -> TrajectoryDataset:
        """
        Read a dataset from an NTDF file

        Args:
            path: NTDF file

        Returns:
            TrajectoryDataset; nothing is returned if any check fails
        """
        with open(path, "rb") as handle:
            raw = handle.read()

        sidecar = None
        if os.path.exists(path + ".json"):
            with open(path + ".json") as handle:
                sidecar = json.load(handle)

        return self.decode(raw, sidecar)

    def decode(self, raw: bytes, sidecar: Optional[Dict[str, Any]] = None) -> TrajectoryDataset:
        header = self.read_header(raw)
        expected = self.expected_size(header)
        if len(raw) != expected:
            raise TruncatedPayloadError(f"NTDF payload has {len(raw)} bytes, header implies {expected}")

        dim = header["dim"]
        n = header["n_nodes"]
        n_components = header["n_components"]
        n_steps = header["n_steps"]
        n_sequences = header["n_sequences"]

        offset = self.HEADER.size
        nodes = np.frombuffer(raw, dtype="<f8", count=n * dim, offset=offset).reshape(n, dim)
        offset += 8 * n * dim
        perm = np.frombuffer(raw, dtype="<u8", count=n, offset=offset).astype(np.int64)
        offset += 8 * n
        values = np.frombuffer(
            raw, dtype="<f8", count=n_sequences * (n_steps + 1) * n * n_components, offset=offset
        ).reshape(n_sequences, n_steps + 1, n * n_components)

        nodes = nodes.astype(np.float64)
        sidecar = sidecar or {}
        grid_info = sidecar.get("grid", {})
        if "domain" in grid_info:
            domain = Domain.from_dict(grid_info["domain"])
            uniform = bool(grid_info.get("uniform", False))
        else:
            domain, uniform = self._recover_domain(nodes, perm)

        grid = GridSet(nodes=nodes, permutation=perm, domain=domain, uniform=uniform)
        return TrajectoryDataset.from_array(
            grid,
            values.astype(np.float64),
            header["dt"],
            n_components=n_components,
            metadata=sidecar.get("metadata", {}),
        )

    def _recover_domain(self, nodes: np.ndarray, perm: np.ndarray) -> Tuple[Domain, bool]:
        """
        Domain and uniform flag from the nodes alone, when no sidecar is present.

        2D grids carry their corners, so the bounding box is the domain. A 1D
        grid is accepted only if some period regenerates its nodes bit for bit.
        """
        if nodes.shape[1] == 2:
            return Domain.box(tuple(nodes.min(axis=0)), tuple(nodes.max(axis=0))), False

        n = nodes.shape[0]
        if not np.array_equal(np.sort(perm), np.arange(n)):
            raise FormatError("NTDF permutation block is not a permutation of the node indices")
        generated = np.empty(n)
        generated[perm] = nodes[:, 0]
        origin = float(generated[0])
        for length in self._candidate_lengths(generated, origin):
            if not length > 0:
                continue
            regenerated = make_uniform_periodic_grid(n, length, origin).nodes[:, 0]
            if np.array_equal(regenerated, generated):
                return Domain.periodic(origin, length), True
        raise FormatError(
            "NTDF file has no sidecar and its 1D nodes are not a uniform grid; "
            "the domain cannot be recovered"
        )

    @staticmethod
    def _candidate_lengths(generated: np.ndarray, origin: float):
        n = generated.size
        yield 2.0 * math.pi
        estimate = (generated[-1] - origin) * n / (n - 1)
        yield estimate
        up = down = estimate
        for _ in range(8):
            up, down = np.nextafter(up, np.inf), np.nextafter(down, -np.inf)
            yield float(up)
            yield float(down)


def write_dataset(dataset: TrajectoryDataset, path: str) -> int:
    return NTDFTool().write(dataset, path)


def read_dataset(path: str) -> TrajectoryDataset:
    return NTDFTool().read(path)
