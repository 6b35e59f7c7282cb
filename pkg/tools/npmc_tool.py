import json
import struct
from typing import Any, Dict, Optional, Tuple

import numpy as np

from config import Config
from model.network import LIFT_KINDS, NetworkDims, NetworkParams, parameter_count
from utils.errors import (
    BadMagicError,
    FormatError,
    ShapeMismatchError,
    TruncatedPayloadError,
    VersionMismatchError,
)


class NPMCTool:
    """Tool for reading and writing NPMC model checkpoints"""

    MAGIC = b"NPMC"
    # magic, version, N, n_w, n_d, J, n_a, L, lift tag, parameter count
    HEADER = struct.Struct("<4sIIIIIIIIQ")
    TRAILER_LENGTH = struct.Struct("<Q")

    def encode(self, params: NetworkParams, trailer: Optional[Dict[str, Any]] = None) -> bytes:
        dims = params.dims
        header = self.HEADER.pack(
            self.MAGIC,
            Config.NPMC_VERSION,
            *dims.as_tuple(),
            LIFT_KINDS.index(dims.lift),
            params.count,
        )
        text = json.dumps(trailer or {}, sort_keys=True).encode("utf-8")
        return b"".join([
            header,
            np.ascontiguousarray(params.flat(), dtype="<f8").tobytes(),
            self.TRAILER_LENGTH.pack(len(text)),
            text,
        ])

    def write(self, params: NetworkParams, path: str, trailer: Optional[Dict[str, Any]] = None) -> int:
        """
        Write a checkpoint

        Args:
            params: Network parameters
            path: Destination file
            trailer: JSON-serializable training record (history, optimizer state, seed)

        Returns:
            Number of bytes written
        """
        payload = self.encode(params, trailer)
        with open(path, "wb") as handle:
            handle.write(payload)
        return len(payload)

    def read_header(self, raw: bytes) -> Dict[str, Any]:
        """Decode and validate the fixed-size header"""
        if len(raw) < 4 or raw[:4] != self.MAGIC:
            raise BadMagicError(f"Not an NPMC file (magic {raw[:4]!r})")
        if len(raw) < self.HEADER.size:
            raise TruncatedPayloadError(f"NPMC header needs {self.HEADER.size} bytes, got {len(raw)}")

        (_, version, n_nodes, width, depth, thickness, assembly_depth, n_components,
         lift_tag, count) = self.HEADER.unpack_from(raw)
        if version != Config.NPMC_VERSION:
            raise VersionMismatchError(f"NPMC version {version} is not supported (expected {Config.NPMC_VERSION})")
        if lift_tag >= len(LIFT_KINDS):
            raise FormatError(f"Unknown lift tag {lift_tag}")

        return {
            "format": "NPMC",
            "version": version,
            "dims": {
                "n_nodes": n_nodes,
                "width": width,
                "depth": depth,
                "thickness": thickness,
                "assembly_depth": assembly_depth,
                "n_components": n_components,
                "lift": LIFT_KINDS[lift_tag],
            },
            "parameter_count": count,
        }

    def decode(self, raw: bytes, expected_dims: Optional[NetworkDims] = None
               ) -> Tuple[NetworkParams, Dict[str, Any]]:
        header = self.read_header(raw)
        try:
            dims = NetworkDims.from_dict(header["dims"])
        except ValueError as exc:
            raise ShapeMismatchError(f"Checkpoint dims are inconsistent: {exc}") from exc
        if expected_dims is not None and dims != expected_dims:
            raise ShapeMismatchError(f"Checkpoint dims {dims.to_dict()} do not match {expected_dims.to_dict()}")
        count = header["parameter_count"]
        if count != parameter_count(dims):
            raise ShapeMismatchError(
                f"Checkpoint stores {count} parameters, dims imply {parameter_count(dims)}"
            )

        offset = self.HEADER.size
        trailer_at = offset + 8 * count
        if len(raw) < trailer_at + self.TRAILER_LENGTH.size:
            raise TruncatedPayloadError(f"NPMC payload ends after {len(raw)} bytes")
        (length,) = self.TRAILER_LENGTH.unpack_from(raw, trailer_at)
        start = trailer_at + self.TRAILER_LENGTH.size
        if len(raw) != start + length:
            raise TruncatedPayloadError(
                f"NPMC file has {len(raw)} bytes, header and trailer imply {start + length}"
            )
        try:
            trailer = json.loads(raw[start:start + length].decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise FormatError(f"NPMC trailer is not valid JSON: {exc}") from exc

        vector = np.frombuffer(raw, dtype="<f8", count=count, offset=offset).astype(np.float64)
        return NetworkParams.from_flat(dims, vector, trailer.get("seed")), trailer

    def read(self, path: str, expected_dims: Optional[NetworkDims] = None
             ) -> Tuple[NetworkParams, Dict[str, Any]]:
        with open(path, "rb") as handle:
            raw = handle.read()
        return self.decode(raw, expected_dims)


def save_checkpoint(params: NetworkParams, history: Optional[Dict[str, Any]], path: str,
                    adam_state: Optional[Dict[str, Any]] = None) -> int:
    trailer = {"seed": params.seed, "history": history or {}, "adam": adam_state}
    return NPMCTool().write(params, path, trailer)


def load_checkpoint(path: str, expected_dims: Optional[NetworkDims] = None
                    ) -> Tuple[NetworkParams, Dict[str, Any], Optional[Dict[str, Any]]]:
    """
    Read a checkpoint

    Returns:
        (params, history record, optimizer state or None)
    """
    params, trailer = NPMCTool().read(path, expected_dims)
    return params, trailer.get("history") or {}, trailer.get("adam")
