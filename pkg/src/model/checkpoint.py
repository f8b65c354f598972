"""Checkpoint files: one JSON header line, then little-endian float64 blobs."""
import json
import logging
from collections import OrderedDict
from pathlib import Path
from typing import Union

import numpy as np

from ..autodiff import Tensor
from ..utils.errors import ContractError
from .mlp import LayerSpec, ModelParams

logger = logging.getLogger(__name__)

FORMAT = "dcg-checkpoint"
VERSION = 1


def save_checkpoint(path: Union[str, Path], params: ModelParams) -> Path:
    path = Path(path)
    entries = []
    offset = 0
    for name, tensor in params.items():
        entries.append({"name": name, "shape": list(tensor.shape), "offset": offset})
        offset += tensor.size * 8
    header = {"format": FORMAT, "version": VERSION,
              "layer_spec": params.spec.to_dict(), "tensors": entries}
    with open(path, "wb") as f:
        f.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
        for tensor in params.values():
            f.write(tensor.data.astype("<f8").tobytes(order="C"))
    logger.info(f"Wrote checkpoint {path} ({params.count} values)")
    return path


def load_checkpoint(path: Union[str, Path], requires_grad: bool = True) -> ModelParams:
    """Read a checkpoint written by save_checkpoint."""
    raw = Path(path).read_bytes()
    newline = raw.find(b"\n")
    if newline < 0:
        raise ContractError(f"{path}: missing checkpoint header")
    header = json.loads(raw[:newline].decode("utf-8"))
    if header.get("format") != FORMAT:
        raise ContractError(f"{path}: not a checkpoint (format={header.get('format')})")
    body = raw[newline + 1:]
    tensors = OrderedDict()
    for entry in header["tensors"]:
        count = int(np.prod(entry["shape"]))
        end = entry["offset"] + count * 8
        if end > len(body):
            raise ContractError(f"{path}: blob for {entry['name']} is truncated")
        values = np.frombuffer(body[entry["offset"]:end], dtype="<f8").astype(np.float64)
        tensors[entry["name"]] = Tensor(values.reshape(entry["shape"]),
                                        requires_grad=requires_grad, name=entry["name"])
    return ModelParams(LayerSpec.from_dict(header["layer_spec"]), tensors)
