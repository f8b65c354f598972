"""Dense feed-forward classifier over flattened inputs."""
import logging
from collections import OrderedDict
from collections.abc import Mapping
from dataclasses import asdict, dataclass
from typing import Dict, Iterator, List, Sequence, Tuple

import numpy as np

from ..autodiff import Tensor, no_grad
from ..utils.errors import ContractError, DimensionError

logger = logging.getLogger(__name__)

ACTIVATIONS = ("relu", "tanh")


@dataclass(frozen=True)
class LayerSpec:
    """Shape of the network: input width, hidden widths, class count."""
    input_dim: int
    num_classes: int
    hidden: Tuple[int, ...] = (128, 64)
    activation: str = "relu"

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if self.input_dim < 1 or self.num_classes < 2:
            raise ContractError(
                f"need input_dim >= 1 and num_classes >= 2, got {self.input_dim}, {self.num_classes}")
        if any(h < 1 for h in self.hidden):
            raise ContractError(f"hidden widths must be positive, got {self.hidden}")
        if self.activation not in ACTIVATIONS:
            raise ContractError(f"activation must be one of {ACTIVATIONS}, got {self.activation}")

    @property
    def widths(self) -> List[int]:
        return [self.input_dim, *self.hidden, self.num_classes]

    def shapes(self) -> "OrderedDict[str, Tuple[int, ...]]":
        """Parameter name -> shape, in forward order."""
        shapes = OrderedDict()
        widths = self.widths
        for layer, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:]), start=1):
            shapes[f"fc{layer}.weight"] = (fan_out, fan_in)
            shapes[f"fc{layer}.bias"] = (fan_out,)
        return shapes

    def to_dict(self) -> Dict:
        data = asdict(self)
        data["hidden"] = list(self.hidden)
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> "LayerSpec":
        return cls(input_dim=data["input_dim"], num_classes=data["num_classes"],
                   hidden=tuple(data.get("hidden", ())), activation=data.get("activation", "relu"))


class ModelParams(Mapping):
    """Named parameter tensors (θ) together with the layer spec they fit."""

    def __init__(self, spec: LayerSpec, tensors: Mapping):
        shapes = spec.shapes()
        if list(tensors.keys()) != list(shapes.keys()):
            raise ContractError(f"parameter names {list(tensors.keys())} do not match {list(shapes)}")
        for name, shape in shapes.items():
            if tuple(tensors[name].shape) != shape:
                raise DimensionError(f"{name} has shape {tensors[name].shape}, spec needs {shape}")
        self.spec = spec
        self.tensors: "OrderedDict[str, Tensor]" = OrderedDict(tensors)

    def __getitem__(self, name: str) -> Tensor:
        return self.tensors[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self.tensors)

    def __len__(self) -> int:
        return len(self.tensors)

    @property
    def count(self) -> int:
        return sum(t.size for t in self.tensors.values())

    def flatten(self) -> np.ndarray:
        """All parameter values as one vector, in name order."""
        return np.concatenate([t.data.reshape(-1) for t in self.tensors.values()])

    @classmethod
    def unflatten(cls, spec: LayerSpec, vector: np.ndarray, requires_grad: bool = True) -> "ModelParams":
        vector = np.asarray(vector, dtype=np.float64)
        shapes = spec.shapes()
        total = sum(int(np.prod(s)) for s in shapes.values())
        if vector.shape != (total,):
            raise DimensionError(f"expected a vector of {total} values, got shape {vector.shape}")
        tensors = OrderedDict()
        offset = 0
        for name, shape in shapes.items():
            count = int(np.prod(shape))
            tensors[name] = Tensor(vector[offset:offset + count].reshape(shape),
                                   requires_grad=requires_grad, name=name)
            offset += count
        return cls(spec, tensors)

    def detached(self, requires_grad: bool = False) -> "ModelParams":
        """Fresh leaf copies, optionally grad-tracked."""
        return ModelParams(self.spec, OrderedDict(
            (name, Tensor(t.data.copy(), requires_grad=requires_grad, name=name))
            for name, t in self.tensors.items()))


def init_params(spec: LayerSpec, rng: np.random.Generator, requires_grad: bool = True) -> ModelParams:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization.

    Args:
        spec: Layer spec
        rng: Seeded generator
        requires_grad: Track the parameters

    Returns:
        Freshly initialized parameters
    """
    tensors = OrderedDict()
    widths = spec.widths
    for layer, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:]), start=1):
        bound = 1.0 / np.sqrt(fan_in)
        for name, shape in ((f"fc{layer}.weight", (fan_out, fan_in)), (f"fc{layer}.bias", (fan_out,))):
            tensors[name] = Tensor(rng.uniform(-bound, bound, size=shape),
                                   requires_grad=requires_grad, name=name)
    return ModelParams(spec, tensors)


def zero_params(spec: LayerSpec, requires_grad: bool = True) -> ModelParams:
    return ModelParams(spec, OrderedDict(
        (name, Tensor(np.zeros(shape), requires_grad=requires_grad, name=name))
        for name, shape in spec.shapes().items()))


def forward(params: ModelParams, x) -> Tensor:
    """Logits for a batch.

    Args:
        params: Network parameters
        x: Batch of shape (n, input_dim), as a Tensor or array

    Returns:
        Logits of shape (n, num_classes)
    """
    spec = params.spec
    if not isinstance(x, Tensor):
        x = Tensor(x)
    if x.ndim != 2 or x.shape[1] != spec.input_dim:
        raise DimensionError(f"input of shape {x.shape} does not match input_dim {spec.input_dim}")
    layers = len(spec.widths) - 1
    h = x
    for layer in range(1, layers + 1):
        h = h @ params[f"fc{layer}.weight"].T + params[f"fc{layer}.bias"]
        if layer < layers:
            h = h.relu() if spec.activation == "relu" else h.tanh()
    return h


def predict(params: ModelParams, features: np.ndarray) -> np.ndarray:
    """Top-1 class index per row, evaluated without recording."""
    with no_grad():
        logits = forward(params, np.asarray(features, dtype=np.float64).reshape(len(features), -1))
    return np.argmax(logits.data, axis=1)


def accuracy(params: ModelParams, features: np.ndarray, labels: Sequence[int]) -> float:
    """Fraction of rows whose top-1 prediction equals the label."""
    labels = np.asarray(labels)
    if labels.size == 0:
        return 0.0
    return float(np.mean(predict(params, features) == labels))
