"""Central-difference validation of analytic gradients."""
import logging
from collections import OrderedDict
from typing import Callable, Dict, Mapping, Tuple, Union

import numpy as np

from ..utils.errors import ContractError, NumericError
from .backprop import backward
from .graph import no_grad
from .tensor import Tensor

logger = logging.getLogger(__name__)

Point = Union[Mapping[str, np.ndarray], np.ndarray]


def _evaluate(f: Callable, arrays: Dict[str, np.ndarray], single: bool,
              track: bool) -> Tuple[Tensor, Dict[str, Tensor]]:
    tensors = OrderedDict((name, Tensor(value, requires_grad=track, name=name))
                          for name, value in arrays.items())
    out = f(tensors["point"]) if single else f(tensors)
    if not isinstance(out, Tensor):
        out = Tensor(out)
    if out.size != 1:
        raise ContractError(f"function must return one element, got shape {out.shape}")
    return out, tensors


def finite_difference_check(f: Callable, point: Point, step: float = 1e-5) -> float:
    """Worst relative disagreement between backward() and central differences.

    Args:
        f: Scalar function. Receives a dict of tensors when ``point`` is a
            mapping, otherwise a single tensor
        point: Where to evaluate, as arrays
        step: Central-difference half-width

    Returns:
        max |a - n| / max(|a|, |n|, 1e-12) over every component
    """
    if step <= 0:
        raise ContractError(f"step must be positive, got {step}")
    single = not isinstance(point, Mapping)
    arrays = OrderedDict([("point", np.array(point, dtype=np.float64))]) if single else \
        OrderedDict((name, np.array(value, dtype=np.float64)) for name, value in point.items())

    value, tensors = _evaluate(f, arrays, single, track=True)
    if not np.isfinite(value.item()):
        raise NumericError("function is not finite at the check point")
    analytic = backward(value, tensors)

    worst = 0.0
    with no_grad():
        for name, base in arrays.items():
            flat = base.reshape(-1)
            for index in range(flat.size):
                shifted = {k: v.copy() for k, v in arrays.items()}
                shifted[name].reshape(-1)[index] = flat[index] + step
                upper = _evaluate(f, shifted, single, track=False)[0].item()
                shifted[name].reshape(-1)[index] = flat[index] - step
                lower = _evaluate(f, shifted, single, track=False)[0].item()
                if not (np.isfinite(upper) and np.isfinite(lower)):
                    raise NumericError(f"function is not finite near {name}[{index}]")
                numeric = (upper - lower) / (2.0 * step)
                exact = analytic[name].data.reshape(-1)[index]
                denominator = max(abs(exact), abs(numeric), 1e-12)
                worst = max(worst, abs(exact - numeric) / denominator)
    logger.debug(f"finite-difference check over {sum(a.size for a in arrays.values())} components: {worst:.3e}")
    return worst
