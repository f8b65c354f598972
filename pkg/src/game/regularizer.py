"""Virtual updates on four coalitions and the supermodularity regularizer."""
import logging
from collections import OrderedDict
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Tuple, Union

from ..autodiff import Tensor, grad
from ..data.sample import Sample
from ..utils.errors import ContractError
from .coalitions import CoalitionInputs, CoalitionQuad
from .models import GameModel

logger = logging.getLogger(__name__)

Params = Mapping[str, Tensor]


@dataclass
class GameConfig:
    """Settings of one game evaluation.

    Attributes:
        alpha: Virtual step size (tied to the current learning rate in training)
        V: Number of meta-test domains
        sizes: Coalition sizes (a, b, c); None picks ceil(batch/4) each
        second_order: Differentiate through the virtual step's gradient
    """
    alpha: float = 0.001
    V: int = 1
    sizes: Optional[Tuple[int, int, int]] = None
    second_order: bool = True

    def validate(self, num_domains: Optional[int] = None) -> None:
        if self.alpha <= 0:
            raise ContractError(f"alpha must be positive, got {self.alpha}")
        if self.V < 1:
            raise ContractError(f"V must be >= 1, got {self.V}")
        if num_domains is not None and self.V >= num_domains:
            raise ContractError(f"V={self.V} must be smaller than the number of source domains ({num_domains})")


@dataclass
class GameOutcome:
    """The four meta-test losses and what is built from them."""
    branches: "OrderedDict[str, Tensor]"
    raw_gap: Tensor
    sm: Tensor
    maml: Tensor

    @property
    def clamped(self) -> bool:
        return self.raw_gap.item() <= 0.0


def _inputs_for(samples: Union[CoalitionInputs, Sequence[Sample]]) -> CoalitionInputs:
    if isinstance(samples, CoalitionInputs):
        return samples
    return CoalitionInputs(samples, track=False)


def coalition_loss(model: GameModel, params: Params, inputs: CoalitionInputs,
                   coalition: Sequence[Sample]) -> Tensor:
    """F(O): sum of per-sample losses over the coalition."""
    if not coalition:
        raise ContractError("coalition is empty")
    x, y = inputs.take(coalition)
    return model.sample_losses(params, x, y).sum()


def virtual_update(model: GameModel, params: Params, inputs: CoalitionInputs,
                   coalition: Sequence[Sample], alpha: float,
                   second_order: bool = True) -> "OrderedDict[str, Tensor]":
    """θ' = θ - α∇θ F(O), starting from the given θ.

    In second-order mode the gradient stays attached to θ, so losses at θ'
    reach θ through it. In first-order mode the gradient is taken at
    detached copies of θ; it still depends on the inputs when they are
    tracked, so input attributions keep working.
    """
    if alpha <= 0:
        raise ContractError(f"alpha must be positive, got {alpha}")
    names = list(params.keys())
    if second_order:
        anchors = params
    else:
        anchors = OrderedDict((n, Tensor(params[n].data, requires_grad=True, name=n)) for n in names)
    loss = coalition_loss(model, anchors, inputs, coalition)
    create = second_order or inputs.tracked
    gradients = grad(loss, [anchors[n] for n in names], create_graph=create)
    return OrderedDict((n, params[n] - g.scale(alpha)) for n, g in zip(names, gradients))


def meta_test_loss(model: GameModel, virtual_params: Params,
                   meta_test: Union[CoalitionInputs, Sequence[Sample]]) -> Tensor:
    """G(θ'): mean loss over the meta-test samples."""
    if not isinstance(meta_test, CoalitionInputs) and not meta_test:
        raise ContractError("meta-test set is empty")
    x, y = _inputs_for(meta_test).all()
    return model.test_loss(virtual_params, x, y)


def play(model: GameModel, params: Params, quad: CoalitionQuad,
         meta_test: Union[CoalitionInputs, Sequence[Sample]], config: GameConfig,
         inputs: Optional[CoalitionInputs] = None) -> GameOutcome:
    """Evaluate all four coalitions once from the same θ.

    Args:
        model: Game model
        params: θ
        quad: Coalitions
        meta_test: Meta-test samples (or prepared untracked inputs)
        config: Game settings
        inputs: Shared coalition inputs; built untracked when omitted

    Returns:
        GameOutcome with raw gap U + I - S - T, its clamp and the MAML sum
    """
    inputs = inputs if inputs is not None else CoalitionInputs(quad.participants(), track=False)
    test_inputs = _inputs_for(meta_test)
    branches = OrderedDict()
    for name, coalition in quad.branches().items():
        theta = virtual_update(model, params, inputs, coalition, config.alpha, config.second_order)
        branches[name] = meta_test_loss(model, theta, test_inputs)
    raw = branches["union"] + branches["intersection"] - branches["S"] - branches["T"]
    total = branches["union"] + branches["intersection"] + branches["S"] + branches["T"]
    outcome = GameOutcome(branches=branches, raw_gap=raw, sm=raw.relu(), maml=total)
    logger.debug(f"game: gap={raw.item():.3e} clamped={outcome.clamped}")
    return outcome


def supermodularity_loss(model: GameModel, params: Params, quad: CoalitionQuad,
                         meta_test, config: GameConfig,
                         inputs: Optional[CoalitionInputs] = None) -> Tensor:
    """L_sm = max(0, G(U) + G(I) - G(S) - G(T))."""
    return play(model, params, quad, meta_test, config, inputs).sm


def maml_regularizer(model: GameModel, params: Params, quad: CoalitionQuad,
                     meta_test, config: GameConfig,
                     inputs: Optional[CoalitionInputs] = None) -> Tensor:
    """L_maml = G(U) + G(I) + G(S) + G(T)."""
    return play(model, params, quad, meta_test, config, inputs).maml
