"""Training configuration and the ablation variants."""
import json
import logging
from dataclasses import asdict, dataclass, fields, replace
from enum import Enum
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

from ..utils.errors import ConfigError

logger = logging.getLogger(__name__)


class Variant(Enum):
    """Which parts of the method are switched on."""
    BASELINE = "baseline"
    AUG_ONLY = "aug-only"
    AUG_LSM = "aug+Lsm"
    AUG_LMAML = "aug+Lmaml"
    AUG_FSM = "aug+Fsm"
    AUG_FMAML = "aug+Fmaml"
    AUG_LMAML_FMAML = "aug+Lmaml+Fmaml"
    FULL_DCG = "full-DCG"
    RANDOM_META_SPLIT = "random-meta-split"
    FILTER_ONLY_AUG = "filter-only-aug"
    FILTER_ONLY_ORI = "filter-only-ori"

    @property
    def augment(self) -> bool:
        return self is not Variant.BASELINE

    @property
    def regularizer(self) -> Optional[str]:
        """'sm', 'maml' or None: the term added to the supervision loss."""
        if self in (Variant.AUG_LSM, Variant.FULL_DCG, Variant.RANDOM_META_SPLIT,
                    Variant.FILTER_ONLY_AUG, Variant.FILTER_ONLY_ORI):
            return "sm"
        if self in (Variant.AUG_LMAML, Variant.AUG_LMAML_FMAML):
            return "maml"
        return None

    @property
    def filter_source(self) -> Optional[str]:
        """'sm', 'maml' or None: the value whose input gradient scores samples."""
        if self in (Variant.AUG_FSM, Variant.FULL_DCG, Variant.RANDOM_META_SPLIT,
                    Variant.FILTER_ONLY_AUG, Variant.FILTER_ONLY_ORI):
            return "sm"
        if self in (Variant.AUG_FMAML, Variant.AUG_LMAML_FMAML):
            return "maml"
        return None

    @property
    def filter_scope(self) -> str:
        if self is Variant.FILTER_ONLY_AUG:
            return "augmented"
        if self is Variant.FILTER_ONLY_ORI:
            return "original"
        return "all"

    @property
    def random_split(self) -> bool:
        return self is Variant.RANDOM_META_SPLIT


ABLATION_VARIANTS = (Variant.BASELINE, Variant.AUG_ONLY, Variant.AUG_LSM, Variant.AUG_LMAML,
                     Variant.AUG_FSM, Variant.AUG_FMAML, Variant.AUG_LMAML_FMAML, Variant.FULL_DCG)
DISCUSSION_VARIANTS = (Variant.FULL_DCG, Variant.RANDOM_META_SPLIT,
                       Variant.FILTER_ONLY_AUG, Variant.FILTER_ONLY_ORI)


@dataclass
class TrainConfig:
    """Configuration for a training run.

    The config file is flat JSON with these field names.
    """
    epochs: int = 50
    batch_size: int = 16
    lr: float = 0.001
    momentum: float = 0.9
    weight_decay: float = 5e-4
    lr_decay: float = 0.1
    decay_at: float = 0.8
    omega: float = 0.1
    k: int = 5
    eta: float = 1.0
    V: int = 1
    coalition_sizes: Optional[Tuple[int, int, int]] = None
    second_order: bool = True
    seeds: Tuple[int, ...] = (0, 1, 2)
    variant: Variant = Variant.FULL_DCG
    augmented_cap: Optional[int] = None
    hidden: Tuple[int, ...] = (128, 64)
    activation: str = "relu"

    def __post_init__(self):
        if isinstance(self.variant, str):
            try:
                self.variant = Variant(self.variant)
            except ValueError:
                raise ConfigError(f"unknown variant {self.variant!r}; "
                                  f"choose from {[v.value for v in Variant]}") from None
        self.seeds = tuple(int(s) for s in self.seeds)
        self.hidden = tuple(int(h) for h in self.hidden)
        if self.coalition_sizes is not None:
            self.coalition_sizes = tuple(int(s) for s in self.coalition_sizes)

    def validate(self) -> None:
        """Reject out-of-range values and settings the variant cannot use."""
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 2:
            raise ConfigError(f"batch_size must be >= 2, got {self.batch_size}")
        if self.lr <= 0:
            raise ConfigError(f"lr must be positive, got {self.lr}")
        if not 0.0 <= self.momentum < 1.0:
            raise ConfigError(f"momentum must lie in [0, 1), got {self.momentum}")
        if self.weight_decay < 0:
            raise ConfigError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if not 0.0 < self.lr_decay <= 1.0 or not 0.0 <= self.decay_at <= 1.0:
            raise ConfigError(f"lr decay {self.lr_decay} at {self.decay_at} out of range")
        if self.omega < 0:
            raise ConfigError(f"omega must be >= 0, got {self.omega}")
        if not 0 <= self.k < self.batch_size:
            raise ConfigError(f"k={self.k} must satisfy 0 <= k < batch_size={self.batch_size}")
        if not 0.0 <= self.eta <= 1.0:
            raise ConfigError(f"eta must lie in [0, 1], got {self.eta}")
        if self.V < 1:
            raise ConfigError(f"V must be >= 1, got {self.V}")
        if self.coalition_sizes is not None:
            if len(self.coalition_sizes) != 3 or min(self.coalition_sizes) < 0 or self.coalition_sizes[1] < 1:
                raise ConfigError(f"coalition_sizes {self.coalition_sizes} must be (a, b, c) with b >= 1")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if self.augmented_cap is not None and self.augmented_cap < 0:
            raise ConfigError(f"augmented_cap must be >= 0, got {self.augmented_cap}")
        if self.augmented_cap is not None and not self.variant.augment:
            raise ConfigError(f"variant {self.variant.value} does not augment; augmented_cap must be unset")
        if self.variant.regularizer is None and self.omega > 0:
            raise ConfigError(f"variant {self.variant.value} has no regularizer; omega must be 0, got {self.omega}")
        if self.variant.filter_source is None and self.k > 0:
            raise ConfigError(f"variant {self.variant.value} has no filter; k must be 0, got {self.k}")
        if self.activation not in ("relu", "tanh"):
            raise ConfigError(f"activation must be relu or tanh, got {self.activation}")

    @property
    def plays_game(self) -> bool:
        """Whether any enabled component needs the coalition game."""
        uses_regularizer = self.variant.regularizer is not None and self.omega > 0
        uses_filter = self.variant.filter_source is not None and self.k > 0
        return uses_regularizer or uses_filter

    def for_variant(self, variant: Union[Variant, str], **overrides) -> "TrainConfig":
        """Copy for another variant; ω and k are zeroed where the variant lacks the part."""
        variant = Variant(variant) if isinstance(variant, str) else variant
        omega = self.omega if variant.regularizer is not None else 0.0
        k = self.k if variant.filter_source is not None else 0
        cap = self.augmented_cap if variant.augment else None
        changes = {"variant": variant, "omega": omega, "k": k, "augmented_cap": cap}
        changes.update(overrides)
        return replace(self, **changes)

    def to_dict(self) -> Dict:
        data = asdict(self)
        data["variant"] = self.variant.value
        for key in ("seeds", "hidden", "coalition_sizes"):
            if data[key] is not None:
                data[key] = list(data[key])
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(f"invalid config: {exc}") from None

    @classmethod
    def from_json(cls, path: Union[str, Path]) -> "TrainConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_dict(data)
