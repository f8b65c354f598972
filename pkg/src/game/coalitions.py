"""Meta-train/meta-test splits, coalition sampling and shared input tensors."""
import logging
import math
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..autodiff import Tensor
from ..data.sample import Sample, labels_of, stack_features
from ..utils.errors import ContractError

logger = logging.getLogger(__name__)


@dataclass
class MetaSplit:
    """One iteration's partition of the source domains.

    Attributes:
        train: Meta-train originals (P - V domains)
        test: Meta-test originals (V domains)
        train_aug: Augmented samples allowed into meta-train
        test_aug: Augmented samples sent to meta-test (random split only)
    """
    train: List[Sample]
    test: List[Sample]
    train_aug: List[Sample] = field(default_factory=list)
    test_aug: List[Sample] = field(default_factory=list)
    train_domains: Tuple[str, ...] = ()
    test_domains: Tuple[str, ...] = ()

    @property
    def pool(self) -> List[Sample]:
        """Samples coalitions are drawn from."""
        return self.train + self.train_aug

    @property
    def meta_test(self) -> List[Sample]:
        return self.test + self.test_aug

    def leaked(self) -> List[Sample]:
        """Meta-train augmented samples with a meta-test parent."""
        held = set(self.test_domains)
        return [s for s in self.train_aug if any(d in held for d in s.parent_domains)]


def meta_split(originals_by_domain: Mapping[str, Sequence[Sample]], augmented: Sequence[Sample],
               V: int, rng: np.random.Generator, random_aug: bool = False) -> MetaSplit:
    """Split source domains into meta-train and meta-test.

    Args:
        originals_by_domain: Original samples grouped by domain
        augmented: Augmented samples of this iteration
        V: Number of meta-test domains
        rng: Game random stream
        random_aug: Assign augmented samples to meta-train with probability
            (P - V) / P regardless of their parents

    Returns:
        MetaSplit
    """
    domains = sorted(d for d, samples in originals_by_domain.items() if samples)
    P = len(domains)
    if P < 2:
        raise ContractError(f"meta split needs at least 2 source domains, got {P}")
    if not 1 <= V < P:
        raise ContractError(f"V={V} must satisfy 1 <= V < P={P}")
    picked = rng.choice(P, size=V, replace=False)
    test_domains = tuple(sorted(domains[i] for i in picked))
    train_domains = tuple(d for d in domains if d not in test_domains)
    train = [s for d in train_domains for s in originals_by_domain[d]]
    test = [s for d in test_domains for s in originals_by_domain[d]]

    train_aug, test_aug = [], []
    if random_aug:
        for sample in augmented:
            (train_aug if rng.random() < (P - V) / P else test_aug).append(sample)
    else:
        allowed = set(train_domains)
        train_aug = [s for s in augmented if all(d in allowed for d in s.parent_domains)]
    return MetaSplit(train=train, test=test, train_aug=train_aug, test_aug=test_aug,
                     train_domains=train_domains, test_domains=test_domains)


@dataclass
class CoalitionQuad:
    """S, T, S∪T and S∩T as sample lists."""
    S: List[Sample]
    T: List[Sample]
    union: List[Sample]
    intersection: List[Sample]

    def __post_init__(self):
        s_ids = {x.id for x in self.S}
        t_ids = {x.id for x in self.T}
        if {x.id for x in self.union} != s_ids | t_ids:
            raise ContractError("union coalition is not S ∪ T")
        if {x.id for x in self.intersection} != s_ids & t_ids:
            raise ContractError("intersection coalition is not S ∩ T")
        if not self.intersection:
            raise ContractError("coalitions S and T must share at least one sample")

    def branches(self) -> "OrderedDict[str, List[Sample]]":
        return OrderedDict([("union", self.union), ("intersection", self.intersection),
                            ("S", self.S), ("T", self.T)])

    def participants(self) -> List[Sample]:
        """Every sample of the quad, once."""
        return list(self.union)


def fit_coalition_sizes(pool_size: int, batch_size: int,
                        requested: Optional[Tuple[int, int, int]] = None) -> Tuple[int, int, int]:
    """Coalition sizes (a, b, c) that fit a pool.

    Defaults to ceil(batch_size / 4) each. Wings shrink before the core and
    the core never drops below one sample.
    """
    if pool_size < 1:
        raise ContractError("coalition pool is empty")
    if requested is None:
        m = max(1, math.ceil(batch_size / 4))
        requested = (m, m, m)
    a, b, c = (int(v) for v in requested)
    b = max(1, b)
    while a + b + c > pool_size:
        if a >= c and a > 0:
            a -= 1
        elif c > 0:
            c -= 1
        else:
            b -= 1
    return a, b, c


def sample_coalitions(pool: Sequence[Sample], sizes: Tuple[int, int, int],
                      rng: np.random.Generator) -> CoalitionQuad:
    """Draw disjoint A, B, C and form S = A ∪ B, T = B ∪ C.

    Args:
        pool: Meta-train samples (originals and allowed augmented)
        sizes: (|A|, |B|, |C|); |B| >= 1
        rng: Game random stream

    Returns:
        CoalitionQuad with S ∩ T = B
    """
    a, b, c = sizes
    if min(a, b, c) < 0 or b < 1:
        raise ContractError(f"coalition sizes {sizes} need a, c >= 0 and b >= 1")
    if len(pool) < a + b + c:
        raise ContractError(f"pool of {len(pool)} cannot supply coalition sizes {sizes}")
    order = rng.permutation(len(pool))[:a + b + c]
    A = [pool[i] for i in order[:a]]
    B = [pool[i] for i in order[a:a + b]]
    C = [pool[i] for i in order[a + b:]]
    return CoalitionQuad(S=A + B, T=B + C, union=A + B + C, intersection=B)


class CoalitionInputs:
    """One input matrix shared by every coalition of an iteration.

    All coalitions read their rows out of the same leaf, so the gradient of
    the regularizer with respect to that leaf gives ∇x for every participant.
    """

    def __init__(self, samples: Sequence[Sample], track: bool = True):
        if not samples:
            raise ContractError("no samples to build inputs from")
        self.samples = list(samples)
        self.index: Dict[str, int] = {}
        for row, sample in enumerate(self.samples):
            if sample.id in self.index:
                raise ContractError(f"sample {sample.id} appears twice in the inputs")
            self.index[sample.id] = row
        self.matrix = Tensor(stack_features(self.samples), requires_grad=track, name="inputs")
        self.labels = labels_of(self.samples)

    @property
    def tracked(self) -> bool:
        return self.matrix.requires_grad

    def rows(self, coalition: Sequence[Sample]) -> np.ndarray:
        try:
            return np.array([self.index[s.id] for s in coalition], dtype=np.int64)
        except KeyError as exc:
            raise ContractError(f"sample {exc.args[0]} is not part of these inputs") from None

    def take(self, coalition: Sequence[Sample]) -> Tuple[Tensor, np.ndarray]:
        """Input rows and labels of a coalition (rows may repeat)."""
        if not coalition:
            raise ContractError("coalition is empty")
        rows = self.rows(coalition)
        return self.matrix.take_rows(rows), self.labels[rows]

    def all(self) -> Tuple[Tensor, np.ndarray]:
        return self.matrix, self.labels
