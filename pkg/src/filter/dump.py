"""Write the most and least discarded samples as images plus an index."""
import json
import logging
from pathlib import Path
from typing import Dict, List, Mapping, Union

import numpy as np
from PIL import Image

from ..augment.mixing import mix_amplitude
from ..data.sample import Sample
from ..utils.errors import ContractError
from .scores import ScoreBoard

logger = logging.getLogger(__name__)


def to_image(features: np.ndarray) -> Image.Image:
    """(C, H, W) floats in [0, 1] -> RGB (C=3) or grayscale (C=1) image."""
    pixels = np.round(np.clip(features, 0.0, 1.0) * 255.0).astype(np.uint8)
    if pixels.shape[0] == 3:
        return Image.fromarray(np.ascontiguousarray(pixels.transpose(1, 2, 0)))
    if pixels.shape[0] == 1:
        return Image.fromarray(np.ascontiguousarray(pixels[0]))
    raise ContractError(f"cannot render {pixels.shape[0]} channels")


def regenerate(sample_id: str, board: ScoreBoard, originals: Mapping[str, Sample]) -> np.ndarray:
    """Features of a scored sample; augmented ones are rebuilt from provenance."""
    if sample_id in originals:
        return originals[sample_id].features
    provenance = board.provenance.get(sample_id)
    if provenance is None:
        raise ContractError(f"sample {sample_id} is neither an original nor has provenance")
    parent_i, parent_j = (regenerate(p, board, originals) for p in provenance.parent_ids)
    return mix_amplitude(parent_i, parent_j, provenance.lam)


def dump_filtered(board: ScoreBoard, originals: Mapping[str, Sample], out_dir: Union[str, Path],
                  count: int = 8) -> List[Dict]:
    """Save the ``count`` most and least discarded samples.

    Args:
        board: Scoreboard of a finished run
        originals: Original samples by id
        out_dir: Destination directory
        count: Images per group

    Returns:
        Index entries, also written to index.json
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    scored = sorted(board.participation)
    most = sorted(scored, key=lambda i: (-board.top_counts.get(i, 0), i))[:count]
    least = sorted(scored, key=lambda i: (-board.bottom_counts.get(i, 0), i))[:count]
    index = []
    for group, ids, counts in (("top", most, board.top_counts), ("bottom", least, board.bottom_counts)):
        for rank, sample_id in enumerate(ids):
            image = to_image(regenerate(sample_id, board, originals))
            suffix = "ppm" if image.mode == "RGB" else "pgm"
            name = f"{group}_{rank:02d}_{sample_id}.{suffix}"
            image.save(out_dir / name)
            index.append({"group": group, "rank": rank, "id": sample_id, "file": name,
                          "domain": board.domains.get(sample_id), "origin": board.origins.get(sample_id),
                          "count": counts.get(sample_id, 0)})
    with open(out_dir / "index.json", "w", encoding="utf-8") as f:
        json.dump(index, f, indent=2, sort_keys=True)
    logger.info(f"Dumped {len(index)} samples to {out_dir}")
    return index
