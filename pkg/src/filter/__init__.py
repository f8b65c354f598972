"""Input x Gradient sample filter."""
from .scores import ScoreBoard, score_samples, select_discard, select_keep
from .supervision import filtered_supervision
from .dump import dump_filtered, regenerate, to_image

__all__ = [
    'ScoreBoard',
    'score_samples',
    'select_discard',
    'select_keep',
    'filtered_supervision',
    'dump_filtered',
    'regenerate',
    'to_image',
]
