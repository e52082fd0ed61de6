"""Nearest-to-truth evaluation: position RMSE and id-switch counting.

Per frame the estimate nearest (Euclidean) to the designated ground-truth
object is selected, with no distance cap.  Frames with truth but no
estimate at all are excluded from both metrics and counted as misses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence


@dataclass(frozen=True)
class EvalResult:
    rmse: float
    id_switches: int
    per_frame: tuple[tuple[int, int, float], ...]
    misses: int
    mean_frame_time: float
    mean_object_count: float


def evaluate(
    truth_by_frame: Mapping[int, Sequence[tuple]],
    estimates_by_frame: Mapping[int, Sequence[tuple[int, float, float]]],
    ground_truth_id: int,
    *,
    mean_frame_time: float = 0.0,
    mean_object_count: Optional[float] = None,
    max_distance: Optional[float] = None,
) -> EvalResult:
    """Score an estimate stream against one designated truth object.

    ``truth_by_frame`` rows are (id, x, y, ...); estimate rows (id, x, y).
    ``max_distance`` optionally caps the match distance (off by default);
    frames whose nearest estimate is beyond it count as misses.
    Raises ValueError("no overlap...") when no frame can be matched.
    """
    gt_frames = []
    for f in sorted(truth_by_frame):
        for row in truth_by_frame[f]:
            if int(row[0]) == ground_truth_id:
                gt_frames.append((f, float(row[1]), float(row[2])))
                break
    if not gt_frames:
        raise ValueError(f"no overlap: ground-truth id {ground_truth_id} never appears")

    per_frame: list[tuple[int, int, float]] = []
    misses = 0
    for f, tx, ty in gt_frames:
        ests = estimates_by_frame.get(f, ())
        if not ests:
            misses += 1
            continue
        best = min(ests, key=lambda e: (math.hypot(e[1] - tx, e[2] - ty), e[0]))
        err = math.hypot(best[1] - tx, best[2] - ty)
        if max_distance is not None and err > max_distance:
            misses += 1
            continue
        per_frame.append((f, int(best[0]), err))
    if not per_frame:
        raise ValueError("no overlap: no frame has both the truth object and an estimate")

    rmse = math.sqrt(sum(e * e for _, _, e in per_frame) / len(per_frame))
    id_switches = sum(
        1 for (_, a, _), (_, b, _) in zip(per_frame, per_frame[1:]) if a != b
    )

    if mean_object_count is None:
        n_frames = max(len(estimates_by_frame), 1)
        mean_object_count = sum(len(v) for v in estimates_by_frame.values()) / n_frames

    return EvalResult(
        rmse=rmse,
        id_switches=id_switches,
        per_frame=tuple(per_frame),
        misses=misses,
        mean_frame_time=mean_frame_time,
        mean_object_count=float(mean_object_count),
    )
