"""Reference measurement loop composed from the public operations."""

from __future__ import annotations

from typing import Optional, Sequence

from ..dynamics import MeasurementModel
from ..priors import NEW_LABEL, LinkContext, TransitionFn
from ..types import FilterState, FrameReport, LinkMode, Measurement, SingularInnovation


def run_measurement_loop(
    state: FilterState,
    measurements: Sequence[Measurement],
    meas_model: MeasurementModel,
    link_mode: LinkMode,
    transition: Optional[TransitionFn],
    report: FrameReport,
) -> None:
    from ..filter import apply_assignment, choose_best_label

    ctx = LinkContext(
        current_frame_measurements=measurements,
        processed_count=0,
        link_mode=link_mode,
        assigned=state.last_assignments,
    )
    for i, y in enumerate(measurements):
        try:
            label, posterior = choose_best_label(y, state, ctx, transition=transition)
            apply_assignment(state, y, label, meas_model, meas_index=i)
        except (SingularInnovation, ValueError) as exc:
            report.errors.append((i, str(exc)))
            continue
        cid = state.last_assignments[i]
        ctx.processed_count += 1
        report.assignments.append((i, cid, posterior))
        if label == NEW_LABEL:
            report.born.append(cid)
