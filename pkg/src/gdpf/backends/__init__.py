"""Measurement-loop backends.

A compiled kernel handles the hot sequential assignment loop for the
default planar model; a pure-Python loop composed from the public scoring
and update operations is the reference and the fallback.  The default is
picked at import time and can be forced with GDPF_BACKEND=python.
"""

from __future__ import annotations

import os
from typing import Optional

try:
    from . import _loop  # noqa: F401

    COMPILED_AVAILABLE = True
except ImportError:
    COMPILED_AVAILABLE = False

_FORCED = os.environ.get("GDPF_BACKEND", "").strip().lower()
_DEFAULT = "fast" if COMPILED_AVAILABLE and _FORCED != "python" else "python"


def default_backend() -> str:
    return _DEFAULT


def available_backends() -> tuple[str, ...]:
    return ("fast", "python") if COMPILED_AVAILABLE else ("python",)


def resolve(name: Optional[str], state, measurements, meas_model, link_mode, transition):
    """Pick the loop callable for one frame.

    "fast" silently degrades to the reference loop when the frame does not
    fit the compiled kernel's model assumptions (custom transition hook,
    non-default observation, mixed measurement kinds).
    """
    from . import reference

    chosen = name if name is not None else _DEFAULT
    if chosen == "python":
        return reference.run_measurement_loop
    if chosen == "fast":
        if not COMPILED_AVAILABLE:
            raise ValueError("backend 'fast' requested but the compiled kernel is not built")
        from . import fast

        if fast.supported(state, measurements, meas_model, link_mode, transition):
            return fast.run_measurement_loop
        return reference.run_measurement_loop
    raise ValueError(f"unknown backend {chosen!r} (expected 'fast' or 'python')")
