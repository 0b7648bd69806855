"""Stage-named diagnostics shared across the pipeline."""

from __future__ import annotations


class StageError(ValueError):
    """A pipeline stage rejected its input; `stage` names the culprit."""

    def __init__(self, stage: str, message: str):
        self.stage = stage
        super().__init__(f"[{stage}] {message}")
