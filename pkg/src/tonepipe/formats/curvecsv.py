"""CSV export of sampled tone curves, for external plotting."""

from __future__ import annotations

import numpy as np

from ..errors import ValidationError


def format_curve_csv(samples) -> str:
    """Render (x, y) pairs as 'x,y' lines, 9 significant digits, LF ends."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.size == 0:
        raise ValidationError("no curve samples to write")
    if samples.ndim != 2 or samples.shape[1] != 2:
        raise ValidationError(f"expected (n, 2) samples, got shape {samples.shape}")
    lines = ["x,y"]
    for x, y in samples:
        lines.append(f"{x:.9g},{y:.9g}")
    return "\n".join(lines) + "\n"


def write_curve_csv(samples, path: str) -> None:
    text = format_curve_csv(samples)
    with open(path, "w", newline="") as f:
        f.write(text)
