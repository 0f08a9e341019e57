"""Plain-file run artifacts: binary PGM images plus CSV and key=value text."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Mapping

import numpy as np

from .optimize import RunHistory

HISTORY_COLUMNS = ("iteration", "phi", "forward_solves", "adjoint_solves", "beta", "seconds")


def _num(v) -> str:
    return format(float(v), ".17g")


def write_pgm(path: Path, image: np.ndarray) -> None:
    """Write an 8-bit binary (P5) PGM; ``image`` is ``(height, width)`` in [0, 255]."""
    img = np.clip(np.rint(np.asarray(image, dtype=float)), 0, 255).astype(np.uint8)
    h, w = img.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(np.ascontiguousarray(img).tobytes())


def read_pgm(path: Path) -> np.ndarray:
    data = Path(path).read_bytes()
    magic, w, h, maxval, rest = data.split(maxsplit=4)
    if magic != b"P5" or int(maxval) != 255:
        raise ValueError(f"{path}: not an 8-bit binary PGM")
    return np.frombuffer(rest, dtype=np.uint8, count=int(w) * int(h)).reshape(int(h), int(w))


def design_image(projected: np.ndarray) -> np.ndarray:
    """Solid renders black: ``255 * (1 - x)``."""
    return 255.0 * (1.0 - projected)


def field_image(intensity: np.ndarray) -> np.ndarray:
    peak = intensity.max()
    return 255.0 * intensity / peak if peak > 0 else np.zeros_like(intensity)


def write_matrix_csv(path: Path, values: np.ndarray) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        for row in values:
            w.writerow(_num(v) for v in row)


def write_history_csv(path: Path, history: RunHistory, wall_time: bool = False) -> None:
    """One row per history record; ``seconds`` is blank unless ``wall_time``."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(HISTORY_COLUMNS)
        for r in history.records:
            w.writerow(
                [r.iteration, _num(r.phi), r.forward_solves, r.adjoint_solves, _num(r.beta), _num(r.seconds) if wall_time else ""]
            )


def read_history_csv(path: Path) -> list:
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def write_summary(path: Path, items: Mapping[str, object]) -> None:
    lines = []
    for key, value in items.items():
        if isinstance(value, float):
            value = _num(value)
        elif isinstance(value, (list, tuple)):
            value = ",".join(str(v) for v in value)
        lines.append(f"{key}={value}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_summary(path: Path) -> dict:
    out = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out

