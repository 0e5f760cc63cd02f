"""Dataset ingestion: a directory of PPM/PGM frames plus labels.csv.

labels.csv has the header `frame_id,angle_deg`; each row's image lives at
`<frame_id>.ppm` or `<frame_id>.pgm` in the same directory. Angles are in
degrees with the +/- 25 degree hardware limit and are scaled by 1/25 into
[-1, 1]; positive values mean steering left.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, IngestError, LabelRangeError
from .image_io import read_image

MAX_ANGLE_DEG = 25.0


@dataclass(frozen=True)
class Frame:
    frame_id: str
    path: Path
    label: float  # scaled to [-1, 1]

    def load(self) -> np.ndarray:
        return read_image(self.path)


@dataclass(frozen=True)
class Dataset:
    root: Path
    frames: tuple[Frame, ...]

    def __len__(self) -> int:
        return len(self.frames)

    def labels(self) -> list[float]:
        return [f.label for f in self.frames]

    def ids(self) -> list[str]:
        return [f.frame_id for f in self.frames]


def ingest(dataset_dir) -> Dataset:
    """Read and validate a dataset directory; rows come back sorted by id."""
    root = Path(dataset_dir)
    labels_path = root / "labels.csv"
    if not labels_path.is_file():
        raise IngestError(f"missing labels.csv in {root}")
    frames = []
    with open(labels_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["frame_id", "angle_deg"]:
            raise IngestError(f"labels.csv header must be frame_id,angle_deg, got {header}")
        for row in reader:
            if len(row) != 2:
                raise IngestError(f"malformed labels.csv row: {row}")
            frame_id, angle_text = row
            try:
                angle = float(angle_text)
            except ValueError as exc:
                raise IngestError(f"bad angle for {frame_id}: {angle_text!r}") from exc
            if abs(angle) > MAX_ANGLE_DEG:
                raise LabelRangeError(
                    f"{frame_id}: angle {angle} exceeds +/- {MAX_ANGLE_DEG} degrees")
            path = None
            for ext in (".ppm", ".pgm"):
                cand = root / f"{frame_id}{ext}"
                if cand.is_file():
                    path = cand
                    break
            if path is None:
                raise IngestError(f"missing image for frame {frame_id}")
            try:
                read_image(path)
            except FormatError as exc:
                raise IngestError(f"{frame_id}: unreadable image: {exc}") from exc
            frames.append(Frame(frame_id, path, angle / MAX_ANGLE_DEG))
    frames.sort(key=lambda f: f.frame_id)
    return Dataset(root, tuple(frames))
