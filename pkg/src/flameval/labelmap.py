"""Dense class-index label maps and their bit-exact file I/O.

A label map is a 2D grid of class indices stored as unsigned bytes:
values in [0, K) are classes, 255 is the reserved ignore label that marks
ground-truth pixels excluded from evaluation.  Two on-disk formats are
supported:

* binary PGM ("P5"), header ``P5\\n<width> <height>\\n255\\n`` followed by
  width*height payload bytes, row-major.  This is the canonical format:
  it is uncompressed, so round-trips are trivially byte-exact.
* 8-bit single-channel grayscale PNG (no palette), accepted for
  interoperability with existing segmentation datasets.

Maps are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

IGNORE_VALUE = 255

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


class LabelMapError(ValueError):
    """Malformed label-map file or invalid label-map contents."""


@dataclass(frozen=True)
class ClassSet:
    """Number of classes K plus the reserved ignore value.

    Valid class indices are 0..K-1; the ignore value must lie outside that
    range.  K is capped at 255 so every label fits in one byte alongside
    the ignore value.
    """

    num_classes: int
    ignore_value: int = IGNORE_VALUE

    def __post_init__(self):
        if not 1 <= self.num_classes <= 255:
            raise ValueError(f"num_classes must be in [1, 255], got {self.num_classes}")
        if 0 <= self.ignore_value < self.num_classes or not 0 <= self.ignore_value <= 255:
            raise ValueError(
                f"ignore_value {self.ignore_value} collides with class range "
                f"[0, {self.num_classes})"
            )


class LabelMap:
    """Immutable 2D grid of uint8 class indices, shape (height, width)."""

    __slots__ = ("values",)

    def __init__(self, values) -> None:
        arr = np.asarray(values)
        if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
            raise LabelMapError(f"degenerate dimensions: expected non-empty 2D grid, got shape {arr.shape}")
        if arr.dtype != np.uint8:
            if arr.size and (arr.min() < 0 or arr.max() > 255):
                raise LabelMapError("label values must fit in [0, 255]")
            arr = arr.astype(np.uint8)
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __setattr__(self, name, value):
        raise AttributeError("LabelMap is immutable")

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def __eq__(self, other) -> bool:
        if not isinstance(other, LabelMap):
            return NotImplemented
        return self.values.shape == other.values.shape and bool(
            np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"LabelMap({self.width}x{self.height})"


def validate_labels(labelmap: LabelMap, classes: ClassSet) -> None:
    """Raise LabelMapError if any value is outside [0, K) and not the ignore value.

    The first offending pixel is reported with its (x, y) coordinate.
    """
    values = labelmap.values
    bad = (values >= classes.num_classes) & (values != classes.ignore_value)
    if bad.any():
        y, x = np.argwhere(bad)[0]
        raise LabelMapError(
            f"class index {values[y, x]} out of range at ({x}, {y}): "
            f"expected [0, {classes.num_classes}) or {classes.ignore_value}"
        )


def _decode_pgm(data: bytes) -> np.ndarray:
    # Header tokens may be separated by any whitespace; '#' starts a
    # comment running to end of line.  Exactly one whitespace byte
    # separates the maxval token from the pixel payload.
    if data[:2] != b"P5":
        raise LabelMapError("malformed header: missing P5 magic")
    pos = 2
    tokens: list[int] = []
    while len(tokens) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        token = data[start:pos]
        if not token.isdigit():
            raise LabelMapError(f"malformed header: expected integer token, got {token!r}")
        tokens.append(int(token))
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise LabelMapError("malformed header: missing whitespace after maxval")
    pos += 1

    width, height, maxval = tokens
    if width <= 0 or height <= 0:
        raise LabelMapError(f"malformed header: degenerate dimensions {width}x{height}")
    if maxval != 255:
        raise LabelMapError(f"unsupported bit depth: maxval {maxval}, expected 255")

    payload = data[pos:]
    expected = width * height
    if len(payload) < expected:
        raise LabelMapError(f"truncated pixel data: expected {expected} bytes, got {len(payload)}")
    if len(payload) > expected:
        raise LabelMapError(f"trailing data after pixel payload: {len(payload) - expected} extra bytes")
    return np.frombuffer(payload, dtype=np.uint8).reshape(height, width)


def _decode_png(data: bytes) -> np.ndarray:
    with Image.open(io.BytesIO(data)) as img:
        if img.mode == "P":
            raise LabelMapError("unsupported PNG: palette-indexed, expected 8-bit grayscale")
        if img.mode != "L":
            raise LabelMapError(
                f"unsupported bit depth: PNG mode {img.mode!r}, expected 8-bit grayscale (L)"
            )
        return np.asarray(img, dtype=np.uint8)


def read_labelmap(path, classes: ClassSet) -> LabelMap:
    """Read a label map from a P5 PGM or 8-bit grayscale PNG file.

    Every pixel must be a valid class index for `classes` or the ignore
    value; anything else is rejected with the offending coordinate.
    """
    data = Path(path).read_bytes()
    if data[:2] == b"P5":
        arr = _decode_pgm(data)
    elif data[: len(_PNG_MAGIC)] == _PNG_MAGIC:
        arr = _decode_png(data)
    else:
        raise LabelMapError("malformed header: not a P5 PGM or PNG file")
    labelmap = LabelMap(arr)
    validate_labels(labelmap, classes)
    return labelmap


def write_labelmap(labelmap: LabelMap, path) -> None:
    """Write a label map, choosing the format from the file suffix.

    ``.png`` writes 8-bit grayscale PNG; everything else writes the
    canonical binary PGM.  Reading the file back yields an equal map.
    """
    path = Path(path)
    if path.suffix.lower() == ".png":
        Image.fromarray(labelmap.values, mode="L").save(path, format="PNG")
    else:
        header = f"P5\n{labelmap.width} {labelmap.height}\n255\n".encode("ascii")
        path.write_bytes(header + labelmap.values.tobytes())
