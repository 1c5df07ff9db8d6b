"""Latency-to-frame-offset mapping.

Processing a frame takes real time; by the time a prediction is ready the
scene has advanced.  The offset k = ceil(latency / interval) counts how
many frames elapsed during processing, i.e. the ground truth a prediction
should be compared against in latency-aware (flame) mode is the frame
appearing next once processing finishes.  Latencies are supplied by the
caller (measured on their own hardware); this module never times anything.
"""

from __future__ import annotations

import csv
import math
from bisect import bisect_left
from dataclasses import dataclass
from pathlib import Path

CONSTANT = "constant"
PER_PREDICTION = "per_prediction"

TRACE_HEADER = ("frame_index", "latency_ms")


@dataclass(frozen=True)
class FrameTiming:
    """Uniform frame interval in ms, or explicit per-frame timestamps.

    With explicit timestamps, entry i is the capture time of frame i and
    the list must be strictly increasing.  Without them, frame i is taken
    to occur at i * interval_ms.
    """

    interval_ms: float
    timestamps_ms: tuple[float, ...] | None = None

    def __post_init__(self):
        if not self.interval_ms > 0:
            raise ValueError(f"interval_ms must be positive, got {self.interval_ms}")
        if self.timestamps_ms is not None:
            ts = tuple(float(t) for t in self.timestamps_ms)
            if any(b <= a for a, b in zip(ts, ts[1:])):
                raise ValueError("explicit timestamps must be strictly increasing")
            object.__setattr__(self, "timestamps_ms", ts)

    def timestamp_ms(self, index: int) -> float:
        if self.timestamps_ms is not None:
            return self.timestamps_ms[index]
        return index * self.interval_ms

    @property
    def fps(self) -> float:
        return 1000.0 / self.interval_ms


def frame_offset(latency_ms: float, interval_ms: float) -> int:
    """Smallest integer k with k * interval_ms >= latency_ms (the ceiling).

    Zero latency maps to offset 0: the prediction is compared against its
    own input frame.  A latency that is an exact multiple of the interval
    maps to that multiple; the frame arriving exactly when processing
    finishes counts as "appearing next".
    """
    if interval_ms <= 0:
        raise ValueError(f"interval_ms must be positive, got {interval_ms}")
    if latency_ms < 0:
        raise ValueError(f"latency_ms must be non-negative, got {latency_ms}")
    if latency_ms == 0:
        return 0
    k = math.ceil(latency_ms / interval_ms)
    # The float quotient can land on the wrong side of an integer; nudge k
    # until it is the smallest value satisfying the defining inequality.
    while k > 1 and (k - 1) * interval_ms >= latency_ms:
        k -= 1
    while k * interval_ms < latency_ms:
        k += 1
    return k


def resolve_target_frame(
    input_index: int,
    latency_ms: float,
    timing: FrameTiming,
    sequence_length: int,
) -> int | None:
    """Index of the frame the prediction should be compared against.

    Uniform timing: input_index + frame_offset(latency, interval).
    Explicit timestamps: the smallest index whose timestamp is at or after
    input timestamp + latency.  Returns None when no such frame exists in
    the sequence (a normal, reportable outcome, not an error).
    """
    if not 0 <= input_index < sequence_length:
        raise ValueError(f"input_index {input_index} outside sequence of length {sequence_length}")
    if latency_ms < 0:
        raise ValueError(f"latency_ms must be non-negative, got {latency_ms}")
    if timing.timestamps_ms is not None:
        deadline = timing.timestamps_ms[input_index] + latency_ms
        target = bisect_left(timing.timestamps_ms, deadline)
    else:
        target = input_index + frame_offset(latency_ms, timing.interval_ms)
    return target if target < sequence_length else None


@dataclass(frozen=True)
class LatencyModel:
    """Constant latency, or one measured latency per input frame.

    Per-prediction latencies yield per-prediction offsets; latencies are
    never averaged before the offset computation (the ceiling is
    nonlinear, so averaging first would give a different answer).
    """

    kind: str
    constant_ms: float = 0.0
    per_frame_ms: dict[int, float] | None = None

    def __post_init__(self):
        if self.kind not in (CONSTANT, PER_PREDICTION):
            raise ValueError(f"unknown latency model kind {self.kind!r}")
        if self.kind == CONSTANT and self.constant_ms < 0:
            raise ValueError("constant latency must be non-negative")
        if self.kind == PER_PREDICTION:
            if self.per_frame_ms is None:
                raise ValueError("per_prediction model requires per-frame latencies")
            if any(v < 0 for v in self.per_frame_ms.values()):
                raise ValueError("latencies must be non-negative")

    @classmethod
    def constant(cls, latency_ms: float) -> "LatencyModel":
        return cls(kind=CONSTANT, constant_ms=float(latency_ms))

    @classmethod
    def from_trace(cls, path) -> "LatencyModel":
        return cls(kind=PER_PREDICTION, per_frame_ms=load_latency_trace(path))

    def latency_for(self, frame_index: int) -> float:
        if self.kind == CONSTANT:
            return self.constant_ms
        try:
            return self.per_frame_ms[frame_index]
        except KeyError:
            raise KeyError(f"no latency recorded for frame {frame_index}") from None


def load_latency_trace(path) -> dict[int, float]:
    """Read a latency trace CSV with header ``frame_index,latency_ms``."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != TRACE_HEADER:
            raise ValueError(
                f"latency trace must start with header {','.join(TRACE_HEADER)!r}, got {header}"
            )
        trace: dict[int, float] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ValueError(f"latency trace line {lineno}: expected 2 fields, got {len(row)}")
            try:
                index, value = int(row[0]), float(row[1])
            except ValueError as exc:
                raise ValueError(f"latency trace line {lineno}: {exc}") from None
            if value < 0:
                raise ValueError(f"latency trace line {lineno}: negative latency {value}")
            if index in trace:
                raise ValueError(f"latency trace line {lineno}: duplicate frame_index {index}")
            trace[index] = value
    return trace
