"""How latency turns into a frame offset.

A segmentation network that needs L milliseconds per frame is always
looking at the past: by the time its output is ready, the camera already
delivered ceil(L / d) new frames, where d is the frame interval.  That
offset k decides which ground-truth frame a latency-aware score compares
against.
"""

from flameval import cityscapes_input_index, frame_offset

INTERVAL_MS = 60.0  # Cityscapes-style sequences: ~16.6 fps

print("=" * 64)
print("Latency -> frame offset (d = 60 ms)")
print("=" * 64)

# Measured latencies of four reference networks on one GPU.
networks = [
    ("DeepLab-R101", 195.0),
    ("DeepLab-MN", 76.0),
    ("SwiftNet-R18", 26.0),
    ("SwiftNet-R18-X", 38.0),
]

print(f"{'network':<16} {'latency (ms)':>12} {'fps':>6} {'offset k':>9}")
for name, latency in networks:
    k = frame_offset(latency, INTERVAL_MS)
    print(f"{name:<16} {latency:>12.0f} {1000 / latency:>6.1f} {k:>9}")

print()
print("The offset is a ceiling, so it jumps exactly at multiples of d:")
for latency in (0, 59, 60, 61, 120, 121):
    print(f"  frame_offset({latency:>3}, 60) = {frame_offset(latency, INTERVAL_MS)}")

print()
print("=" * 64)
print("Sparsely annotated sequences: picking the input frame")
print("=" * 64)
print(
    "With ground truth only at frame 20 of each 30-frame sequence, a\n"
    "latency-aware run feeds the network frame 20 - k so that its output\n"
    "lands exactly on the annotated frame:"
)
for name, latency in networks:
    idx = cityscapes_input_index(20, latency, INTERVAL_MS)
    print(f"  {name:<16} input frame {idx:>2}  (k = {20 - idx})")
