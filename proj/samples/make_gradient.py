#!/usr/bin/env python3
"""Writes a small 10-bit 4:2:0 gradient clip for the mock pipeline config."""
import struct
import sys

w, h, frames = 64, 64, 8
out = sys.argv[1] if len(sys.argv) > 1 else "gradient_64x64_10bit.yuv"
with open(out, "wb") as f:
    for t in range(frames):
        luma = [(x * 16 + y * 4 + t * 8) % 1024 for y in range(h) for x in range(w)]
        chroma = [512 + ((x - y + t) % 64) for y in range(h // 2) for x in range(w // 2)]
        f.write(struct.pack(f"<{len(luma)}H", *luma))
        f.write(struct.pack(f"<{len(chroma)}H", *chroma))
        f.write(struct.pack(f"<{len(chroma)}H", *reversed(chroma)))
