"""Binary (P5) PGM reading and writing, maxval 255.

The parser is deliberately strict and reports the byte offset of whatever
it choked on; the writer clamps and rounds to [0, 255], so integer-valued
images round-trip exactly.
"""

from __future__ import annotations

import numpy as np

__all__ = ["PgmError", "load_pgm", "save_pgm"]


class PgmError(ValueError):
    """Malformed PGM input; the message carries the byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


def _next_token(data: bytes, pos: int) -> tuple[bytes, int]:
    n = len(data)
    while pos < n:
        c = data[pos : pos + 1]
        if c == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    if pos >= n:
        raise PgmError("unexpected end of header", pos)
    start = pos
    while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
        pos += 1
    return data[start:pos], pos


def load_pgm(path) -> np.ndarray:
    """Load a binary P5 PGM with maxval 255 as a float64 image in [0, 255]."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] != b"P5":
        raise PgmError(f"bad magic {data[:2]!r}, want b'P5'", 0)
    pos = 2
    fields = []
    for _ in range(3):
        token, pos = _next_token(data, pos)
        try:
            fields.append(int(token))
        except ValueError:
            raise PgmError(f"non-numeric header token {token!r}", pos - len(token))
    width, height, maxval = fields
    if width <= 0 or height <= 0:
        raise PgmError(f"bad dimensions {width}x{height}", pos)
    if maxval != 255:
        raise PgmError(f"unsupported maxval {maxval}, want 255", pos)
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise PgmError("missing single whitespace after maxval", pos)
    pos += 1
    need = width * height
    raster = data[pos : pos + need]
    if len(raster) < need:
        raise PgmError(
            f"truncated raster: need {need} bytes, have {len(raster)}",
            pos + len(raster),
        )
    img = np.frombuffer(raster, dtype=np.uint8, count=need).astype(float)
    return img.reshape(height, width)


def save_pgm(path, image: np.ndarray) -> None:
    """Write a 2-D array as binary P5 PGM, clamping and rounding to [0, 255]."""
    image = np.asarray(image)
    if image.ndim != 2:
        raise ValueError(f"need a 2-D image, got shape {image.shape}")
    pixels = np.clip(np.rint(image), 0, 255).astype(np.uint8)
    height, width = pixels.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fh.write(pixels.tobytes())
