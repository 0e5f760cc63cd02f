"""Binary PPM (P6) / PGM (P5) image files, maxval 255 only.

Images are numpy uint8 arrays of shape (H, W, C) with C in {1, 3}.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import FormatError


def check_image(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.dtype != np.uint8 or img.ndim != 3 or img.shape[2] not in (1, 3):
        raise FormatError(f"expected uint8 (H,W,C) image with C in {{1,3}}, "
                          f"got dtype={img.dtype} shape={img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise FormatError("image must be at least 1x1")
    return img


def _next_token(data: bytes, pos: int) -> tuple[bytes, int]:
    while pos < len(data):
        if data[pos:pos + 1].isspace():
            pos += 1
        elif data[pos:pos + 1] == b"#":  # comment runs to end of line
            while pos < len(data) and data[pos] not in b"\r\n":
                pos += 1
        else:
            break
    start = pos
    while pos < len(data) and not data[pos:pos + 1].isspace():
        pos += 1
    if start == pos:
        raise FormatError("truncated PNM header")
    return data[start:pos], pos


def read_image(path) -> np.ndarray:
    data = Path(path).read_bytes()
    magic, pos = _next_token(data, 0)
    if magic == b"P6":
        channels = 3
    elif magic == b"P5":
        channels = 1
    else:
        raise FormatError(f"unsupported PNM magic {magic!r}")
    fields = []
    for _ in range(3):
        tok, pos = _next_token(data, pos)
        if not tok.isdigit():
            raise FormatError(f"bad PNM header field {tok!r}")
        fields.append(int(tok))
    width, height, maxval = fields
    if maxval != 255:
        raise FormatError(f"only maxval 255 supported, got {maxval}")
    pos += 1  # single whitespace after maxval
    need = width * height * channels
    raster = data[pos:pos + need]
    if len(raster) != need:
        raise FormatError("truncated PNM raster")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width, channels).copy()


def write_image(path, img: np.ndarray) -> None:
    img = check_image(img)
    h, w, c = img.shape
    magic = b"P6" if c == 3 else b"P5"
    header = magic + b"\n%d %d\n255\n" % (w, h)
    Path(path).write_bytes(header + img.tobytes())


def luminance_mean(img: np.ndarray) -> float:
    """Mean pixel value across all channels."""
    return float(np.asarray(img, dtype=np.float64).mean())


def to_model_input(img: np.ndarray) -> np.ndarray:
    """Model input convention: pixels scaled to [0, 1] float32."""
    return np.asarray(img, dtype=np.float32) / np.float32(255.0)
