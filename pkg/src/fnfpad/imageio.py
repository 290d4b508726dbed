"""Image file decode/encode: binary PGM (P5) / PPM (P6) and 8-bit PNG."""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np

from .imgcore import ImageError, as_image


def to_uint8(img: np.ndarray) -> np.ndarray:
    return np.rint(np.asarray(img, dtype=np.float64) * 255.0).astype(np.uint8)


def encode_pnm(img: np.ndarray) -> bytes:
    """Encode a grayscale image as P5 or an RGB image as P6 (maxval 255)."""
    img = as_image(img)
    data = to_uint8(img)
    magic = b"P5" if img.ndim == 2 else b"P6"
    h, w = img.shape[:2]
    return magic + b"\n%d %d\n255\n" % (w, h) + data.tobytes()


def _header_tokens(buf: bytes, count: int) -> tuple[list[bytes], int]:
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    tokens: list[bytes] = []
    pos = 0
    n = len(buf)
    while len(tokens) < count:
        while pos < n and buf[pos : pos + 1].isspace():
            pos += 1
        if pos >= n:
            raise ImageError("truncated PNM header")
        if buf[pos : pos + 1] == b"#":
            while pos < n and buf[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not buf[pos : pos + 1].isspace() and buf[pos : pos + 1] != b"#":
            pos += 1
        tokens.append(buf[start:pos])
    # exactly one whitespace byte separates the header from the raster
    if pos >= n or not buf[pos : pos + 1].isspace():
        raise ImageError("malformed PNM header")
    return tokens, pos + 1


def decode_pnm(buf: bytes) -> np.ndarray:
    tokens, offset = _header_tokens(buf, 4)
    magic = tokens[0]
    if magic not in (b"P5", b"P6"):
        raise ImageError(f"unsupported PNM magic {magic!r}")
    try:
        w, h, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise ImageError("non-numeric PNM header field") from exc
    if maxval != 255:
        raise ImageError(f"only maxval 255 is supported, got {maxval}")
    if w <= 0 or h <= 0:
        raise ImageError("PNM dimensions must be positive")
    channels = 1 if magic == b"P5" else 3
    expected = w * h * channels
    raster = buf[offset : offset + expected]
    if len(raster) != expected:
        raise ImageError("truncated PNM raster")
    arr = np.frombuffer(raster, dtype=np.uint8)
    shape = (h, w) if channels == 1 else (h, w, 3)
    return arr.reshape(shape).astype(np.float64) / 255.0


def encode_png(img: np.ndarray) -> bytes:
    from PIL import Image

    img = as_image(img)
    mode = "L" if img.ndim == 2 else "RGB"
    out = io.BytesIO()
    Image.fromarray(to_uint8(img), mode=mode).save(out, format="PNG")
    return out.getvalue()


def decode_png(buf: bytes) -> np.ndarray:
    from PIL import Image

    with Image.open(io.BytesIO(buf)) as im:
        if im.mode not in ("L", "RGB"):
            im = im.convert("RGB" if im.mode in ("RGBA", "P", "CMYK", "YCbCr") else "L")
        arr = np.asarray(im, dtype=np.uint8)
    return arr.astype(np.float64) / 255.0


def read_image(path) -> np.ndarray:
    path = Path(path)
    buf = path.read_bytes()
    if buf[:8] == b"\x89PNG\r\n\x1a\n":
        return decode_png(buf)
    if buf[:2] in (b"P5", b"P6"):
        return decode_pnm(buf)
    raise ImageError(f"{path}: unrecognised image format")


def write_image(path, img: np.ndarray) -> None:
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".png":
        buf = encode_png(img)
    elif suffix in (".pgm", ".ppm", ".pnm"):
        buf = encode_pnm(img)
    else:
        raise ImageError(f"unsupported output extension {suffix!r}")
    path.write_bytes(buf)
