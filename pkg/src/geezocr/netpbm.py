"""Netpbm readers and writers.

Grayscale: PGM, both plain "P2" and raw "P5", maxval up to 255.
Binary: PBM, both plain "P1" and raw "P4".  PBM's 1 = black matches the
internal foreground convention bit-exactly, so no inversion happens here.
"""

from __future__ import annotations

import numpy as np

from .errors import ParseError
from .image import BinaryImage, GrayImage, pack, unpack


def _tokens(data: bytes):
    """Yield whitespace-separated header tokens, skipping # comments."""
    i = 0
    n = len(data)
    while i < n:
        ch = data[i : i + 1]
        if ch in b" \t\r\n":
            i += 1
        elif ch == b"#":
            while i < n and data[i : i + 1] != b"\n":
                i += 1
        else:
            j = i
            while j < n and data[j : j + 1] not in b" \t\r\n":
                j += 1
            yield data[i:j], j
            i = j


def _read_header(data: bytes, n_fields: int):
    """Parse magic + n_fields integers; return (magic, fields, raster offset)."""
    it = _tokens(data)
    try:
        magic, end = next(it)
    except StopIteration:
        raise ParseError("empty netpbm file") from None
    fields = []
    for _ in range(n_fields):
        try:
            tok, end = next(it)
        except StopIteration:
            raise ParseError("truncated netpbm header") from None
        if not tok.isdigit():
            raise ParseError(f"non-numeric header field {tok!r}")
        fields.append(int(tok))
    # exactly one whitespace byte separates the header from a raw raster
    return magic, fields, end + 1


def read_pgm(path) -> GrayImage:
    """Load a P2 or P5 grayscale image."""
    with open(path, "rb") as fh:
        data = fh.read()
    magic, (w, h, maxval), offset = _read_header(data, 3)
    if magic not in (b"P2", b"P5"):
        raise ParseError(f"expected PGM magic P2/P5, got {magic!r}")
    if not 1 <= maxval <= 255:
        raise ParseError(f"unsupported PGM maxval {maxval}")
    if w < 1 or h < 1:
        raise ParseError("PGM dimensions must be >= 1")
    if magic == b"P5":
        raster = data[offset : offset + w * h]
        if len(raster) < w * h:
            raise ParseError("PGM raster shorter than width*height")
        px = np.frombuffer(raster, dtype=np.uint8).reshape(h, w)
    else:
        vals = data[offset - 1 :].split()
        if len(vals) < w * h:
            raise ParseError("PGM raster shorter than width*height")
        try:
            px = np.array([int(v) for v in vals[: w * h]], dtype=np.int64)
        except ValueError as exc:
            raise ParseError(f"bad PGM sample: {exc}") from None
        if px.min() < 0 or px.max() > maxval:
            raise ParseError("PGM sample outside [0, maxval]")
        px = px.astype(np.uint8).reshape(h, w)
    return GrayImage(width=w, height=h, pixels=px)


def write_pgm(img: GrayImage, path, plain: bool = False) -> None:
    """Write a grayscale image as P5 (default) or plain P2."""
    if plain:
        lines = [f"P2\n{img.width} {img.height}\n255\n"]
        for row in img.pixels:
            lines.append(" ".join(str(int(v)) for v in row) + "\n")
        payload = "".join(lines).encode("ascii")
    else:
        payload = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
        payload += img.pixels.tobytes()
    with open(path, "wb") as fh:
        fh.write(payload)


def read_pbm(path) -> BinaryImage:
    """Load a P1 or P4 bitmap; PBM 1 = black = foreground."""
    with open(path, "rb") as fh:
        data = fh.read()
    magic, (w, h), offset = _read_header(data, 2)
    if magic not in (b"P1", b"P4"):
        raise ParseError(f"expected PBM magic P1/P4, got {magic!r}")
    if w < 1 or h < 1:
        raise ParseError("PBM dimensions must be >= 1")
    if magic == b"P4":
        row_bytes = (w + 7) // 8
        raster = data[offset : offset + row_bytes * h]
        if len(raster) < row_bytes * h:
            raise ParseError("PBM raster shorter than expected")
        packed = np.frombuffer(raster, dtype=np.uint8).reshape(h, row_bytes)
        bits = np.unpackbits(packed, axis=1)[:, :w]
    else:
        digits = _plain_pbm_digits(data[offset - 1 :])
        if len(digits) < w * h:
            raise ParseError("PBM raster shorter than width*height")
        bits = np.array(digits[: w * h], dtype=np.uint8).reshape(h, w)
    return pack(bits)


def _plain_pbm_digits(raster: bytes) -> list[int]:
    digits = []
    in_comment = False
    for b in raster:
        ch = chr(b)
        if in_comment:
            if ch == "\n":
                in_comment = False
            continue
        if ch == "#":
            in_comment = True
        elif ch in "01":
            digits.append(ord(ch) - ord("0"))
        elif ch not in " \t\r\n":
            raise ParseError(f"bad PBM digit {ch!r}")
    return digits


def write_pbm(img: BinaryImage, path, plain: bool = False) -> None:
    """Write a bitmap as P4 (default) or plain P1."""
    bits = unpack(img)
    if plain:
        lines = [f"P1\n{img.width} {img.height}\n"]
        for row in bits:
            lines.append("".join("1" if v else "0" for v in row) + "\n")
        payload = "".join(lines).encode("ascii")
    else:
        payload = f"P4\n{img.width} {img.height}\n".encode("ascii")
        payload += np.packbits(bits, axis=1).tobytes()
    with open(path, "wb") as fh:
        fh.write(payload)
