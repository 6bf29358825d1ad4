"""Binary file formats: .vf2 / .sf2 grids and binary PGM images.

Field layout (little-endian): 4 magic bytes ("VF2D" for vector, "SF2D" for
scalar), u32 version (1), u32 width, u32 height, then width*height*(2 or 1)
IEEE-754 float32 values, row-major from the top-left cell, vector samples
interleaved (u, v). Values are stored in float32: writing quantizes, and
reading widens exactly, so file -> field -> file is always bit-exact.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .fields import FieldError, ScalarField, VectorField

VF2_MAGIC = b"VF2D"
SF2_MAGIC = b"SF2D"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIII")
_MAX_DIM = 1 << 16


class BadMagic(FieldError):
    """File does not start with the expected magic or carries an unknown version."""


class BadDimensions(FieldError):
    """Header dimensions are out of the supported range."""


class TruncatedFile(FieldError):
    """Payload length does not match the header."""


def _encode(data: np.ndarray, magic: bytes, channels: int) -> bytes:
    h, w = data.shape[:2]
    header = _HEADER.pack(magic, FORMAT_VERSION, w, h)
    payload = np.ascontiguousarray(data, dtype="<f4").tobytes()
    assert len(payload) == w * h * channels * 4
    return header + payload


def _decode(blob: bytes, magic: bytes, channels: int) -> np.ndarray:
    if len(blob) < _HEADER.size:
        raise TruncatedFile("file shorter than header")
    got_magic, version, w, h = _HEADER.unpack_from(blob)
    if got_magic != magic:
        raise BadMagic(f"expected magic {magic!r}, got {got_magic!r}")
    if version != FORMAT_VERSION:
        raise BadMagic(f"unsupported format version {version}")
    if not (4 <= w <= _MAX_DIM and 4 <= h <= _MAX_DIM):
        raise BadDimensions(f"unsupported dimensions {w}x{h}")
    expected = _HEADER.size + w * h * channels * 4
    if len(blob) != expected:
        raise TruncatedFile(f"expected {expected} bytes, got {len(blob)}")
    flat = np.frombuffer(blob, dtype="<f4", offset=_HEADER.size)
    shape = (h, w, channels) if channels > 1 else (h, w)
    return flat.reshape(shape).astype(np.float64)


def field_to_bytes(f: VectorField) -> bytes:
    return _encode(f.data, VF2_MAGIC, 2)


def field_from_bytes(blob: bytes) -> VectorField:
    return VectorField(_decode(blob, VF2_MAGIC, 2))


def scalar_to_bytes(s: ScalarField) -> bytes:
    return _encode(s.data, SF2_MAGIC, 1)


def scalar_from_bytes(blob: bytes) -> ScalarField:
    return ScalarField(_decode(blob, SF2_MAGIC, 1))


def write_field(f: VectorField, path) -> None:
    Path(path).write_bytes(field_to_bytes(f))


def read_field(path) -> VectorField:
    return field_from_bytes(Path(path).read_bytes())


def write_scalar(s: ScalarField, path) -> None:
    Path(path).write_bytes(scalar_to_bytes(s))


def read_scalar(path) -> ScalarField:
    return scalar_from_bytes(Path(path).read_bytes())


def quantize_field(f: VectorField) -> VectorField:
    """Round a field to float32 precision so that write/read is the identity."""
    return VectorField(f.data.astype("<f4").astype(np.float64))


def pgm_to_bytes(img: np.ndarray) -> bytes:
    """Encode a uint8 grayscale array as binary PGM (P5, maxval 255)."""
    arr = np.asarray(img)
    if arr.ndim != 2 or arr.dtype != np.uint8:
        raise ValueError("PGM payload must be a 2D uint8 array")
    h, w = arr.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + arr.tobytes()


def pgm_from_bytes(blob: bytes) -> np.ndarray:
    if not blob.startswith(b"P5"):
        raise BadMagic("not a binary PGM (P5) file")
    # header: magic, width, height, maxval, single whitespace, then raster
    fields = []
    pos = 2
    while len(fields) < 3:
        while pos < len(blob) and blob[pos : pos + 1].isspace():
            pos += 1
        if pos < len(blob) and blob[pos : pos + 1] == b"#":
            while pos < len(blob) and blob[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(blob) and not blob[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise TruncatedFile("PGM header ended early")
        fields.append(int(blob[start:pos]))
    pos += 1  # single whitespace byte before the raster
    w, h, maxval = fields
    if maxval != 255:
        raise BadDimensions(f"only maxval 255 PGM supported, got {maxval}")
    raster = blob[pos : pos + w * h]
    if len(raster) != w * h:
        raise TruncatedFile(f"PGM raster has {len(raster)} bytes, expected {w * h}")
    return np.frombuffer(raster, dtype=np.uint8).reshape(h, w).copy()


def write_pgm(img: np.ndarray, path) -> None:
    Path(path).write_bytes(pgm_to_bytes(img))


def read_pgm(path) -> np.ndarray:
    return pgm_from_bytes(Path(path).read_bytes())
