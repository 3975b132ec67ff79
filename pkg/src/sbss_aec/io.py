"""WAV and filter-trace file formats.

Trace layout (little endian)::

    offset  size  field
    0       4     magic  b"SBTR"
    4       4     version (uint32, currently 1)
    8       4     n_bins (uint32)
    12      4     n_frames (uint32)
    16      4     dim = P*L + 1 (uint32)
    20      ...   complex64 filters, frame-major: [frame][bin][dim]
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .exceptions import StructuralError, WavFormatError
from .pipeline import FilterTrace

TRACE_MAGIC = b"SBTR"
TRACE_VERSION = 1
_TRACE_HEADER = struct.Struct("<4sIIII")

_PCM = 1
_FLOAT = 3
_EXTENSIBLE = 0xFFFE


def read_wav(path) -> tuple[int, np.ndarray]:
    """Read a mono RIFF WAV as float64 in [-1, 1].

    Supports 16/24/32-bit integer PCM and 32/64-bit IEEE float.

    Returns:
        ``(sample_rate, samples)``
    """
    raw = Path(path).read_bytes()
    if len(raw) < 12:
        raise WavFormatError(f"{path}: file too short for a RIFF header", 0)
    if raw[0:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise WavFormatError(f"{path}: not a RIFF/WAVE file", 0)
    pos = 12
    fmt = None
    data = None
    while pos + 8 <= len(raw):
        chunk_id = raw[pos:pos + 4]
        (size,) = struct.unpack_from("<I", raw, pos + 4)
        body = pos + 8
        if body + size > len(raw):
            if chunk_id == b"data" and fmt is not None:
                size = len(raw) - body  # truncated data chunk: keep what exists
            else:
                raise WavFormatError(
                    f"{path}: chunk {chunk_id!r} overruns end of file", pos
                )
        if chunk_id == b"fmt ":
            if size < 16:
                raise WavFormatError(f"{path}: fmt chunk too short", pos)
            tag, channels, rate, _, block_align, bits = struct.unpack_from(
                "<HHIIHH", raw, body
            )
            if tag == _EXTENSIBLE:
                if size < 40:
                    raise WavFormatError(f"{path}: extensible fmt chunk too short", pos)
                (tag,) = struct.unpack_from("<H", raw, body + 24)
            fmt = (tag, channels, rate, block_align, bits, pos)
        elif chunk_id == b"data":
            data = (body, size)
        pos = body + size + (size & 1)
    if fmt is None:
        raise WavFormatError(f"{path}: missing fmt chunk", 12)
    if data is None:
        raise WavFormatError(f"{path}: missing data chunk", pos)
    tag, channels, rate, block_align, bits, fmt_pos = fmt
    if channels != 1:
        raise WavFormatError(f"{path}: expected mono, got {channels} channels", fmt_pos + 10)
    width = bits // 8
    if bits % 8 or block_align != width:
        raise WavFormatError(f"{path}: inconsistent block alignment", fmt_pos + 20)
    start, size = data
    n = size // width
    buf = raw[start:start + n * width]
    if tag == _PCM and bits == 16:
        x = np.frombuffer(buf, "<i2") / 32768.0
    elif tag == _PCM and bits == 24:
        b = np.frombuffer(buf, np.uint8).reshape(-1, 3).astype(np.int32)
        v = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
        v = np.where(v >= 1 << 23, v - (1 << 24), v)
        x = v / float(1 << 23)
    elif tag == _PCM and bits == 32:
        x = np.frombuffer(buf, "<i4") / float(1 << 31)
    elif tag == _FLOAT and bits == 32:
        x = np.frombuffer(buf, "<f4").astype(np.float64)
    elif tag == _FLOAT and bits == 64:
        x = np.frombuffer(buf, "<f8").astype(np.float64)
    else:
        raise WavFormatError(
            f"{path}: unsupported format tag {tag} with {bits} bits", fmt_pos + 8
        )
    return rate, np.array(x, dtype=np.float64)


def write_wav(path, rate: int, samples, subtype: str = "float32") -> None:
    """Write mono WAV; ``subtype`` is ``"float32"`` or ``"pcm16"``."""
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1:
        raise StructuralError("only mono signals can be written")
    if subtype == "float32":
        payload = x.astype("<f4").tobytes()
        tag, bits = _FLOAT, 32
    elif subtype == "pcm16":
        q = np.clip(np.round(x * 32768.0), -32768, 32767).astype("<i2")
        payload = q.tobytes()
        tag, bits = _PCM, 16
    else:
        raise ValueError(f"unknown subtype {subtype!r}")
    width = bits // 8
    fmt = struct.pack("<HHIIHH", tag, 1, int(rate), int(rate) * width, width, bits)
    chunks = b"fmt " + struct.pack("<I", len(fmt)) + fmt
    chunks += b"data" + struct.pack("<I", len(payload)) + payload
    if len(payload) & 1:
        chunks += b"\x00"
    Path(path).write_bytes(b"RIFF" + struct.pack("<I", 4 + len(chunks)) + b"WAVE" + chunks)


def write_trace(path, trace: FilterTrace) -> None:
    header = _TRACE_HEADER.pack(
        TRACE_MAGIC, TRACE_VERSION, trace.n_bins, trace.n_frames, trace.dim
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(trace.filters, dtype="<c8").tobytes())


def read_trace(path) -> FilterTrace:
    raw = Path(path).read_bytes()
    if len(raw) < _TRACE_HEADER.size:
        raise StructuralError(f"{path}: trace header truncated")
    magic, version, n_bins, n_frames, dim = _TRACE_HEADER.unpack_from(raw)
    if magic != TRACE_MAGIC:
        raise StructuralError(f"{path}: bad trace magic {magic!r}")
    if version != TRACE_VERSION:
        raise StructuralError(f"{path}: unsupported trace version {version}")
    expected = n_bins * n_frames * dim * 8
    body = raw[_TRACE_HEADER.size:]
    if len(body) != expected:
        raise StructuralError(
            f"{path}: expected {expected} bytes of filters, found {len(body)}"
        )
    filters = np.frombuffer(body, "<c8").reshape(n_frames, n_bins, dim)
    return FilterTrace(filters.astype(np.complex128))
