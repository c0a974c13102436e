"""Strict reader/writer for 3-D volumes in the ``.npy`` version-1.0 format,
plus cohort manifest CSV parsing.

On-disk layout handled here::

    \\x93NUMPY                       6-byte magic
    \\x01\\x00                        version (major, minor) = (1, 0)
    <H                              little-endian header length
    {'descr': '<f8', 'fortran_order': False, 'shape': (X, Y, Z), }
                                    ASCII dict, space-padded, ends in \\n
    raw little-endian payload       X*Y*Z elements, C order

Only little-endian float32/float64, C-order, 3-D payloads are accepted;
anything else is rejected with a specific error rather than coerced.
Written headers are padded so magic+version+length+dict total a multiple
of 64 bytes. The parser is deliberately independent of ``numpy.load`` so
that malformed files map to a stable, fine-grained error taxonomy.

Manifest CSV: UTF-8 with header ``subject_id,volume_path,age_years``.
"""

from __future__ import annotations

import ast
import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputError
from .volume import Volume3D

MAGIC = b"\x93NUMPY"
SUPPORTED_DTYPES = ("<f4", "<f8")
_HEADER_ALIGN = 64


class NpyIoError(InputError):
    """Base for .npy read/write failures."""


class MagicMismatchError(NpyIoError):
    """File does not start with the .npy magic bytes."""


class UnsupportedVersionError(NpyIoError):
    """Format version other than 1.0."""


class UnsupportedDtypeError(NpyIoError):
    """descr is not little-endian float32/float64."""


class UnsupportedLayoutError(NpyIoError):
    """fortran_order is true; only C-order payloads are accepted."""


class HeaderMalformedError(NpyIoError):
    """Header dict is truncated, unparsable, or has wrong keys/types."""


class BadShapeError(NpyIoError):
    """Declared shape is not a positive 3-D triple."""


class TruncatedError(NpyIoError):
    """Payload is shorter than the declared shape requires."""


class NonFiniteDataError(NpyIoError):
    """Payload contains NaN or Inf."""


class IoFailureError(NpyIoError):
    """Underlying OS-level read/write failure."""


@dataclass(frozen=True)
class NpyHeader:
    dtype_code: str
    fortran_order: bool
    shape: tuple[int, int, int]


class ManifestError(InputError):
    """Base for manifest CSV failures."""


class MissingColumnError(ManifestError):
    pass


class DuplicateSubjectError(ManifestError):
    pass


class NonPositiveAgeError(ManifestError):
    pass


class MalformedRowError(ManifestError):
    pass


@dataclass(frozen=True)
class ManifestEntry:
    subject_id: str
    volume_path: str
    age_years: float


@dataclass(frozen=True)
class Manifest:
    entries: tuple[ManifestEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def ages_by_subject(self) -> dict[str, float]:
        return {e.subject_id: e.age_years for e in self.entries}


def _parse_header_dict(raw: bytes, path: Path) -> NpyHeader:
    try:
        text = raw.decode("ascii")
    except UnicodeDecodeError as exc:
        raise HeaderMalformedError(f"{path}: header is not ASCII") from exc
    try:
        meta = ast.literal_eval(text.strip())
    except (ValueError, SyntaxError) as exc:
        raise HeaderMalformedError(f"{path}: cannot parse header dict") from exc
    if not isinstance(meta, dict) or set(meta) != {"descr", "fortran_order", "shape"}:
        raise HeaderMalformedError(f"{path}: header dict must have exactly descr/fortran_order/shape")
    descr = meta["descr"]
    if not isinstance(descr, str) or descr not in SUPPORTED_DTYPES:
        raise UnsupportedDtypeError(
            f"{path}: dtype {descr!r} not supported (expected one of {SUPPORTED_DTYPES})"
        )
    order = meta["fortran_order"]
    if not isinstance(order, bool):
        raise HeaderMalformedError(f"{path}: fortran_order must be a boolean")
    if order:
        raise UnsupportedLayoutError(f"{path}: Fortran-order payloads are rejected, convert to C order")
    shape = meta["shape"]
    if not isinstance(shape, tuple) or not all(isinstance(d, int) for d in shape):
        raise HeaderMalformedError(f"{path}: shape must be a tuple of ints")
    if len(shape) != 3 or min(shape) < 1:
        raise BadShapeError(f"{path}: expected a positive 3-D shape, got {shape}")
    return NpyHeader(dtype_code=descr, fortran_order=False, shape=shape)  # type: ignore[arg-type]


def _read_header_from(fh, path: Path) -> NpyHeader:
    magic = fh.read(len(MAGIC))
    if magic != MAGIC:
        raise MagicMismatchError(f"{path}: not an .npy file")
    version = fh.read(2)
    if len(version) < 2:
        raise HeaderMalformedError(f"{path}: file ends inside the version field")
    if version != b"\x01\x00":
        raise UnsupportedVersionError(
            f"{path}: version {version[0]}.{version[1]} not supported (need 1.0)"
        )
    raw_len = fh.read(2)
    if len(raw_len) < 2:
        raise HeaderMalformedError(f"{path}: file ends inside the header-length field")
    (header_len,) = struct.unpack("<H", raw_len)
    header = fh.read(header_len)
    if len(header) < header_len:
        raise HeaderMalformedError(f"{path}: file ends inside the header dict")
    return _parse_header_dict(header, path)


def read_npy_header(path: str | Path) -> NpyHeader:
    """Parse and validate just the header of an .npy file."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            return _read_header_from(fh, path)
    except OSError as exc:
        raise IoFailureError(f"{path}: {exc}") from exc


def read_npy(path: str | Path) -> Volume3D:
    """Read a 3-D little-endian float volume; values are widened to float64."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            header = _read_header_from(fh, path)
            itemsize = 4 if header.dtype_code == "<f4" else 8
            need = header.shape[0] * header.shape[1] * header.shape[2] * itemsize
            payload = fh.read(need)
    except OSError as exc:
        raise IoFailureError(f"{path}: {exc}") from exc
    if len(payload) < need:
        raise TruncatedError(
            f"{path}: payload holds {len(payload)} bytes, shape {header.shape} needs {need}"
        )
    values = np.frombuffer(payload, dtype=np.dtype(header.dtype_code)).reshape(header.shape)
    arr = values.astype(np.float64)
    if not np.isfinite(arr).all():
        raise NonFiniteDataError(f"{path}: payload contains NaN or Inf")
    return Volume3D(arr)


def write_npy(volume: Volume3D, path: str | Path, dtype_code: str = "<f8") -> None:
    """Write a version-1.0 .npy file; lossless for '<f8', float32-rounded for '<f4'."""
    if dtype_code not in SUPPORTED_DTYPES:
        raise UnsupportedDtypeError(
            f"dtype {dtype_code!r} not supported (expected one of {SUPPORTED_DTYPES})"
        )
    path = Path(path)
    header_dict = "{'descr': '%s', 'fortran_order': False, 'shape': %s, }" % (
        dtype_code,
        str(tuple(volume.shape)),
    )
    prefix_len = len(MAGIC) + 2 + 2
    total = prefix_len + len(header_dict) + 1  # final newline
    padding = (-total) % _HEADER_ALIGN
    header = header_dict.encode("ascii") + b" " * padding + b"\n"
    payload = volume.data.astype(np.dtype(dtype_code)).tobytes(order="C")
    try:
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(b"\x01\x00")
            fh.write(struct.pack("<H", len(header)))
            fh.write(header)
            fh.write(payload)
    except OSError as exc:
        raise IoFailureError(f"{path}: {exc}") from exc


MANIFEST_COLUMNS = ("subject_id", "volume_path", "age_years")


def read_manifest(path: str | Path) -> Manifest:
    """Parse a cohort manifest CSV, validating ids and ages row by row."""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8-sig", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise IoFailureError(f"{path}: {exc}") from exc
    if not rows or tuple(cell.strip() for cell in rows[0]) != MANIFEST_COLUMNS:
        raise MissingColumnError(
            f"{path}: first row must be the header {','.join(MANIFEST_COLUMNS)}"
        )
    entries: list[ManifestEntry] = []
    seen: dict[str, int] = {}
    for line_no, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 3:
            raise MalformedRowError(f"{path}: line {line_no}: expected 3 fields, got {len(row)}")
        subject_id, volume_path, age_text = (cell.strip() for cell in row)
        if not subject_id or not volume_path:
            raise MalformedRowError(f"{path}: line {line_no}: empty subject_id or volume_path")
        if subject_id in seen:
            raise DuplicateSubjectError(
                f"{path}: line {line_no}: subject_id {subject_id!r} already seen on line {seen[subject_id]}"
            )
        try:
            age = float(age_text)
        except ValueError as exc:
            raise MalformedRowError(f"{path}: line {line_no}: age_years {age_text!r} is not a number") from exc
        if not age > 0:
            raise NonPositiveAgeError(f"{path}: line {line_no}: age_years must be > 0, got {age_text}")
        seen[subject_id] = line_no
        entries.append(ManifestEntry(subject_id, volume_path, age))
    return Manifest(entries=tuple(entries))
