"""Single-file partitioned image format.

An image is one file holding a fixed header, a payload area, and a
descriptor table at the end. All integers are little-endian.

Header, 60 bytes:

    offset  size  field
    0       4     magic "BOXI"
    4       4     format version (u32, currently 1)
    8       16    image uuid (RFC 4122 bytes)
    24      8     created-at, integer epoch seconds (u64)
    32      8     modified-at, integer epoch seconds (u64)
    40      4     descriptor count (u32)
    44      8     descriptor table offset (u64)
    52      8     payload area offset (u64, always 60)

Descriptor, 160 bytes each, one per partition:

    offset  size  field
    0       4     partition id (u32, unique, assigned from 1)
    4       4     datatype code (u32)
    8       4     filesystem code (u32)
    12      4     partition-type code (u32)
    16      4     architecture code (u32)
    20      64    name, UTF-8, zero padded
    84      8     payload offset (u64)
    92      8     payload size (u64)
    100     32    SHA-256 of the payload bytes
    132     28    reserved, zero

Payloads are appended in place; deletes leave a hole that is reclaimed by
compaction when the image is closed. Payload replacement rewrites the whole
file atomically (temp file plus rename).
"""

from __future__ import annotations

import hashlib
import os
import struct
import tempfile
import time
import uuid as uuidlib
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

from .errors import (
    CorruptPartition,
    DuplicatePrimary,
    InvalidName,
    IoError,
    NoSuchPartition,
    NotABoxImage,
    TruncatedImage,
    UnknownCode,
)

MAGIC = b"BOXI"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<4sI16sQQIQQ")
_DESCRIPTOR = struct.Struct("<IIIII64sQQ32s28x")

HEADER_SIZE = _HEADER.size  # 60
DESCRIPTOR_SIZE = _DESCRIPTOR.size  # 160

# datatype codes
DATA_RECIPE = 1
DATA_ENVIRONMENT = 2
DATA_JSON = 3
DATA_PARTITION = 4

# filesystem codes
FS_ARCHIVE_RO = 1
FS_ARCHIVE_RW = 2

# partition-type codes
PART_SYSTEM = 1
PART_SYSTEM_PRIMARY = 2
PART_DATA = 3
PART_METADATA = 4

# architecture codes (there is deliberately no code 1)
ARCH_ANY = 0
ARCH_X86_64 = 2

DATATYPE_NAMES = {
    DATA_RECIPE: "recipe",
    DATA_ENVIRONMENT: "environment",
    DATA_JSON: "json-generic",
    DATA_PARTITION: "partition",
}
FSTYPE_NAMES = {
    FS_ARCHIVE_RO: "archive-ro",
    FS_ARCHIVE_RW: "archive-rw",
}
PARTTYPE_NAMES = {
    PART_SYSTEM: "system",
    PART_SYSTEM_PRIMARY: "system-primary",
    PART_DATA: "data",
    PART_METADATA: "metadata",
}
ARCH_NAMES = {
    ARCH_ANY: "any",
    ARCH_X86_64: "x86-64",
}

NAME_FIELD_BYTES = 64


def iso_utc(epoch_seconds: int) -> str:
    """Render integer epoch seconds as an ISO-8601 UTC timestamp."""
    moment = datetime.fromtimestamp(epoch_seconds, tz=timezone.utc)
    return moment.strftime("%Y-%m-%dT%H:%M:%SZ")


def _checked_name(name: str, what: str) -> bytes:
    if not name:
        raise InvalidName(f"{what} name is empty")
    if "\x00" in name:
        raise InvalidName(f"{what} name contains NUL")
    raw = name.encode("utf-8")
    if len(raw) > NAME_FIELD_BYTES:
        raise InvalidName(f"{what} name exceeds {NAME_FIELD_BYTES} bytes: {name!r}")
    return raw


def _checked_codes(datatype: int, fstype: int, parttype: int, arch: int) -> None:
    if datatype not in DATATYPE_NAMES:
        raise UnknownCode(f"datatype {datatype} not in {sorted(DATATYPE_NAMES)}")
    if fstype not in FSTYPE_NAMES:
        raise UnknownCode(f"fstype {fstype} not in {sorted(FSTYPE_NAMES)}")
    if parttype not in PARTTYPE_NAMES:
        raise UnknownCode(f"parttype {parttype} not in {sorted(PARTTYPE_NAMES)}")
    if arch not in ARCH_NAMES:
        raise UnknownCode(f"arch {arch} not in {sorted(ARCH_NAMES)}")


@dataclass(frozen=True)
class PartitionDescriptor:
    """Decoded form of one 160-byte descriptor record."""

    partition_id: int
    datatype: int
    fstype: int
    parttype: int
    arch: int
    name: str
    payload_offset: int
    payload_size: int
    checksum: bytes

    def pack(self) -> bytes:
        return _DESCRIPTOR.pack(
            self.partition_id,
            self.datatype,
            self.fstype,
            self.parttype,
            self.arch,
            self.name.encode("utf-8"),
            self.payload_offset,
            self.payload_size,
            self.checksum,
        )


@dataclass(frozen=True)
class ImageDescription:
    """Snapshot of an image's header and descriptor table."""

    name: str
    path: str
    uuid: str
    format_version: int
    created_at: int
    modified_at: int
    file_size: int
    partitions: tuple[PartitionDescriptor, ...]


class BoxImage:
    """Handle to one image file.

    No file descriptor is kept between operations; every read and write
    opens the backing file afresh, so dumps always reflect on-disk bytes.
    """

    def __init__(self, path: Path, image_uuid: uuidlib.UUID, created_at: int,
                 modified_at: int, partitions: list[PartitionDescriptor],
                 table_offset: int):
        self.path = path
        self.uuid = image_uuid
        self.created_at = created_at
        self.modified_at = modified_at
        self._partitions = partitions
        self._table_offset = table_offset
        self._needs_compaction = False
        self._closed = False

    # --- construction ---------------------------------------------------

    @classmethod
    def create(cls, name: str, path: Path | str | None = None) -> "BoxImage":
        """Create a new empty image file.

        When path is omitted the file is written as <name>.boxi in the
        current directory.
        """
        _checked_name(name, "image")
        if "/" in name:
            raise InvalidName(f"image name contains '/': {name!r}")
        target = Path(path) if path is not None else Path(f"{name}.boxi")
        now = int(time.time())
        image = cls(
            path=target,
            image_uuid=uuidlib.uuid4(),
            created_at=now,
            modified_at=now,
            partitions=[],
            table_offset=HEADER_SIZE,
        )
        try:
            with open(target, "wb") as fh:
                fh.write(image._header_bytes())
        except OSError as exc:
            raise IoError(f"cannot create image at {target}: {exc}") from exc
        return image

    @classmethod
    def open(cls, path: Path | str) -> "BoxImage":
        """Open an existing image, validating header and table structure."""
        path = Path(path)
        try:
            data = path.read_bytes()
        except OSError as exc:
            raise IoError(f"cannot read image at {path}: {exc}") from exc
        if len(data) < len(MAGIC):
            raise TruncatedImage(f"{path}: shorter than the magic")
        if data[: len(MAGIC)] != MAGIC:
            raise NotABoxImage(f"{path}: bad magic {data[:4]!r}")
        if len(data) < HEADER_SIZE:
            raise TruncatedImage(f"{path}: header cut short")
        (_, version, raw_uuid, created, modified, count, table_offset,
         payload_offset) = _HEADER.unpack_from(data, 0)
        if version != FORMAT_VERSION:
            raise NotABoxImage(f"{path}: unsupported format version {version}")
        if payload_offset != HEADER_SIZE or table_offset < HEADER_SIZE:
            raise NotABoxImage(f"{path}: implausible area offsets")
        table_end = table_offset + count * DESCRIPTOR_SIZE
        if table_end > len(data):
            raise TruncatedImage(f"{path}: descriptor table runs past the end")

        partitions: list[PartitionDescriptor] = []
        for index in range(count):
            record = _DESCRIPTOR.unpack_from(data, table_offset + index * DESCRIPTOR_SIZE)
            pid, datatype, fstype, parttype, arch, raw_name, offset, size, digest = record
            try:
                name = raw_name.rstrip(b"\x00").decode("utf-8")
            except UnicodeDecodeError as exc:
                raise NotABoxImage(f"{path}: descriptor {index} name is not UTF-8") from exc
            try:
                _checked_codes(datatype, fstype, parttype, arch)
            except UnknownCode as exc:
                raise NotABoxImage(f"{path}: descriptor {index}: {exc}") from exc
            if offset < HEADER_SIZE or offset + size > table_offset:
                if offset + size > len(data):
                    raise TruncatedImage(f"{path}: partition {pid} extends past the end")
                raise NotABoxImage(f"{path}: partition {pid} extent outside payload area")
            partitions.append(PartitionDescriptor(
                pid, datatype, fstype, parttype, arch, name, offset, size, digest))

        ids = [p.partition_id for p in partitions]
        if len(set(ids)) != len(ids):
            raise NotABoxImage(f"{path}: duplicate partition ids")
        if sum(1 for p in partitions if p.parttype == PART_SYSTEM_PRIMARY) > 1:
            raise NotABoxImage(f"{path}: more than one primary system partition")
        spans = sorted((p.payload_offset, p.payload_offset + p.payload_size)
                       for p in partitions if p.payload_size)
        for (_, end_a), (start_b, _) in zip(spans, spans[1:]):
            if start_b < end_a:
                raise NotABoxImage(f"{path}: overlapping partition extents")

        return cls(path, uuidlib.UUID(bytes=raw_uuid), created, modified,
                   partitions, table_offset)

    # --- queries ----------------------------------------------------------

    @property
    def name(self) -> str:
        return self.path.stem

    @property
    def partitions(self) -> tuple[PartitionDescriptor, ...]:
        return tuple(self._partitions)

    def descriptor(self, partition_id: int) -> PartitionDescriptor:
        for part in self._partitions:
            if part.partition_id == partition_id:
                return part
        raise NoSuchPartition(f"{self.name}: no partition {partition_id}")

    def find(self, *, parttype: int | None = None,
             datatype: int | None = None) -> list[PartitionDescriptor]:
        found = []
        for part in self._partitions:
            if parttype is not None and part.parttype != parttype:
                continue
            if datatype is not None and part.datatype != datatype:
                continue
            found.append(part)
        return found

    def describe(self) -> ImageDescription:
        self._ensure_open()
        try:
            size = self.path.stat().st_size
        except OSError as exc:
            raise IoError(f"cannot stat {self.path}: {exc}") from exc
        return ImageDescription(
            name=self.name,
            path=str(self.path),
            uuid=str(self.uuid),
            format_version=FORMAT_VERSION,
            created_at=self.created_at,
            modified_at=self.modified_at,
            file_size=size,
            partitions=self.partitions,
        )

    # --- partition operations ----------------------------------------------

    def add_partition(self, payload: bytes, *, datatype: int, fstype: int,
                      parttype: int, arch: int, name: str) -> int:
        """Append a partition and return its id."""
        self._ensure_open()
        _checked_codes(datatype, fstype, parttype, arch)
        _checked_name(name, "partition")
        if parttype == PART_SYSTEM_PRIMARY and any(
                p.parttype == PART_SYSTEM_PRIMARY for p in self._partitions):
            raise DuplicatePrimary(f"{self.name} already holds a primary partition")
        pid = max((p.partition_id for p in self._partitions), default=0) + 1
        offset = self._table_offset
        descriptor = PartitionDescriptor(
            pid, datatype, fstype, parttype, arch, name,
            offset, len(payload), hashlib.sha256(payload).digest())
        new_table_offset = offset + len(payload)
        try:
            with open(self.path, "r+b") as fh:
                fh.seek(offset)
                fh.write(payload)
                for part in self._partitions:
                    fh.write(part.pack())
                fh.write(descriptor.pack())
                table_end = fh.tell()
                fh.truncate(table_end)
                self._partitions.append(descriptor)
                self._table_offset = new_table_offset
                self._touch()
                fh.seek(0)
                fh.write(self._header_bytes())
        except OSError as exc:
            raise IoError(f"cannot write {self.path}: {exc}") from exc
        return pid

    def dump_partition(self, partition_id: int) -> bytes:
        """Read a payload back from disk and verify its checksum."""
        self._ensure_open()
        part = self.descriptor(partition_id)
        try:
            with open(self.path, "rb") as fh:
                fh.seek(part.payload_offset)
                payload = fh.read(part.payload_size)
        except OSError as exc:
            raise IoError(f"cannot read {self.path}: {exc}") from exc
        if len(payload) != part.payload_size:
            raise TruncatedImage(f"{self.name}: partition {partition_id} cut short")
        if hashlib.sha256(payload).digest() != part.checksum:
            raise CorruptPartition(
                f"{self.name}: partition {partition_id} fails its checksum")
        return payload

    def delete_partition(self, partition_id: int) -> None:
        """Drop a descriptor; the payload hole is reclaimed on close."""
        self._ensure_open()
        part = self.descriptor(partition_id)
        self._partitions.remove(part)
        if part.payload_size:
            self._needs_compaction = True
        try:
            with open(self.path, "r+b") as fh:
                fh.seek(self._table_offset)
                for live in self._partitions:
                    fh.write(live.pack())
                fh.truncate(fh.tell())
                self._touch()
                fh.seek(0)
                fh.write(self._header_bytes())
        except OSError as exc:
            raise IoError(f"cannot write {self.path}: {exc}") from exc

    def update_partition(self, partition_id: int, payload: bytes) -> None:
        """Replace a payload in place, keeping id, codes, and name.

        The whole file is rewritten compacted and swapped in atomically.
        """
        self._ensure_open()
        part = self.descriptor(partition_id)
        updated = replace(part, payload_size=len(payload),
                          checksum=hashlib.sha256(payload).digest())
        payloads = {}
        for live in self._partitions:
            if live.partition_id == partition_id:
                payloads[partition_id] = payload
            else:
                payloads[live.partition_id] = self.dump_partition(live.partition_id)
        self._partitions = [updated if p.partition_id == partition_id else p
                            for p in self._partitions]
        self._touch()
        self._rewrite(payloads)

    def close(self) -> None:
        """Compact the file if deletes left holes, then invalidate the handle."""
        if self._closed:
            return
        if self._needs_compaction:
            payloads = {p.partition_id: self.dump_partition(p.partition_id)
                        for p in self._partitions}
            self._rewrite(payloads)
        self._closed = True

    def __enter__(self) -> "BoxImage":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()

    # --- internals -----------------------------------------------------------

    def _ensure_open(self) -> None:
        if self._closed:
            raise IoError(f"{self.name}: image handle is closed")

    def _touch(self) -> None:
        self.modified_at = max(int(time.time()), self.modified_at)

    def _header_bytes(self) -> bytes:
        return _HEADER.pack(
            MAGIC, FORMAT_VERSION, self.uuid.bytes,
            self.created_at, self.modified_at,
            len(self._partitions), self._table_offset, HEADER_SIZE)

    def _rewrite(self, payloads: dict[int, bytes]) -> None:
        """Write a compacted copy and atomically replace the backing file."""
        compacted: list[PartitionDescriptor] = []
        offset = HEADER_SIZE
        for part in self._partitions:
            body = payloads[part.partition_id]
            compacted.append(replace(part, payload_offset=offset, payload_size=len(body)))
            offset += len(body)
        self._partitions = compacted
        self._table_offset = offset
        parent = self.path.resolve().parent
        try:
            fd, temp_name = tempfile.mkstemp(dir=parent, prefix=f".{self.path.name}.")
            try:
                with os.fdopen(fd, "wb") as fh:
                    fh.write(self._header_bytes())
                    for part in compacted:
                        fh.write(payloads[part.partition_id])
                    for part in compacted:
                        fh.write(part.pack())
                    fh.flush()
                    os.fsync(fh.fileno())
                os.replace(temp_name, self.path)
            except BaseException:
                try:
                    os.unlink(temp_name)
                except OSError:
                    pass
                raise
        except OSError as exc:
            raise IoError(f"cannot rewrite {self.path}: {exc}") from exc
        self._needs_compaction = False


def create_image(name: str, path: Path | str | None = None) -> BoxImage:
    """Create a new empty image file; see BoxImage.create."""
    return BoxImage.create(name, path)


def open_image(path: Path | str) -> BoxImage:
    """Open and validate an existing image file; see BoxImage.open."""
    return BoxImage.open(path)
