"""Deterministic single-blob encoding of a directory tree.

Partition payloads are directory trees serialized into one byte string so
they can live inside an image file. The encoding is canonical: the same
tree content always produces the same bytes, regardless of filesystem
iteration order or timestamps.

Blob layout (all integers little-endian):

    offset  size  field
    0       4     magic "BDA1"
    4       4     entry count (u32)
    8       ...   entries, strictly ordered by UTF-8 path bytes

Each entry:

    2             path length in bytes (u16)
    path length   relative path, UTF-8, "/" separators
    4             mode (u32, full st_mode bits)
    8             content size (u64)
    content size  file bytes (directories always store size 0)

The root directory itself is not an entry; only its contents are.
"""

from __future__ import annotations

import stat
import struct
from dataclasses import dataclass
from pathlib import Path

from .errors import MalformedArchive, UnsupportedEntry

MAGIC = b"BDA1"

_PREAMBLE = struct.Struct("<4sI")
_PATH_LEN = struct.Struct("<H")
_ENTRY_HEAD = struct.Struct("<IQ")  # mode, content size


@dataclass(frozen=True)
class ArchiveEntry:
    """One file or directory inside an archived tree.

    content is None exactly when the entry is a directory.
    """

    path: str
    mode: int
    content: bytes | None

    @property
    def is_dir(self) -> bool:
        return stat.S_ISDIR(self.mode)


def _check_path(path: str) -> bytes:
    if not path:
        raise MalformedArchive("empty entry path")
    if path.startswith("/"):
        raise MalformedArchive(f"absolute entry path: {path!r}")
    parts = path.split("/")
    if "" in parts:
        raise MalformedArchive(f"empty path segment: {path!r}")
    if ".." in parts or "." in parts:
        raise MalformedArchive(f"path escapes the tree: {path!r}")
    raw = path.encode("utf-8")
    if len(raw) > 0xFFFF:
        raise MalformedArchive("entry path longer than 65535 bytes")
    return raw


def encode_entries(entries: list[ArchiveEntry]) -> bytes:
    """Serialize entries into a canonical blob.

    Entries may arrive in any order; they are sorted by UTF-8 path bytes
    here. Duplicate paths are rejected.
    """
    keyed = []
    for entry in entries:
        raw = _check_path(entry.path)
        if entry.is_dir:
            if entry.content is not None:
                raise MalformedArchive(f"directory with content: {entry.path!r}")
        elif not stat.S_ISREG(entry.mode):
            raise UnsupportedEntry(f"not a regular file or directory: {entry.path!r}")
        elif entry.content is None:
            raise MalformedArchive(f"file without content: {entry.path!r}")
        keyed.append((raw, entry))
    keyed.sort(key=lambda pair: pair[0])
    for (a, _), (b, _) in zip(keyed, keyed[1:]):
        if a == b:
            raise MalformedArchive(f"duplicate entry path: {a.decode('utf-8')!r}")

    parts = [_PREAMBLE.pack(MAGIC, len(keyed))]
    for raw, entry in keyed:
        content = b"" if entry.content is None else entry.content
        parts.append(_PATH_LEN.pack(len(raw)))
        parts.append(raw)
        parts.append(_ENTRY_HEAD.pack(entry.mode, len(content)))
        parts.append(content)
    return b"".join(parts)


def _scan_tree(root: Path, prefix: str) -> list[ArchiveEntry]:
    entries: list[ArchiveEntry] = []
    for child in sorted(root.iterdir(), key=lambda p: p.name.encode("utf-8")):
        rel = f"{prefix}{child.name}"
        st = child.lstat()
        if stat.S_ISDIR(st.st_mode):
            entries.append(ArchiveEntry(rel, st.st_mode, None))
            entries.extend(_scan_tree(child, rel + "/"))
        elif stat.S_ISREG(st.st_mode):
            entries.append(ArchiveEntry(rel, st.st_mode, child.read_bytes()))
        else:
            raise UnsupportedEntry(f"cannot archive {rel!r}: not a file or directory")
    return entries


def scan_dir(root: Path | str, prefix: str = "") -> list[ArchiveEntry]:
    """Collect entries for every file and directory under root.

    prefix, when given, is prepended to every path (it must end in "/").
    Symlinks, sockets, and devices raise UnsupportedEntry.
    """
    root = Path(root)
    if not root.is_dir():
        raise UnsupportedEntry(f"not a directory: {root}")
    return _scan_tree(root, prefix)


def encode_dir(root: Path | str) -> bytes:
    """Archive the contents of a directory into a canonical blob."""
    return encode_entries(scan_dir(root))


def decode(blob: bytes) -> list[ArchiveEntry]:
    """Parse a blob back into entries, verifying every encoding rule."""
    if len(blob) < _PREAMBLE.size:
        raise MalformedArchive("blob shorter than the preamble")
    magic, count = _PREAMBLE.unpack_from(blob, 0)
    if magic != MAGIC:
        raise MalformedArchive("bad archive magic")
    pos = _PREAMBLE.size
    entries: list[ArchiveEntry] = []
    prev_raw: bytes | None = None
    for index in range(count):
        if pos + _PATH_LEN.size > len(blob):
            raise MalformedArchive(f"entry {index}: truncated path length")
        (path_len,) = _PATH_LEN.unpack_from(blob, pos)
        pos += _PATH_LEN.size
        if pos + path_len > len(blob):
            raise MalformedArchive(f"entry {index}: truncated path")
        raw = blob[pos:pos + path_len]
        pos += path_len
        try:
            path = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedArchive(f"entry {index}: path is not UTF-8") from exc
        _check_path(path)
        if prev_raw is not None and raw <= prev_raw:
            raise MalformedArchive(f"entry {index}: paths out of order")
        prev_raw = raw
        if pos + _ENTRY_HEAD.size > len(blob):
            raise MalformedArchive(f"entry {index}: truncated header")
        mode, size = _ENTRY_HEAD.unpack_from(blob, pos)
        pos += _ENTRY_HEAD.size
        if stat.S_ISDIR(mode):
            if size != 0:
                raise MalformedArchive(f"entry {index}: directory with nonzero size")
            entries.append(ArchiveEntry(path, mode, None))
            continue
        if not stat.S_ISREG(mode):
            raise MalformedArchive(f"entry {index}: unsupported mode {mode:#o}")
        if pos + size > len(blob):
            raise MalformedArchive(f"entry {index}: truncated content")
        entries.append(ArchiveEntry(path, mode, blob[pos:pos + size]))
        pos += size
    if pos != len(blob):
        raise MalformedArchive(f"{len(blob) - pos} trailing bytes after last entry")
    return entries


def extract_entries(entries: list[ArchiveEntry], dest: Path | str) -> None:
    """Write entries into dest, creating it if needed.

    Parent directories implied by a path are created even if the archive
    carries no explicit entry for them.
    """
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    for entry in entries:
        target = dest / entry.path
        if entry.is_dir:
            target.mkdir(parents=True, exist_ok=True)
        else:
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(entry.content or b"")
        target.chmod(stat.S_IMODE(entry.mode))


def extract_dir(blob: bytes, dest: Path | str) -> None:
    """Decode a blob and materialize it under dest."""
    extract_entries(decode(blob), dest)


def content_bytes(entries: list[ArchiveEntry]) -> int:
    """Total file content in a tree, excluding all framing."""
    return sum(len(e.content) for e in entries if e.content is not None)
