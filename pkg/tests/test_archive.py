"""Tests for the canonical directory-tree blob codec."""

from __future__ import annotations

import stat
import struct
import uuid

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from boxi.archive import (
    MAGIC,
    ArchiveEntry,
    content_bytes,
    decode,
    encode_dir,
    encode_entries,
    extract_dir,
    extract_entries,
    scan_dir,
)
from boxi.errors import MalformedArchive, UnsupportedEntry

from .oracles import assert_same_tree

FILE = 0o100644
EXEC = 0o100755
DIR = 0o40755


def blob_for(*items: tuple[str, int, bytes]) -> bytes:
    """Hand-built blob, independent of the codec under test."""
    out = [MAGIC, struct.pack("<I", len(items))]
    for path, mode, content in items:
        raw = path.encode("utf-8")
        out.append(struct.pack("<H", len(raw)))
        out.append(raw)
        out.append(struct.pack("<IQ", mode, len(content)))
        out.append(content)
    return b"".join(out)


def test_single_file_encodes_to_known_bytes():
    blob = encode_entries([ArchiveEntry("a.txt", FILE, b"hi")])
    assert blob == blob_for(("a.txt", FILE, b"hi"))


def test_known_bytes_decode_to_entries():
    blob = blob_for(("a.txt", FILE, b"hi"), ("b", DIR, b""))
    assert decode(blob) == [
        ArchiveEntry("a.txt", FILE, b"hi"),
        ArchiveEntry("b", DIR, None),
    ]


def test_empty_tree_is_just_the_preamble():
    assert encode_entries([]) == MAGIC + struct.pack("<I", 0)
    assert decode(MAGIC + struct.pack("<I", 0)) == []


def test_input_order_does_not_matter():
    entries = [
        ArchiveEntry("z.txt", FILE, b"z"),
        ArchiveEntry("a", DIR, None),
        ArchiveEntry("a/inner.txt", FILE, b"i"),
    ]
    assert encode_entries(entries) == encode_entries(list(reversed(entries)))


def test_sorting_uses_utf8_bytes_not_code_points():
    # "é" (2 UTF-8 bytes, 0xC3...) sorts after "~" (0x7E) bytewise.
    blob = encode_entries([
        ArchiveEntry("é.txt", FILE, b"1"),
        ArchiveEntry("~.txt", FILE, b"2"),
    ])
    assert decode(blob)[0].path == "~.txt"


def test_directory_round_trip_preserves_modes(tmp_path):
    src = tmp_path / "src"
    (src / "sub").mkdir(parents=True)
    (src / "sub" / "data.bin").write_bytes(bytes(range(256)))
    (src / "run.sh").write_bytes(b"#!/bin/sh\n")
    (src / "run.sh").chmod(0o755)
    (src / "quiet.txt").write_bytes(b"q")
    (src / "quiet.txt").chmod(0o600)
    (src / "sub").chmod(0o750)

    dest = tmp_path / "dest"
    extract_dir(encode_dir(src), dest)
    assert_same_tree(src, dest)


def test_encode_dir_is_deterministic(tmp_path):
    src = tmp_path / "src"
    src.mkdir()
    for name in ("b.txt", "a.txt", "c.txt"):
        (src / name).write_text(name)
    assert encode_dir(src) == encode_dir(src)


def test_scan_dir_prefix_prepends_to_every_path(tmp_path):
    (tmp_path / "f.txt").write_text("x")
    entries = scan_dir(tmp_path, prefix="inner/")
    assert [e.path for e in entries] == ["inner/f.txt"]


def test_scan_dir_rejects_symlinks(tmp_path):
    (tmp_path / "real.txt").write_text("x")
    (tmp_path / "link").symlink_to(tmp_path / "real.txt")
    with pytest.raises(UnsupportedEntry):
        scan_dir(tmp_path)


def test_scan_dir_rejects_non_directory(tmp_path):
    target = tmp_path / "file"
    target.write_text("x")
    with pytest.raises(UnsupportedEntry):
        scan_dir(target)


def test_extract_creates_implied_parents(tmp_path):
    extract_entries([ArchiveEntry("a/b/c.txt", FILE, b"x")], tmp_path / "out")
    assert (tmp_path / "out" / "a" / "b" / "c.txt").read_bytes() == b"x"


@pytest.mark.parametrize("path", ["", "/abs", "a//b", "a/../b", ".", "a/./b"])
def test_encode_rejects_bad_paths(path):
    with pytest.raises(MalformedArchive):
        encode_entries([ArchiveEntry(path, FILE, b"")])


def test_encode_rejects_duplicate_paths():
    with pytest.raises(MalformedArchive):
        encode_entries([
            ArchiveEntry("a", FILE, b"1"),
            ArchiveEntry("a", FILE, b"2"),
        ])


def test_encode_rejects_directory_with_content():
    with pytest.raises(MalformedArchive):
        encode_entries([ArchiveEntry("d", DIR, b"oops")])


def test_encode_rejects_file_without_content():
    with pytest.raises(MalformedArchive):
        encode_entries([ArchiveEntry("f", FILE, None)])


def test_encode_rejects_special_modes():
    with pytest.raises(UnsupportedEntry):
        encode_entries([ArchiveEntry("s", stat.S_IFLNK | 0o777, b"")])


def test_decode_rejects_bad_magic():
    with pytest.raises(MalformedArchive):
        decode(b"XXXX" + struct.pack("<I", 0))


def test_decode_rejects_short_blob():
    with pytest.raises(MalformedArchive):
        decode(b"BDA")


@pytest.mark.parametrize("cut", [9, 11, 14, 19])
def test_decode_rejects_truncation_at_any_point(cut):
    blob = blob_for(("a.txt", FILE, b"hi"))
    assert cut < len(blob)
    with pytest.raises(MalformedArchive):
        decode(blob[:cut])


def test_decode_rejects_out_of_order_entries():
    blob = blob_for(("b", FILE, b""), ("a", FILE, b""))
    with pytest.raises(MalformedArchive):
        decode(blob)


def test_decode_rejects_duplicate_entries():
    blob = blob_for(("a", FILE, b""), ("a", FILE, b""))
    with pytest.raises(MalformedArchive):
        decode(blob)


def test_decode_rejects_directory_with_size():
    blob = blob_for(("d", DIR, b"x"))
    with pytest.raises(MalformedArchive):
        decode(blob)


def test_decode_rejects_unsupported_mode():
    blob = blob_for(("s", stat.S_IFLNK | 0o777, b""))
    with pytest.raises(MalformedArchive):
        decode(blob)


def test_decode_rejects_trailing_bytes():
    blob = blob_for(("a", FILE, b"x")) + b"junk"
    with pytest.raises(MalformedArchive):
        decode(blob)


def test_decode_rejects_non_utf8_path():
    raw = b"\xff\xfe"
    blob = (MAGIC + struct.pack("<I", 1) + struct.pack("<H", len(raw)) + raw
            + struct.pack("<IQ", FILE, 0))
    with pytest.raises(MalformedArchive):
        decode(blob)


def test_content_bytes_counts_files_only():
    entries = [
        ArchiveEntry("d", DIR, None),
        ArchiveEntry("d/a", FILE, b"12345"),
        ArchiveEntry("d/b", FILE, b"678"),
    ]
    assert content_bytes(entries) == 8


# File names always carry a ".f" suffix and directory segments never do,
# so no generated file path can collide with an implied directory.
_segment = st.text(alphabet="abcd", min_size=1, max_size=6)
_file_path = st.builds(
    lambda dirs, name: "/".join([*dirs, name + ".f"]),
    st.lists(_segment, max_size=2),
    _segment,
)
_trees = st.dictionaries(_file_path, st.binary(max_size=64), max_size=8)


def _tree_entries(tree: dict[str, bytes]) -> list[ArchiveEntry]:
    dirs = set()
    for path in tree:
        parts = path.split("/")
        for depth in range(1, len(parts)):
            dirs.add("/".join(parts[:depth]))
    return [ArchiveEntry(d, DIR, None) for d in sorted(dirs)] + [
        ArchiveEntry(p, FILE, c) for p, c in tree.items()
    ]


@given(_trees)
def test_round_trip_returns_canonical_entries(tree):
    entries = _tree_entries(tree)
    decoded = decode(encode_entries(entries))
    assert decoded == sorted(entries, key=lambda e: e.path.encode("utf-8"))


@given(_trees)
def test_reencoding_decoded_entries_is_identity(tree):
    blob = encode_entries(_tree_entries(tree))
    assert encode_entries(decode(blob)) == blob


@settings(suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(tree=_trees)
def test_disk_round_trip_preserves_any_tree(tree, tmp_path):
    entries = _tree_entries(tree)
    # tmp_path is shared across examples; isolate each one.
    base = tmp_path / uuid.uuid4().hex
    extract_entries(entries, base / "first")
    extract_dir(encode_dir(base / "first"), base / "second")
    assert_same_tree(base / "first", base / "second")
    by_path = {e.path: e for e in scan_dir(base / "second")}
    for path, content in tree.items():
        assert by_path[path].content == content
