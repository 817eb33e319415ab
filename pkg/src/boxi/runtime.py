"""Connect images through bindings, execute applications, write back results.

A workflow declares components (input, application, output), bindings that
make a directory of one component visible inside another, and invocations
of applications. Execution happens in a throwaway sandbox directory:

  zero-copy   each bound partition is materialized once into a shared
              directory and every view reaches it through a symlink; after
              the run each writable directory is repacked into its image.
              One materialization plus one repack per writable binding.

  two-copy    every binding moves data through a staging directory: the
              partition is dumped to staging, copied into the view, and for
              writable bindings copied back to staging and then repacked.
              Four whole-payload copies per input-to-output path.

Writable views start empty in both modes; on teardown they replace the
bound subtree of their partition, so both modes produce identical output
bytes. The sandbox root honours the BOXI_SANDBOX environment variable.
"""

from __future__ import annotations

import json
import os
import shutil
import stat
import subprocess
import tempfile
import time
import uuid as uuidlib
from dataclasses import dataclass
from pathlib import Path

from . import archive
from .archive import ArchiveEntry
from .errors import (
    ConflictingWrites,
    CyclicBinding,
    InvalidName,
    InvalidWorkflowSpec,
    IoError,
    NoRunscript,
    SandboxError,
    UnknownComponent,
    WrongPartitionType,
)
from .image import BoxImage, PART_DATA, PART_SYSTEM_PRIMARY, open_image
from .packager import MANIFEST_PATH, SoftwareManifest

ZERO_COPY = "zero-copy"
TWO_COPY = "two-copy"
MODES = (ZERO_COPY, TWO_COPY)

ROLE_INPUT = "input"
ROLE_APPLICATION = "application"
ROLE_OUTPUT = "output"
ROLES = (ROLE_INPUT, ROLE_APPLICATION, ROLE_OUTPUT)

SANDBOX_ENV = "BOXI_SANDBOX"


# --- workflow documents --------------------------------------------------------

@dataclass(frozen=True)
class Component:
    id: str
    role: str
    image: str


@dataclass(frozen=True)
class Binding:
    """source's tree at source_path appears at target_path inside target."""

    source: str
    source_path: str  # normalized inner path, "" means the partition root
    target: str
    target_path: str

    def label(self) -> str:
        return (f"{self.source}:/{self.source_path} -> "
                f"{self.target}:/{self.target_path}")


@dataclass(frozen=True)
class Invocation:
    app: str
    argv: tuple[str, ...]


@dataclass
class WorkflowSpec:
    label: str
    components: list[Component]
    bindings: list[Binding]
    invocations: list[Invocation]

    def component(self, component_id: str) -> Component:
        for comp in self.components:
            if comp.id == component_id:
                return comp
        raise UnknownComponent(f"no component {component_id!r} in {self.label!r}")


def _inner(path: str, what: str) -> str:
    """Normalize a binding inner path; "" or "/" selects the whole tree."""
    stripped = path.strip("/")
    if not stripped:
        return ""
    for part in stripped.split("/"):
        if part in ("", ".", ".."):
            raise InvalidWorkflowSpec(f"{what}: bad inner path {path!r}")
    return stripped


def _endpoint(text: str, what: str) -> tuple[str, str]:
    component, sep, inner = text.partition(":")
    if not sep or not component:
        raise InvalidWorkflowSpec(f"{what} must look like \"id:/path\": {text!r}")
    return component, _inner(inner, what)


def load_workflow(path: Path | str) -> WorkflowSpec:
    """Read a workflow JSON file; image paths resolve against its directory."""
    path = Path(path)
    try:
        text = path.read_text("utf-8")
    except OSError as exc:
        raise IoError(f"cannot read workflow file {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidWorkflowSpec(f"{path} is not valid JSON: {exc}") from exc
    return workflow_from_mapping(doc, base_dir=path.parent)


def workflow_from_mapping(doc: object, base_dir: Path | str = ".") -> WorkflowSpec:
    """Build and validate a WorkflowSpec from a parsed JSON document."""
    base_dir = Path(base_dir)
    if not isinstance(doc, dict):
        raise InvalidWorkflowSpec("workflow document must be a JSON object")
    label = doc.get("label")
    if not isinstance(label, str) or not label:
        raise InvalidWorkflowSpec("workflow needs a non-empty string label")

    components = []
    for raw in _expect_list(doc, "components"):
        cid, role, image = (_expect_str(raw, key, "component")
                            for key in ("id", "role", "image"))
        components.append(Component(cid, role, str(base_dir / image)))

    bindings = []
    for raw in _expect_list(doc, "bindings"):
        src, src_path = _endpoint(_expect_str(raw, "source", "binding"), "binding source")
        dst, dst_path = _endpoint(_expect_str(raw, "target", "binding"), "binding target")
        bindings.append(Binding(src, src_path, dst, dst_path))

    invocations = []
    for raw in _expect_list(doc, "invocations"):
        app = _expect_str(raw, "app", "invocation")
        argv = raw.get("argv", [])
        if not isinstance(argv, list) or any(not isinstance(a, str) for a in argv):
            raise InvalidWorkflowSpec(f"invocation of {app!r}: argv must be a string list")
        invocations.append(Invocation(app, tuple(argv)))

    spec = WorkflowSpec(label, components, bindings, invocations)
    validate_spec(spec)
    return spec


def _expect_list(doc: dict, key: str) -> list:
    value = doc.get(key, [])
    if not isinstance(value, list):
        raise InvalidWorkflowSpec(f"{key} must be a list")
    return value


def _expect_str(raw: object, key: str, what: str) -> str:
    if not isinstance(raw, dict):
        raise InvalidWorkflowSpec(f"each {what} must be a JSON object")
    value = raw.get(key)
    if not isinstance(value, str) or not value:
        raise InvalidWorkflowSpec(f"{what} needs a non-empty string {key!r}")
    return value


def validate_spec(spec: WorkflowSpec) -> None:
    """Check the structural rules a workflow must satisfy before planning."""
    if not spec.label:
        raise InvalidWorkflowSpec("workflow label is empty")
    seen_ids: set[str] = set()
    for comp in spec.components:
        if not comp.id or ":" in comp.id:
            raise InvalidWorkflowSpec(f"bad component id {comp.id!r}")
        if comp.id in seen_ids:
            raise InvalidWorkflowSpec(f"duplicate component id {comp.id!r}")
        seen_ids.add(comp.id)
        if comp.role not in ROLES:
            raise InvalidWorkflowSpec(f"component {comp.id!r}: unknown role {comp.role!r}")

    roles = {c.id: c.role for c in spec.components}
    for binding in spec.bindings:
        for endpoint in (binding.source, binding.target):
            if endpoint not in roles:
                raise UnknownComponent(f"binding references undeclared {endpoint!r}")
        if not binding.target_path:
            raise InvalidWorkflowSpec(
                f"binding into {binding.target!r} needs a non-root target path")

    for invocation in spec.invocations:
        if invocation.app not in roles:
            raise UnknownComponent(f"invocation references undeclared {invocation.app!r}")
        if roles[invocation.app] != ROLE_APPLICATION:
            raise InvalidWorkflowSpec(
                f"invocation of {invocation.app!r}: role is {roles[invocation.app]}")

    # target paths inside one application view must not collide or nest
    per_app: dict[str, list[str]] = {}
    for binding in spec.bindings:
        per_app.setdefault(binding.target, []).append(binding.target_path)
    for app, paths in per_app.items():
        paths.sort()
        for first, second in zip(paths, paths[1:]):
            if second == first or second.startswith(first + "/"):
                raise InvalidWorkflowSpec(
                    f"bindings into {app!r} collide at {second!r}")

    _check_acyclic(spec)

    # one writer per output component across the whole run
    invoked: dict[str, int] = {}
    for invocation in spec.invocations:
        invoked[invocation.app] = invoked.get(invocation.app, 0) + 1
    for comp in spec.components:
        if comp.role != ROLE_OUTPUT:
            continue
        writers = sum(invoked.get(b.target, 0)
                      for b in spec.bindings if b.source == comp.id)
        if writers > 1:
            raise ConflictingWrites(
                f"output {comp.id!r} would be written by {writers} invocations")


def _check_acyclic(spec: WorkflowSpec) -> None:
    edges: dict[str, set[str]] = {c.id: set() for c in spec.components}
    indegree = {c.id: 0 for c in spec.components}
    for binding in spec.bindings:
        if binding.target not in edges[binding.source]:
            edges[binding.source].add(binding.target)
            indegree[binding.target] += 1
    ready = [cid for cid, degree in indegree.items() if degree == 0]
    visited = 0
    while ready:
        node = ready.pop()
        visited += 1
        for nxt in edges[node]:
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                ready.append(nxt)
    if visited != len(indegree):
        stuck = sorted(cid for cid, degree in indegree.items() if degree > 0)
        raise CyclicBinding(f"binding cycle through {', '.join(stuck)}")


# --- planning -------------------------------------------------------------------

@dataclass(frozen=True)
class Mount:
    """One directory made visible inside an application view."""

    sandbox_path: str      # path inside the view
    component_id: str
    partition_id: int
    writable: bool
    source_path: str       # inner path within the backing partition tree


@dataclass(frozen=True)
class SharedMount:
    component_id: str
    partition_id: int
    source_path: str
    writable: bool


@dataclass(frozen=True)
class CopyEdge:
    src: str
    dst: str


@dataclass(frozen=True)
class MountPlan:
    mode: str
    per_invocation: tuple[tuple[Mount, ...], ...]
    shared_mounts: tuple[SharedMount, ...]   # zero-copy only
    copy_edges: tuple[CopyEdge, ...]         # two-copy only


def _backing_partition(image: BoxImage, role: str) -> int:
    """Pick the partition a binding source exposes: data for data components,
    the primary system partition for applications."""
    wanted = PART_SYSTEM_PRIMARY if role == ROLE_APPLICATION else PART_DATA
    found = image.find(parttype=wanted)
    if len(found) != 1:
        kind = "primary" if role == ROLE_APPLICATION else "data"
        raise WrongPartitionType(
            f"{image.name}: expected exactly one {kind} partition, found {len(found)}")
    return found[0].partition_id


def plan_mounts(spec: WorkflowSpec, mode: str = ZERO_COPY) -> MountPlan:
    """Resolve bindings into per-invocation mounts plus mode-specific work."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    validate_spec(spec)

    roles = {c.id: c.role for c in spec.components}
    partition_ids: dict[str, int] = {}

    def backing(component_id: str) -> int:
        if component_id not in partition_ids:
            comp = spec.component(component_id)
            with open_image(comp.image) as image:
                partition_ids[component_id] = _backing_partition(image, comp.role)
        return partition_ids[component_id]

    per_invocation: list[tuple[Mount, ...]] = []
    for invocation in spec.invocations:
        mounts = []
        for binding in spec.bindings:
            if binding.target != invocation.app:
                continue
            mounts.append(Mount(
                sandbox_path=binding.target_path,
                component_id=binding.source,
                partition_id=backing(binding.source),
                writable=roles[binding.source] == ROLE_OUTPUT,
                source_path=binding.source_path,
            ))
        mounts.sort(key=lambda m: m.sandbox_path)
        per_invocation.append(tuple(mounts))

    shared: list[SharedMount] = []
    edges: list[CopyEdge] = []
    if mode == ZERO_COPY:
        seen: set[tuple] = set()
        for mounts in per_invocation:
            for m in mounts:
                key = ((m.component_id, m.partition_id, m.source_path, True)
                       if m.writable else (m.component_id, m.partition_id))
                if key in seen:
                    continue
                seen.add(key)
                shared.append(SharedMount(m.component_id, m.partition_id,
                                          m.source_path, m.writable))
    else:
        stage = 0
        for index, mounts in enumerate(per_invocation):
            app = spec.invocations[index].app
            for m in mounts:
                backing_label = f"{m.component_id}:{m.partition_id}:/{m.source_path}"
                view_label = f"{app}[{index}]:/{m.sandbox_path}"
                if m.writable:
                    edges.append(CopyEdge(view_label, f"staging/{stage}"))
                    edges.append(CopyEdge(f"staging/{stage}", backing_label))
                else:
                    edges.append(CopyEdge(backing_label, f"staging/{stage}"))
                    edges.append(CopyEdge(f"staging/{stage}", view_label))
                stage += 1

    return MountPlan(mode, tuple(per_invocation), tuple(shared), tuple(edges))


# --- execution --------------------------------------------------------------------

@dataclass(frozen=True)
class InvocationRecord:
    """What actually ran: the runscript-relative argv, wall time, exit status."""

    component_id: str
    argv: tuple[str, ...]
    started_ns: int
    finished_ns: int
    exit_status: int
    stderr_tail: str = ""


@dataclass(frozen=True)
class OutputWrite:
    component_id: str
    partition_ids: tuple[int, ...]


@dataclass
class ExecutionReport:
    label: str
    mode: str
    invocations: list[InvocationRecord]
    copy_events: int
    outputs_written: list[OutputWrite]
    bindings_used: list[str]
    sandbox_dir: str | None = None

    def to_mapping(self) -> dict:
        return {
            "label": self.label,
            "mode": self.mode,
            "invocations": [
                {
                    "component_id": rec.component_id,
                    "argv": list(rec.argv),
                    "started_ns": rec.started_ns,
                    "finished_ns": rec.finished_ns,
                    "exit_status": rec.exit_status,
                }
                for rec in self.invocations
            ],
            "copy_events": self.copy_events,
            "outputs_written": [
                {"component_id": ow.component_id,
                 "partition_ids": list(ow.partition_ids)}
                for ow in self.outputs_written
            ],
            "bindings_used": list(self.bindings_used),
        }


def _make_run_dir(sandbox_root: Path | str | None) -> Path:
    base = Path(sandbox_root) if sandbox_root is not None else \
        Path(os.environ.get(SANDBOX_ENV) or tempfile.gettempdir())
    run_dir = base / f"boxi-run-{uuidlib.uuid4().hex[:12]}"
    try:
        run_dir.mkdir(parents=True, exist_ok=False)
    except OSError as exc:
        raise SandboxError(f"cannot create sandbox at {run_dir}: {exc}") from exc
    return run_dir


def _subtree(root: Path, inner: str, what: str) -> Path:
    if not inner:
        return root
    path = root / inner
    if not path.is_dir():
        raise SandboxError(f"{what}: bound path /{inner} is not a directory")
    return path


def _replace_subtree(entries: list[ArchiveEntry], inner: str,
                     source_dir: Path) -> list[ArchiveEntry]:
    """Entries with the subtree at inner replaced by the contents of source_dir."""
    if not inner:
        return archive.scan_dir(source_dir)
    kept = [e for e in entries
            if e.path != inner and not e.path.startswith(inner + "/")]
    default_dir = stat.S_IFDIR | 0o755
    dir_mode = next((e.mode for e in entries if e.path == inner and e.is_dir), None)
    present = {e.path for e in kept}
    parts = inner.split("/")
    for depth in range(1, len(parts)):
        parent = "/".join(parts[:depth])
        if parent not in present:
            kept.append(ArchiveEntry(parent, default_dir, None))
            present.add(parent)
    kept.append(ArchiveEntry(inner, dir_mode if dir_mode is not None else default_dir, None))
    kept.extend(archive.scan_dir(source_dir, prefix=inner + "/"))
    return kept


def _copy_tree(src: Path, dst: Path, what: str) -> None:
    try:
        shutil.copytree(src, dst, symlinks=False, dirs_exist_ok=True)
    except OSError as exc:
        raise SandboxError(f"{what}: {exc}") from exc


def _read_manifest(view: Path, app_id: str) -> SoftwareManifest:
    manifest_file = view / MANIFEST_PATH
    if not manifest_file.is_file():
        raise NoRunscript(f"application {app_id!r} ships no {MANIFEST_PATH}")
    return SoftwareManifest.from_text(manifest_file.read_text("utf-8"))


def _execute(view: Path, app_id: str, argv: tuple[str, ...]) -> InvocationRecord:
    manifest = _read_manifest(view, app_id)
    script = view / manifest.runscript
    if not script.is_file():
        raise NoRunscript(f"application {app_id!r}: runscript {manifest.runscript!r} missing")
    if not os.access(script, os.X_OK):
        raise NoRunscript(f"application {app_id!r}: runscript is not executable")
    env = dict(os.environ)
    env.update(manifest.environment)
    started = time.time_ns()
    try:
        proc = subprocess.run(
            [str(script), *argv],
            cwd=view, env=env,
            stdout=subprocess.DEVNULL, stderr=subprocess.PIPE,
        )
    except OSError as exc:
        raise SandboxError(f"cannot execute {script}: {exc}") from exc
    finished = time.time_ns()
    tail = proc.stderr.decode("utf-8", errors="replace")[-2000:]
    return InvocationRecord(
        component_id=app_id,
        argv=(manifest.runscript, *argv),
        started_ns=started,
        finished_ns=finished,
        exit_status=proc.returncode,
        stderr_tail=tail,
    )


def run_workflow(spec: WorkflowSpec, mode: str = ZERO_COPY, *,
                 sandbox_root: Path | str | None = None,
                 keep_sandbox: bool = False) -> ExecutionReport:
    """Execute every invocation, repack written outputs, report what happened.

    The report is returned even when applications exit nonzero; only
    infrastructure failures raise.
    """
    plan = plan_mounts(spec, mode)
    run_dir = _make_run_dir(sandbox_root)
    copy_events = 0
    records: list[InvocationRecord] = []
    bindings_used: list[str] = []
    # (component, partition) -> ordered list of (inner path, result directory)
    pending_writes: dict[tuple[str, int], list[tuple[str, Path]]] = {}
    shared_dirs: dict[tuple, Path] = {}
    stage_counter = 0

    try:
        if mode == ZERO_COPY:
            for index, sm in enumerate(plan.shared_mounts):
                comp = spec.component(sm.component_id)
                if sm.writable:
                    spot = run_dir / "shared" / f"w{index}"
                    spot.mkdir(parents=True)
                    shared_dirs[(sm.component_id, sm.partition_id,
                                 sm.source_path, True)] = spot
                    pending_writes.setdefault(
                        (sm.component_id, sm.partition_id), []).append(
                        (sm.source_path, spot))
                else:
                    spot = run_dir / "shared" / f"r{index}"
                    with open_image(comp.image) as image:
                        archive.extract_dir(image.dump_partition(sm.partition_id), spot)
                    copy_events += 1
                    shared_dirs[(sm.component_id, sm.partition_id)] = spot

        for index, invocation in enumerate(spec.invocations):
            mounts = plan.per_invocation[index]
            view = run_dir / "views" / str(index)
            app = spec.component(invocation.app)
            with open_image(app.image) as image:
                primary = _backing_partition(image, ROLE_APPLICATION)
                archive.extract_dir(image.dump_partition(primary), view)

            for m in mounts:
                spot = view / m.sandbox_path
                if spot.exists() or spot.is_symlink():
                    raise SandboxError(
                        f"mount point /{m.sandbox_path} collides with the "
                        f"tree of {invocation.app!r}")
                spot.parent.mkdir(parents=True, exist_ok=True)
                if mode == ZERO_COPY:
                    if m.writable:
                        target = shared_dirs[(m.component_id, m.partition_id,
                                              m.source_path, True)]
                    else:
                        base = shared_dirs[(m.component_id, m.partition_id)]
                        target = _subtree(base, m.source_path, m.component_id)
                    os.symlink(target, spot, target_is_directory=True)
                else:
                    if m.writable:
                        spot.mkdir()
                        continue
                    stage = run_dir / "staging" / str(stage_counter)
                    stage_counter += 1
                    comp = spec.component(m.component_id)
                    with open_image(comp.image) as image:
                        archive.extract_dir(image.dump_partition(m.partition_id), stage)
                    copy_events += 1
                    _copy_tree(_subtree(stage, m.source_path, m.component_id),
                               spot, f"copy into view of {invocation.app!r}")
                    copy_events += 1

            records.append(_execute(view, invocation.app, invocation.argv))
            for binding in spec.bindings:
                if binding.target == invocation.app:
                    bindings_used.append(binding.label())

            if mode == TWO_COPY:
                for m in mounts:
                    if not m.writable:
                        continue
                    stage = run_dir / "staging" / str(stage_counter)
                    stage_counter += 1
                    _copy_tree(view / m.sandbox_path, stage,
                               f"copy out of view of {invocation.app!r}")
                    copy_events += 1
                    pending_writes.setdefault(
                        (m.component_id, m.partition_id), []).append(
                        (m.source_path, stage))

        outputs_written: list[OutputWrite] = []
        written_by_component: dict[str, list[int]] = {}
        for (component_id, partition_id), results in pending_writes.items():
            comp = spec.component(component_id)
            with open_image(comp.image) as image:
                entries = archive.decode(image.dump_partition(partition_id))
                for inner, result_dir in results:
                    entries = _replace_subtree(entries, inner, result_dir)
                    copy_events += 1
                image.update_partition(partition_id, archive.encode_entries(entries))
            written_by_component.setdefault(component_id, []).append(partition_id)
        for component_id, pids in written_by_component.items():
            outputs_written.append(OutputWrite(component_id, tuple(sorted(pids))))

        return ExecutionReport(
            label=spec.label,
            mode=mode,
            invocations=records,
            copy_events=copy_events,
            outputs_written=outputs_written,
            bindings_used=bindings_used,
            sandbox_dir=str(run_dir) if keep_sandbox else None,
        )
    finally:
        if not keep_sandbox:
            shutil.rmtree(run_dir, ignore_errors=True)


# --- direct transfers -----------------------------------------------------------

def _transfer_endpoints(src_path: Path | str, src_partition: int,
                        dst_path: Path | str) -> tuple[BoxImage, BoxImage, int]:
    src = open_image(src_path)
    part = src.descriptor(src_partition)
    if part.parttype != PART_DATA:
        raise WrongPartitionType(
            f"{src.name}: partition {src_partition} is not a data partition")
    dst = open_image(dst_path)
    data = dst.find(parttype=PART_DATA)
    if len(data) != 1:
        raise WrongPartitionType(
            f"{dst.name}: expected exactly one data partition, found {len(data)}")
    return src, dst, data[0].partition_id


def _transfer_inner(path: str) -> str:
    stripped = path.strip("/")
    if not stripped:
        return ""
    for part in stripped.split("/"):
        if part in ("", ".", ".."):
            raise InvalidName(f"bad destination inner path {path!r}")
    return stripped


def zero_copy_transfer(src_image: Path | str, src_partition: int,
                       dst_image: Path | str, dst_inner_path: str, *,
                       sandbox_root: Path | str | None = None,
                       keep_sandbox: bool = False) -> ExecutionReport:
    """Move a data partition's tree under dst_inner_path of the destination.

    The tree is materialized once, directly at the spot that is rebuilt
    into the destination partition: two copy events, no staging.
    """
    src, dst, dst_pid = _transfer_endpoints(src_image, src_partition, dst_image)
    inner = _transfer_inner(dst_inner_path)
    run_dir = _make_run_dir(sandbox_root)
    try:
        shared = run_dir / "shared"
        archive.extract_dir(src.dump_partition(src_partition), shared)
        entries = _replace_subtree(
            archive.decode(dst.dump_partition(dst_pid)), inner, shared)
        dst.update_partition(dst_pid, archive.encode_entries(entries))
        return ExecutionReport(
            label="zero-copy-transfer",
            mode=ZERO_COPY,
            invocations=[],
            copy_events=2,
            outputs_written=[OutputWrite(dst.name, (dst_pid,))],
            bindings_used=[f"{src.name}:{src_partition} -> {dst.name}:/{inner}"],
            sandbox_dir=str(run_dir) if keep_sandbox else None,
        )
    finally:
        if not keep_sandbox:
            shutil.rmtree(run_dir, ignore_errors=True)


def two_copy_transfer(src_image: Path | str, src_partition: int,
                      dst_image: Path | str, dst_inner_path: str, *,
                      sandbox_root: Path | str | None = None,
                      keep_sandbox: bool = False) -> ExecutionReport:
    """Same result as zero_copy_transfer, staging through host directories.

    Dump to staging, copy into a view, copy back out to staging, rebuild
    the destination partition: four copy events.
    """
    src, dst, dst_pid = _transfer_endpoints(src_image, src_partition, dst_image)
    inner = _transfer_inner(dst_inner_path)
    run_dir = _make_run_dir(sandbox_root)
    try:
        stage_in = run_dir / "staging" / "0"
        archive.extract_dir(src.dump_partition(src_partition), stage_in)
        view = run_dir / "view"
        _copy_tree(stage_in, view, "copy into view")
        stage_out = run_dir / "staging" / "1"
        _copy_tree(view, stage_out, "copy out of view")
        entries = _replace_subtree(
            archive.decode(dst.dump_partition(dst_pid)), inner, stage_out)
        dst.update_partition(dst_pid, archive.encode_entries(entries))
        return ExecutionReport(
            label="two-copy-transfer",
            mode=TWO_COPY,
            invocations=[],
            copy_events=4,
            outputs_written=[OutputWrite(dst.name, (dst_pid,))],
            bindings_used=[f"{src.name}:{src_partition} -> {dst.name}:/{inner}"],
            sandbox_dir=str(run_dir) if keep_sandbox else None,
        )
    finally:
        if not keep_sandbox:
            shutil.rmtree(run_dir, ignore_errors=True)
