"""End-to-end tests of the command-line interface (in-process)."""

from __future__ import annotations

import json
import subprocess
import sys
import uuid as uuidlib

import pytest

from boxi import standins
from boxi.cli import main

from .oracles import read_descriptors, read_header

PACK = "pack"


def identity_workflow(workbench, label="cli-flow") -> str:
    workbench.input_image({"a.txt": b"alpha\n", "sub/b.txt": b"beta\n"})
    workbench.app_image(standins.IDENTITY)
    workbench.output_image()
    doc = {
        "label": label,
        "components": [
            {"id": "in", "role": "input", "image": "input.boxi"},
            {"id": "app", "role": "application", "image": "app.boxi"},
            {"id": "out", "role": "output", "image": "output.boxi"},
        ],
        "bindings": [
            {"source": "in:/", "target": "app:/Inputs"},
            {"source": "out:/Outputs", "target": "app:/Outputs"},
        ],
        "invocations": [{"app": "app", "argv": ["Inputs", "Outputs/data"]}],
    }
    target = workbench.root / "workflow.json"
    target.write_text(json.dumps(doc))
    return str(target)


def test_pack_prints_the_new_image_uuid(tmp_path, capsys):
    source = tmp_path / "Stuff"
    source.mkdir()
    (source / "f.txt").write_text("hello")
    image = tmp_path / "stuff.boxi"

    assert main([PACK, str(source), str(image)]) == 0
    printed = capsys.readouterr().out.strip()
    assert uuidlib.UUID(printed).bytes == read_header(image)["uuid_bytes"]
    (record,) = read_descriptors(image)
    assert record["name"] == "Stuff"


def test_new_output_then_inspect(tmp_path, capsys):
    image = tmp_path / "out.boxi"
    assert main(["new-output", "Outputs", str(image)]) == 0
    capsys.readouterr()

    assert main(["inspect", str(image), "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["name"] == "out"
    assert doc["format_version"] == 1
    assert doc["file_size"] == image.stat().st_size
    (part,) = doc["partitions"]
    assert part["name"] == "Outputs"
    assert part["parttype"] == 3


def test_inspect_text_lists_partitions(tmp_path, capsys):
    image = tmp_path / "out.boxi"
    main(["new-output", "Outputs", str(image)])
    capsys.readouterr()
    assert main(["inspect", str(image)]) == 0
    text = capsys.readouterr().out
    assert "partitions (1):" in text
    assert "partition/archive-rw/data/x86-64" in text


def test_build_from_a_recipe_file(tmp_path, capsys):
    standins.write_script(tmp_path / "plot.py", standins.PLOTTER)
    (tmp_path / "app.recipe").write_text(
        "[base]\nfrom = ubuntu:16.04\n"
        "[packages]\ngnuplot\n"
        "[files]\nplot.py = /plot.py\n"
        "[runscript]\npath = /plot.py\n")
    image = tmp_path / "app.boxi"
    assert main(["build", str(tmp_path / "app.recipe"), str(image)]) == 0
    uuidlib.UUID(capsys.readouterr().out.strip())
    (record,) = read_descriptors(image)
    assert record["parttype"] == 2  # system-primary
    assert record["name"] == "system"


def test_build_reports_recipe_errors_with_exit_2(tmp_path, capsys):
    (tmp_path / "bad.recipe").write_text("[base]\nfrom = a\n[mystery]\n")
    assert main(["build", str(tmp_path / "bad.recipe"),
                 str(tmp_path / "app.boxi")]) == 2
    assert "line 3" in capsys.readouterr().err


def test_run_executes_and_attaches_trails(workbench, capsys):
    flow = identity_workflow(workbench)
    assert main(["run", flow]) == 0
    out = capsys.readouterr().out
    assert "app: exit 0" in out
    assert "wrote out: partition 1, trail in partition 2" in out
    assert "copy events: 2" in out

    records = read_descriptors(workbench.root / "output.boxi")
    metadata = [r for r in records if r["parttype"] == 4]
    assert len(metadata) == 1
    trail = json.loads(metadata[0]["payload"])
    assert trail["workflow_label"] == "cli-flow"
    assert [r["name"] for r in trail["record_trail"]] == [
        "input", "app", "output"]


def test_run_json_document(workbench, capsys):
    flow = identity_workflow(workbench)
    assert main(["run", flow, "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["label"] == "cli-flow"
    assert doc["mode"] == "zero-copy"
    assert doc["copy_events"] == 2
    assert doc["trails_attached"] == [{"component_id": "out", "partition_id": 2}]


def test_run_no_trail_leaves_outputs_plain(workbench, capsys):
    flow = identity_workflow(workbench)
    assert main(["run", flow, "--no-trail"]) == 0
    out = capsys.readouterr().out
    assert "trail in partition" not in out
    records = read_descriptors(workbench.root / "output.boxi")
    assert [r["parttype"] for r in records] == [3]


def test_run_two_copy_mode(workbench, capsys):
    flow = identity_workflow(workbench)
    assert main(["run", flow, "--mode", "two-copy"]) == 0
    assert "copy events: 4" in capsys.readouterr().out


def test_run_returns_3_when_an_app_fails(workbench, capsys):
    workbench.input_image({"a": b"x"})
    workbench.app_image(standins.FAILER)
    workbench.output_image()
    doc = {
        "label": "failing",
        "components": [
            {"id": "app", "role": "application", "image": "app.boxi"},
            {"id": "out", "role": "output", "image": "output.boxi"},
        ],
        "bindings": [{"source": "out:/Outputs", "target": "app:/Outputs"}],
        "invocations": [{"app": "app", "argv": ["5", "Outputs"]}],
    }
    flow = workbench.root / "workflow.json"
    flow.write_text(json.dumps(doc))
    assert main(["run", str(flow)]) == 3
    assert "app: exit 5" in capsys.readouterr().out


def test_run_rejects_invalid_workflow_with_exit_2(tmp_path, capsys):
    flow = tmp_path / "bad.json"
    flow.write_text(json.dumps({"label": "x", "components": [
        {"id": "a", "role": "nope", "image": "a.boxi"}]}))
    assert main(["run", str(flow)]) == 2
    assert "boxi:" in capsys.readouterr().err


def test_trail_table_output(workbench, capsys):
    flow = identity_workflow(workbench)
    main(["run", flow])
    capsys.readouterr()
    assert main(["trail", str(workbench.root / "output.boxi")]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].split() == ["role", "name", "uuid", "created", "modified"]
    assert len(lines) == 1 + 3 + 3  # header, three records, three footer lines
    assert lines[1].startswith("input")
    assert lines[3].startswith("output")
    assert lines[4] == "command: run.py Inputs Outputs/data"
    assert lines[6] == "exit_status: 0"


def test_trail_json_is_the_stored_payload(workbench, capsys):
    flow = identity_workflow(workbench)
    main(["run", flow])
    capsys.readouterr()
    assert main(["trail", str(workbench.root / "output.boxi"), "--json"]) == 0
    printed = capsys.readouterr().out.encode("utf-8")
    stored = next(r["payload"]
                  for r in read_descriptors(workbench.root / "output.boxi")
                  if r["parttype"] == 4)
    assert printed == stored


def test_trail_without_metadata_is_a_validation_error(tmp_path, capsys):
    image = tmp_path / "out.boxi"
    main(["new-output", "Outputs", str(image)])
    capsys.readouterr()
    assert main(["trail", str(image)]) == 2


def test_dump_to_file_and_stdout(tmp_path, capsys):
    source = tmp_path / "Data"
    source.mkdir()
    (source / "x.bin").write_bytes(bytes(range(100)))
    image = tmp_path / "data.boxi"
    main([PACK, str(source), str(image)])
    capsys.readouterr()

    dest = tmp_path / "payload.bin"
    assert main(["dump", str(image), "1", str(dest)]) == 0
    (record,) = read_descriptors(image)
    assert dest.read_bytes() == record["payload"]


def test_dump_missing_partition_exits_2(tmp_path, capsys):
    image = tmp_path / "out.boxi"
    main(["new-output", "Outputs", str(image)])
    capsys.readouterr()
    assert main(["dump", str(image), "9", str(tmp_path / "x")]) == 2
    assert "boxi:" in capsys.readouterr().err


def test_add_with_both_flag_spellings(tmp_path, capsys):
    image = tmp_path / "out.boxi"
    main(["new-output", "Outputs", str(image)])
    payload = tmp_path / "notes.json"
    payload.write_bytes(b"{}")
    capsys.readouterr()

    assert main(["add", str(image), str(payload), "--datatype", "3",
                 "--partfs", "1", "--parttype", "4", "--partarch", "0"]) == 0
    assert capsys.readouterr().out.strip() == "2"

    assert main(["add", str(image), str(payload), "--datatype", "3",
                 "--fstype", "1", "--parttype", "4", "--arch", "0",
                 "--name", "named"]) == 0
    assert capsys.readouterr().out.strip() == "3"

    records = {r["id"]: r for r in read_descriptors(image)}
    assert records[2]["name"] == "notes"  # payload file stem
    assert records[3]["name"] == "named"
    assert records[2]["payload"] == b"{}"


def test_add_unknown_code_exits_2(tmp_path, capsys):
    image = tmp_path / "out.boxi"
    main(["new-output", "Outputs", str(image)])
    payload = tmp_path / "p.bin"
    payload.write_bytes(b"x")
    capsys.readouterr()
    assert main(["add", str(image), str(payload), "--datatype", "9",
                 "--partfs", "1", "--parttype", "4", "--partarch", "0"]) == 2


def test_del_removes_a_partition(tmp_path, capsys):
    image = tmp_path / "out.boxi"
    main(["new-output", "Outputs", str(image)])
    payload = tmp_path / "p.bin"
    payload.write_bytes(b"x" * 50)
    main(["add", str(image), str(payload), "--datatype", "3",
          "--partfs", "1", "--parttype", "4", "--partarch", "0"])
    capsys.readouterr()

    assert main(["del", str(image), "2"]) == 0
    assert [r["id"] for r in read_descriptors(image)] == [1]
    assert main(["del", str(image), "2"]) == 2


def test_inspect_corrupt_file_exits_4(tmp_path, capsys):
    bogus = tmp_path / "bogus.boxi"
    bogus.write_bytes(b"not an image at all")
    assert main(["inspect", str(bogus)]) == 4
    assert "boxi:" in capsys.readouterr().err


def test_dump_checksum_failure_exits_4(tmp_path, capsys):
    source = tmp_path / "Data"
    source.mkdir()
    (source / "x.bin").write_bytes(b"payload-bytes")
    image = tmp_path / "data.boxi"
    main([PACK, str(source), str(image)])
    capsys.readouterr()
    (record,) = read_descriptors(image)
    with open(image, "r+b") as fh:
        fh.seek(record["offset"])
        fh.write(b"Z")
    assert main(["dump", str(image), "1", "-"]) == 4


def test_usage_errors_exit_1(capsys):
    assert main([]) == 1
    assert main(["no-such-command"]) == 1
    capsys.readouterr()


def test_help_exits_0(capsys):
    assert main(["--help"]) == 0
    assert "pack" in capsys.readouterr().out


def test_bench_time_json(capsys):
    assert main(["bench", "time", "--compute-seconds", "0.01",
                 "--reps", "2", "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["samples"] == 2
    assert len(doc["native_ns"]) == 2
    assert doc["label"] == "bench-time"


def test_bench_space_text_and_json(workbench, capsys):
    flow = identity_workflow(workbench)
    assert main(["bench", "space", flow]) == 0
    text = capsys.readouterr().out
    assert "fixed overhead of an empty data image: 228 bytes" in text

    assert main(["bench", "space", flow, "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert [row["label"] for row in doc["rows"]] == ["in", "app", "out"]
    assert doc["fixed_overhead_bytes"] == 228


def test_bench_transfer_json(capsys):
    assert main(["bench", "transfer", "--size", "20000",
                 "--reps", "1", "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["zero_copy_events"] == 2
    assert doc["two_copy_events"] == 4
    assert doc["payload_bytes"] == 20000


def test_module_entry_point(tmp_path):
    image = tmp_path / "out.boxi"
    proc = subprocess.run(
        [sys.executable, "-m", "boxi", "new-output", "Outputs", str(image)],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert image.exists()
    uuidlib.UUID(proc.stdout.strip())
