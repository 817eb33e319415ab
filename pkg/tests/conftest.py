"""Shared fixture factory for workflow tests."""

from __future__ import annotations

from pathlib import Path

import pytest

from boxi import standins
from boxi.packager import Recipe, build_app_image, pack_data_dir, pack_empty_output
from boxi.runtime import WorkflowSpec, workflow_from_mapping


class Workbench:
    """Builds small images and workflow specs under one directory."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def app_image(self, source: str = standins.IDENTITY, name: str = "app",
                  script: str = "run.py",
                  env: list[tuple[str, str]] | None = None) -> Path:
        src_dir = self.root / f"src-{name}"
        standins.write_script(src_dir / script, source)
        recipe = Recipe(
            base="ubuntu:16.04",
            files=[(script, f"/{script}")],
            environment=list(env or []),
            runscript=f"/{script}",
        )
        image = build_app_image(recipe, name, self.root / f"{name}.boxi",
                                source_root=src_dir)
        image.close()
        return image.path

    def input_image(self, files: dict[str, bytes], name: str = "input",
                    dir_name: str = "Inputs") -> Path:
        tree = self.root / f"tree-{name}" / dir_name
        tree.mkdir(parents=True)
        for rel, content in files.items():
            target = tree / rel
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(content)
        image = pack_data_dir(tree, name, self.root / f"{name}.boxi")
        image.close()
        return image.path

    def output_image(self, name: str = "output",
                     dir_name: str = "Outputs") -> Path:
        image = pack_empty_output(dir_name, name, self.root / f"{name}.boxi")
        image.close()
        return image.path

    def spec(self, components: list[dict], bindings: list[dict],
             invocations: list[dict], label: str = "wf") -> WorkflowSpec:
        doc = {
            "label": label,
            "components": components,
            "bindings": bindings,
            "invocations": invocations,
        }
        return workflow_from_mapping(doc, base_dir=self.root)

    def identity_spec(self, files: dict[str, bytes] | None = None,
                      label: str = "identity") -> WorkflowSpec:
        """input -> copy app -> output, the smallest complete workflow."""
        self.input_image(files if files is not None else {"a.txt": b"alpha\n"})
        self.app_image(standins.IDENTITY)
        self.output_image()
        return self.spec(
            components=[
                {"id": "in", "role": "input", "image": "input.boxi"},
                {"id": "app", "role": "application", "image": "app.boxi"},
                {"id": "out", "role": "output", "image": "output.boxi"},
            ],
            bindings=[
                {"source": "in:/", "target": "app:/Inputs"},
                {"source": "out:/Outputs", "target": "app:/Outputs"},
            ],
            invocations=[{"app": "app", "argv": ["Inputs", "Outputs/data"]}],
            label=label,
        )


@pytest.fixture
def workbench(tmp_path):
    return Workbench(tmp_path)
