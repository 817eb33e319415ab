"""Build the four example workflows used by tests, benchmarks, and docs.

Each scenario directory is self-contained: component images, the host
materials they were packed from (under work/), and a workflow.json whose
image paths are relative to itself.

  1  one input image (three data files), a plotter, one output
  2  three inputs, the same plotter image run once per input, three outputs
  3  one shared input (train + eval data), two predictors, two outputs
  4  the train and eval data split into two input images, same predictors

Data files are generated from a seeded RNG, so rebuilding a scenario with
the same seed yields byte-identical inputs.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

from .packager import Recipe, build_app_image, pack_data_dir, pack_empty_output, parse_recipe
from .standins import IDENTITY, KNN_MEAN, NEAREST_NEIGHBOR, PLOTTER, write_script

PLOT_RECIPE = """\
# plotting application
[base]
from = ubuntu:16.04

[packages]
gnuplot

[files]
plot.py = /plot.py

[runscript]
path = /plot.py
"""


def _points_file(path: Path, rng: random.Random, count: int = 12) -> None:
    lines = [f"{i} {rng.randint(0, 99)}" for i in range(count)]
    path.write_text("\n".join(lines) + "\n")


def _csv(path: Path, rng: random.Random, rows: int, columns: int) -> None:
    table = [",".join(f"{rng.uniform(0, 10):.3f}" for _ in range(columns))
             for _ in range(rows)]
    path.write_text("\n".join(table) + "\n")


def _write_workflow(root: Path, doc: dict) -> Path:
    path = root / "workflow.json"
    path.write_text(json.dumps(doc, indent=2) + "\n")
    return path


def _predictor_recipe(script_name: str, package: str) -> Recipe:
    return Recipe(
        base="ubuntu:16.04",
        packages=["r-base", package],
        files=[(script_name, "/" + script_name)],
        runscript=script_name,
    )


def build_scenario(number: int, root: Path | str, seed: int = 7) -> Path:
    """Create scenario fixtures under root; returns the workflow.json path."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    builders = {1: _scenario_1, 2: _scenario_2, 3: _scenario_3, 4: _scenario_4}
    if number not in builders:
        raise ValueError(f"no scenario {number}; choose from {sorted(builders)}")
    return builders[number](root, random.Random(seed))


def _scenario_1(root: Path, rng: random.Random) -> Path:
    work = root / "work"
    inputs = work / "Inputs"
    inputs.mkdir(parents=True)
    for k in (1, 2, 3):
        _points_file(inputs / f"text{k}.txt", rng)
    write_script(work / "plot.py", PLOTTER)
    (root / "app.recipe").write_text(PLOT_RECIPE)

    pack_data_dir(inputs, "input", root / "input.boxi").close()
    build_app_image(parse_recipe(PLOT_RECIPE), "app", root / "app.boxi",
                    source_root=work).close()
    pack_empty_output("Outputs", "output", root / "output.boxi").close()

    return _write_workflow(root, {
        "label": "scenario-1",
        "components": [
            {"id": "input", "role": "input", "image": "input.boxi"},
            {"id": "app", "role": "application", "image": "app.boxi"},
            {"id": "output", "role": "output", "image": "output.boxi"},
        ],
        "bindings": [
            {"source": "input:/", "target": "app:/Inputs"},
            {"source": "output:/Outputs", "target": "app:/Outputs"},
        ],
        "invocations": [{"app": "app", "argv": ["Inputs", "Outputs"]}],
    })


def _scenario_2(root: Path, rng: random.Random) -> Path:
    work = root / "work"
    write_script(work / "plot.py", PLOTTER)
    build_app_image(parse_recipe(PLOT_RECIPE), "app", root / "app.boxi",
                    source_root=work).close()

    components = []
    bindings = []
    invocations = []
    for k in (1, 2, 3):
        inputs = work / f"in{k}" / "Inputs"
        inputs.mkdir(parents=True)
        _points_file(inputs / f"text{k}.txt", rng)
        pack_data_dir(inputs, f"input{k}", root / f"input{k}.boxi").close()
        pack_empty_output("Outputs", f"output{k}", root / f"output{k}.boxi").close()
        components.extend([
            {"id": f"input{k}", "role": "input", "image": f"input{k}.boxi"},
            {"id": f"app{k}", "role": "application", "image": "app.boxi"},
            {"id": f"output{k}", "role": "output", "image": f"output{k}.boxi"},
        ])
        bindings.extend([
            {"source": f"input{k}:/", "target": f"app{k}:/Inputs"},
            {"source": f"output{k}:/Outputs", "target": f"app{k}:/Outputs"},
        ])
        invocations.append({"app": f"app{k}", "argv": ["Inputs", "Outputs"]})

    return _write_workflow(root, {
        "label": "scenario-2",
        "components": components,
        "bindings": bindings,
        "invocations": invocations,
    })


def _prediction_images(root: Path, work: Path) -> None:
    write_script(work / "predict_nn.py", NEAREST_NEIGHBOR)
    write_script(work / "predict_knn_mean.py", KNN_MEAN)
    build_app_image(_predictor_recipe("predict_nn.py", "kknn"),
                    "kknn_app", root / "kknn_app.boxi", source_root=work).close()
    build_app_image(_predictor_recipe("predict_knn_mean.py", "randomForest"),
                    "rf_app", root / "rf_app.boxi", source_root=work).close()
    pack_empty_output("Outputs", "outputkknn", root / "outputkknn.boxi").close()
    pack_empty_output("Outputs", "outputrf", root / "outputrf.boxi").close()


def _scenario_3(root: Path, rng: random.Random) -> Path:
    work = root / "work"
    inputs = work / "Inputs"
    inputs.mkdir(parents=True)
    _csv(inputs / "train.csv", rng, rows=40, columns=3)
    _csv(inputs / "eval.csv", rng, rows=100, columns=2)
    pack_data_dir(inputs, "input", root / "input.boxi").close()
    _prediction_images(root, work)

    argv = ["Inputs/train.csv", "Inputs/eval.csv", "Outputs/predictions.csv"]
    return _write_workflow(root, {
        "label": "scenario-3",
        "components": [
            {"id": "input", "role": "input", "image": "input.boxi"},
            {"id": "kknn_app", "role": "application", "image": "kknn_app.boxi"},
            {"id": "rf_app", "role": "application", "image": "rf_app.boxi"},
            {"id": "outputkknn", "role": "output", "image": "outputkknn.boxi"},
            {"id": "outputrf", "role": "output", "image": "outputrf.boxi"},
        ],
        "bindings": [
            {"source": "input:/", "target": "kknn_app:/Inputs"},
            {"source": "outputkknn:/Outputs", "target": "kknn_app:/Outputs"},
            {"source": "input:/", "target": "rf_app:/Inputs"},
            {"source": "outputrf:/Outputs", "target": "rf_app:/Outputs"},
        ],
        "invocations": [
            {"app": "kknn_app", "argv": argv},
            {"app": "rf_app", "argv": argv},
        ],
    })


def _scenario_4(root: Path, rng: random.Random) -> Path:
    work = root / "work"
    train = work / "train"
    train.mkdir(parents=True)
    _csv(train / "train.csv", rng, rows=40, columns=3)
    evaluation = work / "eval"
    evaluation.mkdir(parents=True)
    _csv(evaluation / "eval.csv", rng, rows=100, columns=2)
    pack_data_dir(train, "train", root / "train.boxi").close()
    pack_data_dir(evaluation, "eval", root / "eval.boxi").close()
    _prediction_images(root, work)

    argv = ["train/train.csv", "eval/eval.csv", "Outputs/predictions.csv"]
    bindings = []
    for app in ("kknn_app", "rf_app"):
        bindings.extend([
            {"source": "train:/", "target": f"{app}:/train"},
            {"source": "eval:/", "target": f"{app}:/eval"},
        ])
    bindings.extend([
        {"source": "outputkknn:/Outputs", "target": "kknn_app:/Outputs"},
        {"source": "outputrf:/Outputs", "target": "rf_app:/Outputs"},
    ])
    return _write_workflow(root, {
        "label": "scenario-4",
        "components": [
            {"id": "train", "role": "input", "image": "train.boxi"},
            {"id": "eval", "role": "input", "image": "eval.boxi"},
            {"id": "kknn_app", "role": "application", "image": "kknn_app.boxi"},
            {"id": "rf_app", "role": "application", "image": "rf_app.boxi"},
            {"id": "outputkknn", "role": "output", "image": "outputkknn.boxi"},
            {"id": "outputrf", "role": "output", "image": "outputrf.boxi"},
        ],
        "bindings": bindings,
        "invocations": [
            {"app": "kknn_app", "argv": argv},
            {"app": "rf_app", "argv": argv},
        ],
    })


def build_identity_fixture(root: Path | str, data_dir: Path | str,
                           label: str = "identity") -> Path:
    """Pack data_dir plus an identity application into a runnable workflow.

    The identity app copies its Inputs view into its Outputs view, so the
    output partition ends up holding the input tree under Outputs/.
    """
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    work = root / "work"
    write_script(work / "copy.py", IDENTITY)
    recipe = Recipe(base="ubuntu:16.04",
                    files=[("copy.py", "/copy.py")], runscript="copy.py")
    pack_data_dir(data_dir, "input", root / "input.boxi").close()
    build_app_image(recipe, "app", root / "app.boxi", source_root=work).close()
    pack_empty_output("Outputs", "output", root / "output.boxi").close()
    return _write_workflow(root, {
        "label": label,
        "components": [
            {"id": "input", "role": "input", "image": "input.boxi"},
            {"id": "app", "role": "application", "image": "app.boxi"},
            {"id": "output", "role": "output", "image": "output.boxi"},
        ],
        "bindings": [
            {"source": "input:/", "target": "app:/Inputs"},
            {"source": "output:/Outputs", "target": "app:/Outputs"},
        ],
        "invocations": [{"app": "app", "argv": ["Inputs", "Outputs/data"]}],
    })
