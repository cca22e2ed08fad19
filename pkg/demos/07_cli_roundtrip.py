"""Walkthrough: driving the whole pipeline through the funsel CLI.

Writes a synthetic curve file, then runs the feature, blind, select, and
report commands exactly as a shell user would, in a temporary directory.
"""

import json
import tempfile
from pathlib import Path

import numpy as np

from funsel import Grid
from funsel.cli import main, write_curves
from funsel.oracle import KlModel, fourier_basis, simulate

workdir = Path(tempfile.mkdtemp(prefix="funsel-demo-"))
print("working in", workdir)

grid = Grid.uniform(0.0, 1.0, 41)
basis = fourier_basis(grid, 2)
model = KlModel(grid, np.zeros(41), basis, np.array([4.0, 1.0]))
write_curves(simulate(model, 50, seed=1), workdir / "curves.csv")

features = []
for i in (0, 10, 20, 30, 40):
    features.extend(["--feature", f"point@{i}"])

print("\n$ funsel features ...")
main(["features", "--curves", str(workdir / "curves.csv"), *features,
      "--out", str(workdir / "features.csv")])

print("\n$ funsel blind ...")
main(["blind", "--curves", str(workdir / "curves.csv"), *features,
      "--subset", "0,2", "--r", "5", "--out", str(workdir / "blinded.csv")])

print("\n$ funsel select ...")
main(["select", "--task", "pca", "--curves", str(workdir / "curves.csv"),
      *features, "--epsilon", "0.05", "--d1", "1", "--n0", "2", "--n1", "3",
      "--r", "5", "--d-max", "4", "--seed", "99", "--n-components", "2",
      "--out", str(workdir / "report.json")])

print("\n$ funsel report ...")
main(["report", str(workdir / "report.json"),
      "--trace-csv", str(workdir / "trace.csv")])

report = json.loads((workdir / "report.json").read_text())
print("\nchosen labels from the report:", report["result"]["chosen_labels"])
print("rerunning with the embedded config reproduces this byte-for-byte",
      "(timing aside); see the determinism acceptance test")
