"""Plain-text model files.

Layout::

    # eigenpro-model v1
    mode: primal_kernel
    kernel: gaussian
    bandwidth: 2.0
    seed: 0
    task: regression
    classes:
    vector_output: 1
    [alpha 300 1]
    <300 lines of 1 number each>
    [training_points 300 5]
    ...
    [end]

Header lines are ``key: value``.  Each block starts with
``[name rows cols]`` followed by ``rows`` lines of ``cols`` space-separated
numbers written with ``repr`` so values round-trip exactly.  Blocks by mode:
``primal_kernel`` alpha, training_points; ``rff`` alpha, omega, b;
``rbf`` alpha, centers; ``linear`` alpha.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .features import RbfMap, RffMap
from .kernels import KernelSpec
from .optimizer import KernelModel, LinearModel

MAGIC = "# eigenpro-model v1"


@dataclass(frozen=True, eq=False)
class SavedModel:
    model: object
    mode: str
    seed: int = 0
    task: str = "regression"
    classes: tuple = ()


def _block(fh, name, A):
    A = np.asarray(A, dtype=np.float64)
    A2 = A.reshape(A.shape[0], -1) if A.ndim else A.reshape(1, 1)
    fh.write(f"[{name} {A2.shape[0]} {A2.shape[1]}]\n")
    for row in A2.tolist():
        fh.write(" ".join(repr(v) for v in row) + "\n")


def save_model(path, model, mode: str, seed: int = 0, task: str = "regression", classes=()):
    header = {"mode": mode, "seed": int(seed), "task": task,
              "classes": " ".join(repr(float(c)) for c in classes),
              "vector_output": int(np.asarray(model.alpha).ndim == 1)}
    blocks = [("alpha", model.alpha)]
    if isinstance(model, KernelModel):
        if mode != "primal_kernel":
            raise ValueError(f"kernel model saved with mode {mode!r}")
        header["kernel"] = model.spec.family
        header["bandwidth"] = repr(model.spec.bandwidth)
        blocks.append(("training_points", model.training_points))
    elif isinstance(model.feature_map, RffMap):
        header["kernel"] = "gaussian"
        header["bandwidth"] = repr(model.feature_map.source_bandwidth)
        blocks += [("omega", model.feature_map.omega), ("b", model.feature_map.b)]
    elif isinstance(model.feature_map, RbfMap):
        header["kernel"] = model.feature_map.spec.family
        header["bandwidth"] = repr(model.feature_map.spec.bandwidth)
        blocks.append(("centers", model.feature_map.centers))
    with open(path, "w") as fh:
        fh.write(MAGIC + "\n")
        for key, value in header.items():
            fh.write(f"{key}: {value}\n".replace(": \n", ":\n"))
        for name, A in blocks:
            _block(fh, name, A)
        fh.write("[end]\n")


def _parse(path):
    with open(path) as fh:
        lines = fh.read().split("\n")
    if not lines or lines[0].strip() != MAGIC:
        raise DataError("not an eigenpro model file (bad first line)", path, 1)
    header, blocks = {}, {}
    i = 1
    while i < len(lines) and not lines[i].startswith("["):
        line = lines[i].strip()
        if line:
            key, sep, value = line.partition(":")
            if not sep:
                raise DataError(f"malformed header line {line!r}", path, i + 1)
            header[key.strip()] = value.strip()
        i += 1
    while i < len(lines):
        line = lines[i].strip()
        i += 1
        if not line:
            continue
        if line == "[end]":
            return header, blocks
        parts = line.strip("[]").split()
        if not (line.startswith("[") and len(parts) == 3):
            raise DataError(f"expected a block header, got {line!r}", path, i)
        name = parts[0]
        try:
            rows, cols = int(parts[1]), int(parts[2])
        except ValueError:
            raise DataError(f"bad block shape in {line!r}", path, i) from None
        A = np.empty((rows, cols))
        for r in range(rows):
            if i >= len(lines):
                raise DataError(f"block {name} truncated", path, i)
            fields = lines[i].split()
            if len(fields) != cols:
                raise DataError(f"block {name}: expected {cols} numbers", path, i + 1)
            try:
                A[r] = [float(f) for f in fields]
            except ValueError:
                raise DataError(f"block {name}: non-numeric value", path, i + 1) from None
            i += 1
        blocks[name] = A
    raise DataError("missing [end] marker", path)


def load_model(path) -> SavedModel:
    header, blocks = _parse(path)
    try:
        mode = header["mode"]
        alpha = blocks["alpha"]
        if header.get("vector_output", "1") == "1":
            alpha = alpha[:, 0]
        if mode == "primal_kernel":
            spec = KernelSpec(header["kernel"], float(header["bandwidth"]))
            model = KernelModel(alpha, blocks["training_points"], spec)
        elif mode == "rff":
            fmap = RffMap(blocks["omega"], blocks["b"][:, 0], float(header["bandwidth"]))
            model = LinearModel(alpha, fmap)
        elif mode == "rbf":
            spec = KernelSpec(header["kernel"], float(header["bandwidth"]))
            model = LinearModel(alpha, RbfMap(blocks["centers"], spec))
        elif mode == "linear":
            model = LinearModel(alpha)
        else:
            raise DataError(f"unknown mode {mode!r}", path)
    except KeyError as exc:
        raise DataError(f"model file lacks {exc.args[0]!r}", path) from None
    classes = tuple(float(c) for c in header.get("classes", "").split())
    return SavedModel(model, mode, int(header.get("seed", 0)), header.get("task", "regression"), classes)
