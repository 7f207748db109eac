"""Legacy ASCII VTK export of meshes and fields.

Writes ``DATASET UNSTRUCTURED_GRID`` files (cell type 3 for segments,
5 for triangles) with optional POINT_DATA / CELL_DATA sections for
scalars, 2-vectors, and symmetric in-plane tensors.  Output is fully
deterministic: fixed 12-significant-digit decimal formatting, no
timestamps.
"""

from __future__ import annotations

import numpy as np

from .fields import ElementField, NodalField
from .meshkit import Mesh

_CELL_TYPE = {1: 3, 2: 5}


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _points_block(mesh: Mesh) -> list[str]:
    lines = [f"POINTS {mesh.n_nodes} double"]
    if mesh.dimension == 1:
        for x in mesh.nodes:
            lines.append(f"{_fmt(x)} 0 0")
    else:
        for x, y in mesh.nodes:
            lines.append(f"{_fmt(x)} {_fmt(y)} 0")
    return lines


def _cells_block(mesh: Mesh) -> list[str]:
    nv = mesh.dimension + 1
    lines = [f"CELLS {mesh.n_elements} {mesh.n_elements * (nv + 1)}"]
    for el in mesh.elements:
        lines.append(str(nv) + " " + " ".join(str(int(i)) for i in el))
    lines.append(f"CELL_TYPES {mesh.n_elements}")
    lines.extend([str(_CELL_TYPE[mesh.dimension])] * mesh.n_elements)
    return lines


def _data_block(name: str, values: np.ndarray) -> list[str]:
    vals = np.asarray(values, dtype=float)
    if vals.ndim == 1:
        lines = [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
        lines.extend(_fmt(v) for v in vals)
        return lines
    if vals.shape[1] == 2:
        lines = [f"VECTORS {name} double"]
        lines.extend(f"{_fmt(a)} {_fmt(b)} 0" for a, b in vals)
        return lines
    if vals.shape[1] == 3:  # symmetric in-plane tensor (xx, yy, xy)
        lines = [f"TENSORS {name} double"]
        for xx, yy, xy in vals:
            lines.append(f"{_fmt(xx)} {_fmt(xy)} 0")
            lines.append(f"{_fmt(xy)} {_fmt(yy)} 0")
            lines.append("0 0 0")
        return lines
    raise ValueError(f"cannot export field {name!r} with shape {vals.shape}")


def write_vtk(path, mesh: Mesh, point_data: dict | None = None,
              cell_data: dict | None = None, title: str = "cohesivepf output"):
    """Write a mesh and named nodal/element fields to a legacy VTK file.

    ``point_data`` / ``cell_data`` map names to arrays or to
    :class:`NodalField` / :class:`ElementField` instances.
    """
    lines = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
    ]
    lines.extend(_points_block(mesh))
    lines.extend(_cells_block(mesh))
    if point_data:
        lines.append(f"POINT_DATA {mesh.n_nodes}")
        for name, values in point_data.items():
            if isinstance(values, NodalField):
                values = values.values
            lines.extend(_data_block(name, values))
    if cell_data:
        lines.append(f"CELL_DATA {mesh.n_elements}")
        for name, values in cell_data.items():
            if isinstance(values, ElementField):
                values = values.values
            lines.extend(_data_block(name, values))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
