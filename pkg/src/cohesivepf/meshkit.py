"""Structured simplicial meshes for the fracture solver.

Two families are provided: 1D interval meshes (optionally with a single
tiny central element used to host a displacement jump) and structured
right-triangle meshes of the unit square / L-shaped domain in the two
anti-symmetric diagonal orientations "A" (NW-SE) and "B" (SW-NE).

Meshes are immutable once built; all arrays are read-only views.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_GEOM_TOL = 1e-12


class MeshError(ValueError):
    """Invalid mesh specification or degenerate geometry."""


@dataclass(frozen=True)
class MeshSpec:
    """Recipe for a structured mesh.

    Parameters
    ----------
    domain : {"interval", "square", "lshape"}
        Geometry family.
    length : float
        Interval length, or long edge of the square / L-shape.
    h : float
        Target element size (leg length for triangles).
    height : float, optional
        Second edge length for 2D domains; defaults to ``length``.
    diag : {"A", "B"}
        Diagonal orientation of the structured triangulation:
        "A" splits each cell along the NW-SE diagonal, "B" along SW-NE.
    refinement : float, optional
        If given (in (0, 1)), the interval mesh receives one tiny central
        element of size ``refinement * h`` spanning the midpoint.
    """

    domain: str
    length: float
    h: float
    height: float | None = None
    diag: str = "A"
    refinement: float | None = None

    def __post_init__(self):
        if self.domain not in ("interval", "square", "lshape"):
            raise MeshError(f"unknown domain kind {self.domain!r}")
        if not self.h > 0:
            raise MeshError("mesh size h must be positive")
        if not self.length > 0:
            raise MeshError("length must be positive")
        if self.refinement is not None and not 0 < self.refinement < 1:
            raise MeshError("refinement factor must lie in (0, 1)")


@dataclass(frozen=True)
class Mesh:
    """Simplicial mesh: segments in 1D, triangles in 2D.

    Attributes
    ----------
    dimension : int
        1 or 2.
    nodes : ndarray
        Node coordinates, shape (n_nodes,) in 1D or (n_nodes, 2) in 2D.
    elements : ndarray of int
        Node index tuples, shape (n_elements, dimension + 1).
        2D triangles are counterclockwise.
    boundary_tags : dict[int, frozenset[str]]
        Map from node index to the set of named boundary labels the node
        lies on ("left", "bottom", "right", "top", "reentrant").
    element_measures : ndarray
        Cached length/area per element.
    """

    dimension: int
    nodes: np.ndarray
    elements: np.ndarray
    boundary_tags: dict[int, frozenset[str]] = field(default_factory=dict)
    element_measures: np.ndarray = None

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        elements = np.asarray(self.elements, dtype=np.int64)
        if self.dimension not in (1, 2):
            raise MeshError("dimension must be 1 or 2")
        if elements.ndim != 2 or elements.shape[1] != self.dimension + 1:
            raise MeshError("element connectivity has wrong shape")
        if elements.min(initial=0) < 0 or elements.max(initial=-1) >= len(nodes):
            raise MeshError("element references an invalid node index")
        measures = _measures(self.dimension, nodes, elements)
        if np.any(measures <= 0):
            bad = int(np.argmin(measures))
            raise MeshError(
                f"degenerate or mis-oriented element {bad} (measure {measures[bad]:g})"
            )
        for arr in (nodes, elements, measures):
            arr.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "element_measures", measures)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    def nodes_with_tag(self, tag: str) -> np.ndarray:
        """Sorted indices of all nodes carrying a boundary label."""
        idx = [i for i, tags in self.boundary_tags.items() if tag in tags]
        return np.array(sorted(idx), dtype=np.int64)

    def boundary_nodes(self) -> np.ndarray:
        """Sorted indices of all tagged boundary nodes."""
        return np.array(sorted(self.boundary_tags), dtype=np.int64)

    def centroids(self) -> np.ndarray:
        """Element centroids, shape (n_elements,) or (n_elements, 2)."""
        return self.nodes[self.elements].mean(axis=1)

    def diameters(self) -> np.ndarray:
        """Per-element diameter (segment length / longest triangle edge)."""
        if self.dimension == 1:
            return self.element_measures.copy()
        p = self.nodes[self.elements]
        e0 = np.linalg.norm(p[:, 1] - p[:, 0], axis=1)
        e1 = np.linalg.norm(p[:, 2] - p[:, 1], axis=1)
        e2 = np.linalg.norm(p[:, 0] - p[:, 2], axis=1)
        return np.maximum(e0, np.maximum(e1, e2))


def _measures(dim, nodes, elements):
    if dim == 1:
        return nodes[elements[:, 1]] - nodes[elements[:, 0]]
    p = nodes[elements]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


def build_interval(spec: MeshSpec) -> Mesh:
    """Mesh the interval [0, L] with near-uniform elements of size ~h.

    With ``spec.refinement`` set, a single tiny element of size
    ``refinement * h`` spans the midpoint and the two remaining regions
    are meshed near-uniformly; this hosts a displacement discontinuity
    without grading the rest of the mesh.
    """
    if spec.domain != "interval":
        raise MeshError("build_interval requires an interval spec")
    L, h = spec.length, spec.h
    if h >= L:
        raise MeshError(f"element size h={h:g} must be smaller than the length {L:g}")
    if spec.refinement is None:
        n = max(2, round(L / h))
        coords = np.linspace(0.0, L, n + 1)
    else:
        tiny = spec.refinement * h
        side = 0.5 * (L - tiny)
        if side <= h:
            raise MeshError("interval too short for a central refined element")
        n_side = max(1, round(side / h))
        left = np.linspace(0.0, side, n_side + 1)
        right = np.linspace(side + tiny, L, n_side + 1)
        coords = np.concatenate([left, right])
    elements = np.column_stack([np.arange(len(coords) - 1), np.arange(1, len(coords))])
    tags = {0: frozenset({"left"}), len(coords) - 1: frozenset({"right"})}
    return Mesh(1, coords, elements, tags)


def _cell_triangles(i, j, nv, diag):
    bl = j * nv + i
    br = j * nv + i + 1
    tl = (j + 1) * nv + i
    tr = (j + 1) * nv + i + 1
    if diag == "A":  # NW-SE diagonal (tl-br)
        return (bl, br, tl), (br, tr, tl)
    return (bl, br, tr), (bl, tr, tl)  # SW-NE diagonal (bl-tr)


def build_structured_triangulation(spec: MeshSpec) -> Mesh:
    """Right-triangle mesh of the square [0,L]x[0,H] or the L-shape.

    Every h-by-h cell is split along the NW-SE diagonal (variant "A") or
    the SW-NE diagonal (variant "B").  The L-shape is the square with the
    lower-left quadrant [0, L/2) x [0, L/2) removed; its two interior
    edges are tagged "reentrant".
    """
    if spec.domain not in ("square", "lshape"):
        raise MeshError("build_structured_triangulation requires square or lshape")
    if spec.diag not in ("A", "B"):
        raise MeshError(f"unknown diagonal variant {spec.diag!r}")
    L = spec.length
    H = spec.height if spec.height is not None else L
    nx = _divisions(L, spec.h)
    ny = _divisions(H, spec.h)
    if spec.domain == "lshape":
        if H != L:
            raise MeshError("the L-shape uses a square bounding box")
        if nx % 2 or ny % 2:
            raise MeshError("h must divide the half edge L/2 of the L-shape")

    nv = nx + 1
    xs = np.linspace(0.0, L, nx + 1)
    ys = np.linspace(0.0, H, ny + 1)
    X, Y = np.meshgrid(xs, ys)  # row-major in j (y), matching bl = j*nv + i
    nodes = np.column_stack([X.ravel(), Y.ravel()])

    half_x, half_y = nx // 2, ny // 2
    tris = []
    for j in range(ny):
        for i in range(nx):
            if spec.domain == "lshape" and i < half_x and j < half_y:
                continue
            tris.extend(_cell_triangles(i, j, nv, spec.diag))
    elements = np.array(tris, dtype=np.int64)

    keep = np.unique(elements)
    if len(keep) != len(nodes):  # drop nodes of the removed quadrant
        remap = -np.ones(len(nodes), dtype=np.int64)
        remap[keep] = np.arange(len(keep))
        nodes = nodes[keep]
        elements = remap[elements]

    tags = _tag_boundary(spec.domain, nodes, L, H)
    return Mesh(2, nodes, elements, tags)


def _divisions(edge, h):
    n = edge / h
    if abs(n - round(n)) > 1e-9 * max(1.0, n):
        raise MeshError(f"h={h:g} does not divide the edge length {edge:g}")
    return int(round(n))


def _tag_boundary(domain, nodes, L, H):
    x, y = nodes[:, 0], nodes[:, 1]
    tol = _GEOM_TOL * max(L, H, 1.0)
    tags: dict[int, set[str]] = {}

    def add(mask, label):
        for i in np.nonzero(mask)[0]:
            tags.setdefault(int(i), set()).add(label)

    if domain == "square":
        add(np.abs(x) <= tol, "left")
        add(np.abs(y) <= tol, "bottom")
    else:
        half = 0.5 * L
        add((np.abs(x) <= tol) & (y >= half - tol), "left")
        add((np.abs(y) <= tol) & (x >= half - tol), "bottom")
        add((np.abs(x - half) <= tol) & (y <= half + tol), "reentrant")
        add((np.abs(y - half) <= tol) & (x <= half + tol), "reentrant")
    add(np.abs(x - L) <= tol, "right")
    add(np.abs(y - H) <= tol, "top")
    return {i: frozenset(s) for i, s in tags.items()}


def band_width(mesh: Mesh, indicator: np.ndarray, direction) -> float:
    """Extent of a marked element set measured along a direction.

    The width is the spread of the marked-element centroids projected on
    ``direction`` plus one mean element diameter, so that a single marked
    element reports roughly its own size.

    Parameters
    ----------
    mesh : Mesh
    indicator : boolean array, shape (n_elements,)
        Marks the element band.
    direction : array_like
        Measurement direction; normalized internally (scalar in 1D).
    """
    indicator = np.asarray(indicator, dtype=bool)
    if indicator.shape != (mesh.n_elements,):
        raise MeshError("indicator must mark every element")
    if not indicator.any():
        raise MeshError("band_width of an empty marked set")
    cent = mesh.centroids()[indicator]
    if mesh.dimension == 1:
        proj = cent * np.sign(float(np.atleast_1d(direction)[0]) or 1.0)
    else:
        d = np.asarray(direction, dtype=float)
        norm = np.linalg.norm(d)
        if norm == 0:
            raise MeshError("direction must be nonzero")
        proj = cent @ (d / norm)
    diam = mesh.diameters()[indicator].mean()
    return float(proj.max() - proj.min() + diam)
