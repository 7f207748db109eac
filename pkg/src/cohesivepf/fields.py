"""Piecewise-affine (P1) and piecewise-constant (P0) fields plus linear algebra.

Nodal fields hold one scalar or 2-vector per node; element fields hold one
scalar, 2-vector, or symmetric 2x2 tensor (stored as xx, yy, xy) per
element.  The module also provides the element-level differential
operators (gradients / strains), P1 mass and stiffness matrices, and a
Jacobi-preconditioned conjugate-gradient solve with symmetric Dirichlet
elimination.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .meshkit import Mesh


class FieldError(ValueError):
    """Field values inconsistent with the mesh."""


class LinearSolveError(RuntimeError):
    """Iterative solve failed to reach the requested residual."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class NodalField:
    """P1 field: one value (scalar or 2-vector) per mesh node."""

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape[0] != self.mesh.n_nodes or v.ndim > 2:
            raise FieldError(
                f"nodal value count {v.shape} does not match {self.mesh.n_nodes} nodes"
            )
        object.__setattr__(self, "values", v)

    @property
    def n_components(self) -> int:
        return 1 if self.values.ndim == 1 else self.values.shape[1]


@dataclass(frozen=True)
class ElementField:
    """P0 field: one value (scalar / 2-vector / sym tensor) per element."""

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape[0] != self.mesh.n_elements or v.ndim > 2:
            raise FieldError(
                f"element value count {v.shape} does not match "
                f"{self.mesh.n_elements} elements"
            )
        object.__setattr__(self, "values", v)

    @property
    def n_components(self) -> int:
        return 1 if self.values.ndim == 1 else self.values.shape[1]


# ---------------------------------------------------------------------------
# element geometry and differential operators
# ---------------------------------------------------------------------------

def shape_gradients(mesh: Mesh) -> np.ndarray:
    """Gradients of the P1 shape functions.

    Returns (n_el, 2) slopes in 1D (d/dx of the two hat functions) or
    (n_el, 3, 2) in 2D.  Exact for affine fields.
    """
    if mesh.dimension == 1:
        inv = 1.0 / mesh.element_measures
        return np.column_stack([-inv, inv])
    p = mesh.nodes[mesh.elements]  # (n_el, 3, 2)
    area2 = 2.0 * mesh.element_measures
    g = np.empty((mesh.n_elements, 3, 2))
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        g[:, i, 0] = (p[:, j, 1] - p[:, k, 1]) / area2
        g[:, i, 1] = (p[:, k, 0] - p[:, j, 0]) / area2
    return g


def gradient(u: NodalField) -> ElementField:
    """Element-wise gradient / symmetric strain of a P1 field.

    1D scalar -> per-element slope; 2D scalar -> per-element 2-vector;
    2D 2-vector -> per-element symmetric strain stored as (exx, eyy, exy).
    """
    mesh = u.mesh
    g = shape_gradients(mesh)
    vals = u.values
    if mesh.dimension == 1:
        if u.n_components != 1:
            raise FieldError("1D fields are scalar")
        ve = vals[mesh.elements]
        return ElementField(mesh, np.einsum("ei,ei->e", g, ve))
    ve = vals[mesh.elements]  # (n_el, 3) or (n_el, 3, 2)
    if u.n_components == 1:
        return ElementField(mesh, np.einsum("eid,ei->ed", g, ve))
    if u.n_components != 2:
        raise FieldError("2D nodal fields must be scalars or 2-vectors")
    grad = np.einsum("eid,eic->ecd", g, ve)  # grad[c,d] = d u_c / d x_d
    strain = np.empty((mesh.n_elements, 3))
    strain[:, 0] = grad[:, 0, 0]
    strain[:, 1] = grad[:, 1, 1]
    strain[:, 2] = 0.5 * (grad[:, 0, 1] + grad[:, 1, 0])
    return ElementField(mesh, strain)


def element_mean(d: NodalField) -> ElementField:
    """Arithmetic mean of the vertex values on each element."""
    if d.n_components != 1:
        raise FieldError("element_mean expects a scalar field")
    return ElementField(d.mesh, d.values[d.mesh.elements].mean(axis=1))


def mean_operator(mesh: Mesh) -> sp.csr_matrix:
    """Sparse (n_el, n_nodes) operator taking nodal values to element means."""
    nv = mesh.dimension + 1
    rows = np.repeat(np.arange(mesh.n_elements), nv)
    cols = mesh.elements.ravel()
    data = np.full(rows.shape, 1.0 / nv)
    return sp.csr_matrix((data, (rows, cols)), shape=(mesh.n_elements, mesh.n_nodes))


def mass_matrix(mesh: Mesh) -> sp.csr_matrix:
    """Consistent P1 mass matrix (exact integration of products of hats)."""
    nv = mesh.dimension + 1
    local = (np.ones((nv, nv)) + np.eye(nv)) / (6.0 if nv == 2 else 12.0)
    return _assemble_local(mesh, mesh.element_measures[:, None, None] * local)


def stiffness_matrix(mesh: Mesh) -> sp.csr_matrix:
    """P1 stiffness matrix, integral of grad(phi_i) . grad(phi_j)."""
    g = shape_gradients(mesh)
    if mesh.dimension == 1:
        local = np.einsum("ei,ej->eij", g, g)
    else:
        local = np.einsum("eid,ejd->eij", g, g)
    return _assemble_local(mesh, mesh.element_measures[:, None, None] * local)


def _assemble_local(mesh, local):
    nv = mesh.dimension + 1
    rows = np.repeat(mesh.elements, nv, axis=1).ravel()
    cols = np.tile(mesh.elements, (1, nv)).ravel()
    mat = sp.coo_matrix(
        (local.ravel(), (rows, cols)), shape=(mesh.n_nodes, mesh.n_nodes)
    )
    return mat.tocsr()


def strain_operators(mesh: Mesh, vector: bool) -> list[sp.csr_matrix]:
    """Sparse operators from nodal dofs to per-element strain components.

    For scalar fields returns [Dx] (1D) or [Dx, Dy] (2D).  For 2D vector
    fields (interleaved dofs ux0, uy0, ux1, ...) returns [Dxx, Dyy, Dgxy]
    where the third row produces the engineering shear gxy = 2 exy.
    """
    g = shape_gradients(mesh)
    ne = mesh.n_elements
    rows3 = np.repeat(np.arange(ne), mesh.dimension + 1)
    if mesh.dimension == 1:
        cols = mesh.elements.ravel()
        return [sp.csr_matrix((g.ravel(), (rows3, cols)), shape=(ne, mesh.n_nodes))]
    cols = mesh.elements.ravel()
    if not vector:
        return [
            sp.csr_matrix((g[:, :, d].ravel(), (rows3, cols)), shape=(ne, mesh.n_nodes))
            for d in range(2)
        ]
    ndof = 2 * mesh.n_nodes
    cx, cy = 2 * cols, 2 * cols + 1
    dxx = sp.csr_matrix((g[:, :, 0].ravel(), (rows3, cx)), shape=(ne, ndof))
    dyy = sp.csr_matrix((g[:, :, 1].ravel(), (rows3, cy)), shape=(ne, ndof))
    dg = sp.csr_matrix(
        (
            np.concatenate([g[:, :, 1].ravel(), g[:, :, 0].ravel()]),
            (np.concatenate([rows3, rows3]), np.concatenate([cx, cy])),
        ),
        shape=(ne, ndof),
    )
    return [dxx, dyy, dg]


# ---------------------------------------------------------------------------
# sparse systems and the preconditioned CG solve
# ---------------------------------------------------------------------------

SYMMETRY_RTOL = 1e-12


@dataclass
class SparseSystem:
    """Symmetric sparse system with Dirichlet-constrained entries.

    ``matrix`` is CSR; ``constrained`` lists dof indices carrying the
    prescribed ``constrained_values``.  Constraints are applied by
    symmetric row/column elimination, so the reduced operator stays SPD.
    """

    matrix: sp.csr_matrix
    rhs: np.ndarray
    constrained: np.ndarray = None
    constrained_values: np.ndarray = None

    def __post_init__(self):
        self.matrix = sp.csr_matrix(self.matrix)
        self.rhs = np.asarray(self.rhs, dtype=float)
        if self.constrained is None:
            self.constrained = np.array([], dtype=np.int64)
            self.constrained_values = np.array([])
        self.constrained = np.asarray(self.constrained, dtype=np.int64)
        self.constrained_values = np.asarray(self.constrained_values, dtype=float)
        gap = abs(self.matrix - self.matrix.T).max()
        scale = abs(self.matrix).max() or 1.0
        if gap > SYMMETRY_RTOL * scale:
            raise FieldError(f"matrix is not symmetric (relative gap {gap / scale:g})")


def conjugate_gradient(
    matvec,
    b: np.ndarray,
    diag: np.ndarray,
    x0: np.ndarray | None = None,
    rtol: float = 1e-10,
    max_iter: int | None = None,
):
    """Jacobi-preconditioned CG for an SPD operator given as a matvec.

    Stops when ||b - A x|| <= rtol * ||b||.  Returns (x, iterations);
    raises :class:`LinearSolveError` with the residual when the iteration
    cap (default 10x the unknown count) is exhausted.
    """
    n = len(b)
    if n == 0:
        return np.zeros(0), 0
    if max_iter is None:
        max_iter = max(50, 10 * n)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n), 0
    inv_diag = 1.0 / np.where(diag != 0.0, diag, 1.0)
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    r = b - matvec(x)
    z = inv_diag * r
    p = z.copy()
    rz = r @ z
    for k in range(max_iter):
        res = np.linalg.norm(r)
        if res <= rtol * bnorm:
            return x, k
        ap = matvec(p)
        alpha = rz / (p @ ap)
        x += alpha * p
        r -= alpha * ap
        z = inv_diag * r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    res = float(np.linalg.norm(b - matvec(x)))
    if res <= rtol * bnorm:
        return x, max_iter
    raise LinearSolveError(
        f"CG did not converge in {max_iter} iterations "
        f"(relative residual {res / bnorm:.3e})",
        residual=res / bnorm,
        iterations=max_iter,
    )


def assemble_and_solve(system: SparseSystem, rtol: float = 1e-10) -> np.ndarray:
    """Solve the constrained SPD system by diagonal-preconditioned CG.

    Constrained entries carry their prescribed values exactly; the free
    block is solved to a relative residual of ``rtol``.
    """
    n = system.matrix.shape[0]
    x = np.zeros(n)
    cons = system.constrained
    mask = np.zeros(n, dtype=bool)
    mask[cons] = True
    free = np.nonzero(~mask)[0]
    x[cons] = system.constrained_values
    if len(free) == 0:
        return x
    a_red = system.matrix[free][:, free].tocsr()
    b_red = system.rhs[free]
    if len(cons):
        b_red = b_red - system.matrix[free][:, cons] @ system.constrained_values
    sol, _ = conjugate_gradient(
        lambda v: a_red @ v, b_red, a_red.diagonal(), rtol=rtol
    )
    x[free] = sol
    return x


# ---------------------------------------------------------------------------
# flat-file export
# ---------------------------------------------------------------------------

def write_csv(path, field) -> None:
    """Dump a field as ``index,comp0[,comp1,...]`` rows (12 significant digits)."""
    vals = field.values
    if vals.ndim == 1:
        vals = vals[:, None]
    header = "index," + ",".join(f"comp{i}" for i in range(vals.shape[1]))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for i, row in enumerate(vals):
            fh.write(str(i) + "," + ",".join(f"{v:.12g}" for v in row) + "\n")
