"""Quasi-static staggered (alternating minimization) driver.

Each load step alternates three exact block minimizations of the total
energy until the relative energy decrement stalls:

1. displacement: a linear SPD solve (the elastic energy is quadratic in
   the displacement for a fixed eigenstrain; the elastic modulus is not
   degraded in this model),
2. eigenstrain: the closed-form / scalar-Newton update, element by
   element,
3. damage: a convex box-constrained quadratic program with the previous
   step's damage as an irreversibility floor.

Exact block minimization makes the total energy non-increasing across
inner iterations without line searches.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import energetics, parallel
from .energetics import MaterialParams, degradation
from .fields import (
    ElementField,
    LinearSolveError as LinearSolveErr,
    NodalField,
    conjugate_gradient,
    mass_matrix,
    mean_operator,
    stiffness_matrix,
    strain_operators,
)
from .meshkit import Mesh

_TINY = 1e-300


class SolverError(RuntimeError):
    pass


class QPError(SolverError):
    """Damage subproblem failed to reach the KKT tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class EtaSolveError(SolverError):
    """Eigenstrain update failed on a specific element."""

    def __init__(self, message, element=None):
        super().__init__(message)
        self.element = element


# ---------------------------------------------------------------------------
# load program
# ---------------------------------------------------------------------------

#: boundary tag -> constrained (normal) displacement component
_NORMAL_COMPONENT = {"left": 0, "right": 0, "bottom": 1, "top": 1}


@dataclass(frozen=True)
class EdgeCondition:
    """Kinematic condition on a tagged edge.

    ``roller`` pins the normal displacement to zero; ``prescribed`` ramps
    it to ``amplitude`` times the current load factor.
    """

    kind: str
    amplitude: float = 0.0

    def __post_init__(self):
        if self.kind not in ("roller", "prescribed"):
            raise ValueError(f"unknown edge condition {self.kind!r}")


@dataclass(frozen=True)
class RegionConstraint:
    """Pin one displacement component on an explicit node set (rigid regions)."""

    nodes: np.ndarray
    component: int
    amplitude: float


@dataclass
class LoadProgram:
    """Boundary-condition recipe plus the load-factor ramp.

    ``edges`` maps boundary tags to :class:`EdgeCondition`; the constrained
    component is the edge normal (x for left/right, y for bottom/top).
    ``damage_boundary`` lists the tags where the damage field is pinned to
    zero ("all" = every tagged boundary node).  ``regions`` allows pinning
    whole node sets, as in the rigid-region bar test.
    """

    edges: dict[str, EdgeCondition]
    ramp: np.ndarray
    damage_boundary: object = "all"
    regions: list[RegionConstraint] = field(default_factory=list)

    def __post_init__(self):
        self.ramp = np.asarray(self.ramp, dtype=float)
        if len(self.ramp) == 0 or self.ramp[0] != 0.0:
            raise ValueError("the load ramp must start at 0")
        if np.any(np.diff(self.ramp) < 0):
            raise ValueError("the load ramp must be nondecreasing")

    def prescribed_load(self, t: float) -> tuple[float, float]:
        """Current (x, y) prescribed displacement magnitudes."""
        load = [0.0, 0.0]
        for tag, cond in self.edges.items():
            if cond.kind == "prescribed":
                comp = _NORMAL_COMPONENT.get(tag, 0)
                load[comp] = cond.amplitude * t
        for reg in self.regions:
            if reg.amplitude:
                load[reg.component] = reg.amplitude * t
        return load[0], load[1]


def linear_ramp(n_steps: int, peak: float = 1.0) -> np.ndarray:
    """n_steps equal increments from 0 to peak (n_steps + 1 values)."""
    return np.linspace(0.0, peak, n_steps + 1)


# ---------------------------------------------------------------------------
# state and energy bookkeeping
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StaggeredState:
    """Converged (u, eta, d) triple plus the irreversibility floor d_prev."""

    u: NodalField
    eta: ElementField
    d: NodalField
    d_prev: NodalField
    step_index: int = 0
    load_factor: float = 0.0

    def __post_init__(self):
        d, dp = self.d.values, self.d_prev.values
        if np.any(d < -1e-12) or np.any(d > 1 + 1e-12):
            raise ValueError("damage out of [0, 1]")
        if np.any(dp - d > 1e-10):
            raise ValueError("d_prev must not exceed d (irreversibility)")


@dataclass(frozen=True)
class EnergyBreakdown:
    """Elastic / eigenstrain-dissipation / damage-regularization split."""

    elastic: float
    dissipation: float
    fracture: float

    @property
    def total(self) -> float:
        return self.elastic + self.dissipation + self.fracture


@dataclass
class StepResult:
    state: StaggeredState
    energy: EnergyBreakdown
    iterations: int
    converged: bool
    energy_history: list[float]
    rejections: int = 0


# ---------------------------------------------------------------------------
# discretized model: precomputed operators for one (mesh, material, loads)
# ---------------------------------------------------------------------------

class DiscreteModel:
    """Assembled operators for one mesh / material / load program.

    ``mode`` is "bar" (1D), "antiplane" (scalar on triangles), or
    "planestrain" (2-vector on triangles); it defaults to "bar" in 1D and
    "planestrain" in 2D.
    """

    def __init__(self, mesh: Mesh, material: MaterialParams, loads: LoadProgram,
                 mode: str | None = None):
        if mode is None:
            mode = "bar" if mesh.dimension == 1 else "planestrain"
        if mode not in ("bar", "antiplane", "planestrain"):
            raise ValueError(f"unknown mode {mode!r}")
        if mode == "bar" and mesh.dimension != 1:
            raise ValueError("bar mode requires a 1D mesh")
        if mode != "bar" and mesh.dimension != 2:
            raise ValueError(f"{mode} mode requires a 2D mesh")
        if mode == "bar":
            material.require("E0", "sigma_c")
        elif mode == "antiplane":
            material.require("mu", "sigma_c")
        else:
            material.require("kappa", "mu", "p_c", "tau_c")

        self.mesh = mesh
        self.material = material
        self.loads = loads
        self.mode = mode
        self.n_comp = 2 if mode == "planestrain" else 1
        self.eta_comp = {"bar": 1, "antiplane": 2, "planestrain": 3}[mode]
        self.n_dof = self.n_comp * mesh.n_nodes

        w = mesh.element_measures
        self.w = w
        self.D = strain_operators(mesh, vector=(mode == "planestrain"))
        self.A = self._elastic_matrix()

        # scalar operators for the damage subproblem
        self.M = mass_matrix(mesh)
        self.K = stiffness_matrix(mesh)
        self.P = mean_operator(mesh)
        self.PT = self.P.T.tocsr()
        self.PT_sq = self.P.multiply(self.P).T.tocsr()
        gc, eps = material.G_c, material.eps_h
        self.H_frac = (gc / eps) * self.M + (gc * eps) * self.K
        self.H_frac_diag = self.H_frac.diagonal()
        self._rho_cache = None
        self._build_qp_scatter()

    def _build_qp_scatter(self):
        # The damage Hessian H_frac + 2 P' diag(c) P shares the sparsity of
        # the mass matrix; precompute the scatter of the 2 c_e / nv^2
        # element blocks into CSR data slots so each sweep's Hessian is one
        # in-place update instead of sparse products.
        mesh = self.mesh
        nv = mesh.dimension + 1
        rows = np.repeat(mesh.elements, nv, axis=1).ravel()
        cols = np.tile(mesh.elements, (1, nv)).ravel()
        n = mesh.n_nodes
        pattern = sp.coo_matrix(
            (np.ones(len(rows)), (rows, cols)), shape=(n, n)).tocsr()
        if not (np.array_equal(pattern.indices, self.H_frac.indices)
                and np.array_equal(pattern.indptr, self.H_frac.indptr)):
            raise RuntimeError("inconsistent sparsity for the damage Hessian")
        row_of_entry = np.repeat(np.arange(n), np.diff(pattern.indptr))
        csr_keys = row_of_entry.astype(np.int64) * n + pattern.indices
        entry_keys = rows.astype(np.int64) * n + cols
        self._qp_scatter = np.searchsorted(csr_keys, entry_keys)
        self._qp_matrix = pattern
        self._qp_nv2 = nv * nv

        self._build_dirichlet()
        self._reduce_matrix()

    # -- assembly -----------------------------------------------------------

    def _elastic_matrix(self):
        m, w = self.material, self.w
        if self.mode == "planestrain":
            lam = m.kappa_plane - m.mu
            dxx, dyy, dg = self.D
            W = sp.diags(w)
            axx = dxx.T @ W @ dxx
            ayy = dyy.T @ W @ dyy
            axy = dxx.T @ W @ dyy
            a = (lam + 2 * m.mu) * (axx + ayy) + lam * (axy + axy.T)
            a = a + m.mu * (dg.T @ W @ dg)
            return a.tocsr()
        k = stiffness_matrix(self.mesh)
        coef = m.E0 if self.mode == "bar" else 2.0 * m.mu
        return (coef * k).tocsr()

    def _build_dirichlet(self):
        values: dict[int, float] = {}

        def pin(dof, amp):
            if dof in values and abs(values[dof] - amp) > 1e-14:
                raise ValueError(f"conflicting Dirichlet amplitudes on dof {dof}")
            values[dof] = amp

        for tag, cond in self.loads.edges.items():
            nodes = self.mesh.nodes_with_tag(tag)
            if len(nodes) == 0:
                raise ValueError(f"load program references unknown edge tag {tag!r}")
            amp = cond.amplitude if cond.kind == "prescribed" else 0.0
            if self.n_comp == 1:
                if cond.kind == "roller":
                    raise ValueError("roller supports are undefined for scalar fields")
                for n in nodes:
                    pin(int(n), amp)
            else:
                comp = _NORMAL_COMPONENT[tag]
                for n in nodes:
                    pin(2 * int(n) + comp, amp)
        for reg in self.loads.regions:
            for n in np.asarray(reg.nodes, dtype=np.int64):
                dof = self.n_comp * int(n) + reg.component
                pin(dof, reg.amplitude)

        dofs = np.array(sorted(values), dtype=np.int64)
        self.dirichlet_dofs = dofs
        self.dirichlet_amps = np.array([values[d] for d in dofs])
        mask = np.zeros(self.n_dof, dtype=bool)
        mask[dofs] = True
        self.free = np.nonzero(~mask)[0]

        db = self.loads.damage_boundary
        if db == "all":
            self.damage_nodes = self.mesh.boundary_nodes()
        elif db is None:
            self.damage_nodes = np.array([], dtype=np.int64)
        else:
            sets = [self.mesh.nodes_with_tag(tag) for tag in db]
            self.damage_nodes = np.unique(np.concatenate(sets)) if sets else \
                np.array([], dtype=np.int64)

    def _reduce_matrix(self):
        free, cons = self.free, self.dirichlet_dofs
        a_free = self.A[free]
        self.A_ff = a_free[:, free].tocsr()
        self.A_fc = a_free[:, cons].tocsr()
        self.A_ff_diag = self.A_ff.diagonal()
        self._lu = None

    def _factorization(self):
        # The elastic matrix never changes (no degradation of the elastic
        # modulus), so one sparse Cholesky-like factorization serves every
        # displacement solve of the run.
        if self._lu is None:
            from scipy.sparse.linalg import splu

            self._lu = splu(self.A_ff.tocsc())
        return self._lu

    # -- block solves ---------------------------------------------------------

    def zero_state(self) -> StaggeredState:
        shape = (self.mesh.n_nodes,) if self.n_comp == 1 else (self.mesh.n_nodes, 2)
        eshape = (self.mesh.n_elements,) if self.eta_comp == 1 else \
            (self.mesh.n_elements, self.eta_comp)
        zero_d = NodalField(self.mesh, np.zeros(self.mesh.n_nodes))
        return StaggeredState(
            u=NodalField(self.mesh, np.zeros(shape)),
            eta=ElementField(self.mesh, np.zeros(eshape)),
            d=zero_d,
            d_prev=zero_d,
        )

    def solve_u(self, eta: np.ndarray, load_factor: float,
                warm: np.ndarray | None = None, rtol: float = 1e-10,
                method: str = "direct") -> np.ndarray:
        """Displacement minimizer for fixed eigenstrain (flat dof vector).

        ``method="direct"`` reuses a cached sparse factorization (the
        matrix is constant); ``method="cg"`` runs Jacobi-preconditioned CG
        warm-started from ``warm``.  Either way the relative residual is
        verified against ``rtol``.
        """
        b = self._eigenstrain_rhs(eta)
        xc = self.dirichlet_amps * load_factor
        rhs = b[self.free]
        if len(xc):
            rhs = rhs - self.A_fc @ xc
        bscale = np.linalg.norm(rhs)
        if len(self.free) == 0 or bscale == 0.0:
            sol = np.zeros(len(self.free))
        elif method == "direct":
            sol = self._factorization().solve(rhs)
            res = np.linalg.norm(rhs - self.A_ff @ sol) / bscale
            if res > rtol:
                raise LinearSolveErr(
                    f"direct solve residual {res:.3e} exceeds {rtol:.1e}",
                    residual=res,
                )
        else:
            x0 = None if warm is None else warm.reshape(-1)[self.free]
            sol, _ = conjugate_gradient(
                lambda v: self.A_ff @ v, rhs, self.A_ff_diag, x0=x0, rtol=rtol
            )
        u = np.zeros(self.n_dof)
        u[self.free] = sol
        u[self.dirichlet_dofs] = xc
        return u if self.n_comp == 1 else u.reshape(-1, 2)

    def _eigenstrain_rhs(self, eta):
        m, w = self.material, self.w
        if self.mode == "bar":
            return self.D[0].T @ (w * eta) * m.E0
        if self.mode == "antiplane":
            return 2.0 * m.mu * (
                self.D[0].T @ (w * eta[:, 0]) + self.D[1].T @ (w * eta[:, 1])
            )
        lam = m.kappa_plane - m.mu
        tr = eta[:, 0] + eta[:, 1]
        sxx = lam * tr + 2 * m.mu * eta[:, 0]
        syy = lam * tr + 2 * m.mu * eta[:, 1]
        sxy = 2 * m.mu * eta[:, 2]  # pairs with the engineering-shear row
        dxx, dyy, dg = self.D
        return dxx.T @ (w * sxx) + dyy.T @ (w * syy) + dg.T @ (w * sxy)

    def strain(self, u: np.ndarray) -> np.ndarray:
        """Per-element gradient / symmetric strain of a flat dof vector."""
        flat = u.reshape(-1)
        if self.mode == "bar":
            return self.D[0] @ flat
        if self.mode == "antiplane":
            return np.column_stack([self.D[0] @ flat, self.D[1] @ flat])
        dxx, dyy, dg = self.D
        return np.column_stack(
            [dxx @ flat, dyy @ flat, 0.5 * (dg @ flat)]
        )

    def solve_eta(self, strain: np.ndarray, dbar: np.ndarray) -> np.ndarray:
        """Element-by-element eigenstrain minimizer at fixed strain and damage."""
        m = self.material
        ne = self.mesh.n_elements
        try:
            if self.mode == "bar":
                return energetics.eta_star_1d(strain, dbar, m)
            if self.mode == "antiplane":
                return energetics.eta_star_antiplane(strain, dbar, m)
            if self._rho_cache is None:
                self._rho_cache = np.zeros(ne)
            out = np.empty((ne, 3))
            chunks: list = []
            a = degradation(np.clip(dbar, 0.0, 1.0))

            def work(lo, hi):
                P, T, dev_dir = energetics._volumetric_deviatoric_split(
                    strain[lo:hi], m.voldev_convention)
                p, t, rho = energetics.return_map_plane_strain(
                    P, T, a[lo:hi], m, rho0=self._rho_cache[lo:hi])
                self._rho_cache[lo:hi] = rho
                eta = dev_dir * t[:, None]
                eta[:, 0] += 0.5 * p
                eta[:, 1] += 0.5 * p
                out[lo:hi] = eta
                return None

            parallel.chunked_apply(work, ne, chunks)
            return out
        except energetics.ReturnMapError as exc:
            raise EtaSolveError(f"eigenstrain update failed: {exc}") from exc

    def dissipation_coefficients(self, eta: np.ndarray) -> np.ndarray:
        """Measure-weighted undegraded dissipation density per element."""
        return self.w * energetics.dissipation_density(eta, self.material, self.mode)

    def solve_d(self, coeff: np.ndarray, floor: np.ndarray,
                warm: np.ndarray | None = None, kkt_tol: float = 1e-9) -> np.ndarray:
        """Damage minimizer: box-constrained QP with floor <= d <= 1.

        The objective couples sum_e c_e (1 - dbar_e)^2 with the quadratic
        regularization; both are exact quadratics of the nodal values.
        """
        lo = np.asarray(floor, dtype=float).copy()
        hi = np.ones(self.mesh.n_nodes)
        lo[self.damage_nodes] = 0.0
        hi[self.damage_nodes] = 0.0

        data = self.H_frac.data.copy()
        np.add.at(data, self._qp_scatter,
                  np.repeat(2.0 * coeff / self._qp_nv2, self._qp_nv2))
        self._qp_matrix.data = data
        hmul = self._qp_matrix.__matmul__
        f = 2.0 * (self.PT @ coeff)
        diag = self.H_frac_diag + 2.0 * (self.PT_sq @ coeff)
        x0 = np.clip(warm if warm is not None else lo, lo, hi)
        tol = kkt_tol * max(1.0, np.abs(f).max() if len(f) else 1.0)
        return minimize_bound_qp(hmul, diag, f, lo, hi, x0, tol)

    # -- energies -------------------------------------------------------------

    def energies(self, u, eta, d, strain=None, dbar=None) -> EnergyBreakdown:
        m, w = self.material, self.w
        if strain is None:
            strain = self.strain(np.asarray(u))
        if dbar is None:
            dbar = self.P @ np.asarray(d)
        a = degradation(np.clip(dbar, 0.0, 1.0))
        if self.mode == "bar":
            elastic = 0.5 * m.E0 * float(w @ (strain - eta) ** 2)
        elif self.mode == "antiplane":
            diff = strain - eta
            elastic = m.mu * float(w @ (diff**2).sum(axis=1))
        else:
            elastic = float(w @ energetics.elastic_energy_density(strain - eta, m))
        dens = energetics.dissipation_density(eta, m, self.mode)
        dissipation = float(w @ (a * dens))
        dv = np.asarray(d)
        frac = 0.5 * m.G_c * (
            float(dv @ (self.M @ dv)) / m.eps_h
            + m.eps_h * float(dv @ (self.K @ dv))
        )
        return EnergyBreakdown(elastic, dissipation, frac)


# ---------------------------------------------------------------------------
# bound-constrained QP (projected Newton / active set with CG inner solves)
# ---------------------------------------------------------------------------

def minimize_bound_qp(hmul, diag, f, lo, hi, x0, tol, max_outer=200):
    """Minimize 1/2 x'Hx - f'x subject to lo <= x <= hi.

    Active-set iteration: bound-binding variables (by sign of the
    gradient) are frozen, the free block is solved approximately by
    Jacobi-preconditioned CG, and the step is projected back onto the box.
    Terminates when the projected-gradient (KKT) residual drops below
    ``tol``; raises :class:`QPError` otherwise.
    """
    x = np.clip(x0, lo, hi)
    fixed = (hi - lo) <= 0
    n = len(x)
    g = hmul(x) - f
    for _ in range(max_outer):
        at_lo = x <= lo + 1e-14
        at_hi = x >= hi - 1e-14
        resid = np.where(at_lo, np.minimum(g, 0.0), g)
        resid = np.where(at_hi, np.maximum(g, 0.0), resid)
        resid[fixed] = 0.0
        r = np.abs(resid).max() if n else 0.0
        if r <= tol:
            return x
        free = ~((at_lo & (g >= 0)) | (at_hi & (g <= 0)) | fixed)
        idx = np.nonzero(free)[0]
        step = np.zeros(n)
        step[idx] = _masked_cg(hmul, diag, -g, idx, n)
        x_new = np.clip(x + step, lo, hi)
        if np.array_equal(x_new, x):
            # binding changed under projection; fall back to projected gradient
            alpha = 1.0 / max(diag.max(), _TINY)
            x_new = np.clip(x - alpha * resid, lo, hi)
            if np.array_equal(x_new, x):
                break
        x = x_new
        g = hmul(x) - f
    resid = np.where(x <= lo + 1e-14, np.minimum(g, 0.0), g)
    resid = np.where(x >= hi - 1e-14, np.maximum(g, 0.0), resid)
    resid[fixed] = 0.0
    r = float(np.abs(resid).max()) if n else 0.0
    if r <= tol:
        return x
    raise QPError(f"damage QP stalled at KKT residual {r:.3e} (tol {tol:.3e})",
                  residual=r)


def _masked_cg(hmul, diag, rhs_full, idx, n, rtol=0.02, max_iter=120):
    """Truncated CG on the free sub-block of H, via zero-padded matvecs.

    Loose tolerance and a hard iteration cap: these are inexact Newton
    steps, and the outer projected iteration re-checks the true KKT
    residual, so partial progress is always usable.
    """
    b = rhs_full[idx]
    work = np.zeros(n)

    def mv(v):
        work[idx] = v
        return hmul(work)[idx]

    sub_diag = np.maximum(diag[idx], _TINY)
    bnorm = np.linalg.norm(b)
    x = np.zeros_like(b)
    if bnorm == 0.0:
        return x
    r = b.copy()
    z = r / sub_diag
    p = z.copy()
    rz = r @ z
    for _ in range(max_iter):
        ap = mv(p)
        denom = p @ ap
        if denom <= 0.0:
            break
        alpha = rz / denom
        x += alpha * p
        r -= alpha * ap
        if np.linalg.norm(r) <= rtol * bnorm:
            break
        z = r / sub_diag
        rz_new = r @ z
        if rz_new <= 0.0:
            break
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x


# ---------------------------------------------------------------------------
# staggered stepping
# ---------------------------------------------------------------------------

def solve_u(state: StaggeredState, loads: LoadProgram, m: MaterialParams,
            mode: str | None = None, engine: DiscreteModel | None = None) -> NodalField:
    """Displacement block minimizer at the state's load factor."""
    engine = engine or DiscreteModel(state.u.mesh, m, loads, mode)
    u = engine.solve_u(state.eta.values, state.load_factor, warm=state.u.values)
    return NodalField(engine.mesh, u)


def solve_eta(state: StaggeredState, m: MaterialParams,
              mode: str | None = None, loads: LoadProgram | None = None,
              engine: DiscreteModel | None = None) -> ElementField:
    """Eigenstrain block minimizer at the state's displacement and damage."""
    engine = engine or DiscreteModel(
        state.u.mesh, m, loads or _free_loads(state.u.mesh), mode
    )
    strain = engine.strain(state.u.values)
    dbar = engine.P @ state.d.values
    return ElementField(engine.mesh, engine.solve_eta(strain, dbar))


def solve_d(state: StaggeredState, m: MaterialParams,
            mode: str | None = None, loads: LoadProgram | None = None,
            engine: DiscreteModel | None = None) -> NodalField:
    """Damage block minimizer above the irreversibility floor."""
    engine = engine or DiscreteModel(
        state.u.mesh, m, loads or _free_loads(state.u.mesh), mode
    )
    coeff = engine.dissipation_coefficients(state.eta.values)
    d = engine.solve_d(coeff, state.d_prev.values, warm=state.d.values)
    return NodalField(engine.mesh, d)


def _free_loads(mesh):
    return LoadProgram(edges={}, ramp=np.array([0.0]), damage_boundary="all")


def _valley_search(engine, u_plain, v, d, floor, e_base, reject_slack,
                   s_max=2048.0):
    """Bracketing energy line search along a slow drift direction.

    Near a critical load the band amplitude is an almost-neutral mode: the
    sweep-to-sweep displacement increment v stays essentially constant for
    thousands of sweeps while the energy creeps down.  Probing the reduced
    energy at u_plain + s v for doubling s compresses that creep into one
    jump.  Each probe is a consistent (eigenstrain, damage) update, so an
    accepted jump is a valid monotone iterate.  Returns the best probe
    (s, u, eta, d, energy) or None.
    """
    best = None
    e_prev = e_base
    s = 8.0
    while s <= s_max:
        u_s = u_plain + s * v
        strain_s = engine.strain(u_s)
        eta_s = engine.solve_eta(strain_s, engine.P @ d)
        d_s = engine.solve_d(engine.dissipation_coefficients(eta_s),
                             floor, warm=d)
        e_s = engine.energies(u_s, eta_s, d_s, strain=strain_s)
        if e_s.total < e_prev - reject_slack:
            best = (s, u_s, eta_s, d_s, e_s)
            e_prev = e_s.total
            s *= 2.0
        else:
            break
    return best


#: Anderson acceleration depth for the displacement fixed point
_ANDERSON_DEPTH = 5
#: cap on the extrapolation coefficients (keeps proposals finite near kinks)
_ANDERSON_COEF_MAX = 1e4


class _AndersonMixer:
    """Anderson extrapolation for u = G(u) with bounded coefficients.

    Stores the last few (iterate, image) pairs; ``propose`` returns the
    residual-minimizing affine combination of the images.  The caller
    validates each proposal (energy descent) and calls ``reset`` when a
    proposal is rejected.
    """

    def __init__(self, depth: int = _ANDERSON_DEPTH):
        self.depth = depth
        self.us: list[np.ndarray] = []
        self.gs: list[np.ndarray] = []

    def reset(self):
        self.us.clear()
        self.gs.clear()

    def propose(self, u: np.ndarray, g: np.ndarray) -> np.ndarray:
        u, g = u.ravel(), g.ravel()
        self.us.append(u.copy())
        self.gs.append(g.copy())
        if len(self.us) > self.depth:
            self.us.pop(0)
            self.gs.pop(0)
        n = len(self.us)
        if n == 1:
            return g
        R = np.stack([gi - ui for gi, ui in zip(self.gs, self.us)], axis=1)
        dR = R[:, 1:] - R[:, :-1]
        rhs = R[:, -1]
        try:
            gamma, *_ = np.linalg.lstsq(dR, rhs, rcond=1e-12)
        except np.linalg.LinAlgError:
            return g
        if not np.all(np.isfinite(gamma)) or np.abs(gamma).max() > _ANDERSON_COEF_MAX:
            return g
        alpha = np.zeros(n)
        alpha[-1] = 1.0 - gamma[-1]
        alpha[0] = gamma[0]
        for j in range(1, n - 1):
            alpha[j] = gamma[j] - gamma[j - 1]
        G = np.stack(self.gs, axis=1)
        return G @ alpha


def staggered_step(
    state: StaggeredState,
    loads: LoadProgram,
    m: MaterialParams,
    tol: float = 1e-8,
    max_iter: int = 200,
    *,
    load_factor: float | None = None,
    step_index: int | None = None,
    engine: DiscreteModel | None = None,
    freeze_inelastic: bool = False,
    relaxation: bool = True,
    accel_ratio: float = 3.0,
    persistence: int = 50,
    stationarity_rtol: float = 1e-5,
) -> StepResult:
    """One quasi-static load step of alternating minimization.

    Sweeps displacement -> eigenstrain -> damage until the relative total
    energy decrement falls below ``tol`` (default 1e-8) or ``max_iter``
    sweeps are spent (flagged, not fatal).  On return the irreversibility
    floor is advanced to the converged damage.

    Two refinements keep the plain alternation both fast and honest about
    bifurcations:

    - Once a strain band exists (max/median element strain above
      ``accel_ratio``) the displacement fixed point contracts like
      1 - O(h), so sweeps are wrapped in safeguarded Anderson
      extrapolation; any proposal that fails to lower the total energy is
      rejected and the plain sweep repeated, keeping the recorded energy
      history non-increasing.
    - While the inelastic state is still spatially uniform the iteration
      may sit exponentially close to an unstable uniform critical point;
      plain (unaccelerated) dynamics are used there and the stopping rule
      additionally requires ``persistence`` consecutive below-tolerance
      sweeps, so a developing localization instability is not mistaken for
      convergence.
    """
    engine = engine or DiscreteModel(state.u.mesh, m, loads, None)
    t = state.load_factor if load_factor is None else load_factor
    k = state.step_index if step_index is None else step_index

    warm = state.u.values
    if state.load_factor > 0 and t != state.load_factor:
        warm = warm * (t / state.load_factor)
    u = engine.solve_u(state.eta.values, t, warm=warm)
    eta = state.eta.values
    d = state.d.values
    floor = state.d_prev.values

    energy = engine.energies(u, eta, d)
    history = [energy.total]
    converged = False
    iterations = 0
    mixer = _AndersonMixer()
    u_plain = u
    quiet = 0
    rejections = 0
    theta = 1.0  # trust factor blending the Anderson proposal with the plain sweep
    it = 0
    while it < max_iter:
        it += 1
        iterations = it
        if freeze_inelastic:
            energy = engine.energies(u, eta, d)
            history.append(energy.total)
            converged = True
            break
        strain = engine.strain(u)
        dbar = engine.P @ d
        eta_new = engine.solve_eta(strain, dbar)
        d_new = engine.solve_d(engine.dissipation_coefficients(eta_new),
                               floor, warm=d)
        energy_new = engine.energies(u, eta_new, d_new, strain=strain)
        if energy_new.total > history[-1] + 5e-11 * max(1.0, abs(history[-1])):
            # extrapolated displacement overshot: shrink the trust factor
            # and redo from the plain sweep (whose descent is guaranteed)
            u = u_plain
            theta = max(theta / 4.0, 0.02)
            rejections += 1
            continue
        theta = min(1.0, theta * 1.6)
        eta, d = eta_new, d_new
        energy = energy_new
        history.append(energy.total)

        inelastic = bool(np.any(eta_new)) or bool(np.any(d > floor + 1e-14))
        norms = strain_norms(strain)
        mean = float(norms.mean())
        # mean-based gate: robust when most elements carry no strain at all
        localized = mean > 0 and float(norms.max()) >= accel_ratio * mean
        decrement_ok = (abs(history[-1] - history[-2])
                        <= tol * max(abs(history[-1]), _TINY))
        quiet = quiet + 1 if decrement_ok else 0

        u_plain = engine.solve_u(eta, t, warm=u)
        r_inf = float(np.abs(u_plain - u).max())
        u_scale = max(float(np.abs(u).max()), _TINY)
        tight = r_inf <= stationarity_rtol * u_scale
        if decrement_ok:
            if not inelastic:
                stationary = True
            elif localized:
                # extrapolated sweeps make single decrements erratic, so
                # require the displacement fixed point itself to be tight
                stationary = tight
            else:
                stationary = quiet >= persistence
            if stationary:
                u = u_plain
                converged = True
                break
        creeping = (abs(history[-1] - history[-2])
                    <= 100.0 * tol * max(abs(history[-1]), _TINY))
        if relaxation and localized and creeping and not tight:
            # tiny decrements at a finite fixed-point residual: the iterate
            # is creeping along a nearly flat valley; jump along the drift
            slack = 5e-11 * max(1.0, abs(history[-1]))
            jump = _valley_search(engine, u_plain, u_plain - u, d, floor,
                                  history[-1], slack)
            if jump is not None:
                _, u, eta, d, energy = jump
                history.append(energy.total)
                quiet = 0
                mixer.reset()
                u_plain = engine.solve_u(eta, t, warm=u)
        if relaxation and localized:
            proposal = mixer.propose(u, u_plain).reshape(u_plain.shape)
            u = u_plain + theta * (proposal - u_plain)
        else:
            mixer.reset()
            u = u_plain

    new_state = StaggeredState(
        u=NodalField(engine.mesh, u),
        eta=ElementField(engine.mesh, eta),
        d=NodalField(engine.mesh, d),
        d_prev=NodalField(engine.mesh, d.copy()),
        step_index=k,
        load_factor=t,
    )
    return StepResult(new_state, energy, iterations, converged, history, rejections)


# ---------------------------------------------------------------------------
# quasi-static run with per-step records and event detection
# ---------------------------------------------------------------------------

@dataclass
class StepRecord:
    step: int
    load_factor: float
    load_x: float
    load_y: float
    elastic: float
    dissipation: float
    fracture: float
    total: float
    max_d: float
    inner_iters: int
    converged: bool
    strain_variance: float
    strain_concentration: float
    max_energy_rise: float = 0.0  # largest inner-iteration energy increase
    irreversibility_violation: float = 0.0  # max nodal damage decrease

    TRACE_COLUMNS = (
        "step", "load_x", "load_y", "elastic", "dissipation",
        "fracture", "total", "max_d", "inner_iters",
    )

    def trace_row(self):
        return [getattr(self, c) for c in self.TRACE_COLUMNS]


@dataclass
class QuasistaticTrace:
    """Per-step records, detected events, and key state snapshots."""

    records: list[StepRecord]
    events: dict[str, int | None]
    final_state: StaggeredState
    localized_state: StaggeredState | None
    mesh: Mesh

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records])

    @property
    def localization_step(self):
        return self.events.get("strain_localization")


def strain_norms(strain: np.ndarray) -> np.ndarray:
    """Frobenius norm per element (tensor rows are (xx, yy, xy))."""
    if strain.ndim == 1:
        return np.abs(strain)
    if strain.shape[1] == 2:
        return np.linalg.norm(strain, axis=1)
    return np.sqrt(strain[:, 0] ** 2 + strain[:, 1] ** 2 + 2 * strain[:, 2] ** 2)


def strain_statistics(strain: np.ndarray, w: np.ndarray) -> tuple[float, float]:
    """(area-weighted component variance, max/median concentration ratio)."""
    comps = strain[:, None] if strain.ndim == 1 else strain
    wt = w / w.sum()
    mean = wt @ comps
    factors = np.array([1.0, 1.0, 2.0])[: comps.shape[1]]
    var = float(((wt[:, None] * (comps - mean) ** 2) * factors).sum())
    norms = strain_norms(strain)
    med = float(np.median(norms))
    conc = float(norms.max() / med) if med > 0 else 1.0
    return var, conc


def run_quasistatic(
    mesh: Mesh,
    loads: LoadProgram,
    m: MaterialParams,
    *,
    mode: str | None = None,
    tol: float = 1e-8,
    max_iter: int = 200,
    freeze_inelastic: bool = False,
    localization_ratio: float = 5.0,
    stop_after_localization: int | None = None,
    stationarity_rtol: float = 1e-5,
    on_step=None,
) -> QuasistaticTrace:
    """Drive the staggered solver over the whole load ramp.

    Records per-step energies and strain statistics, and detects three
    events online: the first step with a concentrated strain band
    ("strain_localization", max/median element strain ratio above
    ``localization_ratio``), and the first steps with max nodal damage
    above 0.5 and 0.9.  The state at the localization step is kept for
    post-processing.

    ``stop_after_localization`` truncates the ramp that many steps past
    the localization event; every localization-step quantity is already
    final by then, which makes verification runs far cheaper than tracing
    the full ramp.
    """
    engine = DiscreteModel(mesh, m, loads, mode)
    state = engine.zero_state()
    records: list[StepRecord] = []
    events: dict[str, int | None] = {
        "strain_localization": None,
        "damage_ge_half": None,
        "damage_ge_09": None,
    }
    localized_state = None

    for k, t in enumerate(loads.ramp):
        d_before = state.d.values
        if k == 0:
            energy = engine.energies(state.u.values, state.eta.values, state.d.values)
            result = StepResult(state, energy, 0, True, [energy.total])
        else:
            result = staggered_step(
                state, loads, m, tol=tol, max_iter=max_iter,
                load_factor=float(t), step_index=k, engine=engine,
                freeze_inelastic=freeze_inelastic,
                stationarity_rtol=stationarity_rtol,
            )
        state = result.state
        strain = engine.strain(state.u.values)
        var, conc = strain_statistics(strain, engine.w)
        max_d = float(state.d.values.max(initial=0.0))
        lx, ly = loads.prescribed_load(float(t))
        hist = np.asarray(result.energy_history)
        rise = float(np.diff(hist).max(initial=0.0)) if len(hist) > 1 else 0.0
        rec = StepRecord(
            step=k, load_factor=float(t), load_x=lx, load_y=ly,
            elastic=result.energy.elastic, dissipation=result.energy.dissipation,
            fracture=result.energy.fracture, total=result.energy.total,
            max_d=max_d, inner_iters=result.iterations, converged=result.converged,
            strain_variance=var, strain_concentration=conc,
            max_energy_rise=max(rise, 0.0),
            irreversibility_violation=float(
                np.max(d_before - state.d.values, initial=0.0)),
        )
        records.append(rec)
        if k > 0:
            if events["strain_localization"] is None and conc >= localization_ratio:
                events["strain_localization"] = k
                localized_state = state
            if events["damage_ge_half"] is None and max_d >= 0.5:
                events["damage_ge_half"] = k
            if events["damage_ge_09"] is None and max_d >= 0.9:
                events["damage_ge_09"] = k
        if on_step is not None:
            on_step(rec, state)
        if (stop_after_localization is not None
                and events["strain_localization"] is not None
                and k >= events["strain_localization"] + stop_after_localization):
            break

    return QuasistaticTrace(records, events, state, localized_state, mesh)
