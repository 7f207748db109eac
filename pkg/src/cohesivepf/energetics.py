"""Constitutive laws of the cohesive phase-field model.

The model couples a displacement field, a per-element inelastic strain
("eigenstrain") with a damage-degraded dissipation threshold, and a
quadratically regularized damage field.  Eliminating the eigenstrain
element by element yields a quadratic-linear energy density: quadratic up
to a stress threshold that shrinks as damage grows, linear beyond it.

This module provides the degradation function, the closed-form eigenstrain
updates (1D, anti-plane, plane strain), the reduced densities, the damage
regularization energy, and the closed-form cohesive law together with the
exponential optimal damage profile that generates it.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import fields

INFEASIBLE = np.inf  # sentinel for an inadmissible (negative-trace) eigenstrain

_TRACE_TOL = 1e-12


class MaterialError(ValueError):
    """Inconsistent or incomplete material parameters."""


class ReturnMapError(RuntimeError):
    """Eigenstrain update failed to converge."""


@dataclass(frozen=True)
class MaterialParams:
    """Material and regularization parameters.

    Moduli may be given directly (``mu``, ``kappa``) or derived from
    ``E0`` and ``nu``.  ``sigma_c`` is the tensile strength used by the
    1D and anti-plane models; ``p_c`` and ``tau_c`` are the critical
    pressure and shear stress of the plane-strain strength surface.

    ``voldev_convention`` selects how the plane-strain volumetric /
    deviatoric split is taken for an in-plane eigenstrain:

    - ``"3d"`` (default): three-dimensional trace and deviator with the
      out-of-plane eigenstrain component held at zero; the bulk modulus
      derived from (E0, nu) is E0 / (3 (1 - 2 nu)).
    - ``"2d"``: purely in-plane trace and deviator; the derived bulk
      modulus is E0 / (2 (1 + nu)(1 - 2 nu)).

    Both choices produce the same in-plane elastic response; they differ
    in how the strength surface weighs the trace of the eigenstrain.
    """

    G_c: float
    eps_h: float
    h: float
    E0: float | None = None
    nu: float | None = None
    mu: float | None = None
    kappa: float | None = None
    sigma_c: float | None = None
    p_c: float | None = None
    tau_c: float | None = None
    voldev_convention: str = "3d"

    def __post_init__(self):
        for name in ("G_c", "eps_h", "h"):
            if not getattr(self, name) > 0:
                raise MaterialError(f"{name} must be strictly positive")
        for name in ("E0", "mu", "kappa", "sigma_c", "p_c", "tau_c"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise MaterialError(f"{name} must be strictly positive when given")
        if self.nu is not None and not 0 <= self.nu < 0.5:
            raise MaterialError("nu must lie in [0, 0.5)")
        if self.voldev_convention not in ("2d", "3d"):
            raise MaterialError("voldev_convention must be '2d' or '3d'")
        if self.h > self.eps_h / 2:
            raise MaterialError(
                f"mesh size h={self.h:g} must satisfy h <= eps_h/2 (eps_h={self.eps_h:g})"
            )
        if self.eps_h / self.h < 5:
            warnings.warn(
                f"eps_h/h = {self.eps_h / self.h:.2f} < 5: the damage profile is "
                "marginally resolved",
                stacklevel=2,
            )
        if self.E0 is not None and self.nu is not None:
            if self.mu is None:
                object.__setattr__(self, "mu", self.E0 / (2.0 * (1.0 + self.nu)))
            if self.kappa is None:
                if self.voldev_convention == "3d":
                    k = self.E0 / (3.0 * (1.0 - 2.0 * self.nu))
                else:
                    k = self.E0 / (2.0 * (1.0 + self.nu) * (1.0 - 2.0 * self.nu))
                object.__setattr__(self, "kappa", k)

    # -- derived plane-strain quantities ------------------------------------

    def require(self, *names):
        for name in names:
            if getattr(self, name) is None:
                raise MaterialError(f"material parameter {name} is required here")

    @property
    def kappa_plane(self) -> float:
        """In-plane bulk modulus kappa_2D entering the reduced return map."""
        self.require("kappa", "mu")
        if self.voldev_convention == "3d":
            return self.kappa + self.mu / 3.0
        return self.kappa

    @property
    def p_c_eff(self) -> float:
        """Critical pressure of the reduced (in-plane) strength ellipse.

        Under the 3D convention the out-of-plane deviator of an in-plane
        eigenstrain contributes tr^2/6 to the deviatoric norm, which is
        equivalent to inflating the critical pressure.
        """
        self.require("p_c", "tau_c")
        if self.voldev_convention == "3d":
            return math.sqrt(self.p_c**2 + self.tau_c**2 / 6.0)
        return self.p_c


@dataclass(frozen=True)
class ElasticDomainPoint:
    """Point of the strength surface in (pressure, shear) stress coordinates."""

    p: float
    t: float


# ---------------------------------------------------------------------------
# degradation and the 1D / anti-plane reduced densities
# ---------------------------------------------------------------------------

def degradation(d):
    """Quadratic degradation (1 - d)^2 of the dissipation threshold."""
    d = np.asarray(d, dtype=float)
    if np.any(d < 0) or np.any(d > 1):
        raise ValueError("damage must lie in [0, 1]")
    out = (1.0 - d) ** 2
    return float(out) if out.ndim == 0 else out


def eta_star_1d(s, r, m: MaterialParams):
    """Minimizing eigenstrain for the 1D density: max(0, s - a(r) sigma_c / E0)."""
    m.require("E0", "sigma_c")
    thr = degradation(r) * m.sigma_c / m.E0
    out = np.maximum(0.0, np.asarray(s, dtype=float) - thr)
    return float(out) if out.ndim == 0 else out


def f_1d(s, r, m: MaterialParams):
    """1D energy density after eigenstrain elimination.

    Quadratic E0 s^2 / 2 up to the threshold a(r) sigma_c / E0, then the
    linear continuation a(r) sigma_c s - sigma_c^2 a(r)^2 / (2 E0).
    """
    m.require("E0", "sigma_c")
    s = np.asarray(s, dtype=float)
    a = degradation(r)
    thr = a * m.sigma_c / m.E0
    quad = 0.5 * m.E0 * s**2
    lin = a * m.sigma_c * s - (m.sigma_c**2) * np.asarray(a) ** 2 / (2.0 * m.E0)
    out = np.where(s <= thr, quad, lin)
    return float(out) if out.ndim == 0 else out


def eta_star_antiplane(g, r, m: MaterialParams):
    """Radial minimizing eigenstrain for the anti-plane density."""
    m.require("mu", "sigma_c")
    g = np.asarray(g, dtype=float)
    s = np.linalg.norm(g, axis=-1)
    thr = degradation(r) * m.sigma_c / (2.0 * m.mu)
    amp = np.maximum(0.0, s - thr)
    safe = np.where(s > 0, s, 1.0)
    return g * (amp / safe)[..., None]


def f_antiplane(g, r, m: MaterialParams):
    """Anti-plane energy density; s = |g| with elastic branch mu s^2."""
    m.require("mu", "sigma_c")
    g = np.asarray(g, dtype=float)
    s = np.linalg.norm(g, axis=-1)
    a = degradation(r)
    thr = a * m.sigma_c / (2.0 * m.mu)
    quad = m.mu * s**2
    lin = a * m.sigma_c * s - (m.sigma_c**2) * np.asarray(a) ** 2 / (4.0 * m.mu)
    out = np.where(s <= thr, quad, lin)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# plane strain: invariants, potential, return map
# ---------------------------------------------------------------------------

def plane_invariants(tensor, convention: str):
    """(trace, deviatoric norm) of symmetric 2x2 tensors (..., 3) = (xx, yy, xy).

    Under the "3d" convention the deviator of the in-plane tensor keeps its
    out-of-plane component -tr/3, enlarging the norm by tr^2/6.
    """
    t = np.asarray(tensor, dtype=float)
    tr = t[..., 0] + t[..., 1]
    dev2_sq = (t[..., 0] - 0.5 * tr) ** 2 + (t[..., 1] - 0.5 * tr) ** 2 + 2 * t[..., 2] ** 2
    if convention == "3d":
        dev_sq = dev2_sq + tr**2 / 6.0
    else:
        dev_sq = dev2_sq
    return tr, np.sqrt(np.maximum(dev_sq, 0.0))


def pi_potential(eta, d, m: MaterialParams):
    """Damage-degraded eigenstrain potential a(d) sqrt(p_c^2 tr^2 + tau_c^2 |dev|^2).

    Eigenstrains with negative trace are inadmissible and map to the
    +infinity sentinel (a value, not an error).
    """
    m.require("p_c", "tau_c")
    tr, devn = plane_invariants(eta, m.voldev_convention)
    phi2 = np.sqrt((m.p_c * tr) ** 2 + (m.tau_c * devn) ** 2)
    out = np.where(tr >= -_TRACE_TOL, degradation(d) * phi2, INFEASIBLE)
    return float(out) if out.ndim == 0 else out


def _volumetric_deviatoric_split(eps, convention):
    """P = tr(eps), T = in-plane deviatoric norm, unit in-plane deviator."""
    e = np.asarray(eps, dtype=float)
    P = e[..., 0] + e[..., 1]
    dev = np.stack(
        [e[..., 0] - 0.5 * P, e[..., 1] - 0.5 * P, e[..., 2]], axis=-1
    )
    T = np.sqrt(dev[..., 0] ** 2 + dev[..., 1] ** 2 + 2 * dev[..., 2] ** 2)
    safe = np.where(T > 0, T, 1.0)[..., None]
    return P, T, dev / safe


def return_map_plane_strain(
    P, T, a, m: MaterialParams, newton_tol=1e-12, newton_max=100, rho0=None
):
    """Reduced plane-strain eigenstrain update in (trace, deviator-norm) form.

    Minimizes, over p >= 0 and t >= 0,

        kappa_2D/2 (P - p)^2 + mu (T - t)^2 + a sqrt(pce^2 p^2 + tau_c^2 t^2)

    where pce is the convention's effective critical pressure.  Solved by a
    KKT case split; the interior case reduces to one scalar equation in
    rho = sqrt(pce^2 p^2 + tau_c^2 t^2), handled by safeguarded Newton with
    a golden-section fallback.  ``rho0`` optionally warm-starts the Newton
    iteration (e.g. with the previous sweep's solution).  Returns (p, t)
    and, when ``rho0`` is given, also the converged rho array.
    """
    kap = m.kappa_plane
    mu = m.mu
    pce = m.p_c_eff
    tc = m.tau_c
    P = np.atleast_1d(np.asarray(P, dtype=float))
    T = np.atleast_1d(np.asarray(T, dtype=float))
    a = np.broadcast_to(np.atleast_1d(np.asarray(a, dtype=float)), P.shape).copy()

    p = np.zeros_like(P)
    t = np.zeros_like(P)
    rho_out = np.zeros_like(P) if rho0 is not None else None

    dead = a <= 1e-14
    if dead.any():
        p[dead] = np.maximum(P[dead], 0.0)
        t[dead] = T[dead]

    live = ~dead
    sp = np.maximum(kap * P, 0.0)
    st = 2.0 * mu * T
    with np.errstate(divide="ignore", invalid="ignore"):
        outside = (sp / (a * pce)) ** 2 + (st / (a * tc)) ** 2 > 1.0 + 1e-14
    flow = live & outside

    # volumetric constraint active: pure deviatoric return
    vol0 = flow & (P <= 0.0)
    if vol0.any():
        t[vol0] = np.maximum(0.0, T[vol0] - a[vol0] * tc / (2.0 * mu))

    interior = flow & (P > 0.0)
    if interior.any():
        start = rho0[interior] if rho0 is not None else None
        pi_, ti_, rho_i = _interior_return(
            P[interior], T[interior], a[interior], kap, mu, pce, tc,
            newton_tol, newton_max, start,
        )
        p[interior] = pi_
        t[interior] = ti_
        if rho_out is not None:
            rho_out[interior] = rho_i
    if rho0 is not None:
        return p, t, rho_out
    return p, t


def _interior_return(P, T, a, kap, mu, pce, tc, tol, max_iter, rho0=None):
    """Solve R(rho) = (pce k P / (k rho + a pce^2))^2 + (tc 2mu T / (2mu rho + a tc^2))^2 = 1.

    R - 1 is convex and strictly decreasing for rho >= 0 with a sign change
    on [0, rho_hi] (the stress is outside the damaged surface), so Newton
    converges monotonically from either side of the root; iterates are
    clipped to the bracket.
    """
    c1 = (pce * kap * P) ** 2
    c2 = (tc * 2.0 * mu * T) ** 2
    rho_hi = np.sqrt((pce * P) ** 2 + (tc * T) ** 2)
    rho = np.zeros_like(P) if rho0 is None else np.clip(rho0, 0.0, rho_hi)
    ok = np.zeros(P.shape, dtype=bool)
    for _ in range(max_iter):
        d1 = kap * rho + a * pce**2
        d2 = 2.0 * mu * rho + a * tc**2
        F = c1 / d1**2 + c2 / d2**2 - 1.0
        ok = np.abs(F) <= tol
        if ok.all():
            break
        dF = -2.0 * (kap * c1 / d1**3 + 2.0 * mu * c2 / d2**3)
        step = F / dF
        rho = np.clip(rho - step, 0.0, rho_hi)
    else:
        bad = ~ok
        rho[bad] = _golden_section(c1[bad], c2[bad], a[bad], kap, mu, pce, tc,
                                   rho_hi[bad], tol)
    p = kap * P * rho / (kap * rho + a * pce**2)
    t = 2.0 * mu * T * rho / (2.0 * mu * rho + a * tc**2)
    return p, t, rho


def _golden_section(c1, c2, a, kap, mu, pce, tc, rho_hi, tol, max_iter=400):
    """Fallback: minimize (R(rho) - 1)^2 over the bracket [0, rho_hi]."""

    def resid_sq(r):
        d1 = kap * r + a * pce**2
        d2 = 2.0 * mu * r + a * tc**2
        return (c1 / d1**2 + c2 / d2**2 - 1.0) ** 2

    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    lo = np.zeros_like(rho_hi)
    hi = rho_hi.copy()
    x1 = hi - inv_phi * (hi - lo)
    x2 = lo + inv_phi * (hi - lo)
    f1, f2 = resid_sq(x1), resid_sq(x2)
    for _ in range(max_iter):
        take1 = f1 < f2
        hi = np.where(take1, x2, hi)
        lo = np.where(take1, lo, x1)
        x1 = hi - inv_phi * (hi - lo)
        x2 = lo + inv_phi * (hi - lo)
        f1, f2 = resid_sq(x1), resid_sq(x2)
        if np.max(hi - lo) <= 1e-15 * np.max(rho_hi):
            break
    rho = 0.5 * (lo + hi)
    if np.any(resid_sq(rho) > (10 * tol) ** 2):
        raise ReturnMapError("eigenstrain return map failed to converge")
    return rho


def eta_star_planestrain(eps, d, m: MaterialParams, **kw):
    """Minimizing plane-strain eigenstrain for strains (..., 3) = (xx, yy, xy).

    The deviatoric eigenstrain is coaxial with the strain deviator, so the
    minimization reduces to the two scalars handled by
    :func:`return_map_plane_strain`; the result is reassembled as an
    in-plane symmetric tensor.
    """
    m.require("p_c", "tau_c")
    eps = np.asarray(eps, dtype=float)
    single = eps.ndim == 1
    e = np.atleast_2d(eps)
    P, T, dev_dir = _volumetric_deviatoric_split(e, m.voldev_convention)
    p, t = return_map_plane_strain(P, T, degradation(d), m, **kw)
    eta = dev_dir * t[..., None]
    eta[..., 0] += 0.5 * p
    eta[..., 1] += 0.5 * p
    return eta[0] if single else eta


def elastic_energy_density(e, m: MaterialParams):
    """Plane-strain elastic energy of in-plane tensors (..., 3) = (xx, yy, xy).

    Identical for both vol-dev conventions:
    kappa_2D/2 tr^2 + mu |dev_2D|^2 = lambda/2 tr^2 + mu |e|^2.
    """
    e = np.asarray(e, dtype=float)
    tr = e[..., 0] + e[..., 1]
    lam = m.kappa_plane - m.mu
    norm_sq = e[..., 0] ** 2 + e[..., 1] ** 2 + 2 * e[..., 2] ** 2
    out = 0.5 * lam * tr**2 + m.mu * norm_sq
    return float(out) if out.ndim == 0 else out


def dissipation_density(eta, m: MaterialParams, mode: str):
    """Undegraded dissipation density of an eigenstrain array (per element)."""
    eta = np.asarray(eta, dtype=float)
    if mode == "bar":
        return m.sigma_c * eta
    if mode == "antiplane":
        return m.sigma_c * np.linalg.norm(eta, axis=-1)
    tr, devn = plane_invariants(eta, m.voldev_convention)
    return np.sqrt((m.p_c * tr) ** 2 + (m.tau_c * devn) ** 2)


# ---------------------------------------------------------------------------
# damage regularization, cohesive law, optimal profile
# ---------------------------------------------------------------------------

def damage_regularization_energy(d, m: MaterialParams) -> float:
    """Exact G_c/2 * integral of d^2/eps_h + eps_h |grad d|^2 for a P1 field.

    Uses the consistent P1 mass matrix for the d^2 term so that the
    quadratic profile energy is integrated exactly.
    """
    vals = d.values
    mass = fields.mass_matrix(d.mesh)
    stiff = fields.stiffness_matrix(d.mesh)
    quad = vals @ (mass @ vals) / m.eps_h + m.eps_h * (vals @ (stiff @ vals))
    return 0.5 * m.G_c * float(quad)


def phi_analytic(j, m: MaterialParams):
    """Cohesive law G_c sigma_c j / (G_c + sigma_c j).

    Concave and increasing with slope sigma_c at zero opening and limit
    G_c for large openings.  Negative openings are rejected
    (non-interpenetration).
    """
    m.require("sigma_c")
    j = np.asarray(j, dtype=float)
    if np.any(j < 0):
        raise ValueError("opening must be nonnegative")
    out = m.G_c * m.sigma_c * j / (m.G_c + m.sigma_c * j)
    return float(out) if out.ndim == 0 else out


def optimal_profile(j, m: MaterialParams):
    """Amplitude and shape of the optimal damage transition for an opening j.

    Returns (z0, profile) with z0 = sigma_c j / (G_c + sigma_c j) and
    profile(x) = z0 * exp(-x) for x >= 0, the unique minimizer of the
    unit-length transition energy; that energy evaluates to z0^2.
    """
    m.require("sigma_c")
    if j < 0:
        raise ValueError("opening must be nonnegative")
    z0 = m.sigma_c * j / (m.G_c + m.sigma_c * j)

    def profile(x):
        return z0 * np.exp(-np.asarray(x, dtype=float))

    return z0, profile
