"""Scripted verification experiments.

Each experiment runs a documented scenario, measures the quantities the
model is expected to reproduce (cohesive-law curve, refinement limit of
the jump construction, localization loads, band widths, fracture-energy
isotropy across mesh variants, crack paths), and returns an
:class:`ExperimentReport` whose target checks make the comparison
machine-readable.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import svgplot, vtkio
from .energetics import (
    ElasticDomainPoint,
    MaterialParams,
    damage_regularization_energy,
    f_1d,
    optimal_profile,
    phi_analytic,
    plane_invariants,
)
from .fields import NodalField, element_mean, gradient
from .meshkit import Mesh, MeshSpec, band_width, build_interval, \
    build_structured_triangulation
from .solvers import (
    EdgeCondition,
    LoadProgram,
    QuasistaticTrace,
    RegionConstraint,
    StaggeredState,
    linear_ramp,
    run_quasistatic,
    strain_norms,
)

#: mesh / step presets for the 2D scenarios
PRESETS = {
    "full": {"h": 0.005, "eps_h": 0.025, "steps": 1000},
    "reduced": {"h": 0.01, "eps_h": 0.05, "steps": 250},
}

#: default 2D material (square and L-shape scenarios)
SQUARE_MATERIAL = {"E0": 1e3, "nu": 0.3, "G_c": 0.2, "p_c": 10.0, "tau_c": 10.0}

#: default 1D bar material
BAR_MATERIAL = {"E0": 1e4, "G_c": 1e-3, "sigma_c": 5.0, "eps_h": 0.4}

#: inner-sweep cap used by the experiments (the localization step needs
#: far more alternations than routine steps)
EXPERIMENT_MAX_ITER = 20000

#: displacement fixed-point residual targets; the full preset carries the
#: 1-percent cross-variant comparison, so it converges deeper
PRESET_STATIONARITY_RTOL = {"full": 2e-6, "reduced": 1e-5}


@dataclass
class TargetCheck:
    """One measured quantity against its expected value and tolerance.

    ``kind`` selects the comparison: "relative" / "absolute" two-sided
    equality, or one-sided "upper" (value <= target + tol) / "lower"
    (value >= target - tol) bounds.
    """

    name: str
    value: float
    target: float
    tol: float
    kind: str = "relative"

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.value):
            return False
        if self.kind == "upper":
            return self.value <= self.target + self.tol
        if self.kind == "lower":
            return self.value >= self.target - self.tol
        if self.kind == "absolute":
            return abs(self.value - self.target) <= self.tol
        scale = max(abs(self.target), 1e-300)
        return abs(self.value - self.target) / scale <= self.tol


@dataclass
class ExperimentReport:
    """Everything an experiment measured, plus its pass/fail verdicts."""

    scenario: str
    parameters: dict
    summary: dict
    targets: list[TargetCheck]
    trace: QuasistaticTrace | None = None
    curves: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(t.passed for t in self.targets)

    def lines(self) -> list[str]:
        out = []
        for t in self.targets:
            status = "PASS" if t.passed else "FAIL"
            out.append(
                f"[{status}] {self.scenario}: {t.name} = {t.value:.6g} "
                f"(target {t.target:.6g}, tol {t.tol:g} {t.kind})"
            )
        return out

    def write(self, outdir, stride: int = 0) -> None:
        """Emit report.csv, trace.csv, SVG plots, and VTK snapshots."""
        os.makedirs(outdir, exist_ok=True)
        rows = [("scenario", self.scenario)]
        rows += [(f"param.{k}", v) for k, v in sorted(self.parameters.items())]
        rows += [(k, v) for k, v in self.summary.items()]
        for t in self.targets:
            rows.append((f"target.{t.name}", t.value))
            rows.append((f"target.{t.name}.expected", t.target))
            rows.append((f"target.{t.name}.passed", int(t.passed)))
        with open(os.path.join(outdir, "report.csv"), "w", encoding="utf-8") as fh:
            fh.write("key,value\n")
            for k, v in rows:
                fh.write(f"{k},{_fmt(v)}\n")
        if self.trace is not None:
            write_trace_csv(os.path.join(outdir, "trace.csv"), self.trace)
            _plot_energy(os.path.join(outdir, "plot_energy.svg"), self.trace)
            _write_state_vtk(outdir, self.trace.mesh, self.trace.final_state,
                             len(self.trace.records) - 1)
            if self.trace.localized_state is not None:
                _write_state_vtk(outdir, self.trace.mesh,
                                 self.trace.localized_state,
                                 self.trace.localization_step)
        for name, (xs, series) in self.curves.items():
            plot = svgplot.LinePlot(title=name, xlabel=xs[1], ylabel="")
            for label, ys, markers in series:
                plot.add(xs[0], ys, label=label, markers=markers)
            plot.write(os.path.join(outdir, f"plot_{name}.svg"))


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def write_trace_csv(path, trace: QuasistaticTrace) -> None:
    from .solvers import StepRecord

    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(StepRecord.TRACE_COLUMNS) + "\n")
        for rec in trace.records:
            fh.write(",".join(_fmt(v) for v in rec.trace_row()) + "\n")


def _plot_energy(path, trace: QuasistaticTrace) -> None:
    x = trace.column("load_x")
    plot = svgplot.LinePlot(title="energy evolution", xlabel="prescribed displacement",
                            ylabel="energy")
    for name in ("elastic", "dissipation", "fracture", "total"):
        plot.add(x, trace.column(name), label=name)
    plot.write(path)


def _write_state_vtk(outdir, mesh, state: StaggeredState, step: int) -> None:
    strain = gradient(state.u)
    cell = {
        "strain_norm": strain_norms(strain.values),
        "eta_norm": strain_norms(state.eta.values),
    }
    point = {"damage": state.d}
    if state.u.values.ndim == 2:
        point["displacement"] = state.u
    vtkio.write_vtk(os.path.join(outdir, f"fields_{step:04d}.vtk"), mesh,
                    point_data=point, cell_data=cell)


# ---------------------------------------------------------------------------
# band / crack-path measurements
# ---------------------------------------------------------------------------

@dataclass
class BandMetrics:
    damage_width: float
    strain_width: float
    path_angle_deg: float
    path_centroid: tuple
    damage_max: float


def measure_bands(mesh: Mesh, state: StaggeredState,
                  rel_threshold: float = 0.5) -> BandMetrics | None:
    """Damage/strain band widths and the crack-path principal axis.

    Elements are marked relative to the current peak (values above
    ``rel_threshold`` times the max), which keeps the measurement
    well-defined at any band amplitude.  Widths are measured across the
    band, along the minor principal axis of the marked set.
    """
    dbar = element_mean(state.d).values
    dmax = float(dbar.max(initial=0.0))
    if dmax <= 1e-8 or mesh.dimension != 2:
        return None
    dmg = dbar >= rel_threshold * dmax
    sn = strain_norms(gradient(state.u).values)
    smax = float(sn.max(initial=0.0))
    strn = sn >= rel_threshold * smax if smax > 0 else dmg

    angle, centroid, normal = _principal_axis(mesh, dmg)
    s_angle, _, s_normal = _principal_axis(mesh, strn)
    return BandMetrics(
        damage_width=band_width(mesh, dmg, normal),
        strain_width=band_width(mesh, strn, s_normal),
        path_angle_deg=angle,
        path_centroid=centroid,
        damage_max=float(state.d.values.max()),
    )


def _principal_axis(mesh: Mesh, marked: np.ndarray):
    """(angle in degrees mod 180, centroid, unit normal) of a marked set."""
    w = mesh.element_measures[marked]
    c = mesh.centroids()[marked]
    wsum = w.sum()
    mean = (w[:, None] * c).sum(axis=0) / wsum
    dc = c - mean
    cov = (w[:, None, None] * dc[:, :, None] * dc[:, None, :]).sum(axis=0) / wsum
    vals, vecs = np.linalg.eigh(cov)
    major = vecs[:, int(np.argmax(vals))]
    minor = vecs[:, int(np.argmin(vals))]
    if len(c) == 1 or np.ptp(vals) < 1e-30:
        major, minor = np.array([0.0, 1.0]), np.array([1.0, 0.0])
    angle = math.degrees(math.atan2(major[1], major[0])) % 180.0
    return angle, (float(mean[0]), float(mean[1])), minor


def angle_difference(a: float, b: float) -> float:
    """Smallest difference of two undirected angles in degrees."""
    d = abs(a - b) % 180.0
    return min(d, 180.0 - d)


# ---------------------------------------------------------------------------
# 1D cohesive-law experiment
# ---------------------------------------------------------------------------

def bar_material(eps_over_h: float = 5.0, **overrides) -> MaterialParams:
    kw = dict(BAR_MATERIAL)
    kw.update(overrides)
    kw.setdefault("h", kw["eps_h"] / eps_over_h)
    return MaterialParams(**kw)


def bar_1d(
    j_samples=None,
    m: MaterialParams | None = None,
    steps: int = 50,
    u_max: float = 5e-3,
    length: float = 2.0,
    tol: float = 1e-10,
    max_iter: int = 2000,
) -> ExperimentReport:
    """Three-region stretched bar reproducing the cohesive law.

    A tiny central element (h/25) hosts the displacement jump between a
    fixed left region and a rigidly displaced right region; the converged
    total energy at opening j is compared against the closed-form law
    G_c sigma_c j / (G_c + sigma_c j) at every sampled opening.
    """
    m = m or bar_material()
    if j_samples is not None:
        j_samples = np.asarray(sorted(j_samples), dtype=float)
        u_max = float(j_samples[-1])
        ramp = np.concatenate([[0.0], j_samples / u_max])
    else:
        ramp = linear_ramp(steps)
    mesh = build_interval(MeshSpec("interval", length, m.h, refinement=1 / 25))
    x = mesh.nodes
    tiny = m.h / 25
    mid = length / 2
    left = np.nonzero(x <= mid - tiny / 2 + 1e-12)[0]
    right = np.nonzero(x >= mid + tiny / 2 - 1e-12)[0]
    loads = LoadProgram(
        edges={},
        ramp=ramp,
        damage_boundary=("left", "right"),
        regions=[RegionConstraint(left, 0, 0.0), RegionConstraint(right, 0, u_max)],
    )
    trace = run_quasistatic(mesh, loads, m, tol=tol, max_iter=max_iter)

    jumps = u_max * trace.column("load_factor")
    numeric = trace.column("total")
    analytic = np.array([phi_analytic(j, m) for j in jumps])
    checked = jumps >= 0.1 * u_max
    rel = np.zeros_like(jumps)
    rel[1:] = np.abs(numeric[1:] - analytic[1:]) / analytic[1:]
    worst = float(rel[checked].max()) if checked.any() else 0.0

    targets = [
        TargetCheck("max_rel_error_phi", worst, 0.0, 0.05, kind="upper"),
    ]
    # concavity and monotonicity of the sampled curve
    if len(numeric) > 3:
        second = np.diff(numeric, 2)
        targets.append(TargetCheck(
            "curve_max_second_difference",
            float(second[1:].max()), 0.0, 1e-8 * max(numeric.max(), 1e-300),
            kind="upper"))
        targets.append(TargetCheck(
            "curve_min_increment", float(np.diff(numeric).min()), 0.0,
            1e-12, kind="lower"))
    report = ExperimentReport(
        scenario="bar-1d",
        parameters={"E0": m.E0, "sigma_c": m.sigma_c, "G_c": m.G_c,
                    "eps_h": m.eps_h, "h": m.h, "steps": len(ramp) - 1,
                    "u_max": u_max, "length": length},
        summary={
            "final_jump": float(jumps[-1]),
            "final_phi_numeric": float(numeric[-1]),
            "final_phi_analytic": float(analytic[-1]),
            "max_rel_error": worst,
            "max_damage": float(trace.column("max_d").max()),
        },
        targets=targets,
        trace=trace,
        curves={
            "phi": ((jumps, "opening j"), [
                ("analytic", analytic, False),
                ("numeric", numeric, True),
            ])
        },
    )
    return report


# ---------------------------------------------------------------------------
# refinement limit of the jump + damage-profile construction
# ---------------------------------------------------------------------------

def recovery_sequence_energy(
    j: float,
    h_list=None,
    m: MaterialParams | None = None,
    eps_scale: float = 0.5,
    length: float = 2.0,
) -> dict:
    """Discrete energy of the step-displacement + exponential-damage state.

    For each mesh size h the displacement is the interpolated step of
    amplitude j at the domain center, the damage the interpolated
    exponential profile of matched amplitude with internal length
    eps_h = eps_scale * sqrt(h); the total energy is evaluated exactly and
    must tighten onto the closed-form cohesive value as h -> 0.
    """
    if j < 0:
        raise ValueError("jump must be nonnegative")
    h_list = list(h_list) if h_list is not None else [2e-4, 1e-4, 5e-5, 2.5e-5]
    energies = []
    for h in h_list:
        eps_h = eps_scale * math.sqrt(h)
        mm = MaterialParams(
            G_c=(m.G_c if m else BAR_MATERIAL["G_c"]),
            eps_h=eps_h, h=h,
            E0=(m.E0 if m else BAR_MATERIAL["E0"]),
            sigma_c=(m.sigma_c if m else BAR_MATERIAL["sigma_c"]),
        )
        n = int(round(length / h / 2)) * 2  # even count puts a node at center
        coords = np.linspace(0.0, length, n + 1)
        elements = np.column_stack([np.arange(n), np.arange(1, n + 1)])
        mesh = Mesh(1, coords, elements)
        mid = length / 2
        u = NodalField(mesh, np.where(coords > mid + 1e-12, j, 0.0))
        z0, profile = optimal_profile(j, mm)
        d = NodalField(mesh, profile(np.abs(coords - mid) / eps_h))
        s = gradient(u).values
        r = element_mean(d).values
        bulk = float(mesh.element_measures @ f_1d(s, r, mm))
        energies.append(bulk + damage_regularization_energy(d, mm))
    phi = phi_analytic(j, bar_material()) if m is None else phi_analytic(j, m)
    gaps = [abs(e - phi) for e in energies]
    return {
        "j": j,
        "h_list": h_list,
        "energies": energies,
        "phi": phi,
        "gaps": gaps,
        "final_rel_gap": gaps[-1] / phi if phi > 0 else 0.0,
        "gap_shrinks": all(gaps[k + 1] < gaps[k] for k in range(len(gaps) - 3, len(gaps) - 1))
        if len(gaps) >= 3 else True,
    }


def recovery_check(j_values=(1e-3, 5e-3, 2e-2), **kw) -> ExperimentReport:
    """Run :func:`recovery_sequence_energy` over a set of jump amplitudes."""
    results = [recovery_sequence_energy(j, **kw) for j in j_values]
    targets = []
    for res in results:
        targets.append(TargetCheck(
            f"rel_gap_j_{res['j']:g}", res["final_rel_gap"], 0.0, 0.02,
            kind="upper"))
        targets.append(TargetCheck(
            f"gap_shrinks_j_{res['j']:g}", float(res["gap_shrinks"]), 1.0,
            0.5, kind="absolute"))
    summary = {}
    for res in results:
        tag = f"j_{res['j']:g}"
        summary[f"{tag}.phi"] = res["phi"]
        for h, e in zip(res["h_list"], res["energies"]):
            summary[f"{tag}.energy_h_{h:g}"] = e
    curves = {}
    for res in results:
        curves[f"recovery_j_{res['j']:g}"] = (
            (res["h_list"], "mesh size h"),
            [("discrete energy", res["energies"], True),
             ("phi", [res["phi"]] * len(res["h_list"]), False)],
        )
    return ExperimentReport(
        scenario="recovery-check",
        parameters={"j_values": list(j_values)},
        summary=summary,
        targets=targets,
        curves=curves,
    )


# ---------------------------------------------------------------------------
# 2D square and L-shape scenarios
# ---------------------------------------------------------------------------

def square_material(preset: str = "full", convention: str = "3d",
                    **overrides) -> MaterialParams:
    kw = dict(SQUARE_MATERIAL)
    kw["eps_h"] = PRESETS[preset]["eps_h"]
    kw["h"] = PRESETS[preset]["h"]
    kw["voldev_convention"] = convention
    kw.update(overrides)
    return MaterialParams(**kw)


#: reproduction targets for the two square loading scenarios (full preset)
SQUARE_TARGETS = {
    (0.5, -0.45): {"loc_load": (0.01, 0.009), "fracture": 0.8309e-3,
                   "unique_path": False},
    (1.0, 0.5): {"loc_load": (0.017, 0.0085), "fracture": 0.0579106,
                 "unique_path": True},
}


def square_test(
    loads_xy=(0.5, -0.45),
    mesh_variant: str = "A",
    m: MaterialParams | None = None,
    preset: str = "full",
    steps: int | None = None,
    tol: float = 1e-8,
    max_iter: int = EXPERIMENT_MAX_ITER,
    stop_after_localization: int | None = None,
    stationarity_rtol: float | None = None,
    on_step=None,
) -> ExperimentReport:
    """Biaxially stretched unit square on one structured mesh variant.

    Rollers on the left and bottom edges, prescribed normal displacements
    ramped linearly on the right and top, damage pinned to zero on the
    whole boundary.  Reports the localization step (first step whose
    strain field concentrates in a band), the fracture energy at that
    step, band widths, and the crack-path summary.

    ``stop_after_localization`` truncates the ramp past the localization
    step; all reported target quantities are unaffected.
    """
    m = m or square_material(preset)
    steps = steps if steps is not None else PRESETS[preset]["steps"]
    if stationarity_rtol is None:
        stationarity_rtol = PRESET_STATIONARITY_RTOL.get(preset, 1e-5)
    ux, uy = loads_xy
    mesh = build_structured_triangulation(
        MeshSpec("square", 1.0, m.h, diag=mesh_variant))
    program = LoadProgram(
        edges={
            "left": EdgeCondition("roller"),
            "bottom": EdgeCondition("roller"),
            "right": EdgeCondition("prescribed", ux),
            "top": EdgeCondition("prescribed", uy),
        },
        ramp=linear_ramp(steps),
    )
    trace = run_quasistatic(mesh, program, m, tol=tol, max_iter=max_iter,
                            stop_after_localization=stop_after_localization,
                            stationarity_rtol=stationarity_rtol,
                            on_step=on_step)
    return _square_report(trace, m, (ux, uy), mesh_variant, preset, steps)


def _square_report(trace, m, loads_xy, variant, preset, steps):
    loc = trace.localization_step
    summary = {
        "localization_step": loc if loc is not None else -1,
        "damage_ge_half_step": trace.events["damage_ge_half"] or -1,
        "damage_ge_09_step": trace.events["damage_ge_09"] or -1,
    }
    targets = []
    bands = None
    if loc is not None:
        rec = trace.records[loc]
        bands = measure_bands(trace.mesh, trace.localized_state)
        summary.update({
            "localization_load_x": rec.load_x,
            "localization_load_y": rec.load_y,
            "fracture_energy_at_localization": rec.fracture,
            "pre_localization_strain_variance": max(
                r.strain_variance for r in trace.records[1:loc]) if loc > 1 else 0.0,
        })
        if bands is not None:
            summary.update({
                "damage_band_width": bands.damage_width,
                "strain_band_width": bands.strain_width,
                "crack_angle_deg": bands.path_angle_deg,
                "crack_centroid_x": bands.path_centroid[0],
                "crack_centroid_y": bands.path_centroid[1],
            })
            targets.append(TargetCheck(
                "damage_band_width", bands.damage_width, 2 * m.eps_h,
                m.eps_h, kind="absolute"))
            targets.append(TargetCheck(
                "strain_band_width", bands.strain_width, 2 * m.h,
                m.h, kind="absolute"))

    spec_targets = SQUARE_TARGETS.get(tuple(loads_xy)) if preset == "full" else None
    if spec_targets is not None and loc is not None:
        rec = trace.records[loc]
        step_tol = abs(loads_xy[0]) / steps
        targets.append(TargetCheck(
            "localization_load_x", rec.load_x, spec_targets["loc_load"][0],
            step_tol + 1e-12, kind="absolute"))
        targets.append(TargetCheck(
            "fracture_energy", rec.fracture, spec_targets["fracture"], 0.05))
        if spec_targets["unique_path"] and bands is not None:
            targets.append(TargetCheck(
                "crack_angle_vs_vertical",
                angle_difference(bands.path_angle_deg, 90.0), 0.0, 5.0,
                kind="absolute"))
            targets.append(TargetCheck(
                "crack_offset_from_center", bands.path_centroid[0], 0.5,
                2 * m.eps_h, kind="absolute"))
    return ExperimentReport(
        scenario=f"square-2d[{loads_xy[0]:g},{loads_xy[1]:g}]{variant}",
        parameters={"E0": m.E0, "nu": m.nu, "G_c": m.G_c, "eps_h": m.eps_h,
                    "h": m.h, "p_c": m.p_c, "tau_c": m.tau_c,
                    "convention": m.voldev_convention,
                    "U_x": loads_xy[0], "U_y": loads_xy[1],
                    "steps": steps, "variant": variant, "preset": preset},
        summary=summary,
        targets=targets,
        trace=trace,
    )


def lshape_test(
    mesh_variant: str = "A",
    steps: int = 6,
    m: MaterialParams | None = None,
    preset: str = "full",
    u_max: float = 0.018,
    tol: float = 1e-8,
    max_iter: int = EXPERIMENT_MAX_ITER,
    stationarity_rtol: float | None = None,
    on_step=None,
) -> ExperimentReport:
    """L-shaped panel under equal biaxial edge displacements.

    Same material as the square scenario; the re-entrant edges are
    traction-free and the crack initiates at the interior corner.  The
    initiation step is the first step with max nodal damage above 0.5;
    the crack-path summary is the principal axis of the damage band.
    """
    m = m or square_material(preset)
    if stationarity_rtol is None:
        stationarity_rtol = PRESET_STATIONARITY_RTOL.get(preset, 1e-5)
    mesh = build_structured_triangulation(
        MeshSpec("lshape", 1.0, m.h, diag=mesh_variant))
    program = LoadProgram(
        edges={
            "left": EdgeCondition("roller"),
            "bottom": EdgeCondition("roller"),
            "right": EdgeCondition("prescribed", u_max),
            "top": EdgeCondition("prescribed", u_max),
        },
        ramp=linear_ramp(steps),
    )
    trace = run_quasistatic(mesh, program, m, tol=tol, max_iter=max_iter,
                            stationarity_rtol=stationarity_rtol,
                            on_step=on_step)
    init = trace.events["damage_ge_half"]
    bands = measure_bands(mesh, trace.final_state)
    summary = {
        "initiation_step": init if init is not None else -1,
        "initiation_load": trace.records[init].load_x if init is not None else
        float("nan"),
        "final_fracture_energy": trace.records[-1].fracture,
    }
    targets = []
    if bands is not None:
        summary.update({
            "crack_angle_deg": bands.path_angle_deg,
            "crack_centroid_x": bands.path_centroid[0],
            "crack_centroid_y": bands.path_centroid[1],
            "damage_band_width": bands.damage_width,
        })
    if preset == "full" and init is not None:
        targets.append(TargetCheck(
            "initiation_load", trace.records[init].load_x, 0.006,
            u_max / steps + 1e-12, kind="absolute"))
    return ExperimentReport(
        scenario=f"lshape-2d[{mesh_variant}]",
        parameters={"E0": m.E0, "nu": m.nu, "G_c": m.G_c, "eps_h": m.eps_h,
                    "h": m.h, "p_c": m.p_c, "tau_c": m.tau_c,
                    "convention": m.voldev_convention,
                    "U_max": u_max, "steps": steps, "variant": mesh_variant,
                    "preset": preset},
        summary=summary,
        targets=targets,
        trace=trace,
    )


# ---------------------------------------------------------------------------
# strength-surface trace
# ---------------------------------------------------------------------------

@dataclass
class DomainTrace:
    points: list[ElasticDomainPoint]
    Q: ElasticDomainPoint
    theta_degrees: float


def elastic_domain_trace(m: MaterialParams | None = None,
                         n_points: int = 100) -> DomainTrace:
    """Boundary of the undamaged elastic domain in (pressure, shear) space.

    Quarter ellipse through (p_c, 0) and (0, tau_c) joined to the line
    t = tau_c for negative pressure.  Point Q marks where the stress ray
    of the (1, 0.5) biaxial stretching crosses the surface.
    """
    m = m or square_material("full")
    if n_points < 2:
        raise ValueError("n_points must be at least 2")
    pts = []
    n_line = max(2, n_points // 4)
    for p in np.linspace(-m.p_c, 0.0, n_line, endpoint=False):
        pts.append(ElasticDomainPoint(float(p), float(m.tau_c)))
    for th in np.linspace(math.pi / 2, 0.0, n_points):
        pts.append(ElasticDomainPoint(
            float(m.p_c * math.cos(th)), float(m.tau_c * math.sin(th))))

    strain = np.array([1.0, 0.5, 0.0])
    tr, devn = plane_invariants(strain, m.voldev_convention)
    p_dir = m.kappa * float(tr)
    t_dir = 2.0 * m.mu * float(devn)
    theta = math.degrees(math.atan2(t_dir, p_dir))
    r = 1.0 / math.sqrt((p_dir / m.p_c) ** 2 + (t_dir / m.tau_c) ** 2)
    q = ElasticDomainPoint(r * p_dir, r * t_dir)
    return DomainTrace(pts, q, theta)
