"""Staggered solver tests: block solves, descent, irreversibility."""

import numpy as np
import pytest

from cohesivepf.energetics import MaterialParams
from cohesivepf.fields import NodalField
from cohesivepf.meshkit import MeshSpec, build_interval, build_structured_triangulation
from cohesivepf.solvers import (
    DiscreteModel,
    EdgeCondition,
    LoadProgram,
    RegionConstraint,
    StaggeredState,
    linear_ramp,
    minimize_bound_qp,
    run_quasistatic,
    solve_d,
    solve_eta,
    solve_u,
    staggered_step,
)


def bar_setup(steps=10, u_max=5e-3):
    m = MaterialParams(G_c=1e-3, eps_h=0.4, h=0.08, E0=1e4, sigma_c=5.0)
    mesh = build_interval(MeshSpec("interval", 2.0, 0.08, refinement=1 / 25))
    x = mesh.nodes
    tiny = 0.08 / 25
    left = np.nonzero(x <= 1.0 - tiny / 2 + 1e-12)[0]
    right = np.nonzero(x >= 1.0 + tiny / 2 - 1e-12)[0]
    loads = LoadProgram(
        edges={}, ramp=linear_ramp(steps),
        damage_boundary=("left", "right"),
        regions=[RegionConstraint(left, 0, 0.0),
                 RegionConstraint(right, 0, u_max)],
    )
    return mesh, loads, m


def square_setup(h=0.1, eps_h=0.5, steps=10, loads_xy=(0.5, -0.45)):
    m = MaterialParams(G_c=0.2, eps_h=eps_h, h=h, E0=1e3, nu=0.3,
                       p_c=10.0, tau_c=10.0)
    mesh = build_structured_triangulation(MeshSpec("square", 1.0, h))
    loads = LoadProgram(
        edges={
            "left": EdgeCondition("roller"),
            "bottom": EdgeCondition("roller"),
            "right": EdgeCondition("prescribed", loads_xy[0]),
            "top": EdgeCondition("prescribed", loads_xy[1]),
        },
        ramp=linear_ramp(steps),
    )
    return mesh, loads, m


def test_load_program_validation():
    with pytest.raises(ValueError):
        LoadProgram(edges={}, ramp=np.array([0.1, 0.2]))
    with pytest.raises(ValueError):
        LoadProgram(edges={}, ramp=np.array([0.0, 0.2, 0.1]))
    with pytest.raises(ValueError):
        EdgeCondition("sliding")


def test_solve_u_homogeneous_biaxial():
    mesh, loads, m = square_setup()
    engine = DiscreteModel(mesh, m, loads)
    state = engine.zero_state()
    u = engine.solve_u(state.eta.values, 0.02)
    strain = engine.strain(u)
    # prescribed normal displacements with rollers give a homogeneous field
    assert np.allclose(strain[:, 0], 0.5 * 0.02, atol=1e-12)
    assert np.allclose(strain[:, 1], -0.45 * 0.02, atol=1e-12)
    assert np.allclose(strain[:, 2], 0.0, atol=1e-12)


def test_solve_u_zero_load():
    mesh, loads, m = square_setup()
    engine = DiscreteModel(mesh, m, loads)
    u = engine.solve_u(engine.zero_state().eta.values, 0.0)
    assert np.allclose(u, 0.0)


def test_solve_u_bar_uniform_stretch():
    m = MaterialParams(G_c=1e-3, eps_h=0.4, h=0.08, E0=1e4, sigma_c=5.0)
    mesh = build_interval(MeshSpec("interval", 1.0, 0.1))
    loads = LoadProgram(
        edges={"left": EdgeCondition("prescribed", 0.0),
               "right": EdgeCondition("prescribed", 1.0)},
        ramp=linear_ramp(4, 2e-4),
    )
    engine = DiscreteModel(mesh, m, loads)
    u = engine.solve_u(engine.zero_state().eta.values, 1e-4)
    assert np.allclose(engine.strain(u), 1e-4, atol=1e-14)


def test_solve_eta_below_threshold_zero():
    mesh, loads, m = square_setup()
    engine = DiscreteModel(mesh, m, loads)
    u = engine.solve_u(engine.zero_state().eta.values, 1e-3)  # tiny load
    eta = engine.solve_eta(engine.strain(u), np.zeros(mesh.n_elements))
    assert np.allclose(eta, 0.0)


def test_solve_eta_uniform_bar_past_threshold():
    m = MaterialParams(G_c=1e-3, eps_h=0.4, h=0.08, E0=1e4, sigma_c=5.0)
    mesh = build_interval(MeshSpec("interval", 1.0, 0.1))
    loads = LoadProgram(
        edges={"left": EdgeCondition("prescribed", 0.0),
               "right": EdgeCondition("prescribed", 1.0)},
        ramp=linear_ramp(4, 5e-3),
    )
    engine = DiscreteModel(mesh, m, loads)
    u = engine.solve_u(engine.zero_state().eta.values, 2e-3)
    eta = engine.solve_eta(engine.strain(u), np.zeros(mesh.n_elements))
    # uniform stretch 2e-3 past threshold 5e-4: eta = s - sigma_c / E0
    assert np.allclose(eta, 2e-3 - 5e-4, atol=1e-12)


def test_solve_eta_broken_element_absorbs_strain():
    m = MaterialParams(G_c=1e-3, eps_h=0.4, h=0.08, E0=1e4, sigma_c=5.0)
    mesh = build_interval(MeshSpec("interval", 1.0, 0.1))
    loads = LoadProgram(
        edges={"left": EdgeCondition("prescribed", 0.0),
               "right": EdgeCondition("prescribed", 1.0)},
        ramp=linear_ramp(4, 5e-3),
    )
    engine = DiscreteModel(mesh, m, loads)
    u = engine.solve_u(engine.zero_state().eta.values, 3e-3)
    dbar = np.ones(mesh.n_elements)  # fully damaged
    eta = engine.solve_eta(engine.strain(u), dbar)
    assert np.allclose(eta, 3e-3, atol=1e-12)


def test_solve_d_no_driving_force_stays_at_floor():
    mesh, loads, m = square_setup()
    engine = DiscreteModel(mesh, m, loads)
    floor = np.zeros(mesh.n_nodes)
    d = engine.solve_d(np.zeros(mesh.n_elements), floor)
    assert np.allclose(d, 0.0)
    # and with a nonzero floor the floor is returned
    floor = np.full(mesh.n_nodes, 0.2)
    floor[engine.damage_nodes] = 0.0
    d = engine.solve_d(np.zeros(mesh.n_elements), floor)
    assert np.allclose(d, floor)


def test_solve_d_all_dirichlet_zero():
    mesh, loads, m = square_setup(h=0.25, eps_h=0.5)
    loads.damage_boundary = "all"
    engine = DiscreteModel(mesh, m, loads)
    # tag every node as constrained by rebuilding with an explicit list
    engine.damage_nodes = np.arange(mesh.n_nodes)
    d = engine.solve_d(np.full(mesh.n_elements, 10.0), np.zeros(mesh.n_nodes))
    assert np.allclose(d, 0.0)


def test_solve_d_localized_source_decays_like_profile():
    # a single strongly driven element produces a peaked damage field that
    # decays about as exp(-distance / eps_h)
    m = MaterialParams(G_c=1e-3, eps_h=0.4, h=0.08, E0=1e4, sigma_c=5.0)
    mesh = build_interval(MeshSpec("interval", 2.0, 0.08, refinement=1 / 25))
    loads = LoadProgram(edges={}, ramp=linear_ramp(2),
                        damage_boundary=("left", "right"))
    engine = DiscreteModel(mesh, m, loads)
    coeff = np.zeros(mesh.n_elements)
    k = int(np.argmin(mesh.element_measures))
    coeff[k] = 1e-3
    d = engine.solve_d(coeff, np.zeros(mesh.n_nodes))
    x0 = mesh.centroids()[k]
    peak = d.max()
    assert peak > 0.1
    dist = np.abs(mesh.nodes - x0)
    # compare inside half the bar, before the d = 0 end condition bends
    # the exponential into its truncated (sinh) variant
    inner = dist < 0.55
    model = peak * np.exp(-dist / m.eps_h)
    assert np.allclose(d[inner], model[inner], rtol=0.15, atol=5e-3)


def test_minimize_bound_qp_matches_projection():
    rng = np.random.default_rng(9)
    n = 60
    q = rng.normal(size=(n, n))
    h = q @ q.T + n * np.eye(n)
    f = rng.normal(size=n)
    lo, hi = np.zeros(n), np.full(n, 0.1)
    x = minimize_bound_qp(lambda v: h @ v, np.diag(h), f, lo, hi,
                          np.zeros(n), 1e-11)
    # KKT: projected gradient vanishes
    g = h @ x - f
    kkt = np.where(x <= lo + 1e-12, np.minimum(g, 0), g)
    kkt = np.where(x >= hi - 1e-12, np.maximum(g, 0), kkt)
    assert np.abs(kkt).max() < 1e-9
    # and beats a dense box-projected reference computed by scipy
    from scipy.optimize import minimize as sp_min
    ref = sp_min(lambda v: 0.5 * v @ h @ v - f @ v, np.zeros(n),
                 jac=lambda v: h @ v - f,
                 bounds=[(0.0, 0.1)] * n, method="L-BFGS-B",
                 options={"ftol": 1e-16, "gtol": 1e-12}).x
    assert np.allclose(x, ref, atol=1e-6)


def test_staggered_step_elastic_regime_one_iteration():
    mesh, loads, m = square_setup()
    engine = DiscreteModel(mesh, m, loads)
    state = engine.zero_state()
    res = staggered_step(state, loads, m, engine=engine, load_factor=0.002,
                         step_index=1)
    assert res.iterations == 1
    assert res.converged
    assert np.allclose(res.state.eta.values, 0.0)
    assert np.allclose(res.state.d.values, 0.0)


def test_staggered_descent_and_irreversibility_bar():
    mesh, loads, m = bar_setup(steps=10)
    trace = run_quasistatic(mesh, loads, m, tol=1e-10, max_iter=500)
    d_prev = np.zeros(mesh.n_nodes)
    for rec in trace.records:
        assert rec.converged
    # energy history within each step non-increasing is asserted by the
    # staggered loop's safeguard; re-check the per-step energies are finite
    # and the final damage exceeds the first step's
    state = trace.final_state
    assert np.all(state.d.values >= d_prev - 1e-12)
    assert trace.records[-1].max_d > trace.records[1].max_d


def test_staggered_inner_history_monotone():
    mesh, loads, m = square_setup(h=0.1, eps_h=0.5, steps=20)
    engine = DiscreteModel(mesh, m, loads)
    state = engine.zero_state()
    for k in (4, 5, 6):
        res = staggered_step(state, loads, m, engine=engine,
                             load_factor=k / 20 * 0.1, step_index=k,
                             max_iter=800)
        state = res.state
        hist = np.array(res.energy_history)
        assert np.all(np.diff(hist) <= 1e-10)


def test_run_quasistatic_zero_ramp():
    mesh, loads, m = square_setup()
    loads.ramp = np.zeros(3)
    trace = run_quasistatic(mesh, loads, m)
    assert all(r.total == 0.0 for r in trace.records)


def test_run_quasistatic_frozen_is_linear_elastic():
    mesh, loads, m = square_setup(steps=5)
    trace = run_quasistatic(mesh, loads, m, freeze_inelastic=True)
    t = trace.column("load_factor")
    e = trace.column("total")
    # quadratic energy in the load factor
    coef = e[1:] / t[1:] ** 2
    assert np.allclose(coef, coef[0], rtol=1e-8)
    assert np.allclose(trace.column("fracture"), 0.0)
    assert np.allclose(trace.column("dissipation"), 0.0)


def test_run_quasistatic_irreversibility_across_steps():
    mesh, loads, m = square_setup(h=0.1, eps_h=0.5, steps=12,
                                  loads_xy=(0.5, -0.45))
    collected = []
    run_quasistatic(mesh, loads, m, max_iter=600,
                    on_step=lambda rec, st: collected.append(st.d.values.copy()))
    for a, b in zip(collected, collected[1:]):
        assert np.all(b >= a - 1e-10)


def test_antiplane_mode_runs():
    m = MaterialParams(G_c=0.1, eps_h=0.5, h=0.1, mu=1.0, sigma_c=1.0)
    mesh = build_structured_triangulation(MeshSpec("square", 1.0, 0.1))
    loads = LoadProgram(
        edges={"left": EdgeCondition("prescribed", 0.0),
               "right": EdgeCondition("prescribed", 1.0)},
        ramp=linear_ramp(4, 1.0),
    )
    engine = DiscreteModel(mesh, m, loads, mode="antiplane")
    u = engine.solve_u(engine.zero_state().eta.values, 0.2)
    g = engine.strain(u)
    assert np.allclose(g[:, 0], 0.2, atol=1e-10)
    assert np.allclose(g[:, 1], 0.0, atol=1e-10)
    # past the threshold sigma_c/(2 mu) = 0.5 the eigenstrain flows radially
    u2 = engine.solve_u(engine.zero_state().eta.values, 0.8)
    eta = engine.solve_eta(engine.strain(u2), np.zeros(mesh.n_elements))
    assert np.allclose(eta[:, 0], 0.3, atol=1e-10)


def test_spec_level_wrappers():
    mesh, loads, m = square_setup()
    engine = DiscreteModel(mesh, m, loads)
    state = engine.zero_state()
    state = StaggeredState(state.u, state.eta, state.d, state.d_prev,
                           step_index=1, load_factor=0.002)
    u = solve_u(state, loads, m)
    state2 = StaggeredState(u, state.eta, state.d, state.d_prev, 1, 0.002)
    eta = solve_eta(state2, m, loads=loads)
    assert np.allclose(eta.values, 0.0)
    d = solve_d(state2, m, loads=loads)
    assert np.allclose(d.values, 0.0)


def test_state_invariant_validation():
    mesh, loads, m = square_setup()
    engine = DiscreteModel(mesh, m, loads)
    z = engine.zero_state()
    with pytest.raises(ValueError):
        StaggeredState(z.u, z.eta, NodalField(mesh, np.full(mesh.n_nodes, 2.0)),
                       z.d_prev)
    with pytest.raises(ValueError):
        StaggeredState(z.u, z.eta, z.d,
                       NodalField(mesh, np.full(mesh.n_nodes, 0.5)))


def test_energy_breakdown_total_is_sum():
    mesh, loads, m = square_setup()
    engine = DiscreteModel(mesh, m, loads)
    u = engine.solve_u(engine.zero_state().eta.values, 0.03)
    eta = engine.solve_eta(engine.strain(u), np.zeros(mesh.n_elements))
    d = engine.solve_d(engine.dissipation_coefficients(eta),
                       np.zeros(mesh.n_nodes))
    e = engine.energies(u, eta, d)
    assert e.total == pytest.approx(e.elastic + e.dissipation + e.fracture,
                                    rel=1e-12)
    assert e.elastic >= 0 and e.dissipation >= 0 and e.fracture >= 0