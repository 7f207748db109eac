"""Refinement limit of the jump-plus-damage-profile construction.

For a displacement step of amplitude j interpolated on a mesh of size h,
with the matching exponential damage profile at internal length
eps_h = 0.5 sqrt(h), the discrete total energy must tighten onto the
cohesive value phi(j) from above as h -> 0: the strain concentrates in
the single jump element while the damage profile is resolved on the much
coarser scale eps_h >> h.

Run:  python3 demos/limit_energy_refinement.py
"""

from cohesivepf.experiments import recovery_sequence_energy

for j in (1e-3, 5e-3, 2e-2):
    res = recovery_sequence_energy(j)
    print(f"jump j = {j:g}   phi(j) = {res['phi']:.6e}")
    for h, e, gap in zip(res["h_list"], res["energies"], res["gaps"]):
        print(f"  h = {h:8.2e}   energy = {e:.6e}   gap = {gap / res['phi']:7.3%}")
    print(f"  gap shrinking over the last levels: {res['gap_shrinks']}")
    print()
