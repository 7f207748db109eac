"""Shape of the elastic domain and the stress paths that reach it.

The eigenstrain potential sqrt(p_c^2 tr^2 + tau_c^2 |dev|^2) admits
stresses inside a semi-ellipse through (p_c, 0) and (0, tau_c) for
positive pressure, continued by the line t = tau_c under compression.
Biaxial stretching (U_x, U_y) = (1, 0.5) drives the stress along a ray
that meets the surface near 23 degrees (point Q); near-pure shear
(0.5, -0.45) reaches it close to the shear apex.

Run:  python3 demos/strength_surface.py [outdir]
"""

import math
import sys

import numpy as np

from cohesivepf.energetics import plane_invariants
from cohesivepf.experiments import elastic_domain_trace, square_material
from cohesivepf import svgplot

outdir = sys.argv[1] if len(sys.argv) > 1 else "out-domain"

m = square_material("full")
trace = elastic_domain_trace(m, n_points=200)
print(f"critical pressure p_c = {m.p_c:g}, critical shear tau_c = {m.tau_c:g}")
print(f"(1, 0.5) stress ray angle: {trace.theta_degrees:.2f} deg; "
      f"Q = ({trace.Q.p:.3f}, {trace.Q.t:.3f})")

for name, strain in (("shear (0.5, -0.45)", [0.5, -0.45, 0.0]),
                     ("oblique (1, 0.5)", [1.0, 0.5, 0.0])):
    tr, devn = plane_invariants(np.array(strain), m.voldev_convention)
    p_dir, t_dir = m.kappa * tr, 2 * m.mu * devn
    ang = math.degrees(math.atan2(t_dir, p_dir))
    # first load factor at which the stress ray reaches the surface
    tstar = 1.0 / math.sqrt((p_dir / m.p_c) ** 2 + (t_dir / m.tau_c) ** 2)
    print(f"{name}: ray angle {ang:6.2f} deg, elastic limit at load factor "
          f"{tstar:.5f}")

import os
os.makedirs(outdir, exist_ok=True)
plot = svgplot.LinePlot(title="elastic domain", xlabel="pressure",
                        ylabel="deviatoric stress")
plot.add([pt.p for pt in trace.points], [pt.t for pt in trace.points],
         label="boundary")
plot.add([trace.Q.p], [trace.Q.t], label="Q", markers=True)
plot.write(f"{outdir}/plot_domain.svg")
print(f"plot written to {outdir}/plot_domain.svg")
