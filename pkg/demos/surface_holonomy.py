"""Holonomy of a gerbe connection around spheres in the 3-sphere.

The holonomy around the boundary of a ball equals the exponentiated
curvature integral over the ball, and the Wess-Zumino-Witten value of a
surface does not depend on which ball fills it.
"""

import numpy as np

from gerbes.cech import CoverNerve, CxValue, cech_coboundary, random_smooth_cochain
from gerbes.complex import Chain
from gerbes.connection import build_connection, build_from_integer_class, check_deligne, curvature_three_form, gauge_transform, generator_class
from gerbes.holonomy import SurfaceInBase, ball_boundary_check, surface_holonomy, wzw
from gerbes.meshes import s3_mesh

mesh = s3_mesh(12)
K = mesh.complex
cover = CoverNerve(K, mesh.coordinate_charts())
fundamental = Chain.fundamental(K)
rng = np.random.default_rng(3)

g = build_from_integer_class(cover, generator_class(cover.nerve, 2))
g = g * cech_coboundary(random_smooth_cochain(cover, 1, rng))
d = build_connection(g)
print(check_deligne(d))
omega = curvature_three_form(d)

for cells in ([(0, 1, 2, 3)], [(0, 1, 2, 4)], [(0, 1, 2, 3), (1, 2, 3, 4)]):
    ball = sum((mesh.cell_chain(c, fundamental) for c in cells[1:]), mesh.cell_chain(cells[0], fundamental))
    report = ball_boundary_check(d, ball, omega)
    print(f"ball {cells}: holonomy angle {report.holonomy.angle:+.6f}, |hol/exp - 1| = {report.error:.1e}")

# a gauge transformation changes every local datum but not the holonomy
sphere = SurfaceInBase.from_cycle(mesh.cell_chain((0, 1, 2, 3), fundamental).boundary())
before = surface_holonomy(d, sphere)
rho = random_smooth_cochain(cover, 1, rng, max_edge_jump=0.3)
eta = [0.3 * rng.normal(size=K.count(1)) for _ in range(cover.n_charts)]
after = surface_holonomy(gauge_transform(d, rho, eta), sphere)
print(f"gauge change moves the holonomy by {(after / before).distance_to_one():.1e}")

# two fillings of one sphere: a coarse cell and its complement
inside = mesh.cell_chain((0, 1, 2, 3), fundamental)
outside = fundamental - inside
first = wzw(inside.boundary(), omega)
second = CxValue.from_log(-omega.integrate(outside))
print(f"WZW from the cell {first.angle:+.6f}, from the complement {second.angle:+.6f}")
