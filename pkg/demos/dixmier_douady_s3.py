"""Gerbes on a triangulated 3-sphere, classified by their integer class.

Run with ``python3 demos/dixmier_douady_s3.py``.
"""

import numpy as np

from gerbes.cech import CoverNerve, cech_coboundary, random_smooth_cochain
from gerbes.complex import Chain
from gerbes.connection import build_connection, build_from_integer_class, class_pairing, curvature_three_form, generator_class
from gerbes.errors import ClassNonTrivial
from gerbes.gerbe import GerbePresentation, dd_cocycle, gerbe_product, trivialize
from gerbes.meshes import s3_mesh

mesh = s3_mesh(12)
K = mesh.complex
cover = CoverNerve(K, mesh.coordinate_charts())
fundamental = Chain.fundamental(K)
print(f"mesh: {K.count(0)} vertices, {K.count(3)} tetrahedra")
print(f"nerve of the coordinate cover: {[cover.nerve.count(k) for k in range(4)]}")

rng = np.random.default_rng(0)


def gerbe_of_class(k):
    g = build_from_integer_class(cover, generator_class(cover.nerve, k))
    return GerbePresentation(cover, g)


# the integer class survives a change of local sections
for k in (-1, 1, 2):
    gp = gerbe_of_class(k).resectioned(random_smooth_cochain(cover, 1, rng, max_edge_jump=0.3))
    omega = curvature_three_form(build_connection(gp.g))
    pairing = class_pairing(omega, fundamental)
    print(f"class {k:+d}: recovered {dd_cocycle(gp).class_vector}, curvature pairing {pairing.real:+.10f}")

# products add classes
total = gerbe_product(gerbe_of_class(2), gerbe_of_class(-3))
print(f"class 2 times class -3 has class {dd_cocycle(total).class_vector}")

# a coboundary is trivial and can be undone; class 1 cannot
trivial = GerbePresentation(cover, cech_coboundary(random_smooth_cochain(cover, 1, rng)))
print(f"coboundary trivialized with residual {trivialize(trivial).residual:.2e}")
try:
    trivialize(gerbe_of_class(1))
except ClassNonTrivial as err:
    print(f"class 1: {err}")
