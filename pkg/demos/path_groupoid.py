"""Path classes with scalars on a triangulated 2-sphere.

A 2-cochain f with whole-turn total defines a groupoid: two paths with the
same ends are identified after multiplying by exp of f over a filling.
"""

import math

import numpy as np

from gerbes.complex import Cochain
from gerbes.meshes import s2_mesh
from gerbes.pathgroupoid import PathGroupoid

rng = np.random.default_rng(2)
K = s2_mesh(3).complex
z = K.homology(2).cycles[0].as_float()
values = rng.normal(size=K.count(2)) + 1j * rng.normal(size=K.count(2))
values += (4j * math.pi - np.dot(z, values)) * z / np.dot(z, z)
G = PathGroupoid(K, Cochain(K, 2, values))
print(f"periods of f/2πi over closed surfaces: {[round(p.real, 12) for p in G.periods]}")

v = K.vertices
a = G.element(G.geodesic(v[0], v[7]).vertices, 2.0)
b = G.element(G.geodesic(v[7], v[12]).vertices, 1j)
ab = G.product(a, b)
print(f"a*b runs along {len(ab.path)} edges; canonical form has {len(G.canonical(ab).path)}")
print(f"a*b equals its canonical form: {G.equal(ab, G.canonical(ab))}")
print(f"filling independence: {(G.ratio(ab, G.canonical(ab)) / G.ratio(ab, G.canonical(ab), extra_cycle=0)).distance_to_one():.1e}")

triv = G.trivialize_at(v[0])
y, target, scalar = triv.decompose(ab)
print(f"a*b = p_y^-1 p_z times exp({scalar.log_modulus:+.4f} {scalar.angle:+.4f}i), round trip {G.equal(triv.compose(y, target, scalar), ab)}")
