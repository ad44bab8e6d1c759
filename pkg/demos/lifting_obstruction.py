"""When does a bundle lift to a central extension of its structure group?

The lifting gerbe answers this; a brute-force search over lifts checks it.
"""

from gerbes.cech import CoverNerve
from gerbes.gerbe import CentralExtension, PrincipalBundleData, brute_force_lift, heisenberg_example, lift_exists
from gerbes.meshes import six_cycle_charts

example = heisenberg_example()
result = lift_exists(example.extension, example.bundle)
print(f"Heisenberg bundle over {example.cover.n_charts} charts: lift exists {result.exists}")
print(f"  class is pure torsion with a nonzero cocycle: {bool(result.dd_class.cocycle.any())}")
print(f"  brute force finds a lift: {brute_force_lift(example.extension, example.bundle) is not None}")

K, arcs = six_cycle_charts()
ring = CoverNerve(K, arcs)
z4 = CentralExtension.split([[(a + b) % 4 for b in range(4)] for a in range(4)])
bundle = PrincipalBundleData(ring, z4, {(0, 1): 1, (1, 2): 2, (0, 2): 3})
result = lift_exists(z4, bundle)
print(f"split Z4 extension on a circle: lift exists {result.exists}, residual {result.residual:.1e}")
print(f"  brute force agrees: {brute_force_lift(z4, bundle) is not None}")
