"""Contour kernel against the area-integral oracle at a few nodes of an ellipse."""

import numpy as np

from alphapatch.curves import PatchSystem, ellipse
from alphapatch.oracle import oracle_normal_velocity
from alphapatch.velocity import normal_velocity

system = PatchSystem((ellipse((0, 0), 2.0, 1.0, 0.3, 256),), alpha=0.25)
field = normal_velocity(system)
for node in (0, 21, 45, 111):
    res = oracle_normal_velocity(system, 0, node, 1 / 512)
    kernel = field.values[0][node]
    print(f"node {node:3d}: kernel {kernel: .6f}  oracle {res.value: .6f} "
          f"(+-{res.error_estimate:.1e})  difference {abs(kernel - res.value):.1e}")
print("max |u_n| on the boundary:", np.max(np.abs(field.values[0])))
