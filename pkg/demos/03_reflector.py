"""Plasmonic reflector.

Here the solid is a lossy metal (n = 1.9, kappa = 1.5); the wave comes in
from the top and the optimizer shapes the strip so the reflected light
focuses at element (200, 100), below the strip. The material switch is
only the `material=` argument; the rest of the pipeline is unchanged.
"""

import sys

from emtopopt import GradientConfig, Objective, interpolate, optimize_gradient, preset

max_iter = int(sys.argv[1]) if len(sys.argv) > 1 else 200
problem = preset("reflector").problems[0]
eps_solid, _ = interpolate(problem.material, 1.0)
print(f"solid permittivity {complex(eps_solid):.3f}, source on the {problem.source} boundary")

obj = Objective(problem)
x, hist = optimize_gradient(problem, GradientConfig(max_iter=max_iter), objective=obj)
print(f"working phi {hist.final.phi:.3f}, binarized phi {obj.binarized(x).fom:.3f}")
