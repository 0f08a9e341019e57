"""Extruded (column-linked) lens.

With link="columns" each grid column carries one variable shared by every
design element in it, a lens that could be made with a single lithography
step. The gradient of a column is the sum of its element gradients.
"""

import sys

import numpy as np

from emtopopt import GradientConfig, Objective, optimize_gradient, preset

max_iter = int(sys.argv[1]) if len(sys.argv) > 1 else 200
problem = preset("lens1d").problems[0]
print(f"{problem.n_vars} variables for {problem.grid.n_design} design elements")

obj = Objective(problem)
x, hist = optimize_gradient(problem, GradientConfig(max_iter=max_iter), objective=obj)
b = obj.binarized(x)
# Each variable is copied down its column before filtering.
design = obj.expand(x).reshape(problem.grid.nelx, -1)
assert np.all(design == design[:, :1])
print(f"binarized phi {b.fom:.3f}; columns above 0.5: {int(np.sum(x > 0.5))}/{problem.grid.nelx}")
