"""Focusing metalens, end to end.

A dielectric strip (eps_r = 3) sits above a substrate on a 400 x 200 grid; a
plane wave enters from below and we maximize |E_z|^2 at element (200, 80).
Takes about three minutes. Pass a number to change the iteration budget:

    python demos/01_metalens.py 50
"""

import sys
from pathlib import Path

import numpy as np

from emtopopt import GradientConfig, Objective, compute_geometric_na, optimize_gradient, preset
from emtopopt.output import design_image, field_image, write_pgm

max_iter = int(sys.argv[1]) if len(sys.argv) > 1 else 200
problem = preset("metalens").problems[0]
g = problem.grid
print(f"grid {g.nelx}x{g.nely}, {problem.n_vars} design variables, NA = {compute_geometric_na(problem):.3f}")

# One Objective object owns the index sets, filter and solver counters.
obj = Objective(problem)
x, history = optimize_gradient(
    problem, GradientConfig(max_iter=max_iter), objective=obj,
    callback=lambda r: r.iteration % 20 == 0 and print(f"  it {r.iteration:3d}  phi {r.phi:8.4f}"),
)

# The optimizer works at beta = 5. The physical design is the near-step projection.
binary = obj.binarized(x)
empty = obj.binarized(np.zeros(problem.n_vars))
print(f"working phi {history.final.phi:.3f}, binarized phi {binary.fom:.3f}")
print(f"empty domain phi {empty.fom:.3f}, enhancement x{binary.fom / empty.fom:.1f}")
print(f"{history.final.forward_solves} forward solves, {history.final.adjoint_solves} adjoint solves")

out = Path("demo_out")
out.mkdir(exist_ok=True)
write_pgm(out / "metalens_design.pgm", design_image(binary.projected))
write_pgm(out / "metalens_field.pgm", field_image(binary.field_intensity(g)))
print(f"images in {out}/")
