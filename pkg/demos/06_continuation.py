"""Beta continuation toward a black-and-white design.

A sharp threshold from the start makes the problem hard to optimize; a soft
one leaves gray elements. Continuation starts soft (beta = 5) and sharpens by
1.5x per stage below beta_max = 20, warm-starting each stage. Run here at
half resolution (200 x 100) so both variants finish in a few minutes.
"""

from emtopopt import GradientConfig, Objective, ProjectionSpec, optimize_gradient, preset, rescale, run_continuation

problem = rescale(preset("metalens").problems[0], 0.5)


def report(name, obj, x, beta):
    mnd = obj.non_discreteness(obj.evaluate(x, ProjectionSpec(beta), with_gradient=False).projected)
    print(f"{name:13s} M_nd {mnd:.4f}  binarized phi {obj.binarized(x).fom:.3f}")


obj = Objective(problem)
x, hist = optimize_gradient(problem, GradientConfig(max_iter=200), objective=obj)
report("single stage", obj, x, hist.final.beta)

obj = Objective(problem)
x, hist = run_continuation(problem, GradientConfig(max_iter=200, continuation=(5.0, 20.0, 1.5)), objective=obj)
report("continuation", obj, x, hist.final.beta)
