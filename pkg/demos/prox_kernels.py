"""The four prox kernels checked against brute-force lattice search."""

import numpy as np

from revi import (BoxSimplexGeometry, Box, DiagonalQuadraticGeometry, EntropyGeometry,
                  EuclideanBall, Product, QuadraticGeometry, Simplex, grid_prox_oracle,
                  prox_step)

rng = np.random.default_rng(1)
B = rng.standard_normal((3, 3))
cases = [
    ("entropy on simplex", EntropyGeometry(4, 2.0), Simplex(4)),
    ("weighted box", DiagonalQuadraticGeometry([0.3, 1.0, 2.5]), Box.cube(3)),
    ("box x simplex", BoxSimplexGeometry(rng.uniform(-1, 1, (2, 2))),
     Product((Box.cube(2), Simplex(2)))),
    ("quadratic on ball", QuadraticGeometry(B @ B.T + 0.1 * np.eye(3)),
     EuclideanBall(np.zeros(3), 1.0)),
]
for name, geom, Q in cases:
    anchors = [(1.0, Q.sample(rng, 1)[0]), (0.5, Q.sample(rng, 1)[0])]
    linear = 3 * rng.standard_normal(Q.dim)
    z = prox_step(geom, Q, linear, anchors)
    ref = grid_prox_oracle(geom, Q, linear, anchors, resolution=100)
    print(f"{name:<18} kernel {np.round(z, 5)}  max diff to lattice {np.abs(z - ref).max():.1e}")
