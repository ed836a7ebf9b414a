"""
Conormal kernel versus the direct Kelvin traction.

The library's operator ``K`` uses the kernel ``k0 K1 - K2``.  Differentiating
the Kelvin matrix directly gives a traction kernel with the opposite sign and
a different ``(x-y)(x-y)^T`` coefficient.  Both share the principal part
``k0 K1`` up to sign, so their spectra cluster at the same points, but only
the traction operator reproduces rigid motions as eigenvectors of the adjoint
with eigenvalue ``1/2``.

Run with ``python3 demos/04_traction_vs_conormal.py``.
"""

import numpy as np

from elastic_np import Ellipsoid, LameParameters, assemble, build_grid, conormal_kernel, kelvin_matrix, kelvin_traction

p = LameParameters(1.0, 1.0)
x, n, y = np.array([0.0, 0.0, 1.0]), np.array([0.0, 0.0, 1.0]), np.array([0.6, 0.0, 0.8])

# finite-difference traction of column b of the Kelvin matrix
h, fd = 1e-5, np.zeros((3, 3))
for b in range(3):
    grad = np.zeros((3, 3))
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        grad[:, k] = (kelvin_matrix(p, x + e - y)[:, b] - kelvin_matrix(p, x - e - y)[:, b]) / (2 * h)
    strain = 0.5 * (grad + grad.T)
    fd[:, b] = p.lam * np.trace(grad) * n + 2 * p.mu * strain @ n

print("finite difference traction vs kelvin_traction:", f"{np.abs(fd - kelvin_traction(p, x, n, y)).max():.1e}")
print("finite difference traction vs conormal_kernel:", f"{np.abs(fd - conormal_kernel(p, x, n, y)).max():.1e}")

# rigid motions on an ellipsoid: translations satisfy K*^T u = u / 2 for the traction operator
grid = build_grid(Ellipsoid(1.0, 1.0, 2.0), 16)
ops = assemble(p, grid, ("K", "Ktr"))
w = grid.weights3()
rigid = {"translation e1": np.tile([1.0, 0.0, 0.0], grid.n),
         "rotation about e3": np.cross([0.0, 0.0, 1.0], grid.nodes).reshape(-1)}
for tag in ("Ktr", "K"):
    M = ops[tag].matrix
    for name, v in rigid.items():
        r = (M.T @ (w * v)) / w - 0.5 * v
        print(f"{tag:>3}, {name:<18}: max |K* r - r/2| = {np.abs(r).max():.2e}")
