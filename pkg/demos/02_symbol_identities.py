"""
Principal symbols on a curved chart.

On every chart the symbols of the three cut-off operators ``T12``, ``T13``,
``T23`` satisfy ``sigma12^2 + sigma13^2 + sigma23^2 = -chi1^2``.  That
identity is what makes ``K^3 - k0^2 K`` compact.  The script checks it on an
ellipsoid and compares the metric-based Riesz symbol against a numerical
Fourier transform of the kernel.

Run with ``python3 demos/02_symbol_identities.py``.
"""

import numpy as np

from elastic_np import Ellipsoid
from elastic_np import geometry, symbols

rng = np.random.default_rng(0)
surface = Ellipsoid(1.0, 1.0, 2.0)

worst = 0.0
for chart in surface.atlas():
    u = np.stack([rng.uniform(0.2, np.pi - 0.2, 2000), rng.uniform(-np.pi, np.pi, 2000)], -1)
    xi = rng.standard_normal((2000, 2)) * 10 ** rng.uniform(-1, 2, (2000, 1))
    worst = max(worst, float(np.abs(symbols.sum_of_squares_residual(chart, u, xi)).max()))
print(f"sum of squares + chi1^2, worst over 6000 samples: {worst:.2e}")

chart = surface.chart()
u0, xi0 = np.array([1.1, 0.3]), np.array([2.0, -1.5])
s_direct = np.array(symbols.sigma_symbols(chart, u0, xi0))
s_kernel = np.array(symbols.sigma_symbols_from_kernel(chart, u0, xi0))
print("sigma via derivatives :", np.array2string(s_direct, precision=6))
print("sigma via kernel      :", np.array2string(s_kernel, precision=6))

G = geometry.metric_at(chart, u0).matrix()
exact = symbols.riesz_symbol(chart, u0, xi0)
numeric = symbols.numerical_riesz_symbol(G, xi0)
print("Riesz symbol, closed form :", np.array2string(np.array(exact), precision=7))
print("Riesz symbol, quadrature  :", np.array2string(np.array(numeric), precision=7))
