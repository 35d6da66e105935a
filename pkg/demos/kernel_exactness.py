"""Exact integration of the Brownian-bridge kernel over step functions.

For the block averages of s on k blocks the double integral equals
1/45 - 1/(720 k^4); the O(k) routine reproduces it to rounding error and
matches the O(k^2) block sum.

Run:  python3 demos/kernel_exactness.py
"""
import numpy as np

from ginifield import gamma1_blocksum, gamma1_exact, kernel_rect_integral

print(f"integral over the unit square: {kernel_rect_integral(0, 1, 0, 1):.17f} (1/12 = {1 / 12:.17f})")
for k in (2, 16, 64, 2048):
    f = (np.arange(k) + 0.5) / k
    v = gamma1_exact(f, f)
    exact = 1 / 45 - 1 / (720 * k**4)
    line = f"k={k:>5d}  gamma1 {v:.15f}  error {v - exact:+.1e}"
    if k <= 64:
        line += f"  block-sum diff {v - gamma1_blocksum(f, f):+.1e}"
    print(line)
