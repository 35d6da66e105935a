"""The uniform empirical and quantile processes nearly cancel as n grows.

sup |alpha_n + gamma_n| shrinks like n^(-1/4) (up to logs) while each process
on its own stays of order one.

Run:  python3 demos/bahadur_remainder.py
"""
import numpy as np

from ginifield.montecarlo import bahadur_components

for n in (250, 1000, 4000, 16000):
    rows = np.array([bahadur_components(n, seed) for seed in range(200)])
    rem, alpha, gamma = np.median(rows, axis=0)
    print(f"n={n:>6d}  median remainder {rem:.4f}   sup|alpha| {alpha:.3f}   sup|gamma| {gamma:.3f}")
