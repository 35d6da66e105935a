"""FGT, Sen and Kakwani poverty indices of one sample, against population values.

Run:  python3 demos/poverty_indices.py
"""
from ginifield import DistributionSpec, GpiConfig, gpi_point, make_distribution, sample_univariate, true_gpi

law = DistributionSpec.exponential(1)
z = 0.6
dist = make_distribution(sample_univariate(law, 20000, seed=2))

configs = {
    "headcount (FGT 0)": GpiConfig.fgt(z, 0),
    "poverty gap (FGT 1)": GpiConfig.fgt(z, 1),
    "squared gap (FGT 2)": GpiConfig.fgt(z, 2),
    "Sen": GpiConfig.sen(z),
    "Kakwani k=2": GpiConfig.kakwani(z, 2),
}

print(f"poverty line Z = {z}, n = {dist.n}\n")
print(f"{'index':<22s}{'sample':>10s}{'population':>12s}")
for name, cfg in configs.items():
    est = gpi_point(dist, cfg)
    print(f"{name:<22s}{est.value:>10.4f}{true_gpi(law, cfg):>12.4f}")
