"""Both sides of the Petersson formula for small weights.

The spectral side needs Hecke eigenvalues (from exact q-expansions) and harmonic
weights; the geometric side needs only Kloosterman sums and Bessel values.
"""
import numpy as np

from murmurations import modforms, petersson

# Delta is the only cusp form of weight 12; its coefficients are Ramanujan's tau
print("tau(1..8):", modforms.delta(9)[1:])

# weight 24 is the first weight with two eigenforms; T_2 mixes the basis
T2 = np.array(modforms.hecke_matrix(24, 2), dtype=float)
print("T_2 on S_24:\n", T2)

data = modforms.eigen_data(24, 100)
print("a_f(2):", data.lam[:, 0] * 2 ** 11.5)
print("harmonic weights:", data.omega)

print(f"{'k':>3} {'p':>4} {'b':>2} {'spectral':>22} {'geometric':>22} {'resid':>9}")
for k in (12, 16, 24, 30):
    for p in (2, 13, 97):
        for b in (0, 1):
            r = petersson.compare(k, p, b)
            print(f"{k:>3} {p:>4} {b:>2} {r.spectral:>22.15f} {r.geometric:>22.15f} {r.residual:9.1e}")
