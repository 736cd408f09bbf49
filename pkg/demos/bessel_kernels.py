"""Large-order Bessel values and the weight-summation kernels.

One FFT of exp(-i x sin t) returns every J_n(x) at once, which is what makes the
sums over the weight k cheap.  Summing J_{k-1} against a smooth weight
over k in a residue class mod 4 collapses to two Fourier integrals V1 and V2.
"""
import numpy as np
from scipy.special import jv

from murmurations import besselkit, kernels

x = 750.0
batch = besselkit.bessel_batch(x, 1500)
n = np.arange(batch.n_max + 1)
print("transform length:", batch.n_transform)
print("max |batch - scipy|:", np.abs(batch.values - jv(n, x)).max())
print("normalisation residual:", batch.normalization_residual())

# Bessel values die off super-exponentially past the turning point n ~ x
for m in (700, 750, 800, 900):
    print(f"J_{m}({x:g}) = {batch.values[m]: .3e}")

K, M = 200, 40
profile = kernels.make_profile(K, M)
xs = np.linspace(K / 2, 2 * K, 7)
s0, s2 = kernels.class_sums(profile, xs)
v1, v2 = kernels.V1(profile, xs), kernels.V2(profile, xs)
print(f"{'x':>6} {'S_0':>12} {'S_2':>12} {'Re V1':>12} {'Im V2':>12}")
for row in zip(xs, s0.real, s2.real, v1.real, v2.imag):
    print("{:6.1f} {:12.8f} {:12.8f} {:12.8f} {:12.8f}".format(*row))

res = kernels.prop_residuals(profile, xs)
print("worst identity residual:", max(r.max() for r in res.values()))
