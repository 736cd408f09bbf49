"""The sign-weighted prime sum and its normalised ratio for one K.

Every quantity in the report is computed more than one way: the numerator via
Bessel batches and via the V2 kernel, the main term by quadrature over the
squarefree moduli and by its closed form.
"""
import math
import sys

from murmurations import murmur

K = float(sys.argv[1]) if len(sys.argv) > 1 else 100.0
M = round(K ** 0.5)
r = murmur.murmuration_report(K, M, (1.0, 2.0))

print(f"K={K:g}  M={M}  primes={r.primes}  moduli={r.c_max}")
print(f"numerator (Bessel)      {r.numerator_direct:.10f}")
print(f"numerator (kernel)      {r.numerator_kernel:.10f}")
print(f"main term (quadrature)  {r.numerator_mainterm:.6f}")
print(f"main term (closed form) {r.mainterm_closed_form:.6f}")
print(f"denominator             {r.denominator:.6f}  (off-diagonal {r.denominator_offdiag:.2e})")
print(f"K * ratio               {r.normalized_ratio:.5f}")
print(f"1/(sqrt B + sqrt A)     {1 / (1 + math.sqrt(2)):.5f}")
print(f"K * main/denominator    {K * r.numerator_mainterm / r.denominator:.5f}")
