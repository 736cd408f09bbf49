"""The density nu(E) two ways, and the Dirichlet series L(s) two ways.

nu(E) has a rational form (a sum over fractions a/q with (q/a)^2 in E) and a
cosine form (a sum over integer frequencies t with an Artin-type weight).  The
last block prints a plot-ready table of nu over short intervals.
"""
from murmurations import murmur

for s in (0.5, 1.0, 2.0):
    v = murmur.L_series(s)
    print(f"L({s}): Dirichlet {v.dirichlet:.8f}  Euler product {v.euler:.8f}")
res, vals = murmur.residue_probe()
print("s L(s) at s = 0.1, 0.05, 0.01:", [round(v, 6) for v in vals], " extrapolated:", res)

nu = murmur.nu_density((1.0, 4.0))
print(f"nu([1,4]): rational {nu.rational_form:.8f} (tail ~{nu.rational_tail:.1e}), "
      f"cosine {nu.cosine_form:.8f} (tail ~{nu.cosine_tail:.1e})")

# short intervals show the oscillation; divide by the length for a density
print("y0, nu([y0, y0+0.1])/0.1")
for i in range(10, 40, 3):
    y0 = i / 10
    val, _ = murmur.nu_rational((y0, y0 + 0.1), 20_000)
    print(f"{y0:.1f}, {val / 0.1:.6f}")
