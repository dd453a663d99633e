# One Green function two ways: a sum over Airy modes and a sum over reflections.
# Run: python demos/reflections_vs_modes.py
import math

from bouncelab import PhysParams, green_dyadic, green_reflection
from bouncelab.reflection import reflection_packets
from bouncelab.airy import airy_zeros

# %%
a, lam = 0.25, 100.0
h = a**1.5 / lam
p = PhysParams(h, a, 0.5, 10.0)
table = airy_zeros(2000)

# %% the two representations at x = a
print("   T    modes                 reflections           rel gap")
for T in (0.3, 1.5, 2.0, 3.0):
    t = T * math.sqrt(a)
    m = green_dyadic(t, a, a, a, p, table)
    r = green_reflection(t, a, a, a, p)
    print(f"{T:4.1f}  {m:20.4f}  {r:20.4f}  {abs(m - r) / abs(m):.2%}")

# %% which reflections matter at T = 2: packet sizes against their predicted bounds
print()
print(" N  regime    |V_N|       bound")
for pk in reflection_packets(2.0 * math.sqrt(a), a, a, a, p):
    print(f"{pk.N:2d}  {pk.regime_tag:8s}  {abs(pk.value):.3e}  {pk.bound_theory:.3e}  {pk.flag}")
