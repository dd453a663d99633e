# Sup norm of the Green function in time: spikes at even scaled times.
# Run: python demos/resonant_peaks.py
import math

import numpy as np

from bouncelab import PhysParams, sup_norm_scan
from bouncelab.airy import airy_zeros

# %%
a = 0.3
table = airy_zeros(3000)

# %% scan T = t / sqrt(a) at one h
p = PhysParams(1e-3, a, 0.5, 4.0)
# stop at the horizon lam^(1/3) ~ 5.5, past which reflections overlap
Ts = np.arange(1.0, 5.51, 0.25)
scan = sup_norm_scan(p, Ts * math.sqrt(a), table)
top = max(s.sup_abs for s in scan)
print(f"lambda = {p.mode_scale:.1f}")
for T, s in zip(Ts, scan):
    bar = "#" * int(50 * s.sup_abs / top)
    print(f"T={T:5.2f}  sup|G|={s.sup_abs:8.2f}  x*={s.argmax_x:.3f}  {bar}")

# %% how the peak and a generic time scale with h
print()
print("      h    sup(T=2)*h   sup(T=2.7)*h")
for h in (1e-3, 5e-4, 2.5e-4):
    p = PhysParams(h, a, 0.5, 5.0)
    on, off = sup_norm_scan(p, [2.0 * math.sqrt(a), 2.7 * math.sqrt(a)], table)
    print(f"{h:8.1e}  {on.sup_abs * h:11.5f}  {off.sup_abs * h:12.5f}")
# the first column shrinks roughly like h^(1/4), the second like h^(1/3)
