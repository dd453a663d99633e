# Exponential sums over Airy zeros against the piecewise bound in T.
# Run: python demos/regime_table.py
from bouncelab.airy import airy_zeros
from bouncelab.expsums import e_lambda, mode_range, regime_bound, worst_case_loss

# %%
lams = (1e3, 1e4)
table = airy_zeros(mode_range(max(lams))[1])

# %%
print("  lambda   log_lam T  regime   |E|        bound      ratio")
for lam in lams:
    for x in (0.4, 0.6, 0.9, 1.3, 2.0, 2.6):
        T = lam**x
        e = abs(e_lambda(T, 1.0, lam, table))
        rb = regime_bound(T, lam)
        print(f"{lam:8.0f}  {x:8.2f}  {rb.regime:6s}  {e:.3e}  {rb.bound_value:.3e}  {e / rb.bound_value:.4f}")

# %% the worst loss over all source heights, in exact arithmetic
print()
print("worst-case loss:", worst_case_loss(), "=", float(worst_case_loss()))
