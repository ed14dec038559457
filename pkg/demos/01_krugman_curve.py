"""The Krugman s(v) curve, its pasting point and the local expansion near the floor."""
# %%
import numpy as np

from targetzone.krugman import curve, local_expansion, s_of_v, solve_pasting, v_of_s
from targetzone.sde import EURCHF_FLOOR

sigma = 1e-3                       # fundamental volatility per sqrt(hour)
beta = 5.42e-3                     # volatility scale seen near the floor
gamma = 8 * sigma**2 / beta**4     # chosen so the local expansion reproduces beta

p = solve_pasting(m=0.0, gamma=gamma, sigma=sigma, barrier=EURCHF_FLOOR)
print(p)

# %%
# the curve touches the floor with zero slope
h = 1e-6 / p.rho
print("s(v_floor) - floor:", s_of_v(p, p.v_floor) - EURCHF_FLOOR)
print("slope at v_floor:  ", (s_of_v(p, p.v_floor + h) - s_of_v(p, p.v_floor)) / h)

# %%
alpha, b = local_expansion(p)
print(f"alpha={alpha:.3e}  beta={b:.3e}  sqrt(alpha)/beta={np.sqrt(alpha) / b:.15f}")

# %%
v, s, free = curve(p, n=9)
for row in zip(v, s, free):
    print("v=%.5f  s=%.5f  m+v=%.5f" % row)

# the inverse has no closed form; a root find recovers v
print(v_of_s(p, np.log(1.21)))
