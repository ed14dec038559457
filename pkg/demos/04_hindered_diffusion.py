"""A colloid near a wall diffuses more slowly; in Ito form it also drifts away from the wall."""
# %%
import numpy as np

from targetzone.hindered import (
    ParticleEnv, SqrtProfile, bulk_diffusion, diffusion_profile, lorentz_lambda, noise_induced_drift,
)

env = ParticleEnv.water(radius=1e-6)
print("D0 = %.3e m^2/s" % bulk_diffusion(env))
print("lambda at one radius:", lorentz_lambda(env, env.radius))

# %%
x, d, lin = diffusion_profile(np.geomspace(1e-3, 1e3, 7))
for row in zip(x, d, lin):
    print("gap/R=%8.3f   D/D0=%.4f   linear=%.4f" % row)

# %%
# g = beta sqrt(gap) gives the same drift everywhere
g = SqrtProfile(5.42e-3, wall=0.0)
print([noise_induced_drift(g, s) for s in (1e-4, 1e-2, 1.0)], 5.42e-3**2 / 2)
