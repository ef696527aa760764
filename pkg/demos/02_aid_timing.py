# When is the best time to aid a single agent?
# The cost is the mean variance over the horizon; aiding too early wastes the
# fix, aiding too late leaves the variance high for most of the mission.
import numpy as np

from cnaplan.uncertainty import NoiseParams, agent_cost, max_cost, optimal_aid_step, optimal_aid_time

p = NoiseParams()
T = 2000

for nu0, nu_cna in ((100.0, 10.0), (1000.0, 10.0), (100.0, 1000.0)):
    z_cont = optimal_aid_time(nu0, nu_cna, p, T)
    z = optimal_aid_step(nu0, nu_cna, p, T)
    print(f"nu0={nu0:6.0f} nu_cna={nu_cna:6.0f}  Z*={z_cont:8.2f} -> {z:4d}"
          f"  J={agent_cost(nu0, z, nu_cna, p, T):8.2f}  (no aid {max_cost(nu0, p, T):.0f})")

# the whole curve, coarsely
Z = np.arange(1, T + 1, 200)
print(np.round([agent_cost(100.0, int(z), 10.0, p, T) for z in Z], 1))
