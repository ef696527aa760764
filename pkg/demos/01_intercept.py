# Constant-bearing intercept: where should the CNA steer to meet an agent?
import math

import numpy as np

from cnaplan.kinematics import solve_intercept

cna = (0.0, 0.0)
agent = (400.0, 300.0)

# agent crossing the line of sight, heading north at half the CNA speed
sol = solve_intercept(cna, 1.0, agent, math.pi / 2, 0.5)
print("heading (deg)", round(math.degrees(sol.heading), 3))
print("time to intercept", round(sol.tau, 3))
print("meeting point", np.round(sol.point, 3))

# both vehicles really are at the same spot after tau
cna_at = np.array(cna) + sol.tau * np.array([math.cos(sol.heading), math.sin(sol.heading)])
agent_at = np.array(agent) + 0.5 * sol.tau * np.array([0.0, 1.0])
print("miss distance", np.linalg.norm(cna_at - agent_at))

# head-on and tail-chase are the fastest and slowest cases
d = math.hypot(*agent)
toward = math.atan2(-agent[1], -agent[0])
for name, h in (("head-on", toward), ("tail-chase", toward + math.pi)):
    print(name, round(solve_intercept(cna, 1.0, agent, h, 0.5).tau, 3))
print("d/(1+eta), d/(1-eta):", d / 1.5, d / 0.5)
