"""Cross-check the pole solve against direct time integration.

Integrates the two-time-argument memory kernel equation to its
periodic steady state at the bare resonance and compares the
time-averaged excited population with the pole-ansatz value.  At
strong coupling a genuine gap of order 0.01 remains: the kernel keeps
memory the pole ansatz truncates.  At weak coupling (see the
acceptance suite) the two agree to about 2e-3.

Equivalent CLI call:

    python3 -m driventls oracle --bias 0.9539392 --t-max 1200 \
        --average-window 400
"""

import numpy as np

from driventls import (
    DQDParams,
    PhononBath,
    TrajectoryConfig,
    assemble_system,
    bare_frame,
    converged_average,
    coupling_table,
    dispersive_coeffs,
    observable_table,
    solve_residues,
    solve_self_consistent,
    steady_observable,
)

bath = PhononBath(coupling=0.2, separation=20.0, cutoff=2.0, quad_tol=1e-9)
params = DQDParams(bias=float(np.sqrt(1.0 - 0.09)), tunneling=0.3,
                   drive_angle=np.pi / 2, drive_amplitude=0.2)
bare = bare_frame(params)

sol = solve_self_consistent(bare, bare.theta, bath)
table = coupling_table(bare.theta, sol.frame)
disp = dispersive_coeffs(bare.theta, sol.frame, bare, bath)
resset = solve_residues(assemble_system(table, disp, sol.frame, bath))
obs = observable_table(bare.theta, sol.frame)
poles_value = steady_observable(resset, obs)

# the slow precession period at this coupling is about 400, so the
# averaging window must cover at least one period
cfg = TrajectoryConfig(dt=0.08, t_max=1200.0, kernel_window=100.0,
                       average_window=400.0)
result = converged_average(bare, bare.theta, bath, cfg, obs)

print(f"pole ansatz        : {poles_value:.6f}")
print(f"time integration   : {result.value:.6f}")
print(f"difference         : {result.value - poles_value:+.6f}")
print(f"step-halving change: {result.step_change:.2e}")
print("\nthe residual difference is a memory effect at this coupling;")
print("rerun with coupling 0.02, t_max 16000 and average_window 4000")
print("to watch it shrink below 2e-3")
