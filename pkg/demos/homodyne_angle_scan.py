"""Tuning correlations with a local oscillator phase.

The collective pumping channel of the driven spin model is monitored by
homodyne detection instead of photon counting.  The detection angle theta
selects which quadrature of the emitted field is measured; every angle
reproduces the same master equation on average, yet the diffusive
trajectories differ, and with them the steady-state genuine N-partite
correlations.  Measuring near the quadrature orthogonal to the mean field
(theta ~ 90 degrees) keeps the conditional states far more entangled than
measuring along it.

N = 12 here to keep the scan quick (about a minute); the effect grows
with N.
"""

import numpy as np

from trajcorr import StateVector, TrajectoryConfig, run_ensemble
from trajcorr.experiment import DICKE_OBSERVABLE, steady_state_sampling
from trajcorr.models import LMGParams, lmg_homodyne_model

N = 12
params = LMGParams(h=0.5, coupling=1.0, n_qubits=N, gamma_collective=0.2)
psi0 = StateVector.dicke(np.eye(N + 1)[0], N)

print(f"N = {N}, h = 0.5, homodyne (diffusive) unraveling")
print()
print(" theta    steady C (bits)")
for i, theta_deg in enumerate((0, 30, 60, 75, 90, 105, 120, 150, 180)):
    theta = np.deg2rad(theta_deg)
    model = lmg_homodyne_model(params, theta)
    config = TrajectoryConfig(method="diffusive", dt=1e-3, t_final=50.0,
                              burn_in=35.0, record_stride=1000,
                              n_trajectories=150, master_seed=40 + i, theta=theta)
    res = run_ensemble(psi0, model, config, [DICKE_OBSERVABLE], n_threads=1)
    stat = steady_state_sampling(res, "corr_min")
    bar = "#" * int(round(40 * stat.mean))
    print(f"{theta_deg:4d}     {stat.mean:.4f} +- {stat.stderr:.4f}  {bar}")
