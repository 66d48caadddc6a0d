"""Same master equation, different detectors, different correlations.

Three decaying qubits start in (|110> + |101>)/sqrt(2): qubit A carries an
excitation but no entanglement, B and C share a Bell pair.  Watching the
emissions with three separate photodetectors keeps A a product factor
forever, so the genuine three-partite correlations stay exactly zero.
Mixing A's and B's emission on a 50/50 beam splitter before detection makes
every click ambiguous between the two qubits, and the measurement
back-action knits A into the entangled pair.

The ensemble-averaged density matrix cannot tell the two schemes apart --
that is checked here via the trace distance against a bootstrap noise
floor -- but the trajectory-averaged correlation curves separate cleanly.

Runs in about half a minute.
"""

import numpy as np

from trajcorr import TrajectoryConfig, run_ensemble, trace_distance
from trajcorr.experiment import THREE_QUBIT_OBSERVABLE
from trajcorr.models import ThreeQubitScenario, psi2, three_qubit_spec
from trajcorr.trajectory import reconstruction_noise_scale

N_TRAJ = 1000

results = {}
for unraveling in ("direct", "beam_splitter_ab"):
    scenario = ThreeQubitScenario(1.0, 1.0, 1.0, unraveling=unraveling)
    config = TrajectoryConfig(method="jump", dt=2e-3, t_final=5.0,
                              record_stride=250, n_trajectories=N_TRAJ,
                              master_seed=2026)
    results[unraveling] = run_ensemble(psi2(), three_qubit_spec(scenario), config,
                                       [THREE_QUBIT_OBSERVABLE], n_threads=1)

direct, mixed = results["direct"], results["beam_splitter_ab"]
rho_d, rho_m = direct.density_matrices(), mixed.density_matrices()
sigma = reconstruction_noise_scale(direct, mixed)

print(f"{N_TRAJ} trajectories per scheme, gamma_A = gamma_B = gamma_C = 1")
print()
print("  t     C_direct        C_beamsplitter   |rho_d - rho_m|  noise floor")
for i, t in enumerate(direct.times):
    cd, sd = direct.mean("corr_min")[i], direct.stderr("corr_min")[i]
    cm, sm = mixed.mean("corr_min")[i], mixed.stderr("corr_min")[i]
    td = trace_distance(rho_d[i], rho_m[i])
    print(f"{t:5.2f}  {cd:.4f}+-{sd:.4f}  {cm:.4f}+-{sm:.4f}   {td:.4f}        "
          f"{sigma[i]:.4f}")

print()
print("The direct-detection column is identically zero: qubit A never")
print("entangles because its emission channel is unambiguous.  The density")
print("matrices agree to within the Monte Carlo noise floor throughout.")
