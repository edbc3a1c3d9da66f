"""
Cross-checks against brute force
================================

Every closed-form piece has an independent reference on the explicit
single-atom Hilbert space: trace statistics of the density matrix, a
finite-difference Jacobian of the master equation, a time-domain FFT of the
regression formula and a driven nonlinear integration. ``spinopm validate``
runs all of them; this script calls a few directly.
"""

# %%
import numpy as np

from spinopm.cli import build_model, config_load
from spinopm.equilibrium import transverse_variances
from spinopm.oracle import OracleModel, brute_force_statics, driven_checks, numerical_drift

model = build_model(config_load("rb87_serf"))
st, sysm, rates = model.state, model.system, model.rates

# %%
# Statics: closed-form variances against direct traces.
brute = brute_force_statics(st.rho0, st.I, sysm.layout)
print("variances closed form:", transverse_variances(st.p, st.I))
print("variances from traces:", brute.var_x)

# %%
# Drift matrix against the Frechet derivative of the master equation.
n = 2 * st.I + 1
om = OracleModel(st.I, rates.R_se, rates.R_sd, rates.R_op, rates.s0, omega_e=(0, 0, n * sysm.omega0))
A_num = numerical_drift(st.rho0, om, sysm.layout)
print(f"max |A_closed - A_numeric| = {np.max(np.abs(A_num - sysm.A1)):.2e} s^-1")

# %%
# Driven response: integrate the full equation with a weak RF field and
# demodulate. Takes a few seconds per frequency.
for r in driven_checks(st, sysm, model.couplings, rates):
    print(f"{r.name:28s} {r.value:.2e}  ({'PASS' if r.passed else 'FAIL'})")
