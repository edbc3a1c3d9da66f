"""
Lock-in filter and sensitivity
==============================

A lock-in with a single-pole (exponential window) filter turns the spectrum into
a variance. For ``omega T_bw`` large and ``T`` much longer than ``T_bw`` its
filter approaches ``sinc^2`` and the variance collapses to ``S' / (4T)``.
Here we check that numerically, then compute SNR and field sensitivity.
"""

# %%
import math

import matplotlib.pyplot as plt
import numpy as np

from _common import save
from spinopm.cli import build_model, config_load, sql_reference
from spinopm.sensing import (
    coherent_response,
    filter_function,
    filter_integral,
    lockin_statistics,
    sinc2_filter,
    snr_and_sensitivity,
)
from spinopm.spectra import measured_psd, qrt_spectrum

model = build_model(config_load("rb87_serf"))
nu = model.nu_res
w = 2 * math.pi * nu
T, T_bw = 10.0, 100 / w

x = w + np.linspace(-15, 15, 3001) / T
fig, ax = plt.subplots(figsize=(6, 3.5))
ax.plot((x - w) * T, filter_function(w, x, T, T_bw), label="exact window")
ax.plot((x - w) * T, sinc2_filter(w, x, T), ls="--", label="sinc^2")
ax.set_xlabel("(omega' - omega) T")
ax.legend()
save(fig, "03_filter.png")

print(f"integral / (pi / 2T) = {filter_integral(T, T_bw) / (math.pi / (2 * T)):.5f}")
lk = lockin_statistics(1.0, nu, T, T_bw)
print(f"flat spectrum: Var / (S'/4T) = {lk.var_K / lk.var_K_flat:.5f}")

# %%
# SNR and sensitivity across the spectrum. Two normalizations are reported:
# the literal closed form and the one composed from the lock-in statistics
# above; they differ by a constant factor (see the README).
spec = qrt_spectrum(model.system, model.cov, model.freqs)
tr = measured_psd(spec, model.couplings, model.N_at, model.probe.Phi)
Ac = coherent_response(model.system, model.couplings, model.freqs, model.drive).Ac
rep = snr_and_sensitivity(model.freqs, Ac, tr.S_eff_one_sided, model.couplings.G, model.probe.Phi,
                          model.N_at, model.species.gamma_F, model.drive.B0_perp, model.T)
k = int(np.nanargmin(rep.delta_B_rms_per_sqrtHz))
print(f"best sensitivity {rep.delta_B_rms_per_sqrtHz[k]:.3e} T/sqrt(Hz) at {model.freqs[k]:.1f} Hz")
print(f"composed normalization {rep.delta_B_composed[k]:.3e} T/sqrt(Hz)")
print(f"SQL reference (Gamma = R_sd) {sql_reference(model):.3e} T")

fig, ax = plt.subplots(figsize=(6, 3.5))
ax.semilogy(model.freqs[1:], rep.delta_B_rms_per_sqrtHz[1:], label="closed form")
ax.semilogy(model.freqs[1:], rep.delta_B_composed[1:], label="composed")
ax.set_xlabel("frequency (Hz)")
ax.set_ylabel("delta B (T / sqrt(Hz))")
ax.legend()
save(fig, "03_sensitivity.png")
