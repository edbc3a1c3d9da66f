"""
Spin noise and the resonance dip
================================

Build the bundled ``rb87_serf`` preset (87Rb at 200 C, 10 mG, probe 5.7 GHz blue
of the D1 lines) and look at the probe-weighted spin-noise spectrum next to
the coherent RF response ``A_c``. Near resonance the noise has a local
minimum where the response peaks.
"""

# %%
# The config pipeline turns a JSON document into a spin-temperature state,
# a drift matrix and probe couplings.
import numpy as np
import matplotlib.pyplot as plt

from _common import save
from spinopm.cli import build_model, config_load
from spinopm.sensing import coherent_response
from spinopm.spectra import measured_psd, noise_dip, qrt_spectrum, slowest_mode

model = build_model(config_load("rb87_serf"))
lam = slowest_mode(model.system)
print(f"polarization p = {model.state.p}, spin temperature beta = {model.state.beta:.4f}")
print(f"slow mode: decay {-lam.real:.1f} s^-1, resonance {model.nu_res:.2f} Hz")
print(f"couplings D_a = {model.couplings.D_a:.4f}, D_b = {model.couplings.D_b:.4f}")

# %%
# Quantum-regression spectra of the transverse spins, combined with the
# probe weights. ``S_eff`` is per atom and two-sided.
spec = qrt_spectrum(model.system, model.cov, model.freqs)
trace = measured_psd(spec, model.couplings, model.N_at, model.probe.Phi)
resp = coherent_response(model.system, model.couplings, model.freqs, model.drive)

dip = noise_dip(model.freqs, trace.S_eff, model.nu_res)
k = int(np.argmax(resp.Ac))
print(f"noise dip at {dip.frequency:.1f} Hz, depth {dip.depth:.3f}")
print(f"A_c peaks at {model.freqs[k]:.1f} Hz")

# %%
# Plot both on a shared frequency axis.
fig, ax = plt.subplots(2, 1, sharex=True, figsize=(6, 5))
ax[0].plot(model.freqs, trace.S_eff, color="k")
ax[0].axvline(dip.frequency, ls=":", color="C3")
ax[0].set_ylabel("S_eff (s)")
ax[1].plot(model.freqs, resp.Ac, color="C0")
ax[1].axvline(model.nu_res, ls=":", color="C3")
ax[1].set_ylabel("A_c")
ax[1].set_xlabel("frequency (Hz)")
save(fig, "01_spin_noise_dip.png")
