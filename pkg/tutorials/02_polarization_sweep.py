"""
Polarization sweep
==================

Raise the optical pumping rate so that the steady-state polarization runs
from 0.1 to 0.99 and follow the resonance dip. The same sweep is available
from the command line as ``spinopm sweep --axis p=0.1,0.3,0.5,0.7,0.9,0.99``.
"""

# %%
import matplotlib.pyplot as plt

from _common import save
from spinopm.cli import build_model, config_load, with_axis
from spinopm.spectra import measured_psd, noise_dip, qrt_spectrum

base = config_load("rb87_serf")
fig, ax = plt.subplots(figsize=(6, 4))
for p in base.sweep["p"]:
    m = build_model(with_axis(base, "p", p))
    tr = measured_psd(qrt_spectrum(m.system, m.cov, m.freqs), m.couplings, m.N_at, m.probe.Phi)
    d = noise_dip(m.freqs, tr.S_eff, m.nu_res)
    depth = 0.0 if d is None else d.depth
    print(f"p = {p:4.2f}  R_op = {m.rates.R_op:9.1f} s^-1  nu_res = {m.nu_res:8.1f} Hz  dip depth = {depth:.3f}")
    # normalize to the low-frequency level to compare shapes
    ax.plot(m.freqs / m.nu_res, tr.S_eff / tr.S_eff[0], label=f"p = {p}")

# %%
# The dip fades as the hybridized precession approaches the free-atom limit.
ax.set_xlim(0, 3)
ax.set_xlabel("frequency / nu_res")
ax.set_ylabel("S_eff / S_eff(0)")
ax.legend()
save(fig, "02_polarization_sweep.png")
