"""Acceptance criteria, one test each.

Every test records a ``CRITERION n: PASS|FAIL ...`` line that is printed in
the terminal summary. Run directly with ``python tests/test_acceptance.py``.
"""

import itertools
import random
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.integrate import quad

sys.path.insert(0, str(Path(__file__).parent))

import racah  # noqa: E402
from conftest import ACCEPTANCE_LINES  # noqa: E402
from spinopm.angular import clebsch_gordan, ht_coefficients, wigner_6j, wigner_9j  # noqa: E402
from spinopm.cli import GHZ  # noqa: E402
from spinopm.equilibrium import equal_time_covariance, solve_beta, transverse_variances  # noqa: E402
from spinopm.operators import cartesian_projection, ht_coefficients_matrix, multipole_layout, tensor_matrix  # noqa: E402
from spinopm.optics import ProbeSpec, probe_couplings  # noqa: E402
from spinopm.oracle import brute_force_statics, driven_checks, fft_spectrum_check  # noqa: E402
from spinopm.sensing import coherent_response, snr_and_sensitivity  # noqa: E402
from spinopm.spectra import measured_psd, noise_dip, qrt_spectrum  # noqa: E402
from spinopm.validation import lockin_checks  # noqa: E402


def record(n, ok, detail):
    ACCEPTANCE_LINES.append(f"CRITERION {n}: {'PASS' if ok else 'FAIL'} {detail}")
    return ok


# --------------------------------------------------------------------------
# 1. angular algebra against an exact Racah-sum oracle
# --------------------------------------------------------------------------

def _ninej_cases(rng, limit2, n_random):
    small = [(a, b, c) for a, b, c in itertools.product(range(5), repeat=3) if racah.triad(a, b, c)]
    cases = []
    for r1, r2, r3 in itertools.product(small, repeat=3):
        if all(racah.triad(*col) for col in zip(r1, r2, r3)):
            cases.append(r1 + r2 + r3)
    triads = [(a, b, c) for a, b, c in itertools.product(range(limit2 + 1), repeat=3) if racah.triad(a, b, c)]
    drawn = 0
    while drawn < n_random:
        r1, r2 = rng.choice(triads), rng.choice(triads)
        cols = [[x for x in range(limit2 + 1) if racah.triad(r1[k], r2[k], x)] for k in range(3)]
        if not all(cols):
            continue
        r3 = tuple(rng.choice(c) for c in cols)
        if racah.triad(*r3):
            cases.append(r1 + r2 + r3)
            drawn += 1
    return cases


def test_criterion_1_angular_algebra():
    t0 = time.perf_counter()
    R = range(13)
    worst = {"cg": 0.0, "6j": 0.0, "9j": 0.0}
    counts = dict.fromkeys(worst, 0)
    for j1, j2 in itertools.product(R, R):
        for J in range(abs(j1 - j2), min(j1 + j2, 12) + 1, 2):
            for m1 in range(-j1, j1 + 1, 2):
                for m2 in range(-j2, j2 + 1, 2):
                    if abs(m1 + m2) > J:
                        continue
                    ref = float(racah.cg(j1, m1, j2, m2, J, m1 + m2))
                    got = clebsch_gordan(j1 / 2, m1 / 2, j2 / 2, m2 / 2, J / 2, (m1 + m2) / 2)
                    worst["cg"] = max(worst["cg"], abs(got - ref))
                    counts["cg"] += 1
    trips = [t for t in itertools.product(R, R, R) if racah.triad(*t)]
    for a, b, c in trips:
        for d, e in itertools.product(R, R):
            if not racah.triad(d, e, c):
                continue
            for f in R:
                if racah.triad(a, e, f) and racah.triad(d, b, f):
                    ref = float(racah.sixj(a, b, c, d, e, f))
                    got = wigner_6j(a / 2, b / 2, c / 2, d / 2, e / 2, f / 2)
                    worst["6j"] = max(worst["6j"], abs(got - ref))
                    counts["6j"] += 1
    # 9j: exhaustive for entries <= 2, seeded sample up to 6
    for args in _ninej_cases(random.Random(7), 12, 3000):
        ref = float(racah.ninej(*args))
        got = wigner_9j(*(x / 2 for x in args))
        worst["9j"] = max(worst["9j"], abs(got - ref))
        counts["9j"] += 1
    elapsed = time.perf_counter() - t0
    err = max(worst.values())
    ok = err < 1e-12 and elapsed < 30
    record(1, ok, f"max |err| {err:.1e} (cg {counts['cg']}, 6j {counts['6j']}, 9j {counts['9j']} values); "
                  f"{elapsed:.1f} s incl. oracle")
    assert err < 1e-12
    assert elapsed < 30


# --------------------------------------------------------------------------
# 2-5. operators and statics
# --------------------------------------------------------------------------

def test_criterion_2_tensor_orthonormality():
    worst = 0.0
    for I in (1.5, 2.5, 3.5):
        ops = []
        for F, Fp in itertools.product((I + 0.5, I - 0.5), repeat=2):
            for L in range(int(abs(F - Fp)), int(F + Fp) + 1):
                for M in range(-L, L + 1):
                    ops.append(tensor_matrix(L, M, F, Fp, I))
        mats = np.array(ops)
        gram = np.einsum("aij,bij->ab", mats.conj(), mats)
        worst = max(worst, float(np.max(np.abs(gram - np.eye(len(ops))))))
    record(2, worst < 1e-12, f"max |Tr[T^dag T'] - delta| = {worst:.1e} for I = 3/2, 5/2, 7/2")
    assert worst < 1e-12


def test_criterion_3_xy_coefficients():
    dual, rule = 0.0, 0.0
    for I in (1.5, 2.5, 3.5):
        closed = ht_coefficients(I)
        direct = ht_coefficients_matrix(I)
        for name in ("X", "Y"):
            for key, v in direct[name].items():
                dual = max(dual, abs(getattr(closed, name)[key] - v))
        for Lam in range(0, int(2 * I) + 1):
            total = sum(v * v for (L, _, _), v in closed.X.items() if L == Lam)
            rule = max(rule, abs(total - 1))
    ok = dual < 1e-12 and rule < 1e-12
    record(3, ok, f"dual-path {dual:.1e}, sum rule {rule:.1e}")
    assert ok


def test_criterion_4_transverse_variances():
    worst = 0.0
    for I in (1.5, 2.5):
        lay = multipole_layout(I)
        for p in np.round(np.arange(1, 100) / 100, 2):
            st = solve_beta(p, I)
            b = brute_force_statics(st.rho0, I, lay)
            va, vb = transverse_variances(p, I)
            worst = max(worst, abs(va / b.var_x[0] - 1), abs(vb / b.var_x[1] - 1))
    va1, vb1 = transverse_variances(1.0, 1.5)
    va0, vb0 = transverse_variances(0.0, 1.5)
    ends = max(abs(va1 - 1), abs(vb1), abs(va0 - 1.25), abs(vb0 - 0.25))
    ok = worst < 1e-10 and ends < 1e-12
    record(4, ok, f"max rel err {worst:.1e} over 99 p x 2 I; endpoints err {ends:.1e}")
    assert ok


def test_criterion_5_covariance():
    dev, diag = 0.0, 0.0
    for I in (1.5, 2.5):
        lay = multipole_layout(I)
        _, _, Mcal = cartesian_projection(lay)
        for p in (0.01, 0.1, 0.5, 0.9, 0.99):
            st = solve_beta(p, I)
            cov = equal_time_covariance(st, lay)
            dev = max(dev, float(np.max(np.abs(cov.Sigma - brute_force_statics(st.rho0, I, lay).Sigma))))
            C = np.diag(Mcal @ cov.R0 @ Mcal.T).real
            va, vb = transverse_variances(p, I)
            diag = max(diag, float(np.max(np.abs(C - [va, vb, va, vb]))))
    ok = dev < 1e-10 and diag < 1e-10
    record(5, ok, f"Sigma vs traces {dev:.1e}; diag(M R0 M^T) vs variances {diag:.1e}")
    assert ok


# --------------------------------------------------------------------------
# 6-7. spectra
# --------------------------------------------------------------------------

def test_criterion_6_sum_rule(preset):
    t0 = time.perf_counter()
    va, vb = transverse_variances(preset.state.p, preset.state.I)
    nu_res = preset.nu_res
    worst = 0.0
    for comp, var in (("S_aa", va), ("S_bb", vb)):
        def g(nu, comp=comp):
            return getattr(qrt_spectrum(preset.system, preset.cov, [nu]), comp)[0]
        total = quad(g, 0, nu_res, limit=400)[0] + quad(g, nu_res, np.inf, limit=400)[0]
        worst = max(worst, abs(2 * total / var - 1))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-3 and elapsed < 10
    record(6, ok, f"max |int S - Var| / Var = {worst:.1e} (x_a, x_b); {elapsed:.1f} s")
    assert ok


def test_criterion_7_fft_oracle(preset):
    r = fft_spectrum_check(preset.system, preset.cov, span=5.0, tol=1e-3)
    record(7, r.passed, f"max rel err {r.value:.1e} over [0, 5 nu_res] ({r.detail})")
    assert r.passed


# --------------------------------------------------------------------------
# 8-10. phenomenology
# --------------------------------------------------------------------------

def test_criterion_8_noise_dip_and_response_peak(preset_config):
    from spinopm.cli import build_model

    t0 = time.perf_counter()
    m = build_model(preset_config)
    cs = qrt_spectrum(m.system, m.cov, m.freqs)
    tr = measured_psd(cs, m.couplings, m.N_at, m.probe.Phi)
    Ac = coherent_response(m.system, m.couplings, m.freqs).Ac
    k = int(np.argmax(Ac))
    f_peak = m.freqs[k]
    dip = noise_dip(m.freqs, tr.S_eff, m.nu_res)
    step = max(m.freqs[min(k + 1, len(m.freqs) - 1)] - m.freqs[k], m.freqs[k] - m.freqs[max(k - 1, 0)])
    off = abs(f_peak - m.nu_res)
    elapsed = time.perf_counter() - t0
    dip_ok = dip is not None and abs(dip.frequency / f_peak - 1) < 0.1
    peak_ok = off <= step
    ok = dip_ok and peak_ok and elapsed < 60
    dip_txt = "none" if dip is None else f"{dip.frequency:.1f} Hz (depth {dip.depth:.3f})"
    record(8, ok, f"dip {dip_txt} vs A_c peak {f_peak:.1f} Hz [{'ok' if dip_ok else 'no'}]; "
                  f"A_c peak - |Im lambda|/2pi = {off:.1f} Hz vs grid step {step:.1f} Hz "
                  f"[{'ok' if peak_ok else 'no'}]; {elapsed:.1f} s")
    assert dip_ok
    assert peak_ok
    assert elapsed < 60


def test_criterion_9_inset_trend(preset_factory):
    depths = []
    for p in (0.1, 0.3, 0.5, 0.7, 0.9, 0.99):
        m = preset_factory(p=p)
        assert m.rates.R_op == pytest.approx(p * m.rates.R_sd / (1 - p))
        tr = measured_psd(qrt_spectrum(m.system, m.cov, m.freqs), m.couplings, m.N_at, m.probe.Phi)
        d = noise_dip(m.freqs, tr.S_eff, m.nu_res)
        depths.append(0.0 if d is None else d.depth)
    weakening = all(a > b or (a == 0 and b == 0) for a, b in zip(depths, depths[1:]))
    ok = weakening and depths[-1] == 0.0
    record(9, ok, "dip depth vs p: " + ", ".join(f"{d:.3f}" for d in depths) + " (0 = no local minimum)")
    assert ok


def test_criterion_10_high_field_decorrelation(preset_factory):
    m = preset_factory(B_z_G=10.0)
    f0 = m.species.omega0(1e-3) / (2 * np.pi)
    f = np.linspace(0.99 * f0, 1.01 * f0, 8001)
    cs = qrt_spectrum(m.system, m.cov, f)
    ratios = []
    for S in (cs.S_aa, cs.S_bb):
        k = int(np.argmax(S))
        ratios.append(abs(cs.S_ab[k]) / S[k])
    ok = max(ratios) < 0.05
    record(10, ok, f"|S_ab| / S_aa at a peak {ratios[0]:.1e}, / S_bb at b peak {ratios[1]:.1e}")
    assert ok


# --------------------------------------------------------------------------
# 11-12. dynamics and lock-in
# --------------------------------------------------------------------------

def test_criterion_11_driven_oracle(preset):
    res = driven_checks(preset.state, preset.system, preset.couplings, preset.rates, rel_tol=0.01, phase_tol_deg=2.0)
    amp = max(r.value for r in res if r.name.startswith("driven_amplitude"))
    ph = max(r.value for r in res if r.name.startswith("driven_phase"))
    ok = all(r.passed for r in res)
    record(11, ok, f"max amplitude rel err {amp:.1e}, max phase err {ph:.1e} deg at nu_res, nu_res +- linewidth")
    assert ok, [r for r in res if not r.passed]


def test_criterion_12_lockin(preset):
    res = {r.name: r for r in lockin_checks(preset.nu_res, T=10.0, omega_T_bw=100.0)}
    ok = all(r.passed for r in res.values())
    record(12, ok, f"filter integral {res['lockin_filter_integral'].value:.1e}, "
                   f"sinc^2 pointwise {res['lockin_sinc2_limit'].value:.1e}, "
                   f"flat Var {res['lockin_flat_variance'].value:.1e} (omega T_bw = 100, T = 10 s)")
    assert ok


# --------------------------------------------------------------------------
# 13. SNR detuning flatness
# --------------------------------------------------------------------------

def test_criterion_13_snr_detuning_flatness(preset):
    pr = preset.config.probe
    nu = np.array([preset.nu_res])
    cs = qrt_spectrum(preset.system, preset.cov, nu)
    det = np.linspace(-20, 20, 801)
    snr, Da, Db = [], [], []
    for d in det:
        probe = ProbeSpec.for_species(
            preset.species, d * GHZ, gamma_fwhm=pr.gamma_fwhm_GHz * GHZ, A_eff=preset.probe.A_eff,
            Phi=pr.Phi, reference=pr.reference, convention=pr.convention,
        )
        c = probe_couplings(probe, preset.species.I)
        tr = measured_psd(cs, c, preset.N_at, probe.Phi)
        Ac = coherent_response(preset.system, c, nu).Ac
        rep = snr_and_sensitivity(nu, Ac, tr.S_eff_one_sided, c.G, probe.Phi, preset.N_at,
                                  preset.species.gamma_F, preset.drive.B0_perp, preset.T, include_psn=False)
        snr.append(rep.SNR[0])
        Da.append(abs(c.D_a))
        Db.append(abs(c.D_b))
    snr, Da, Db = map(np.array, (snr, Da, Db))
    keep = (Da >= 0.01 * Da.max()) | (Db >= 0.01 * Db.max())
    s = snr[keep]
    var = s.max() / s.min() - 1
    worst = det[keep][np.argmin(s)]
    ok = var < 0.05
    record(13, ok, f"SPN-only SNR max/min - 1 = {var:.2f} over {keep.sum()} detunings in [-20, 20] GHz; "
                   f"minimum at {worst:+.2f} GHz, {pr.convention} ({s.min() / np.median(s):.2f} x median)")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
