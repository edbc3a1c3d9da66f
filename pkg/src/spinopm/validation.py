"""
Oracle suite behind ``spinopm validate``.

Each check compares a closed-form result with an independent computation
on the explicit Hilbert space (or with a numerically integrated kernel)
and returns a :class:`~spinopm.oracle.CheckResult`.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad, trapezoid

from .equilibrium import transverse_variances
from .oracle import (
    CheckResult,
    OracleModel,
    brute_force_statics,
    dynamic_checks,
    fixed_point_residual,
    numerical_drift,
)
from .sensing import filter_function, lockin_statistics, sinc2_filter
from .spectra import qrt_spectrum, resonance_frequency

__all__ = ["static_checks", "lockin_checks", "run_suite"]


def static_checks(model) -> list[CheckResult]:
    """Variances, covariance block, drift matrix, fixed point and sum rule."""
    st, sysm, rates = model.state, model.system, model.rates
    I = st.I
    out = []
    brute = brute_force_statics(st.rho0, I, sysm.layout)
    va, vb = transverse_variances(st.p, I)
    rel = max(abs(va / brute.var_x[0] - 1), abs(vb / brute.var_x[1] - 1))
    out.append(CheckResult("variances_vs_traces", rel, 1e-10))
    out.append(CheckResult("covariance_vs_traces", float(np.max(np.abs(model.cov.Sigma - brute.Sigma))), 1e-10))

    om = OracleModel(I, rates.R_se, rates.R_sd, rates.R_op, rates.s0, omega_e=(0.0, 0.0, (2 * I + 1) * sysm.omega0))
    An = numerical_drift(st.rho0, om, sysm.layout)
    scale = max(rates.R_se + rates.R_sd + rates.R_op, abs(sysm.omega0), 1.0)
    out.append(CheckResult("drift_vs_jacobian", float(np.max(np.abs(An - sysm.A1))) / scale, 1e-10))
    res = fixed_point_residual(st.rho0, om)
    out.append(CheckResult("spin_temperature_fixed_point", res, 1e-10, "||drho/dt|| / (R_total ||rho||)"))

    nu_res = resonance_frequency(sysm)
    width = max(abs(np.linalg.eigvals(sysm.A1).real).max(), abs(sysm.omega0)) / (2 * math.pi)
    worst = 0.0
    for comp, var in (("S_aa", va), ("S_bb", vb)):
        def g(nu, comp=comp):
            return getattr(qrt_spectrum(sysm, model.cov, [nu]), comp)[0]
        edges = [0.0] + sorted({nu_res, width} - {0.0}) + [np.inf]
        total = sum(quad(g, a, b, limit=400)[0] for a, b in zip(edges[:-1], edges[1:]))
        worst = max(worst, abs(2 * total / var - 1))
    out.append(CheckResult("spectrum_sum_rule", worst, 1e-3))
    return out


def lockin_checks(nu: float, T: float = 10.0, omega_T_bw: float = 100.0) -> list[CheckResult]:
    """Filter integral, sinc^2 limit and flat-spectrum shortcut at ``nu`` (Hz).

    ``T`` must satisfy ``T >> T_bw``; the integral carries a ``T_bw / T``
    correction on top of the ``omega T_bw`` condition.
    """
    w = 2 * math.pi * nu
    T_bw = omega_T_bw / w
    lo = max(0.0, nu - 4000 / T)
    f = np.linspace(lo, nu + 4000 / T, int(8000 * 24) + 1)
    integral = trapezoid(filter_function(w, 2 * np.pi * f, T, T_bw), 2 * np.pi * f)
    x = w + np.linspace(-20, 20, 4001) / T
    pointwise = float(np.max(np.abs(filter_function(w, x, T, T_bw) - sinc2_filter(w, x, T))) / 0.25)
    lk = lockin_statistics(1.0, nu, T, T_bw)
    return [
        CheckResult("lockin_filter_integral", abs(integral / (math.pi / (2 * T)) - 1), 1e-3,
                    f"omega T_bw = {omega_T_bw:g}, T = {T:g} s"),
        CheckResult("lockin_sinc2_limit", pointwise, 1e-2, "max |F - sinc^2| / peak, |w - w'| T <= 20"),
        CheckResult("lockin_flat_variance", abs(lk.var_K / lk.var_K_flat - 1), 5e-3),
    ]


def run_suite(model, driven: bool = True) -> list[CheckResult]:
    """All checks for ``model``; the driven time-domain runs take a few seconds each."""
    out = static_checks(model)
    out += lockin_checks(model.nu_res)
    out += dynamic_checks(model.state, model.system, model.cov, model.couplings, model.rates, driven=driven)
    return out
