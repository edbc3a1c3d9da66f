"""
Species data and dispersive probe coupling.

Species constants live in ``data/constants.txt`` (flat ``key = value``
pairs namespaced by species, e.g. ``rb87.d1.f_osc``). Point the
``SPINOPM_CONSTANTS`` environment variable at another file to override it.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np
from scipy import constants as sc

__all__ = [
    "load_constants",
    "SpeciesSpec",
    "species",
    "ProbeSpec",
    "ProbeCouplings",
    "detuning_factor",
    "line_frequencies",
    "probe_couplings",
    "R_E",
]

R_E = sc.physical_constants["classical electron radius"][0]
ENV_CONSTANTS = "SPINOPM_CONSTANTS"
CONVENTIONS = {"probe_minus_line": 1, "line_minus_probe": -1}


def _parse(text: str) -> dict:
    out = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ValueError(f"malformed constants line: {raw!r}")
        out[key.strip()] = float(val)
    return out


@lru_cache(maxsize=8)
def _load(path: str | None) -> dict:
    if path is None:
        text = resources.files("spinopm").joinpath("data/constants.txt").read_text()
    else:
        text = Path(path).read_text()
    return _parse(text)


def load_constants(path: str | os.PathLike | None = None) -> dict:
    """Flat constants table; ``path`` overrides ``$SPINOPM_CONSTANTS``."""
    if path is None:
        path = os.environ.get(ENV_CONSTANTS) or None
    return dict(_load(None if path is None else str(path)))


@dataclass(frozen=True)
class SpeciesSpec:
    """Alkali species: nuclear spin, hyperfine splitting and D1-line data."""

    name: str
    I: float
    hfs: float          # ground hyperfine splitting, Hz
    nu_d1: float        # D1 centre of gravity, Hz
    f_osc: float
    j_excited: float = 0.5
    g_s: float = 2.00231930436

    @property
    def a(self) -> float:
        return self.I + 0.5

    @property
    def b(self) -> float:
        return self.I - 0.5

    @property
    def gamma_e(self) -> float:
        """Electron gyromagnetic ratio ``g_s mu_B / hbar`` in rad s^-1 T^-1."""
        return self.g_s * sc.physical_constants["Bohr magneton"][0] / sc.hbar

    @property
    def gamma_F(self) -> float:
        """Ground-manifold gyromagnetic ratio ``gamma_e / (2I + 1)``."""
        return self.gamma_e / (2 * self.I + 1)

    def omega0(self, B_z: float) -> float:
        """Manifold Larmor frequency in rad/s for a longitudinal field in tesla."""
        return self.gamma_F * B_z


def species(name: str = "rb87", constants: dict | None = None) -> SpeciesSpec:
    """Build a :class:`SpeciesSpec` from the constants table."""
    c = constants if constants is not None else load_constants()
    key = name.lower()
    if f"{key}.I" not in c:
        raise KeyError(f"unknown species {name!r}")
    return SpeciesSpec(
        name=key,
        I=c[f"{key}.I"],
        hfs=c[f"{key}.hfs"],
        nu_d1=c[f"{key}.d1.nu"],
        f_osc=c[f"{key}.d1.f_osc"],
        j_excited=c.get(f"{key}.d1.j", 0.5),
        g_s=c.get("g_s", 2.00231930436),
    )


def line_frequencies(sp: SpeciesSpec) -> tuple[float, float]:
    """Optical frequencies ``(nu_a, nu_b)`` out of the two ground manifolds.

    The upper ground manifold ``a`` sits ``I/(2I+1)`` of the splitting above
    the centre of gravity, so its optical line is lower by that amount.
    """
    n = 2 * sp.I + 1
    return sp.nu_d1 - sp.I / n * sp.hfs, sp.nu_d1 + (sp.I + 1) / n * sp.hfs


def detuning_factor(nu, nu_alpha, gamma_hwhm):
    """Dispersive lineshape ``x / (x^2 + 1)`` with ``x = (nu - nu_alpha) / Gamma``."""
    x = (np.asarray(nu, dtype=float) - nu_alpha) / gamma_hwhm
    return x / (x * x + 1)


@dataclass(frozen=True)
class ProbeSpec:
    """Far-detuned linearly polarized probe.

    The probe sits at ``nu_ref + frequency_detuning``; :meth:`for_species`
    sets ``nu_ref`` to the D1 centre of gravity or to one of the two lines.
    """

    frequency_detuning: float
    nu_ref: float
    nu_a: float
    nu_b: float
    Gamma_hwhm: float
    f_osc: float
    A_eff: float
    Phi: float
    j_excited: float = 0.5
    r_e: float = R_E
    detuning_sign: int = 1

    def __post_init__(self):
        if self.detuning_sign not in (1, -1):
            raise ValueError("detuning_sign must be +1 or -1")
        if not self.Gamma_hwhm > 0:
            raise ValueError("Gamma_hwhm must be positive")
        if not self.A_eff > 0:
            raise ValueError("A_eff must be positive")
        if not self.Phi >= 0:
            raise ValueError("Phi must be non-negative")

    @classmethod
    def for_species(
        cls,
        sp: SpeciesSpec,
        detuning: float,
        gamma_fwhm: float = 1e9,
        A_eff: float = 1e-6,
        Phi: float = 1e15,
        reference: str = "cg",
        convention: str = "probe_minus_line",
    ) -> "ProbeSpec":
        """Probe for ``sp``.

        ``convention="probe_minus_line"`` places the probe at
        ``nu_ref + detuning``; ``"line_minus_probe"`` at ``nu_ref - detuning``.
        """
        nu_a, nu_b = line_frequencies(sp)
        refs = {"cg": sp.nu_d1, "a": nu_a, "b": nu_b}
        if reference not in refs:
            raise ValueError(f"unknown detuning reference {reference!r}")
        if convention not in CONVENTIONS:
            raise ValueError(f"unknown detuning convention {convention!r}")
        return cls(
            frequency_detuning=detuning, nu_ref=refs[reference], nu_a=nu_a, nu_b=nu_b,
            Gamma_hwhm=gamma_fwhm / 2, f_osc=sp.f_osc, A_eff=A_eff, Phi=Phi,
            j_excited=sp.j_excited, detuning_sign=CONVENTIONS[convention],
        )

    @property
    def nu(self) -> float:
        """Absolute probe frequency in Hz."""
        return self.nu_ref + self.detuning_sign * self.frequency_detuning

    def with_detuning(self, detuning: float) -> "ProbeSpec":
        return replace(self, frequency_detuning=detuning)


@dataclass(frozen=True)
class ProbeCouplings:
    D_a: float
    D_b: float
    G: float

    @property
    def g_a(self) -> float:
        return self.G * self.D_a

    @property
    def g_b(self) -> float:
        return self.G * self.D_b


def probe_couplings(probe: ProbeSpec, I: float) -> ProbeCouplings:
    """Detuning factors and coupling strength for nuclear spin ``I``.

    ``G = 4 c r_e f_osc / ((2j+1)(2I+1) A_eff)`` in s^-1 per atom.
    """
    nu = probe.nu
    D_a = float(detuning_factor(nu, probe.nu_a, probe.Gamma_hwhm))
    D_b = float(detuning_factor(nu, probe.nu_b, probe.Gamma_hwhm))
    G = 4.0 / ((2 * probe.j_excited + 1) * (2 * I + 1)) * sc.c * probe.r_e * probe.f_osc / probe.A_eff
    return ProbeCouplings(D_a=D_a, D_b=D_b, G=G)
