import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spinopm import optics
from spinopm.optics import (
    ProbeSpec,
    detuning_factor,
    line_frequencies,
    load_constants,
    probe_couplings,
    species,
)


def test_rb87_constants():
    sp = species("rb87")
    assert sp.I == 1.5 and sp.a == 2 and sp.b == 1
    assert sp.gamma_e / (2 * np.pi) * 1e-4 == pytest.approx(2.8025e6, rel=1e-4)
    assert sp.omega0(1e-6) / (2 * np.pi) == pytest.approx(7006, rel=1e-3)
    nu_a, nu_b = line_frequencies(sp)
    assert nu_b - nu_a == pytest.approx(sp.hfs)
    assert (3 * nu_b + 5 * nu_a) / 8 == pytest.approx(sp.nu_d1)


def test_unknown_species():
    with pytest.raises(KeyError):
        species("xx99")


def test_constants_env_override(tmp_path, monkeypatch):
    f = tmp_path / "c.txt"
    f.write_text("rb87.I = 1.5\nrb87.hfs = 1e9  # test\nrb87.d1.nu = 3e14\nrb87.d1.f_osc = 0.5\n")
    monkeypatch.setenv(optics.ENV_CONSTANTS, str(f))
    sp = species("rb87")
    assert sp.hfs == 1e9 and sp.f_osc == 0.5
    monkeypatch.delenv(optics.ENV_CONSTANTS)
    assert species("rb87").hfs != 1e9


def test_malformed_constants(tmp_path):
    f = tmp_path / "bad.txt"
    f.write_text("no equals sign here\n")
    with pytest.raises(ValueError):
        load_constants(f)


@given(st.floats(-50, 50, allow_nan=False))
def test_detuning_factor_odd_and_bounded(x):
    d = detuning_factor(x, 0.0, 1.0)
    assert detuning_factor(-x, 0.0, 1.0) == pytest.approx(-d, abs=1e-15)
    assert abs(d) <= 0.5 + 1e-15


def test_coupling_constant_formula():
    sp = species("rb87")
    pr = ProbeSpec.for_species(sp, 10e9, A_eff=1e-6)
    c = probe_couplings(pr, sp.I)
    expect = 4 / (2 * 4) * 299792458.0 * 2.8179403262e-15 * sp.f_osc / 1e-6
    assert c.G == pytest.approx(expect, rel=1e-8)
    assert c.g_a == pytest.approx(c.G * c.D_a)


def test_detuning_conventions_mirror():
    sp = species("rb87")
    a = ProbeSpec.for_species(sp, -5.7e9)
    b = ProbeSpec.for_species(sp, 5.7e9, convention="line_minus_probe")
    assert a.nu == pytest.approx(b.nu)
    c = ProbeSpec.for_species(sp, -5.7e9, convention="line_minus_probe")
    assert c.nu - sp.nu_d1 == pytest.approx(5.7e9)
    with pytest.raises(ValueError):
        ProbeSpec.for_species(sp, 0.0, convention="sideways")
    with pytest.raises(ValueError):
        ProbeSpec.for_species(sp, 0.0, reference="c")


def test_probe_validation():
    with pytest.raises(ValueError):
        ProbeSpec(0.0, 3e14, 3e14, 3e14, Gamma_hwhm=0.0, f_osc=0.3, A_eff=1e-6, Phi=1e15)
    with pytest.raises(ValueError):
        ProbeSpec(0.0, 3e14, 3e14, 3e14, Gamma_hwhm=1e9, f_osc=0.3, A_eff=-1.0, Phi=1e15)


def test_reference_lines():
    sp = species("rb87")
    nu_a, nu_b = line_frequencies(sp)
    assert ProbeSpec.for_species(sp, 1e9, reference="a").nu == pytest.approx(nu_a + 1e9)
    assert ProbeSpec.for_species(sp, 1e9, reference="b").nu == pytest.approx(nu_b + 1e9)
