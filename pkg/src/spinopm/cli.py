"""
Command-line front end: ``spinopm {spectrum,response,snr,sensitivity,sweep,validate}``.

Configs are JSON documents with boundary units (G, GHz, cm^-3, cm^2, cm,
degC); everything is converted to SI on load. See README for the schema.

Exit codes: 0 success, 1 usage or config error, 2 unstable drift matrix,
3 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import MISSING, asdict, dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .drift import DriftSystem, RateSet, StabilityWarning, assemble_system
from .equilibrium import CovarianceBlock, SpinTempState, equal_time_covariance, solve_beta
from .optics import ProbeCouplings, ProbeSpec, SpeciesSpec, load_constants, probe_couplings, species
from .sensing import DriveSpec, coherent_response, snr_and_sensitivity, sql_limit
from .spectra import frequency_grid, measured_psd, noise_dip, qrt_spectrum, resonance_frequency

__all__ = [
    "ConfigError",
    "RunConfig",
    "config_load",
    "config_from_dict",
    "Model",
    "build_model",
    "run_command",
    "main",
]

log = logging.getLogger("spinopm")

EXIT_OK, EXIT_USAGE, EXIT_UNSTABLE, EXIT_VALIDATION = 0, 1, 2, 3
GAUSS = 1e-4
GHZ = 1e9


class ConfigError(ValueError):
    """Invalid configuration; ``problems`` lists every issue found."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {p}" for p in self.problems))


class UnstableSystem(RuntimeError):
    def __init__(self, eigenvalues, where=""):
        self.eigenvalues = np.asarray(eigenvalues)
        top = self.eigenvalues[np.argsort(-self.eigenvalues.real)][:4]
        super().__init__(f"unstable drift matrix{where}; leading eigenvalues: "
                         + ", ".join(f"{z.real:.4g}{z.imag:+.4g}j" for z in top))


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class EnsembleConfig:
    R_se: float
    R_sd: float
    B_z_G: float
    p: float | None = None
    R_op: float | None = None
    N_at: float | None = None
    density_cm3: float | None = None
    temperature_C: float | None = None
    s0: float = 1.0


@dataclass(frozen=True)
class ProbeConfig:
    detuning_GHz: float
    gamma_fwhm_GHz: float = 1.0
    Phi: float = 1e15
    A_eff_cm2: float = 0.01
    cell_length_cm: float = 1.0
    reference: str = "cg"
    convention: str = "probe_minus_line"


@dataclass(frozen=True)
class DriveConfig:
    B0_perp_G: float | None = None
    b: float = 0.0
    phi: float = 0.0


@dataclass(frozen=True)
class AnalysisConfig:
    n_freq: int = 2001
    span: float = 5.0
    freq_start_hz: float | None = None
    freq_stop_hz: float | None = None
    T: float = 1.0
    T_bw: float | None = None


@dataclass(frozen=True)
class RunConfig:
    species: str | dict
    ensemble: EnsembleConfig
    probe: ProbeConfig
    drive: DriveConfig = field(default_factory=DriveConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    sweep: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


_SECTIONS = {"ensemble": EnsembleConfig, "probe": ProbeConfig, "drive": DriveConfig, "analysis": AnalysisConfig}
_SPECIES_KEYS = {"name", "I", "hfs_Hz", "nu_d1_Hz", "f_osc", "j_excited", "g_s"}


def _section(name, cls, raw, problems):
    if not isinstance(raw, dict):
        problems.append(f"{name}: expected an object")
        return None
    known = {f.name for f in fields(cls)}
    problems += [f"{name}.{k}: unknown field" for k in raw if k not in known]
    missing = [f.name for f in fields(cls) if f.name not in raw and f.default is MISSING and f.default_factory is MISSING]
    problems += [f"{name}.{m}: required" for m in missing]
    for f in fields(cls):
        v = raw.get(f.name)
        numeric = "float" in f.type or "int" in f.type
        if numeric and v is not None and (isinstance(v, bool) or not isinstance(v, (int, float))):
            problems.append(f"{name}.{f.name}: expected a number, got {v!r}")
        if not numeric and "str" in f.type and v is not None and not isinstance(v, str):
            problems.append(f"{name}.{f.name}: expected a string, got {v!r}")
    if missing or any(p.startswith(f"{name}.") for p in problems):
        return None
    return cls(**{k: v for k, v in raw.items() if k in known})


def _check_ensemble(e: EnsembleConfig) -> list[str]:
    problems = []
    if (e.p is None) == (e.R_op is None):
        problems.append("ensemble: give exactly one of p, R_op")
    if not 0 < e.s0 <= 1:
        problems.append("ensemble.s0: must lie in (0, 1]")
    elif e.p is not None and not 0 <= e.p < e.s0:
        problems.append("ensemble.p: must lie in [0, s0)")
    if (e.N_at is None) == (e.density_cm3 is None):
        problems.append("ensemble: give exactly one of N_at, density_cm3 (with probe.A_eff_cm2 and probe.cell_length_cm)")
    for k in ("R_se", "R_sd", "R_op"):
        v = getattr(e, k)
        if v is not None and v < 0:
            problems.append(f"ensemble.{k}: must be non-negative")
    if e.p is not None and e.p > 0 and e.R_sd == 0:
        problems.append("ensemble: p > 0 needs R_sd > 0 to derive R_op")
    for k in ("N_at", "density_cm3"):
        v = getattr(e, k)
        if v is not None and not v > 0:
            problems.append(f"ensemble.{k}: must be positive")
    return problems


def _check_probe(pr: ProbeConfig) -> list[str]:
    problems = [f"probe.{k}: must be positive"
                for k in ("gamma_fwhm_GHz", "Phi", "A_eff_cm2", "cell_length_cm") if not getattr(pr, k) > 0]
    if pr.reference not in ("cg", "a", "b"):
        problems.append("probe.reference: one of cg, a, b")
    if pr.convention not in ("probe_minus_line", "line_minus_probe"):
        problems.append("probe.convention: one of probe_minus_line, line_minus_probe")
    return problems


def _check_drive(d: DriveConfig) -> list[str]:
    if d.B0_perp_G is not None and d.B0_perp_G < 0:
        return ["drive.B0_perp_G: must be non-negative"]
    return []


def _check_analysis(an: AnalysisConfig) -> list[str]:
    problems = []
    if an.n_freq < 2:
        problems.append("analysis.n_freq: must be at least 2")
    if not an.T > 0:
        problems.append("analysis.T: must be positive")
    if an.T_bw is not None and not an.T_bw > 0:
        problems.append("analysis.T_bw: must be positive")
    if (an.freq_start_hz is None) != (an.freq_stop_hz is None):
        problems.append("analysis: give both freq_start_hz and freq_stop_hz or neither")
    return problems


def _check_species(sp) -> list[str]:
    if isinstance(sp, dict):
        missing = {"I", "hfs_Hz", "nu_d1_Hz", "f_osc"} - set(sp)
        unknown = set(sp) - _SPECIES_KEYS
        return [f"species.{k}: required" for k in sorted(missing)] + \
            [f"species.{k}: unknown field" for k in sorted(unknown)]
    if not isinstance(sp, str):
        return ["species: expected a name or an object of constants"]
    try:
        species(sp)
    except KeyError:
        return [f"species: unknown species {sp!r}"]
    return []


def _check_sweep(sweep: dict) -> list[str]:
    problems = []
    for name, values in sweep.items():
        try:
            _axis_target(name)
        except KeyError as exc:
            problems.append(f"sweep.{name}: {exc.args[0]}")
        if not isinstance(values, list) or not values:
            problems.append(f"sweep.{name}: expected a non-empty list")
    return problems


_CHECKS = {"ensemble": _check_ensemble, "probe": _check_probe, "drive": _check_drive, "analysis": _check_analysis}


def config_from_dict(raw: dict) -> RunConfig:
    """Validate a parsed config document; raises :class:`ConfigError` listing all problems."""
    if not isinstance(raw, dict):
        raise ConfigError(["top level: expected an object"])
    problems = [f"{k}: unknown section" for k in raw
                if k not in ("species", "ensemble", "probe", "drive", "analysis", "sweep")]
    problems += [f"{k}: required" for k in ("species", "ensemble", "probe") if k not in raw]
    parts = {}
    for name, cls in _SECTIONS.items():
        if name in raw:
            part = _section(name, cls, raw[name], problems)
            if part is not None:
                problems += _CHECKS[name](part)
            parts[name] = part
    if "species" in raw:
        problems += _check_species(raw["species"])
    sweep = raw.get("sweep", {})
    if isinstance(sweep, dict):
        problems += _check_sweep(sweep)
    else:
        problems.append("sweep: expected an object of axis -> list")
    if problems:
        raise ConfigError(problems)
    return RunConfig(species=raw["species"], sweep=dict(sweep), **parts)


def config_load(path) -> RunConfig:
    """Load and validate a JSON config; ``rb87_serf`` names the bundled preset."""
    if str(path) == "rb87_serf":
        text = resources.files("spinopm").joinpath("data/rb87_serf.json").read_text()
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError([f"cannot read {path}: {exc.strerror}"]) from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"{path}: not valid JSON ({exc.msg} at line {exc.lineno})"]) from exc
    return config_from_dict(raw)


def _axis_target(name: str) -> tuple[str, str]:
    if "." in name:
        sec, key = name.split(".", 1)
        if sec not in _SECTIONS or key not in {f.name for f in fields(_SECTIONS[sec])}:
            raise KeyError(f"unknown axis {name!r}")
        return sec, key
    hits = [(sec, name) for sec, cls in _SECTIONS.items() if name in {f.name for f in fields(cls)}]
    if len(hits) != 1:
        raise KeyError(f"unknown axis {name!r}")
    return hits[0]


_EXCLUSIVE = {("ensemble", "p"): "R_op", ("ensemble", "R_op"): "p",
              ("ensemble", "N_at"): "density_cm3", ("ensemble", "density_cm3"): "N_at"}


def with_axis(cfg: RunConfig, name: str, value) -> RunConfig:
    """Copy of ``cfg`` with one field set; the exclusive partner is cleared."""
    sec, key = _axis_target(name)
    changes = {key: value}
    other = _EXCLUSIVE.get((sec, key))
    if other:
        changes[other] = None
    return replace(cfg, **{sec: replace(getattr(cfg, sec), **changes)})


def parse_axis(text: str) -> tuple[str, list[float]]:
    """``name=v1,v2,...`` or ``name=start:stop[:n]`` (``n`` defaults to 5)."""
    name, sep, spec = text.partition("=")
    if not sep or not name:
        raise ValueError(f"axis {text!r}: expected name=values")
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) not in (2, 3):
            raise ValueError(f"axis {text!r}: expected start:stop[:n]")
        n = int(parts[2]) if len(parts) == 3 else 5
        values = np.linspace(float(parts[0]), float(parts[1]), n).tolist()
    else:
        values = [float(v) for v in spec.split(",")]
    _axis_target(name)
    return name, values


# --------------------------------------------------------------------------
# model pipeline
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Model:
    """Everything derived from a config: state, drift system, probe, grid."""

    config: RunConfig
    species: SpeciesSpec
    state: SpinTempState
    rates: RateSet
    system: DriftSystem
    cov: CovarianceBlock
    probe: ProbeSpec
    couplings: ProbeCouplings
    N_at: float
    freqs: np.ndarray
    drive: DriveSpec
    T: float
    T_bw: float

    @property
    def nu_res(self) -> float:
        return resonance_frequency(self.system)


def _species(cfg: RunConfig) -> SpeciesSpec:
    if isinstance(cfg.species, str):
        return species(cfg.species, load_constants())
    s = cfg.species
    return SpeciesSpec(
        name=s.get("name", "custom"), I=float(s["I"]), hfs=float(s["hfs_Hz"]), nu_d1=float(s["nu_d1_Hz"]),
        f_osc=float(s["f_osc"]), j_excited=float(s.get("j_excited", 0.5)), g_s=float(s.get("g_s", 2.00231930436)),
    )


def build_model(cfg: RunConfig) -> Model:
    """Run the pipeline up to the drift system; raises :class:`UnstableSystem`."""
    sp = _species(cfg)
    e, pr, an = cfg.ensemble, cfg.probe, cfg.analysis
    # steady state of pumping against S-damping: p = s0 R_op / (R_op + R_sd)
    if e.p is not None:
        p = e.p
        R_op = p * e.R_sd / (e.s0 - p)
    else:
        R_op = e.R_op
        p = e.s0 * R_op / (R_op + e.R_sd) if R_op + e.R_sd > 0 else 0.0
    state = solve_beta(p, sp.I)
    rates = RateSet(e.R_se, e.R_sd, R_op, e.s0)
    B_z = e.B_z_G * GAUSS
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", StabilityWarning)
        system = assemble_system(state, rates, sp.omega0(B_z))
    if not system.stable:
        raise UnstableSystem(np.linalg.eigvals(system.A1))
    cov = equal_time_covariance(state, system.layout)
    A_eff = pr.A_eff_cm2 * 1e-4
    probe = ProbeSpec.for_species(
        sp, pr.detuning_GHz * GHZ, gamma_fwhm=pr.gamma_fwhm_GHz * GHZ, A_eff=A_eff, Phi=pr.Phi,
        reference=pr.reference, convention=pr.convention,
    )
    N_at = e.N_at if e.N_at is not None else e.density_cm3 * 1e6 * A_eff * pr.cell_length_cm * 1e-2
    if an.freq_start_hz is not None:
        freqs = np.linspace(an.freq_start_hz, an.freq_stop_hz, an.n_freq)
    else:
        freqs = frequency_grid(system, n=an.n_freq, span=an.span)
    nu_res = resonance_frequency(system)
    B0 = cfg.drive.B0_perp_G * GAUSS if cfg.drive.B0_perp_G is not None else 1e-12 * B_z
    T_bw = an.T_bw if an.T_bw is not None else 10.0 / (2 * math.pi * max(nu_res, 1e-300))
    return Model(
        config=cfg, species=sp, state=state, rates=rates, system=system, cov=cov, probe=probe,
        couplings=probe_couplings(probe, sp.I), N_at=N_at, freqs=freqs,
        drive=DriveSpec(B0_perp=B0, b_angle=cfg.drive.b, phi=cfg.drive.phi), T=an.T, T_bw=T_bw,
    )


def sql_reference(model: Model) -> float:
    """Stretched-state limit with ``Gamma = R_sd`` for the configured ensemble."""
    sp = model.species
    g_F = sp.g_s / (2 * sp.I + 1)
    return sql_limit(max(model.rates.R_sd, 1e-300), model.N_at, model.T, sp.a, g_F)


def _table(model: Model, level: str) -> dict:
    spec = qrt_spectrum(model.system, model.cov, model.freqs)
    tr = measured_psd(spec, model.couplings, model.N_at, model.probe.Phi)
    cols = {
        "freq_hz": model.freqs,
        "S_spin_effective": tr.S_eff_one_sided,
        "S_measured": tr.S_measured_one_sided,
        "psn_floor": np.full_like(model.freqs, 2 * tr.psn_floor),
    }
    if level == "spectrum":
        return cols
    resp = coherent_response(model.system, model.couplings, model.freqs, model.drive)
    cols["Ac"] = resp.Ac
    cols["phase_chi"] = resp.chi
    if level == "response":
        return cols
    rep = snr_and_sensitivity(
        model.freqs, resp.Ac, tr.S_eff_one_sided, model.couplings.G, model.probe.Phi, model.N_at,
        model.species.gamma_F, model.drive.B0_perp, model.T,
    )
    cols["snr"] = rep.SNR
    cols["delta_B_T_per_sqrtHz"] = rep.delta_B_rms_per_sqrtHz
    cols["snr_composed"] = rep.SNR_composed
    cols["delta_B_composed_T_per_sqrtHz"] = rep.delta_B_composed
    cols["sql_reference"] = np.full_like(model.freqs, sql_reference(model))
    return cols


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------

def _rows(cols: dict) -> list[dict]:
    keys = list(cols)
    n = len(next(iter(cols.values())))
    return [{k: _scalar(cols[k][i]) for k in keys} for i in range(n)]


def _scalar(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer, int)):
        return int(v)
    return v


def _emit(cols: dict, out: str | None, fmt: str) -> None:
    rows = _rows(cols)
    if fmt == "json":
        text = json.dumps(rows, indent=1, allow_nan=True) + "\n"
    else:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(cols), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
        text = buf.getvalue()
    if out is None or out == "-":
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            # reader went away (e.g. piped into head); silence the exit-time flush
            sys.stdout = open(os.devnull, "w")
    else:
        Path(out).write_text(text)


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def _sweep_point(cfg: RunConfig, assignment: tuple) -> dict:
    for name, value in assignment:
        cfg = with_axis(cfg, name, value)
    model = build_model(cfg)
    cols = _table(model, "snr")
    dip = noise_dip(model.freqs, cols["S_spin_effective"], model.nu_res)
    n = len(model.freqs)
    head = {name: np.full(n, value, dtype=float) for name, value in assignment}
    head["nu_res_hz"] = np.full(n, model.nu_res)
    head["dip_freq_hz"] = np.full(n, dip.frequency if dip else np.nan)
    head["dip_depth"] = np.full(n, dip.depth if dip else 0.0)
    return {**head, **cols}


def _sweep(cfg: RunConfig, axes: list[tuple[str, list]], threads: int) -> dict:
    grids = np.meshgrid(*[np.asarray(v, dtype=float) for _, v in axes], indexing="ij")
    points = [tuple((name, float(g.flat[i])) for (name, _), g in zip(axes, grids)) for i in range(grids[0].size)]
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        parts = list(pool.map(lambda a: _sweep_point(cfg, a), points))
    return {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}


def _validate_suite(cfg: RunConfig, driven: bool = True):
    from .validation import run_suite

    return run_suite(build_model(cfg), driven=driven)


def run_command(cmd: str, cfg: RunConfig, out: str | None = None, fmt: str = "csv",
                axes=None, threads: int = 1, quick: bool = False) -> int:
    """Execute one command; returns the process exit code."""
    try:
        if cmd in ("spectrum", "response", "snr", "sensitivity"):
            model = build_model(cfg)
            cols = _table(model, "snr" if cmd == "sensitivity" else cmd)
            _emit(cols, out, fmt)
            if cmd == "sensitivity":
                dB = cols["delta_B_T_per_sqrtHz"]
                k = int(np.argmin(dB))
                log.info("best sensitivity %.3e T/sqrt(Hz) at %.2f Hz; SQL reference %.3e T",
                         dB[k], model.freqs[k], cols["sql_reference"][0])
            return EXIT_OK
        if cmd == "sweep":
            axes = list(axes or []) or [(k, v) for k, v in cfg.sweep.items()]
            if not axes:
                log.error("sweep: no axes given (use --axis or the config's sweep section)")
                return EXIT_USAGE
            _emit(_sweep(cfg, axes, threads), out, fmt)
            return EXIT_OK
        if cmd == "validate":
            results = _validate_suite(cfg, driven=not quick)
            cols = {
                "check": np.array([r.name for r in results], dtype=object),
                "value": np.array([r.value for r in results]),
                "tolerance": np.array([r.tolerance for r in results]),
                "passed": np.array([r.passed for r in results], dtype=object),
            }
            for r in results:
                log.info("%-34s %s  value=%.3e tol=%.1e %s", r.name, "PASS" if r.passed else "FAIL",
                         r.value, r.tolerance, r.detail)
            _emit(cols, out, fmt)
            return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION
    except UnstableSystem as exc:
        log.error("%s", exc)
        return EXIT_UNSTABLE
    raise ValueError(f"unknown command {cmd!r}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="spinopm", description="Spin-noise spectra, RF response and sensitivity of alkali OPMs.")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    for name, helptext in (
        ("spectrum", "effective spin-noise and measured PSD"),
        ("response", "spectrum plus response amplitude A_c and phase"),
        ("snr", "response plus SNR and sensitivity"),
        ("sensitivity", "as snr; also logs the best sensitivity"),
        ("sweep", "long-format table over swept config fields"),
        ("validate", "oracle cross-checks; exit 3 on any failure"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", default="rb87_serf",
                       help="JSON config path, or 'rb87_serf' for the bundled preset (default)")
        p.add_argument("--out", default=None, help="output file (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--axis", action="append", default=[], metavar="NAME=SPEC",
                       help="sweep axis, name=v1,v2,... or name=start:stop[:n]; repeatable")
        p.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "validate":
            p.add_argument("--quick", action="store_true", help="skip the driven time-domain checks")
    return ap


def main(argv=None) -> int:
    ap = _parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose or args.cmd in ("validate", "sensitivity")
                        else logging.WARNING, format="%(levelname)s %(message)s", stream=sys.stderr)
    if args.threads < 1:
        ap.error("--threads must be at least 1")
    try:
        cfg = config_load(args.config)
        axes = [parse_axis(a) for a in args.axis]
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError) as exc:
        print(f"spinopm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if axes and args.cmd != "sweep":
        ap.error("--axis only applies to sweep")
    return run_command(args.cmd, cfg, args.out, args.format, axes, args.threads,
                       quick=getattr(args, "quick", False))


if __name__ == "__main__":
    sys.exit(main())
