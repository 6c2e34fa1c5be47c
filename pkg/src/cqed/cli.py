"""Batch command-line front end emitting CSV/JSON data files.

Each invocation runs one command against one config file and writes one
table. Column values are plain (not angular) frequencies in GHz wherever
they are frequencies; other units are spelled out in the column note that
every file carries. Outputs are deterministic: rerunning a config yields
byte-identical files except for the wall-time metadata line, and the
resolved config echoed into the metadata reproduces the rows when fed
back in.

Exit codes: 0 success, 2 invalid config or environment, 3 library error
(the module diagnostic is printed to stderr verbatim).
"""

import argparse
import json
import math
import os
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import psutil

from . import __version__
from .cavity import (
    CoupledSystemSpec,
    CouplingParams,
    ResonatorParams,
    build_jc_hamiltonian,
    coupling_for_g1,
    dispersive_shift,
    readout_peak_ghz,
    transmission_spectrum,
    vacuum_rabi_trace,
)
from .charge_qubit import (
    QubitParams,
    SquidBias,
    anharmonicity,
    charge_dispersion,
    squid_effective_ej,
    sweep_offset_charge,
    transition_energy,
)
from .config import ConfigError, format_value, load_config
from .dynamics import (
    JunctionPhaseState,
    integrate,
    junction_angular_frequency_sq,
    junction_energy,
    junction_eom_rhs,
    matched_pendulum,
    pendulum_energy,
    pendulum_eom_rhs,
    pendulum_initial_state,
)
from .numerics import hermitian_eigensolve
from .units import ghz_to_rad_ns, rad_ns_to_ghz

COMMANDS = (
    "spectrum",
    "flux-sweep",
    "dispersion",
    "rabi",
    "dispersive",
    "readout",
    "pendulum",
)


@dataclass
class ResultTable:
    """One command's output: columns, numeric rows, and metadata blocks."""

    columns: list
    rows: np.ndarray
    config: dict
    column_note: str
    results: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)


def worker_count():
    """Sweep parallelism cap: CQED_THREADS, else the physical core count."""
    raw = os.environ.get("CQED_THREADS")
    if raw is None:
        return psutil.cpu_count(logical=False) or 1
    try:
        count = int(raw)
    except ValueError:
        raise ConfigError(
            f"CQED_THREADS must be a positive integer, got {raw!r}"
        ) from None
    if count < 1:
        raise ConfigError(f"CQED_THREADS must be >= 1, got {count}")
    return count


def _qubit(values, ng=None):
    return QubitParams(
        ej_ghz=values["qubit.ej_ghz"],
        ec_ghz=values["qubit.ec_ghz"],
        ng=values["qubit.ng"] if ng is None else ng,
    )


def run_spectrum(values):
    q = _qubit(values)
    grid = np.linspace(
        values["sweep.start"], values["sweep.stop"], values["sweep.points"]
    )
    levels = values["spectrum.levels"]
    normalize = values["spectrum.normalize"]
    rows = sweep_offset_charge(q, grid, levels=levels, normalize=normalize)
    unit = "norm" if normalize else "ghz"
    columns = ["n_g"] + [f"e{m}_{unit}" for m in range(levels)]
    note = (
        "offset charge, then one column per level; normalized levels are "
        "(E_m(n_g) - E_0(1/2)) / E_01(1/2), otherwise GHz"
    )
    return ResultTable(columns=columns, rows=rows, config=dict(values),
                       column_note=note)


def run_flux_sweep(values):
    ec = values["qubit.ec_ghz"]
    ng = values["qubit.ng"]
    single = values["squid.ej_single_ghz"]
    grid = np.linspace(
        values["sweep.start"], values["sweep.stop"], values["sweep.points"]
    )

    def solve(flux_ratio):
        ej = squid_effective_ej(
            SquidBias(ej_single_ghz=single, flux_ratio=flux_ratio)
        )
        f01 = transition_energy(QubitParams(ej_ghz=ej, ec_ghz=ec, ng=ng), 0, 1)
        return ej, f01

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        solved = list(pool.map(solve, grid))
    rows = np.empty((grid.size, 3))
    rows[:, 0] = grid
    rows[:, 1] = [ej for ej, _ in solved]
    rows[:, 2] = [f01 for _, f01 in solved]
    note = "flux ratio Phi/Phi_0, effective E_J (GHz), 0-1 transition (GHz)"
    return ResultTable(columns=["flux_ratio", "ej_eff_ghz", "f01_ghz"],
                       rows=rows, config=dict(values), column_note=note)


def run_dispersion(values):
    ec = values["qubit.ec_ghz"]
    ng = values["qubit.ng"]
    ratios = values["dispersion.ratios"]

    def solve(ratio):
        q = QubitParams(ej_ghz=ratio * ec, ec_ghz=ec, ng=ng)
        e01 = transition_energy(q, 0, 1)
        eps1 = charge_dispersion(q, m=1)
        alpha = anharmonicity(q)
        return [ratio, e01, eps1, eps1 / e01, alpha, abs(alpha) / e01]

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        rows = np.array(list(pool.map(solve, ratios)))
    columns = [
        "ratio_ej_ec",
        "e01_ghz",
        "eps1_ghz",
        "eps1_over_e01",
        "alpha_ghz",
        "abs_alpha_over_e01",
    ]
    note = (
        "E_J/E_C ratio, 0-1 transition (GHz), charge dispersion of level 1 "
        "(GHz) and normalized, anharmonicity (GHz) and normalized magnitude"
    )
    return ResultTable(columns=columns, rows=rows, config=dict(values),
                       column_note=note)


def run_rabi(values):
    q = _qubit(values)
    f01 = transition_energy(q, 0, 1)
    f_r = values["resonator.fr_ghz"]
    if f_r is None:
        f_r = f01  # default: resonator tuned onto the qubit
    g1 = values["coupling.g1_ghz"]
    n_transmon = values["system.n_transmon"]
    spec = CoupledSystemSpec(
        qubit=q,
        resonator=ResonatorParams(f_r_ghz=f_r),
        coupling=coupling_for_g1(q, g1, j_max=n_transmon - 1),
        n_transmon=n_transmon,
        n_fock=values["system.n_fock"],
    )
    t_end = values["rabi.t_end_ns"]
    results = {"f01_ghz": f01}
    if g1 > 0.0:
        t_swap = math.pi / (2.0 * ghz_to_rad_ns(g1))
        results["swap_time_ns"] = t_swap
        if t_end is None:
            t_end = 4.0 * t_swap  # two full swap cycles
    times = np.linspace(0.0, t_end, values["rabi.points"])
    trace = vacuum_rabi_trace(spec, times)
    rows = np.column_stack([trace.times, trace.p_excited, trace.p_one_photon])
    config = dict(values)
    config["resonator.fr_ghz"] = f_r
    config["rabi.t_end_ns"] = t_end
    note = "time (ns), P(transmon excited), P(exactly one photon)"
    return ResultTable(columns=["t_ns", "p_excited", "p_one_photon"],
                       rows=rows, config=config, column_note=note,
                       results=results)


def _dispersive_system(values, kappa_mhz=None):
    q = _qubit(values)
    resonator = ResonatorParams(
        f_r_ghz=values["resonator.fr_ghz"],
        kappa_mhz=1.0 if kappa_mhz is None else kappa_mhz,
    )
    coupling = CouplingParams(
        beta=None, v_rms_volts=None, g_ghz=(values["coupling.g1_ghz"],)
    )
    return CoupledSystemSpec(
        qubit=q, resonator=resonator, coupling=coupling,
        n_transmon=2, n_fock=3,
    )


def run_dispersive(values):
    spec = _dispersive_system(values)
    shift = dispersive_shift(spec)
    g1 = spec.coupling.g_ghz[0]
    delta = shift.delta_ghz
    exact_formula = 0.5 * (math.sqrt(delta**2 + 4.0 * g1**2) - delta)

    eigenvalues = hermitian_eigensolve(build_jc_hamiltonian(spec)).values
    w_r = ghz_to_rad_ns(spec.resonator.f_r_ghz)
    photon_like = eigenvalues[1:][np.argmin(np.abs(eigenvalues[1:] - w_r))]
    exact_matrix = abs(rad_ns_to_ghz(photon_like - w_r))

    def rel_err(reference):
        if reference == 0.0:
            return 0.0
        return abs(shift.chi_ghz - reference) / reference

    f01 = transition_energy(spec.qubit, 0, 1)
    row = [
        g1,
        f01,
        spec.resonator.f_r_ghz,
        delta,
        shift.validity,
        shift.chi_ghz,
        exact_formula,
        exact_matrix,
        rel_err(exact_formula),
        rel_err(exact_matrix),
    ]
    columns = [
        "g1_ghz",
        "f01_ghz",
        "fr_ghz",
        "delta_ghz",
        "validity",
        "chi_ghz",
        "chi_exact_formula_ghz",
        "chi_exact_matrix_ghz",
        "rel_err_vs_formula",
        "rel_err_vs_matrix",
    ]
    note = (
        "perturbative chi = g1^2/delta against the exact dressed shift, "
        "once from the two-level closed form and once from diagonalizing "
        "the coupled Hamiltonian; frequencies GHz"
    )
    return ResultTable(columns=columns, rows=np.array([row]),
                       config=dict(values), column_note=note)


def run_readout(values):
    spec = _dispersive_system(values, kappa_mhz=values["resonator.kappa_mhz"])
    f_r = spec.resonator.f_r_ghz
    span = values["readout.span_ghz"]
    grid = np.linspace(f_r - span, f_r + span, values["readout.points"])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        ground = transmission_spectrum(spec, "ground", grid)
        excited = transmission_spectrum(spec, "excited", grid)
    shift = dispersive_shift(spec)
    peak_ground = readout_peak_ghz(spec, "ground")
    peak_excited = readout_peak_ghz(spec, "excited")
    rows = np.column_stack([grid, ground[:, 1], excited[:, 1]])
    results = {
        "chi_ghz": shift.chi_ghz,
        "validity": shift.validity,
        "peak_ground_ghz": peak_ground,
        "peak_excited_ghz": peak_excited,
        "peak_separation_ghz": peak_ground - peak_excited,
    }
    messages = []
    for item in caught:
        text = str(item.message)
        if text not in messages:
            messages.append(text)
    note = (
        "probe frequency (GHz), |S21|^2 with the qubit in the ground state, "
        "|S21|^2 with the qubit excited"
    )
    return ResultTable(columns=["f_ghz", "s21_ground", "s21_excited"],
                       rows=rows, config=dict(values), column_note=note,
                       results=results, warnings=messages)


def run_pendulum(values):
    q = _qubit(values, ng=0.0)
    phi0 = values["pendulum.phi0"]
    t_end = values["pendulum.t_end_ns"]
    dt = values["pendulum.dt_ns"]
    junction_state = JunctionPhaseState(phi=phi0, dphi_dt=0.0)
    junction = integrate(
        lambda s: junction_eom_rhs(s, q),
        junction_state,
        t_end,
        dt,
        energy=lambda s: junction_energy(s, q),
    )
    pendulum = matched_pendulum(
        q, phi0,
        length_m=values["pendulum.length_m"],
        mass_kg=values["pendulum.mass_kg"],
    )
    mapped = integrate(
        lambda s: pendulum_eom_rhs(s, pendulum),
        pendulum_initial_state(pendulum),
        t_end,
        dt,
        energy=lambda s: pendulum_energy(s, pendulum),
    )
    rows = np.column_stack([
        junction.times,
        junction.angles,
        junction.velocities,
        mapped.angles,
        mapped.velocities,
        junction.energies,
        mapped.energies,
    ])
    omega_sq = junction_angular_frequency_sq(q)
    results = {
        "omega_sq_rad2_ns2": omega_sq,
        "small_angle_period_ns": 2.0 * math.pi / math.sqrt(omega_sq),
        "max_angle_mismatch_rad": float(
            np.abs(junction.angles - mapped.angles).max()
        ),
    }
    columns = [
        "t_ns",
        "junction_phi_rad",
        "junction_dphidt_rad_ns",
        "pendulum_phi_rad",
        "pendulum_dphidt_rad_ns",
        "junction_energy_rad_ns",
        "pendulum_energy_j",
    ]
    note = (
        "junction phase dynamics beside the matched pendulum on the same "
        "time grid; junction energy in rad/ns (hbar = 1), pendulum energy "
        "in joules"
    )
    return ResultTable(columns=columns, rows=rows, config=dict(values),
                       column_note=note, results=results)


RUNNERS = {
    "spectrum": run_spectrum,
    "flux-sweep": run_flux_sweep,
    "dispersion": run_dispersion,
    "rabi": run_rabi,
    "dispersive": run_dispersive,
    "readout": run_readout,
    "pendulum": run_pendulum,
}


def _require_finite(table):
    if not np.all(np.isfinite(table.rows)):
        raise RuntimeError("internal error: non-finite value in output rows")


def write_csv(table, path, command, wall_time_s):
    _require_finite(table)
    lines = [
        f"# command = {command}",
        f"# version = {__version__}",
        f"# wall_time_s = {wall_time_s!r}",
        "# frequencies are plain (not angular) frequencies",
        f"# columns: {table.column_note}",
    ]
    for key, value in table.config.items():
        lines.append(f"# config {key} = {format_value(value)}")
    for key, value in table.results.items():
        lines.append(f"# result {key} = {format_value(value)}")
    for message in table.warnings:
        lines.append(f"# warning = {message}")
    lines.append(",".join(table.columns))
    for row in table.rows:
        lines.append(",".join(format(v, ".17g") for v in row))
    with open(path, "w") as handle:
        handle.write("\n".join(lines) + "\n")


def write_json(table, path, command, wall_time_s):
    _require_finite(table)
    payload = {
        "metadata": {
            "command": command,
            "version": __version__,
            "wall_time_s": wall_time_s,
            "config": {
                key: format_value(value) for key, value in table.config.items()
            },
            "results": dict(table.results),
            "warnings": list(table.warnings),
        },
        "columns": list(table.columns),
        "rows": [[float(v) for v in row] for row in table.rows],
    }
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="cqed",
        description=(
            "Compute circuit-QED spectra, dynamics, and readout tables "
            "from a key = value config file."
        ),
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True,
                        help="path to the key = value config file")
    parser.add_argument("--out", default=None,
                        help="output path (default: <command>.<format>)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--seed", type=int, default=None,
                        help="reserved; no current command uses randomness")
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config, args.command)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    started = time.perf_counter()
    try:
        table = RUNNERS[args.command](config.values)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError) as exc:
        print(str(exc), file=sys.stderr)
        return 3
    wall_time_s = time.perf_counter() - started

    out_path = args.out or f"{args.command}.{args.format}"
    writer = write_csv if args.format == "csv" else write_json
    try:
        writer(table, out_path, args.command, wall_time_s)
    except (OSError, RuntimeError) as exc:
        print(str(exc), file=sys.stderr)
        return 3
    print(f"{out_path}: {table.rows.shape[0]} rows")
    return 0


if __name__ == "__main__":
    sys.exit(main())
