"""Transmon-resonator coupling: Jaynes-Cummings assembly and readout.

The composite Hilbert space is (transmon levels) x (Fock states), assembled
with Kronecker products in that order. Two interaction forms are built: the
excitation-conserving generalized Jaynes-Cummings Hamiltonian

    H = sum_j w_j |j><j| (x) I  +  I (x) w_r a^dag a
        + sum_j g_j (|j-1><j| (x) a^dag + |j><j-1| (x) a)

and the unapproximated capacitive interaction 2 e beta V_rms (a + a^dag) n,
kept as a numerical check on the rotating-wave form. Transmon level
frequencies are referenced to the ground state (w_0 = 0); matrices are
rad/ns throughout, user-facing frequencies GHz.

The dispersive readout model is deliberately thin: the resonator line is a
unit-height Lorentzian whose center sits at f_r + chi or f_r - chi for the
qubit ground or excited state. The peak positions carry the physics; the
lineshape is presentation.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .charge_qubit import charge_matrix_elements, charge_operator_eigenbasis, spectrum
from .numerics import TimeTrace, evolve, kron
from .units import E_CHARGE, HBAR, ghz_to_rad_ns, joules_to_ghz

#: minimum detuning-to-coupling ratio for an unflagged dispersive spectrum
DISPERSIVE_VALIDITY_MIN = 5.0


class DispersiveValidityWarning(UserWarning):
    """Detuning is not large against the coupling; chi = g^2/Delta is suspect."""


@dataclass(frozen=True)
class ResonatorParams:
    """Readout resonator: resonance f_r (GHz), C_r (fF), L_r (nH), kappa (MHz).

    Either give f_r directly, or give both C_r and L_r and the resonance is
    derived as 1/(2*pi*sqrt(L_r*C_r)). Giving all three cross-checks them to
    1e-9 relative. C_r is additionally what sets the vacuum voltage scale,
    so couplings require it.
    """

    f_r_ghz: float = None
    c_r_ff: float = None
    l_r_nh: float = None
    kappa_mhz: float = 1.0

    def __post_init__(self):
        if not self.kappa_mhz > 0.0:
            raise ValueError(f"kappa must be > 0 MHz, got {self.kappa_mhz}")
        for name in ("f_r_ghz", "c_r_ff", "l_r_nh"):
            value = getattr(self, name)
            if value is not None and not value > 0.0:
                raise ValueError(f"{name} must be > 0 when given, got {value}")
        derived = None
        if self.c_r_ff is not None and self.l_r_nh is not None:
            # 1/(2*pi*sqrt(L*C)) with L in H and C in F, reported in GHz
            lc = (self.l_r_nh * 1e-9) * (self.c_r_ff * 1e-15)
            derived = 1e-9 / (2.0 * math.pi * math.sqrt(lc))
        if self.f_r_ghz is None:
            if derived is None:
                raise ValueError(
                    "resonator needs f_r_ghz, or both c_r_ff and l_r_nh"
                )
            object.__setattr__(self, "f_r_ghz", derived)
        elif derived is not None:
            if abs(self.f_r_ghz - derived) > 1e-9 * self.f_r_ghz:
                raise ValueError(
                    f"inconsistent resonator: f_r = {self.f_r_ghz} GHz but "
                    f"1/(2*pi*sqrt(L_r*C_r)) = {derived} GHz"
                )

    def v_rms_volts(self):
        """Vacuum voltage fluctuation sqrt(hbar*w_r / 2*C_r) in volts."""
        if self.c_r_ff is None:
            raise ValueError("V_rms needs the resonator capacitance c_r_ff")
        omega = 2.0 * math.pi * self.f_r_ghz * 1e9
        return math.sqrt(HBAR * omega / (2.0 * self.c_r_ff * 1e-15))


@dataclass(frozen=True)
class CouplingParams:
    """Capacitive coupling record: divider beta, V_rms (volts), g_j (GHz).

    g_ghz[j-1] couples the j-1 <-> j transmon transition; the values are
    non-negative magnitudes. beta and v_rms_volts may be None when the
    couplings were specified directly rather than derived from a circuit.
    """

    beta: float
    v_rms_volts: float
    g_ghz: tuple

    def __post_init__(self):
        if self.beta is not None and not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must be in [0, 1], got {self.beta}")
        if self.v_rms_volts is not None and not self.v_rms_volts >= 0.0:
            raise ValueError("V_rms must be >= 0 volts")
        g = tuple(float(x) for x in self.g_ghz)
        if len(g) < 1:
            raise ValueError("need at least one coupling g_1")
        if any(not x >= 0.0 for x in g):
            raise ValueError(f"couplings must be >= 0 GHz, got {g}")
        object.__setattr__(self, "g_ghz", g)


@dataclass(frozen=True)
class CoupledSystemSpec:
    """Composite system: qubit, resonator, coupling, and both truncations."""

    qubit: object
    resonator: ResonatorParams
    coupling: CouplingParams
    n_transmon: int = 3
    n_fock: int = 8

    def __post_init__(self):
        if self.n_transmon < 2:
            raise ValueError(f"n_transmon must be >= 2, got {self.n_transmon}")
        if self.n_fock < 2:
            raise ValueError(f"n_fock must be >= 2, got {self.n_fock}")
        if len(self.coupling.g_ghz) < self.n_transmon - 1:
            raise ValueError(
                f"{self.n_transmon} transmon levels need "
                f"{self.n_transmon - 1} couplings, got "
                f"{len(self.coupling.g_ghz)}"
            )

    @property
    def dim(self):
        return self.n_transmon * self.n_fock


@dataclass(frozen=True)
class DispersiveResult:
    """chi = g_1^2/Delta (GHz), detuning Delta (GHz), validity Delta/g_1."""

    chi_ghz: float
    delta_ghz: float
    validity: float


@dataclass(frozen=True)
class VacuumRabiTrace:
    """Vacuum Rabi samples: P(transmon excited), P(exactly one photon)."""

    times: np.ndarray
    p_excited: np.ndarray
    p_one_photon: np.ndarray
    populations: np.ndarray


def ladder_operators(n_fock):
    """Truncated annihilation/creation pair (a, a_dag), a|k> = sqrt(k)|k-1>."""
    if n_fock < 1:
        raise ValueError(f"n_fock must be >= 1, got {n_fock}")
    a = np.zeros((n_fock, n_fock))
    for k in range(1, n_fock):
        a[k - 1, k] = math.sqrt(k)
    return a, a.T.copy()


def coupling_energy_ghz(beta, v_rms_volts):
    """The circuit energy scale 2 e beta V_rms as E/h in GHz."""
    return joules_to_ghz(2.0 * E_CHARGE * beta * v_rms_volts)


def coupling_strengths(q, beta, r, j_max):
    """g_j = 2 e beta V_rms |<j-1| n |j>| / h in GHz, for j = 1..j_max."""
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must be in [0, 1], got {beta}")
    scale = coupling_energy_ghz(beta, r.v_rms_volts())
    return scale * charge_matrix_elements(q, j_max)


def divider_beta(c_g_ff, c_q_ff):
    """beta = C_g / (C_g + C_q) with C_q the transmon's C_J + C_shunt."""
    if c_g_ff < 0.0 or c_q_ff < 0.0 or c_g_ff + c_q_ff <= 0.0:
        raise ValueError("capacitances must be >= 0 with a positive sum")
    return c_g_ff / (c_g_ff + c_q_ff)


def derive_coupling(q, beta, r, j_max):
    """CouplingParams with g_j computed from the circuit quantities."""
    return CouplingParams(
        beta=beta,
        v_rms_volts=r.v_rms_volts(),
        g_ghz=tuple(coupling_strengths(q, beta, r, j_max)),
    )


def coupling_for_g1(q, g1_ghz, j_max=2):
    """CouplingParams hitting a target g_1, keeping the g_j ladder consistent.

    Solves for the V_rms (at beta = 1) that makes the first transition
    couple at g1_ghz; higher couplings follow from the same circuit scale
    and the qubit's matrix elements. Convenience for specifying systems by
    coupling strength instead of capacitances.
    """
    if not g1_ghz >= 0.0:
        raise ValueError(f"g_1 must be >= 0 GHz, got {g1_ghz}")
    elems = charge_matrix_elements(q, j_max)
    if elems[0] == 0.0:
        raise ValueError("first charge matrix element vanishes; g_1 unreachable")
    scale = g1_ghz / elems[0]
    v_rms = scale / joules_to_ghz(2.0 * E_CHARGE)
    g = g1_ghz * (elems / elems[0])  # keeps g_ghz[0] == g1_ghz bit for bit
    return CouplingParams(beta=1.0, v_rms_volts=v_rms, g_ghz=tuple(g))


def _free_hamiltonian(spec, levels_ghz):
    omega_j = ghz_to_rad_ns(levels_ghz - levels_ghz[0])
    omega_r = ghz_to_rad_ns(spec.resonator.f_r_ghz)
    a, a_dag = ladder_operators(spec.n_fock)
    ident_t = np.eye(spec.n_transmon)
    h = kron(np.diag(omega_j), np.eye(spec.n_fock))
    h = h + kron(ident_t, omega_r * (a_dag @ a))
    return h.astype(np.complex128), a, a_dag


def build_jc_hamiltonian(spec):
    """Generalized Jaynes-Cummings matrix (rad/ns) on the composite space.

    Transmon frequencies come from the converged charge-basis spectrum,
    ground-referenced; couplings are the g_j carried by spec.coupling. The
    form conserves total excitation number, so the matrix is block diagonal
    over excitation sectors.
    """
    levels = spectrum(spec.qubit, levels=spec.n_transmon).levels_ghz
    h, a, a_dag = _free_hamiltonian(spec, levels)
    for j in range(1, spec.n_transmon):
        g = ghz_to_rad_ns(spec.coupling.g_ghz[j - 1])
        if g == 0.0:
            continue
        lower = np.zeros((spec.n_transmon, spec.n_transmon))
        lower[j - 1, j] = 1.0
        h = h + g * (kron(lower, a_dag) + kron(lower.T, a))
    return h


def build_full_interaction(spec):
    """Free terms plus the unapproximated 2 e beta V_rms (a + a_dag) (x) n.

    Keeps the counter-rotating terms that the Jaynes-Cummings form drops;
    diagonalizing both and comparing is the standard check that the
    rotating-wave approximation is justified at the operating point.
    Requires spec.coupling to carry beta and V_rms.
    """
    if spec.coupling.beta is None or spec.coupling.v_rms_volts is None:
        raise ValueError(
            "full interaction needs beta and V_rms on the coupling record"
        )
    levels = spectrum(spec.qubit, levels=spec.n_transmon).levels_ghz
    h, a, a_dag = _free_hamiltonian(spec, levels)
    scale = ghz_to_rad_ns(
        coupling_energy_ghz(spec.coupling.beta, spec.coupling.v_rms_volts)
    )
    n_block = charge_operator_eigenbasis(spec.qubit, spec.n_transmon)
    return h + scale * kron(n_block, a + a_dag)


def excitation_number_operator(spec):
    """N = sum_j j |j><j| (x) I + I (x) a_dag a on the composite space.

    The photon part is written as the exact integer diagonal rather than the
    product a_dag @ a, whose sqrt(k)*sqrt(k) entries pick up roundoff; with
    integer entries [H_jc, N] vanishes identically in floating point.
    """
    levels = np.diag(np.arange(spec.n_transmon, dtype=float))
    photons = np.diag(np.arange(spec.n_fock, dtype=float))
    return kron(levels, np.eye(spec.n_fock)) + kron(
        np.eye(spec.n_transmon), photons
    )


def dispersive_shift(spec):
    """chi = g_1^2 / Delta with Delta = |f_01 - f_r|, all in GHz.

    Rejects Delta = 0: on resonance the dispersive expansion has no meaning.
    The validity field carries Delta/g_1 so callers can judge whether the
    dispersive regime (Delta >> g_1) actually applies.
    """
    f01 = float(np.diff(spectrum(spec.qubit, levels=2).levels_ghz)[0])
    delta = abs(f01 - spec.resonator.f_r_ghz)
    if delta == 0.0:
        raise ValueError("zero detuning: the system is resonant, not dispersive")
    g1 = spec.coupling.g_ghz[0]
    chi = g1**2 / delta
    validity = delta / g1 if g1 > 0.0 else math.inf
    return DispersiveResult(chi_ghz=chi, delta_ghz=delta, validity=validity)


def vacuum_rabi_trace(spec, t_grid):
    """Vacuum Rabi oscillation from |excited transmon, vacuum>.

    Requires the first transmon transition resonant with the resonator to
    1e-9 relative. Times are ns. With n_transmon = 2 the populations follow
    cos^2(g_1 t) and sin^2(g_1 t), swapping fully at t = pi/(2 g_1) with
    g_1 in rad/ns.
    """
    f01 = float(np.diff(spectrum(spec.qubit, levels=2).levels_ghz)[0])
    f_r = spec.resonator.f_r_ghz
    if abs(f01 - f_r) > 1e-9 * abs(f_r):
        raise ValueError(
            f"vacuum Rabi needs resonance: f_01 = {f01} GHz vs "
            f"f_r = {f_r} GHz"
        )
    h = build_jc_hamiltonian(spec)
    psi0 = np.zeros(spec.dim, dtype=np.complex128)
    psi0[1 * spec.n_fock + 0] = 1.0  # |j=1> (x) |0 photons>
    trace = evolve(h, psi0, t_grid)
    pops = trace.populations()
    by_level = pops.reshape(len(trace.times), spec.n_transmon, spec.n_fock)
    p_excited = by_level[:, 1, :].sum(axis=1)
    p_one_photon = by_level[:, :, 1].sum(axis=1)
    return VacuumRabiTrace(
        times=trace.times,
        p_excited=p_excited,
        p_one_photon=p_one_photon,
        populations=pops,
    )


def transmission_spectrum(
    spec, qubit_state, f_grid, min_validity=DISPERSIVE_VALIDITY_MIN
):
    """Dispersive readout line |S21|^2 over a frequency grid (GHz).

    The Lorentzian of width kappa peaks at f_r + chi for qubit_state
    "ground" and f_r - chi for "excited". Returns rows of
    (f_ghz, transmission); peak height is 1 by construction. A validity
    ratio below min_validity emits DispersiveValidityWarning instead of
    failing, since the curve may still be wanted for illustration.
    """
    if qubit_state not in ("ground", "excited"):
        raise ValueError(
            f"qubit_state must be 'ground' or 'excited', got {qubit_state!r}"
        )
    grid = np.asarray(f_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("frequency grid must be a non-empty 1-D array")
    result = dispersive_shift(spec)
    if result.validity < min_validity:
        warnings.warn(
            f"dispersive validity Delta/g_1 = {result.validity:.3g} is below "
            f"{min_validity}; chi = g^2/Delta is unreliable here",
            DispersiveValidityWarning,
            stacklevel=2,
        )
    sign = 1.0 if qubit_state == "ground" else -1.0
    f_peak = spec.resonator.f_r_ghz + sign * result.chi_ghz
    half_kappa = 0.5 * spec.resonator.kappa_mhz * 1e-3
    s21 = half_kappa**2 / ((grid - f_peak) ** 2 + half_kappa**2)
    table = np.empty((grid.size, 2))
    table[:, 0] = grid
    table[:, 1] = s21
    return table


def readout_peak_ghz(spec, qubit_state):
    """Center frequency of the readout line for the given qubit state."""
    if qubit_state not in ("ground", "excited"):
        raise ValueError(
            f"qubit_state must be 'ground' or 'excited', got {qubit_state!r}"
        )
    result = dispersive_shift(spec)
    sign = 1.0 if qubit_state == "ground" else -1.0
    return spec.resonator.f_r_ghz + sign * result.chi_ghz
