"""Cooper-pair-box / transmon physics in the truncated charge basis.

The qubit Hamiltonian is H = 4*E_C*(n - n_g)^2 - E_J*cos(phi), which in the
charge basis |N>, N = -n_cut..+n_cut, is tridiagonal: diagonal entries
4*E_C*(N - n_g)^2 and first off-diagonals -E_J/2 (single-Cooper-pair
tunneling). Energies enter and leave this module as E/h in GHz; matrices are
assembled in rad/ns for the hbar = 1 propagation convention.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .numerics import eigh_tridiagonal, tridiagonal_eigenvalues
from .units import E_CHARGE, HBAR, PLANCK_H, cos_pi, ghz_to_rad_ns, rad_ns_to_ghz

#: hard ceiling on the charge-basis truncation before giving up
N_CUT_LIMIT = 512

#: per-level relative tolerance for truncation convergence
CONVERGENCE_RTOL = 1e-9


class SpectrumConvergenceError(RuntimeError):
    """Charge-basis truncation did not converge below the n_cut ceiling."""


class TruncationWarning(UserWarning):
    """Requested n_cut is below the safe heuristic for this E_J/E_C."""


@dataclass(frozen=True)
class JunctionPhysical:
    """Fabrication-level junction parameters.

    ic_na is the junction critical current (nA); cj_ff, cb_ff, cg_ff are the
    junction, shunt and gate capacitances (fF).
    """

    ic_na: float
    cj_ff: float
    cb_ff: float
    cg_ff: float

    def __post_init__(self):
        if not self.ic_na > 0.0:
            raise ValueError(f"critical current must be > 0 nA, got {self.ic_na}")
        for name in ("cj_ff", "cb_ff", "cg_ff"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0 fF")
        if not self.cj_ff + self.cb_ff > 0.0:
            raise ValueError("C_J + C_shunt must be > 0 fF")


@dataclass(frozen=True)
class QubitParams:
    """Charge-qubit energy scales: E_J, E_C as E/h in GHz, offset charge n_g."""

    ej_ghz: float
    ec_ghz: float
    ng: float = 0.0

    def __post_init__(self):
        if not self.ej_ghz >= 0.0:
            raise ValueError(f"E_J must be >= 0 GHz, got {self.ej_ghz}")
        if not self.ec_ghz > 0.0:
            raise ValueError(f"E_C must be > 0 GHz, got {self.ec_ghz}")
        if not math.isfinite(self.ng):
            raise ValueError("n_g must be finite")

    def at_ng(self, ng):
        """Same energy scales at a different offset charge."""
        return QubitParams(self.ej_ghz, self.ec_ghz, ng)


@dataclass(frozen=True)
class SquidBias:
    """Two-junction SQUID bias: per-junction E_J (GHz) and flux Phi/Phi0."""

    ej_single_ghz: float
    flux_ratio: float

    def __post_init__(self):
        if not self.ej_single_ghz >= 0.0:
            raise ValueError("per-junction E_J must be >= 0 GHz")
        if not math.isfinite(self.flux_ratio):
            raise ValueError("flux ratio must be finite")


@dataclass(frozen=True)
class ChargeBasisHamiltonian:
    """Truncated charge-basis matrix (rad/ns) spanning N = -n_cut..+n_cut."""

    n_cut: int
    matrix: np.ndarray

    @property
    def dim(self):
        return 2 * self.n_cut + 1

    @property
    def charge_numbers(self):
        return np.arange(-self.n_cut, self.n_cut + 1)


@dataclass(frozen=True)
class Spectrum:
    """Converged qubit levels E_m/h (GHz, ascending) with charge-basis vectors."""

    levels_ghz: np.ndarray
    eigvectors: np.ndarray
    n_cut: int

    @property
    def charge_numbers(self):
        return np.arange(-self.n_cut, self.n_cut + 1)


def params_from_physical(junction, ng=0.0):
    """QubitParams from critical current and capacitances (CODATA constants).

    E_C = e^2 / (2 C_total) with C_total = C_J + C_B + C_g; the gate
    capacitance loads the island along with the shunt, so it joins the total
    (the standard lumping). E_J = hbar*I_c / (2e). Both returned as E/h in
    GHz.
    """
    c_total = (junction.cj_ff + junction.cb_ff + junction.cg_ff) * 1e-15
    if c_total <= 0.0:
        raise ValueError("total capacitance must be > 0")
    ec_joules = E_CHARGE**2 / (2.0 * c_total)
    ej_joules = HBAR * (junction.ic_na * 1e-9) / (2.0 * E_CHARGE)
    to_ghz = 1.0 / (PLANCK_H * 1e9)
    return QubitParams(ej_ghz=ej_joules * to_ghz, ec_ghz=ec_joules * to_ghz, ng=ng)


def squid_effective_ej(bias):
    """Flux-tuned effective Josephson energy |2 E_J cos(pi Phi/Phi0)| in GHz.

    The magnitude convention: a negative cosine is a phase shift
    phi -> phi + pi, which leaves the charge-basis spectrum unchanged, so
    the effective E_J is reported non-negative.
    """
    return abs(2.0 * bias.ej_single_ghz * cos_pi(bias.flux_ratio))


def auto_n_cut(q):
    """Safe starting truncation: max(10, ceil(2*sqrt(E_J/E_C)) + 5).

    Transmon eigenstates spread over ~(E_J/E_C)^(1/4) charge states; this
    overshoots that comfortably and is then verified by doubling.
    """
    return max(10, math.ceil(2.0 * math.sqrt(q.ej_ghz / q.ec_ghz)) + 5)


def _tridiagonal_parts(q, n_cut):
    """Diagonal and sub-diagonal of the charge-basis matrix, rad/ns."""
    ec = ghz_to_rad_ns(q.ec_ghz)
    ej = ghz_to_rad_ns(q.ej_ghz)
    charge = np.arange(-n_cut, n_cut + 1, dtype=float)
    diag = 4.0 * ec * (charge - q.ng) ** 2
    off = np.full(2 * n_cut, -ej / 2.0)
    return diag, off


def build_charge_hamiltonian(q, n_cut):
    """Dense charge-basis Hamiltonian at a fixed truncation.

    Entries are rad/ns. Emits a TruncationWarning when n_cut is below the
    auto_n_cut heuristic for these parameters.
    """
    if n_cut < 1:
        raise ValueError(f"n_cut must be >= 1, got {n_cut}")
    safe = auto_n_cut(q)
    if n_cut < safe:
        warnings.warn(
            f"n_cut = {n_cut} is below the recommended {safe} for "
            f"E_J/E_C = {q.ej_ghz / q.ec_ghz:.3g}; levels may be truncated",
            TruncationWarning,
            stacklevel=2,
        )
    diag, off = _tridiagonal_parts(q, n_cut)
    matrix = (
        np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    ).astype(np.complex128)
    return ChargeBasisHamiltonian(n_cut=n_cut, matrix=matrix)


def _level_shift_converged(previous, current):
    scale = np.abs(current).max()
    tol = CONVERGENCE_RTOL * np.maximum(np.abs(current), scale)
    return bool(np.all(np.abs(current - previous) <= tol))


def _converged_levels(q, levels):
    """(lowest levels in rad/ns, n_cut) converged to CONVERGENCE_RTOL.

    Doubles n_cut from the heuristic until the requested levels stop moving;
    the returned values are from the final (doubled) truncation, so their own
    truncation error sits far below the stopping increment. Values-only
    solves: no eigenvector accumulation.
    """
    n_cut = max(auto_n_cut(q), levels)
    if n_cut > N_CUT_LIMIT:
        raise SpectrumConvergenceError(
            f"starting truncation {n_cut} already exceeds the ceiling "
            f"{N_CUT_LIMIT} (E_J/E_C = {q.ej_ghz / q.ec_ghz:.4g})"
        )
    previous = None
    shift = None
    while n_cut <= N_CUT_LIMIT:
        diag, off = _tridiagonal_parts(q, n_cut)
        current = tridiagonal_eigenvalues(diag, off)[:levels]
        if previous is not None:
            if _level_shift_converged(previous, current):
                return current, n_cut
            shift = float(np.abs(current - previous).max())
        previous = current
        n_cut *= 2
    raise SpectrumConvergenceError(
        f"lowest {levels} levels not converged to {CONVERGENCE_RTOL:g} by "
        f"n_cut = {N_CUT_LIMIT} (E_J/E_C = {q.ej_ghz / q.ec_ghz:.4g}, "
        f"n_g = {q.ng}, last max level shift = {shift})"
    )


def _converged_eigensolution(q, levels):
    """(EigenDecomposition in rad/ns, n_cut) at the converged truncation."""
    _, n_cut = _converged_levels(q, levels)
    diag, off = _tridiagonal_parts(q, n_cut)
    return eigh_tridiagonal(diag, off, k=levels), n_cut


def spectrum(q, levels=3):
    """Lowest levels of the charge qubit, E/h in GHz, truncation-converged.

    Auto-selects n_cut, then doubles it until the requested levels move by
    less than 1e-9 relative (floored at the spectrum scale for levels
    crossing zero). Fails with diagnostics if n_cut = 512 is insufficient.
    """
    if levels < 1:
        raise ValueError("levels must be >= 1")
    dec, n_cut = _converged_eigensolution(q, levels)
    return Spectrum(
        levels_ghz=rad_ns_to_ghz(dec.values),
        eigvectors=dec.vectors,
        n_cut=n_cut,
    )


def transition_energy(q, m, n):
    """E_n - E_m in GHz for levels m < n."""
    if not 0 <= m < n:
        raise ValueError(f"transition requires 0 <= m < n, got ({m},{n})")
    s = spectrum(q, levels=n + 1)
    return float(s.levels_ghz[n] - s.levels_ghz[m])


def anharmonicity(q):
    """alpha = (E2 - E1) - (E1 - E0) in GHz at the given n_g."""
    s = spectrum(q, levels=3)
    e0, e1, e2 = s.levels_ghz
    return float((e2 - e1) - (e1 - e0))


def _fixed_cut_levels(q, levels, n_cut):
    diag, off = _tridiagonal_parts(q, n_cut)
    return rad_ns_to_ghz(tridiagonal_eigenvalues(diag, off)[:levels])


def _sweep_n_cut(q, levels, probes):
    """One converged n_cut reused across an n_g sweep.

    Truncation convergence is governed by E_J/E_C, not by sub-integer moves
    of n_g, so probing the extremal offsets and taking the max keeps a long
    sweep out of the per-point doubling loop.
    """
    best = 0
    for ng in probes:
        _, n_cut = _converged_levels(q.at_ng(ng), levels)
        best = max(best, n_cut)
    return best


def charge_dispersion(q, m=1):
    """Peak-to-peak variation of level m over one n_g period, in GHz.

    Samples E_m(n_g) on a 101-point grid over [0, 1]; the extremes of every
    level sit at n_g = 0 and n_g = 1/2 (reflection plus periodicity), which
    the grid hits exactly, and both are probed for truncation convergence.
    The offset charge carried by q is ignored.
    """
    if m < 0:
        raise ValueError("level index must be >= 0")
    levels = m + 1
    n_cut = _sweep_n_cut(q, levels, probes=(0.0, 0.5))
    grid = np.linspace(0.0, 1.0, 101)
    values = np.array(
        [_fixed_cut_levels(q.at_ng(ng), levels, n_cut)[m] for ng in grid]
    )
    return float(values.max() - values.min())


def sweep_offset_charge(q, n_g_grid, levels=3, normalize=False):
    """Level table over an offset-charge grid.

    Returns an array of shape (len(grid), 1 + levels): column 0 is n_g,
    columns 1.. are E_0..E_{levels-1} in GHz. With normalize set, energies
    follow the figure convention (E_m(n_g) - E_0(1/2)) / E_01(1/2), so the
    ground curve is zero at the sweet spot and the unit is the sweet-spot
    transition energy. The offset charge carried by q is ignored.
    """
    grid = np.asarray(n_g_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("n_g grid must be a non-empty 1-D array")
    n_cut = _sweep_n_cut(q, levels, probes=(float(grid[0]), 0.5))
    table = np.empty((grid.size, 1 + levels))
    table[:, 0] = grid
    for i, ng in enumerate(grid):
        table[i, 1:] = _fixed_cut_levels(q.at_ng(ng), levels, n_cut)
    if normalize:
        half = _fixed_cut_levels(q.at_ng(0.5), max(levels, 2), n_cut)
        e01_half = half[1] - half[0]
        if e01_half == 0.0:
            raise ValueError(
                "cannot normalize: E_01(n_g = 1/2) vanishes (degenerate "
                "sweet spot, E_J = 0)"
            )
        table[:, 1:] = (table[:, 1:] - half[0]) / e01_half
    return table


def charge_operator_eigenbasis(q, dim):
    """<m| n |n'> for the lowest dim eigenstates, with signs.

    The charge-basis eigenvectors are real under this module's phase
    convention, so the block is a real symmetric dim x dim matrix. Unlike
    charge_matrix_elements this keeps signs and diagonal entries; the full
    capacitive interaction needs both.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    dec, n_cut = _converged_eigensolution(q, dim)
    charge = np.arange(-n_cut, n_cut + 1, dtype=float)
    block = dec.vectors.conj().T @ (charge[:, np.newaxis] * dec.vectors)
    block = block.real
    # matmul roundoff breaks the symmetry at ~1e-16; restore it exactly so
    # operators assembled from the block are Hermitian to the last bit
    return np.ascontiguousarray(0.5 * (block + block.T))


def charge_matrix_elements(q, j_max):
    """|<j-1| n |j>| for j = 1..j_max, charge operator in the eigenbasis.

    n is diagonal (the Cooper-pair number N) in the charge basis; the
    eigenbasis elements are reported as non-negative magnitudes, the only
    gauge-invariant content under the eigensolver's phase convention.
    """
    if j_max < 1:
        raise ValueError("j_max must be >= 1")
    dec, n_cut = _converged_eigensolution(q, j_max + 1)
    charge = np.arange(-n_cut, n_cut + 1, dtype=float)
    vecs = dec.vectors
    elems = np.empty(j_max)
    for j in range(1, j_max + 1):
        elems[j - 1] = abs(
            np.vdot(vecs[:, j - 1], charge * vecs[:, j])
        )
    return elems
