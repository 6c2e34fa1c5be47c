"""Classical phase dynamics: Josephson junction and its pendulum twin.

The undriven junction phase obeys d^2(phi)/dt^2 = -omega^2 sin(phi) with
omega^2 = 8 E_C E_J (both energies as angular frequencies, rad/ns, so
omega^2 carries rad^2/ns^2). A rigid pendulum with g/R = omega^2 satisfies
the same equation, which is the textbook mechanical analogy this module
verifies by co-integration. The integrator is velocity Verlet (leapfrog):
second order, symplectic, so the sampled Hamiltonian oscillates reversibly
around its initial value instead of drifting.

Junction trajectories use nanoseconds; pendulum trajectories use seconds.
The integrator itself is unit-agnostic: the caller's rhs and dt fix the
time base.
"""

import math
from dataclasses import dataclass

import numpy as np

from .units import ghz_to_rad_ns


class IntegrationError(RuntimeError):
    """Trajectory left the finite domain (NaN or overflow) at some step."""


@dataclass(frozen=True)
class PendulumParams:
    """Rigid pendulum: mass (kg), rod length (m), gravity (m/s^2), and the
    initial angle (rad) / angular momentum (kg m^2/s) that seed a trajectory.
    """

    mass_kg: float
    length_m: float
    gravity: float
    phi0: float
    angular_momentum: float = 0.0

    def __post_init__(self):
        if not self.mass_kg > 0.0:
            raise ValueError(f"mass must be > 0 kg, got {self.mass_kg}")
        if not self.length_m > 0.0:
            raise ValueError(f"rod length must be > 0 m, got {self.length_m}")
        if not self.gravity >= 0.0:
            raise ValueError(f"gravity must be >= 0, got {self.gravity}")
        for name in ("phi0", "angular_momentum"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


@dataclass(frozen=True)
class JunctionPhaseState:
    """Instantaneous phase (rad) and phase velocity.

    The velocity unit follows the system: rad/ns for the junction, rad/s for
    the pendulum, which reuses this type since both systems share the
    (angle, angular velocity) structure.
    """

    phi: float
    dphi_dt: float

    def __post_init__(self):
        if not (math.isfinite(self.phi) and math.isfinite(self.dphi_dt)):
            raise ValueError("phase state must be finite")


@dataclass(frozen=True)
class PhaseTrajectory:
    """Sampled trajectory: times, angles (rad), velocities, energy samples.

    times[0] = 0 and the grid is uniform; energies hold the conserved
    Hamiltonian reported by the energy callback passed to integrate().
    """

    times: np.ndarray
    angles: np.ndarray
    velocities: np.ndarray
    energies: np.ndarray


def junction_angular_frequency_sq(q):
    """omega^2 = 8 E_C E_J in rad^2/ns^2 for the linearized junction."""
    return 8.0 * ghz_to_rad_ns(q.ec_ghz) * ghz_to_rad_ns(q.ej_ghz)


def junction_eom_rhs(state, q):
    """(dphi/dt, d^2phi/dt^2) for the junction phase, rad/ns units."""
    return (
        state.dphi_dt,
        -junction_angular_frequency_sq(q) * math.sin(state.phi),
    )


def junction_energy(state, q):
    """Junction Hamiltonian 4 E_C n^2 - E_J cos(phi) in rad/ns.

    The charge coordinate is n = (dphi/dt) / (8 E_C), giving the kinetic
    term (dphi/dt)^2 / (16 E_C).
    """
    ec = ghz_to_rad_ns(q.ec_ghz)
    ej = ghz_to_rad_ns(q.ej_ghz)
    return state.dphi_dt**2 / (16.0 * ec) - ej * math.cos(state.phi)


def pendulum_eom_rhs(state, p):
    """(dphi/dt, -(g/R) sin(phi)) for the rigid pendulum, SI units."""
    return (
        state.dphi_dt,
        -(p.gravity / p.length_m) * math.sin(state.phi),
    )


def pendulum_energy(state, p):
    """Pendulum Hamiltonian L^2/(2 m R^2) - m g R cos(phi) in joules."""
    inertia = p.mass_kg * p.length_m**2
    return 0.5 * inertia * state.dphi_dt**2 - (
        p.mass_kg * p.gravity * p.length_m * math.cos(state.phi)
    )


def pendulum_initial_state(p):
    """Initial (phi, dphi/dt) from the pendulum's angle and momentum."""
    return JunctionPhaseState(
        phi=p.phi0,
        dphi_dt=p.angular_momentum / (p.mass_kg * p.length_m**2),
    )


def matched_pendulum(q, phi0, length_m=1.0, mass_kg=1.0, angular_momentum=0.0):
    """Pendulum whose g/R equals the junction's 8 E_C E_J.

    With length_m = 1 the gravity assignment g = omega^2 * R reproduces the
    junction acceleration bit for bit, so co-integrated trajectories agree
    to roundoff when the pendulum second is mapped onto the junction
    nanosecond.
    """
    return PendulumParams(
        mass_kg=mass_kg,
        length_m=length_m,
        gravity=junction_angular_frequency_sq(q) * length_m,
        phi0=phi0,
        angular_momentum=angular_momentum,
    )


def integrate(rhs, initial, t_end, dt, energy):
    """Velocity-Verlet integration of phi'' = a(phi).

    Parameters
    ----------
    rhs : callable
        Maps a JunctionPhaseState to (dphi/dt, acceleration). The
        acceleration must depend on the angle only; that separability is
        what makes the leapfrog update symplectic.
    initial : JunctionPhaseState
        State at t = 0.
    t_end, dt : float
        Horizon and fixed step, same time unit as rhs. The step count is
        round(t_end / dt), at least 1; sample i sits at t = i * dt.
    energy : callable
        Maps a JunctionPhaseState to the conserved Hamiltonian; sampled at
        every step into the trajectory.

    Raises
    ------
    IntegrationError
        If the angle, velocity, or acceleration stops being finite; the
        message names the offending step.
    """
    if not (dt > 0.0 and math.isfinite(dt)):
        raise ValueError(f"dt must be a positive finite step, got {dt}")
    if not (t_end > 0.0 and math.isfinite(t_end)):
        raise ValueError(f"t_end must be positive and finite, got {t_end}")
    steps = max(1, int(round(t_end / dt)))
    phi = float(initial.phi)
    v = float(initial.dphi_dt)
    angles = np.empty(steps + 1)
    velocities = np.empty(steps + 1)
    energies = np.empty(steps + 1)
    angles[0] = phi
    velocities[0] = v
    energies[0] = energy(initial)
    _, accel = rhs(initial)
    if not math.isfinite(accel):
        raise IntegrationError(f"non-finite acceleration at step 0 (phi={phi!r})")
    half_dt_sq = 0.5 * dt * dt
    for step in range(1, steps + 1):
        phi = phi + dt * v + half_dt_sq * accel
        if not math.isfinite(phi):
            raise IntegrationError(f"non-finite angle at step {step}")
        state = JunctionPhaseState(phi, v)
        _, accel_new = rhs(state)
        if not math.isfinite(accel_new):
            raise IntegrationError(
                f"non-finite acceleration at step {step} (phi={phi!r})"
            )
        v = v + 0.5 * dt * (accel + accel_new)
        if not math.isfinite(v):
            raise IntegrationError(f"non-finite velocity at step {step}")
        accel = accel_new
        state = JunctionPhaseState(phi, v)
        angles[step] = phi
        velocities[step] = v
        energies[step] = energy(state)
    times = dt * np.arange(steps + 1)
    return PhaseTrajectory(
        times=times, angles=angles, velocities=velocities, energies=energies
    )


def zero_crossing_times(trajectory):
    """Times where the angle crosses zero, by linear interpolation."""
    phi = trajectory.angles
    t = trajectory.times
    crossings = []
    for i in np.flatnonzero(np.signbit(phi[:-1]) != np.signbit(phi[1:])):
        span = phi[i + 1] - phi[i]
        if span == 0.0:
            continue
        crossings.append(t[i] - phi[i] * (t[i + 1] - t[i]) / span)
    return np.asarray(crossings)


def fitted_angular_frequency(trajectory):
    """Oscillation frequency (rad per time unit) from zero crossings.

    Successive crossings are half a period apart; averaging over all of
    them suppresses the single-crossing interpolation error.
    """
    crossings = zero_crossing_times(trajectory)
    if len(crossings) < 3:
        raise ValueError(
            f"need at least 3 zero crossings to fit a frequency, found "
            f"{len(crossings)}"
        )
    half_period = (crossings[-1] - crossings[0]) / (len(crossings) - 1)
    return math.pi / half_period


def fitted_period(trajectory):
    """Oscillation period from the zero-crossing frequency fit."""
    return 2.0 * math.pi / fitted_angular_frequency(trajectory)
