"""Circuit model of the 1-bit guided-wave unit cell with a PIN-diode load."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

# MACOM MADP-000907-14020 equivalent circuit
DIODE_R = 5.2
DIODE_L = 30e-12
DIODE_C = 30e-15


def load_impedance(state: str, frequency: float, R: float = DIODE_R, L: float = DIODE_L,
                   C: float = DIODE_C) -> complex:
    """Diode impedance: series RL when ON, series LC when OFF."""
    if frequency <= 0:
        raise ValueError("frequency must be positive")
    omega = 2 * np.pi * frequency
    state = state.upper()
    if state == "ON":
        return complex(R, omega * L)
    if state == "OFF":
        if C <= 0:
            raise ValueError("OFF-state capacitance must be positive")
        return 1 / (1j * omega * C) + 1j * omega * L
    raise ValueError(f"unknown diode state {state!r}")


def reflection_from_load(z_load: complex, z_t: complex) -> complex:
    if np.isinf(abs(z_load)):
        return 1.0 + 0j
    den = z_load + z_t
    if den == 0:
        raise ZeroDivisionError("Z_L + Z_t = 0")
    return complex((z_load - z_t) / den)


def transformed_impedance(z0: float, z_rad: complex) -> complex:
    return z0 * z0 / z_rad


def phase_difference(gamma_on: complex, gamma_off: complex) -> float:
    """arg(G_ON) - arg(G_OFF) wrapped to [0, 2pi)."""
    return float(np.mod(np.angle(gamma_on) - np.angle(gamma_off), 2 * np.pi))


@dataclass(frozen=True)
class ImpedanceSolution:
    z_t: float
    delta_xi: float
    gamma_on: complex
    gamma_off: complex
    converged: bool


class ImpedanceSearchError(RuntimeError):
    def __init__(self, best: ImpedanceSolution):
        super().__init__(
            f"no Z_t reaches 180 deg: best Z_t={best.z_t:.4g} ohm gives "
            f"{np.degrees(best.delta_xi):.3f} deg")
        self.best = best


def solve_transformed_impedance(z_on: complex, z_off: complex, target: float = np.pi,
                                bounds: tuple[float, float] = (1.0, 1000.0),
                                tol: float = 1e-3, samples: int = 2000) -> ImpedanceSolution:
    """Real Z_t giving the target ON/OFF reflection phase difference.

    A log-spaced coarse scan brackets the best point, then a bounded
    scalar minimization refines |delta_xi - target|.
    """
    if z_on == z_off:
        raise ValueError("ON and OFF impedances are identical")

    def err(zt: float) -> float:
        d = phase_difference(reflection_from_load(z_on, zt), reflection_from_load(z_off, zt))
        return abs(np.angle(np.exp(1j * (d - target))))

    grid = np.geomspace(bounds[0], bounds[1], samples)
    errs = np.array([err(z) for z in grid])
    i = int(np.argmin(errs))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, samples - 1)]
    res = minimize_scalar(err, bounds=(lo, hi), method="bounded", options={"xatol": 1e-9})
    zt = float(res.x) if res.fun <= errs[i] else float(grid[i])
    g_on = reflection_from_load(z_on, zt)
    g_off = reflection_from_load(z_off, zt)
    sol = ImpedanceSolution(zt, phase_difference(g_on, g_off), g_on, g_off, err(zt) <= tol)
    if not sol.converged:
        raise ImpedanceSearchError(sol)
    return sol


def circuit_state_values(frequency: float, z_t: float, R: float = DIODE_R, L: float = DIODE_L,
                         C: float = DIODE_C) -> tuple[complex, complex]:
    """(state 1, state 2) coefficients for a 1-bit cell, rotated so OFF has zero phase."""
    g_off = reflection_from_load(load_impedance("OFF", frequency, R, L, C), z_t)
    g_on = reflection_from_load(load_impedance("ON", frequency, R, L, C), z_t)
    rot = np.exp(-1j * np.angle(g_off))
    return complex(g_off * rot), complex(g_on * rot)
