"""Per-symbol RIS reflection-coefficient schedules for passive and active panels.

Coefficients are sqrt(a) * e^{j theta} with theta i.i.d. uniform on [0, 2 pi),
drawn from numpy's PCG64 generator so a 64-bit seed fully determines the schedule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PRIS = "pris"
ARIS = "aris"


class ScheduleError(ValueError):
    """Raised on mode/gain mismatches or amplitude-constraint violations."""


@dataclass(frozen=True)
class PhaseSchedule:
    """Reflection coefficients omega[k, m] for each panel, one (K, M_t) array per panel."""

    mode: str
    gain: float  # power gain a = |omega|^2; 1 for passive panels
    coefficients: tuple  # tuple of (K, M_t) complex arrays, one per panel
    seed: int

    @property
    def n_symbols(self) -> int:
        return self.coefficients[0].shape[0]

    @property
    def n_panels(self) -> int:
        return len(self.coefficients)


def draw_schedule(n_symbols: int, scene, mode: str, gain: float = 1.0, seed: int = 0) -> PhaseSchedule:
    """Draw a random phase schedule for every panel of `scene`.

    Passive mode requires gain == 1; active mode allows gain >= 1.
    """
    if n_symbols < 1:
        raise ScheduleError(f"n_symbols must be >= 1, got {n_symbols}")
    if mode not in (PRIS, ARIS):
        raise ScheduleError(f"unknown mode {mode!r}")
    if mode == PRIS and gain != 1.0:
        raise ScheduleError(f"passive mode requires gain 1, got {gain}")
    if gain < 1.0:
        raise ScheduleError(f"gain must be >= 1, got {gain}")
    rng = np.random.default_rng(seed)
    amp = np.sqrt(gain)
    coeffs = []
    for panel in scene.ris:
        theta = rng.uniform(0.0, 2.0 * np.pi, size=(n_symbols, panel.n_elements))
        coeffs.append(amp * np.exp(1j * theta))
    return PhaseSchedule(mode=mode, gain=float(gain), coefficients=tuple(coeffs), seed=int(seed))


def validate_schedule(schedule: PhaseSchedule, alpha_max: float, rtol: float = 1e-9) -> None:
    """Check every |omega|^2 against the mode's amplitude constraint.

    Passive: |omega|^2 == 1; active: 1 <= |omega|^2 <= alpha_max. Raises
    ScheduleError reporting the first offending (k, t, m) index.
    """
    for t, omega in enumerate(schedule.coefficients):
        power = np.abs(omega) ** 2
        if schedule.mode == PRIS:
            bad = np.abs(power - 1.0) > rtol
        else:
            bad = (power < 1.0 - rtol) | (power > alpha_max * (1.0 + rtol))
        if np.any(bad):
            k, m = np.unravel_index(int(np.argmax(bad)), power.shape)
            raise ScheduleError(
                f"amplitude constraint violated at (k={k}, t={t}, m={m}): "
                f"|omega|^2 = {power[k, m]:.6g}"
            )
