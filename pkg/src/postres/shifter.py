"""Reflective-type phase shifter: quadrature hybrid plus two identical reflectors.

Hybrid port numbering: 1 input, 2 through, 3 coupled, 4 output (isolated).
Through and coupled arms carry ``t`` and ``k``; the device transmission is

    S21 = t k (Gamma_t + Gamma_c),    S11 = t^2 Gamma_t + k^2 Gamma_c

which for the ideal hybrid (t = -j/sqrt2, k = 1/sqrt2) and equal loads gives
S21 = -j Gamma and S11 = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from postres._parallel import map_chunks
from postres.rfcore import FrequencyGrid, ReflectorSpec, reflection_coefficient, state_reflections

IIP3_TO_P1DB_DB = 9.6


class OffGridError(ValueError):
    """Metric requested at a frequency that is not a grid point."""


@dataclass(frozen=True)
class HybridCoupler:
    amplitude_imbalance: float = 0.0  # dB, |t| / |k|
    phase_imbalance: float = 0.0  # degrees away from quadrature
    insertion_loss_excess: float = 0.0  # dB, common to both arms

    def __post_init__(self):
        if self.insertion_loss_excess < 0:
            raise ValueError("insertion_loss_excess must be >= 0 dB")

    @property
    def ideal(self) -> bool:
        return self.amplitude_imbalance == 0 and self.phase_imbalance == 0 and self.insertion_loss_excess == 0

    def arms(self) -> tuple[complex, complex]:
        """Through and coupled transmission (t, k)."""
        g = 10 ** (-self.insertion_loss_excess / 20)
        r = 10 ** (self.amplitude_imbalance / 20)
        mag_t = r / math.sqrt(1 + r * r)
        mag_k = 1 / math.sqrt(1 + r * r)
        half = math.radians(self.phase_imbalance) / 2
        t = -1j * mag_t * g * complex(math.cos(half), -math.sin(half))
        k = mag_k * g * complex(math.cos(half), math.sin(half))
        return t, k


def rtps_two_port(gamma_t, gamma_c, coupler: HybridCoupler = HybridCoupler()):
    """(S11, S21) of the assembled two-port for given through/coupled loads."""
    t, k = coupler.arms()
    return t * t * gamma_t + k * k * gamma_c, t * k * (gamma_t + gamma_c)


def rtps_response(gamma, coupler: HybridCoupler = HybridCoupler()):
    """S21 with identical loads on both arms."""
    if coupler.ideal:
        return -1j * np.asarray(gamma) if np.ndim(gamma) else -1j * complex(gamma)
    return rtps_two_port(gamma, gamma, coupler)[1]


def return_loss(spec_t: ReflectorSpec, spec_c: ReflectorSpec, coupler: HybridCoupler, f) -> float:
    """-20 log10 |S11| in dB; infinite when the reflections cancel exactly."""
    s11, _ = rtps_two_port(reflection_coefficient(spec_t, f), reflection_coefficient(spec_c, f), coupler)
    mag = np.abs(s11)
    with np.errstate(divide="ignore"):
        rl = -20 * np.log10(mag)
    return float(rl) if np.ndim(rl) == 0 else rl


def p1db_from_iip3(iip3_dbm: float) -> float:
    """Input 1-dB compression point estimated from IIP3."""
    return iip3_dbm - IIP3_TO_P1DB_DB


class PhaseState(NamedTuple):
    code: int
    s21: np.ndarray
    il_db: np.ndarray
    phase_deg: np.ndarray


@dataclass(frozen=True)
class StateTable:
    """Complex S21 for every device state (rows, ordered by code) over a grid (columns)."""

    codes: np.ndarray
    f: np.ndarray
    s21: np.ndarray
    spec: ReflectorSpec | None = None
    coupler: HybridCoupler | None = None

    def __post_init__(self):
        codes = np.asarray(self.codes, dtype=int)
        f = np.asarray(self.f, dtype=float)
        s21 = np.asarray(self.s21, dtype=complex)
        if s21.shape != (codes.size, f.size):
            raise ValueError(f"s21 must have shape {(codes.size, f.size)}, got {s21.shape}")
        order = np.argsort(codes, kind="stable")
        object.__setattr__(self, "codes", codes[order])
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "s21", s21[order])

    def __len__(self) -> int:
        return self.codes.size

    @property
    def il_db(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return -20 * np.log10(np.abs(self.s21))

    @property
    def phase_deg(self) -> np.ndarray:
        """Phase of S21 unwrapped along frequency, per state."""
        return np.degrees(np.unwrap(np.angle(self.s21), axis=1))

    def state(self, code: int) -> PhaseState:
        (row,) = np.flatnonzero(self.codes == code)
        return PhaseState(int(code), self.s21[row], self.il_db[row], self.phase_deg[row])

    def column(self, f: float) -> int:
        hits = np.flatnonzero(np.isclose(self.f, f, rtol=1e-12, atol=0.0))
        if hits.size == 0:
            raise OffGridError(f"{f:.9g} Hz is not on the table grid; interpolation is not performed")
        return int(hits[0])


def enumerate_states(
    spec: ReflectorSpec,
    coupler: HybridCoupler,
    grid: FrequencyGrid,
    workers: int | None = None,
) -> StateTable:
    """Evaluate every digital state of the reflector pair over ``grid``."""
    f = grid.values

    def chunk(sl):
        return rtps_response(state_reflections(spec, f[sl]), coupler)

    s21 = map_chunks(chunk, f.size, workers, axis=1)
    return StateTable(np.arange(spec.state_count), f, s21, spec, coupler)


def _wrap_deg(x):
    """Wrap to (-180, 180]."""
    return -(np.mod(-np.asarray(x, dtype=float) + 180.0, 360.0) - 180.0)


def aligned_phases(table: StateTable, f: float) -> np.ndarray:
    """State phases at ``f`` (degrees) relative to the lowest code, wrapped to (-180, 180]."""
    col = table.column(f)
    raw = np.degrees(np.angle(table.s21[:, col]))
    return _wrap_deg(raw - raw[0])


def tuning_range(table: StateTable, f: float) -> float:
    ph = aligned_phases(table, f)
    return float(ph.max() - ph.min())


def _gaps(table: StateTable, f: float) -> np.ndarray:
    if len(table) < 2:
        raise ValueError("resolution needs at least two states")
    return np.diff(np.sort(aligned_phases(table, f)))


def resolution(table: StateTable, f: float) -> float:
    """Worst-case step between neighbouring state phases at ``f``."""
    return float(_gaps(table, f).max())


def median_step(table: StateTable, f: float) -> float:
    return float(np.median(_gaps(table, f)))


class BandMetrics(NamedTuple):
    avg_il_db: float
    min_range_deg: float
    max_resolution_deg: float


def band_metrics(table: StateTable, band: tuple[float, float]) -> BandMetrics:
    lo, hi = band
    cols = np.flatnonzero((table.f >= lo) & (table.f <= hi))
    if cols.size == 0:
        raise ValueError(f"no grid points inside band [{lo:.6g}, {hi:.6g}] Hz")
    avg = float(np.mean(table.il_db[:, cols]))
    ranges = [tuning_range(table, table.f[c]) for c in cols]
    res = [resolution(table, table.f[c]) for c in cols] if len(table) > 1 else [0.0]
    return BandMetrics(avg, float(min(ranges)), float(max(res)))


def cascade_s21(*s21):
    """Transmission of identical-impedance stages in series (matched interfaces)."""
    out = 1.0 + 0j
    for s in s21:
        out = out * np.asarray(s)
    return out
