"""Impedance primitives, capacitor banks and the switched-capacitor reflector ladder.

The reflector is a ladder of lossy inductive segments with a digitally coded
capacitor bank at each junction, terminated to ground::

    port ─┬── L1 ──┬── L2 ──┬── L3 ──┐
          C1       C2       C3       ⏚
          ⏚        ⏚        ⏚

All functions accept a scalar frequency or a numpy array of frequencies and
are pure: they never mutate their inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

DEFAULT_BITS = 5
DEFAULT_C_OFF = 100e-15
DEFAULT_C_MAX = 450e-15
DEFAULT_Z0 = 50.0


class DomainError(ValueError):
    """Raised when an operation is evaluated outside its domain (e.g. f <= 0)."""


class InvalidCodeError(ValueError):
    """Raised for capacitor-bank or device-state codes out of range."""


@dataclass(frozen=True)
class FrequencyGrid:
    """Linearly spaced frequency grid in Hz, endpoints included."""

    start: float
    stop: float
    points: int

    def __post_init__(self):
        if not self.start > 0:
            raise DomainError(f"grid start must be > 0 Hz, got {self.start}")
        if not self.stop > self.start:
            raise DomainError(f"grid stop ({self.stop}) must exceed start ({self.start})")
        if int(self.points) != self.points or self.points < 2:
            raise DomainError(f"grid needs at least 2 points, got {self.points}")

    @property
    def values(self) -> np.ndarray:
        f = np.linspace(self.start, self.stop, int(self.points))
        f[-1] = self.stop
        return f

    @property
    def step(self) -> float:
        return (self.stop - self.start) / (self.points - 1)


@dataclass(frozen=True)
class LossyInductor:
    """Series inductor with a constant quality factor, r_L = wL/Q at every frequency."""

    inductance: float
    quality: float = math.inf

    def __post_init__(self):
        if self.inductance < 0:
            raise DomainError(f"inductance must be >= 0, got {self.inductance}")
        if not self.quality > 0:
            raise DomainError(f"quality factor must be > 0, got {self.quality}")

    @property
    def lossless(self) -> bool:
        return math.isinf(self.quality)


@dataclass(frozen=True)
class CapacitorBank:
    """Binary-weighted bank: capacitance(code) = c_off + code * c_lsb."""

    bits: int = DEFAULT_BITS
    c_off: float = DEFAULT_C_OFF
    c_lsb: float = (DEFAULT_C_MAX - DEFAULT_C_OFF) / (2**DEFAULT_BITS - 1)
    code: int = 0

    def __post_init__(self):
        if self.bits < 0:
            raise InvalidCodeError(f"bank bits must be >= 0, got {self.bits}")
        if not self.c_off > 0:
            raise DomainError(f"c_off must be > 0, got {self.c_off}")
        if not self.c_lsb > 0:
            raise DomainError(f"c_lsb must be > 0, got {self.c_lsb}")
        if not 0 <= self.code < self.levels:
            raise InvalidCodeError(f"code {self.code} outside [0, {self.levels - 1}]")

    @classmethod
    def spanning(cls, c_min: float, c_max: float, bits: int = DEFAULT_BITS, code: int = 0):
        """Bank whose code 0 gives ``c_min`` and top code gives ``c_max``."""
        if bits == 0:
            return cls(bits=0, c_off=c_min, c_lsb=c_max - c_min or c_min, code=code)
        return cls(bits=bits, c_off=c_min, c_lsb=(c_max - c_min) / (2**bits - 1), code=code)

    @property
    def levels(self) -> int:
        return 2**self.bits

    @property
    def capacitance(self) -> float:
        return self.c_off + self.code * self.c_lsb

    def all_capacitances(self) -> np.ndarray:
        return self.c_off + np.arange(self.levels) * self.c_lsb

    def with_code(self, code: int) -> CapacitorBank:
        return replace(self, code=int(code))


@dataclass(frozen=True)
class SwitchExtension:
    """Optional fourth segment l4 brought in or out by a pair of switches.

    ``off``: l4 forms a fourth pi-section with the switch parasitic capacitance
    at the l3/l4 junction. ``on``: l4 returns to ground through ``r_on``.
    The default switch values are placeholders, override them per design.
    """

    l4: LossyInductor
    switch_state: str = "off"
    r_on: float = 2.0
    c_off_switch: float = 40e-15

    def __post_init__(self):
        if self.switch_state not in ("off", "on"):
            raise ValueError(f"switch_state must be 'off' or 'on', got {self.switch_state!r}")
        if self.r_on < 0:
            raise DomainError("r_on must be >= 0")
        if not self.c_off_switch > 0:
            raise DomainError("c_off_switch must be > 0")


@dataclass(frozen=True)
class ReflectorSpec:
    """Three-segment reflector, optionally with the switched l4 extension.

    When ``tie_c2_c3`` is set the second and third banks always share a code,
    giving a 10-bit device state (11 with the extension switch).
    """

    segments: tuple[LossyInductor, LossyInductor, LossyInductor]
    banks: tuple[CapacitorBank, CapacitorBank, CapacitorBank]
    tie_c2_c3: bool = True
    extension: SwitchExtension | None = None
    z0: float = DEFAULT_Z0

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "banks", tuple(self.banks))
        if len(self.segments) != 3:
            raise ValueError(f"expected 3 segments, got {len(self.segments)}")
        if len(self.banks) != 3:
            raise ValueError(f"expected 3 capacitor banks, got {len(self.banks)}")
        if not self.z0 > 0:
            raise DomainError(f"z0 must be > 0, got {self.z0}")
        if self.tie_c2_c3:
            b2, b3 = self.banks[1], self.banks[2]
            if b2.code != b3.code:
                raise InvalidCodeError("tied banks C2/C3 must share a code")
            if b2.bits != b3.bits:
                raise ValueError("tied banks C2/C3 must have the same width")

    @property
    def capacitances(self) -> tuple[float, float, float]:
        return tuple(b.capacitance for b in self.banks)

    # -- digital state ----------------------------------------------------

    @property
    def _free_banks(self) -> tuple[int, ...]:
        return (0, 1) if self.tie_c2_c3 else (0, 1, 2)

    @property
    def state_bits(self) -> int:
        bits = sum(self.banks[i].bits for i in self._free_banks)
        return bits + (1 if self.extension is not None else 0)

    @property
    def state_count(self) -> int:
        return 2**self.state_bits

    @property
    def state(self) -> int:
        code = 1 if self.extension is not None and self.extension.switch_state == "on" else 0
        for i in self._free_banks:
            code = (code << self.banks[i].bits) | self.banks[i].code
        return code

    def decode_state(self, state: int) -> tuple[tuple[int, int, int], str | None]:
        """Split a device state into (bank codes, switch state).

        Layout, most significant first: [switch] C1 C2 [C3]; C3 mirrors C2 when tied.
        """
        if not 0 <= state < self.state_count:
            raise InvalidCodeError(f"state {state} outside [0, {self.state_count - 1}]")
        codes = [0, 0, 0]
        rest = int(state)
        for i in reversed(self._free_banks):
            width = self.banks[i].bits
            codes[i] = rest & ((1 << width) - 1)
            rest >>= width
        if self.tie_c2_c3:
            codes[2] = codes[1]
        switch = None
        if self.extension is not None:
            switch = "on" if rest else "off"
        return tuple(codes), switch

    def with_state(self, state: int) -> ReflectorSpec:
        codes, switch = self.decode_state(state)
        banks = tuple(b.with_code(c) for b, c in zip(self.banks, codes))
        ext = self.extension
        if ext is not None:
            ext = replace(ext, switch_state=switch)
        return replace(self, banks=banks, extension=ext)

    def state_capacitances(self) -> tuple[np.ndarray, np.ndarray]:
        """Capacitances of every state as a (n_states, 3) array, plus a switch-on mask."""
        n = self.state_count
        caps = np.empty((n, 3))
        on = np.zeros(n, dtype=bool)
        for s in range(n):
            codes, switch = self.decode_state(s)
            caps[s] = [b.c_off + c * b.c_lsb for b, c in zip(self.banks, codes)]
            on[s] = switch == "on"
        return caps, on


def default_reflector(
    inductance: float = 300e-12,
    quality: float = 5.0,
    c_min: float = DEFAULT_C_OFF,
    c_max: float = DEFAULT_C_MAX,
    bits: int = DEFAULT_BITS,
    extension: SwitchExtension | None = None,
) -> ReflectorSpec:
    """Three identical segments with tied C2/C3 banks."""
    ind = LossyInductor(inductance, quality)
    bank = CapacitorBank.spanning(c_min, c_max, bits)
    return ReflectorSpec((ind, ind, ind), (bank, bank, bank), True, extension)


# -- impedances ------------------------------------------------------------


def _omega(f):
    return 2.0 * np.pi * np.asarray(f, dtype=float)


def _series_z(ind: LossyInductor, w):
    x = w * ind.inductance
    if ind.lossless:
        return 1j * x
    return x / ind.quality + 1j * x


def series_impedance(ind: LossyInductor, f):
    """Impedance jwL + wL/Q of a lossy inductor; exactly jwL when Q is infinite."""
    f_arr = np.asarray(f, dtype=float)
    if np.any(f_arr < 0):
        raise DomainError("frequency must be >= 0")
    z = _series_z(ind, _omega(f_arr))
    return complex(z) if np.ndim(z) == 0 else z


def bank_capacitance(bank: CapacitorBank) -> float:
    if not 0 <= bank.code < bank.levels:
        raise InvalidCodeError(f"code {bank.code} outside [0, {bank.levels - 1}]")
    return bank.c_off + bank.code * bank.c_lsb


def _shunt_c(z_load, c, w):
    # C || z_load written with the admittance to stay finite as w -> 0
    return z_load / (1.0 + 1j * w * c * z_load)


def ladder_zin(w, caps, segments, extension=None, switch_on=None):
    """Vectorized ladder input impedance.

    ``w`` and the three entries of ``caps`` broadcast against each other.
    ``switch_on`` (bool array broadcastable with the result) overrides the
    extension's own switch state, used when tabulating every device state.
    """
    l1, l2, l3 = segments
    c1, c2, c3 = caps
    if extension is None:
        tail = _series_z(l3, w)
    else:
        z4 = _series_z(extension.l4, w)
        z_off = _shunt_c(z4, extension.c_off_switch, w)
        z_on = z4 + extension.r_on
        if switch_on is None:
            beyond = z_on if extension.switch_state == "on" else z_off
        else:
            beyond = np.where(switch_on, z_on, z_off)
        tail = _series_z(l3, w) + beyond
    eps = _shunt_c(tail, c3, w)
    beta = _shunt_c(_series_z(l2, w) + eps, c2, w)
    return _shunt_c(_series_z(l1, w) + beta, c1, w)


def _check_positive(f):
    f_arr = np.asarray(f, dtype=float)
    if np.any(~(f_arr > 0)):
        raise DomainError("frequency must be > 0 Hz")
    return f_arr


def ladder_input_impedance(spec: ReflectorSpec, f):
    """Input impedance of the reflector ladder at ``f`` (Hz)."""
    f_arr = _check_positive(f)
    z = ladder_zin(_omega(f_arr), spec.capacitances, spec.segments, spec.extension)
    return complex(z) if np.ndim(z) == 0 else z


def gamma_from_z(z, z0: float = DEFAULT_Z0):
    return (z - z0) / (z + z0)


def reflection_coefficient(spec: ReflectorSpec, f):
    """Gamma = (Z_in - Z0) / (Z_in + Z0) of the reflector."""
    return gamma_from_z(ladder_input_impedance(spec, f), spec.z0)


class Sweep(NamedTuple):
    f: np.ndarray
    gamma: np.ndarray


def reflector_sweep(spec: ReflectorSpec, grid: FrequencyGrid) -> Sweep:
    f = grid.values
    return Sweep(f, np.asarray(reflection_coefficient(spec, f)))


def state_reflections(spec: ReflectorSpec, f) -> np.ndarray:
    """Gamma for every device state: array of shape (state_count, len(f))."""
    f_arr = np.atleast_1d(_check_positive(f))
    caps, on = spec.state_capacitances()
    w = _omega(f_arr)[None, :]
    cols = tuple(caps[:, i : i + 1] for i in range(3))
    z = ladder_zin(w, cols, spec.segments, spec.extension, on[:, None])
    return gamma_from_z(z, spec.z0)
