"""Temporal coupled-mode model of a chain of lossy resonators seen from its ports.

Reduced (rotating-wave) equations of motion::

    M[k, k] = (w_s - w_k + i gamma_k / 2) / gamma0
    M[j, k] = c_jk / (2 gamma0)
    S       = (i / gamma0) K M^-1 K - I,     K = diag(sqrt(gamma_ext))

Rates are angular (rad/s) throughout; helpers that take cyclic values say so.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from postres.rfcore import DomainError, FrequencyGrid

TWO_PI = 2.0 * math.pi


class SingularSystemError(ArithmeticError):
    """The equations-of-motion matrix is singular at the drive frequency."""

    def __init__(self, f_s: float, context: str = ""):
        self.f_s = f_s
        msg = f"singular equations-of-motion matrix at f_s = {f_s:.9g} Hz"
        super().__init__(f"{msg} ({context})" if context else msg)


def internal_rate(omega: float, q: float) -> float:
    """gamma_int = omega / Q; zero for an infinite Q."""
    if not omega > 0:
        raise DomainError(f"mode frequency must be > 0, got {omega}")
    if not q > 0:
        raise DomainError(f"quality factor must be > 0, got {q}")
    return 0.0 if math.isinf(q) else omega / q


@dataclass(frozen=True)
class CoupledModeSystem:
    mode_freqs: tuple[float, ...]
    qualities: tuple[float, ...]
    gamma_ext: tuple[float, ...]
    couplings: np.ndarray

    def __post_init__(self):
        n = len(self.mode_freqs)
        object.__setattr__(self, "mode_freqs", tuple(float(w) for w in self.mode_freqs))
        object.__setattr__(self, "qualities", tuple(float(q) for q in self.qualities))
        object.__setattr__(self, "gamma_ext", tuple(float(g) for g in self.gamma_ext))
        c = np.array(self.couplings, dtype=complex)
        c.setflags(write=False)
        object.__setattr__(self, "couplings", c)
        if n == 0:
            raise ValueError("at least one mode is required")
        if len(self.qualities) != n or len(self.gamma_ext) != n:
            raise ValueError("mode_freqs, qualities and gamma_ext must have equal length")
        if c.shape != (n, n):
            raise ValueError(f"couplings must be {n}x{n}, got {c.shape}")
        if any(not w > 0 for w in self.mode_freqs):
            raise DomainError("mode frequencies must be > 0")
        if any(not q > 0 for q in self.qualities):
            raise DomainError("quality factors must be > 0")
        if any(g < 0 for g in self.gamma_ext):
            raise DomainError("external rates must be >= 0")
        if not np.array_equal(c, c.T):
            raise ValueError("couplings must be symmetric (reciprocal network)")
        if np.any(np.diag(c) != 0):
            raise ValueError("couplings must have a zero diagonal")
        if not self.ports:
            raise ValueError("at least one mode needs gamma_ext > 0 to define a port")

    @classmethod
    def from_normalized(
        cls,
        mode_freqs_hz: Sequence[float],
        qualities: Sequence[float],
        gamma_ext_hz: Sequence[float],
        betas: dict[tuple[int, int], complex],
    ) -> CoupledModeSystem:
        """Build from cyclic frequencies/rates (Hz) and normalized couplings beta_jk.

        Cyclic values are multiplied by 2*pi. Couplings become c_jk = 2 gamma0 beta_jk
        with gamma0 evaluated for this system.
        """
        w = [TWO_PI * f for f in mode_freqs_hz]
        g_ext = [TWO_PI * g for g in gamma_ext_hz]
        n = len(w)
        probe = cls(w, qualities, g_ext, np.zeros((n, n), dtype=complex))
        g0 = probe.gamma0
        c = np.zeros((n, n), dtype=complex)
        for (j, k), beta in betas.items():
            c[j, k] = c[k, j] = 2.0 * g0 * beta
        return cls(w, qualities, g_ext, c)

    @property
    def size(self) -> int:
        return len(self.mode_freqs)

    @property
    def ports(self) -> tuple[int, ...]:
        return tuple(i for i, g in enumerate(self.gamma_ext) if g > 0)

    @property
    def gamma_int(self) -> np.ndarray:
        return np.array([internal_rate(w, q) for w, q in zip(self.mode_freqs, self.qualities)])

    @property
    def gamma_total(self) -> np.ndarray:
        return self.gamma_int + np.array(self.gamma_ext)

    @property
    def gamma0(self) -> float:
        """Geometric mean of the total rates of the ported modes."""
        g = self.gamma_total[list(self.ports)]
        if np.any(g <= 0):
            raise DomainError("normalization rate vanishes")
        return float(np.exp(np.mean(np.log(g))))

    def with_mode_frequency(self, j: int, omega: float) -> CoupledModeSystem:
        freqs = list(self.mode_freqs)
        freqs[j] = omega
        return replace(self, mode_freqs=tuple(freqs))


@dataclass(frozen=True)
class EomMatrix:
    entries: np.ndarray
    gamma0: float


@dataclass(frozen=True)
class ScatteringResult:
    s: np.ndarray
    ports: tuple[int, ...]


def _eom(system: CoupledModeSystem, w_s, gamma0: float) -> np.ndarray:
    w_s = np.asarray(w_s, dtype=float)
    detune = (w_s[..., None] - np.array(system.mode_freqs) + 0.5j * system.gamma_total) / gamma0
    m = np.broadcast_to(system.couplings / (2.0 * gamma0), w_s.shape + (system.size, system.size)).copy()
    idx = np.arange(system.size)
    m[..., idx, idx] = detune
    return m


def build_eom_matrix(system: CoupledModeSystem, f_s: float, gamma0: float | None = None) -> EomMatrix:
    g0 = system.gamma0 if gamma0 is None else gamma0
    if not g0 > 0:
        raise DomainError("gamma0 must be > 0")
    return EomMatrix(_eom(system, TWO_PI * f_s, g0), g0)


def build_full_eom_matrix(system: CoupledModeSystem, f_s: float, gamma0: float | None = None) -> np.ndarray:
    """2N x 2N matrix keeping the counter-rotating amplitudes a_k*.

    Diagnostic only; the starred couplings are taken equal to beta_jk.
    """
    red = build_eom_matrix(system, f_s, gamma0).entries
    n = system.size
    beta = system.couplings / (2.0 * (system.gamma0 if gamma0 is None else gamma0))
    full = np.zeros((2 * n, 2 * n), dtype=complex)
    full[:n, :n] = red
    full[:n, n:] = beta
    full[n:, :n] = beta
    full[n:, n:] = beta
    idx = np.arange(n)
    full[n + idx, n + idx] = -np.conj(np.diag(red))
    return full


def _is_singular(m: np.ndarray) -> np.ndarray:
    with np.errstate(all="ignore"):
        cond = np.linalg.cond(m)
    return ~np.isfinite(cond) | (cond > 1e14)


def scattering(system: CoupledModeSystem, f_s: float, gamma0: float | None = None) -> ScatteringResult:
    """Port scattering matrix at drive frequency ``f_s`` (Hz)."""
    eom = build_eom_matrix(system, f_s, gamma0)
    if _is_singular(eom.entries):
        raise SingularSystemError(f_s)
    ports = list(system.ports)
    k = np.diag(np.sqrt(system.gamma_ext))
    x = np.linalg.solve(eom.entries, k[:, ports])
    s = 1j / eom.gamma0 * (k[ports, :] @ x) - np.eye(len(ports))
    return ScatteringResult(s, tuple(ports))


def s11_spectrum(system: CoupledModeSystem, f_s, gamma0: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """S11 of the first port over an array of drive frequencies.

    Returns ``(s11, ok)``; singular points are left as NaN with ``ok`` False.
    """
    f_s = np.atleast_1d(np.asarray(f_s, dtype=float))
    g0 = system.gamma0 if gamma0 is None else gamma0
    m = _eom(system, TWO_PI * f_s, g0)
    bad = _is_singular(m)
    p = system.ports[0]
    rhs = np.zeros((system.size, 1), dtype=complex)
    rhs[p, 0] = math.sqrt(system.gamma_ext[p])
    s11 = np.full(f_s.shape, np.nan + 0j)
    good = ~bad
    if np.any(good):
        x = np.linalg.solve(m[good], np.broadcast_to(rhs, (int(good.sum()), system.size, 1)))
        s11[good] = 1j / g0 * math.sqrt(system.gamma_ext[p]) * x[:, p, 0] - 1.0
    return s11, good


@dataclass(frozen=True)
class S11Spectrum:
    f1: float
    f_s: np.ndarray
    s11: np.ndarray
    ok: np.ndarray

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.s11)

    @property
    def phase_deg(self) -> np.ndarray:
        """Phase unwrapped along f_s across the valid points; NaN where singular."""
        out = np.full(self.s11.shape, np.nan)
        if np.any(self.ok):
            out[self.ok] = np.degrees(np.unwrap(np.angle(self.s11[self.ok])))
        return out


def s11_sweep(
    system: CoupledModeSystem | Callable[[float], CoupledModeSystem],
    grid: FrequencyGrid,
    tune: Sequence[float],
) -> list[S11Spectrum]:
    """One S11 spectrum per tuned first-mode frequency (Hz).

    ``system`` is either a fixed system whose mode 0 is retuned, or a factory
    returning the system for a given f1 (used to hold normalized couplings fixed).
    """
    f_s = grid.values
    out = []
    for f1 in tune:
        sys_f1 = system(f1) if callable(system) else system.with_mode_frequency(0, TWO_PI * f1)
        s11, ok = s11_spectrum(sys_f1, f_s)
        out.append(S11Spectrum(float(f1), f_s, s11, ok))
    return out
