"""ABCD transfer matrices, cascades, Bloch impedance and dispersion of a loaded line."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from postres.rfcore import DomainError, LossyInductor


class DegenerateCellError(ValueError):
    """Raised when a cell's C entry vanishes and no Bloch impedance exists."""


@dataclass(frozen=True)
class TwoPortChain:
    """ABCD matrix [[a, b], [c, d]]; entries may be scalars or same-shape arrays."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __matmul__(self, other: TwoPortChain) -> TwoPortChain:
        return TwoPortChain(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    @classmethod
    def identity(cls) -> TwoPortChain:
        return cls(1.0 + 0j, 0j, 0j, 1.0 + 0j)

    @classmethod
    def from_array(cls, m) -> TwoPortChain:
        m = np.asarray(m, dtype=complex)
        return cls(m[..., 0, 0], m[..., 0, 1], m[..., 1, 0], m[..., 1, 1])

    def as_array(self) -> np.ndarray:
        a, b, c, d = np.broadcast_arrays(*(np.asarray(x, dtype=complex) for x in (self.a, self.b, self.c, self.d)))
        return np.stack([np.stack([a, b], -1), np.stack([c, d], -1)], -2)

    @property
    def det(self):
        return self.a * self.d - self.b * self.c

    @property
    def half_trace(self):
        return (self.a + self.d) / 2


@dataclass(frozen=True)
class BlochResult:
    z_bloch: complex
    beta_d: complex
    eigenvalues: tuple[complex, complex]


def _omega(f):
    return 2.0 * np.pi * np.asarray(f, dtype=float)


def t_inductor(ind: LossyInductor, f) -> TwoPortChain:
    """Series lossy inductor [[1, Z_L + r_L], [0, 1]]."""
    w = _omega(f)
    if np.any(w < 0):
        raise DomainError("frequency must be >= 0")
    x = w * ind.inductance
    z = 1j * x if ind.lossless else x / ind.quality + 1j * x
    one = np.ones_like(z)
    return TwoPortChain(one, z, np.zeros_like(z), one)


def t_capacitor(c: float, f) -> TwoPortChain:
    """Shunt capacitor [[1, 0], [jwC, 1]]."""
    w = _omega(f)
    if np.any(w <= 0):
        raise DomainError("frequency must be > 0 Hz")
    if not c > 0:
        raise DomainError(f"capacitance must be > 0, got {c}")
    y = 1j * w * c
    one = np.ones_like(y)
    return TwoPortChain(one, np.zeros_like(y), y, one)


def cascade(*chains: TwoPortChain) -> TwoPortChain:
    out = chains[0]
    for t in chains[1:]:
        out = out @ t
    return out


def cascade_load(n_cells: int, ind: LossyInductor, c: float, f) -> TwoPortChain:
    """(T_L T_C)^N T_L by repeated multiplication."""
    if n_cells < 1:
        raise ValueError(f"n_cells must be >= 1, got {n_cells}")
    tl = t_inductor(ind, f)
    cell = tl @ t_capacitor(c, f)
    out = cell
    for _ in range(n_cells - 1):
        out = out @ cell
    return out @ tl


def bloch_impedance(t: TwoPortChain):
    """Z_B = sqrt(B / C) on the branch with Re(Z_B) >= 0."""
    c = np.asarray(t.c)
    if np.any(c == 0):
        raise DegenerateCellError("cell has C = 0; Bloch impedance undefined")
    z = np.sqrt(np.asarray(t.b) / c)
    z = np.where(z.real < 0, -z, z)
    return complex(z) if z.ndim == 0 else z


def bloch_impedance_forms(t: TwoPortChain) -> dict:
    """All three closed forms B/(1-A), (1-D)/C, sqrt(B/C) and their spread.

    Only the square-root form is physical for asymmetric cells; the others are
    kept as diagnostics.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        f1 = np.asarray(t.b) / (1 - np.asarray(t.a))
        f2 = (1 - np.asarray(t.d)) / np.asarray(t.c)
    f3 = np.asarray(bloch_impedance(t))
    scale = np.maximum(np.abs(f3), np.finfo(float).tiny)
    return {
        "b_over_1_minus_a": f1,
        "1_minus_d_over_c": f2,
        "sqrt_b_over_c": f3,
        "max_rel_discrepancy": float(np.nanmax(np.maximum(np.abs(f1 - f3), np.abs(f2 - f3)) / scale)),
    }


def dispersion(t: TwoPortChain):
    """Per-cell propagation constant from cos(beta d) = (A + D) / 2.

    The arccos principal value is negated when needed so that Im(beta d) <= 0,
    i.e. |exp(-j beta d)| <= 1 (a decaying Bloch wave).
    """
    x = np.asarray(t.half_trace, dtype=complex)
    bd = np.arccos(x)
    bd = np.where(bd.imag > 0, -bd, bd)
    return complex(bd) if bd.ndim == 0 else bd


def bloch_eigenvalues(t: TwoPortChain):
    """Roots of lambda^2 - (A + D) lambda + det(T) = 0."""
    tr = np.asarray(t.a + t.d, dtype=complex)
    disc = np.sqrt(tr * tr - 4 * np.asarray(t.det, dtype=complex))
    return (tr + disc) / 2, (tr - disc) / 2


def bloch_analysis(t: TwoPortChain) -> BlochResult:
    l1, l2 = bloch_eigenvalues(t)
    return BlochResult(bloch_impedance(t), dispersion(t), (l1, l2))


def lossless_cutoff(inductance: float, capacitance: float) -> float:
    """Stopband edge of a lossless series-L / shunt-C half cell: w_c = 2 / sqrt(LC)."""
    return 1.0 / (np.pi * np.sqrt(inductance * capacitance))
