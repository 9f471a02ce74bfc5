"""Array factor with quantized steering phases, and 3D beam patterns.

Planar arrays lie in the y-z plane with broadside along +x. Azimuth is
measured in the x-y plane from +x, elevation from that plane toward +z::

    u_y = cos(el) sin(az),    u_z = sin(el)

A back baffle (element pattern 1 in front, 0 behind) removes the x < 0
hemisphere. Steering phases are quantized; propagation phases are not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage

from postres._parallel import map_chunks

C0 = 299_792_458.0
DEFAULT_CENTER_FREQ = 28e9
MASKED = -np.inf


def quantize_phase(psi, bits):
    """Round to the nearest multiple of 2*pi / 2**bits, ties upward.

    ``bits`` of ``None`` or ``math.inf`` returns ``psi`` unchanged.
    """
    if bits is None or (isinstance(bits, float) and math.isinf(bits)):
        return psi
    if int(bits) != bits or bits < 1:
        raise ValueError(f"bits must be a positive integer or inf, got {bits}")
    step = 2.0 * math.pi / 2 ** int(bits)
    p = np.asarray(psi, dtype=float)
    q = np.floor(p / step + 0.5) * step
    # floor(x + 0.5) can land one step off when p/step is huge; pull back
    err = q - p
    q = np.where(err > step / 2, q - step, np.where(err < -step / 2, q + step, q))
    return float(q) if np.ndim(q) == 0 else q


def _is_infinite(bits) -> bool:
    return bits is None or (isinstance(bits, float) and math.isinf(bits))


@dataclass(frozen=True)
class ArraySpec:
    """Uniform rectangular (or linear, ``n_y = 1``) array of phase-shifted elements.

    ``spacing`` defaults to half a wavelength at ``center_freq``.
    ``steer`` is (azimuth, elevation) in degrees; a linear array steers by azimuth only.
    """

    n_x: int
    n_y: int = 1
    spacing: float | None = None
    bits: float | None = None
    il_db: float = 0.0
    weights: np.ndarray | None = None
    steer: tuple[float, float] = (0.0, 0.0)
    center_freq: float = DEFAULT_CENTER_FREQ
    name: str = ""
    note: str = field(default="", compare=False)

    def __post_init__(self):
        if int(self.n_x) != self.n_x or int(self.n_y) != self.n_y or self.n_x < 1 or self.n_y < 1:
            raise ValueError(f"element counts must be integers >= 1, got {self.n_x} x {self.n_y}")
        if not self.center_freq > 0:
            raise ValueError("center_freq must be > 0")
        if self.spacing is None:
            object.__setattr__(self, "spacing", C0 / self.center_freq / 2)
        if not self.spacing > 0:
            raise ValueError("spacing must be > 0")
        if not self.il_db >= 0:
            raise ValueError("il_db must be >= 0")
        if not _is_infinite(self.bits) and (int(self.bits) != self.bits or self.bits < 1):
            raise ValueError(f"bits must be a positive integer or inf, got {self.bits}")
        w = np.ones(self.size) if self.weights is None else np.asarray(self.weights, dtype=complex).ravel()
        if w.size != self.size:
            raise ValueError(f"weights need {self.size} entries, got {w.size}")
        w = np.array(w, dtype=complex)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "steer", (float(self.steer[0]), float(self.steer[1])))

    @property
    def size(self) -> int:
        return int(self.n_x) * int(self.n_y)

    @property
    def linear(self) -> bool:
        return self.n_y == 1

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi * self.center_freq / C0

    @property
    def amplitude(self) -> float:
        return 10.0 ** (-self.il_db / 20.0)

    def steered(self, az: float, el: float = 0.0) -> ArraySpec:
        return replace(self, steer=(az, el), weights=self.weights)

    def element_indices(self) -> tuple[np.ndarray, np.ndarray]:
        """(iy, iz) grid indices, flattened in the same order as ``weights``."""
        iy, iz = np.meshgrid(np.arange(self.n_x), np.arange(self.n_y), indexing="ij")
        return iy.ravel(), iz.ravel()

    def steering_phases(self) -> np.ndarray:
        """Programmed (quantized) phase of each element, radians, shape (n_x, n_y)."""
        az, el = np.radians(self.steer)
        iy, iz = self.element_indices()
        kd = self.wavenumber * self.spacing
        ideal = -kd * (iy * math.cos(el) * math.sin(az) + iz * math.sin(el))
        return np.asarray(quantize_phase(ideal, self.bits)).reshape(self.n_x, self.n_y)

    def excitations(self) -> np.ndarray:
        """Complex drive of each element including loss, shape (n_x, n_y)."""
        return self.weights.reshape(self.n_x, self.n_y) * self.amplitude * np.exp(1j * self.steering_phases())


def array_factor(spec: ArraySpec, theta, f: float | None = None):
    """Complex array factor of a linear array at angle(s) ``theta`` (degrees)."""
    if not spec.linear:
        raise ValueError("array_factor handles linear arrays only; use beam_pattern_3d")
    f = spec.center_freq if f is None else f
    if not f > 0:
        raise ValueError("frequency must be > 0")
    n = np.arange(spec.n_x)
    th = np.asarray(theta, dtype=float)
    psi = 2.0 * math.pi * f / C0 * spec.spacing * np.sin(np.radians(th))[..., None] * n
    af = np.sum(spec.excitations()[:, 0] * np.exp(1j * psi), axis=-1)
    return complex(af) if af.ndim == 0 else af


@dataclass(frozen=True)
class BeamPattern:
    """Gain in dB over an (elevation, azimuth) grid, normalized to 0 dB peak.

    ``gain_db`` has shape (len(el_grid), len(az_grid)); masked points hold -inf.
    """

    az_grid: np.ndarray
    el_grid: np.ndarray
    gain_db: np.ndarray

    @property
    def mask(self) -> np.ndarray:
        return np.isneginf(self.gain_db)

    def main_lobe(self) -> tuple[float, float]:
        """(azimuth, elevation) of the global peak in degrees."""
        i, j = np.unravel_index(np.argmax(self.gain_db), self.gain_db.shape)
        return float(self.az_grid[j]), float(self.el_grid[i])


def _to_db(mag: np.ndarray, masked: np.ndarray) -> np.ndarray:
    peak = mag[~masked].max() if np.any(~masked) else 0.0
    with np.errstate(divide="ignore"):
        g = 20.0 * np.log10(mag / peak) if peak > 0 else np.zeros_like(mag)
    g[masked] = MASKED
    g[~masked] = np.minimum(g[~masked], 0.0)
    return g


def linear_pattern(spec: ArraySpec, theta_grid, f: float | None = None) -> BeamPattern:
    """Normalized pattern of a linear array over ``theta_grid`` (one elevation row)."""
    th = np.asarray(theta_grid, dtype=float)
    if th.size < 1:
        raise ValueError("empty angle grid")
    mag = np.abs(array_factor(spec, th, f))[None, :]
    return BeamPattern(th, np.zeros(1), _to_db(mag, np.zeros(mag.shape, dtype=bool)))


def beam_pattern_3d(spec: ArraySpec, az_grid, el_grid, workers: int | None = None) -> BeamPattern:
    """Back-baffled pattern over an azimuth x elevation grid in degrees."""
    az = np.asarray(az_grid, dtype=float)
    el = np.asarray(el_grid, dtype=float)
    if az.size == 0 or el.size == 0:
        raise ValueError("empty angle grid")
    a, e = np.radians(az), np.radians(el)
    kd = spec.wavenumber * spec.spacing
    w = spec.excitations()
    ny = np.arange(spec.n_x)
    nz = np.arange(spec.n_y)
    ez = np.exp(1j * kd * np.sin(e)[:, None] * nz)  # (n_el, n_y)

    # fixed row blocks, so results do not depend on how blocks are shared out
    block = 16
    n_blocks = -(-el.size // block)

    def blocks(sl):
        parts = []
        for b in range(sl.start, sl.stop):
            r0, r1 = b * block, min((b + 1) * block, el.size)
            uy = np.cos(e[r0:r1, None]) * np.sin(a)  # (rows, n_az)
            ey = np.exp(1j * kd * uy[..., None] * ny)  # (rows, n_az, n_x)
            parts.append(np.abs(np.einsum("ran,nm,rm->ra", ey, w, ez[r0:r1])))
        return np.concatenate(parts, axis=0)

    mag = map_chunks(blocks, n_blocks, workers, axis=0)
    behind = np.cos(e)[:, None] * np.cos(a)[None, :] < 0
    return BeamPattern(az, el, _to_db(mag, behind))


def peak_sidelobe(bp: BeamPattern) -> float | None:
    """Strongest local maximum outside the main lobe, in dB below the peak.

    The main lobe is the connected region around the global peak lying
    above -3 dB. Returns ``None`` when no such maximum exists.
    """
    g = np.asarray(bp.gain_db, dtype=float)
    if g.size < 2:
        raise ValueError("peak_sidelobe needs more than one grid sample")
    finite = np.isfinite(g)
    labels, _ = ndimage.label(finite & (g > -3.0))
    peak = np.unravel_index(np.argmax(np.where(finite, g, -np.inf)), g.shape)
    main = labels == labels[peak]
    floor = -1e300
    vals = np.where(finite, g, floor)
    local = vals == ndimage.maximum_filter(vals, size=3, mode="constant", cval=floor)
    cand = local & finite & ~main
    if not cand.any():
        return None
    return float(g[cand].max())


# -- presets ----------------------------------------------------------------

# (name, elements per mm^2, array side in the 3.1 mm^2 comparison, bits, loss dB)
_TECHNOLOGIES = (
    ("switched_filter", 12, 3, 4, 12.8),
    ("allpass", 30, 10, 3, 4.5),
    ("pvm", 7, 5, 7, 17.5),
    ("postres", 16, 7, 10, 4.9),
)


def comparison_presets(steer: tuple[float, float] = (20.0, 20.0)) -> list[ArraySpec]:
    """Square arrays fitting the same chip area, one per phase-shifter type."""
    return [
        ArraySpec(side, side, bits=bits, il_db=il, steer=steer, name=name, note=f"{side}x{side}, {bits} bit, {il} dB")
        for name, _, side, bits, il in _TECHNOLOGIES
    ]


def linear_presets(steer_deg: float = 0.0) -> list[ArraySpec]:
    """Linear arrays with as many elements as fit in 1 mm^2, one per phase-shifter type."""
    return [
        ArraySpec(n, 1, bits=bits, il_db=il, steer=(steer_deg, 0.0), name=name, note=f"{n} elements, {bits} bit, {il} dB")
        for name, n, _, bits, il in _TECHNOLOGIES
    ]


def scaled_presets(steer: tuple[float, float] = (20.0, 20.0)) -> list[ArraySpec]:
    """Large post-resonance arrays (30x30 and 60x60)."""
    return [ArraySpec(n, n, bits=10, il_db=4.9, steer=steer, name=f"postres{n}", note=f"{n}x{n}, 10 bit") for n in (30, 60)]
