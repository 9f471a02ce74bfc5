"""Brute-force reference computations used to cross-check the closed forms.

Nothing here reuses the impedance or matrix helpers of the main modules:
the nodal solver stamps raw element admittances, the matrix power goes
through an eigen-decomposition, and the hybrid is reduced from its full
4x4 scattering matrix.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from postres.periodic import TwoPortChain
from postres.rfcore import ReflectorSpec
from postres.shifter import HybridCoupler


class SingularCircuitError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Element:
    kind: str  # "R", "L" or "C"
    value: float
    node_a: int
    node_b: int
    quality: float = math.inf  # only used for "L"

    def __post_init__(self):
        if self.kind not in ("R", "L", "C"):
            raise ValueError(f"unknown element kind {self.kind!r}")
        if not self.value > 0:
            raise ValueError(f"element values must be > 0, got {self.value}")


@dataclass(frozen=True)
class NodalCircuit:
    """Two-terminal network between ``port`` and ground (node 0)."""

    n_nodes: int
    elements: tuple[Element, ...] = field(default_factory=tuple)
    port: int = 1
    ground: int = 0


def ladder_circuit(spec: ReflectorSpec) -> NodalCircuit:
    """Netlist of the reflector: junction node i carries C_i, segments chain to ground."""
    c1, c2, c3 = (b.c_off + b.code * b.c_lsb for b in spec.banks)
    l1, l2, l3 = spec.segments
    els = [
        Element("C", c1, 1, 0),
        Element("L", l1.inductance, 1, 2, l1.quality),
        Element("C", c2, 2, 0),
        Element("L", l2.inductance, 2, 3, l2.quality),
        Element("C", c3, 3, 0),
    ]
    ext = spec.extension
    if ext is None:
        els.append(Element("L", l3.inductance, 3, 0, l3.quality))
        return NodalCircuit(4, tuple(els))
    els.append(Element("L", l3.inductance, 3, 4, l3.quality))
    if ext.switch_state == "off":
        els += [Element("C", ext.c_off_switch, 4, 0), Element("L", ext.l4.inductance, 4, 0, ext.l4.quality)]
        return NodalCircuit(5, tuple(els))
    if ext.r_on > 0:
        els += [Element("L", ext.l4.inductance, 4, 5, ext.l4.quality), Element("R", ext.r_on, 5, 0)]
        return NodalCircuit(6, tuple(els))
    els.append(Element("L", ext.l4.inductance, 4, 0, ext.l4.quality))
    return NodalCircuit(5, tuple(els))


def mna_input_impedance(ckt: NodalCircuit, f: float) -> complex:
    """Port voltage for a 1 A test current injected at the port.

    A lossy inductor becomes a resistor R = wL/Q in series with L through an
    internal node, so every stamp is a single R, L or C admittance.
    """
    if not f > 0:
        raise ValueError("frequency must be > 0 Hz")
    w = 2 * math.pi * f
    branches = []
    extra = ckt.n_nodes
    for el in ckt.elements:
        if el.kind == "L" and not math.isinf(el.quality):
            mid = extra
            extra += 1
            branches.append((1.0 / (w * el.value / el.quality), el.node_a, mid))
            branches.append((1.0 / (1j * w * el.value), mid, el.node_b))
        elif el.kind == "L":
            branches.append((1.0 / (1j * w * el.value), el.node_a, el.node_b))
        elif el.kind == "C":
            branches.append((1j * w * el.value, el.node_a, el.node_b))
        else:
            branches.append((1.0 / el.value, el.node_a, el.node_b))

    # unknowns are all node voltages except ground
    index = {}
    for n in range(extra):
        if n != ckt.ground:
            index[n] = len(index)
    y = np.zeros((len(index), len(index)), dtype=complex)
    for adm, a, b in branches:
        ia, ib = index.get(a), index.get(b)
        if ia is not None:
            y[ia, ia] += adm
        if ib is not None:
            y[ib, ib] += adm
        if ia is not None and ib is not None:
            y[ia, ib] -= adm
            y[ib, ia] -= adm
    i = np.zeros(len(index), dtype=complex)
    i[index[ckt.port]] = 1.0
    try:
        v = np.linalg.solve(y, i)  # LU with partial pivoting
    except np.linalg.LinAlgError:
        raise SingularCircuitError(f"singular admittance matrix at f = {f:.9g} Hz") from None
    resid = np.linalg.norm(y @ v - i) / np.linalg.norm(i)
    if not resid < 1e-10:
        raise SingularCircuitError(f"nodal solve residual {resid:.3g} at f = {f:.9g} Hz")
    return complex(v[index[ckt.port]])


def mna_reflection(spec: ReflectorSpec, f: float) -> complex:
    z = mna_input_impedance(ladder_circuit(spec), f)
    return (z - spec.z0) / (z + spec.z0)


# -- hybrid composition -------------------------------------------------------


def hybrid_smatrix(coupler: HybridCoupler) -> np.ndarray:
    """Full 4x4 scattering matrix of the (possibly imbalanced) quadrature hybrid."""
    loss = 10.0 ** (-coupler.insertion_loss_excess / 20.0)
    ratio = 10.0 ** (coupler.amplitude_imbalance / 20.0)
    norm = math.hypot(1.0, ratio)
    phi = math.radians(coupler.phase_imbalance)
    t = loss * ratio / norm * np.exp(-1j * (math.pi / 2 + phi / 2))
    k = loss / norm * np.exp(1j * phi / 2)
    s = np.zeros((4, 4), dtype=complex)
    for a, b in ((0, 1), (2, 3)):
        s[a, b] = s[b, a] = t
    for a, b in ((0, 2), (1, 3)):
        s[a, b] = s[b, a] = k
    return s


def compose_rtps_4port(coupler: HybridCoupler, gamma_t: complex, gamma_c: complex, f: float | None = None) -> np.ndarray:
    """2x2 S-matrix between hybrid ports 1 and 4 with ports 2/3 terminated.

    Solves the port equations b = S a with a_2 = Gamma_t b_2, a_3 = Gamma_c b_3
    for unit excitation at each external port in turn.
    """
    if coupler.ideal and (abs(gamma_t) > 1 or abs(gamma_c) > 1):
        warnings.warn("|Gamma| > 1 on a lossless coupler: active termination", RuntimeWarning, stacklevel=2)
    s = hybrid_smatrix(coupler)
    g = np.diag([0.0, gamma_t, gamma_c, 0.0]).astype(complex)
    # a = e + G b and b = S a  =>  (I - S G) b = S e
    lhs = np.eye(4) - s @ g
    ext = [0, 3]
    out = np.zeros((2, 2), dtype=complex)
    for col, port in enumerate(ext):
        e = np.zeros(4, dtype=complex)
        e[port] = 1.0
        b = np.linalg.solve(lhs, s @ e)
        out[:, col] = b[ext]
    return out


# -- matrix power -------------------------------------------------------------


class EigenPower(NamedTuple):
    chain: TwoPortChain
    degenerate: np.ndarray


def matrix_power_eigen(t_cell: TwoPortChain, n: int) -> EigenPower:
    """T^n via T = V diag(lambda) V^-1, per frequency.

    Frequencies where the two eigenvalues (nearly) coincide are flagged in
    ``degenerate`` and returned as NaN.
    """
    m = t_cell.as_array()
    stack = m.reshape(-1, 2, 2)
    out = np.full_like(stack, np.nan)
    flag = np.zeros(stack.shape[0], dtype=bool)
    for i, mat in enumerate(stack):
        lam, vec = np.linalg.eig(mat)
        sep = abs(lam[0] - lam[1])
        if sep <= 1e-12 * max(1.0, abs(lam).max()) or np.linalg.cond(vec) > 1e10:
            flag[i] = True
            continue
        out[i] = vec @ np.diag(lam**n) @ np.linalg.inv(vec)
    out = out.reshape(m.shape)
    flag = flag.reshape(m.shape[:-2])
    return EigenPower(TwoPortChain.from_array(out), flag)
