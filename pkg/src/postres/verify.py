"""Oracle agreement checks behind ``postres verify``.

Each check draws seeded random samples, evaluates the closed form and an
independent oracle, and compares the worst error against a fixed tolerance.
``perturb`` scales the closed-form side by (1 + perturb) to prove the
checks can fail.
"""

from __future__ import annotations

import math
from typing import Callable, NamedTuple

import numpy as np

from postres import beamforming, cmt, oracle, periodic, rfcore, shifter


class CheckResult(NamedTuple):
    name: str
    passed: bool
    max_err: float
    tol: float
    samples: int


def _ladder_mna(rng, perturb, n=200):
    spec = rfcore.default_reflector()
    worst = 0.0
    for _ in range(n):
        s = spec.with_state(int(rng.integers(spec.state_count)))
        f = float(rng.uniform(0.1e9, 50e9))
        closed = rfcore.reflection_coefficient(s, f) * (1 + perturb)
        ref = oracle.mna_reflection(s, f)
        worst = max(worst, abs(closed - ref) / abs(ref))
    return worst, n, 1e-9


def _rtps_hybrid(rng, perturb, n=1000):
    mag = np.sqrt(rng.uniform(0, 1, n))
    gam = mag * np.exp(1j * rng.uniform(-np.pi, np.pi, n))
    worst = 0.0
    for g in gam:
        closed = shifter.rtps_response(g) * (1 + perturb)
        s = oracle.compose_rtps_4port(shifter.HybridCoupler(), g, g)
        worst = max(worst, abs(closed - s[1, 0]), abs(s[0, 0]))
    return worst, n, 1e-12


def _cascade_eigen(rng, perturb, n=200):
    worst = 0.0
    used = 0
    for _ in range(n):
        ind = rfcore.LossyInductor(float(rng.uniform(100e-12, 500e-12)), float(rng.choice([3.0, 5.0, 10.0, math.inf])))
        c = float(rng.uniform(100e-15, 450e-15))
        f = float(rng.uniform(1e9, 50e9))
        cells = int(rng.integers(1, 9))
        cell = periodic.t_inductor(ind, f) @ periodic.t_capacitor(c, f)
        ep = oracle.matrix_power_eigen(cell, cells)
        if ep.degenerate:
            continue
        closed = periodic.TwoPortChain.identity()
        for _ in range(cells):
            closed = closed @ cell
        a = closed.as_array() * (1 + perturb)
        b = ep.chain.as_array()
        worst = max(worst, float(np.abs(a - b).max() / np.abs(b).max()))
        used += 1
    return worst, used, 1e-10


def _cmt_solve(rng, perturb, n=50):
    f1s = rng.uniform(18e9, 55e9, n)
    fss = rng.uniform(1e9, 100e9, n)
    betas = {(0, 1): 0.1 * np.exp(1j * np.pi / 4), (1, 2): 0.2 * np.exp(1j * np.pi / 6)}
    worst = 0.0
    for f1, fs in zip(f1s, fss):
        sys_ = cmt.CoupledModeSystem.from_normalized([f1, 15e9, 35e9], [5, 5, 5], [60e9, 0, 0], betas)
        closed = cmt.scattering(sys_, fs).s[0, 0] * (1 + perturb)
        # direct inverse of the unnormalized matrix (w_s - w_k + i g_k / 2) and c_jk / 2
        w = cmt.TWO_PI * fs
        m = np.diag(w - np.array(sys_.mode_freqs) + 0.5j * sys_.gamma_total) + sys_.couplings / 2
        k = np.sqrt(np.array(sys_.gamma_ext))
        ref = 1j * (k @ np.linalg.inv(m))[0] * k[0] - 1
        worst = max(worst, abs(closed - ref) / abs(ref))
    return worst, n, 1e-10


def _quantize_bound(rng, perturb, n=100_000):
    psi = rng.uniform(-100, 100, n)
    bits = rng.integers(1, 13, n)
    worst = 0.0
    for b in range(1, 13):
        sel = bits == b
        q = beamforming.quantize_phase(psi[sel], b) * (1 + perturb)
        worst = max(worst, float(np.max(np.abs(q - psi[sel]) / (math.pi / 2**b))))
    # ratio to the bound; passing means <= 1
    return worst, n, 1.0


CHECKS: dict[str, Callable] = {
    "ladder_mna": _ladder_mna,
    "rtps_hybrid": _rtps_hybrid,
    "cascade_eigen": _cascade_eigen,
    "cmt_solve": _cmt_solve,
    "quantize_bound": _quantize_bound,
}


def run_checks(names: list[str] | None = None, seed: int = 0, perturb: float = 0.0) -> list[CheckResult]:
    names = list(CHECKS) if not names else names
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise KeyError(f"unknown check {unknown[0]!r}; choose from {', '.join(CHECKS)}")
    out = []
    for name in names:
        rng = np.random.default_rng([seed, list(CHECKS).index(name)])
        err, n, tol = CHECKS[name](rng, perturb)
        out.append(CheckResult(name, bool(err <= tol), float(err), tol, n))
    return out
