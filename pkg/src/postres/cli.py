"""``postres`` command-line front end.

    postres <command> [--config PATH] [--preset NAME] [--out PATH] [--json]

Commands write a CSV whose first line is ``# postres v<version> preset=<name>``
and second line the column header. Exit codes: 0 success, 1 numerical
failure, 2 invalid configuration.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from postres import __version__
from postres import beamforming as bf
from postres import cmt, comparison, periodic, rfcore, shifter
from postres.config import (
    ConfigError,
    check_keys,
    load_config,
    merge,
    parse_number,
    parse_quantity,
    positive,
)
from postres.presets import preset


class NumericalError(RuntimeError):
    """Computation failed; the CLI maps it to exit code 1."""


@dataclass
class RunConfig:
    command: str
    preset: str
    params: dict = field(default_factory=dict)


@dataclass
class Output:
    columns: tuple[str, ...] = ()
    rows: list[str] = field(default_factory=list)  # pre-formatted CSV lines
    summary: dict | None = None
    text: str | None = None


# -- formatting -------------------------------------------------------------


def _fmt(x) -> str:
    """Shortest round-trip text for a float; nan/inf spelled out."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _csv_lines(*cols) -> list[str]:
    """Join equal-length columns (lists of str or arrays of float) into CSV lines."""
    text_cols = [c if isinstance(c, list) else [_fmt(v) for v in np.asarray(c).tolist()] for c in cols]
    return [",".join(parts) for parts in zip(*text_cols)]


def _render_csv(out: Output, preset_name: str) -> str:
    head = f"# postres v{__version__} preset={preset_name}\n" + ",".join(out.columns) + "\n"
    return head + "".join(line + "\n" for line in out.rows)


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    raise TypeError(type(x).__name__)


def _clean(obj):
    """Replace non-finite floats with strings so the JSON stays standard."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return _fmt(obj)
    return obj


def _render_json(obj: dict) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True, default=_json_default) + "\n"


# -- config blocks ------------------------------------------------------------


def _grid(block, where="grid") -> rfcore.FrequencyGrid:
    check_keys(block, {"start", "stop", "points"}, where)
    try:
        start = parse_quantity(block["start"], "frequency", f"{where}.start")
        stop = parse_quantity(block["stop"], "frequency", f"{where}.stop")
        points = parse_number(block["points"], f"{where}.points", integer=True)
    except KeyError as exc:
        raise ConfigError(f"{where}: missing key {exc.args[0]}") from None
    try:
        return rfcore.FrequencyGrid(start, stop, points)
    except rfcore.DomainError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _quality(v, key) -> float:
    return positive(parse_number(v, key, allow_inf=True), key)


def _reflector(block, where="reflector") -> rfcore.ReflectorSpec:
    check_keys(block, {"inductance", "quality", "c_min", "c_max", "bits", "z0", "extension", "grid", "codes"}, where)
    ind = positive(parse_quantity(block.get("inductance", "300 pH"), "inductance", f"{where}.inductance"), "inductance")
    q = _quality(block.get("quality", 5), f"{where}.quality")
    c_min = positive(parse_quantity(block.get("c_min", "100 fF"), "capacitance", f"{where}.c_min"), "c_min")
    c_max = parse_quantity(block.get("c_max", "450 fF"), "capacitance", f"{where}.c_max")
    if not c_max > c_min:
        raise ConfigError(f"{where}: c_max must exceed c_min")
    bits = parse_number(block.get("bits", 5), f"{where}.bits", integer=True)
    if not 1 <= bits <= 8:
        raise ConfigError(f"{where}.bits: must be in 1..8, got {bits}")
    z0 = positive(parse_quantity(block.get("z0", "50 ohm"), "resistance", f"{where}.z0"), "z0")
    ext = None
    if "extension" in block:
        e = block["extension"]
        check_keys(e, {"l4", "quality", "r_on", "c_off_switch"}, f"{where}.extension")
        l4 = positive(parse_quantity(e.get("l4", "300 pH"), "inductance", f"{where}.extension.l4"), "l4")
        ext = rfcore.SwitchExtension(
            rfcore.LossyInductor(l4, _quality(e.get("quality", q), f"{where}.extension.quality")),
            r_on=parse_quantity(e.get("r_on", "2 ohm"), "resistance", f"{where}.extension.r_on"),
            c_off_switch=parse_quantity(e.get("c_off_switch", "40 fF"), "capacitance", f"{where}.extension.c_off_switch"),
        )
    spec = rfcore.default_reflector(ind, q, c_min, c_max, bits, ext)
    return rfcore.ReflectorSpec(spec.segments, spec.banks, True, ext, z0)


def _codes(block, spec: rfcore.ReflectorSpec) -> np.ndarray:
    if "codes" not in block:
        return np.arange(spec.state_count)
    raw = block["codes"]
    if not isinstance(raw, list) or not raw:
        raise ConfigError("codes: expected a non-empty list of integers")
    codes = [parse_number(c, "codes[]", integer=True) for c in raw]
    bad = [c for c in codes if not 0 <= c < spec.state_count]
    if bad:
        raise ConfigError(f"codes: {bad[0]} outside [0, {spec.state_count - 1}]")
    return np.array(sorted(set(codes)))


def _angles(block, where) -> np.ndarray:
    check_keys(block, {"start", "stop", "step"}, where)
    try:
        start = parse_quantity(block["start"], "angle", f"{where}.start")
        stop = parse_quantity(block["stop"], "angle", f"{where}.stop")
        step = positive(parse_quantity(block["step"], "angle", f"{where}.step"), f"{where}.step")
    except KeyError as exc:
        raise ConfigError(f"{where}: missing key {exc.args[0]}") from None
    if stop < start:
        raise ConfigError(f"{where}: stop must be >= start")
    n = int(round((stop - start) / step)) + 1
    return np.linspace(start, stop, n) if n > 1 else np.array([start])


# -- commands -------------------------------------------------------------------


def cmd_reflector(cfg: RunConfig) -> Output:
    p = cfg.params
    spec = _reflector(p, "config")
    grid = _grid(p.get("grid", {"start": "1 GHz", "stop": "40 GHz", "points": 391}))
    codes = _codes(p, spec)

    def run():
        f = grid.values
        gamma = rfcore.state_reflections(spec, f)[codes]
        n_f = f.size
        with np.errstate(divide="ignore"):
            mag_db = 20 * np.log10(np.abs(gamma))
        return _csv_lines(
            np.tile(f, codes.size),
            [str(c) for c in np.repeat(codes, n_f).tolist()],
            gamma.real.ravel(),
            gamma.imag.ravel(),
            mag_db.ravel(),
            np.degrees(np.angle(gamma)).ravel(),
        )

    rows = _numeric(run)
    return Output(("f_hz", "code", "re_gamma", "im_gamma", "mag_db", "phase_deg"), rows)


def cmd_bloch(cfg: RunConfig) -> Output:
    p = cfg.params
    check_keys(p, {"inductance", "quality", "cells", "half_cell", "capacitance", "grid"}, "config")
    ind = rfcore.LossyInductor(
        positive(parse_quantity(p.get("inductance", "350 pH"), "inductance", "inductance"), "inductance"),
        _quality(p.get("quality", 3), "quality"),
    )
    half = p.get("half_cell", False)
    if not isinstance(half, bool):
        raise ConfigError("half_cell: expected true or false")
    cells = parse_number(p.get("cells", 4), "cells", integer=True)
    if not half and cells < 1:
        raise ConfigError("cells: must be >= 1")
    c_block = p.get("capacitance", "200 fF")
    if isinstance(c_block, dict):
        check_keys(c_block, {"start", "stop", "points"}, "capacitance")
        try:
            lo = parse_quantity(c_block["start"], "capacitance", "capacitance.start")
            hi = parse_quantity(c_block["stop"], "capacitance", "capacitance.stop")
            n = parse_number(c_block["points"], "capacitance.points", integer=True)
        except KeyError as exc:
            raise ConfigError(f"capacitance: missing key {exc.args[0]}") from None
        if n < 1 or hi < lo:
            raise ConfigError("capacitance: need points >= 1 and stop >= start")
        caps = np.linspace(lo, hi, n) if n > 1 else np.array([lo])
    else:
        caps = np.array([parse_quantity(c_block, "capacitance", "capacitance")])
    if np.any(caps <= 0):
        raise ConfigError("capacitance: values must be > 0")
    grid = _grid(p.get("grid", {"start": "1 GHz", "stop": "60 GHz", "points": 591}))

    def run():
        f = grid.values
        rows = []
        for c in caps:
            if half:
                t = periodic.t_inductor(ind, f) @ periodic.t_capacitor(c, f)
            else:
                t = periodic.cascade_load(cells, ind, c, f)
            try:
                zb = np.asarray(periodic.bloch_impedance(t))
            except periodic.DegenerateCellError as exc:
                raise NumericalError(f"C = {c:.6g} F: {exc}") from None
            bd = np.asarray(periodic.dispersion(t))
            rows += _csv_lines(np.full(f.size, c), f, zb.real, zb.imag, bd.real, bd.imag)
        return rows

    rows = _numeric(run)
    return Output(("c_farad", "f_hz", "re_zb", "im_zb", "re_betad", "im_betad"), rows)


def _cmt_factory(p) -> tuple[Callable[[float], cmt.CoupledModeSystem], list[float]]:
    check_keys(p, {"modes", "couplings", "tune", "grid"}, "config")
    modes = p.get("modes")
    if not isinstance(modes, list) or not modes:
        raise ConfigError("modes: expected a non-empty list")
    freqs, qs, gext = [], [], []
    for i, m in enumerate(modes):
        check_keys(m, {"freq", "quality", "gamma_ext"}, f"modes[{i}]")
        freqs.append(positive(parse_quantity(m.get("freq"), "frequency", f"modes[{i}].freq"), f"modes[{i}].freq"))
        qs.append(_quality(m.get("quality", 5), f"modes[{i}].quality"))
        g = parse_quantity(m.get("gamma_ext", "0 GHz"), "rate", f"modes[{i}].gamma_ext")
        if g < 0:
            raise ConfigError(f"modes[{i}].gamma_ext: must be >= 0")
        gext.append(g / cmt.TWO_PI)  # back to cyclic; from_normalized multiplies by 2 pi
    betas = {}
    for i, c in enumerate(p.get("couplings", [])):
        check_keys(c, {"modes", "magnitude", "phase"}, f"couplings[{i}]")
        pair = c.get("modes")
        if not (isinstance(pair, list) and len(pair) == 2 and all(isinstance(j, int) for j in pair)):
            raise ConfigError(f"couplings[{i}].modes: expected two mode indices")
        j, k = pair
        if j == k or not (0 <= j < len(modes) and 0 <= k < len(modes)):
            raise ConfigError(f"couplings[{i}].modes: invalid pair {pair}")
        mag = parse_number(c.get("magnitude", 0), f"couplings[{i}].magnitude")
        ph = math.radians(parse_quantity(c.get("phase", "0 deg"), "angle", f"couplings[{i}].phase"))
        betas[(j, k)] = mag * complex(math.cos(ph), math.sin(ph))
    if not any(g > 0 for g in gext):
        raise ConfigError("modes: at least one mode needs gamma_ext > 0")
    if "tune" in p:
        tg = _grid(p["tune"], "tune") if p["tune"].get("points", 2) != 1 else None
        tune = list(tg.values) if tg else [parse_quantity(p["tune"]["start"], "frequency", "tune.start")]
    else:
        tune = [freqs[0]]

    def factory(f1: float) -> cmt.CoupledModeSystem:
        return cmt.CoupledModeSystem.from_normalized([f1, *freqs[1:]], qs, gext, betas)

    try:
        factory(tune[0])
    except (ValueError, rfcore.DomainError) as exc:
        raise ConfigError(str(exc)) from None
    return factory, tune


def cmd_cmt(cfg: RunConfig) -> Output:
    factory, tune = _cmt_factory(cfg.params)
    grid = _grid(cfg.params.get("grid", {"start": "1 GHz", "stop": "100 GHz", "points": 991}))

    def run():
        rows = []
        for spec in cmt.s11_sweep(factory, grid, tune):
            status = ["ok" if ok else "singular" for ok in spec.ok.tolist()]
            rows += _csv_lines(np.full(spec.f_s.size, spec.f1), spec.f_s, spec.magnitude, spec.phase_deg, status)
        return rows

    rows = _numeric(run)
    return Output(("f1_hz", "fs_hz", "mag_s11", "phase_s11_deg", "status"), rows)


def _coupler(block) -> shifter.HybridCoupler:
    check_keys(block, {"amplitude_imbalance", "phase_imbalance", "insertion_loss_excess"}, "coupler")
    return shifter.HybridCoupler(
        parse_quantity(block.get("amplitude_imbalance", "0 dB"), "db", "coupler.amplitude_imbalance"),
        parse_quantity(block.get("phase_imbalance", "0 deg"), "angle", "coupler.phase_imbalance"),
        parse_quantity(block.get("insertion_loss_excess", "0 dB"), "db", "coupler.insertion_loss_excess"),
    )


def cmd_shifter(cfg: RunConfig) -> Output:
    p = cfg.params
    check_keys(p, {"reflector", "coupler", "grid", "band", "stages"}, "config")
    spec = _reflector(p.get("reflector", {}))
    coupler = _coupler(p.get("coupler", {}))
    grid = _grid(p.get("grid", {"start": "21 GHz", "stop": "30 GHz", "points": 10}))
    stages = parse_number(p.get("stages", 1), "stages", integer=True)
    if stages not in (1, 2):
        raise ConfigError("stages: must be 1 or 2")
    band = (grid.start, grid.stop)
    if "band" in p:
        check_keys(p["band"], {"start", "stop"}, "band")
        band = (
            parse_quantity(p["band"].get("start"), "frequency", "band.start"),
            parse_quantity(p["band"].get("stop"), "frequency", "band.stop"),
        )

    def run():
        table = shifter.enumerate_states(spec, coupler, grid)
        if stages == 2:
            table = shifter.StateTable(table.codes, table.f, shifter.cascade_s21(table.s21, table.s21), spec, coupler)
        try:
            m = shifter.band_metrics(table, band)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        cols = np.flatnonzero((table.f >= band[0]) & (table.f <= band[1]))
        fb = table.f[cols]
        summary = {
            "states": len(table),
            "stages": stages,
            "band_hz": list(band),
            "avg_il_db": m.avg_il_db,
            "min_range_deg": m.min_range_deg,
            "max_resolution_deg": m.max_resolution_deg,
            "f_hz": fb.tolist(),
            "range_deg_by_f": [shifter.tuning_range(table, f) for f in fb],
            "resolution_deg_by_f": [shifter.resolution(table, f) for f in fb],
            "median_step_deg_by_f": [shifter.median_step(table, f) for f in fb],
        }
        n_f = table.f.size
        rows = _csv_lines(
            [str(c) for c in np.repeat(table.codes, n_f).tolist()],
            np.tile(table.f, len(table)),
            table.s21.real.ravel(),
            table.s21.imag.ravel(),
            table.il_db.ravel(),
            table.phase_deg.ravel(),
        )
        return rows, summary

    rows, summary = _numeric(run)
    return Output(("code", "f_hz", "re_s21", "im_s21", "il_db", "phase_deg"), rows, summary)


def _array_spec(p) -> tuple[bf.ArraySpec, dict]:
    check_keys(p, {"n_x", "n_y", "spacing", "bits", "il_db", "weights", "steer", "center_freq", "grid"}, "config")
    n_x = parse_number(p.get("n_x", 1), "n_x", integer=True)
    n_y = parse_number(p.get("n_y", 1), "n_y", integer=True)
    bits = parse_number(p.get("bits", "inf"), "bits", allow_inf=True)
    if not math.isinf(bits):
        bits = int(bits)
    steer = p.get("steer", ["0 deg", "0 deg"])
    if not isinstance(steer, list) or len(steer) != 2:
        raise ConfigError("steer: expected [azimuth, elevation]")
    kw = dict(
        n_x=n_x,
        n_y=n_y,
        bits=bits,
        il_db=parse_quantity(p.get("il_db", "0 dB"), "db", "il_db"),
        steer=tuple(parse_quantity(s, "angle", "steer[]") for s in steer),
        center_freq=parse_quantity(p.get("center_freq", "28 GHz"), "frequency", "center_freq"),
    )
    if "spacing" in p:
        kw["spacing"] = parse_quantity(p["spacing"], "length", "spacing")
    if "weights" in p:
        kw["weights"] = np.array([parse_number(w, "weights[]") for w in p["weights"]])
    try:
        spec = bf.ArraySpec(**kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    grid = p.get("grid", {})
    check_keys(grid, {"az", "el"}, "grid")
    if "az" not in grid:
        raise ConfigError("grid.az: missing")
    return spec, grid


def cmd_array(cfg: RunConfig) -> Output:
    spec, grid = _array_spec(cfg.params)
    az = _angles(grid["az"], "grid.az")
    el = _angles(grid["el"], "grid.el") if "el" in grid else np.zeros(1)
    if spec.linear and "el" not in grid:
        build = lambda: bf.linear_pattern(spec, az)  # noqa: E731
    else:
        build = lambda: bf.beam_pattern_3d(spec, az, el)  # noqa: E731

    def run():
        bp = build()
        if bp.gain_db.size < 2:
            raise ConfigError("grid: need at least two angle samples")
        psl = bf.peak_sidelobe(bp)
        main_az, main_el = bp.main_lobe()
        a, e = np.meshgrid(bp.az_grid, bp.el_grid)  # rows follow elevation
        rows = _csv_lines(a.ravel(), e.ravel(), bp.gain_db.ravel())
        return rows, {"peak_sidelobe_db": psl, "main_lobe_az": main_az, "main_lobe_el": main_el, "elements": spec.size}

    rows, summary = _numeric(run)
    return Output(("az_deg", "el_deg", "gain_db"), rows, summary)


def cmd_compare(kind: str | None, as_json: bool) -> Output:
    rows = comparison.load_table(kind)
    if as_json:
        return Output(summary={"columns": list(comparison.COLUMNS), "rows": [r.as_dict() for r in rows]})
    return Output(text=comparison.format_table(rows))


def cmd_verify(checks: list[str] | None, seed: int, perturb: float) -> Output:
    from postres import verify

    try:
        results = verify.run_checks(checks, seed=seed, perturb=perturb)
    except KeyError as exc:
        raise ConfigError(str(exc.args[0])) from None
    lines = [f"{'PASS' if r.passed else 'FAIL'} {r.name} max_err={r.max_err:.3e} tol={r.tol:.0e}" for r in results]
    return Output(
        summary={"checks": [r._asdict() for r in results], "passed": all(r.passed for r in results)},
        text="\n".join(lines) + "\n",
    )


# -- driver -----------------------------------------------------------------------


def _numeric(fn):
    try:
        with np.errstate(invalid="ignore", over="ignore"):
            return fn()
    except (ConfigError, NumericalError):
        raise
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        raise NumericalError(f"{type(exc).__name__}: {exc}") from None


_TABLE_COMMANDS = {
    "reflector": cmd_reflector,
    "bloch": cmd_bloch,
    "cmt": cmd_cmt,
    "shifter": cmd_shifter,
    "array": cmd_array,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="postres", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"postres {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in (*_TABLE_COMMANDS, "compare", "verify"):
        sp = sub.add_parser(name)
        sp.add_argument("--out", type=Path, help="output file (default: stdout)")
        sp.add_argument("--json", action="store_true", help="emit JSON instead of CSV/text")
        if name in _TABLE_COMMANDS:
            sp.add_argument("--config", type=Path, help="JSON config merged over the preset")
            sp.add_argument("--preset", help="named parameter set")
        elif name == "compare":
            sp.add_argument("--type", choices=("active", "passive"), dest="kind")
        else:
            sp.add_argument("--check", action="append", help="run only this check (repeatable)")
            sp.add_argument("--seed", type=int, default=0)
            sp.add_argument("--perturb", type=float, default=0.0, help=argparse.SUPPRESS)
    return ap


def _write(path: Path | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)


def run(args: argparse.Namespace) -> int:
    if args.command == "compare":
        out = cmd_compare(args.kind, args.json)
        _write(args.out, _render_json(out.summary) if args.json else out.text)
        return 0
    if args.command == "verify":
        out = cmd_verify(args.check, args.seed, args.perturb)
        _write(args.out, _render_json(out.summary) if args.json else out.text)
        return 0 if out.summary["passed"] else 1

    try:
        name, params = preset(args.command, args.preset)
    except KeyError as exc:
        raise ConfigError(exc.args[0]) from None
    params = merge(params, load_config(args.config))
    if args.config is not None and args.preset is None:
        name = "custom"
    out = _TABLE_COMMANDS[args.command](RunConfig(args.command, name, params))

    if args.json:
        obj = out.summary if out.summary is not None else {}
        obj = {"version": __version__, "preset": name, **obj}
        if out.summary is None:
            obj["columns"] = list(out.columns)
            obj["rows"] = [line.split(",") for line in out.rows]
        _write(args.out, _render_json(obj))
        return 0
    _write(args.out, _render_csv(out, name))
    if args.out is not None and out.summary is not None:
        summary = {"version": __version__, "preset": name, **out.summary}
        args.out.with_suffix(".json").write_text(_render_json(summary))
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except ConfigError as exc:
        print(f"postres: config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"postres: invalid parameters: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"postres: numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
