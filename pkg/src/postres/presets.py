"""Named parameter sets for each CLI command, written in config syntax."""

from __future__ import annotations

from copy import deepcopy

from postres.beamforming import _TECHNOLOGIES

_REFLECTOR = {
    "inductance": "300 pH",
    "quality": 5,
    "c_min": "100 fF",
    "c_max": "450 fF",
    "bits": 5,
    "z0": "50 ohm",
    "grid": {"start": "1 GHz", "stop": "40 GHz", "points": 391},
}
_EXTENSION = {"l4": "300 pH", "quality": 5, "r_on": "2 ohm", "c_off_switch": "40 fF"}
_SHIFTER_GRID = {"start": "21 GHz", "stop": "30 GHz", "points": 10}

_BLOCH = {
    "inductance": "350 pH",
    "quality": 3,
    "cells": 4,
    "capacitance": {"start": "100 fF", "stop": "450 fF", "points": 8},
    "grid": {"start": "1 GHz", "stop": "60 GHz", "points": 591},
}

_CMT = {
    "modes": [
        {"freq": "18 GHz", "quality": 5, "gamma_ext": "60 GHz"},
        {"freq": "15 GHz", "quality": 5, "gamma_ext": "0 GHz"},
        {"freq": "35 GHz", "quality": 5, "gamma_ext": "0 GHz"},
    ],
    "couplings": [
        {"modes": [0, 1], "magnitude": 0.1, "phase": "45 deg"},
        {"modes": [1, 2], "magnitude": 0.2, "phase": "30 deg"},
    ],
    "tune": {"start": "18 GHz", "stop": "55 GHz", "points": 8},
    "grid": {"start": "1 GHz", "stop": "100 GHz", "points": 991},
}

_ANGLES_3D = {
    "az": {"start": "-90 deg", "stop": "90 deg", "step": "0.5 deg"},
    "el": {"start": "-90 deg", "stop": "90 deg", "step": "0.5 deg"},
}


def _array(n_x, n_y, bits, il, steer, grid):
    return {
        "n_x": n_x,
        "n_y": n_y,
        "bits": bits,
        "il_db": f"{il} dB",
        "steer": [f"{steer[0]} deg", f"{steer[1]} deg"],
        "center_freq": "28 GHz",
        "grid": grid,
    }


def _build() -> dict[str, dict[str, dict]]:
    reflector = {
        "fig3": _REFLECTOR,
        "figS2q5": _REFLECTOR,
        "figS2q10": {**_REFLECTOR, "quality": 10},
        "lossless": {**_REFLECTOR, "quality": "inf"},
        "ext": {**_REFLECTOR, "extension": _EXTENSION},
    }
    shifter = {
        "base": {"reflector": {k: v for k, v in _REFLECTOR.items() if k != "grid"}, "grid": _SHIFTER_GRID},
        "ext": {
            "reflector": {**{k: v for k, v in _REFLECTOR.items() if k != "grid"}, "extension": _EXTENSION},
            "grid": _SHIFTER_GRID,
        },
    }
    bloch = {
        "figS3": _BLOCH,
        "figS4": {**_BLOCH, "quality": 10},
        "lossless": {
            "inductance": "350 pH",
            "quality": "inf",
            "half_cell": True,
            "capacitance": "200 fF",
            "grid": {"start": "1 GHz", "stop": "60 GHz", "points": 591},
        },
    }
    cmt = {
        "figS5": _CMT,
        "lossless1": {
            "modes": [{"freq": "30 GHz", "quality": "inf", "gamma_ext": "5 GHz"}],
            "couplings": [],
            "grid": {"start": "1 GHz", "stop": "100 GHz", "points": 991},
        },
    }
    line = {"az": {"start": "-90 deg", "stop": "90 deg", "step": "0.05 deg"}}
    array = {
        "single": _array(1, 1, "inf", 0, (0, 0), _ANGLES_3D),
        "uniform50": _array(50, 1, "inf", 0, (0, 0), {"az": {"start": "-90 deg", "stop": "90 deg", "step": "0.01 deg"}}),
    }
    for name, per_mm2, side, bits, il in _TECHNOLOGIES:
        array[f"fig2b:{name}"] = _array(per_mm2, 1, bits, il, (25, 0), line)
        array[f"figS6:{name}"] = _array(side, side, bits, il, (20, 20), _ANGLES_3D)
    array["fig2b"] = array["fig2b:postres"]
    for n in (30, 60):
        array[f"figS7:{n}"] = _array(n, n, 10, 4.9, (20, 20), _ANGLES_3D)
    return {"reflector": reflector, "shifter": shifter, "bloch": bloch, "cmt": cmt, "array": array}


PRESETS = _build()
DEFAULT_PRESET = {"reflector": "fig3", "shifter": "base", "bloch": "figS3", "cmt": "figS5", "array": "figS6:postres"}


def preset(command: str, name: str | None) -> tuple[str, dict]:
    """(resolved name, deep copy of the preset config) for ``command``."""
    table = PRESETS[command]
    name = DEFAULT_PRESET[command] if name is None else name
    if name not in table:
        raise KeyError(f"unknown preset {name!r} for {command}; choose from {', '.join(sorted(table))}")
    return name, deepcopy(table[name])
