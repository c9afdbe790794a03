"""Run configuration: named TOML blocks with strict key checking.

A run configuration has four blocks (``crystal``, ``pump``, ``grid``,
``analysis``); every key has a default, file values override defaults and
command-line flags override the file.  Unknown keys anywhere are errors.
The effective merged configuration is echoed into every output header so a
result file always records how it was produced.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml

from .dispersion import (
    DispersionError,
    SellmeierSet,
    get_sellmeier,
    sellmeier_from_dict,
    solve_phase_matching_angle,
)
from .spectra import CrystalConfig, PumpPulse, wavelength_grid


class ConfigError(ValueError):
    """Invalid run configuration (unknown key, bad type or bad value)."""


DEFAULTS: dict[str, dict[str, Any]] = {
    "crystal": {
        "sellmeier": "bbo-default",
        "length_mm": 5.0,
        "axis_angle_deg": 41.4625,
    },
    "pump": {
        "lambda0_nm": 404.7,
        "tau_fs": 110.0,
        "energy_scale": None,
    },
    "grid": {
        "lambda1_min_nm": 800.0,
        "lambda1_max_nm": 822.0,
        "step_nm": 0.02,
        "map_min_nm": 801.0,
        "map_max_nm": 817.0,
        "map_points": 801,
    },
    "analysis": {
        "min_prominence": 0.1,
        "convolve": False,
        "convolve_fwhm_nm": 0.15,
        "fit_bracket_deg": [41.0, 42.0],
        "weighted_fit": True,
    },
}


def _merge_block(name: str, overrides: dict) -> dict:
    merged = dict(DEFAULTS[name])
    unknown = set(overrides) - set(merged)
    if unknown:
        raise ConfigError(f"unknown key(s) in [{name}]: {sorted(unknown)}")
    merged.update(overrides)
    return merged


@dataclass(frozen=True)
class RunConfig:
    crystal: dict
    pump: dict
    grid: dict
    analysis: dict
    sellmeier: SellmeierSet = field(repr=False, default=None)

    @staticmethod
    def from_mapping(mapping: dict) -> "RunConfig":
        unknown = set(mapping) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config block(s): {sorted(unknown)}")
        blocks = {name: _merge_block(name, mapping.get(name, {})) for name in DEFAULTS}

        sel = blocks["crystal"]["sellmeier"]
        try:
            sset = sellmeier_from_dict(sel) if isinstance(sel, dict) else get_sellmeier(str(sel))
        except DispersionError as exc:
            raise ConfigError(str(exc)) from exc

        angle = blocks["crystal"]["axis_angle_deg"]
        if not (angle == "solve" or isinstance(angle, (int, float))):
            raise ConfigError("crystal.axis_angle_deg must be a number in degrees or 'solve'")
        if isinstance(angle, (int, float)) and not 0.0 < float(angle) < 90.0:
            raise ConfigError("crystal.axis_angle_deg must lie strictly inside (0, 90)")

        for key in ("lambda0_nm", "tau_fs"):
            if blocks["pump"][key] is None or float(blocks["pump"][key]) <= 0.0:
                raise ConfigError(f"pump.{key} must be positive")
        prom = float(blocks["analysis"]["min_prominence"])
        if not 0.0 < prom < 1.0:
            raise ConfigError("analysis.min_prominence must lie strictly between 0 and 1")
        bracket = blocks["analysis"]["fit_bracket_deg"]
        if len(bracket) != 2 or not float(bracket[0]) < float(bracket[1]):
            raise ConfigError("analysis.fit_bracket_deg must be an increasing [low, high] pair")
        return RunConfig(blocks["crystal"], blocks["pump"], blocks["grid"], blocks["analysis"], sset)

    # --- resolved physics objects --------------------------------------

    def pump_pulse(self) -> PumpPulse:
        energy = self.pump["energy_scale"]
        return PumpPulse(
            lambda0_nm=float(self.pump["lambda0_nm"]),
            tau_fs=float(self.pump["tau_fs"]),
            energy_scale=None if energy is None else float(energy),
        )

    def axis_angle_rad(self) -> float:
        angle = self.crystal["axis_angle_deg"]
        if angle == "solve":
            return solve_phase_matching_angle(float(self.pump["lambda0_nm"]), self.sellmeier)
        return math.radians(float(angle))

    def crystal_config(self) -> CrystalConfig:
        return CrystalConfig(
            length_mm=float(self.crystal["length_mm"]),
            phi_rad=self.axis_angle_rad(),
            sellmeier=self.sellmeier,
        )

    def spectrum_grid(self):
        g = self.grid
        return wavelength_grid(float(g["lambda1_min_nm"]), float(g["lambda1_max_nm"]), float(g["step_nm"]))

    def map_axes(self):
        import numpy as np

        g = self.grid
        axis = np.linspace(float(g["map_min_nm"]), float(g["map_max_nm"]), int(g["map_points"]))
        return axis, axis.copy()

    def convolve_fwhm(self) -> float | None:
        if self.analysis["convolve"]:
            return float(self.analysis["convolve_fwhm_nm"])
        return None

    def header_meta(self) -> dict:
        """Flat key=value view of the effective config for output headers."""
        out: dict[str, Any] = {}
        for block_name, block in (
            ("crystal", self.crystal),
            ("pump", self.pump),
            ("grid", self.grid),
            ("analysis", self.analysis),
        ):
            for key, val in block.items():
                if isinstance(val, dict):
                    val = val.get("name", "inline")
                if isinstance(val, list):
                    val = ":".join(str(v) for v in val)
                out[f"{block_name}.{key}"] = val
        return out


def load_run_config(path: str | None, overrides: dict | None = None) -> RunConfig:
    """Load a TOML run configuration, or the built-in defaults when ``path``
    is None, then apply flat ``{'block.key': value}`` overrides."""
    mapping: dict = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                mapping = _toml.load(fh)
        except OSError:
            raise
        except _toml.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    if overrides:
        for dotted, value in overrides.items():
            if value is None:
                continue
            block, _, key = dotted.partition(".")
            mapping.setdefault(block, {})
            if not isinstance(mapping[block], dict):
                raise ConfigError(f"config block [{block}] is not a table")
            mapping[block][key] = value
    return RunConfig.from_mapping(mapping)
