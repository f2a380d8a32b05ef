"""Run configuration: flat key=value preset files with validation.

The format is deliberately plain text so presets stay diffable: one
`key = value` pair per line, `#` starts a comment, no sections. Unknown
keys are rejected with the offending line number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class ConfigError(ValueError):
    """Bad config file or invalid parameter combination."""


LN2 = math.log(2.0)

SCENARIOS = ("two_bubble", "foam", "custom")
MODELS = ("modified", "classic")
BOUNDARIES = ("periodic", "mirror")
STOP_RULES = ("quiescent", "first_rupture", "steps")
OUTPUT_FORMATS = ("csv", "pgm", "vtk")


def _parse_bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError("expected a boolean")


def _parse_formats(text: str) -> tuple:
    out = tuple(t.strip() for t in text.split(",") if t.strip())
    for fmt in out:
        if fmt not in OUTPUT_FORMATS:
            raise ValueError("unknown output format %r" % fmt)
    return out


@dataclass
class SimulationConfig:
    scenario: str
    nx: int
    ny: int
    G: float = -4.5
    tau_melt: float = 1.0
    tau_gas: float = 1.0
    rho_melt: float = 1.495
    rho_gas: float = 0.253
    rho_background: float = 0.05
    nucleation_count: int = 6
    nucleation_seed: int = 42
    min_spacing: float = 60.0
    nucleation_radius: int = 0
    growth_A: float = 0.0
    growth_dn_dt: float = 0.0
    growth_budget: float = 0.0
    dx: float = 1e-4          # m per cell
    dt: float = 1e-5          # s per step
    rho_melt_phys: float = 2.7    # g/cm^3
    rho_gas_phys: float = 0.089   # g/cm^3
    boundary: str = "mirror"
    barrier_r_z: int = 3
    barrier_eps_p: float = 1e-3
    model: str = "modified"
    output_cadence: int = 0   # 0 writes only the final snapshot
    output_formats: tuple = ("csv",)
    stop_rule: str = "quiescent"
    max_steps: int = 100000
    quiescence_u: float = 1e-3
    bubble_diameter_mm: float = 8.0
    bubble_gap_cells: float = 6.0
    approach_mm_s: float = 3.0
    approach_force: float = 0.0
    exclude_edge_bubbles: bool = True
    histogram_bin_mm: float = 0.5

    def validate(self) -> "SimulationConfig":
        if self.scenario not in SCENARIOS:
            raise ConfigError("scenario must be one of %s" % (SCENARIOS,))
        if self.model not in MODELS:
            raise ConfigError("model must be one of %s" % (MODELS,))
        if self.boundary not in BOUNDARIES:
            raise ConfigError("boundary must be one of %s" % (BOUNDARIES,))
        if self.stop_rule not in STOP_RULES:
            raise ConfigError("stop_rule must be one of %s" % (STOP_RULES,))
        if self.nx < 8 or self.ny < 8:
            raise ConfigError("grid too small: nx and ny must be at least 8")
        for name in ("tau_melt", "tau_gas"):
            if getattr(self, name) <= 0.5:
                raise ConfigError("%s must exceed 0.5" % name)
        for name in ("rho_melt", "rho_gas", "rho_background", "dx", "dt",
                     "rho_melt_phys", "rho_gas_phys", "barrier_eps_p",
                     "bubble_diameter_mm", "histogram_bin_mm"):
            if getattr(self, name) <= 0:
                raise ConfigError("%s must be positive" % name)
        if self.G <= -4.0:
            # separation regime: lattice densities must straddle ln 2
            if not self.rho_melt > LN2:
                raise ConfigError(
                    "rho_melt must exceed ln 2 when G <= -4")
            if not self.rho_gas < LN2:
                raise ConfigError(
                    "rho_gas must be below ln 2 when G <= -4")
        if self.rho_gas >= self.rho_melt:
            raise ConfigError("rho_melt must exceed rho_gas")
        if self.barrier_r_z < 1:
            raise ConfigError("barrier_r_z must be at least 1")
        if self.nucleation_count < 1 and self.scenario == "foam":
            raise ConfigError("nucleation_count must be at least 1")
        if self.nucleation_radius < 0:
            raise ConfigError("nucleation_radius must be nonnegative")
        if self.nucleation_radius > 0 \
                and self.min_spacing <= 2 * self.nucleation_radius:
            raise ConfigError("min_spacing must exceed the seed diameter")
        if self.max_steps < 0:
            raise ConfigError("max_steps must be nonnegative")
        if min(self.growth_A, self.growth_dn_dt, self.growth_budget) < 0:
            raise ConfigError("growth parameters must be nonnegative")
        if self.approach_force < 0:
            raise ConfigError("approach_force must be nonnegative")
        if self.output_cadence < 0:
            raise ConfigError("output_cadence must be nonnegative")
        return self


_PARSERS = {
    "scenario": str, "nx": int, "ny": int, "G": float,
    "tau_melt": float, "tau_gas": float,
    "rho_melt": float, "rho_gas": float, "rho_background": float,
    "nucleation_count": int, "nucleation_seed": int, "min_spacing": float,
    "nucleation_radius": int,
    "growth_A": float, "growth_dn_dt": float, "growth_budget": float,
    "dx": float, "dt": float,
    "rho_melt_phys": float, "rho_gas_phys": float,
    "boundary": str, "barrier_r_z": int, "barrier_eps_p": float,
    "model": str, "output_cadence": int, "output_formats": _parse_formats,
    "stop_rule": str, "max_steps": int, "quiescence_u": float,
    "bubble_diameter_mm": float, "bubble_gap_cells": float,
    "approach_mm_s": float, "approach_force": float,
    "exclude_edge_bubbles": _parse_bool,
    "histogram_bin_mm": float,
}

_REQUIRED = ("scenario", "nx", "ny")


def load_config(path) -> SimulationConfig:
    """Parse and validate a preset file. Errors carry the line number."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    values: dict = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("%s:%d: expected 'key = value'" % (path, lineno))
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _PARSERS:
            raise ConfigError("%s:%d: unknown key %r" % (path, lineno, key))
        if key in values:
            raise ConfigError("%s:%d: duplicate key %r" % (path, lineno, key))
        try:
            values[key] = _PARSERS[key](val)
        except ValueError as exc:
            raise ConfigError("%s:%d: bad value for %s: %s"
                              % (path, lineno, key, exc)) from exc
    if not values:
        raise ConfigError("%s: empty config" % path)
    missing = [k for k in _REQUIRED if k not in values]
    if missing:
        raise ConfigError("%s: missing required keys: %s"
                          % (path, ", ".join(missing)))
    return SimulationConfig(**values).validate()
