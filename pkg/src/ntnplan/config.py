"""Canonical scenario config schema, defaults, and unit conversion.

Config files are flat JSON objects. Gains are accepted in dB, powers in
dBm, and noise density in dBm/Hz; everything is converted to linear once
here so the engine never touches dB again. ``users`` is either an integer
count (positions drawn from the run seed) or an explicit list of [x, y]
or [x, y, z] coordinates in meters.
"""

from __future__ import annotations

import json
import math
from typing import Any

from .errors import ConfigError
from .scenario import Point3, RadioParams, Scenario, generate_users

DEFAULTS: dict[str, Any] = {
    "users": 20,
    "R0_m": 500.0,
    "D0_m": 100.0,
    "cs_pos_m": [-10000.0, 0.0, 1000.0],
    "haps_pos_m": [-5000.0, 100.0, 20000.0],
    "coverage_center_m": [0.0, 0.0, 0.0],
    "uav_altitude_m": 100.0,
    "fc_hz": 2.0e9,
    "c_mps": 3.0e8,
    "alpha": 2.0,
    "eta1": 1.0,
    "eta2": 31.0,
    "psi": 5.0,
    "beta": 0.5,
    "N0_dbm_hz": -174.0,
    "G_cs_db": 43.2,
    "G_uav_db": 0.0,
    "G_user_db": 0.0,
    "P_cs_dbm": 40.0,
    "P_uav_dbm": 20.0,
    "L_tot": 64,
    "BW_hz": 100.0e6,
    "M": 350_000,
    "r0_bps": 1.0e6,
    "mu": 1.0,
    "strict_cross_uav_orthogonality": False,
}


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def linear_to_db(value: float) -> float:
    return 10.0 * math.log10(value)


def default_config() -> dict[str, Any]:
    """Fresh copy of the bundled default configuration."""
    return {k: (list(v) if isinstance(v, list) else v) for k, v in DEFAULTS.items()}


def load_config_file(path: str) -> dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}")
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return raw


def _point(value: Any, field: str) -> Point3:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ConfigError(f"{field} must be a [x, y, z] triple, got {value!r}")
    try:
        coords = [float(c) for c in value]
    except (TypeError, ValueError):
        raise ConfigError(f"{field} components must be numbers, got {value!r}")
    if not all(math.isfinite(c) for c in coords):
        raise ConfigError(f"{field} components must be finite, got {value!r}")
    return Point3(*coords)


def _number(cfg: dict, field: str) -> float:
    value = cfg[field]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{field} must be a number, got {value!r}")
    if not math.isfinite(float(value)):
        raise ConfigError(f"{field} must be finite, got {value!r}")
    return float(value)


def _users(value: Any, R0: float, D0: float, seed: int) -> tuple[Point3, ...]:
    if isinstance(value, bool):
        raise ConfigError(f"users must be a count or a coordinate list, got {value!r}")
    if isinstance(value, int):
        return tuple(generate_users(value, R0, D0, seed))
    if isinstance(value, (list, tuple)):
        points = []
        for i, entry in enumerate(value):
            if not isinstance(entry, (list, tuple)) or len(entry) not in (2, 3):
                raise ConfigError(f"users[{i}] must be [x, y] or [x, y, z], got {entry!r}")
            coords = [float(c) for c in entry]
            if not all(math.isfinite(c) for c in coords):
                raise ConfigError(f"users[{i}] components must be finite, got {entry!r}")
            if len(coords) == 2:
                coords.append(0.0)
            points.append(Point3(*coords))
        return tuple(points)
    raise ConfigError(f"users must be a count or a coordinate list, got {value!r}")


def scenario_from_config(overrides: dict[str, Any] | None = None, seed: int = 0) -> Scenario:
    """Build a Scenario from defaults plus overrides; unknown keys are rejected."""
    overrides = overrides or {}
    unknown = sorted(set(overrides) - set(DEFAULTS))
    if unknown:
        raise ConfigError(f"unknown config fields: {', '.join(unknown)}")
    cfg = default_config()
    cfg.update(overrides)

    R0 = _number(cfg, "R0_m")
    D0 = _number(cfg, "D0_m")
    radio = RadioParams(
        f_c=_number(cfg, "fc_hz"),
        c=_number(cfg, "c_mps"),
        alpha=_number(cfg, "alpha"),
        eta1=_number(cfg, "eta1"),
        eta2=_number(cfg, "eta2"),
        psi=_number(cfg, "psi"),
        beta=_number(cfg, "beta"),
        N0=dbm_to_watts(_number(cfg, "N0_dbm_hz")),
        G_cs=db_to_linear(_number(cfg, "G_cs_db")),
        G_uav=db_to_linear(_number(cfg, "G_uav_db")),
        G_user=db_to_linear(_number(cfg, "G_user_db")),
        mu=_number(cfg, "mu"),
    )

    l_tot = cfg["L_tot"]
    if isinstance(l_tot, bool) or not isinstance(l_tot, int):
        raise ConfigError(f"L_tot must be an integer, got {l_tot!r}")
    m_total = cfg["M"]
    if isinstance(m_total, bool) or not isinstance(m_total, (int, float)) or int(m_total) != m_total:
        raise ConfigError(f"M must be an integer, got {m_total!r}")

    return Scenario(
        users=_users(cfg["users"], R0, D0, seed),
        cs_pos=_point(cfg["cs_pos_m"], "cs_pos_m"),
        haps_pos=_point(cfg["haps_pos_m"], "haps_pos_m"),
        coverage_center=_point(cfg["coverage_center_m"], "coverage_center_m"),
        R0=R0,
        D0=D0,
        uav_altitude=_number(cfg, "uav_altitude_m"),
        radio=radio,
        L_tot=l_tot,
        BW_total=_number(cfg, "BW_hz"),
        P_cs_max=dbm_to_watts(_number(cfg, "P_cs_dbm")),
        P_uav_max=dbm_to_watts(_number(cfg, "P_uav_dbm")),
        M=int(m_total),
        r0_user=_number(cfg, "r0_bps"),
        strict_cross_uav_orthogonality=bool(cfg["strict_cross_uav_orthogonality"]),
    )
