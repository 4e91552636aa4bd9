"""Scenario configuration files.

A config is a JSON document::

    {
      "network": "net.json" | {"preset": "boston-like"},
      "fleet": {"private": 500, "autonomous": 300, "ride_hailing": 200,
                "occupancy": 2, "departure_window_min": [0, 120]},
      "modes": {"private": {"xi1": 0.4, "xi2": 0.4, "xi3": 0.2,
                            "epsilon_usd_per_min": 0.27, "T_w_min": 2, "T_d_h": 24},
                "autonomous": {...}, "ride_hailing": {...}},
      "sim": {"monitor_half_width_s": 60, "L": 7, "seed": 0, "workers": 1},
      "strategy": "equity",
      "tolerance": 0.001
    }

Every section is optional; missing values fall back to the reference
settings (1,000 vehicles, the boston-like preset, Table-1 style modes).
A relative network path is resolved against the config file's directory.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from .equity import MODES, TABLE1, ModeError, ModeParams, ModeTable
from .network import NetworkError, RoadNetwork, validate_network
from .paths import DEFAULT_L
from .planner import STRATEGIES
from .sim import ConfigError, Scenario, ScenarioConfig, generate_scenario
from .synthetic import boston_like, grid_network, line_network

PRESETS = {"boston-like": boston_like, "grid": grid_network, "line": line_network}


class UnreachableError(ConfigError):
    """The network loads but some origin cannot reach some destination."""


@dataclass(frozen=True)
class LoadedConfig:
    raw: dict
    network: RoadNetwork
    scenario_config: ScenarioConfig
    seed: int
    strategy: str
    tolerance: float

    def scenario(self, seed: int | None = None) -> Scenario:
        return generate_scenario(self.network, self.scenario_config, self.seed if seed is None else seed)

    def digest(self, seed: int | None = None) -> str:
        doc = {
            "config": self.raw,
            "network": self.network.to_dict(),
            "seed": self.seed if seed is None else seed,
        }
        canon = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _section(doc: dict, name: str) -> dict:
    sec = doc.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"{name}: expected an object")
    return sec


def _number(sec: dict, key: str, where: str, default, kind=float):
    val = sec.get(key, default)
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{where}.{key}: expected a number, got {val!r}")
    if kind is int:
        if val != int(val):
            raise ConfigError(f"{where}.{key}: expected an integer, got {val!r}")
        return int(val)
    return float(val)


def parse_modes(sec: dict) -> ModeTable:
    params = {}
    for mode in MODES:
        base = TABLE1[mode]
        entry = sec.get(mode, {})
        if not isinstance(entry, dict):
            raise ConfigError(f"modes.{mode}: expected an object")
        where = f"modes.{mode}"
        try:
            params[mode] = ModeParams(
                xi1=_number(entry, "xi1", where, base.xi1),
                xi2=_number(entry, "xi2", where, base.xi2),
                xi3=_number(entry, "xi3", where, base.xi3),
                epsilon=_number(entry, "epsilon_usd_per_min", where, base.epsilon),
                T_w=_number(entry, "T_w_min", where, base.T_w),
                T_d=_number(entry, "T_d_h", where, base.T_d),
                occupancy=base.occupancy,
            )
        except ModeError as exc:
            raise ConfigError(f"{where}: {exc}") from None
    return ModeTable(**params)


def load_network(spec, base_dir: Path) -> RoadNetwork:
    if isinstance(spec, dict):
        name = spec.get("preset", "boston-like")
        if name not in PRESETS:
            raise ConfigError(f"network.preset: unknown preset {name!r}")
        kwargs = {k: v for k, v in spec.items() if k != "preset"}
        try:
            return PRESETS[name](**kwargs)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"network: {exc}") from None
    if not isinstance(spec, str):
        raise ConfigError("network: expected a path or a preset object")
    path = Path(spec)
    if not path.is_absolute():
        path = base_dir / path
    if not path.exists():
        raise ConfigError(f"network: file not found: {path}")
    try:
        return RoadNetwork.load(path)
    except NetworkError as exc:
        raise ConfigError(f"network: {exc}") from None


def check_network(network: RoadNetwork) -> None:
    findings = validate_network(network)
    if not findings:
        return
    text = "; ".join(str(f) for f in findings)
    if all(f.kind == "unreachable" for f in findings):
        raise UnreachableError(text)
    raise ConfigError(f"network: {text}")


def config_from_dict(doc: dict, base_dir: Path = Path(".")) -> LoadedConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config: expected a JSON object")
    network = load_network(doc.get("network", {"preset": "boston-like"}), base_dir)
    check_network(network)

    fleet = _section(doc, "fleet")
    counts = tuple((m, _number(fleet, m, "fleet", dict(ScenarioConfig().counts)[m], int)) for m in MODES)
    window = fleet.get("departure_window_min", [0.0, 120.0])
    if not (isinstance(window, list) and len(window) == 2 and all(isinstance(x, (int, float)) for x in window)):
        raise ConfigError("fleet.departure_window_min: expected [start, end]")
    modes = parse_modes(_section(doc, "modes"))

    sim = _section(doc, "sim")
    dt_s = _number(sim, "monitor_half_width_s", "sim", 60.0)
    strategy = doc.get("strategy", "equity")
    if strategy not in STRATEGIES:
        raise ConfigError(f"strategy: expected one of {'|'.join(STRATEGIES)}, got {strategy!r}")
    tolerance = _number(doc, "tolerance", "config", 1e-3)
    if tolerance < 0:
        raise ConfigError("tolerance: must be >= 0")
    seed = _number(sim, "seed", "sim", 0, int)
    if seed < 0:
        raise ConfigError("sim.seed: must be a non-negative integer")

    sc = ScenarioConfig(
        counts=counts,
        occupancy=_number(fleet, "occupancy", "fleet", 2, int),
        window=(float(window[0]), float(window[1])),
        modes=modes,
        dt=dt_s / 60.0,
        L=_number(sim, "L", "sim", DEFAULT_L, int),
        workers=_number(sim, "workers", "sim", 1, int),
    )
    return LoadedConfig(doc, network, sc, seed, strategy, tolerance)


def load_config(path: str | Path) -> LoadedConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return config_from_dict(doc, path.parent)
