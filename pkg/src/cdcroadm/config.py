"""YAML run configuration: parsing, reference resolution and validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import yaml

from .devices import AttenuatorSpec, CouplerSpec, EdfaSpec, McsSpec, TransceiverSpec, WssSpec
from .errors import ConfigError, ConfigParseError, RoadmError, UnresolvedReferenceError
from .impairments import PenaltyModel
from .network import Testbed
from .node import NodeArchitecture, NodeConfig, build_node
from .spectrum import Band, SignalClass

DEFAULT_CONFIG = "defaults.yaml"


@dataclass
class AddDropRow:
    label: str
    node: str


@dataclass
class SweepConfig:
    point: str = "A"
    powers: tuple = (0, 1, 2, 3, 4, 5)
    band: str = "C"
    position: str = "middle"
    subchannel: int = 2
    scenario: int = 1


@dataclass
class RunConfig:
    bands: dict
    signals: dict
    devices: dict
    nodes: dict
    testbed: Testbed
    penalty: PenaltyModel
    plan_bands: tuple = ("C", "L")
    plan_signals: tuple = ()
    adddrop_rows: tuple = ()
    adddrop_clients: tuple = (4, 8, 12, 16, 24)
    network_nodes: int = 10
    sweep: SweepConfig = field(default_factory=SweepConfig)
    budget_input: float = 5.0
    budget_inline_gain: float = 5.0
    seed: int = 0
    source: str = ""


def _lookup(table: dict, kind: str, name):
    if name not in table:
        raise UnresolvedReferenceError(kind, name)
    return table[name]


def _get(section: dict, key: str, where: str, default=None, required=False):
    if key in section:
        return section[key]
    if required:
        raise ConfigError(f"{where}: missing required key {key!r}")
    return default


def _bands_of(entry, where, bands):
    names = frozenset(entry.get("bands", ["C", "L"]))
    for n in names:
        _lookup(bands, f"band (in {where})", n)
    return names


def _parse_devices(raw: dict, bands: dict) -> dict:
    raw = raw or {}
    dev = {k: {} for k in ("wss", "mcs", "edfa", "coupler", "attenuator", "transceiver")}
    unknown = set(raw) - set(dev)
    if unknown:
        raise ConfigError(f"devices: unknown device kind(s) {sorted(unknown)}")
    for name, e in (raw.get("wss") or {}).items():
        where = f"devices.wss.{name}"
        kw = {k: e[k] for k in ("loss_min", "loss_max", "loss_avg_low", "loss_avg_high") if k in e}
        dev["wss"][name] = WssSpec(int(_get(e, "ports", where, required=True)),
                                   _bands_of(e, where, bands), name=name, **kw)
    for name, e in (raw.get("mcs") or {}).items():
        where = f"devices.mcs.{name}"
        dev["mcs"][name] = McsSpec(
            int(_get(e, "degree_ports", where, 16)), int(_get(e, "client_ports", where, required=True)),
            float(_get(e, "excess_loss", where, 2.5)), float(_get(e, "min_isolation", where, 45.0)),
            _bands_of(e, where, bands), float(_get(e, "isolation_ripple", where, 0.0)), name=name,
        )
    for name, e in (raw.get("edfa") or {}).items():
        where = f"devices.edfa.{name}"
        band = _get(e, "band", where, required=True)
        _lookup(bands, f"band (in {where})", band)
        dev["edfa"][name] = EdfaSpec(band, float(_get(e, "gain", where, 20.0)),
                                     float(_get(e, "max_output", where, 20.0)), name=name)
    for name, e in (raw.get("coupler") or {}).items():
        dev["coupler"][name] = CouplerSpec(e.get("kind", "band-mux"), float(e.get("loss", 0.5)), name=name)
    for name, e in (raw.get("attenuator") or {}).items():
        dev["attenuator"][name] = AttenuatorSpec(float(e.get("loss", 20.0)), name=name)
    for name, e in (raw.get("transceiver") or {}).items():
        where = f"devices.transceiver.{name}"
        dev["transceiver"][name] = TransceiverSpec(
            _bands_of(e, where, bands), float(_get(e, "fec_threshold_q", where, 5.7)),
            float(_get(e, "loopback_margin", where, 4.0)),
            float(_get(e, "sensitivity_min", where, -20.0)),
            float(_get(e, "sensitivity_max", where, 5.0)), name=name,
        )
    return dev


def parse_config(data: dict, source: str = "<config>") -> RunConfig:
    """Build and validate a RunConfig from an already-parsed mapping."""
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a mapping")
    try:
        bands = {
            name: Band(name, float(e["low_thz"]), float(e["high_thz"]))
            for name, e in (data.get("bands") or {}).items()
        }
    except KeyError as exc:
        raise ConfigError(f"bands: missing {exc.args[0]!r}") from None
    names = sorted(bands)
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            if bands[a].overlaps(bands[b]):
                raise ConfigError(f"bands {a} and {b} overlap")

    signals = {}
    for name, e in (data.get("signals") or {}).items():
        where = f"signals.{name}"
        signals[name] = SignalClass(
            name, float(_get(e, "bit_rate", where, required=True)), e.get("modulation", "DP-16QAM"),
            float(_get(e, "baud_rate", where, required=True)), float(_get(e, "spacing", where, required=True)),
            int(e.get("subcarriers", 1)), float(e.get("subcarrier_spacing", 0.0)),
        )

    dev = _parse_devices(data.get("devices"), bands)

    nodes = {}
    for name, e in (data.get("nodes") or {}).items():
        where = f"nodes.{name}"
        try:
            arch = NodeArchitecture(_get(e, "architecture", where, required=True))
        except ValueError:
            raise ConfigError(f"{where}: unknown architecture {e['architecture']!r}") from None
        cfg = NodeConfig(
            arch, int(_get(e, "degrees", where, required=True)),
            _lookup(dev["wss"], "wss", _get(e, "wss", where, required=True)),
            _lookup(dev["mcs"], "mcs", _get(e, "mcs", where, required=True)),
            int(e.get("channels_per_degree", 96)), e.get("mcs_count_override"), name=name,
        )
        build_node(cfg)  # surfaces port-budget violations at load time
        nodes[name] = cfg

    plan = data.get("plan") or {}
    plan_bands = tuple(plan.get("bands", names))
    for b in plan_bands:
        _lookup(bands, "band", b)
    plan_signals = tuple(plan.get("signals", list(signals)))
    for s in plan_signals:
        _lookup(signals, "signal", s)

    ad = data.get("adddrop") or {}
    rows = []
    for r in ad.get("rows", []):
        _lookup(nodes, "node", r["node"])
        rows.append(AddDropRow(r.get("label", r["node"]), r["node"]))

    seed = int(data.get("seed", 0))
    tb_raw = data.get("testbed") or {}
    tb_kw = {"seed": seed}
    refs = {"cl_wss": "wss", "c_wss": "wss", "mcs": "mcs", "c_edfa": "edfa", "l_edfa": "edfa",
            "coupler": "coupler", "attenuator": "attenuator",
            "c_transceiver": "transceiver", "l_transceiver": "transceiver"}
    for key, kind in refs.items():
        if key in tb_raw:
            tb_kw[key] = _lookup(dev[kind], kind, tb_raw[key])
    if "signal" in tb_raw:
        tb_kw["signal"] = _lookup(signals, "signal", tb_raw["signal"])
    if "power_points" in tb_raw:
        tb_kw["power_points"] = tuple(sorted((k, float(v)) for k, v in tb_raw["power_points"].items()))
    if {"C", "L"} <= set(bands):
        tb_kw["bands"] = (("C", bands["C"]), ("L", bands["L"]))
    testbed = Testbed(**tb_kw)

    pen = data.get("penalty") or {}
    penalty = PenaltyModel(
        float(pen.get("first_span", 1.5)), float(pen.get("extra_span", 1.0)),
        float(pen.get("crosstalk_coefficient", 2.0)), float(pen.get("rolloff", 0.5)),
        float(pen.get("signal_floor", -60.0)),
        {b: (float(v[0]), float(v[1])) for b, v in (pen.get("per_band") or {}).items()},
    )

    sw = data.get("sweep") or {}
    sweep = SweepConfig(
        sw.get("point", "A"), tuple(float(p) for p in sw.get("powers", (0, 1, 2, 3, 4, 5))),
        sw.get("band", "C"), sw.get("position", "middle"), int(sw.get("subchannel", 2)),
        int(sw.get("scenario", 1)),
    )
    bud = data.get("budget") or {}
    return RunConfig(
        bands=bands, signals=signals, devices=dev, nodes=nodes, testbed=testbed, penalty=penalty,
        plan_bands=plan_bands, plan_signals=plan_signals, adddrop_rows=tuple(rows),
        adddrop_clients=tuple(int(c) for c in ad.get("clients", (4, 8, 12, 16, 24))),
        network_nodes=int(ad.get("network_nodes", 10)), sweep=sweep,
        budget_input=float(bud.get("input_power", 5.0)),
        budget_inline_gain=float(bud.get("inline_gain", 5.0)), seed=seed, source=source,
    )


def read_config_text(text: str, source: str = "<config>") -> dict:
    try:
        return yaml.safe_load(text) or {}
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        raise ConfigParseError(f"{source}: {where}: {exc.problem}") from None
    except yaml.YAMLError as exc:
        raise ConfigParseError(f"{source}: {exc}") from None


def default_config_text() -> str:
    return resources.files("cdcroadm.data").joinpath(DEFAULT_CONFIG).read_text()


def load_config(path: Optional[str] = None, seed: Optional[int] = None) -> RunConfig:
    """Load ``path`` (or the bundled defaults) into a validated RunConfig."""
    if path is None:
        text, source = default_config_text(), DEFAULT_CONFIG
    else:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {path}")
        text, source = p.read_text(), str(path)
    data = read_config_text(text, source)
    if seed is not None:
        data["seed"] = seed
    try:
        return parse_config(data, source)
    except (TypeError, AttributeError, ValueError) as exc:
        if isinstance(exc, RoadmError):
            raise
        raise ConfigError(f"{source}: malformed entry: {exc}") from None
