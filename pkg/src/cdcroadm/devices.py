"""Parametric device models and switch state for WSS, MCS, EDFA and friends."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Hashable, Optional

from .errors import (
    BandUnsupportedError,
    ClientBusyError,
    ContentionError,
    InvalidArgumentError,
)
from .spectrum import DEFAULT_BANDS


def _check_freq(freq, bands_supported, bands):
    bands = bands or DEFAULT_BANDS
    for name in sorted(bands_supported):
        band = bands.get(name)
        if band is not None and band.contains(freq):
            return band
    raise BandUnsupportedError(
        f"{freq:.4f} THz is outside the supported bands {sorted(bands_supported)}"
    )


@dataclass(frozen=True)
class WssSpec:
    port_count: int
    bands_supported: frozenset = frozenset({"C", "L"})
    loss_min: float = 5.1
    loss_max: float = 6.7
    loss_avg_low: float = 5.5
    loss_avg_high: float = 6.1
    name: str = "wss"

    def __post_init__(self):
        object.__setattr__(self, "bands_supported", frozenset(self.bands_supported))
        if self.port_count < 2:
            raise InvalidArgumentError(f"{self.name}: a WSS needs at least 2 service ports")
        if not self.loss_min <= self.loss_avg_low <= self.loss_avg_high <= self.loss_max:
            raise InvalidArgumentError(f"{self.name}: loss bounds must satisfy min <= avg <= max")

    @property
    def loss_mode(self) -> float:
        return 0.5 * (self.loss_avg_low + self.loss_avg_high)


@dataclass(frozen=True)
class McsSpec:
    degree_ports: int = 16
    client_ports: int = 8
    excess_loss: float = 2.5
    min_cumulative_isolation: float = 45.0
    bands_supported: frozenset = frozenset({"C", "L"})
    isolation_ripple: float = 0.0
    name: str = "mcs"

    def __post_init__(self):
        object.__setattr__(self, "bands_supported", frozenset(self.bands_supported))
        if self.client_ports < 1 or self.degree_ports < 1:
            raise InvalidArgumentError(f"{self.name}: port counts must be positive")
        if self.min_cumulative_isolation <= 0:
            raise InvalidArgumentError(f"{self.name}: isolation must be positive")
        if self.isolation_ripple < 0 or self.excess_loss < 0:
            raise InvalidArgumentError(f"{self.name}: ripple and excess loss must be >= 0")

    @property
    def intrinsic_loss(self) -> float:
        # 1:N power split
        return 10 * math.log10(self.client_ports)


@dataclass(frozen=True)
class EdfaSpec:
    band: str
    gain: float = 20.0
    max_output_power: float = 20.0
    name: str = "edfa"

    def __post_init__(self):
        if not isinstance(self.band, str):
            raise InvalidArgumentError("an EDFA amplifies exactly one band")


@dataclass(frozen=True)
class CouplerSpec:
    kind: str = "band-mux"
    loss_per_pass: float = 0.5
    name: str = "wdm-coupler"

    def __post_init__(self):
        if self.loss_per_pass < 0:
            raise InvalidArgumentError("coupler loss must be >= 0")


@dataclass(frozen=True)
class AttenuatorSpec:
    loss: float = 20.0
    name: str = "attenuator"

    def __post_init__(self):
        if self.loss < 0:
            raise InvalidArgumentError("attenuation must be >= 0")


@dataclass(frozen=True)
class TransceiverSpec:
    bands_supported: frozenset = frozenset({"C"})
    fec_threshold_q: float = 5.7
    loopback_margin: float = 4.0
    sensitivity_min: float = -20.0
    sensitivity_max: float = 5.0
    name: str = "trx"

    def __post_init__(self):
        object.__setattr__(self, "bands_supported", frozenset(self.bands_supported))
        if not self.sensitivity_min < self.sensitivity_max:
            raise InvalidArgumentError(f"{self.name}: sensitivity_min must be below sensitivity_max")


def _unit_hash(*parts) -> float:
    digest = hashlib.blake2b(":".join(str(p) for p in parts).encode(), digest_size=8).digest()
    # map to the open interval (0, 1)
    return (int.from_bytes(digest, "big") + 0.5) / 2.0**64


def _triangular_ppf(u, lo, hi, mode):
    if hi <= lo:
        return lo
    mode = min(max(mode, lo), hi)
    split = (mode - lo) / (hi - lo)
    if u < split:
        return lo + math.sqrt(u * (hi - lo) * (mode - lo))
    return hi - math.sqrt((1 - u) * (hi - lo) * (hi - mode))


def wss_insertion_loss(spec: WssSpec, port: int, freq: float, seed: int = 0, bands=None) -> float:
    """Insertion loss (dB) of one WSS port at ``freq``.

    Losses are drawn from a triangular distribution over [loss_min, loss_max]
    peaking at the middle of the average band, indexed by a hash of
    (port, freq rounded to 1 MHz, seed) so repeated queries agree.
    """
    if not 0 <= port < spec.port_count:
        raise InvalidArgumentError(f"{spec.name}: port {port} outside 0..{spec.port_count - 1}")
    _check_freq(freq, spec.bands_supported, bands)
    u = _unit_hash(port, round(freq * 1e6), seed)
    value = _triangular_ppf(u, spec.loss_min, spec.loss_max, spec.loss_mode)
    return min(max(value, spec.loss_min), spec.loss_max)


def mcs_insertion_loss(spec: McsSpec) -> float:
    return spec.intrinsic_loss + spec.excess_loss


def mcs_cumulative_isolation(spec: McsSpec, freq: float, bands=None) -> float:
    """Cumulative port isolation (dB) at ``freq``.

    Flat at ``min_cumulative_isolation`` plus a raised-cosine ripple that is
    zero at the band edges and ``isolation_ripple`` at band center.
    """
    band = _check_freq(freq, spec.bands_supported, bands)
    if spec.isolation_ripple == 0:
        return spec.min_cumulative_isolation
    x = (freq - band.low_edge) / (band.high_edge - band.low_edge)
    return spec.min_cumulative_isolation + spec.isolation_ripple * 0.5 * (1 - math.cos(2 * math.pi * x))


def edfa_apply(spec: EdfaSpec, power_in: float, band) -> float:
    name = getattr(band, "name", band)
    if name != spec.band:
        raise BandUnsupportedError(f"{spec.name}: {spec.band}-band amplifier cannot amplify {name}-band light")
    if not math.isfinite(power_in):
        raise InvalidArgumentError("input power must be finite")
    return min(power_in + spec.gain, spec.max_output_power)


@dataclass
class WssState:
    """Channel routing of one WSS: channel -> service port.

    A channel reaches the common port from at most one service port. Channels
    are plan indices when ``channel_count`` is set, otherwise any hashable
    slot key.
    """

    spec: WssSpec
    channel_count: Optional[int] = None
    routes: dict = field(default_factory=dict)
    device_id: str = ""

    def _validate(self, port, channel):
        if not 0 <= port < self.spec.port_count:
            raise InvalidArgumentError(f"port {port} outside 0..{self.spec.port_count - 1}")
        if self.channel_count is not None:
            if not isinstance(channel, int) or not 0 <= channel < self.channel_count:
                raise InvalidArgumentError(f"channel {channel!r} outside 0..{self.channel_count - 1}")

    def route(self, port: int, channel: Hashable, strict: bool = True) -> "WssState":
        self._validate(port, channel)
        current = self.routes.get(channel)
        if current is not None and current != port and strict:
            raise ContentionError(f"{self.device_id or self.spec.name}: channel {channel!r} already on port {current}")
        self.routes[channel] = port
        return self

    def release(self, channel: Hashable) -> "WssState":
        self.routes.pop(channel, None)
        return self

    def ports_in_use(self) -> set:
        return set(self.routes.values())


def wss_route(state: WssState, service_port: int, channel, strict: bool = True) -> WssState:
    return state.route(service_port, channel, strict=strict)


@dataclass
class McsState:
    """Client -> degree connections of one MCS."""

    spec: McsSpec
    connections: dict = field(default_factory=dict)
    device_id: str = ""

    def connect(self, client: int, degree: int) -> "McsState":
        if not 0 <= client < self.spec.client_ports:
            raise InvalidArgumentError(f"client {client} outside 0..{self.spec.client_ports - 1}")
        if not 0 <= degree < self.spec.degree_ports:
            raise InvalidArgumentError(f"degree {degree} outside 0..{self.spec.degree_ports - 1}")
        if client in self.connections:
            raise ClientBusyError(
                f"{self.device_id or self.spec.name}: client {client} already connected to degree {self.connections[client]}"
            )
        self.connections[client] = degree
        return self

    def disconnect(self, client: int) -> "McsState":
        self.connections.pop(client, None)
        return self

    def free_clients(self) -> list:
        return [c for c in range(self.spec.client_ports) if c not in self.connections]


def mcs_connect(state: McsState, client: int, degree: int) -> McsState:
    return state.connect(client, degree)
