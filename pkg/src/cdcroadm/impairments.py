"""Power propagation, crosstalk and Q-factor margin accounting.

The Q model is a calibrated penalty ledger rather than an OSNR model: a
lightpath starts at the transceiver's back-to-back (loopback) margin and loses
a fixed penalty for its first span, a smaller one for every further span, an
in-band crosstalk penalty from the MCS port isolation it crosses and a
receiver penalty when the received power leaves the sensitivity window.
All powers are per subchannel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

from .devices import (
    EdfaSpec,
    TransceiverSpec,
    edfa_apply,
    mcs_cumulative_isolation,
    mcs_insertion_loss,
    wss_insertion_loss,
)
from .errors import InvalidArgumentError, SaturatedPenaltyError, SignalLostError


@dataclass(frozen=True)
class Element:
    """One device a lightpath traverses, as seen by the power ledger."""

    name: str
    kind: str
    spec: object = None
    port: Optional[int] = None
    point: Optional[str] = None
    link: Optional[str] = None


@dataclass(frozen=True)
class TraceEntry:
    element: str
    kind: str
    power_in: float
    delta: float
    power_out: float


@dataclass(frozen=True)
class PowerTrace:
    entries: tuple
    launch: float

    @property
    def output(self) -> float:
        return self.entries[-1].power_out if self.entries else self.launch

    @property
    def total_delta(self) -> float:
        return math.fsum(e.delta for e in self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class PenaltyModel:
    first_span_penalty: float = 1.5
    extra_span_penalty: float = 1.0
    crosstalk_coefficient: float = 2.0
    # receiver penalty in dB per dB^2 outside the sensitivity window
    rolloff: float = 0.5
    signal_floor: float = -60.0
    # band name -> (first_span_penalty, extra_span_penalty)
    per_band: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.first_span_penalty < 0 or self.extra_span_penalty < 0:
            raise InvalidArgumentError("span penalties must be >= 0")
        for p1, p2 in self.per_band.values():
            if p1 < 0 or p2 < 0:
                raise InvalidArgumentError("span penalties must be >= 0")

    def span_penalties(self, band: str) -> tuple:
        return self.per_band.get(band, (self.first_span_penalty, self.extra_span_penalty))

    def span_penalty(self, span_count: int, band: str) -> float:
        if span_count <= 0:
            return 0.0
        p1, p2 = self.span_penalties(band)
        return p1 + (span_count - 1) * p2


def element_delta(el: Element, power_in: float, freq: float, band, seed=0,
                  setpoints=None, bands=None) -> float:
    kind = el.kind
    if kind == "transceiver":
        return 0.0
    if kind == "setpoint":
        if setpoints and el.point in setpoints:
            return setpoints[el.point] - power_in
        return 0.0
    if kind == "mcs":
        return -mcs_insertion_loss(el.spec)
    if kind == "wss":
        return -wss_insertion_loss(el.spec, el.port, freq, seed, bands)
    if kind == "coupler":
        return -el.spec.loss_per_pass
    if kind == "attenuator":
        return -el.spec.loss
    if kind == "edfa":
        return edfa_apply(el.spec, power_in, band) - power_in
    if kind == "loss":
        return -float(el.spec)
    raise InvalidArgumentError(f"unknown element kind {kind!r}")


def propagate_power(lightpath, launch: Optional[float] = None, setpoints=None,
                    freq: Optional[float] = None, floor: float = -60.0) -> PowerTrace:
    """dB ledger of ``lightpath`` starting from ``launch`` dBm/subchannel.

    ``setpoints`` maps power-control point labels (A, B, C) to the power the
    emulated testbed pins there; it defaults to the lightpath's own.
    """
    if setpoints is None:
        setpoints = lightpath.setpoints
    if launch is None:
        launch = setpoints.get("B", 0.0) if setpoints else 0.0
    if freq is None:
        freq = lightpath.freqs[0]
    band = lightpath.band.name
    entries = []
    p = launch
    for el in lightpath.route:
        delta = element_delta(el, p, freq, band, lightpath.seed, setpoints, lightpath.bands)
        out = p + delta
        if out < floor:
            raise SignalLostError(f"{el.name}: {out:.2f} dBm is below the {floor} dBm floor")
        entries.append(TraceEntry(el.name, el.kind, p, delta, out))
        p = out
    return PowerTrace(tuple(entries), launch)


def crosstalk_penalty(isolations, coefficient: float = 2.0) -> float:
    """In-band crosstalk penalty (dB) from a list of isolations (dB).

    Leakage powers add; the penalty uses the coherent field-amplitude form
    -10 log10(1 - k sqrt(eps)).
    """
    isolations = list(isolations)
    if not isolations:
        return 0.0
    if any(x <= 0 for x in isolations):
        raise InvalidArgumentError("isolation values must be positive")
    eps = math.fsum(10 ** (-x / 10) for x in isolations)
    amp = coefficient * math.sqrt(eps)
    if amp >= 1:
        raise SaturatedPenaltyError(f"crosstalk {10 * math.log10(eps):.1f} dB saturates the penalty model")
    return max(0.0, -10 * math.log10(1 - amp))


def power_penalty(rx_power: float, transceiver: TransceiverSpec, rolloff: float = 0.5) -> float:
    if rx_power < transceiver.sensitivity_min:
        return rolloff * (transceiver.sensitivity_min - rx_power) ** 2
    if rx_power > transceiver.sensitivity_max:
        return rolloff * (rx_power - transceiver.sensitivity_max) ** 2
    return 0.0


@dataclass(frozen=True)
class QReport:
    lightpath: str
    subchannel: int
    freq: float
    trace: PowerTrace
    span_penalty: float
    crosstalk_penalty: float
    power_penalty: float
    loopback_margin: float
    fec_threshold_q: float

    @property
    def rx_power(self) -> float:
        return self.trace.output

    @property
    def margin(self) -> float:
        return self.loopback_margin - (self.span_penalty + self.crosstalk_penalty + self.power_penalty)

    @property
    def q_factor(self) -> float:
        return self.fec_threshold_q + self.margin

    @property
    def error_free(self) -> bool:
        return self.margin > 0

    @property
    def verdict(self) -> str:
        return "error-free" if self.error_free else "failed"


def q_margin(lightpath, model: PenaltyModel = None, transceiver: TransceiverSpec = None,
             subchannel: int = 1, launch=None, setpoints=None) -> QReport:
    """Q-factor margin of one subchannel (1-based) of ``lightpath``."""
    model = model or PenaltyModel()
    transceiver = transceiver or lightpath.transceiver
    if not 1 <= subchannel <= len(lightpath.freqs):
        raise InvalidArgumentError(f"{lightpath.id} has no subchannel {subchannel}")
    freq = lightpath.freqs[subchannel - 1]
    trace = propagate_power(lightpath, launch, setpoints, freq, model.signal_floor)
    isolations = [mcs_cumulative_isolation(el.spec, freq, lightpath.bands)
                  for el in lightpath.route if el.kind == "mcs"]
    return QReport(
        lightpath=lightpath.id,
        subchannel=subchannel,
        freq=freq,
        trace=trace,
        span_penalty=model.span_penalty(lightpath.span_count, lightpath.band.name),
        crosstalk_penalty=crosstalk_penalty(isolations, model.crosstalk_coefficient),
        power_penalty=power_penalty(trace.output, transceiver, model.rolloff),
        loopback_margin=transceiver.loopback_margin,
        fec_threshold_q=transceiver.fec_threshold_q,
    )


def input_power_sweep(run, powers, band: str = "C", position: str = "middle",
                      subchannel: int = 2, point: str = "A") -> list:
    """Margin of one scenario signal while the power at ``point`` is swept."""
    lp = run.lightpath(band, position)
    out = []
    for p in powers:
        setpoints = dict(lp.setpoints)
        setpoints[point] = p
        out.append((p, q_margin(lp, run.model, subchannel=subchannel, setpoints=setpoints).margin))
    return out


def with_drop_amplifier(lightpath, gain: float, max_output_power: float = 20.0):
    """Copy of ``lightpath`` with an EDFA between its final drop WSS and drop MCS."""
    route = list(lightpath.route)
    mcs_at = max(i for i, el in enumerate(route) if el.kind == "mcs")
    if route[mcs_at - 1].kind != "wss":
        raise InvalidArgumentError(f"{lightpath.id}: no WSS feeding the drop MCS")
    amp = Element(f"{lightpath.id}/inline-edfa", "edfa",
                  EdfaSpec(lightpath.band.name, gain, max_output_power, name="inline-edfa"))
    route.insert(mcs_at, amp)
    return replace(lightpath, route=tuple(route))


def inline_amp_benefit(run, gain: float, band: str = "C", position: str = "middle",
                       subchannel: int = 2, max_output_power: float = 20.0) -> float:
    """Margin gained by adding an in-node amplifier of ``gain`` dB on the drop path."""
    if gain < 0:
        raise InvalidArgumentError("gain must be >= 0")
    lp = run.lightpath(band, position)
    base = q_margin(lp, run.model, subchannel=subchannel).margin
    amped = q_margin(with_drop_amplifier(lp, gain, max_output_power), run.model,
                     subchannel=subchannel).margin
    return amped - base
