"""Bands, channel plans and signal classes.

Frequencies are in THz and spacings/bandwidths in GHz throughout, matching how
channel plans are usually quoted. Channel plans are anchored at the low band
edge: the first center sits half a spacing above it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import (
    BandUnsupportedError,
    EmptyPlanError,
    InvalidArgumentError,
    SlotOverflowError,
    UnsupportedSignalError,
)

SPEED_OF_LIGHT = 299792458.0  # m/s
# 1 MHz expressed in THz, used for grid comparisons
MHZ = 1e-6
# tolerate floating-point noise in width/spacing divisions
_FLOOR_EPS = 1e-9


@dataclass(frozen=True)
class Band:
    name: str
    low_edge: float
    high_edge: float

    def __post_init__(self):
        if not self.high_edge > self.low_edge:
            raise InvalidArgumentError(f"band {self.name}: high edge must exceed low edge")

    @property
    def width_ghz(self) -> float:
        return (self.high_edge - self.low_edge) * 1e3

    @property
    def center(self) -> float:
        return 0.5 * (self.low_edge + self.high_edge)

    def contains(self, freq: float) -> bool:
        return self.low_edge - MHZ <= freq <= self.high_edge + MHZ

    def overlaps(self, other: "Band") -> bool:
        return self.low_edge < other.high_edge and other.low_edge < self.high_edge


C_BAND = Band("C", 191.30, 196.10)
L_BAND = Band("L", 186.05, 190.85)
DEFAULT_BANDS = {"C": C_BAND, "L": L_BAND}


def band_of(freq: float, bands=None) -> Band:
    """Return the band containing ``freq`` or raise BandUnsupportedError."""
    for band in (bands or DEFAULT_BANDS).values():
        if band.contains(freq):
            return band
    raise BandUnsupportedError(f"{freq:.4f} THz lies in no configured band")


@dataclass(frozen=True)
class SignalClass:
    name: str
    bit_rate: float
    modulation: str
    baud_rate: float
    channel_spacing: float
    subcarrier_count: int = 1
    subcarrier_spacing: float = 0.0

    def __post_init__(self):
        if self.subcarrier_count < 1:
            raise InvalidArgumentError(f"{self.name}: subcarrier_count must be >= 1")
        if self.channel_spacing + _FLOOR_EPS < self.baud_rate * self.subcarrier_count:
            raise InvalidArgumentError(
                f"{self.name}: {self.subcarrier_count} x {self.baud_rate} Gbaud does not fit "
                f"a {self.channel_spacing} GHz slot"
            )


# 400G spacing variants: OIF 400ZR grid or the OpenROADM operational mode
SPACING_400G = {"oif": 75.0, "openroadm": 87.5}


def spacing_for_signal(bit_rate: float, variant: str = "oif") -> float:
    """Channel spacing in GHz for a DP-16QAM signal of the given bit rate."""
    if bit_rate == 200:
        return 50.0
    if bit_rate == 400:
        try:
            return SPACING_400G[variant.lower()]
        except KeyError:
            raise UnsupportedSignalError(f"unknown 400G spacing variant {variant!r}") from None
    if bit_rate == 800:
        return 150.0
    raise UnsupportedSignalError(f"no spacing rule for {bit_rate} Gbps")


DEFAULT_SIGNALS = {
    "200G": SignalClass("200G", 200, "DP-16QAM", 32, 50.0),
    "400G": SignalClass("400G", 400, "DP-16QAM", 64, 75.0),
    "800G": SignalClass("800G", 800, "DP-16QAM", 130, 150.0),
    # dual-carrier super-channel, two 500G subcarriers in one 150 GHz slot
    "1T-DC": SignalClass("1T-DC", 1000, "DP-16QAM", 64, 150.0, 2, 75.0),
}


def channels_in_band(band_width: float, spacing: float) -> int:
    if band_width <= 0 or spacing <= 0:
        raise InvalidArgumentError("band width and spacing must be positive")
    return int(math.floor(band_width / spacing + _FLOOR_EPS))


@dataclass(frozen=True)
class ChannelPlan:
    band: Band
    spacing: float
    centers: tuple = field(default_factory=tuple)

    @property
    def count(self) -> int:
        return len(self.centers)

    def __len__(self):
        return len(self.centers)

    def slot_edges(self, index: int) -> tuple:
        half = self.spacing / 2e3
        f = self.centers[index]
        return (f - half, f + half)

    def index_of(self, freq: float) -> int:
        """Index of the slot whose passband contains ``freq``."""
        half = self.spacing / 2e3
        k = int(math.floor((freq - self.band.low_edge) / (self.spacing / 1e3)))
        if 0 <= k < self.count and abs(freq - self.centers[k]) <= half + MHZ:
            return k
        raise InvalidArgumentError(f"{freq:.4f} THz is outside the {self.band.name}-band plan")


def build_channel_plan(band: Band, spacing: float) -> ChannelPlan:
    if spacing <= 0:
        raise InvalidArgumentError("spacing must be positive")
    if spacing > band.width_ghz + _FLOOR_EPS:
        raise EmptyPlanError(f"{spacing} GHz does not fit the {band.name} band")
    n = channels_in_band(band.width_ghz, spacing)
    step = spacing / 1e3
    start = band.low_edge + step / 2
    return ChannelPlan(band, spacing, tuple(start + k * step for k in range(n)))


def wavelength_to_frequency(wavelength_nm: float) -> float:
    """Vacuum wavelength in nm to frequency in THz."""
    if wavelength_nm <= 0:
        raise InvalidArgumentError("wavelength must be positive")
    return SPEED_OF_LIGHT / (wavelength_nm * 1e-9) / 1e12


def frequency_to_wavelength(freq_thz: float) -> float:
    if freq_thz <= 0:
        raise InvalidArgumentError("frequency must be positive")
    return SPEED_OF_LIGHT / (freq_thz * 1e12) * 1e9


def superchannel_centers(slot_center: float, subcarriers: int, sub_spacing: float,
                         slot_width: Optional[float] = None) -> list:
    """Subcarrier frequencies (THz) placed symmetrically around ``slot_center``.

    The occupied width is taken as ``subcarriers * sub_spacing``; when
    ``slot_width`` (GHz) is given it must not be exceeded.
    """
    if subcarriers < 1 or sub_spacing <= 0:
        raise InvalidArgumentError("need at least one subcarrier and a positive spacing")
    if slot_width is not None and subcarriers * sub_spacing > slot_width + _FLOOR_EPS:
        raise SlotOverflowError(
            f"{subcarriers} x {sub_spacing} GHz subcarriers overflow a {slot_width} GHz slot"
        )
    mid = (subcarriers - 1) / 2
    return [slot_center + (k - mid) * sub_spacing / 1e3 for k in range(subcarriers)]
