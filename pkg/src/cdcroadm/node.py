"""CDC-ROADM node assembly, port budgets and add/drop ratio arithmetic.

A degree is one line direction. Every degree carries an add-side and a
drop-side WSS per switching chain: one chain for C-only and multiband nodes,
separate C and L chains for nodes built from single-band devices. Service
ports on each WSS are allocated as

    0 .. D-2          express interconnect to the other D-1 degrees
    D-1 .. D-2+banks  one port per MCS bank (transponder aggregator)
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from .devices import McsSpec, McsState, TransceiverSpec, WssSpec, WssState
from .errors import (
    BandBlockedError,
    ContentionError,
    InsufficientPortsError,
    InvalidArgumentError,
    MisplugError,
    OverSubscriptionError,
)


class NodeArchitecture(enum.Enum):
    C_ONLY = "C_ONLY"
    CL_SEPARATE = "CL_SEPARATE"
    CL_MULTIBAND = "CL_MULTIBAND"

    @property
    def bands(self) -> frozenset:
        return frozenset({"C"}) if self is NodeArchitecture.C_ONLY else frozenset({"C", "L"})


def max_mcs_count(wss_ports: int, degrees: int) -> int:
    """WSS service ports left for MCS banks after inter-degree interconnect."""
    if degrees < 1:
        raise InvalidArgumentError("a node needs at least one degree")
    if wss_ports < degrees:
        raise InsufficientPortsError(
            f"a 1x{wss_ports} WSS cannot interconnect {degrees} degrees and still host an MCS"
        )
    return wss_ports - (degrees - 1)


def add_drop_ratio(wss_ports: int, degrees: int, clients: int, channels_per_degree: int) -> float:
    """Fraction of the node's D x N_ch wavelengths that can be added/dropped."""
    if clients < 0 or channels_per_degree <= 0:
        raise InvalidArgumentError("clients must be >= 0 and channels_per_degree > 0")
    banks = max_mcs_count(wss_ports, degrees)
    return banks * clients / (degrees * channels_per_degree)


def required_add_drop_ratio(total_wavelengths: int, node_count: int) -> float:
    """Average per-node share when every wavelength terminates once.

    Each node terminates ``total_wavelengths / node_count`` of the
    ``total_wavelengths`` it sees, so the ratio reduces to ``1 / node_count``.
    """
    if node_count < 1:
        raise InvalidArgumentError("node_count must be >= 1")
    if total_wavelengths < 0:
        raise InvalidArgumentError("total_wavelengths must be >= 0")
    return 1.0 / node_count


@dataclass(frozen=True)
class NodeConfig:
    architecture: NodeArchitecture
    degrees: int
    wss: WssSpec
    mcs: McsSpec
    channels_per_degree: int = 96
    mcs_count_override: Optional[int] = None
    # per-degree WSS override, e.g. a C-only degree on a multiband node
    degree_wss: Optional[tuple] = None
    name: str = "node"

    def __post_init__(self):
        if self.degrees < 1:
            raise InvalidArgumentError(f"{self.name}: degrees must be >= 1")
        if self.degree_wss is not None and len(self.degree_wss) != self.degrees:
            raise InvalidArgumentError(f"{self.name}: degree_wss needs one entry per degree")

    def wss_for(self, degree: int) -> WssSpec:
        return self.degree_wss[degree] if self.degree_wss is not None else self.wss

    @property
    def wss_ports(self) -> int:
        return min(self.wss_for(d).port_count for d in range(self.degrees))


def _chains(arch: NodeArchitecture) -> dict:
    if arch is NodeArchitecture.CL_SEPARATE:
        return {"C": frozenset({"C"}), "L": frozenset({"L"})}
    if arch is NodeArchitecture.C_ONLY:
        return {"C": frozenset({"C"})}
    return {"CL": frozenset({"C", "L"})}


@dataclass
class Chain:
    name: str
    bands: frozenset
    add: WssState
    drop: WssState


@dataclass
class Degree:
    index: int
    chains: dict

    @property
    def bands(self) -> frozenset:
        out = frozenset()
        for chain in self.chains.values():
            out |= chain.bands
        return out

    def chain_for(self, band: str) -> Chain:
        for chain in self.chains.values():
            if band in chain.bands:
                return chain
        raise BandBlockedError(f"degree {self.index} carries no {band}-band chain")


@dataclass
class Bank:
    index: int
    chain: str
    bands: frozenset
    port_offset: int
    add: McsState
    drop: McsState


@dataclass
class Node:
    config: NodeConfig
    degrees: list
    banks: list
    transceivers: dict = field(default_factory=dict)
    # (side, bank, degree, slot key) already switched through an MCS
    active: set = field(default_factory=set)

    @property
    def name(self) -> str:
        return self.config.name

    @property
    def add_drop_ports(self) -> int:
        return sum(b.add.spec.client_ports for b in self.banks)

    def interconnect_port(self, from_degree: int, to_degree: int) -> int:
        if from_degree == to_degree:
            raise InvalidArgumentError("no express port from a degree to itself")
        others = [d for d in range(len(self.degrees)) if d != from_degree]
        return others.index(to_degree)

    def bank_port(self, bank: int) -> int:
        return len(self.degrees) - 1 + self.banks[bank].port_offset

    def banks_on_chain(self, chain: str) -> int:
        return sum(1 for b in self.banks if b.chain == chain)

    def used_ports(self, degree: int, chain: str) -> int:
        """Service ports wired on the degree's WSS pair for ``chain``."""
        if chain not in self.degrees[degree].chains:
            raise InvalidArgumentError(f"degree {degree} has no chain {chain}")
        return len(self.degrees) - 1 + self.banks_on_chain(chain)

    def port_budget(self) -> dict:
        out = {}
        for deg in self.degrees:
            for name, chain in deg.chains.items():
                used = self.used_ports(deg.index, name)
                out[(deg.index, name)] = (used, chain.add.spec.port_count - used)
        return out

    def attach(self, transceiver: TransceiverSpec, bank: int, client: int):
        validate_transponder(self, transceiver, bank, client)
        self.transceivers[(bank, client)] = transceiver


def _check_bank_client(node, bank, client):
    if not 0 <= bank < len(node.banks):
        raise InvalidArgumentError(f"{node.name}: no MCS bank {bank}")
    if not 0 <= client < node.banks[bank].add.spec.client_ports:
        raise InvalidArgumentError(f"{node.name}: bank {bank} has no client {client}")


def build_node(config: NodeConfig) -> Node:
    arch = config.architecture
    D = config.degrees
    if config.mcs.degree_ports < D:
        raise InsufficientPortsError(
            f"{config.name}: {config.mcs.degree_ports}-degree MCS cannot serve {D} degrees"
        )
    limit = max_mcs_count(config.wss_ports, D)
    per_chain = limit
    if config.mcs_count_override is not None:
        if config.mcs_count_override > limit:
            raise OverSubscriptionError(
                f"{config.name}: {config.mcs_count_override} MCS banks exceed the {limit} free WSS ports"
            )
        if config.mcs_count_override < 0:
            raise InvalidArgumentError("mcs_count_override must be >= 0")
        per_chain = config.mcs_count_override

    chains = _chains(arch)
    degrees = []
    for d in range(D):
        spec = config.wss_for(d)
        deg_chains = {}
        for name, bands in chains.items():
            usable = bands & spec.bands_supported
            if not usable:
                continue
            deg_chains[name] = Chain(
                name,
                usable,
                WssState(spec, device_id=f"{config.name}/deg{d}/{name}/add-wss"),
                WssState(spec, device_id=f"{config.name}/deg{d}/{name}/drop-wss"),
            )
        degrees.append(Degree(d, deg_chains))

    banks = []
    for name, bands in chains.items():
        for k in range(per_chain):
            i = len(banks)
            banks.append(Bank(
                i, name, bands & config.mcs.bands_supported, k,
                McsState(config.mcs, device_id=f"{config.name}/mcs{i}/add"),
                McsState(config.mcs, device_id=f"{config.name}/mcs{i}/drop"),
            ))
    return Node(config, degrees, banks)


@dataclass(frozen=True)
class NodeInventory:
    wss: int = 0
    mcs: int = 0
    c_edfa: int = 0
    l_edfa: int = 0
    wdm_coupler: int = 0

    def as_dict(self) -> dict:
        return {"WSS": self.wss, "MCS": self.mcs, "C-EDFA": self.c_edfa,
                "L-EDFA": self.l_edfa, "WDM coupler": self.wdm_coupler}


def inventory(config: NodeConfig) -> NodeInventory:
    """Device counts for one node.

    Line interfaces hold one amplifier stage per degree; there are no
    amplifiers between WSS and MCS. Separate-band nodes also need a band
    splitter and combiner per degree to feed their parallel WSS chains.
    """
    D = config.degrees
    limit = max_mcs_count(config.wss_ports, D)
    banks = config.mcs_count_override if config.mcs_count_override is not None else limit
    arch = config.architecture
    if arch is NodeArchitecture.C_ONLY:
        return NodeInventory(wss=2 * D, mcs=2 * banks, c_edfa=D)
    if arch is NodeArchitecture.CL_MULTIBAND:
        return NodeInventory(wss=2 * D, mcs=2 * banks, c_edfa=D, l_edfa=D, wdm_coupler=2 * D)
    return NodeInventory(wss=4 * D, mcs=4 * banks, c_edfa=D, l_edfa=D, wdm_coupler=4 * D)


def validate_transponder(node: Node, transceiver: TransceiverSpec, mcs_bank: int, client: int):
    """Raise MisplugError unless ``transceiver`` may sit on (bank, client).

    A multiband MCS takes any C or L transceiver on any client port; a
    single-band bank only takes transceivers of its own band.
    """
    _check_bank_client(node, mcs_bank, client)
    bank = node.banks[mcs_bank]
    if not transceiver.bands_supported & bank.bands:
        raise MisplugError(
            f"{node.name}: {sorted(transceiver.bands_supported)} transceiver plugged into "
            f"{sorted(bank.bands)} bank {mcs_bank} client {client}"
        )


def contention_check(node: Node, slot, mcs_bank: int, degree: int, side: str = "add"):
    """The same slot may leave one bank toward many degrees, but only once per degree."""
    if not 0 <= mcs_bank < len(node.banks):
        raise InvalidArgumentError(f"{node.name}: no MCS bank {mcs_bank}")
    if not 0 <= degree < len(node.degrees):
        raise InvalidArgumentError(f"{node.name}: no degree {degree}")
    if (side, mcs_bank, degree, slot) in node.active:
        raise ContentionError(
            f"{node.name}: slot {slot!r} already {side}ed via bank {mcs_bank} on degree {degree}"
        )
