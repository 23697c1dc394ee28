"""Topology, CDC lightpath provisioning and the two-link C+L testbed scenarios.

Provisioning policy: hop-count shortest path (unless a route is given),
first-fit lowest slot, then the lowest-index free MCS client on each end.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import networkx as nx

from .devices import (
    AttenuatorSpec,
    CouplerSpec,
    EdfaSpec,
    McsSpec,
    TransceiverSpec,
    WssSpec,
)
from .errors import (
    BandBlockedError,
    ContentionError,
    InvalidArgumentError,
    MisplugError,
    PortBlockedError,
    SpectrumBlockedError,
)
from .impairments import Element, PenaltyModel, q_margin
from .node import Node, NodeArchitecture, NodeConfig, build_node, contention_check, validate_transponder
from .spectrum import (
    DEFAULT_BANDS,
    DEFAULT_SIGNALS,
    Band,
    SignalClass,
    build_channel_plan,
    superchannel_centers,
    wavelength_to_frequency,
)

_EPS = 1e-9


@dataclass
class Link:
    name: str
    src: tuple
    dst: tuple
    bands_supported: frozenset
    attenuator: AttenuatorSpec = field(default_factory=AttenuatorSpec)
    edfas: dict = field(default_factory=dict)
    coupler: Optional[CouplerSpec] = None
    # lightpath id -> (low, high) THz
    occupancy: dict = field(default_factory=dict)

    def elements(self, band: str) -> list:
        """Amplifier stage for ``band``: [coupler] attenuator EDFA [coupler]."""
        if band not in self.bands_supported:
            raise BandBlockedError(f"link {self.name} does not carry the {band} band")
        out = []
        if self.coupler is not None:
            out.append(Element(f"{self.name}/demux", "coupler", self.coupler, link=self.name))
        out.append(Element(f"{self.name}/attenuator", "attenuator", self.attenuator, link=self.name))
        if band in self.edfas:
            out.append(Element(f"{self.name}/edfa-{band}", "edfa", self.edfas[band], link=self.name))
        if self.coupler is not None:
            out.append(Element(f"{self.name}/mux", "coupler", self.coupler, link=self.name))
        return out

    def is_free(self, lo: float, hi: float) -> bool:
        return all(hi <= a + _EPS or b <= lo + _EPS for a, b in self.occupancy.values())


@dataclass(frozen=True)
class Endpoint:
    node: str
    bank: Optional[int] = None
    client: Optional[int] = None


@dataclass(frozen=True)
class Lightpath:
    id: str
    signal: SignalClass
    band: Band
    slot: int = 0
    route: tuple = ()
    links: tuple = ()
    freqs: tuple = ()
    src: Optional[Endpoint] = None
    dst: Optional[Endpoint] = None
    transceiver: TransceiverSpec = field(default_factory=TransceiverSpec)
    interval: tuple = (0.0, 0.0)
    setpoints: dict = field(default_factory=dict)
    seed: int = 0
    bands: dict = field(default_factory=lambda: dict(DEFAULT_BANDS))
    # (WssState, port) reservations, used for release
    hops: tuple = field(default=(), repr=False, compare=False)

    @property
    def span_count(self) -> int:
        return len(self.links)

    @property
    def slot_key(self) -> tuple:
        return (self.band.name, self.signal.channel_spacing, self.slot)


class Topology:
    def __init__(self, bands=None, seed: int = 0, transceivers=None, setpoints=None):
        self.bands = dict(bands or DEFAULT_BANDS)
        self.seed = seed
        self.nodes: dict = {}
        self.links: dict = {}
        self.lightpaths: dict = {}
        self.transceivers = dict(transceivers or {
            b: TransceiverSpec(frozenset({b}), name=f"trx-{b}") for b in self.bands
        })
        self.setpoints = dict(setpoints or {})
        self._ids = itertools.count()
        self._plans = {}

    def add_node(self, node: Node) -> Node:
        if node.name in self.nodes:
            raise InvalidArgumentError(f"duplicate node {node.name}")
        self.nodes[node.name] = node
        return node

    def add_link(self, link: Link) -> Link:
        if link.name in self.links:
            raise InvalidArgumentError(f"duplicate link {link.name}")
        for end, attr in ((link.src, "src"), (link.dst, "dst")):
            node, degree = end
            if node not in self.nodes or not 0 <= degree < len(self.nodes[node].degrees):
                raise InvalidArgumentError(f"link {link.name}: no degree {degree} on node {node}")
            if any(getattr(other, attr) == end for other in self.links.values()):
                raise InvalidArgumentError(f"link {link.name}: {node} degree {degree} already has a {attr} link")
        self.links[link.name] = link
        return link

    def plan(self, band: Band, spacing: float):
        key = (band.name, spacing)
        if key not in self._plans:
            self._plans[key] = build_channel_plan(band, spacing)
        return self._plans[key]

    def graph(self, band: str) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.nodes)
        for link in self.links.values():
            if band in link.bands_supported and not g.has_edge(link.src[0], link.dst[0]):
                g.add_edge(link.src[0], link.dst[0], link=link.name)
        return g


def _resolve_route(topology, src, dst, band, route):
    if route is not None:
        links = [topology.links[name] for name in route]
        if not links:
            raise InvalidArgumentError("a lightpath needs at least one link")
        if links[0].src[0] != src or links[-1].dst[0] != dst:
            raise InvalidArgumentError(f"route {list(route)} does not join {src} to {dst}")
        for a, b in zip(links, links[1:]):
            if a.dst[0] != b.src[0]:
                raise InvalidArgumentError(f"route breaks between {a.name} and {b.name}")
    else:
        if src == dst:
            raise InvalidArgumentError("src == dst needs an explicit route")
        g = topology.graph(band)
        try:
            hops = nx.shortest_path(g, src, dst)
        except nx.NetworkXNoPath:
            raise BandBlockedError(f"no {band}-band path from {src} to {dst}") from None
        links = [topology.links[g.edges[u, v]["link"]] for u, v in zip(hops, hops[1:])]
    for link in links:
        if band not in link.bands_supported:
            raise BandBlockedError(f"link {link.name} does not carry the {band} band")
    return links


def _wss_hops(topology, links, band):
    """(port, WssState) pairs touched by the path, in order.

    The end-node bank ports are marked "src"/"dst" until banks are chosen.
    """
    hops = []
    first = topology.nodes[links[0].src[0]]
    hops.append(("src", first.degrees[links[0].src[1]].chain_for(band).add))
    for a, b in zip(links, links[1:]):
        node = topology.nodes[a.dst[0]]
        din, dout = a.dst[1], b.src[1]
        if din == dout:
            raise InvalidArgumentError(f"{node.name}: route re-enters and leaves degree {din}")
        hops.append((node.interconnect_port(din, dout), node.degrees[din].chain_for(band).drop))
        hops.append((node.interconnect_port(dout, din), node.degrees[dout].chain_for(band).add))
    last = topology.nodes[links[-1].dst[0]]
    hops.append(("dst", last.degrees[links[-1].dst[1]].chain_for(band).drop))
    return hops


def _pick_client(node: Node, side: str, endpoint: Endpoint, trx, slot_key, degree, band):
    candidates = []
    if endpoint.bank is not None:
        candidates = [(endpoint.bank, endpoint.client if endpoint.client is not None else None)]
    else:
        candidates = [(b.index, None) for b in node.banks]
    for bank_idx, client in candidates:
        if not 0 <= bank_idx < len(node.banks):
            raise InvalidArgumentError(f"{node.name}: no MCS bank {bank_idx}")
        bank = node.banks[bank_idx]
        if band not in bank.bands:
            continue
        chain = node.degrees[degree].chains.get(bank.chain)
        if chain is None or band not in chain.bands:
            continue
        try:
            contention_check(node, slot_key, bank_idx, degree, side)
        except ContentionError:
            continue
        mcs = bank.add if side == "add" else bank.drop
        clients = [client] if client is not None else range(mcs.spec.client_ports)
        for c in clients:
            if c in mcs.connections:
                continue
            attached = node.transceivers.get((bank_idx, c))
            if attached is not None and band not in attached.bands_supported:
                continue
            try:
                validate_transponder(node, trx, bank_idx, c)
            except MisplugError:
                continue
            return bank_idx, c
    raise PortBlockedError(f"{node.name}: no free {band}-band MCS client toward degree {degree} ({side})")


def provision_lightpath(topology: Topology, src, dst, signal: SignalClass, band,
                        route=None, slot: Optional[int] = None, freqs=None,
                        transceiver: Optional[TransceiverSpec] = None,
                        name: Optional[str] = None) -> Lightpath:
    """Set up a CDC lightpath and reserve every resource it uses.

    ``src``/``dst`` are node names or Endpoints naming a fixed (bank, client).
    Raises SpectrumBlockedError, PortBlockedError or BandBlockedError when the
    request cannot be carried; topology state is untouched in that case.
    """
    src = src if isinstance(src, Endpoint) else Endpoint(src)
    dst = dst if isinstance(dst, Endpoint) else Endpoint(dst)
    band = topology.bands[band] if isinstance(band, str) else band
    trx = transceiver or topology.transceivers.get(band.name)
    if trx is None or band.name not in trx.bands_supported:
        raise BandBlockedError(f"no transceiver for the {band.name} band")
    plan = topology.plan(band, signal.channel_spacing)
    links = _resolve_route(topology, src.node, dst.node, band.name, route)
    hops = _wss_hops(topology, links, band.name)
    src_node, dst_node = topology.nodes[src.node], topology.nodes[dst.node]
    out_degree, in_degree = links[0].src[1], links[-1].dst[1]

    candidates = [slot] if slot is not None else range(plan.count)
    choice = None
    for k in candidates:
        if not 0 <= k < plan.count:
            raise InvalidArgumentError(f"slot {k} outside the {band.name}-band plan")
        lo, hi = plan.slot_edges(k)
        if not all(link.is_free(lo, hi) for link in links):
            continue
        key = (band.name, signal.channel_spacing, k)
        if any(key in wss.routes for _, wss in hops):
            continue
        choice = (k, lo, hi, key)
        break
    if choice is None:
        raise SpectrumBlockedError(
            f"no free {signal.channel_spacing} GHz {band.name}-band slot on {[l.name for l in links]}"
        )
    k, lo, hi, key = choice

    a_bank, a_client = _pick_client(src_node, "add", src, trx, key, out_degree, band.name)
    d_bank, d_client = _pick_client(dst_node, "drop", dst, trx, key, in_degree, band.name)
    lp_id = name or f"lp{next(topology._ids)}"
    # commit
    for link in links:
        link.occupancy[lp_id] = (lo, hi)
    ports = []
    for port, wss in hops:
        if port == "src":
            port = src_node.bank_port(a_bank)
        elif port == "dst":
            port = dst_node.bank_port(d_bank)
        wss.route(port, key)
        ports.append(port)
    src_node.banks[a_bank].add.connect(a_client, out_degree)
    dst_node.banks[d_bank].drop.connect(d_client, in_degree)
    src_node.active.add(("add", a_bank, out_degree, key))
    dst_node.active.add(("drop", d_bank, in_degree, key))
    src_node.transceivers.setdefault((a_bank, a_client), trx)
    dst_node.transceivers.setdefault((d_bank, d_client), trx)

    elements = [
        Element(f"{src.node}/trx{a_bank}.{a_client}/tx", "transceiver", trx),
        Element(f"{src.node}/point-B", "setpoint", point="B"),
        Element(f"{src.node}/mcs{a_bank}/add", "mcs", src_node.banks[a_bank].add.spec),
    ]
    hop_iter = iter(zip(hops, ports))
    (_, wss), port = next(hop_iter)
    elements.append(Element(wss.device_id, "wss", wss.spec, port=port))
    for i, link in enumerate(links):
        elements.append(Element(f"{link.src[0]}/point-C", "setpoint", point="C"))
        elements.extend(link.elements(band.name))
        elements.append(Element(f"{link.dst[0]}/point-A", "setpoint", point="A"))
        if i < len(links) - 1:
            for _ in range(2):
                (_, wss), port = next(hop_iter)
                elements.append(Element(wss.device_id, "wss", wss.spec, port=port))
    (_, wss), port = next(hop_iter)
    elements.append(Element(wss.device_id, "wss", wss.spec, port=port))
    elements.append(Element(f"{dst.node}/mcs{d_bank}/drop", "mcs", dst_node.banks[d_bank].drop.spec))
    elements.append(Element(f"{dst.node}/trx{d_bank}.{d_client}/rx", "transceiver", trx))

    center = plan.centers[k]
    if freqs is None:
        sub = signal.subcarrier_spacing or signal.channel_spacing
        freqs = superchannel_centers(center, signal.subcarrier_count, sub, signal.channel_spacing)
    lp = Lightpath(
        id=lp_id, signal=signal, band=band, slot=k, route=tuple(elements),
        links=tuple(l.name for l in links), freqs=tuple(freqs),
        src=Endpoint(src.node, a_bank, a_client), dst=Endpoint(dst.node, d_bank, d_client),
        transceiver=trx, interval=(lo, hi), setpoints=dict(topology.setpoints),
        seed=topology.seed, bands=dict(topology.bands),
        hops=tuple((wss, port) for (_, wss), port in zip(hops, ports)),
    )
    topology.lightpaths[lp_id] = lp
    return lp


def release_lightpath(topology: Topology, lp_id: str):
    lp = topology.lightpaths.pop(lp_id)
    key = lp.slot_key
    for name in lp.links:
        topology.links[name].occupancy.pop(lp_id, None)
    for wss, _ in lp.hops:
        wss.release(key)
    src_node, dst_node = topology.nodes[lp.src.node], topology.nodes[lp.dst.node]
    out_degree = topology.links[lp.links[0]].src[1]
    in_degree = topology.links[lp.links[-1]].dst[1]
    src_node.banks[lp.src.bank].add.disconnect(lp.src.client)
    dst_node.banks[lp.dst.bank].drop.disconnect(lp.dst.client)
    src_node.active.discard(("add", lp.src.bank, out_degree, key))
    dst_node.active.discard(("drop", lp.dst.bank, in_degree, key))
    return lp


def occupancy_violations(topology: Topology) -> list:
    """Recount every resource from the active lightpaths and list mismatches."""
    problems = []
    expected = {name: {} for name in topology.links}
    for lp in topology.lightpaths.values():
        for name in lp.links:
            expected[name][lp.id] = lp.interval
    for name, link in topology.links.items():
        if link.occupancy != expected[name]:
            problems.append(f"link {name}: occupancy {sorted(link.occupancy)} != {sorted(expected[name])}")
        spans = sorted(link.occupancy.values())
        for (a0, a1), (b0, b1) in zip(spans, spans[1:]):
            if b0 < a1 - _EPS:
                problems.append(f"link {name}: overlapping slots {a0:.4f}-{a1:.4f} / {b0:.4f}-{b1:.4f}")
    # WSS routes rebuilt from the link path and the port layout alone: express
    # port toward degree b sits at b, shifted down past the WSS's own degree,
    # bank ports follow the D - 1 express ports
    wss_expected = {}

    def expect(node, degree, side, key, port):
        chain = node.degrees[degree].chain_for(key[0])
        wss = chain.add if side == "add" else chain.drop
        wss_expected.setdefault(id(wss), {})[key] = port

    add_exp = {name: {} for name in topology.nodes}
    drop_exp = {name: {} for name in topology.nodes}
    active_exp = {name: set() for name in topology.nodes}
    for lp in topology.lightpaths.values():
        key, path = lp.slot_key, [topology.links[n] for n in lp.links]
        src, dst = topology.nodes[lp.src.node], topology.nodes[lp.dst.node]
        out_deg, in_deg = path[0].src[1], path[-1].dst[1]
        expect(src, out_deg, "add", key, len(src.degrees) - 1 + src.banks[lp.src.bank].port_offset)
        expect(dst, in_deg, "drop", key, len(dst.degrees) - 1 + dst.banks[lp.dst.bank].port_offset)
        for a, b in zip(path, path[1:]):
            node, din, dout = topology.nodes[a.dst[0]], a.dst[1], b.src[1]
            expect(node, din, "drop", key, dout - (dout > din))
            expect(node, dout, "add", key, din - (din > dout))
        add_exp[src.name].setdefault(lp.src.bank, {})[lp.src.client] = out_deg
        drop_exp[dst.name].setdefault(lp.dst.bank, {})[lp.dst.client] = in_deg
        active_exp[src.name].add(("add", lp.src.bank, out_deg, key))
        active_exp[dst.name].add(("drop", lp.dst.bank, in_deg, key))
    for node in topology.nodes.values():
        for deg in node.degrees:
            for chain in deg.chains.values():
                for wss in (chain.add, chain.drop):
                    if wss.routes != wss_expected.get(id(wss), {}):
                        problems.append(f"{wss.device_id}: routes {wss.routes}")
        for bank in node.banks:
            if bank.add.connections != add_exp[node.name].get(bank.index, {}):
                problems.append(f"{bank.add.device_id}: {bank.add.connections}")
            if bank.drop.connections != drop_exp[node.name].get(bank.index, {}):
                problems.append(f"{bank.drop.device_id}: {bank.drop.connections}")
        if node.active != active_exp[node.name]:
            problems.append(f"{node.name}: active set {node.active} != {active_exp[node.name]}")
    for lp in topology.lightpaths.values():
        intervals = {topology.links[n].occupancy.get(lp.id) for n in lp.links}
        if len(intervals) != 1:
            problems.append(f"{lp.id}: slot differs between links")
        if lp.span_count != len({el.link for el in lp.route if el.link}):
            problems.append(f"{lp.id}: span count does not match traversed links")
    return problems


# --- the two-link C+L testbed -------------------------------------------------

@dataclass(frozen=True)
class TestSignal:
    __test__ = False

    position: str
    band: str
    wavelengths_nm: tuple

    @property
    def freqs(self) -> tuple:
        return tuple(wavelength_to_frequency(w) for w in self.wavelengths_nm)

    @property
    def label(self) -> str:
        return f"{self.band}-{self.position}"


TABLE2_SIGNALS = (
    TestSignal("short", "C", (1532.68, 1533.27)),
    TestSignal("middle", "C", (1546.32, 1546.92)),
    TestSignal("long", "C", (1563.86, 1564.47)),
    TestSignal("short", "L", (1572.48, 1573.09)),
    TestSignal("middle", "L", (1588.09, 1588.73)),
    TestSignal("long", "L", (1606.61, 1607.25)),
)


@dataclass(frozen=True)
class Testbed:
    __test__ = False

    cl_wss: WssSpec = WssSpec(9, frozenset({"C", "L"}), name="cl-wss-1x9")
    c_wss: WssSpec = WssSpec(9, frozenset({"C"}), name="c-wss-1x9")
    mcs: McsSpec = McsSpec(16, 8, name="mcs-16x8")
    c_edfa: EdfaSpec = EdfaSpec("C", 20.0, 20.0, name="c-edfa")
    l_edfa: EdfaSpec = EdfaSpec("L", 20.0, 20.0, name="l-edfa")
    coupler: CouplerSpec = CouplerSpec("band-mux", 0.5, name="wdm-coupler")
    attenuator: AttenuatorSpec = AttenuatorSpec(20.0, name="span-attenuator")
    c_transceiver: TransceiverSpec = TransceiverSpec(frozenset({"C"}), name="trx-C")
    l_transceiver: TransceiverSpec = TransceiverSpec(frozenset({"L"}), name="trx-L")
    power_points: tuple = (("A", 5.0), ("B", 2.0), ("C", 5.0))
    signal: SignalClass = DEFAULT_SIGNALS["1T-DC"]
    bands: tuple = (("C", DEFAULT_BANDS["C"]), ("L", DEFAULT_BANDS["L"]))
    seed: int = 0

    def edfa_for(self, band: str) -> EdfaSpec:
        return self.c_edfa if band == "C" else self.l_edfa


# band -> (src node, dst node, link names); the L band always crosses only the C+L link
SCENARIO_ROUTES = {
    1: {"C": ("N1", "N2", ("CL-link",)), "L": ("N1", "N2", ("CL-link",))},
    2: {"C": ("N1", "N1", ("CL-link", "C-link")), "L": ("N1", "N2", ("CL-link",))},
    3: {"C": ("N2", "N2", ("C-link", "CL-link")), "L": ("N1", "N2", ("CL-link",))},
}


@dataclass(frozen=True)
class Scenario:
    id: int
    routes: dict
    testbed: Testbed


def build_testbed(testbed: Testbed = None) -> Topology:
    """Two multiband nodes joined by a C+L link and a C-only link in a ring.

    Degree 0 of each node is the C+L WSS pair, degree 1 the C-band WSS pair.
    The express path between the two degrees of a node is the WSS
    service-port loopback that turns the pair of links into a two-span route.
    """
    tb = testbed or Testbed()
    bands = dict(tb.bands)
    topo = Topology(
        bands=bands, seed=tb.seed,
        transceivers={"C": tb.c_transceiver, "L": tb.l_transceiver},
        setpoints=dict(tb.power_points),
    )
    for name in ("N1", "N2"):
        topo.add_node(build_node(NodeConfig(
            NodeArchitecture.CL_MULTIBAND, 2, tb.cl_wss, tb.mcs,
            degree_wss=(tb.cl_wss, tb.c_wss), name=name,
        )))
    topo.add_link(Link(
        "CL-link", ("N1", 0), ("N2", 0), frozenset({"C", "L"}), tb.attenuator,
        {"C": tb.c_edfa, "L": tb.l_edfa}, tb.coupler,
    ))
    topo.add_link(Link("C-link", ("N2", 1), ("N1", 1), frozenset({"C"}), tb.attenuator, {"C": tb.c_edfa}))
    return topo


def build_scenario(scenario_id: int, testbed: Testbed = None):
    """Return (Scenario, fresh testbed Topology) for scenario 1, 2 or 3."""
    if scenario_id not in SCENARIO_ROUTES:
        raise InvalidArgumentError(f"unknown scenario {scenario_id!r}; expected 1, 2 or 3")
    tb = testbed or Testbed()
    return Scenario(scenario_id, SCENARIO_ROUTES[scenario_id], tb), build_testbed(tb)


@dataclass
class ScenarioRun:
    scenario: Scenario
    topology: Topology
    model: PenaltyModel
    lightpaths: dict = field(default_factory=dict)
    reports: list = field(default_factory=list)

    def lightpath(self, band: str, position: str) -> Lightpath:
        try:
            return self.lightpaths[(band, position)]
        except KeyError:
            raise InvalidArgumentError(f"scenario {self.scenario.id} carries no {band}-{position} signal") from None


def run_scenario(scenario: Scenario, topology: Topology, signals=TABLE2_SIGNALS,
                 model: PenaltyModel = None) -> ScenarioRun:
    """Provision the test super-channels on ``topology`` and compute their QReports.

    Each signal takes the grid slot containing the midpoint of its two
    subcarriers; losses and isolations are evaluated at the measured
    subcarrier frequencies.
    """
    model = model or PenaltyModel()
    run = ScenarioRun(scenario, topology, model)
    sig = scenario.testbed.signal
    for ts in signals:
        src, dst, route = scenario.routes[ts.band]
        band = topology.bands[ts.band]
        freqs = ts.freqs
        plan = topology.plan(band, sig.channel_spacing)
        slot = plan.index_of(sum(freqs) / len(freqs))
        lp = provision_lightpath(topology, src, dst, sig, band, route=route, slot=slot,
                                 freqs=freqs, name=f"s{scenario.id}-{ts.label}")
        run.lightpaths[(ts.band, ts.position)] = lp
        for sub in range(1, len(freqs) + 1):
            run.reports.append((ts, q_margin(lp, model, subchannel=sub)))
    return run


def loopback_lightpath(signal: TestSignal, testbed: Testbed = None) -> Lightpath:
    """Transmitter wired straight to its receiver, the reference measurement."""
    tb = testbed or Testbed()
    bands = dict(tb.bands)
    trx = tb.c_transceiver if signal.band == "C" else tb.l_transceiver
    route = (
        Element("loopback/tx", "transceiver", trx),
        Element("loopback/point-B", "setpoint", point="B"),
        Element("loopback/rx", "transceiver", trx),
    )
    return Lightpath(
        id=f"loopback-{signal.label}", signal=tb.signal, band=bands[signal.band], route=route,
        freqs=signal.freqs, transceiver=trx, setpoints=dict(tb.power_points),
        seed=tb.seed, bands=bands,
    )
