import pytest

from cdcroadm.devices import CouplerSpec, EdfaSpec, McsSpec, WssSpec
from cdcroadm.network import Link, Topology
from cdcroadm.node import NodeArchitecture, NodeConfig, build_node

_ACCEPTANCE = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, description): exit criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        number, desc = marker.args
        _ACCEPTANCE.append((str(number), desc, item.name, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, desc, name, outcome in sorted(_ACCEPTANCE, key=lambda r: (r[0], r[2])):
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{verdict}] criterion {number}: {desc} ({name})")

CL_AMPS = {"C": EdfaSpec("C"), "L": EdfaSpec("L")}


def make_ring(n=4, W=9, clients=8, seed=0):
    """Bidirectional ring of 2-degree multiband nodes; degree 1 faces the next node."""
    topo = Topology(seed=seed)
    for i in range(n):
        topo.add_node(build_node(NodeConfig(
            NodeArchitecture.CL_MULTIBAND, 2, WssSpec(W), McsSpec(16, clients), name=f"R{i}")))
    coupler = CouplerSpec("band-mux", 0.5)
    for i in range(n):
        j = (i + 1) % n
        for name, a, b in ((f"R{i}>R{j}", (f"R{i}", 1), (f"R{j}", 0)), (f"R{j}>R{i}", (f"R{j}", 0), (f"R{i}", 1))):
            topo.add_link(Link(name, a, b, frozenset({"C", "L"}), edfas=CL_AMPS, coupler=coupler))
    return topo


def make_pair(arch=NodeArchitecture.C_ONLY, D=8, W=20, clients=16, bands=("C",)):
    """Two D-degree nodes joined by one link from A.deg0 to B.deg0."""
    topo = Topology()
    for name in ("A", "B"):
        topo.add_node(build_node(NodeConfig(
            arch, D, WssSpec(W, frozenset(bands)),
            McsSpec(16, clients, bands_supported=frozenset(bands)), name=name)))
    topo.add_link(Link("A-B", ("A", 0), ("B", 0), frozenset(bands)))
    return topo


def make_star(D=8, W=9, clients=8):
    """Hub with D degrees, each feeding its own leaf node."""
    topo = Topology()
    topo.add_node(build_node(NodeConfig(NodeArchitecture.CL_MULTIBAND, D, WssSpec(W), McsSpec(16, clients), name="hub")))
    for d in range(D):
        topo.add_node(build_node(NodeConfig(NodeArchitecture.CL_MULTIBAND, 1, WssSpec(W), McsSpec(16, clients), name=f"leaf{d}")))
        topo.add_link(Link(f"hub>leaf{d}", ("hub", d), (f"leaf{d}", 0), frozenset({"C", "L"})))
    return topo


@pytest.fixture
def ring():
    return make_ring


@pytest.fixture
def pair():
    return make_pair


@pytest.fixture
def star():
    return make_star
