import math

import pytest
from hypothesis import given, settings, strategies as st

from cdcroadm.devices import (
    CouplerSpec,
    EdfaSpec,
    McsSpec,
    McsState,
    TransceiverSpec,
    WssSpec,
    WssState,
    edfa_apply,
    mcs_connect,
    mcs_cumulative_isolation,
    mcs_insertion_loss,
    wss_insertion_loss,
    wss_route,
)
from cdcroadm.errors import BandUnsupportedError, ClientBusyError, ContentionError, InvalidArgumentError
from cdcroadm.spectrum import C_BAND, L_BAND, build_channel_plan

CL_WSS = WssSpec(9)
MCS = McsSpec()


def grid(spacing=150):
    return build_channel_plan(C_BAND, spacing).centers + build_channel_plan(L_BAND, spacing).centers


def test_wss_loss_in_range_and_deterministic():
    f = C_BAND.center
    a = wss_insertion_loss(CL_WSS, 3, f, seed=1)
    assert 5.1 <= a <= 6.7
    assert wss_insertion_loss(CL_WSS, 3, f, seed=1) == a
    assert wss_insertion_loss(CL_WSS, 3, f, seed=2) != a


def test_wss_loss_population_mean():
    freqs = grid()
    assert len(freqs) == 64
    losses = [wss_insertion_loss(CL_WSS, p, f) for p in range(9) for f in freqs]
    mean = sum(losses) / len(losses)
    assert 5.5 <= mean <= 6.1


def test_wss_loss_errors():
    with pytest.raises(BandUnsupportedError):
        wss_insertion_loss(CL_WSS, 0, 200.0)
    with pytest.raises(BandUnsupportedError):
        wss_insertion_loss(WssSpec(9, {"C"}), 0, L_BAND.center)
    with pytest.raises(InvalidArgumentError):
        wss_insertion_loss(CL_WSS, 9, C_BAND.center)


def test_wss_spec_invariants():
    with pytest.raises(InvalidArgumentError):
        WssSpec(1)
    with pytest.raises(InvalidArgumentError):
        WssSpec(9, loss_min=6.0, loss_avg_low=5.5)


def test_degenerate_wss_loss():
    fixed = WssSpec(4, loss_min=5.8, loss_max=5.8, loss_avg_low=5.8, loss_avg_high=5.8)
    assert wss_insertion_loss(fixed, 2, C_BAND.center) == 5.8


def test_mcs_insertion_loss():
    # 10 log10(N) + excess, evaluated with mpmath
    assert mcs_insertion_loss(McsSpec(client_ports=8, excess_loss=2.5)) == pytest.approx(11.5309, abs=1e-4)
    assert mcs_insertion_loss(McsSpec(client_ports=1, excess_loss=0)) == 0
    assert mcs_insertion_loss(McsSpec(client_ports=16, excess_loss=2.5)) == pytest.approx(14.5412, abs=1e-4)
    assert abs(McsSpec(client_ports=8).intrinsic_loss - 9.03) < 0.05


@pytest.mark.parametrize("n", [4, 8, 12, 16, 24])
def test_mcs_intrinsic_loss_exact(n):
    assert abs(McsSpec(client_ports=n).intrinsic_loss - 10 * math.log10(n)) < 1e-9


def test_mcs_loss_increasing():
    losses = [mcs_insertion_loss(McsSpec(client_ports=n)) for n in range(1, 65)]
    assert all(b > a for a, b in zip(losses, losses[1:]))


def test_mcs_isolation():
    for f in grid(50)[::7]:
        assert mcs_cumulative_isolation(MCS, f) >= 45
    with pytest.raises(BandUnsupportedError):
        mcs_cumulative_isolation(MCS, 200.0)
    flat_edge = mcs_cumulative_isolation(MCS, C_BAND.low_edge)
    assert flat_edge == mcs_cumulative_isolation(MCS, C_BAND.center)
    rippled = McsSpec(isolation_ripple=1.5)
    edge = mcs_cumulative_isolation(rippled, C_BAND.low_edge)
    center = mcs_cumulative_isolation(rippled, C_BAND.center)
    assert edge >= 45 and center >= 45
    assert abs(center - edge) <= 1.5 + 1e-12


def test_mcs_spec_invariants():
    with pytest.raises(InvalidArgumentError):
        McsSpec(min_cumulative_isolation=0)


def test_edfa():
    c = EdfaSpec("C", 20, 20)
    assert edfa_apply(c, -15, C_BAND) == 5
    assert edfa_apply(c, 10, "C") == 20  # output capped
    assert edfa_apply(EdfaSpec("C", 0, 20), -3.2, "C") == -3.2
    with pytest.raises(BandUnsupportedError):
        edfa_apply(c, -15, L_BAND)
    with pytest.raises(InvalidArgumentError):
        edfa_apply(c, float("nan"), "C")


def test_passive_specs():
    with pytest.raises(InvalidArgumentError):
        CouplerSpec(loss_per_pass=-1)
    with pytest.raises(InvalidArgumentError):
        TransceiverSpec(sensitivity_min=5, sensitivity_max=-5)


def test_wss_route():
    state = WssState(CL_WSS, channel_count=96)
    wss_route(state, 2, 5)
    assert state.routes == {5: 2}
    with pytest.raises(ContentionError):
        wss_route(state, 3, 5)
    wss_route(state, 3, 5, strict=False)
    assert state.routes == {5: 3}
    with pytest.raises(InvalidArgumentError):
        wss_route(state, 9, 1)
    with pytest.raises(InvalidArgumentError):
        wss_route(state, 0, 96)


def test_wss_route_all_channels():
    state = WssState(CL_WSS, channel_count=96)
    for ch in range(96):
        wss_route(state, ch % 9, ch)
    assert len(state.routes) == 96


def test_mcs_connect():
    state = McsState(MCS)
    mcs_connect(state, 0, 3)
    with pytest.raises(ClientBusyError):
        mcs_connect(state, 0, 5)
    state = McsState(MCS)
    for client in range(8):
        mcs_connect(state, client, client + 8)
    assert sorted(state.connections.values()) == list(range(8, 16))
    with pytest.raises(InvalidArgumentError):
        mcs_connect(McsState(MCS), 8, 0)
    with pytest.raises(InvalidArgumentError):
        mcs_connect(McsState(MCS), 0, 16)


ops = st.lists(
    st.tuples(st.sampled_from(["route", "route-loose", "release", "connect", "disconnect"]),
              st.integers(-2, 20), st.integers(-2, 20)),
    max_size=80,
)


@settings(max_examples=200)
@given(ops)
def test_switch_state_sequences_keep_invariants(seq):
    wss = WssState(CL_WSS, channel_count=16)
    mcs = McsState(MCS)
    for op, a, b in seq:
        before_w, before_m = dict(wss.routes), dict(mcs.connections)
        try:
            if op == "route":
                wss.route(a, b)
            elif op == "route-loose":
                wss.route(a, b, strict=False)
            elif op == "release":
                wss.release(b)
            elif op == "connect":
                mcs.connect(a, b)
            else:
                mcs.disconnect(a)
        except (ContentionError, ClientBusyError, InvalidArgumentError):
            assert wss.routes == before_w and mcs.connections == before_m
        for ch, port in wss.routes.items():
            assert 0 <= ch < 16 and 0 <= port < 9
        for client, deg in mcs.connections.items():
            assert 0 <= client < 8 and 0 <= deg < 16


@settings(max_examples=20)
@given(st.integers(0, 2**31))
def test_wss_loss_bounds_many_samples(seed):
    for k in range(500):
        v = wss_insertion_loss(CL_WSS, k % 9, C_BAND.low_edge + (k % 480) * 0.01, seed)
        assert 5.1 <= v <= 6.7
