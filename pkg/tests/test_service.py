"""Tests for the WebSocket service.

Each test runs a real server on an ephemeral port with realtime pacing
disabled, so the simulation loop free-runs and tests wait on simulated
time instead of wall-clock sleeps.
"""

import asyncio
from contextlib import asynccontextmanager

import numpy as np
import pytest
from websockets.asyncio.client import connect

from cdprsim.config import config_from_dict
from cdprsim.geometry import default_geometry
from cdprsim.protocol import decode_message, encode_message, operator_input_message
from cdprsim.service import SimService
from cdprsim.simulation import OperatorInput, read_trajectory, replay


def service_config(**sim_overrides):
    sim = {"port": 0, "noise_sigma": 0.0}
    sim.update(sim_overrides)
    return config_from_dict({"sim": sim})


@asynccontextmanager
async def running_service(config=None, record_prefix=None):
    geometry = default_geometry()
    config = config if config is not None else service_config()
    service = SimService(
        geometry, config, record_prefix=record_prefix, realtime=False
    )
    await service.start()
    try:
        yield service
    finally:
        await service.stop()


def url(service, arm):
    return f"ws://127.0.0.1:{service.port}/ws/{arm}"


async def recv_message(ws, timeout=10.0):
    frame = await asyncio.wait_for(ws.recv(), timeout)
    return decode_message(frame)


async def recv_type(ws, wanted, timeout=10.0):
    """Read frames until one of the wanted type arrives."""
    for _ in range(200000):
        message = await recv_message(ws, timeout)
        if message["type"] == wanted:
            return message
    raise AssertionError(f"no {wanted} message received")


async def recv_state_at(ws, sim_time, timeout=10.0):
    """Read state updates until simulated time reaches sim_time."""
    for _ in range(200000):
        message = await recv_type(ws, "state_update", timeout)
        if message["time"] >= sim_time:
            return message
    raise AssertionError(f"simulation never reached t={sim_time}")


async def send_input(ws, seq, timestamp, **kwargs):
    operator_input = OperatorInput(timestamp=timestamp, **kwargs)
    await ws.send(encode_message(operator_input_message(seq, operator_input)))


def run(coro):
    asyncio.run(asyncio.wait_for(coro, timeout=60.0))


class TestHandshake:
    def test_config_snapshot_first(self):
        async def main():
            async with running_service() as service:
                async with connect(url(service, "left")) as ws:
                    message = await recv_message(ws)
                    assert message["type"] == "config_snapshot"
                    assert message["arm"] == "left"
                    geometry = default_geometry()
                    assert np.allclose(
                        message["geometry"]["frame_anchors"], geometry.frame_anchors
                    )
                    assert np.allclose(
                        message["geometry"]["body_anchors"], geometry.body_anchors
                    )
                    assert message["wall_radii"] == list(
                        service.config.haptics.wall_radii
                    )

        run(main())

    def test_state_updates_follow(self):
        async def main():
            async with running_service() as service:
                async with connect(url(service, "right")) as ws:
                    await recv_type(ws, "config_snapshot")
                    first = await recv_type(ws, "state_update")
                    second = await recv_type(ws, "state_update")
                    dt = service.config.sim.dt
                    divisor = service.config.sim.broadcast_divisor
                    spacing = second["time"] - first["time"]
                    # a lagging reader may skip broadcasts, but never get
                    # anything off the broadcast grid
                    ratio = spacing / (dt * divisor)
                    assert round(ratio) >= 1
                    assert ratio == pytest.approx(round(ratio), abs=1e-6)
                    assert first["arm"] == "right"
                    assert len(first["tensions"]) == 8
                    assert len(first["motor_currents"]) == 8

        run(main())

    def test_unknown_path_rejected(self):
        async def main():
            async with running_service() as service:
                bad = f"ws://127.0.0.1:{service.port}/ws/middle"
                async with connect(bad) as ws:
                    with pytest.raises(Exception):
                        await asyncio.wait_for(ws.recv(), timeout=10.0)

        run(main())


class TestInputFlow:
    def test_input_acked_and_applied(self):
        async def main():
            async with running_service() as service:
                async with connect(url(service, "left")) as ws:
                    await recv_type(ws, "config_snapshot")
                    start = await recv_type(ws, "state_update")
                    target = [0.03, -0.02, 0.01]
                    await send_input(ws, 7, 0.0, drag_target=target)
                    ack = await recv_type(ws, "ack")
                    assert ack["seq"] == 7
                    settled = await recv_state_at(ws, start["time"] + 0.6)
                    assert np.allclose(settled["translation"], target, atol=2e-3)

        run(main())

    def test_pedal_engages_clutch(self):
        async def main():
            async with running_service() as service:
                async with connect(url(service, "left")) as ws:
                    await recv_type(ws, "config_snapshot")
                    start = await recv_type(ws, "state_update")
                    assert start["clutch_engaged"] is False
                    await send_input(ws, 1, 0.0, pedal=True)
                    await recv_type(ws, "ack")
                    engaged = await recv_state_at(ws, start["time"] + 0.05)
                    assert engaged["clutch_engaged"] is True

        run(main())

    def test_malformed_frame_nacked_stream_continues(self):
        async def main():
            async with running_service() as service:
                async with connect(url(service, "left")) as ws:
                    await recv_type(ws, "config_snapshot")
                    await ws.send("this is not a frame")
                    nack = await recv_type(ws, "nack")
                    assert nack["reason"]
                    await send_input(ws, 3, 0.0)
                    ack = await recv_type(ws, "ack")
                    assert ack["seq"] == 3

        run(main())

    def test_wrong_type_nacked(self):
        async def main():
            async with running_service() as service:
                async with connect(url(service, "left")) as ws:
                    await recv_type(ws, "config_snapshot")
                    await ws.send(encode_message({"type": "ack", "seq": 1}))
                    nack = await recv_type(ws, "nack")
                    assert "unexpected message type" in nack["reason"]

        run(main())

    def test_nonmonotone_timestamp_nacked(self):
        async def main():
            async with running_service() as service:
                async with connect(url(service, "left")) as ws:
                    await recv_type(ws, "config_snapshot")
                    await send_input(ws, 1, 5.0)
                    ack = await recv_type(ws, "ack")
                    assert ack["seq"] == 1
                    await send_input(ws, 2, 4.0)
                    nack = await recv_type(ws, "nack")
                    assert "monotone" in nack["reason"]
                    assert nack["seq"] == 2
                    await send_input(ws, 3, 5.0)
                    ack = await recv_type(ws, "ack")
                    assert ack["seq"] == 3

        run(main())


class TestArms:
    def test_arms_are_independent(self):
        async def main():
            async with running_service() as service:
                async with connect(url(service, "left")) as left, connect(
                    url(service, "right")
                ) as right:
                    await recv_type(left, "config_snapshot")
                    await recv_type(right, "config_snapshot")
                    start = await recv_type(left, "state_update")
                    await send_input(left, 1, 0.0, drag_target=[0.05, 0.0, 0.0])
                    await recv_type(left, "ack")
                    moved = await recv_state_at(left, start["time"] + 0.6)
                    assert moved["translation"][0] == pytest.approx(0.05, abs=2e-3)
                    quiet = await recv_state_at(right, start["time"] + 0.6)
                    assert np.allclose(quiet["translation"], 0.0, atol=1e-9)

        run(main())

    def test_second_client_same_arm_rejected(self):
        async def main():
            async with running_service() as service:
                async with connect(url(service, "left")) as first:
                    await recv_type(first, "config_snapshot")
                    async with connect(url(service, "left")) as second:
                        message = await recv_message(second)
                        assert message["type"] == "nack"
                        assert "already" in message["reason"]
                    await send_input(first, 1, 0.0)
                    ack = await recv_type(first, "ack")
                    assert ack["seq"] == 1

        run(main())

    def test_reconnect_after_disconnect(self):
        async def main():
            async with running_service() as service:
                async with connect(url(service, "left")) as ws:
                    await recv_type(ws, "config_snapshot")
                async with connect(url(service, "left")) as ws:
                    message = await recv_message(ws)
                    assert message["type"] == "config_snapshot"

        run(main())


class TestRecording:
    def test_record_and_replay_byte_identical(self, tmp_path):
        prefix = str(tmp_path / "run")

        async def main():
            async with running_service(record_prefix=prefix) as service:
                async with connect(url(service, "left")) as ws:
                    await recv_type(ws, "config_snapshot")
                    start = await recv_type(ws, "state_update")
                    await send_input(ws, 1, 0.0, drag_target=[0.02, 0.0, 0.01])
                    await recv_type(ws, "ack")
                    await send_input(ws, 2, 0.1, pedal=True)
                    await recv_type(ws, "ack")
                    await recv_state_at(ws, start["time"] + 0.2)

        run(main())

        for arm in ("left", "right"):
            path = f"{prefix}.{arm}.traj"
            trajectory = read_trajectory(path)
            assert len(trajectory.record_lines) > 0
            result = replay(path)
            assert result.comparable
            with open(path, encoding="utf-8") as handle:
                assert result.content == handle.read()

        left = read_trajectory(f"{prefix}.left.traj")
        assert any(record is not None for record in left.inputs)

    def test_record_with_noise_still_replays(self, tmp_path):
        prefix = str(tmp_path / "noisy")
        config = service_config(noise_sigma=5e-4, seed=11)

        async def main():
            async with running_service(config=config, record_prefix=prefix) as service:
                async with connect(url(service, "left")) as ws:
                    await recv_type(ws, "config_snapshot")
                    start = await recv_type(ws, "state_update")
                    await recv_state_at(ws, start["time"] + 0.1)

        run(main())

        path = f"{prefix}.left.traj"
        result = replay(path)
        assert result.comparable
        with open(path, encoding="utf-8") as handle:
            assert result.content == handle.read()
