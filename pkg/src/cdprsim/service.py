"""WebSocket service around two independent arm simulators.

A single asyncio task owns both simulators and advances them at the
configured tick rate; connection handlers only decode messages into
per-arm FIFO queues and send broadcasts, so all mutable state stays with
the loop.  Each arm accepts one client at /ws/left or /ws/right, gets a
ConfigSnapshot on connect, then a StateUpdate every broadcast tick.  Every
operator_input is answered with an ack, every defective frame with a nack;
a defective frame never drops the connection.
"""

import asyncio
import logging
import math
from collections import deque

from websockets.asyncio.server import serve

from .errors import ProtocolError
from .protocol import (
    ack,
    config_snapshot,
    decode_message,
    encode_message,
    nack,
    parse_operator_input,
    state_update,
)
from .simulation import Simulator, TrajectoryRecorder

log = logging.getLogger(__name__)

ARMS = ("left", "right")


def _offer(outbox, frame):
    """Queue a frame, discarding the oldest one when the client lags."""
    while True:
        try:
            outbox.put_nowait(frame)
            return
        except asyncio.QueueFull:
            try:
                outbox.get_nowait()
            except asyncio.QueueEmpty:
                pass


OUTBOX_DEPTH = 16


class ArmSession:
    """One simulator plus its input queue, client slot and recorder."""

    def __init__(self, name, geometry, config, record=False):
        self.name = name
        self.sim = Simulator(geometry, config)
        self.queue = deque()
        self.client = None
        self.outbox = None
        self.last_timestamp = -math.inf
        self.recorder = TrajectoryRecorder(geometry, config) if record else None
        self.tick_index = 0

    def tick(self):
        """Consume at most one queued input and advance one step."""
        operator_input = self.queue.popleft() if self.queue else None
        state = self.sim.step(operator_input)
        if self.recorder is not None:
            self.recorder.record(state, operator_input)
        self.tick_index += 1
        return state


class SimService:
    """Bind, run the loop, and hand out per-arm connections."""

    def __init__(self, geometry, config, record_prefix=None, realtime=True):
        self.geometry = geometry
        self.config = config
        self.record_prefix = record_prefix
        self.realtime = realtime
        self.arms = {
            name: ArmSession(name, geometry, config, record=record_prefix is not None)
            for name in ARMS
        }
        self._server = None
        self._loop_task = None

    @property
    def port(self):
        return self._server.sockets[0].getsockname()[1]

    async def start(self):
        self._server = await serve(
            self._handler, self.config.sim.host, self.config.sim.port
        )
        self._loop_task = asyncio.create_task(self._run_loop())
        log.info("listening on %s:%d", self.config.sim.host, self.port)

    async def stop(self):
        if self._loop_task is not None:
            self._loop_task.cancel()
            try:
                await self._loop_task
            except asyncio.CancelledError:
                pass
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()
        self.write_records()

    def write_records(self):
        if self.record_prefix is None:
            return
        for name, arm in self.arms.items():
            path = f"{self.record_prefix}.{name}.traj"
            arm.recorder.write(path)
            log.info("wrote %d ticks to %s", arm.tick_index, path)

    async def serve_forever(self):
        await self.start()
        try:
            await self._server.serve_forever()
        finally:
            await self.stop()

    async def _run_loop(self):
        dt = self.config.sim.dt
        divisor = self.config.sim.broadcast_divisor
        loop = asyncio.get_running_loop()
        next_tick = loop.time()
        while True:
            for arm in self.arms.values():
                state = arm.tick()
                if arm.tick_index % divisor == 0 and arm.outbox is not None:
                    _offer(arm.outbox, encode_message(state_update(arm.name, state)))
            if self.realtime:
                next_tick += dt
                delay = next_tick - loop.time()
                if delay > 0:
                    await asyncio.sleep(delay)
                elif delay < -1.0:
                    # fell badly behind wall clock; resynchronize instead of spiraling
                    next_tick = loop.time()
            else:
                await asyncio.sleep(0)

    async def _handler(self, websocket):
        path = websocket.request.path
        name = path.rstrip("/").rsplit("/", 1)[-1]
        arm = self.arms.get(name)
        if arm is None:
            await websocket.close(1008, f"unknown endpoint {path}")
            return
        if arm.client is not None:
            await websocket.send(encode_message(nack(f"arm {name} already has a client")))
            await websocket.close(1008, "arm busy")
            return

        arm.client = websocket
        arm.outbox = asyncio.Queue(maxsize=OUTBOX_DEPTH)
        arm.last_timestamp = -math.inf
        log.info("client connected to arm %s", name)
        await websocket.send(encode_message(config_snapshot(name, self.geometry, self.config)))
        sender = asyncio.create_task(self._drain_outbox(arm.outbox, websocket))
        try:
            async for frame in websocket:
                await self._handle_frame(arm, websocket, frame)
        finally:
            sender.cancel()
            try:
                await sender
            except asyncio.CancelledError:
                pass
            if arm.client is websocket:
                arm.client = None
                arm.outbox = None
            log.info("client left arm %s", name)

    async def _drain_outbox(self, outbox, websocket):
        try:
            while True:
                await websocket.send(await outbox.get())
        except Exception:
            pass

    async def _handle_frame(self, arm, websocket, frame):
        seq = None
        try:
            if isinstance(frame, bytes):
                frame = frame.decode("utf-8", errors="replace")
            message = decode_message(frame)
            if message["type"] != "operator_input":
                raise ProtocolError(f"unexpected message type {message['type']!r}")
            seq, operator_input = parse_operator_input(message)
            if operator_input.timestamp < arm.last_timestamp:
                raise ProtocolError(
                    f"timestamps must be monotone per client "
                    f"({operator_input.timestamp} after {arm.last_timestamp})"
                )
            arm.last_timestamp = operator_input.timestamp
            arm.queue.append(operator_input)
            await websocket.send(encode_message(ack(seq)))
        except ProtocolError as exc:
            await websocket.send(encode_message(nack(str(exc), seq)))
        except ValueError as exc:
            await websocket.send(encode_message(nack(f"bad input values: {exc}", seq)))


def run_service(geometry, config, record_prefix=None):
    """Blocking entry point used by the CLI serve subcommand."""
    service = SimService(geometry, config, record_prefix=record_prefix)

    async def main():
        try:
            await service.serve_forever()
        except asyncio.CancelledError:
            pass

    try:
        asyncio.run(main())
    except KeyboardInterrupt:
        service.write_records()
