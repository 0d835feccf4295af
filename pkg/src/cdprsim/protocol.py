"""Wire protocol of the simulation service.

Messages are single-line JSON objects with a mandatory "type" field, framed
as "<N> <json>" where N is the UTF-8 byte length of the JSON body.  The
frame survives transports that do not preserve message boundaries and makes
captured streams trivially parseable.  Encoding is canonical (sorted keys,
no whitespace), so a message round-trips byte-exactly.

Types
-----
state_update     server -> client, one per broadcast tick
config_snapshot  server -> client, once after connect
operator_input   client -> server, drag/gimbal/pedal message
ack / nack       server -> client, per operator_input received

Angles are radians, lengths meters, forces newtons, times seconds.
"""

import json
import math

import numpy as np

from .config import config_to_dict
from .errors import ProtocolError
from .session import GimbalState
from .simulation import OperatorInput

MESSAGE_TYPES = ("state_update", "config_snapshot", "operator_input", "ack", "nack")


def encode_message(message):
    """Canonical frame for a message dict: '<bytes> <compact json>'."""
    if not isinstance(message, dict) or message.get("type") not in MESSAGE_TYPES:
        raise ProtocolError(f"cannot encode message {message!r}")
    body = json.dumps(message, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return f"{len(body.encode('utf-8'))} {body}"


def decode_message(frame):
    """Parse and validate one frame; raises ProtocolError on any defect."""
    if not isinstance(frame, str):
        raise ProtocolError(f"frame must be text, got {type(frame).__name__}")
    prefix, sep, body = frame.partition(" ")
    if not sep or not prefix.isdigit():
        raise ProtocolError("frame lacks a byte-length prefix")
    if int(prefix) != len(body.encode("utf-8")):
        raise ProtocolError(
            f"length prefix {prefix} does not match body ({len(body.encode('utf-8'))} bytes)"
        )
    try:
        message = json.loads(body)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"body is not valid JSON: {exc}") from exc
    if not isinstance(message, dict):
        raise ProtocolError("message must be a JSON object")
    kind = message.get("type")
    if kind not in MESSAGE_TYPES:
        raise ProtocolError(f"unknown message type {kind!r}")
    _VALIDATORS[kind](message)
    return message


def _require(message, key, check, description):
    if key not in message:
        raise ProtocolError(f"{message['type']}: missing field {key!r}")
    if not check(message[key]):
        raise ProtocolError(f"{message['type']}: field {key!r} must be {description}")


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def _is_vector(value, n):
    return (
        isinstance(value, list)
        and len(value) == n
        and all(_is_number(v) for v in value)
    )


def _validate_operator_input(message):
    _require(message, "seq", lambda v: isinstance(v, int) and not isinstance(v, bool) and v >= 0,
             "a nonnegative integer")
    _require(message, "timestamp", _is_number, "a finite number")
    _require(message, "pedal", lambda v: isinstance(v, bool), "a boolean")
    _require(message, "drag_target", lambda v: v is None or _is_vector(v, 3),
             "null or 3 finite numbers")
    _require(message, "gimbal_targets", lambda v: v is None or _is_vector(v, 5),
             "null or 5 finite numbers")


def _validate_state_update(message):
    _require(message, "arm", lambda v: isinstance(v, str), "a string")
    _require(message, "time", _is_number, "a finite number")
    _require(message, "translation", lambda v: _is_vector(v, 3), "3 finite numbers")
    _require(message, "orientation", lambda v: _is_vector(v, 3), "3 finite numbers")
    _require(message, "gimbal", lambda v: _is_vector(v, 5), "5 finite numbers")
    _require(message, "tensions", lambda v: _is_vector(v, 8), "8 finite numbers")
    _require(message, "motor_currents", lambda v: _is_vector(v, 8), "8 finite numbers")
    _require(message, "clutch_engaged", lambda v: isinstance(v, bool), "a boolean")
    _require(message, "scale", lambda v: _is_number(v) and v > 0, "a positive number")
    _require(message, "mode", lambda v: v in ("position", "current"),
             "'position' or 'current'")
    _require(message, "wall_breached", lambda v: isinstance(v, bool), "a boolean")
    _require(message, "pulse", _is_number, "a finite number")
    _require(message, "repulsion", lambda v: _is_vector(v, 3), "3 finite numbers")
    _require(message, "slave_cmd", lambda v: _is_vector(v, 8), "8 finite numbers")
    _require(message, "delayed_slave_cmd", lambda v: _is_vector(v, 8), "8 finite numbers")
    _require(message, "fault", lambda v: v is None or isinstance(v, str), "null or a string")


def _validate_config_snapshot(message):
    _require(message, "arm", lambda v: isinstance(v, str), "a string")
    _require(message, "geometry", lambda v: isinstance(v, dict), "an object")
    for key in ("frame_anchors", "body_anchors"):
        anchors = message["geometry"].get(key)
        if not (isinstance(anchors, list) and len(anchors) == 8
                and all(_is_vector(row, 3) for row in anchors)):
            raise ProtocolError(f"config_snapshot: geometry.{key} must be 8 rows of 3 numbers")
    _require(message, "config", lambda v: isinstance(v, dict), "an object")
    _require(message, "wall_center", lambda v: _is_vector(v, 3), "3 finite numbers")
    _require(message, "wall_radii",
             lambda v: _is_vector(v, 3) and all(r > 0 for r in v),
             "3 positive numbers")


def _validate_ack(message):
    _require(message, "seq", lambda v: isinstance(v, int) and not isinstance(v, bool) and v >= 0,
             "a nonnegative integer")


def _validate_nack(message):
    _require(message, "reason", lambda v: isinstance(v, str) and v, "a nonempty string")
    _require(message, "seq",
             lambda v: v is None or (isinstance(v, int) and not isinstance(v, bool) and v >= 0),
             "null or a nonnegative integer")


_VALIDATORS = {
    "operator_input": _validate_operator_input,
    "state_update": _validate_state_update,
    "config_snapshot": _validate_config_snapshot,
    "ack": _validate_ack,
    "nack": _validate_nack,
}


# --- message builders ------------------------------------------------------

def state_update(arm, state):
    """StateUpdate message for one SimState snapshot."""
    return {
        "type": "state_update",
        "arm": arm,
        "time": float(state.time),
        "translation": state.estimated_pose.translation.tolist(),
        "orientation": state.estimated_pose.orientation.tolist(),
        "gimbal": state.session.gimbal.as_array().tolist(),
        "tensions": state.cable.tensions.tolist(),
        "motor_currents": state.motor_currents.tolist(),
        "clutch_engaged": bool(state.session.clutch_engaged),
        "scale": float(state.session.scale),
        "mode": state.session.mode.value,
        "wall_breached": bool(state.wall_breached),
        "pulse": float(state.pulse),
        "repulsion": state.repulsion[:3].tolist(),
        "slave_cmd": state.slave_cmd.tolist(),
        "delayed_slave_cmd": state.delayed_slave_cmd.tolist(),
        "fault": state.fault,
    }


def config_snapshot(arm, geometry, config):
    """ConfigSnapshot message sent once after a client connects."""
    wall = config.haptics.wall()
    return {
        "type": "config_snapshot",
        "arm": arm,
        "geometry": {
            "frame_anchors": geometry.frame_anchors.tolist(),
            "body_anchors": geometry.body_anchors.tolist(),
        },
        "config": config_to_dict(config),
        "wall_center": wall.center.tolist(),
        "wall_radii": wall.radii.tolist(),
    }


def operator_input_message(seq, operator_input):
    """OperatorInput message from a simulation-level input object."""
    drag = operator_input.drag_target
    gimbal = operator_input.gimbal_targets
    return {
        "type": "operator_input",
        "seq": int(seq),
        "timestamp": float(operator_input.timestamp),
        "pedal": bool(operator_input.pedal),
        "drag_target": None if drag is None else [float(v) for v in drag],
        "gimbal_targets": None if gimbal is None else gimbal.as_array().tolist(),
    }


def parse_operator_input(message):
    """(seq, OperatorInput) from a validated operator_input message."""
    gimbal = message["gimbal_targets"]
    return message["seq"], OperatorInput(
        drag_target=None if message["drag_target"] is None else np.array(message["drag_target"]),
        gimbal_targets=None if gimbal is None else GimbalState(*gimbal),
        pedal=message["pedal"],
        timestamp=message["timestamp"],
    )


def ack(seq):
    return {"type": "ack", "seq": int(seq)}


def nack(reason, seq=None):
    return {"type": "nack", "reason": str(reason), "seq": seq}
