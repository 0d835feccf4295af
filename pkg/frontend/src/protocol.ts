/**
 * Wire protocol mirror: length-prefixed JSON text frames.
 *
 * Every frame is "<N> <json>" where N is the UTF-8 byte length of the JSON
 * body.  The server validates each message and answers operator input with
 * ack/nack; this module performs the same shape validation on incoming
 * frames so malformed server data fails loudly at the boundary.
 */

import { z } from "zod";

const finite = z.number().finite();
const vec3 = z.tuple([finite, finite, finite]);
const vecN = (n: number) => z.array(finite).length(n);
const anchors = z.array(vec3).length(8);

export const stateUpdateSchema = z.object({
  type: z.literal("state_update"),
  arm: z.string(),
  time: finite,
  translation: vec3,
  orientation: vec3,
  gimbal: vecN(5),
  tensions: vecN(8),
  motor_currents: vecN(8),
  clutch_engaged: z.boolean(),
  scale: finite.positive(),
  mode: z.enum(["position", "current"]),
  wall_breached: z.boolean(),
  pulse: finite,
  repulsion: vec3,
  slave_cmd: vecN(8),
  delayed_slave_cmd: vecN(8),
  fault: z.string().nullable(),
});

export const configSnapshotSchema = z.object({
  type: z.literal("config_snapshot"),
  arm: z.string(),
  geometry: z.object({
    frame_anchors: anchors,
    body_anchors: anchors,
  }),
  config: z.record(z.unknown()),
  wall_center: vec3,
  wall_radii: z.tuple([finite.positive(), finite.positive(), finite.positive()]),
});

export const ackSchema = z.object({
  type: z.literal("ack"),
  seq: z.number().int().nonnegative(),
});

export const nackSchema = z.object({
  type: z.literal("nack"),
  reason: z.string().min(1),
  seq: z.number().int().nullable(),
});

const serverMessageSchema = z.discriminatedUnion("type", [
  stateUpdateSchema,
  configSnapshotSchema,
  ackSchema,
  nackSchema,
]);

export type StateUpdate = z.infer<typeof stateUpdateSchema>;
export type ConfigSnapshot = z.infer<typeof configSnapshotSchema>;
export type Ack = z.infer<typeof ackSchema>;
export type Nack = z.infer<typeof nackSchema>;
export type ServerMessage = z.infer<typeof serverMessageSchema>;

export type Vec3 = [number, number, number];

export interface OperatorInput {
  dragTarget: Vec3 | null;
  gimbalTargets: [number, number, number, number, number] | null;
  pedal: boolean;
  timestamp: number;
}

export class ProtocolError extends Error {}

const encoder = new TextEncoder();

/** Frame a JSON-serializable message: "<utf8 byte length> <json>". */
export function encodeFrame(message: object): string {
  const body = JSON.stringify(message);
  return `${encoder.encode(body).length} ${body}`;
}

export function encodeOperatorInput(seq: number, input: OperatorInput): string {
  return encodeFrame({
    type: "operator_input",
    seq,
    timestamp: input.timestamp,
    pedal: input.pedal,
    drag_target: input.dragTarget,
    gimbal_targets: input.gimbalTargets,
  });
}

/** Parse and validate one server frame; throws ProtocolError on any defect. */
export function decodeFrame(frame: string): ServerMessage {
  const space = frame.indexOf(" ");
  if (space <= 0) {
    throw new ProtocolError("frame has no length prefix");
  }
  const prefix = frame.slice(0, space);
  if (!/^[0-9]+$/.test(prefix)) {
    throw new ProtocolError(`length prefix ${JSON.stringify(prefix)} is not a number`);
  }
  const body = frame.slice(space + 1);
  const byteLength = encoder.encode(body).length;
  if (byteLength !== Number(prefix)) {
    throw new ProtocolError(
      `length prefix ${prefix} does not match body byte length ${byteLength}`,
    );
  }
  let raw: unknown;
  try {
    raw = JSON.parse(body);
  } catch (error) {
    throw new ProtocolError(`body is not valid JSON: ${String(error)}`);
  }
  const result = serverMessageSchema.safeParse(raw);
  if (!result.success) {
    throw new ProtocolError(`message failed validation: ${result.error.message}`);
  }
  return result.data;
}
