/**
 * Operator input loop: widgets in, rate-limited OperatorInput frames out.
 *
 * Guarantees, regardless of pointer event rate or channel backpressure:
 * - at most maxRate messages per second leave the loop;
 * - pedal edges are queued and retried until the channel takes them,
 *   exactly one message per edge, in order, never dropped;
 * - drag and gimbal samples collapse to the latest value, so backpressure
 *   drops intermediate samples only;
 * - timestamps are strictly monotone;
 * - drag targets are clamped to the frame volume once geometry is known.
 */

import type { ConfigSnapshot, Vec3 } from "./protocol.js";
import { encodeOperatorInput } from "./protocol.js";

export type GimbalTargets = [number, number, number, number, number];

export interface InputChannel {
  /** Try to transmit one frame; false signals backpressure (frame not sent). */
  send(frame: string): boolean;
}

export interface InputLoopOptions {
  channel: InputChannel;
  /** Monotonic-ish clock in seconds; the loop enforces strict monotonicity. */
  now: () => number;
  maxRate?: number;
}

const TIMESTAMP_EPSILON = 1e-6;

export class InputLoop {
  private readonly channel: InputChannel;
  private readonly now: () => number;
  private readonly minInterval: number;

  private seq = 0;
  private lastTimestamp = -Infinity;
  private nextSendAt = -Infinity;

  private pedalLevel = false;
  private pendingEdges: boolean[] = [];
  private pendingDrag: Vec3 | null = null;
  private pendingGimbal: GimbalTargets | null = null;

  private boundsLo: Vec3 | null = null;
  private boundsHi: Vec3 | null = null;

  constructor(options: InputLoopOptions) {
    this.channel = options.channel;
    this.now = options.now;
    this.minInterval = 1.0 / (options.maxRate ?? 50);
  }

  /** Learn the frame volume for client-side drag clamping. */
  observeSnapshot(snapshot: ConfigSnapshot): void {
    const points = snapshot.geometry.frame_anchors;
    const lo: Vec3 = [Infinity, Infinity, Infinity];
    const hi: Vec3 = [-Infinity, -Infinity, -Infinity];
    for (const point of points) {
      for (let axis = 0; axis < 3; axis++) {
        lo[axis] = Math.min(lo[axis]!, point[axis]!);
        hi[axis] = Math.max(hi[axis]!, point[axis]!);
      }
    }
    this.boundsLo = lo;
    this.boundsHi = hi;
  }

  clampDrag(target: Vec3): Vec3 {
    if (this.boundsLo === null || this.boundsHi === null) {
      return target;
    }
    return [0, 1, 2].map((axis) =>
      Math.min(Math.max(target[axis]!, this.boundsLo![axis]!), this.boundsHi![axis]!),
    ) as Vec3;
  }

  /** Pointer produced a new drag target; intermediate samples collapse. */
  drag(target: Vec3): void {
    this.pendingDrag = this.clampDrag(target);
  }

  /** Level input from the pedal widget; only level changes queue an edge. */
  pedal(down: boolean): void {
    if (down === this.pedalLevel) {
      return;
    }
    this.pedalLevel = down;
    this.pendingEdges.push(down);
  }

  gimbal(targets: GimbalTargets): void {
    this.pendingGimbal = targets;
  }

  get queuedEdges(): number {
    return this.pendingEdges.length;
  }

  /**
   * Emit what the rate budget allows; call from the frame loop or a timer.
   * Pedal edges go first and survive channel refusal; drag and gimbal are
   * merged into a single message carrying the latest values.
   */
  pump(): void {
    while (this.pendingEdges.length > 0) {
      if (!this.rateAllows()) {
        return;
      }
      const level = this.pendingEdges[0]!;
      if (!this.transmit({ pedal: level, dragTarget: null, gimbalTargets: null })) {
        return; // backpressure: keep the edge queued, retry on the next pump
      }
      this.pendingEdges.shift();
    }
    if ((this.pendingDrag !== null || this.pendingGimbal !== null) && this.rateAllows()) {
      const sent = this.transmit({
        pedal: this.pedalLevel,
        dragTarget: this.pendingDrag,
        gimbalTargets: this.pendingGimbal,
      });
      if (sent) {
        this.pendingDrag = null;
        this.pendingGimbal = null;
      }
    }
  }

  private rateAllows(): boolean {
    return this.now() >= this.nextSendAt;
  }

  private transmit(partial: {
    pedal: boolean;
    dragTarget: Vec3 | null;
    gimbalTargets: GimbalTargets | null;
  }): boolean {
    const timestamp = Math.max(this.now(), this.lastTimestamp + TIMESTAMP_EPSILON);
    const frame = encodeOperatorInput(this.seq, { ...partial, timestamp });
    if (!this.channel.send(frame)) {
      return false;
    }
    this.seq += 1;
    this.lastTimestamp = timestamp;
    this.nextSendAt = this.now() + this.minInterval;
    return true;
  }
}
