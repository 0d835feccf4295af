/**
 * Console view model: a pure reduction of server messages.
 *
 * The view renders server-authoritative state only.  The model never
 * invents or extrapolates a pose; the render layer may flag the view as
 * stale once the latest state outlives one broadcast interval, but it
 * still draws the last authoritative sample.
 */

import type { ConfigSnapshot, Nack, ServerMessage, StateUpdate } from "./protocol.js";

export type ConnectionStatus = "connecting" | "open" | "closed";

export interface ConsoleView {
  connection: ConnectionStatus;
  snapshot: ConfigSnapshot | null;
  state: StateUpdate | null;
  /** Wall-clock seconds at which `state` arrived (for staleness only). */
  stateReceivedAt: number | null;
  lastAckSeq: number | null;
  lastNack: Nack | null;
  protocolErrors: number;
}

export type ConsoleEvent =
  | { kind: "connecting" }
  | { kind: "open" }
  | { kind: "closed" }
  | { kind: "server"; message: ServerMessage; receivedAt: number }
  | { kind: "protocol-error" };

export function initialView(): ConsoleView {
  return {
    connection: "connecting",
    snapshot: null,
    state: null,
    stateReceivedAt: null,
    lastAckSeq: null,
    lastNack: null,
    protocolErrors: 0,
  };
}

export function reduce(view: ConsoleView, event: ConsoleEvent): ConsoleView {
  switch (event.kind) {
    case "connecting":
      return { ...view, connection: "connecting" };
    case "open":
      return { ...view, connection: "open" };
    case "closed":
      // keep the last snapshot/state for the reconnect screen, inputs disabled
      return { ...view, connection: "closed" };
    case "protocol-error":
      return { ...view, protocolErrors: view.protocolErrors + 1 };
    case "server":
      switch (event.message.type) {
        case "config_snapshot":
          return { ...view, snapshot: event.message };
        case "state_update":
          return { ...view, state: event.message, stateReceivedAt: event.receivedAt };
        case "ack":
          return { ...view, lastAckSeq: event.message.seq };
        case "nack":
          return { ...view, lastNack: event.message };
      }
  }
}

/** Broadcast interval in seconds, read from the snapshot config (fallback 0.02). */
export function broadcastInterval(view: ConsoleView): number {
  const sim = view.snapshot?.config["sim"];
  if (sim && typeof sim === "object") {
    const dt = (sim as Record<string, unknown>)["dt"];
    const divisor = (sim as Record<string, unknown>)["broadcast_divisor"];
    if (typeof dt === "number" && typeof divisor === "number" && dt > 0 && divisor >= 1) {
      return dt * divisor;
    }
  }
  return 0.02;
}

/** True once the latest state outlived one broadcast interval (plus margin). */
export function isStale(view: ConsoleView, nowSeconds: number): boolean {
  if (view.state === null || view.stateReceivedAt === null) {
    return true;
  }
  return nowSeconds - view.stateReceivedAt > 2.0 * broadcastInterval(view);
}

export function inputsEnabled(view: ConsoleView): boolean {
  return view.connection === "open" && view.snapshot !== null;
}
