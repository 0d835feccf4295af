/**
 * Browser entry point: connects to the sim service, feeds server frames
 * through the view-model reducer, renders at animation-frame rate, and
 * turns pointer/keyboard/slider widgets into operator input messages.
 *
 * URL parameters: ?host=127.0.0.1&port=8765&arm=left
 */

import { decodeFrame, ProtocolError, type Vec3 } from "./protocol.js";
import { InputLoop, type GimbalTargets, type InputChannel } from "./input.js";
import {
  initialView,
  inputsEnabled,
  reduce,
  type ConsoleEvent,
  type ConsoleView,
} from "./viewmodel.js";
import { createRenderer, type Renderer } from "./render3d.js";

const params = new URLSearchParams(window.location.search);
const host = params.get("host") ?? window.location.hostname ?? "127.0.0.1";
const port = params.get("port") ?? "8765";
const arm = params.get("arm") ?? "left";
const serviceUrl = `ws://${host}:${port}/${arm}`;

const MAX_BUFFERED_BYTES = 64 * 1024;
const RECONNECT_MIN_S = 0.5;
const RECONNECT_MAX_S = 5.0;

function element<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (found === null) {
    throw new Error(`missing element #${id}`);
  }
  return found as T;
}

const sceneCanvas = element<HTMLCanvasElement>("scene");
const hudCanvas = element<HTMLCanvasElement>("hud");
const banner = element<HTMLDivElement>("banner");
const pedalButton = element<HTMLButtonElement>("pedal");
const sliders: Record<string, HTMLInputElement> = {};
for (const name of ["roll", "pitch", "yaw", "trigger", "knob"]) {
  sliders[name] = element<HTMLInputElement>(`gimbal-${name}`);
}

let view: ConsoleView = initialView();
let socket: WebSocket | null = null;
let reconnectDelay = RECONNECT_MIN_S;

const clock = () => performance.now() / 1000;

const channel: InputChannel = {
  send(frame: string): boolean {
    if (
      socket === null ||
      socket.readyState !== WebSocket.OPEN ||
      !inputsEnabled(view) ||
      socket.bufferedAmount > MAX_BUFFERED_BYTES
    ) {
      return false;
    }
    socket.send(frame);
    return true;
  },
};

const inputLoop = new InputLoop({ channel, now: clock });

function dispatch(event: ConsoleEvent): void {
  view = reduce(view, event);
}

function connect(): void {
  dispatch({ kind: "connecting" });
  const ws = new WebSocket(serviceUrl);
  socket = ws;
  ws.onopen = () => {
    reconnectDelay = RECONNECT_MIN_S;
    dispatch({ kind: "open" });
  };
  ws.onmessage = (event: MessageEvent) => {
    try {
      const message = decodeFrame(String(event.data));
      dispatch({ kind: "server", message, receivedAt: clock() });
      if (message.type === "config_snapshot") {
        inputLoop.observeSnapshot(message);
      }
    } catch (error) {
      if (error instanceof ProtocolError) {
        console.warn("dropping bad frame:", error.message);
        dispatch({ kind: "protocol-error" });
      } else {
        throw error;
      }
    }
  };
  ws.onclose = () => {
    if (socket === ws) {
      socket = null;
      dispatch({ kind: "closed" });
      window.setTimeout(connect, reconnectDelay * 1000);
      reconnectDelay = Math.min(reconnectDelay * 2, RECONNECT_MAX_S);
    }
  };
  ws.onerror = () => ws.close();
}

// --- pointer bindings -----------------------------------------------------
// Left drag moves the target on the plane z = dragHeight; the wheel moves
// that plane up and down; right (or ctrl) drag orbits; shift+wheel zooms.

let renderer: Renderer | null = null;
let dragging = false;
let orbiting = false;
let lastPointer: [number, number] = [0, 0];
let dragHeight = 0.0;
let haveDragHeight = false;

function canvasPosition(event: PointerEvent): [number, number] {
  const rect = sceneCanvas.getBoundingClientRect();
  return [event.clientX - rect.left, event.clientY - rect.top];
}

function applyDrag(event: PointerEvent): void {
  if (renderer === null || !inputsEnabled(view)) {
    return;
  }
  if (!haveDragHeight && view.state !== null) {
    dragHeight = view.state.translation[2];
    haveDragHeight = true;
  }
  const [px, py] = canvasPosition(event);
  const picked = renderer.pickGround(px, py, dragHeight);
  if (picked !== null) {
    inputLoop.drag(picked);
  }
}

sceneCanvas.addEventListener("pointerdown", (event: PointerEvent) => {
  sceneCanvas.setPointerCapture(event.pointerId);
  lastPointer = canvasPosition(event);
  if (event.button === 0 && !event.ctrlKey) {
    dragging = true;
    applyDrag(event);
  } else {
    orbiting = true;
  }
});

sceneCanvas.addEventListener("pointermove", (event: PointerEvent) => {
  const position = canvasPosition(event);
  if (dragging) {
    applyDrag(event);
  } else if (orbiting && renderer !== null) {
    renderer.orbit(
      -(position[0] - lastPointer[0]) * 0.01,
      (position[1] - lastPointer[1]) * 0.01,
    );
  }
  lastPointer = position;
});

const releasePointer = () => {
  dragging = false;
  orbiting = false;
};
sceneCanvas.addEventListener("pointerup", releasePointer);
sceneCanvas.addEventListener("pointercancel", releasePointer);

sceneCanvas.addEventListener(
  "wheel",
  (event: WheelEvent) => {
    event.preventDefault();
    if (event.shiftKey) {
      renderer?.zoom(event.deltaY > 0 ? 1.1 : 0.9);
      return;
    }
    if (!haveDragHeight && view.state !== null) {
      dragHeight = view.state.translation[2];
      haveDragHeight = true;
    }
    dragHeight -= event.deltaY * 0.0005;
    if (inputsEnabled(view) && view.state !== null) {
      const target: Vec3 = [
        view.state.translation[0],
        view.state.translation[1],
        dragHeight,
      ];
      inputLoop.drag(target);
    }
  },
  { passive: false },
);

// --- pedal and gimbal bindings --------------------------------------------

function setPedal(down: boolean): void {
  inputLoop.pedal(down);
  pedalButton.classList.toggle("down", down);
}

window.addEventListener("keydown", (event: KeyboardEvent) => {
  if (event.code === "Space" && !event.repeat) {
    event.preventDefault();
    setPedal(true);
  }
});
window.addEventListener("keyup", (event: KeyboardEvent) => {
  if (event.code === "Space") {
    event.preventDefault();
    setPedal(false);
  }
});
pedalButton.addEventListener("pointerdown", () => setPedal(true));
pedalButton.addEventListener("pointerup", () => setPedal(false));
pedalButton.addEventListener("pointerleave", () => setPedal(false));

function readGimbal(): GimbalTargets {
  return [
    Number(sliders["roll"]!.value),
    Number(sliders["pitch"]!.value),
    Number(sliders["yaw"]!.value),
    Number(sliders["trigger"]!.value),
    Number(sliders["knob"]!.value),
  ];
}

for (const slider of Object.values(sliders)) {
  slider.addEventListener("input", () => inputLoop.gimbal(readGimbal()));
}

// --- render loop ----------------------------------------------------------

function refreshBanner(): void {
  if (view.connection === "open") {
    const nack = view.lastNack;
    banner.textContent = nack === null ? "" : `rejected: ${nack.reason}`;
    banner.className = nack === null ? "hidden" : "warn";
  } else {
    banner.textContent =
      view.connection === "connecting"
        ? `connecting to ${serviceUrl}...`
        : `disconnected from ${serviceUrl}, retrying... (inputs disabled)`;
    banner.className = "warn";
  }
}

async function start(): Promise<void> {
  renderer = await createRenderer(sceneCanvas, hudCanvas);
  document.title = `cdprsim console (${arm}, ${renderer.mode})`;
  connect();
  const frame = () => {
    inputLoop.pump();
    refreshBanner();
    renderer!.draw(view, clock());
    window.requestAnimationFrame(frame);
  };
  window.requestAnimationFrame(frame);
}

void start();
