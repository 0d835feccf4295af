/**
 * Rig renderer: three.js scene with orbit camera, falling back to a 2D
 * orthographic two-panel view when WebGL or the three module is
 * unavailable.  Both modes draw the frame, the eight cables, the platform,
 * the wall ellipsoid, the delayed slave ghost, the repulsion arrow, and a
 * tension-bar HUD with breach and fault indicators.
 */

import type * as ThreeNS from "three";

import type { StateUpdate, Vec3 } from "./protocol.js";
import type { ConsoleView } from "./viewmodel.js";
import { broadcastInterval, isStale } from "./viewmodel.js";
import {
  barHeights,
  ellipsoidRings,
  frameBounds,
  panelProject,
  panelUnproject,
  platformCorners,
  shakeOffset,
  type Panel,
} from "./scene.js";

export interface Renderer {
  readonly mode: "3d" | "2d";
  draw(view: ConsoleView, nowSeconds: number): void;
  /** Map a pointer position (px, relative to the canvas) onto the plane z = height. */
  pickGround(px: number, py: number, height: number): Vec3 | null;
  orbit(dAzimuth: number, dElevation: number): void;
  zoom(factor: number): void;
  dispose(): void;
}

export async function createRenderer(
  canvas: HTMLCanvasElement,
  hud: HTMLCanvasElement,
): Promise<Renderer> {
  try {
    const three = await import("three");
    return new ThreeRenderer(three, canvas, hud);
  } catch (error) {
    console.warn("3d renderer unavailable, using 2d fallback:", error);
    return new FlatRenderer(canvas, hud);
  }
}

const MAX_BAR_TENSION = 8.0; // N, bar scale saturation

function drawHud(ctx: CanvasRenderingContext2D, view: ConsoleView, stale: boolean): void {
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.font = "12px monospace";
  const state = view.state;
  if (view.connection !== "open") {
    ctx.fillStyle = "#ffb347";
    ctx.fillText("reconnecting... inputs disabled", 10, 18);
  } else if (state === null) {
    ctx.fillStyle = "#aaaaaa";
    ctx.fillText("waiting for first state", 10, 18);
  }
  if (state === null) {
    return;
  }
  const bars = barHeights(state.tensions, MAX_BAR_TENSION);
  const barWidth = 14;
  const barMax = 60;
  const baseY = height - 14;
  bars.forEach((fraction, index) => {
    const x = 12 + index * (barWidth + 6);
    ctx.fillStyle = state.pulse > 0 ? "#ff5050" : "#4fa3ff";
    ctx.fillRect(x, baseY - fraction * barMax, barWidth, fraction * barMax);
    ctx.strokeStyle = "#666666";
    ctx.strokeRect(x, baseY - barMax, barWidth, barMax);
    ctx.fillStyle = "#cccccc";
    ctx.fillText(String(index + 1), x + 3, baseY + 12);
  });
  ctx.fillStyle = "#cccccc";
  ctx.fillText(
    `t=${state.time.toFixed(2)}s scale=${state.scale.toFixed(2)} mode=${state.mode}` +
      ` clutch=${state.clutch_engaged ? "ENGAGED" : "free"}`,
    10,
    height - 88,
  );
  const current = state.motor_currents.reduce((total, value) => total + value, 0);
  ctx.fillText(`sum current ${current.toFixed(3)} A`, 10, height - 104);
  if (state.wall_breached) {
    ctx.fillStyle = "#ff5050";
    ctx.fillText("WALL BREACH", 10, height - 120);
  }
  if (state.fault !== null) {
    ctx.fillStyle = "#ffb347";
    ctx.fillText(`fault: ${state.fault}`, 10, height - 136);
  }
  if (stale) {
    ctx.fillStyle = "#ffb347";
    ctx.fillText("state stale (no fresh broadcast)", 10, 34);
  }
}

class ThreeRenderer implements Renderer {
  readonly mode = "3d" as const;
  private readonly three: typeof ThreeNS;
  private readonly renderer: ThreeNS.WebGLRenderer;
  private readonly scene: ThreeNS.Scene;
  private readonly camera: ThreeNS.PerspectiveCamera;
  private readonly hudCtx: CanvasRenderingContext2D;

  private azimuth = Math.PI / 4;
  private elevation = Math.PI / 6;
  private distance = 1.6;

  private built = false;
  private cables!: ThreeNS.LineSegments;
  private platform!: ThreeNS.Mesh;
  private ghost!: ThreeNS.Mesh;
  private wall!: ThreeNS.Mesh;
  private arrow!: ThreeNS.ArrowHelper;

  constructor(three: typeof ThreeNS, canvas: HTMLCanvasElement, hud: HTMLCanvasElement) {
    this.three = three;
    this.renderer = new three.WebGLRenderer({ canvas, antialias: true });
    this.renderer.setSize(canvas.clientWidth || canvas.width, canvas.clientHeight || canvas.height, false);
    this.scene = new three.Scene();
    this.scene.background = new three.Color(0x101418);
    this.camera = new three.PerspectiveCamera(50, canvas.width / canvas.height, 0.01, 20);
    this.camera.up.set(0, 0, 1);
    this.scene.add(new three.AmbientLight(0xffffff, 0.7));
    const sun = new three.DirectionalLight(0xffffff, 1.0);
    sun.position.set(1, 1, 2);
    this.scene.add(sun);
    const ctx = hud.getContext("2d");
    if (ctx === null) {
      throw new Error("hud canvas has no 2d context");
    }
    this.hudCtx = ctx;
  }

  private build(view: ConsoleView): void {
    const three = this.three;
    const snapshot = view.snapshot!;
    const anchors = snapshot.geometry.frame_anchors as Vec3[];
    const { lo, hi } = frameBounds(anchors);
    const box = new three.Box3(
      new three.Vector3(lo[0], lo[1], lo[2]),
      new three.Vector3(hi[0], hi[1], hi[2]),
    );
    this.scene.add(new three.Box3Helper(box, new three.Color(0x3c4854)));
    const anchorGeometry = new three.SphereGeometry(0.008, 10, 10);
    const anchorMaterial = new three.MeshStandardMaterial({ color: 0x9fb4c8 });
    for (const anchor of anchors) {
      const dot = new three.Mesh(anchorGeometry, anchorMaterial);
      dot.position.set(anchor[0], anchor[1], anchor[2]);
      this.scene.add(dot);
    }

    const cableGeometry = new three.BufferGeometry();
    cableGeometry.setAttribute(
      "position",
      new three.BufferAttribute(new Float32Array(8 * 2 * 3), 3),
    );
    this.cables = new three.LineSegments(
      cableGeometry,
      new three.LineBasicMaterial({ color: 0xd8e2ec }),
    );
    this.scene.add(this.cables);

    const bodySpan = frameBounds(snapshot.geometry.body_anchors as Vec3[]);
    const size: Vec3 = [
      Math.max(bodySpan.hi[0] - bodySpan.lo[0], 0.02),
      Math.max(bodySpan.hi[1] - bodySpan.lo[1], 0.02),
      Math.max(bodySpan.hi[2] - bodySpan.lo[2], 0.02),
    ];
    this.platform = new three.Mesh(
      new three.BoxGeometry(size[0], size[1], size[2]),
      new three.MeshStandardMaterial({ color: 0x4fa3ff }),
    );
    this.platform.rotation.order = "XYZ";
    this.scene.add(this.platform);

    this.ghost = new three.Mesh(
      new three.BoxGeometry(size[0], size[1], size[2]),
      new three.MeshStandardMaterial({ color: 0x60d394, transparent: true, opacity: 0.35 }),
    );
    this.scene.add(this.ghost);

    this.wall = new three.Mesh(
      new three.SphereGeometry(1, 24, 16),
      new three.MeshBasicMaterial({ color: 0x8899aa, wireframe: true, transparent: true, opacity: 0.4 }),
    );
    this.wall.position.set(...snapshot.wall_center);
    this.wall.scale.set(...snapshot.wall_radii);
    this.scene.add(this.wall);

    this.arrow = new three.ArrowHelper(
      new three.Vector3(1, 0, 0),
      new three.Vector3(0, 0, 0),
      0.1,
      0xff5050,
    );
    this.arrow.visible = false;
    this.scene.add(this.arrow);
    this.built = true;
  }

  private updateFromState(state: StateUpdate): void {
    const qt = state.translation;
    const qo = state.orientation;
    this.platform.position.set(qt[0], qt[1], qt[2]);
    this.platform.rotation.set(qo[0], qo[1], qo[2]);
    const ghostT = state.delayed_slave_cmd;
    this.ghost.position.set(ghostT[0]!, ghostT[1]!, ghostT[2]!);

    const wallMaterial = this.wall.material as ThreeNS.MeshBasicMaterial;
    wallMaterial.color.set(state.wall_breached ? 0xff5050 : 0x8899aa);
    wallMaterial.opacity = state.wall_breached ? 0.8 : 0.4;

    const magnitude = Math.hypot(...state.repulsion);
    if (magnitude > 1e-9) {
      this.arrow.visible = true;
      this.arrow.position.set(qt[0], qt[1], qt[2]);
      const direction = new this.three.Vector3(...state.repulsion).normalize();
      this.arrow.setDirection(direction);
      this.arrow.setLength(Math.min(0.05 + 0.02 * magnitude, 0.25));
    } else {
      this.arrow.visible = false;
    }
  }

  private updateCables(view: ConsoleView): void {
    const snapshot = view.snapshot!;
    const state = view.state!;
    const corners = platformCorners(
      snapshot.geometry.body_anchors as Vec3[],
      state.translation,
      state.orientation,
    );
    const positions = (this.cables.geometry.getAttribute("position") as ThreeNS.BufferAttribute);
    for (let cable = 0; cable < 8; cable++) {
      const anchor = snapshot.geometry.frame_anchors[cable]! as Vec3;
      const corner = corners[cable]!;
      positions.setXYZ(cable * 2, anchor[0], anchor[1], anchor[2]);
      positions.setXYZ(cable * 2 + 1, corner[0], corner[1], corner[2]);
    }
    positions.needsUpdate = true;
  }

  draw(view: ConsoleView, nowSeconds: number): void {
    if (view.snapshot === null) {
      drawHud(this.hudCtx, view, true);
      return;
    }
    if (!this.built) {
      this.build(view);
    }
    if (view.state !== null) {
      this.updateFromState(view.state);
      this.updateCables(view);
    }
    const pulsing = view.state !== null && view.state.pulse > 0;
    const shake = pulsing ? shakeOffset(nowSeconds, 0.004) : [0, 0];
    const x = this.distance * Math.cos(this.elevation) * Math.cos(this.azimuth);
    const y = this.distance * Math.cos(this.elevation) * Math.sin(this.azimuth);
    const z = this.distance * Math.sin(this.elevation);
    this.camera.position.set(x + shake[0]!, y + shake[1]!, z);
    this.camera.lookAt(0, 0, 0);
    this.renderer.render(this.scene, this.camera);
    drawHud(this.hudCtx, view, isStale(view, nowSeconds));
  }

  pickGround(px: number, py: number, height: number): Vec3 | null {
    const three = this.three;
    const canvas = this.renderer.domElement;
    const ndc = new three.Vector2(
      (px / canvas.clientWidth) * 2 - 1,
      -(py / canvas.clientHeight) * 2 + 1,
    );
    const raycaster = new three.Raycaster();
    raycaster.setFromCamera(ndc, this.camera);
    const plane = new three.Plane(new three.Vector3(0, 0, 1), -height);
    const hit = new three.Vector3();
    if (raycaster.ray.intersectPlane(plane, hit) === null) {
      return null;
    }
    return [hit.x, hit.y, hit.z];
  }

  orbit(dAzimuth: number, dElevation: number): void {
    this.azimuth += dAzimuth;
    this.elevation = Math.min(Math.max(this.elevation + dElevation, -1.4), 1.4);
  }

  zoom(factor: number): void {
    this.distance = Math.min(Math.max(this.distance * factor, 0.4), 6.0);
  }

  dispose(): void {
    this.renderer.dispose();
  }
}

class FlatRenderer implements Renderer {
  readonly mode = "2d" as const;
  private readonly ctx: CanvasRenderingContext2D;
  private readonly hudCtx: CanvasRenderingContext2D;
  private topPanel: Panel | null = null;
  private frontPanel: Panel | null = null;

  constructor(canvas: HTMLCanvasElement, hud: HTMLCanvasElement) {
    const ctx = canvas.getContext("2d");
    const hudCtx = hud.getContext("2d");
    if (ctx === null || hudCtx === null) {
      throw new Error("2d canvas context unavailable");
    }
    this.ctx = ctx;
    this.hudCtx = hudCtx;
  }

  private panels(view: ConsoleView): [Panel, Panel] {
    if (this.topPanel !== null && this.frontPanel !== null) {
      return [this.topPanel, this.frontPanel];
    }
    const anchors = view.snapshot!.geometry.frame_anchors as Vec3[];
    const { lo, hi } = frameBounds(anchors);
    const worldCenter: Vec3 = [
      (lo[0] + hi[0]) / 2,
      (lo[1] + hi[1]) / 2,
      (lo[2] + hi[2]) / 2,
    ];
    const worldSpan = 1.3 * Math.max(hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]);
    const size = Math.min(this.ctx.canvas.width / 2, this.ctx.canvas.height) - 16;
    this.topPanel = {
      hAxis: 0, vAxis: 1, originPx: [8, 8], sizePx: size, worldCenter, worldSpan,
    };
    this.frontPanel = {
      hAxis: 0, vAxis: 2, originPx: [size + 24, 8], sizePx: size, worldCenter, worldSpan,
    };
    return [this.topPanel, this.frontPanel];
  }

  private drawPanel(panel: Panel, view: ConsoleView, label: string): void {
    const ctx = this.ctx;
    const snapshot = view.snapshot!;
    const state = view.state;
    ctx.strokeStyle = "#3c4854";
    ctx.strokeRect(panel.originPx[0], panel.originPx[1], panel.sizePx, panel.sizePx);
    ctx.fillStyle = "#8899aa";
    ctx.font = "11px monospace";
    ctx.fillText(label, panel.originPx[0] + 4, panel.originPx[1] + 12);

    const anchors = snapshot.geometry.frame_anchors as Vec3[];
    ctx.fillStyle = "#9fb4c8";
    for (const anchor of anchors) {
      const [px, py] = panelProject(panel, anchor);
      ctx.fillRect(px - 2, py - 2, 4, 4);
    }
    const rings = ellipsoidRings(snapshot.wall_center, snapshot.wall_radii, 40);
    ctx.strokeStyle = state?.wall_breached ? "#ff5050" : "#55697d";
    for (const ring of rings) {
      ctx.beginPath();
      ring.forEach((point, index) => {
        const [px, py] = panelProject(panel, point);
        if (index === 0) ctx.moveTo(px, py);
        else ctx.lineTo(px, py);
      });
      ctx.stroke();
    }
    if (state === null) {
      return;
    }
    const corners = platformCorners(
      snapshot.geometry.body_anchors as Vec3[],
      state.translation,
      state.orientation,
    );
    ctx.strokeStyle = "#d8e2ec";
    for (let cable = 0; cable < 8; cable++) {
      const [ax, ay] = panelProject(panel, anchors[cable]!);
      const [bx, by] = panelProject(panel, corners[cable]!);
      ctx.beginPath();
      ctx.moveTo(ax, ay);
      ctx.lineTo(bx, by);
      ctx.stroke();
    }
    ctx.fillStyle = "#4fa3ff";
    const [ex, ey] = panelProject(panel, state.translation);
    ctx.fillRect(ex - 4, ey - 4, 8, 8);
    const ghost = state.delayed_slave_cmd.slice(0, 3) as Vec3;
    ctx.fillStyle = "rgba(96, 211, 148, 0.7)";
    const [gx, gy] = panelProject(panel, ghost);
    ctx.fillRect(gx - 4, gy - 4, 8, 8);

    const magnitude = Math.hypot(...state.repulsion);
    if (magnitude > 1e-9) {
      const tip: Vec3 = [
        state.translation[0] + 0.05 * (state.repulsion[0] / magnitude),
        state.translation[1] + 0.05 * (state.repulsion[1] / magnitude),
        state.translation[2] + 0.05 * (state.repulsion[2] / magnitude),
      ];
      const [tx, ty] = panelProject(panel, tip);
      ctx.strokeStyle = "#ff5050";
      ctx.beginPath();
      ctx.moveTo(ex, ey);
      ctx.lineTo(tx, ty);
      ctx.stroke();
    }
  }

  draw(view: ConsoleView, nowSeconds: number): void {
    const ctx = this.ctx;
    ctx.fillStyle = "#101418";
    ctx.fillRect(0, 0, ctx.canvas.width, ctx.canvas.height);
    if (view.snapshot !== null) {
      const pulsing = view.state !== null && view.state.pulse > 0;
      const shake = pulsing ? shakeOffset(nowSeconds, 2.5) : [0, 0];
      ctx.save();
      ctx.translate(shake[0]!, shake[1]!);
      const [top, front] = this.panels(view);
      this.drawPanel(top, view, "top (x-y)");
      this.drawPanel(front, view, "front (x-z)");
      ctx.restore();
    }
    drawHud(this.hudCtx, view, isStale(view, nowSeconds));
  }

  pickGround(px: number, py: number, height: number): Vec3 | null {
    if (this.topPanel === null) {
      return null;
    }
    const panel = this.topPanel;
    const inside =
      px >= panel.originPx[0] &&
      px <= panel.originPx[0] + panel.sizePx &&
      py >= panel.originPx[1] &&
      py <= panel.originPx[1] + panel.sizePx;
    if (!inside) {
      return null;
    }
    return panelUnproject(panel, px, py, [0, 0, height]);
  }

  orbit(): void {
    // orthographic panels have a fixed viewpoint
  }

  zoom(): void {}

  dispose(): void {}
}
