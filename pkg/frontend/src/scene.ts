/**
 * Pure scene math shared by the 3D and 2D renderers and their tests:
 * rotation, frame bounds, ellipsoid wireframe rings, orthographic panel
 * mapping, and tension bar scaling.  No DOM, no three.js.
 */

import type { Vec3 } from "./protocol.js";

export type Mat3 = [number, number, number, number, number, number, number, number, number];

/** Rotation about x, then y, then z: R = Rx(rx) Ry(ry) Rz(rz), row-major. */
export function rotationXYZ(o: Vec3): Mat3 {
  const [cx, cy, cz] = [Math.cos(o[0]), Math.cos(o[1]), Math.cos(o[2])];
  const [sx, sy, sz] = [Math.sin(o[0]), Math.sin(o[1]), Math.sin(o[2])];
  return [
    cy * cz,
    -cy * sz,
    sy,
    cx * sz + sx * sy * cz,
    cx * cz - sx * sy * sz,
    -sx * cy,
    sx * sz - cx * sy * cz,
    sx * cz + cx * sy * sz,
    cx * cy,
  ];
}

export function apply(m: Mat3, v: Vec3): Vec3 {
  return [
    m[0] * v[0] + m[1] * v[1] + m[2] * v[2],
    m[3] * v[0] + m[4] * v[1] + m[5] * v[2],
    m[6] * v[0] + m[7] * v[1] + m[8] * v[2],
  ];
}

export function add(a: Vec3, b: Vec3): Vec3 {
  return [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
}

export function frameBounds(anchors: Vec3[]): { lo: Vec3; hi: Vec3 } {
  const lo: Vec3 = [Infinity, Infinity, Infinity];
  const hi: Vec3 = [-Infinity, -Infinity, -Infinity];
  for (const point of anchors) {
    for (let axis = 0; axis < 3; axis++) {
      lo[axis] = Math.min(lo[axis]!, point[axis]!);
      hi[axis] = Math.max(hi[axis]!, point[axis]!);
    }
  }
  return { lo, hi };
}

/** World-space platform corners: qt + R(qo) * bodyAnchor_i. */
export function platformCorners(bodyAnchors: Vec3[], qt: Vec3, qo: Vec3): Vec3[] {
  const rot = rotationXYZ(qo);
  return bodyAnchors.map((b) => add(qt, apply(rot, b)));
}

/** Three principal rings of the ellipsoid wireframe. */
export function ellipsoidRings(center: Vec3, radii: Vec3, segments = 48): Vec3[][] {
  const rings: Vec3[][] = [];
  for (const fixedAxis of [0, 1, 2]) {
    const ring: Vec3[] = [];
    const [a, b] = [0, 1, 2].filter((axis) => axis !== fixedAxis) as [number, number];
    for (let k = 0; k <= segments; k++) {
      const angle = (2 * Math.PI * k) / segments;
      const point: Vec3 = [center[0], center[1], center[2]];
      point[a] = center[a]! + radii[a]! * Math.cos(angle);
      point[b] = center[b]! + radii[b]! * Math.sin(angle);
      ring.push(point);
    }
    rings.push(ring);
  }
  return rings;
}

/** One orthographic panel: world axes (h, v) into a pixel rectangle. */
export interface Panel {
  hAxis: 0 | 1 | 2;
  vAxis: 0 | 1 | 2;
  originPx: [number, number];
  sizePx: number;
  worldCenter: Vec3;
  worldSpan: number;
}

export function panelProject(panel: Panel, point: Vec3): [number, number] {
  const scale = panel.sizePx / panel.worldSpan;
  const h = (point[panel.hAxis]! - panel.worldCenter[panel.hAxis]!) * scale;
  const v = (point[panel.vAxis]! - panel.worldCenter[panel.vAxis]!) * scale;
  return [panel.originPx[0] + panel.sizePx / 2 + h, panel.originPx[1] + panel.sizePx / 2 - v];
}

/** Inverse of panelProject on the panel plane; other axis from `fill`. */
export function panelUnproject(panel: Panel, px: number, py: number, fill: Vec3): Vec3 {
  const scale = panel.sizePx / panel.worldSpan;
  const point: Vec3 = [fill[0], fill[1], fill[2]];
  point[panel.hAxis] =
    panel.worldCenter[panel.hAxis]! + (px - panel.originPx[0] - panel.sizePx / 2) / scale;
  point[panel.vAxis] =
    panel.worldCenter[panel.vAxis]! - (py - panel.originPx[1] - panel.sizePx / 2) / scale;
  return point;
}

/** Bar heights in [0, 1]; the scale saturates at maxValue. */
export function barHeights(values: number[], maxValue: number): number[] {
  return values.map((value) => Math.min(Math.max(value / maxValue, 0), 1));
}

/** Small deterministic screen-shake offset while a haptic pulse is on. */
export function shakeOffset(nowSeconds: number, amplitudePx: number): [number, number] {
  return [
    amplitudePx * Math.sin(nowSeconds * 151.0),
    amplitudePx * Math.cos(nowSeconds * 131.0),
  ];
}
