/** Immediate-mode canvas renderer for position/heat arrays.
 *
 * No per-node DOM: nodes and edges are drawn straight from the frame's
 * arrays. Work is batched to keep tens of thousands of primitives at
 * interactive rates: edges group by quantized opacity, nodes by a
 * quantized palette bucket, one path per group.
 */

import type { Camera, RenderableFrame } from './store.js';

export type PaletteStop = [number, number, number];

export const DEFAULT_PALETTE: PaletteStop[] = [
  [0, 0, 139],
  [255, 255, 0],
  [255, 0, 0],
];

const COLOR_BUCKETS = 64;
const OPACITY_BUCKETS = 16;
const MIN_EDGE_OPACITY = 0.05;

/** Mirror of the server's piecewise-linear palette interpolation. */
export function heatColor(heat: number, palette: PaletteStop[] = DEFAULT_PALETTE):
    [number, number, number] {
  const clamped = Math.min(Math.max(heat, 0), 1);
  const segments = palette.length - 1;
  const scaled = clamped * segments;
  const idx = Math.min(Math.floor(scaled), segments - 1);
  const frac = scaled - idx;
  const lo = palette[idx];
  const hi = palette[idx + 1];
  return [
    Math.floor(lo[0] + (hi[0] - lo[0]) * frac + 0.5),
    Math.floor(lo[1] + (hi[1] - lo[1]) * frac + 0.5),
    Math.floor(lo[2] + (hi[2] - lo[2]) * frac + 0.5),
  ];
}

function paletteLut(palette: PaletteStop[]): string[] {
  const lut: string[] = [];
  for (let b = 0; b < COLOR_BUCKETS; b += 1) {
    const [r, g, bl] = heatColor(b / (COLOR_BUCKETS - 1), palette);
    lut.push(`rgb(${r},${g},${bl})`);
  }
  return lut;
}

export interface RenderStats {
  nodes: number;
  edges: number;
}

export class Renderer {
  private lut: string[];
  margin = 24;
  background = '#10141e';
  edgeColor = '#7f8ca6';
  maxRadius = 12;
  minRadius = 1.25;
  radiusScale = 1.75;

  constructor(
    private readonly ctx: CanvasRenderingContext2D,
    private readonly width: number,
    private readonly height: number,
    palette: PaletteStop[] = DEFAULT_PALETTE,
  ) {
    this.lut = paletteLut(palette);
  }

  setPalette(palette: PaletteStop[]): void {
    this.lut = paletteLut(palette);
  }

  /** Unit-box coordinates -> canvas pixels under the camera. */
  toScreen(camera: Camera, ux: number, uy: number): [number, number] {
    const spanX = this.width - 2 * this.margin;
    const spanY = this.height - 2 * this.margin;
    const px = this.margin + ux * spanX;
    const py = this.margin + uy * spanY;
    return [px * camera.zoom + camera.panX, py * camera.zoom + camera.panY];
  }

  radiusOf(members: number, zoom: number): number {
    const r = this.radiusScale * Math.sqrt(members);
    const clamped = Math.min(Math.max(r, this.minRadius), this.maxRadius);
    return Math.max(clamped * Math.sqrt(zoom), 0.5);
  }

  render(frame: RenderableFrame, camera: Camera,
         selected: number | null = null): RenderStats {
    const ctx = this.ctx;
    const n = frame.ids.length;
    const m = frame.edgeU.length;
    ctx.fillStyle = this.background;
    ctx.fillRect(0, 0, this.width, this.height);

    const sx = new Float64Array(n);
    const sy = new Float64Array(n);
    const spanX = this.width - 2 * this.margin;
    const spanY = this.height - 2 * this.margin;
    for (let i = 0; i < n; i += 1) {
      sx[i] = (this.margin + frame.x[i] * spanX) * camera.zoom + camera.panX;
      sy[i] = (this.margin + frame.y[i] * spanY) * camera.zoom + camera.panY;
    }

    // edges, grouped by quantized opacity (light first, heavy on top)
    let maxW = 0;
    for (let j = 0; j < m; j += 1) {
      if (frame.edgeW[j] > maxW) maxW = frame.edgeW[j];
    }
    if (m > 0) {
      const buckets: number[][] = [];
      for (let b = 0; b < OPACITY_BUCKETS; b += 1) buckets.push([]);
      for (let j = 0; j < m; j += 1) {
        const rel = maxW > 0 ? frame.edgeW[j] / maxW : 0;
        const opacity = Math.min(Math.max(rel, MIN_EDGE_OPACITY), 1);
        let b = Math.floor(opacity * OPACITY_BUCKETS);
        if (b >= OPACITY_BUCKETS) b = OPACITY_BUCKETS - 1;
        buckets[b].push(j);
      }
      ctx.strokeStyle = this.edgeColor;
      ctx.lineWidth = 1;
      for (let b = 0; b < OPACITY_BUCKETS; b += 1) {
        const group = buckets[b];
        if (!group.length) continue;
        ctx.globalAlpha = (b + 0.5) / OPACITY_BUCKETS;
        ctx.beginPath();
        for (const j of group) {
          const u = frame.edgeU[j] - 1;
          const v = frame.edgeV[j] - 1;
          ctx.moveTo(sx[u], sy[u]);
          ctx.lineTo(sx[v], sy[v]);
        }
        ctx.stroke();
      }
      ctx.globalAlpha = 1;
    }

    // nodes, grouped by palette bucket
    const colorGroups: number[][] = [];
    for (let b = 0; b < COLOR_BUCKETS; b += 1) colorGroups.push([]);
    for (let i = 0; i < n; i += 1) {
      let b = Math.floor(frame.heat[i] * (COLOR_BUCKETS - 1) + 0.5);
      if (b < 0) b = 0;
      if (b >= COLOR_BUCKETS) b = COLOR_BUCKETS - 1;
      colorGroups[b].push(i);
    }
    const tau = Math.PI * 2;
    for (let b = 0; b < COLOR_BUCKETS; b += 1) {
      const group = colorGroups[b];
      if (!group.length) continue;
      ctx.fillStyle = this.lut[b];
      ctx.beginPath();
      for (const i of group) {
        const r = this.radiusOf(frame.members[i], camera.zoom);
        ctx.moveTo(sx[i] + r, sy[i]);
        ctx.arc(sx[i], sy[i], r, 0, tau);
      }
      ctx.fill();
    }

    if (selected !== null && selected >= 0 && selected < n) {
      const r = this.radiusOf(frame.members[selected], camera.zoom) + 3;
      ctx.strokeStyle = '#ffffff';
      ctx.lineWidth = 1.5;
      ctx.beginPath();
      ctx.arc(sx[selected], sy[selected], r, 0, tau);
      ctx.stroke();
    }
    return { nodes: n, edges: m };
  }

  /** Index of the node under (px, py), or null; linear scan hit test. */
  hitTest(frame: RenderableFrame, camera: Camera,
          px: number, py: number): number | null {
    const spanX = this.width - 2 * this.margin;
    const spanY = this.height - 2 * this.margin;
    let best: number | null = null;
    let bestDist = Infinity;
    for (let i = 0; i < frame.ids.length; i += 1) {
      const sx = (this.margin + frame.x[i] * spanX) * camera.zoom + camera.panX;
      const sy = (this.margin + frame.y[i] * spanY) * camera.zoom + camera.panY;
      const r = this.radiusOf(frame.members[i], camera.zoom) + 2;
      const dx = px - sx;
      const dy = py - sy;
      const d2 = dx * dx + dy * dy;
      if (d2 <= r * r && d2 < bestDist) {
        best = i;
        bestDist = d2;
      }
    }
    return best;
  }
}

/** Degree of a node (by array index) in the current frame. */
export function nodeDegree(frame: RenderableFrame, index: number): number {
  const id = frame.ids[index];
  let degree = 0;
  for (let j = 0; j < frame.edgeU.length; j += 1) {
    if (frame.edgeU[j] === id || frame.edgeV[j] === id) degree += 1;
  }
  return degree;
}
