/** View state: camera, selection, connection, and the last server frame.
 *
 * Visualization state (positions, heat, weights, playback status) is never
 * mutated locally: it changes only when a server message lands, so what is
 * on screen is always a state the server actually reported. The camera and
 * hover selection are the only client-owned fields.
 */

import type { FrameMessage, SessionState, StreamMessage } from './types.js';

export interface Camera {
  panX: number;
  panY: number;
  zoom: number; // > 0 always
}

export interface RenderableFrame {
  frameIndex: number;
  cursor: number;
  status: 'playing' | 'paused' | 'ended';
  layoutRev: number;
  ids: number[];
  x: Float64Array;
  y: Float64Array;
  members: number[];
  heat: Float64Array;
  edgeU: number[];
  edgeV: number[];
  edgeW: Float64Array;
  stats: Record<string, number | string>;
}

export interface ViewState {
  camera: Camera;
  selectedNode: number | null; // index into the frame arrays
  connected: boolean;
  reconnectAttempt: number;
  frame: RenderableFrame | null;
  serverState: SessionState | null;
  lastError: string | null;
}

const MIN_ZOOM = 1e-3;
const MAX_ZOOM = 1e4;

export class Store {
  readonly state: ViewState = {
    camera: { panX: 0, panY: 0, zoom: 1 },
    selectedNode: null,
    connected: false,
    reconnectAttempt: 0,
    frame: null,
    serverState: null,
    lastError: null,
  };

  private geometry: {
    layoutRev: number;
    ids: number[];
    x: Float64Array;
    y: Float64Array;
    members: number[];
    edgeU: number[];
    edgeV: number[];
  } | null = null;

  private listeners: Array<() => void> = [];

  subscribe(listener: () => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  /** Apply a push-stream message; geometry is cached across frames. */
  applyMessage(msg: StreamMessage): void {
    if (msg.type === 'relayout_done') {
      // positions arrive with the next frame; nothing to mutate here
      return;
    }
    this.applyFrame(msg);
  }

  applyFrame(msg: FrameMessage): void {
    if (msg.nodes && msg.edges) {
      this.geometry = {
        layoutRev: msg.layout_rev,
        ids: msg.nodes.id,
        x: Float64Array.from(msg.nodes.x),
        y: Float64Array.from(msg.nodes.y),
        members: msg.nodes.members,
        edgeU: msg.edges.u,
        edgeV: msg.edges.v,
      };
    }
    const geo = this.geometry;
    if (!geo || geo.layoutRev !== msg.layout_rev) {
      // geometry for this revision has not arrived yet; skip the frame
      // rather than render heat on stale positions
      return;
    }
    this.state.frame = {
      frameIndex: msg.frame_index,
      cursor: msg.cursor,
      status: msg.status,
      layoutRev: msg.layout_rev,
      ids: geo.ids,
      x: geo.x,
      y: geo.y,
      members: geo.members,
      heat: Float64Array.from(msg.heat),
      edgeU: geo.edgeU,
      edgeV: geo.edgeV,
      edgeW: Float64Array.from(msg.edge_w),
      stats: msg.stats,
    };
    if (this.state.selectedNode !== null
        && this.state.selectedNode >= geo.ids.length) {
      this.state.selectedNode = null;
    }
    this.emit();
  }

  /** Record a server state echo (from a command reply or /api/state). */
  applyServerState(state: SessionState): void {
    this.state.serverState = state;
    this.emit();
  }

  setConnection(connected: boolean, attempt: number): void {
    if (this.state.connected !== connected
        || this.state.reconnectAttempt !== attempt) {
      this.state.connected = connected;
      this.state.reconnectAttempt = attempt;
      this.emit();
    }
  }

  setError(message: string | null): void {
    this.state.lastError = message;
    this.emit();
  }

  select(index: number | null): void {
    this.state.selectedNode = index;
    this.emit();
  }

  pan(dx: number, dy: number): void {
    this.state.camera.panX += dx;
    this.state.camera.panY += dy;
    this.emit();
  }

  /** Wheel zoom anchored at (cx, cy) in canvas pixels; zoom stays > 0. */
  zoomAt(cx: number, cy: number, factor: number): void {
    const camera = this.state.camera;
    const next = Math.min(Math.max(camera.zoom * factor, MIN_ZOOM), MAX_ZOOM);
    const applied = next / camera.zoom;
    camera.panX = cx - (cx - camera.panX) * applied;
    camera.panY = cy - (cy - camera.panY) * applied;
    camera.zoom = next;
    this.emit();
  }

  resetCamera(): void {
    this.state.camera = { panX: 0, panY: 0, zoom: 1 };
    this.emit();
  }
}
