/** In-memory stand-in for the consumer API, for browserless UI tests.
 *
 * Implements the command/state/stream semantics documented in
 * ../../docs/API.md: commands mutate a session model, get_state echoes it,
 * and tick() pushes frames (geometry on the first message per connection
 * and on layout revision changes).
 */

import type { Transport, StreamHandle } from '../src/client.js';
import type {
  Command, CommandReply, FrameMessage, SessionState, StreamMessage,
} from '../src/types.js';

interface Subscriber {
  onMessage: (msg: StreamMessage) => void;
  onError: () => void;
  lastRev: number | null;
  open: boolean;
}

export class SimServer {
  status: 'playing' | 'paused' | 'ended' = 'paused';
  cursor = 0;
  layoutRev = 0;
  relayoutRunning = false;
  frameIndex = 0;
  heatMode: 'window' | 'decay' = 'window';
  heatK = 1000;
  readonly logLength: number;
  readonly checkpointInterval: number;
  readonly numNodes: number;
  private pendingRelayout = false;
  private subscribers: Subscriber[] = [];
  private x: number[];
  private y: number[];
  commandCount = 0;
  failNextConnects = 0;

  constructor(logLength = 100, numNodes = 12, checkpointInterval = 25) {
    this.logLength = logLength;
    this.numNodes = numNodes;
    this.checkpointInterval = checkpointInterval;
    this.x = [];
    this.y = [];
    this.scatter(1);
  }

  private scatter(seed: number): void {
    // deterministic pseudo-positions; relayout re-scatters with a new seed
    let s = seed >>> 0;
    const next = () => {
      s = (s * 1664525 + 1013904223) >>> 0;
      return s / 2 ** 32;
    };
    this.x = Array.from({ length: this.numNodes }, () => next());
    this.y = Array.from({ length: this.numNodes }, () => next());
  }

  getState(): SessionState {
    const checkpoints = [];
    for (let i = 0; i <= this.logLength; i += this.checkpointInterval) {
      checkpoints.push(i);
    }
    return {
      status: this.status,
      cursor: this.cursor,
      log_length: this.logLength,
      log_closed: true,
      frame_index: this.frameIndex,
      layout_rev: this.layoutRev,
      relayout_running: this.relayoutRunning,
      checkpoint_interval: this.checkpointInterval,
      checkpoints,
      num_top_nodes: this.numNodes,
      unknown_deletes: 0,
      config: { heat_mode: this.heatMode, heat_k: this.heatK },
    };
  }

  frame(includeGeometry: boolean): FrameMessage {
    const heat = Array.from({ length: this.numNodes },
      (_, i) => ((i + this.cursor) % this.numNodes) / this.numNodes);
    const edgeU = [];
    const edgeV = [];
    const edgeW = [];
    for (let i = 1; i < this.numNodes; i += 1) {
      edgeU.push(i);
      edgeV.push(i + 1);
      edgeW.push(1 + (i % 3));
    }
    const msg: FrameMessage = {
      type: 'frame',
      frame_index: this.frameIndex,
      cursor: this.cursor,
      status: this.status,
      layout_rev: this.layoutRev,
      heat,
      edge_w: edgeW,
      stats: { events_per_second: 1000, log_length: this.logLength,
               unknown_deletes: 0, live_clauses: 10, kernels: 'sim' },
    };
    if (includeGeometry) {
      msg.nodes = {
        id: Array.from({ length: this.numNodes }, (_, i) => i + 1),
        x: [...this.x],
        y: [...this.y],
        members: Array.from({ length: this.numNodes }, (_, i) => 1 + (i % 5)),
      };
      msg.edges = { u: edgeU, v: edgeV };
    }
    return msg;
  }

  execute(cmd: Command): CommandReply {
    this.commandCount += 1;
    switch (cmd.cmd) {
      case 'play':
        this.status = this.cursor >= this.logLength ? 'ended' : 'playing';
        break;
      case 'pause':
        if (this.status !== 'ended') this.status = 'paused';
        break;
      case 'stop':
        this.status = 'paused';
        this.cursor = 0;
        break;
      case 'seek':
        if (typeof cmd.target !== 'number' || Number.isNaN(cmd.target)) {
          return { ok: false, error: { code: 'bad_request', message: 'target' } };
        }
        if (cmd.target < 0 || cmd.target > this.logLength) {
          return { ok: false,
                   error: { code: 'out_of_range', message: `${cmd.target}` } };
        }
        this.cursor = cmd.target;
        if (this.status === 'ended' && this.cursor < this.logLength) {
          this.status = 'paused';
        }
        break;
      case 'step': {
        const target = this.cursor + cmd.n;
        if (target < 0 || target > this.logLength) {
          return { ok: false,
                   error: { code: 'out_of_range', message: `${target}` } };
        }
        this.cursor = target;
        break;
      }
      case 'relayout':
        if (this.relayoutRunning) {
          return { ok: false,
                   error: { code: 'already_running', message: 'relayout' } };
        }
        if (this.status !== 'ended') this.status = 'paused';
        this.relayoutRunning = true;
        this.pendingRelayout = true;
        break;
      case 'set_heat_config':
        if (cmd.mode) this.heatMode = cmd.mode;
        if (cmd.k !== undefined) this.heatK = cmd.k;
        break;
      case 'get_state':
      case 'get_frame':
        break;
      default:
        return { ok: false,
                 error: { code: 'unknown_command', message: String(cmd) } };
    }
    const reply: CommandReply = { ok: true, state: this.getState() };
    if (cmd.cmd === 'get_frame') reply.frame = this.frame(true);
    return reply;
  }

  /** One consumer tick: advance playback, finish relayouts, push a frame. */
  tick(eventsPerTick = 10): void {
    if (this.pendingRelayout) {
      this.pendingRelayout = false;
      this.relayoutRunning = false;
      this.layoutRev += 1;
      this.scatter(this.layoutRev + 2);
      for (const sub of this.subscribers) {
        if (sub.open) {
          sub.onMessage({ type: 'relayout_done', layout_rev: this.layoutRev });
        }
      }
    }
    if (this.status === 'playing') {
      this.cursor = Math.min(this.cursor + eventsPerTick, this.logLength);
      if (this.cursor === this.logLength) this.status = 'ended';
    }
    this.frameIndex += 1;
    for (const sub of this.subscribers) {
      if (!sub.open) continue;
      const includeGeometry = sub.lastRev !== this.layoutRev;
      sub.onMessage(this.frame(includeGeometry));
      sub.lastRev = this.layoutRev;
    }
  }

  dropConnections(): void {
    for (const sub of this.subscribers) {
      if (sub.open) {
        sub.open = false;
        sub.onError();
      }
    }
    this.subscribers = this.subscribers.filter((s) => s.open);
  }

  get transport(): Transport {
    const sim = this;
    return {
      async post(_url: string, body: unknown): Promise<CommandReply> {
        return sim.execute(body as Command);
      },
      async getJson(url: string): Promise<CommandReply> {
        if (url.endsWith('/api/frame')) {
          return { ok: true, frame: sim.frame(true) };
        }
        return { ok: true, state: sim.getState() };
      },
      openStream(_url: string, onMessage: (msg: StreamMessage) => void,
                 onError: () => void): StreamHandle {
        if (sim.failNextConnects > 0) {
          sim.failNextConnects -= 1;
          onError();
          return { close() {} };
        }
        const sub: Subscriber = { onMessage, onError, lastRev: null, open: true };
        sim.subscribers.push(sub);
        // first message mirrors the real server: current frame + geometry
        onMessage(sim.frame(true));
        sub.lastRev = sim.layoutRev;
        return {
          close() {
            sub.open = false;
          },
        };
      },
    };
  }
}
