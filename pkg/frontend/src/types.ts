/** Wire types of the consumer control API (see ../../docs/API.md). */

export interface NodesBlock {
  id: number[];
  x: number[];
  y: number[];
  members: number[];
}

export interface EdgesBlock {
  u: number[];
  v: number[];
}

export interface FrameMessage {
  type: 'frame';
  frame_index: number;
  cursor: number;
  status: 'playing' | 'paused' | 'ended';
  layout_rev: number;
  heat: number[];
  edge_w: number[];
  stats: Record<string, number | string>;
  nodes?: NodesBlock;
  edges?: EdgesBlock;
}

export interface RelayoutDoneMessage {
  type: 'relayout_done';
  layout_rev: number;
}

export type StreamMessage = FrameMessage | RelayoutDoneMessage;

export interface SessionState {
  status: 'playing' | 'paused' | 'ended';
  cursor: number;
  log_length: number;
  log_closed: boolean;
  frame_index: number;
  layout_rev: number;
  relayout_running: boolean;
  checkpoint_interval: number;
  checkpoints: number[];
  num_top_nodes: number;
  unknown_deletes: number;
  config: Record<string, unknown>;
}

export interface ApiError {
  code: string;
  message: string;
}

export interface CommandReply {
  ok: boolean;
  state?: SessionState;
  frame?: FrameMessage;
  error?: ApiError;
}

export type Command =
  | { cmd: 'play' }
  | { cmd: 'pause' }
  | { cmd: 'stop' }
  | { cmd: 'seek'; target: number }
  | { cmd: 'step'; n: number }
  | { cmd: 'relayout' }
  | { cmd: 'set_heat_config'; mode?: 'window' | 'decay'; k?: number; palette?: string }
  | { cmd: 'get_state' }
  | { cmd: 'get_frame' };
