/** Browser entry point: wire the store, renderer, controls, and stream. */

import { ApiClient } from './client.js';
import { Controls } from './controls.js';
import { nodeDegree, Renderer } from './renderer.js';
import { Store } from './store.js';

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

function toast(message: string): void {
  const el = byId<HTMLDivElement>('toast');
  el.textContent = message;
  el.classList.add('visible');
  setTimeout(() => el.classList.remove('visible'), 4000);
}

export function boot(): void {
  const params = new URLSearchParams(window.location.search);
  const api = params.get('api') ?? `http://${window.location.hostname}:8080`;

  const canvas = byId<HTMLCanvasElement>('view');
  canvas.width = canvas.clientWidth * devicePixelRatio;
  canvas.height = canvas.clientHeight * devicePixelRatio;
  const ctx = canvas.getContext('2d');
  if (!ctx) throw new Error('canvas 2d context unavailable');

  const store = new Store();
  const client = new ApiClient(api);
  const controls = new Controls(client, store, toast);
  const renderer = new Renderer(ctx, canvas.width, canvas.height);

  const banner = byId<HTMLDivElement>('banner');
  const status = byId<HTMLSpanElement>('status');
  const cursorLabel = byId<HTMLSpanElement>('cursor');
  const slider = byId<HTMLInputElement>('seek');
  const detail = byId<HTMLDivElement>('detail');

  let dirty = true;
  store.subscribe(() => {
    dirty = true;
  });

  function redraw(): void {
    const frame = store.state.frame;
    if (frame) {
      renderer.render(frame, store.state.camera, store.state.selectedNode);
      status.textContent = `${frame.status} · ev ${frame.cursor}`
        + ` · ${frame.stats.events_per_second
          ? Number(frame.stats.events_per_second).toFixed(0) + ' ev/s' : ''}`;
      cursorLabel.textContent = String(frame.cursor);
      if (!sliderHeld) {
        const state = store.state.serverState;
        slider.max = String(state ? state.log_length : frame.cursor);
        slider.value = String(frame.cursor);
      }
    }
    banner.classList.toggle('visible', !store.state.connected);
    banner.textContent = store.state.connected
      ? ''
      : `connection lost — retrying (attempt ${store.state.reconnectAttempt + 1})`;
    const selected = store.state.selectedNode;
    if (frame && selected !== null) {
      detail.classList.add('visible');
      detail.innerHTML = `<b>supernode ${frame.ids[selected]}</b>`
        + `<br>members: ${frame.members[selected]}`
        + `<br>heat: ${frame.heat[selected].toFixed(3)}`
        + `<br>degree: ${nodeDegree(frame, selected)}`;
    } else {
      detail.classList.remove('visible');
    }
  }

  function loop(): void {
    if (dirty) {
      dirty = false;
      redraw();
    }
    requestAnimationFrame(loop);
  }
  requestAnimationFrame(loop);

  client.connect({
    onMessage: (msg) => store.applyMessage(msg),
    onStatus: (connected, attempt) => store.setConnection(connected, attempt),
  });
  client.getState().then((reply) => {
    if (reply.ok && reply.state) store.applyServerState(reply.state);
  });

  // playback controls
  byId<HTMLButtonElement>('play').onclick = () => void controls.play();
  byId<HTMLButtonElement>('pause').onclick = () => void controls.pause();
  byId<HTMLButtonElement>('stop').onclick = () => void controls.stop();
  byId<HTMLButtonElement>('back').onclick = () => void controls.step(-1);
  byId<HTMLButtonElement>('fwd').onclick = () => void controls.step(1);
  byId<HTMLButtonElement>('relayout').onclick = () => void controls.relayout();
  byId<HTMLButtonElement>('reset-view').onclick = () => store.resetCamera();

  let sliderHeld = false;
  slider.onpointerdown = () => {
    sliderHeld = true;
  };
  slider.onchange = () => {
    sliderHeld = false;
    const target = controls.snapToCheckpoint(Number(slider.value));
    void controls.seek(target);
  };

  const heatMode = byId<HTMLSelectElement>('heat-mode');
  const heatK = byId<HTMLInputElement>('heat-k');
  byId<HTMLButtonElement>('apply-heat').onclick = () => {
    void controls.setHeat(heatMode.value as 'window' | 'decay',
                          Number(heatK.value));
  };

  // pan / zoom / hover
  let dragging = false;
  let lastX = 0;
  let lastY = 0;
  canvas.onpointerdown = (ev) => {
    dragging = true;
    lastX = ev.offsetX;
    lastY = ev.offsetY;
  };
  canvas.onpointerup = () => {
    dragging = false;
  };
  canvas.onpointerleave = () => {
    dragging = false;
  };
  canvas.onpointermove = (ev) => {
    const px = ev.offsetX * devicePixelRatio;
    const py = ev.offsetY * devicePixelRatio;
    if (dragging) {
      store.pan((ev.offsetX - lastX) * devicePixelRatio,
                (ev.offsetY - lastY) * devicePixelRatio);
      lastX = ev.offsetX;
      lastY = ev.offsetY;
      return;
    }
    const frame = store.state.frame;
    if (frame) {
      store.select(renderer.hitTest(frame, store.state.camera, px, py));
    }
  };
  canvas.onwheel = (ev) => {
    ev.preventDefault();
    const factor = ev.deltaY < 0 ? 1.15 : 1 / 1.15;
    store.zoomAt(ev.offsetX * devicePixelRatio,
                 ev.offsetY * devicePixelRatio, factor);
  };
}

if (typeof document !== 'undefined' && document.getElementById('view')) {
  boot();
}
