/** Workbench bootstrap: canvas + camera + store + panel wiring. */

import { Client } from './api.js';
import { OrbitCamera } from './camera.js';
import type { Vec3 } from './camera.js';
import { Panel } from './panel.js';
import { GridView } from './render.js';
import { Workbench } from './store.js';

const canvas = document.getElementById('view') as HTMLCanvasElement;
const panelHost = document.getElementById('panel') as HTMLElement;

const client = new Client('');
const workbench = new Workbench(client);
const view = new GridView(canvas);
const camera = new OrbitCamera([30, 30, -15], 150);

function requestRender(): void {
  view.applyPose(camera.pose());
  view.render();
}

function resize(): void {
  const rect = canvas.parentElement!.getBoundingClientRect();
  canvas.width = rect.width;
  canvas.height = rect.height;
  view.resize(rect.width, rect.height);
  requestRender();
}
window.addEventListener('resize', resize);

new Panel(panelHost, workbench, {
  currentPose: () => camera.pose(),
  onWantRender: requestRender,
});

workbench.subscribe((state) => {
  if (state.geometry) {
    view.setGeometry(state.geometry);
    const { min, max } = state.geometry.bounds;
    camera.target = [(min[0] + max[0]) / 2, (min[1] + max[1]) / 2,
                     (min[2] + max[2]) / 2];
  }
  if (state.colorMode === 'delta' && state.evaluation) {
    view.setDelta(state.evaluation.cells, state.evaluation.delta);
  } else {
    view.setField(state.variance, 'variance');
  }
  view.setVoi(state.session?.voi.cells ?? []);
  view.setCut(state.cut);
  if (state.geometry) {
    const { max } = state.geometry.bounds;
    view.showGraph(state.graph, state.session?.members ?? [],
                   [max[0] + 30, 0, max[2]]);
  }
  requestRender();
});

// --- pointer interaction ---------------------------------------------------------

let dragging = false;
let boxAnchor: Vec3 | null = null;
let lastX = 0;
let lastY = 0;

function groundPoint(event: PointerEvent): Vec3 | null {
  // project the pointer onto the horizontal mid-plane of the grid
  const state = workbench.getState();
  if (!state.geometry) {
    return null;
  }
  const rect = canvas.getBoundingClientRect();
  const ndcX = ((event.clientX - rect.left) / rect.width) * 2 - 1;
  const ndcY = -(((event.clientY - rect.top) / rect.height) * 2 - 1);
  const { min, max } = state.geometry.bounds;
  const zMid = (min[2] + max[2]) / 2;
  return view.intersectHorizontal(ndcX, ndcY, zMid);
}

canvas.addEventListener('pointerdown', (event) => {
  dragging = true;
  lastX = event.clientX;
  lastY = event.clientY;
  const state = workbench.getState();
  if (state.tool === 'voi-box') {
    boxAnchor = groundPoint(event);
  }
});

canvas.addEventListener('pointermove', (event) => {
  if (!dragging) {
    return;
  }
  const state = workbench.getState();
  if (state.tool === 'orbit' || state.tool === 'lens') {
    camera.orbit(-(event.clientX - lastX) * 0.01,
                 -(event.clientY - lastY) * 0.01);
    lastX = event.clientX;
    lastY = event.clientY;
    requestRender();
  }
});

canvas.addEventListener('pointerup', (event) => {
  dragging = false;
  const state = workbench.getState();
  const rect = canvas.getBoundingClientRect();
  const ndcX = ((event.clientX - rect.left) / rect.width) * 2 - 1;
  const ndcY = -(((event.clientY - rect.top) / rect.height) * 2 - 1);

  if (state.tool === 'voi-box' && boxAnchor) {
    const corner = groundPoint(event);
    if (corner && state.geometry) {
      const { min, max } = state.geometry.bounds;
      // the drag spans xy; the box always covers the full depth
      void workbench.paintVoiBox(
        [boxAnchor[0], boxAnchor[1], min[2] - 1],
        [corner[0], corner[1], max[2] + 1]);
    }
    boxAnchor = null;
  } else if (state.tool === 'voi-cell') {
    const hit = view.pick(ndcX, ndcY);
    if (hit?.kind === 'cell') {
      void workbench.toggleVoiCell(hit.id);
    }
  } else if (state.tool === 'graph-pick') {
    const hit = view.pick(ndcX, ndcY);
    if (hit?.kind === 'node') {
      void workbench.pickNode(hit.id);
    }
  } else if (state.tool === 'lens' && state.lensEnabled
             && !state.lensLocked) {
    void workbench.queryLens(camera.pose());
  }
});

canvas.addEventListener('wheel', (event) => {
  event.preventDefault();
  camera.zoom(event.deltaY > 0 ? 1.1 : 0.9);
  requestRender();
});

void workbench.refreshSession().then(async () => {
  const session = workbench.getState().session;
  if (session?.loaded && session.manifest) {
    await workbench.loadEnsemble(session.manifest);
  }
});
resize();
