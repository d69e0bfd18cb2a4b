/** DOM control panel: dataset loading, tools, clustering parameters, the
 * evaluate/decide flow, and lens controls. Renders purely from store state. */

import type { Tool, Workbench, WorkbenchState } from './store.js';

const TOOLS: { id: Tool; label: string }[] = [
  { id: 'orbit', label: 'Orbit' },
  { id: 'voi-box', label: 'VOI box' },
  { id: 'voi-cell', label: 'VOI cell' },
  { id: 'graph-pick', label: 'Pick node' },
  { id: 'lens', label: 'Lens' },
];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, attrs: Record<string, string> = {}, text = '',
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  if (text) {
    node.textContent = text;
  }
  return node;
}

export class Panel {
  private root: HTMLElement;
  private status: HTMLElement;
  private voiInfo: HTMLElement;
  private membersInfo: HTMLElement;
  private evaluateBox: HTMLElement;
  private toolButtons = new Map<Tool, HTMLButtonElement>();
  private lockButton: HTMLButtonElement;

  constructor(
    container: HTMLElement,
    private workbench: Workbench,
    private hooks: {
      currentPose: () => import('./camera.js').CameraPose;
      onWantRender: () => void;
    },
  ) {
    this.root = el('div', { class: 'panel' });
    container.appendChild(this.root);

    // dataset
    const manifestRow = el('div', { class: 'row' });
    const manifestInput = el('input', {
      type: 'text', placeholder: 'path/to/manifest.json', id: 'manifest',
    });
    const loadButton = el('button', {}, 'Load');
    loadButton.onclick = () => {
      void this.workbench.loadEnsemble(manifestInput.value);
    };
    manifestRow.append(manifestInput, loadButton);
    this.root.append(el('h3', {}, 'Dataset'), manifestRow);

    // tools
    const toolRow = el('div', { class: 'row' });
    for (const tool of TOOLS) {
      const button = el('button', {}, tool.label);
      button.onclick = () => this.workbench.setTool(tool.id);
      this.toolButtons.set(tool.id, button);
      toolRow.append(button);
    }
    const clearVoi = el('button', { class: 'danger' }, 'Clear VOI');
    clearVoi.onclick = () => void this.workbench.clearVoi();
    toolRow.append(clearVoi);
    this.voiInfo = el('div', { class: 'info' });
    this.root.append(el('h3', {}, 'Tools'), toolRow, this.voiInfo);

    // clustering
    const clusterRow = el('div', { class: 'row' });
    const kInput = el('input', { type: 'number', value: '3', id: 'k' });
    const seedInput = el('input', { type: 'number', value: '0', id: 'seed' });
    const binsInput = el('input', { type: 'number', value: '32', id: 'bins' });
    const clusterButton = el('button', {}, 'Cluster');
    clusterButton.onclick = () => {
      void this.workbench.runClustering({
        k: Number(kInput.value), seed: Number(seedInput.value),
        bins: Number(binsInput.value),
      });
    };
    clusterRow.append(el('label', {}, 'k'), kInput,
                      el('label', {}, 'seed'), seedInput,
                      el('label', {}, 'bins'), binsInput, clusterButton);
    this.membersInfo = el('div', { class: 'info' });
    this.root.append(el('h3', {}, 'Clustering'), clusterRow,
                     this.membersInfo);

    // evaluate / decide
    this.evaluateBox = el('div', { class: 'evaluate' });
    this.root.append(el('h3', {}, 'Candidate'), this.evaluateBox);

    // lens
    const lensRow = el('div', { class: 'row' });
    const lensToggle = el('button', {}, 'Lens on/off');
    lensToggle.onclick = () => {
      const enabled = !this.workbench.getState().lensEnabled;
      void this.workbench.setLensEnabled(enabled, this.hooks.currentPose());
    };
    this.lockButton = el('button', {}, 'Lock lens');
    this.lockButton.onclick = () => {
      const pose = this.hooks.currentPose();
      if (this.workbench.getState().lensLocked) {
        void this.workbench.unlockLens(pose);
      } else {
        void this.workbench.lockLens(pose);
      }
    };
    lensRow.append(lensToggle, this.lockButton);
    this.root.append(el('h3', {}, 'Cutaway lens'), lensRow);

    this.status = el('div', { class: 'status' });
    this.root.append(this.status);

    workbench.subscribe((state) => this.update(state));
    this.update(workbench.getState());
  }

  private update(state: WorkbenchState): void {
    for (const [tool, button] of this.toolButtons) {
      button.classList.toggle('active', state.tool === tool);
    }
    const voiSize = state.session?.voi.cells.length ?? 0;
    this.voiInfo.textContent = state.session
      ? `VOI: ${voiSize} cells (rev ${state.session.voi.revision})`
      : 'no dataset loaded';

    const members = state.session?.members;
    const stale = state.session?.graph_stale ? ' [stale: re-cluster]' : '';
    this.membersInfo.textContent = members
      ? `members: [${members.join(', ')}]${stale}`
      : 'no cluster graph yet';

    this.evaluateBox.replaceChildren();
    if (state.evaluationNote) {
      this.evaluateBox.append(el('div', { class: 'note' },
        state.evaluationNote));
    } else if (state.evaluation) {
      const report = state.evaluation;
      this.evaluateBox.append(
        el('div', {}, `candidate ${report.candidate}`),
        el('div', {}, `outlier score ${report.outlier_score.toFixed(4)}`),
        el('div', {}, `mean |dvar| ${report.mean_abs_change.toExponential(3)}`),
        el('div', {}, `max |dvar| ${report.max_abs_change.toExponential(3)}`),
        el('div', {},
           `changed cells ${(report.changed_fraction * 100).toFixed(1)}%`),
      );
      const accept = el('button', { class: 'accept' }, 'Accept');
      accept.onclick = () => void this.workbench.decide('accept');
      const reject = el('button', { class: 'danger' }, 'Reject');
      reject.onclick = () => void this.workbench.decide('reject');
      this.evaluateBox.append(accept, reject);
    } else {
      this.evaluateBox.append(el('div', { class: 'note' },
        'pick a non-member node to evaluate it'));
    }

    this.lockButton.textContent = state.lensLocked
      ? 'Unlock lens' : 'Lock lens';
    this.lockButton.classList.toggle('active', state.lensLocked);

    this.status.textContent = state.error
      ? `error: ${state.error}`
      : state.busy ?? 'ready';
    this.status.classList.toggle('error', state.error !== null);
    this.hooks.onWantRender();
  }
}
