/** Application state for the workbench.
 *
 * Strictly server-authoritative: state changes only after a confirmed
 * response (no optimistic updates), so every number on screen traces back
 * to a server payload. Long jobs (clustering) go through the polling
 * endpoint and flip `busy` while they run.
 */

import { ApiError, Client } from './api.js';
import type {
  CameraPose, LensSettings } from './camera.js';
import { DEFAULT_LENS, LensController } from './camera.js';
import type {
  ClusterGraph, ClusterParams, CutResult, EvaluateReport, GridGeometry,
  SessionSnapshot, VarianceField,
} from './types.js';

export type Tool = 'orbit' | 'voi-box' | 'voi-cell' | 'lens' | 'graph-pick';

export interface WorkbenchState {
  tool: Tool;
  session: SessionSnapshot | null;
  geometry: GridGeometry | null;
  variance: VarianceField | null;
  graph: ClusterGraph | null;
  evaluation: EvaluateReport | null;    // drives the delta overlay
  evaluationNote: string | null;        // e.g. picking an existing member
  cut: CutResult | null;
  lensEnabled: boolean;
  lensLocked: boolean;
  lensSettings: LensSettings;
  colorMode: 'variance' | 'delta';
  busy: string | null;
  error: string | null;
}

type Listener = (state: WorkbenchState) => void;

export class Workbench {
  private state: WorkbenchState = {
    tool: 'orbit',
    session: null,
    geometry: null,
    variance: null,
    graph: null,
    evaluation: null,
    evaluationNote: null,
    cut: null,
    lensEnabled: false,
    lensLocked: false,
    lensSettings: { ...DEFAULT_LENS },
    colorMode: 'variance',
    busy: null,
    error: null,
  };

  private listeners: Listener[] = [];
  readonly lens = new LensController();

  constructor(readonly client: Client) {}

  getState(): WorkbenchState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private update(patch: Partial<WorkbenchState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  private async guarded<T>(busy: string,
                           work: () => Promise<T>): Promise<T | null> {
    this.update({ busy, error: null });
    try {
      return await work();
    } catch (err) {
      this.update({ error: err instanceof Error ? err.message : String(err) });
      return null;
    } finally {
      this.update({ busy: null });
    }
  }

  setTool(tool: Tool): void {
    this.update({ tool });
  }

  setColorMode(mode: 'variance' | 'delta'): void {
    this.update({ colorMode: mode });
  }

  async refreshSession(): Promise<void> {
    const session = await this.client.session();
    this.update({ session });
  }

  async loadEnsemble(manifest: string): Promise<void> {
    await this.guarded('loading ensemble', async () => {
      const session = await this.client.loadEnsemble(manifest);
      const [geometry, variance] = await Promise.all([
        this.client.grid(), this.client.variance(),
      ]);
      this.update({
        session, geometry, variance,
        graph: null, evaluation: null, cut: null, colorMode: 'variance',
      });
    });
  }

  /** Drag-box VOI painting: the box goes to the server, which owns the
   * center-containment test; the UI adopts the confirmed cell set. */
  async paintVoiBox(anchor: number[], corner: number[]): Promise<void> {
    await this.guarded('selecting cells', async () => {
      const session = await this.client.addVoiBox(anchor, corner);
      this.update({ session });
    });
  }

  async toggleVoiCell(cell: number): Promise<void> {
    await this.guarded('toggling cell', async () => {
      const session = await this.client.toggleVoiCell(cell);
      this.update({ session });
    });
  }

  async clearVoi(): Promise<void> {
    await this.guarded('clearing VOI', async () => {
      const session = await this.client.clearVoi();
      this.update({ session });
    });
  }

  async runClustering(params: ClusterParams): Promise<void> {
    await this.guarded('clustering', async () => {
      await this.client.startClustering(params);
      const status = await this.client.pollClustering(100, (s) => {
        this.update({ busy: `clustering: ${s.state}` });
      });
      if (status.state !== 'done') {
        throw new ApiError(500, 'ClusterJob',
          `${status.state}${status.detail ? `: ${status.detail}` : ''}`);
      }
      const [session, graph] = await Promise.all([
        this.client.session(), this.client.graph(),
      ]);
      this.update({ session, graph, evaluation: null, evaluationNote: null });
    });
  }

  /** Graph node pick: members show their state, non-members get a fresh
   * variance-delta evaluation and the overlay switches to it. */
  async pickNode(id: number): Promise<void> {
    const members = this.state.session?.members ?? [];
    if (members.includes(id)) {
      this.update({
        evaluation: null,
        evaluationNote: `realization ${id} is already a member`,
      });
      return;
    }
    await this.guarded(`evaluating ${id}`, async () => {
      const evaluation = await this.client.evaluate(id);
      this.update({ evaluation, evaluationNote: null, colorMode: 'delta' });
    });
  }

  async topOutlier(): Promise<number | null> {
    const doc = await this.client.outliers();
    return doc.ranked.length > 0 ? doc.ranked[0] : null;
  }

  async decide(action: 'accept' | 'reject'): Promise<void> {
    const evaluation = this.state.evaluation;
    if (!evaluation) {
      this.update({ error: 'nothing evaluated yet' });
      return;
    }
    await this.guarded(action, async () => {
      await this.client.decide(evaluation.candidate, action);
      const session = await this.client.session();
      this.update({
        session, evaluation: null, evaluationNote: null,
        colorMode: 'variance',
      });
    });
  }

  // --- lens -----------------------------------------------------------------

  async setLensEnabled(enabled: boolean, pose: CameraPose): Promise<void> {
    this.update({ lensEnabled: enabled });
    if (enabled) {
      await this.queryLens(pose);
    } else {
      this.update({ cut: null });
    }
  }

  /** Re-query the cut for the current camera (or the locked pose). */
  async queryLens(pose: CameraPose): Promise<void> {
    if (!this.state.lensEnabled) {
      return;
    }
    const params = this.lens.paramsFor(pose, this.state.lensSettings);
    await this.guarded('lens query', async () => {
      const cut = await this.client.lensQuery(params);
      this.update({ cut });
    });
  }

  async lockLens(pose: CameraPose): Promise<void> {
    this.lens.lock(pose, this.state.lensSettings);
    this.update({ lensLocked: true });
    await this.queryLens(pose);
  }

  async unlockLens(pose: CameraPose): Promise<void> {
    this.lens.unlock();
    this.update({ lensLocked: false });
    await this.queryLens(pose);
  }
}
