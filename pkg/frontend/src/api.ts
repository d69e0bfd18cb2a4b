/** Typed client for the analysis server. All pipeline numbers shown in the
 * UI come from these responses; nothing is recomputed locally. */

import type {
  ClusterGraph, ClusterParams, CutResult, EvaluateReport, GridGeometry,
  JobStatus, LensParams, SessionDocument, SessionSnapshot, VarianceField,
} from './types.js';

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    detail: string,
  ) {
    super(`${code}: ${detail}`);
  }
}

export class Client {
  constructor(private baseUrl: string = '') {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      headers: { 'Content-Type': 'application/json' },
      ...init,
    });
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      throw new ApiError(response.status,
        (body as { error?: string }).error ?? `HTTP${response.status}`,
        (body as { detail?: string }).detail ?? response.statusText);
    }
    return body as T;
  }

  session(): Promise<SessionSnapshot> {
    return this.request('/session');
  }

  loadEnsemble(manifest: string): Promise<SessionSnapshot> {
    return this.request('/ensemble', {
      method: 'POST', body: JSON.stringify({ manifest }),
    });
  }

  grid(): Promise<GridGeometry> {
    return this.request('/grid');
  }

  variance(): Promise<VarianceField> {
    return this.request('/variance');
  }

  membersVariance(): Promise<VarianceField> {
    return this.request('/variance/members');
  }

  setVoi(cells: number[]): Promise<SessionSnapshot> {
    return this.request('/voi', {
      method: 'POST', body: JSON.stringify({ op: 'set', cells }),
    });
  }

  toggleVoiCell(cell: number): Promise<SessionSnapshot> {
    return this.request('/voi', {
      method: 'POST', body: JSON.stringify({ op: 'toggle', cells: [cell] }),
    });
  }

  addVoiBox(anchor: number[], corner: number[]): Promise<SessionSnapshot> {
    return this.request('/voi', {
      method: 'POST',
      body: JSON.stringify({ op: 'add-box', anchor, corner }),
    });
  }

  clearVoi(): Promise<SessionSnapshot> {
    return this.request('/voi', {
      method: 'POST', body: JSON.stringify({ op: 'clear' }),
    });
  }

  startClustering(params: ClusterParams): Promise<{ status: string }> {
    return this.request('/cluster', {
      method: 'POST', body: JSON.stringify(params),
    });
  }

  clusterStatus(): Promise<JobStatus> {
    return this.request('/cluster/status');
  }

  /** Poll until the clustering job reaches a terminal state. */
  async pollClustering(intervalMs = 150,
                       onTick?: (status: JobStatus) => void,
                       timeoutMs = 120_000): Promise<JobStatus> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const status = await this.clusterStatus();
      onTick?.(status);
      if (status.state !== 'running' && status.state !== 'idle') {
        return status;
      }
      if (Date.now() > deadline) {
        throw new ApiError(408, 'Timeout', 'clustering did not finish');
      }
      await new Promise((resolve) => setTimeout(resolve, intervalMs));
    }
  }

  graph(): Promise<ClusterGraph> {
    return this.request('/graph');
  }

  outliers(): Promise<{ ranked: number[] }> {
    return this.request('/outliers');
  }

  evaluate(candidate: number): Promise<EvaluateReport> {
    return this.request('/evaluate', {
      method: 'POST', body: JSON.stringify({ candidate }),
    });
  }

  decide(candidate: number, action: 'accept' | 'reject'):
      Promise<{ members: number[]; decision_count: number }> {
    return this.request('/decide', {
      method: 'POST', body: JSON.stringify({ candidate, action }),
    });
  }

  lensQuery(params: LensParams): Promise<CutResult> {
    return this.request('/lens/query', {
      method: 'POST', body: JSON.stringify(params),
    });
  }

  exportSession(): Promise<SessionDocument> {
    return this.request('/export');
  }

  importSession(doc: SessionDocument): Promise<SessionSnapshot> {
    return this.request('/import', {
      method: 'POST', body: JSON.stringify(doc),
    });
  }
}
