/** Typed client for the inspection service. All UI data flows through it. */

export type RuleKind = 'name' | 'suffix' | 'owner';

export interface ClusterInfo {
  component_id: number;
  size: number;
  leader: string;
  leader_score: number;
}

export interface MemberInfo {
  name: string;
  score: number;
}

export interface PathNode {
  name: string;
  score: number;
}

export interface PathEdge {
  source: string;
  target: string;
  provenance: string;
}

export interface PathResponse {
  nodes: PathNode[];
  edges: PathEdge[];
}

export interface StagedRule {
  id: string;
  kind: RuleKind;
  value: string;
}

export interface ResultingComponent {
  size: number;
  leader: string;
}

export interface WhatIfResponse {
  affected_component: number;
  resulting_components: ResultingComponent[];
  removed_nodes: string[];
  note: string;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`API ${status}: ${detail}`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async clusters(minSize = 1, limit = 100): Promise<ClusterInfo[]> {
    return this.json(`/clusters?min_size=${minSize}&limit=${limit}`);
  }

  async members(componentId: number): Promise<MemberInfo[]> {
    return this.json(`/clusters/${componentId}/members`);
  }

  /** Resolves to null when the two projects are not connected. */
  async path(from: string, to: string): Promise<PathResponse | null> {
    const query = `/path?from=${encodeURIComponent(from)}&to=${encodeURIComponent(to)}`;
    try {
      return await this.json<PathResponse>(query);
    } catch (err) {
      if (err instanceof ApiError && err.status === 404 && err.detail.includes('no path')) {
        return null;
      }
      throw err;
    }
  }

  async stagedRules(): Promise<StagedRule[]> {
    const body = await this.json<{ rules: StagedRule[] }>('/blacklist');
    return body.rules;
  }

  async stageRule(kind: RuleKind, value: string): Promise<StagedRule> {
    return this.json('/blacklist', {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ kind, value }),
    });
  }

  async unstageRule(id: string): Promise<void> {
    await this.json(`/blacklist/${id}`, { method: 'DELETE' });
  }

  async whatIf(componentId: number): Promise<WhatIfResponse> {
    return this.json('/whatif', {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ component_id: componentId }),
    });
  }

  async exportBlacklist(): Promise<string> {
    const response = await this.fetchFn(`${this.baseUrl}/export/blacklist`);
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    return response.text();
  }

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = (await response.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return response.json() as Promise<T>;
  }
}
