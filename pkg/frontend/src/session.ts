/** Curation session state: a thin mirror of the server, re-fetched after
 * every mutation so the server stays the single source of truth.  A hard
 * refresh loses nothing but view focus.
 */

import { ApiClient, RuleKind } from './api.js';
import type {
  ClusterInfo,
  MemberInfo,
  PathResponse,
  StagedRule,
  WhatIfResponse,
} from './api.js';
import { parseBlacklist } from './blacklist.js';

export interface PathQuery {
  from: string;
  to: string;
}

export interface SessionState {
  clusters: ClusterInfo[];
  focusedCluster: number | null;
  members: MemberInfo[];
  pathQuery: PathQuery | null;
  path: PathResponse | null;
  pathHistory: PathQuery[];
  staged: StagedRule[];
  whatIf: WhatIfResponse | null;
  error: string | null;
}

export class CurationSession {
  private state: SessionState = {
    clusters: [],
    focusedCluster: null,
    members: [],
    pathQuery: null,
    path: null,
    pathHistory: [],
    staged: [],
    whatIf: null,
    error: null,
  };

  private listeners: Array<(state: SessionState) => void> = [];

  constructor(private readonly api: ApiClient) {}

  snapshot(): SessionState {
    return { ...this.state };
  }

  onChange(listener: (state: SessionState) => void): void {
    this.listeners.push(listener);
  }

  private update(patch: Partial<SessionState>): void {
    this.state = { ...this.state, ...patch, error: patch.error ?? null };
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  private fail(err: unknown): void {
    this.update({ error: err instanceof Error ? err.message : String(err) });
  }

  /** Initial load: clusters and whatever is already staged server-side. */
  async start(): Promise<void> {
    try {
      const [clusters, staged] = await Promise.all([
        this.api.clusters(),
        this.api.stagedRules(),
      ]);
      this.update({ clusters, staged });
    } catch (err) {
      this.fail(err);
    }
  }

  async refreshClusters(minSize = 1, limit = 100): Promise<void> {
    try {
      this.update({ clusters: await this.api.clusters(minSize, limit) });
    } catch (err) {
      this.fail(err);
    }
  }

  async focusCluster(componentId: number): Promise<void> {
    try {
      const members = await this.api.members(componentId);
      this.update({ focusedCluster: componentId, members });
    } catch (err) {
      this.fail(err);
    }
  }

  async queryPath(from: string, to: string): Promise<void> {
    try {
      const path = await this.api.path(from, to);
      const query = { from, to };
      this.update({
        pathQuery: query,
        path,
        pathHistory: [...this.state.pathHistory, query],
      });
    } catch (err) {
      this.fail(err);
    }
  }

  /** Stage a rule, then re-read the staged list: exactly one confirmation
   * round-trip, and the mirror never gets ahead of the server. */
  async stageRule(kind: RuleKind, value: string): Promise<void> {
    try {
      await this.api.stageRule(kind, value);
      this.update({ staged: await this.api.stagedRules() });
    } catch (err) {
      this.fail(err);
    }
  }

  async stageName(name: string): Promise<void> {
    await this.stageRule('name', name);
  }

  async unstageRule(id: string): Promise<void> {
    try {
      await this.api.unstageRule(id);
      this.update({ staged: await this.api.stagedRules() });
    } catch (err) {
      this.fail(err);
    }
  }

  async runWhatIf(componentId: number): Promise<void> {
    try {
      this.update({ whatIf: await this.api.whatIf(componentId) });
    } catch (err) {
      this.fail(err);
    }
  }

  /** Fetch the merged blacklist and validate it with the line parser. */
  async exportBlacklist(): Promise<{ text: string; ruleCount: number; rejectCount: number }> {
    const text = await this.api.exportBlacklist();
    const parsed = parseBlacklist(text);
    return { text, ruleCount: parsed.rules.length, rejectCount: parsed.rejects.length };
  }
}
