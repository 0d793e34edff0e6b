/** In-memory stand-in for the inspection service.
 *
 * The canned bodies were captured verbatim from the real service running
 * over the dumbbell fixture (two 7-cliques joined by `megahub/linker`,
 * plus a 22-member diamond component).
 */

import type { ClusterInfo, MemberInfo, PathResponse, StagedRule, WhatIfResponse } from '../src/api.js';

export const CLUSTERS: ClusterInfo[] = [
  { component_id: 1, size: 22, leader: 'dia/a', leader_score: 0.042696602 },
  { component_id: 0, size: 15, leader: 'alpha/core', leader_score: 0.046577577 },
];

export const MEMBERS_0: MemberInfo[] = [
  { name: 'alpha/core', score: 0.046577577 },
  { name: 'beta/core', score: 0.044841401 },
  { name: 'megahub/linker', score: 0.035389163 },
  { name: 'beta7/app', score: 0.010505318 },
];

export const DIAMOND_PATH: PathResponse = {
  nodes: [
    { name: 'dia/a', score: 0.042696602 },
    { name: 'dia/c', score: 0.039842427 },
    { name: 'dia/d', score: 0.010505471 },
  ],
  edges: [
    { source: 'dia/a', target: 'dia/c', provenance: 'shared_commit' },
    { source: 'dia/c', target: 'dia/d', provenance: 'shared_commit' },
  ],
};

export const WHATIF_SPLIT: WhatIfResponse = {
  affected_component: 0,
  resulting_components: [
    { size: 7, leader: 'alpha/core' },
    { size: 7, leader: 'beta/core' },
  ],
  removed_nodes: ['megahub/linker'],
  note: 'Preview recomputed on this component only; the full effect is realized by re-running the pipeline with the exported blacklist.',
};

export const BASE_BLACKLIST = '# nothing excluded up front\n';

export interface RecordedCall {
  method: string;
  url: string;
}

export interface FakeServer {
  fetchFn: (input: string, init?: RequestInit) => Promise<Response>;
  calls: RecordedCall[];
  staged: StagedRule[];
}

function json(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

export function fakeServer(): FakeServer {
  const staged: StagedRule[] = [];
  const calls: RecordedCall[] = [];
  let nextId = 0;

  const fetchFn = async (input: string, init?: RequestInit): Promise<Response> => {
    const method = init?.method ?? 'GET';
    const url = new URL(input, 'http://fake');
    calls.push({ method, url: url.pathname + url.search });

    if (method === 'GET' && url.pathname === '/clusters') {
      return json(CLUSTERS);
    }
    if (method === 'GET' && url.pathname === '/clusters/0/members') {
      return json(MEMBERS_0);
    }
    if (method === 'GET' && url.pathname === '/path') {
      const from = url.searchParams.get('from');
      const to = url.searchParams.get('to');
      if (from === 'dia/a' && to === 'dia/d') {
        return json(DIAMOND_PATH);
      }
      if (from === 'ghost/ship' || to === 'ghost/ship') {
        return json({ detail: `unknown project '${from}'` }, 404);
      }
      return json({ detail: `no path between '${from}' and '${to}'` }, 404);
    }
    if (method === 'GET' && url.pathname === '/blacklist') {
      return json({ rules: [...staged] });
    }
    if (method === 'POST' && url.pathname === '/blacklist') {
      const body = JSON.parse(String(init?.body)) as { kind: StagedRule['kind']; value: string };
      const rule: StagedRule = { id: `rule${nextId++}`, ...body };
      staged.push(rule);
      return json(rule);
    }
    if (method === 'DELETE' && url.pathname.startsWith('/blacklist/')) {
      const id = url.pathname.split('/').pop();
      const index = staged.findIndex((r) => r.id === id);
      if (index < 0) return json({ detail: `no staged rule '${id}'` }, 404);
      staged.splice(index, 1);
      return json({ removed: id });
    }
    if (method === 'POST' && url.pathname === '/whatif') {
      const body = JSON.parse(String(init?.body)) as { component_id: number };
      if (body.component_id !== 0) return json({ detail: 'unknown component' }, 404);
      return json(WHATIF_SPLIT);
    }
    if (method === 'GET' && url.pathname === '/export/blacklist') {
      const text =
        BASE_BLACKLIST + staged.map((rule) => `${rule.kind} ${rule.value}\n`).join('');
      return new Response(text, { status: 200, headers: { 'Content-Type': 'text/plain' } });
    }
    return json({ detail: `unhandled ${method} ${url.pathname}` }, 500);
  };

  return { fetchFn, calls, staged };
}
