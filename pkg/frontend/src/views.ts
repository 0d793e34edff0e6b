/** Pure HTML renderers: state in, markup string out, no DOM access.
 *
 * Interactive elements carry data-action attributes; main.ts dispatches on
 * them through one delegated click handler.
 */

import type {
  ClusterInfo,
  MemberInfo,
  PathResponse,
  StagedRule,
  WhatIfResponse,
} from './api.js';

export type ClusterSort = 'size' | 'leader' | 'component_id';

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

export function sortClusters(rows: ClusterInfo[], by: ClusterSort): ClusterInfo[] {
  const sorted = [...rows];
  if (by === 'size') {
    sorted.sort((a, b) => b.size - a.size || a.component_id - b.component_id);
  } else if (by === 'leader') {
    sorted.sort((a, b) => a.leader.localeCompare(b.leader));
  } else {
    sorted.sort((a, b) => a.component_id - b.component_id);
  }
  return sorted;
}

export function renderClusterTable(
  rows: ClusterInfo[],
  sortBy: ClusterSort,
  focused: number | null,
): string {
  if (rows.length === 0) {
    return '<p class="empty">No clusters in this run.</p>';
  }
  const header = (key: ClusterSort, label: string) =>
    `<th><button data-action="sort-clusters" data-sort="${key}">${label}${
      sortBy === key ? ' ▾' : ''
    }</button></th>`;
  const body = sortClusters(rows, sortBy)
    .map((row) => {
      const klass = row.component_id === focused ? ' class="focused"' : '';
      return (
        `<tr${klass} data-component-id="${row.component_id}">` +
        `<td>${row.component_id}</td><td>${row.size}</td>` +
        `<td><button data-action="focus-cluster" data-component-id="${row.component_id}">` +
        `${escapeHtml(row.leader)}</button></td>` +
        `<td>${row.leader_score.toFixed(6)}</td>` +
        `<td><button data-action="whatif" data-component-id="${row.component_id}">what-if</button></td>` +
        '</tr>'
      );
    })
    .join('');
  return (
    '<table class="clusters"><thead><tr>' +
    header('component_id', 'id') +
    header('size', 'size') +
    header('leader', 'leader') +
    '<th>leader score</th><th></th>' +
    '</tr></thead><tbody>' +
    body +
    '</tbody></table>'
  );
}

export function renderMemberList(componentId: number, members: MemberInfo[]): string {
  const rows = members
    .map(
      (m) =>
        `<li><button data-action="stage-name" data-name="${escapeHtml(m.name)}">` +
        `${escapeHtml(m.name)}</button> <span class="score">${m.score.toFixed(6)}</span></li>`,
    )
    .join('');
  return (
    `<h3>Cluster ${componentId} members (by score)</h3>` +
    `<ol class="members">${rows}</ol>`
  );
}

/** Linear strip: node, edge label, node, ... readable at 10-30 hops. */
export function renderPathStrip(query: { from: string; to: string }, path: PathResponse | null): string {
  const title = `<h3>Path ${escapeHtml(query.from)} &rarr; ${escapeHtml(query.to)}</h3>`;
  if (path === null) {
    return title + '<p class="empty">No path: the projects are not connected.</p>';
  }
  const pieces: string[] = [];
  path.nodes.forEach((node, i) => {
    pieces.push(
      `<span class="node"><button data-action="stage-name" data-name="${escapeHtml(node.name)}" ` +
        `title="stage blacklist rule">${escapeHtml(node.name)}</button>` +
        `<span class="score">${node.score.toFixed(6)}</span></span>`,
    );
    if (i < path.edges.length) {
      pieces.push(`<span class="edge">&mdash;${escapeHtml(path.edges[i].provenance)}&mdash;</span>`);
    }
  });
  return title + `<div class="path-strip">${pieces.join('')}</div>`;
}

export function renderStagedRules(rules: StagedRule[]): string {
  if (rules.length === 0) {
    return '<p class="empty">No staged rules.</p>';
  }
  const rows = rules
    .map(
      (rule) =>
        `<li><code>${rule.kind} ${escapeHtml(rule.value)}</code> ` +
        `<button data-action="unstage" data-rule-id="${rule.id}">remove</button></li>`,
    )
    .join('');
  return `<ul class="staged">${rows}</ul>`;
}

export function renderWhatIf(before: ClusterInfo | undefined, result: WhatIfResponse): string {
  const beforeSize = before ? before.size : result.resulting_components.reduce((s, c) => s + c.size, 0) + result.removed_nodes.length;
  const after = result.resulting_components
    .map((c) => `<li>${c.size} members, leader <strong>${escapeHtml(c.leader)}</strong></li>`)
    .join('');
  const removed =
    result.removed_nodes.length === 0
      ? '<p class="empty">Nothing removed.</p>'
      : `<ul class="removed">${result.removed_nodes
          .map((name) => `<li>${escapeHtml(name)}</li>`)
          .join('')}</ul>`;
  return (
    `<h3>What-if on cluster ${result.affected_component}</h3>` +
    `<p>Before: 1 component of ${beforeSize}. After: ${result.resulting_components.length} ` +
    `component${result.resulting_components.length === 1 ? '' : 's'}.</p>` +
    `<ol class="after">${after}</ol>` +
    `<h4>Removed nodes (${result.removed_nodes.length})</h4>` +
    removed +
    `<p class="note">${escapeHtml(result.note)}</p>` +
    '<button data-action="export-blacklist">export blacklist</button>'
  );
}

export function renderExportSummary(ruleCount: number, rejectCount: number): string {
  if (rejectCount > 0) {
    return `<p class="error">Export failed validation: ${rejectCount} unparseable lines.</p>`;
  }
  return `<p>Exported blacklist with ${ruleCount} rules; download started.</p>`;
}
