import { describe, expect, it } from 'vitest';

import {
  escapeHtml,
  renderClusterTable,
  renderMemberList,
  renderPathStrip,
  renderStagedRules,
  renderWhatIf,
  sortClusters,
} from '../src/views.js';
import { CLUSTERS, DIAMOND_PATH, MEMBERS_0, WHATIF_SPLIT } from './harness.js';

describe('cluster browser', () => {
  it('renders fixture clusters size-descending by default', () => {
    const html = renderClusterTable(CLUSTERS, 'size', null);
    const diamond = html.indexOf('dia/a');
    const dumbbell = html.indexOf('alpha/core');
    expect(diamond).toBeGreaterThan(-1);
    expect(dumbbell).toBeGreaterThan(-1);
    expect(diamond).toBeLessThan(dumbbell); // 22 before 15
    expect(html).toContain('<td>22</td>');
    expect(html).toContain('<td>15</td>');
  });

  it('resorts by leader name when asked', () => {
    const sorted = sortClusters(CLUSTERS, 'leader');
    expect(sorted.map((c) => c.leader)).toEqual(['alpha/core', 'dia/a']);
  });

  it('sorting never mutates the input rows', () => {
    const before = [...CLUSTERS];
    sortClusters(CLUSTERS, 'component_id');
    expect(CLUSTERS).toEqual(before);
  });

  it('shows an empty state for a run with no clusters', () => {
    expect(renderClusterTable([], 'size', null)).toContain('No clusters');
  });

  it('marks the focused cluster row', () => {
    const html = renderClusterTable(CLUSTERS, 'size', 0);
    expect(html).toContain('<tr class="focused" data-component-id="0">');
  });
});

describe('member drill-down', () => {
  it('lists members in the given (score-descending) order', () => {
    const html = renderMemberList(0, MEMBERS_0);
    const positions = MEMBERS_0.map((m) => html.indexOf(m.name));
    expect([...positions].sort((a, b) => a - b)).toEqual(positions);
    expect(html).toContain('data-action="stage-name"');
  });
});

describe('path view', () => {
  it('renders one node per hop endpoint and labels edges', () => {
    const html = renderPathStrip({ from: 'dia/a', to: 'dia/d' }, DIAMOND_PATH);
    expect(html.match(/class="node"/g)).toHaveLength(3);
    expect(html.match(/shared_commit/g)).toHaveLength(2);
  });

  it('offers a stage action on every node', () => {
    const html = renderPathStrip({ from: 'dia/a', to: 'dia/d' }, DIAMOND_PATH);
    expect(html.match(/data-action="stage-name"/g)).toHaveLength(3);
    expect(html).toContain('data-name="dia/c"');
  });

  it('renders a notice when there is no path', () => {
    const html = renderPathStrip({ from: 'alpha/core', to: 'dia/a' }, null);
    expect(html).toContain('No path');
  });
});

describe('staged rules', () => {
  it('renders rules with remove buttons', () => {
    const html = renderStagedRules([{ id: 'abc', kind: 'name', value: 'megahub/linker' }]);
    expect(html).toContain('name megahub/linker');
    expect(html).toContain('data-rule-id="abc"');
  });

  it('renders an empty state', () => {
    expect(renderStagedRules([])).toContain('No staged rules');
  });
});

describe('what-if panel', () => {
  it('shows the 1-to-2 split on the dumbbell fixture', () => {
    const html = renderWhatIf(CLUSTERS[1], WHATIF_SPLIT);
    expect(html).toContain('Before: 1 component of 15.');
    expect(html).toContain('After: 2 components.');
    expect(html).toContain('7 members, leader <strong>alpha/core</strong>');
    expect(html).toContain('7 members, leader <strong>beta/core</strong>');
    expect(html).toContain('megahub/linker');
    expect(html).toContain('data-action="export-blacklist"');
  });

  it('derives the before size when the cluster row is unknown', () => {
    const html = renderWhatIf(undefined, WHATIF_SPLIT);
    expect(html).toContain('Before: 1 component of 15.'); // 7 + 7 + 1 removed
  });
});

describe('escaping', () => {
  it('neutralizes markup in project names', () => {
    const hostile = '<script>alert(1)</script>/repo';
    const html = renderMemberList(0, [{ name: hostile, score: 0 }]);
    expect(html).not.toContain('<script>');
    expect(html).toContain('&lt;script&gt;');
    expect(escapeHtml('a"b')).toBe('a&quot;b');
  });
});
