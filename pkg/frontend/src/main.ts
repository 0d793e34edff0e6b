/** DOM bootstrap: subscribes the renderers to session state and routes
 * delegated clicks to session actions.  Everything testable lives in the
 * session and view modules; this file is glue.
 */

import { ApiClient } from './api.js';
import { CurationSession } from './session.js';
import {
  ClusterSort,
  renderClusterTable,
  renderExportSummary,
  renderMemberList,
  renderPathStrip,
  renderStagedRules,
  renderWhatIf,
} from './views.js';

const session = new CurationSession(new ApiClient(''));
let clusterSort: ClusterSort = 'size';

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function render(): void {
  const state = session.snapshot();
  el('clusters').innerHTML = renderClusterTable(state.clusters, clusterSort, state.focusedCluster);
  el('members').innerHTML =
    state.focusedCluster === null
      ? ''
      : renderMemberList(state.focusedCluster, state.members);
  el('path').innerHTML = state.pathQuery
    ? renderPathStrip(state.pathQuery, state.path)
    : '';
  el('staged').innerHTML = renderStagedRules(state.staged);
  el('whatif').innerHTML = state.whatIf
    ? renderWhatIf(
        state.clusters.find((c) => c.component_id === state.whatIf!.affected_component),
        state.whatIf,
      )
    : '';
  el('error').textContent = state.error ?? '';
}

async function download(): Promise<void> {
  const result = await session.exportBlacklist();
  el('export-status').innerHTML = renderExportSummary(result.ruleCount, result.rejectCount);
  if (result.rejectCount > 0) return;
  const blob = new Blob([result.text], { type: 'text/plain' });
  const link = document.createElement('a');
  link.href = URL.createObjectURL(blob);
  link.download = 'blacklist.txt';
  link.click();
  URL.revokeObjectURL(link.href);
}

document.addEventListener('click', (event) => {
  const target = (event.target as HTMLElement).closest('[data-action]');
  if (!(target instanceof HTMLElement)) return;
  const action = target.dataset.action;
  if (action === 'sort-clusters') {
    clusterSort = target.dataset.sort as ClusterSort;
    render();
  } else if (action === 'focus-cluster') {
    void session.focusCluster(Number(target.dataset.componentId));
  } else if (action === 'whatif') {
    void session.runWhatIf(Number(target.dataset.componentId));
  } else if (action === 'stage-name') {
    void session.stageName(target.dataset.name ?? '');
  } else if (action === 'unstage') {
    void session.unstageRule(target.dataset.ruleId ?? '');
  } else if (action === 'export-blacklist') {
    void download();
  }
});

el('path-form').addEventListener('submit', (event) => {
  event.preventDefault();
  const from = (el('path-from') as HTMLInputElement).value.trim();
  const to = (el('path-to') as HTMLInputElement).value.trim();
  if (from && to) void session.queryPath(from, to);
});

session.onChange(render);
void session.start();
