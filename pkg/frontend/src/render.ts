/**
 * Result rendering. Every number and category placed in the DOM is copied
 * verbatim from a service response; the client computes layout, never risk.
 */

import { describeChange } from './state.js';
import type { CounterfactualResult, Schema, ScoreResponse } from './types.js';

export function renderResult(
  doc: Document,
  container: HTMLElement,
  response: ScoreResponse,
  schema: Schema,
): void {
  container.textContent = '';

  const badge = doc.createElement('div');
  badge.className = `badge badge-${response.category}`;
  badge.dataset.role = 'category-badge';
  badge.textContent = response.category.toUpperCase();
  container.appendChild(badge);

  const risk = doc.createElement('div');
  risk.className = 'risk';
  risk.dataset.role = 'risk';
  risk.textContent = `10-year risk ${response.risk_percent_display}%`;
  container.appendChild(risk);

  const total = doc.createElement('div');
  total.className = 'total';
  total.dataset.role = 'total';
  total.textContent = `${response.breakdown.total} points`;
  container.appendChild(total);

  const bars = doc.createElement('div');
  bars.className = 'breakdown';
  const drivers = new Set(response.abductive);
  for (const [name, points] of Object.entries(response.breakdown)) {
    if (name === 'total') continue;
    const row = doc.createElement('div');
    row.className = 'breakdown-row';
    row.dataset.feature = name;
    if (drivers.has(name as ScoreResponse['abductive'][number])) {
      row.classList.add('driver');
    }
    const label = doc.createElement('span');
    label.className = 'breakdown-label';
    label.textContent = schema.display_names[name as keyof Schema['display_names']] ?? name;
    const bar = doc.createElement('span');
    bar.className = 'breakdown-bar' + (points < 0 ? ' negative' : '');
    bar.style.width = `${Math.min(Math.abs(points) * 6, 90)}px`;
    const value = doc.createElement('span');
    value.className = 'breakdown-points';
    value.textContent = String(points);
    row.append(label, bar, value);
    bars.appendChild(row);
  }
  container.appendChild(bars);

  const driverNote = doc.createElement('div');
  driverNote.className = 'drivers';
  driverNote.dataset.role = 'drivers';
  driverNote.textContent =
    'drivers: ' +
    response.abductive.map((f) => schema.display_names[f] ?? f).join(', ');
  container.appendChild(driverNote);
}

export function renderSuggestion(
  doc: Document,
  container: HTMLElement,
  result: CounterfactualResult | null,
  schema: Schema,
  onApply: (suggestion: CounterfactualResult) => void,
): void {
  container.textContent = '';
  if (result === null) {
    return;
  }
  const panel = doc.createElement('div');
  panel.className = 'suggestion';
  panel.dataset.role = 'suggestion';

  if (result.status === 'already_at_target') {
    panel.textContent = 'already at the lowest category';
    container.appendChild(panel);
    return;
  }
  if (result.status === 'unreachable') {
    panel.textContent = 'not achievable by modifiable factors';
    panel.classList.add('unreachable');
    container.appendChild(panel);
    return;
  }

  const heading = doc.createElement('div');
  heading.textContent = `to reach ${result.target ?? 'a lower category'}:`;
  panel.appendChild(heading);

  const list = doc.createElement('ul');
  for (const [name, change] of Object.entries(result.changes ?? {})) {
    const item = doc.createElement('li');
    item.dataset.feature = name;
    item.textContent = describeChange(
      schema.display_names[name as keyof Schema['display_names']] ?? name,
      change,
    );
    list.appendChild(item);
  }
  panel.appendChild(list);

  const apply = doc.createElement('button');
  apply.type = 'button';
  apply.dataset.role = 'apply-suggestion';
  apply.textContent = 'apply suggestion';
  apply.addEventListener('click', () => onApply(result));
  panel.appendChild(apply);

  container.appendChild(panel);
}
