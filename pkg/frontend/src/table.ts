/**
 * Result-table model and rendering. The core is DOM-free (plain data in,
 * HTML string out) so it is testable without a browser; app.ts attaches
 * the sorting clicks.
 */

import { Binding, BindingTerm, QueryResults } from './api.js';

export interface TableModel {
  columns: string[];
  rows: string[][]; // display values, '' for unbound
  warnings: string[];
}

export function termText(term: BindingTerm | undefined): string {
  if (!term) return '';
  if (term.type === 'literal' && term.datatype) {
    const short = term.datatype.split('#').pop();
    return `${term.value} (${short})`;
  }
  if (term.type === 'bnode') return `_:${term.value}`;
  return term.value;
}

export function toTableModel(results: QueryResults): TableModel {
  const columns = results.head.vars;
  const rows = results.results.bindings.map((binding: Binding) =>
    columns.map((column) => termText(binding[column])),
  );
  return { columns, rows, warnings: results.warnings ?? [] };
}

export function sortModel(model: TableModel, column: string, descending = false): TableModel {
  const index = model.columns.indexOf(column);
  if (index < 0) return model;
  const rows = [...model.rows].sort((a, b) => {
    const [x, y] = [a[index], b[index]];
    const numeric = Number(x.split(' ')[0]) - Number(y.split(' ')[0]);
    const cmp = !Number.isNaN(numeric) && x !== '' && y !== ''
      ? numeric
      : x.localeCompare(y);
    return descending ? -cmp : cmp;
  });
  return { ...model, rows };
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

export function renderTable(model: TableModel): string {
  if (model.columns.length === 0) {
    return '<p class="empty">One empty solution (the query has no variables).</p>';
  }
  const head = model.columns
    .map((c) => `<th data-column="${escapeHtml(c)}">${escapeHtml(c)}</th>`)
    .join('');
  const body = model.rows
    .map((row) => `<tr>${row.map((cell) => `<td>${escapeHtml(cell)}</td>`).join('')}</tr>`)
    .join('\n');
  const warnings = model.warnings
    .map((w) => `<p class="warning">partial results: ${escapeHtml(w)}</p>`)
    .join('\n');
  return `${warnings}<table class="results"><thead><tr>${head}</tr></thead>\n<tbody>\n${body}\n</tbody></table>`;
}
