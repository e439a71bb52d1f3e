import { describe, expect, it } from 'vitest';
import { buildTicketQuery, hasCriteria, HDO, DUL } from '../src/templates.js';

describe('template query generation', () => {
  it('builds the golden "title contains" query', () => {
    const text = buildTicketQuery({ titleContains: 'No Video' });
    expect(text).toBe(
      [
        `PREFIX hdo: <${HDO}>`,
        'SELECT ?t ?title WHERE {',
        '  ?t a hdo:ItSupportTicket ;',
        '     hdo:ticketTitle ?title .',
        '  FILTER regex(?title, "No Video")',
        '}',
      ].join('\n'),
    );
  });

  it('adds status and id constraints with their projections', () => {
    const text = buildTicketQuery({ statusEquals: 'closed', idAtLeast: 1000 });
    expect(text).toContain('hdo:ticketStatus ?status');
    expect(text).toContain('FILTER (?status = "closed")');
    expect(text).toContain('FILTER (?id >= 1000)');
    expect(text).toContain('SELECT ?t ?title ?status ?id WHERE {');
  });

  it('includes the solutions join when asked', () => {
    const text = buildTicketQuery({ titleContains: 'x', includeSolutions: true });
    expect(text).toContain(`PREFIX dul: <${DUL}>`);
    expect(text).toContain('?task dul:associatedWith ?t ;');
    expect(text).toContain('hdo:solutionText ?text .');
  });

  it('escapes quotes and backslashes in literals', () => {
    const text = buildTicketQuery({ titleContains: '"No Video" \\ error' });
    expect(text).toContain('FILTER regex(?title, "\\"No Video\\" \\\\ error")');
  });

  it('appends LIMIT when set', () => {
    expect(buildTicketQuery({ titleContains: 'x', limit: 10 })).toMatch(/} LIMIT 10$/);
  });

  it('knows when the form is empty', () => {
    expect(hasCriteria({})).toBe(false);
    expect(hasCriteria({ titleContains: '  ' })).toBe(false);
    expect(hasCriteria({ titleContains: 'x' })).toBe(true);
    expect(hasCriteria({ idAtLeast: 0 })).toBe(true);
  });
});
