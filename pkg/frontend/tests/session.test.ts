import { describe, expect, it } from 'vitest';
import { ConsoleSession } from '../src/session.js';

describe('console session', () => {
  it('appends history entries and never mutates them', () => {
    const session = new ConsoleSession('http://gw:3030');
    session.record('mediated', 'SELECT * WHERE {}');
    const entry = session.record('site', 'SELECT ?t WHERE { ?t ?p ?o }', 'samos');
    expect(session.entries).toHaveLength(2);
    expect(session.entries[1]).toBe(entry);
    expect(Object.isFrozen(entry)).toBe(true);
    expect(entry.at).toMatch(/^\d{4}-\d{2}-\d{2}T/);
    // the accessor exposes the same list, append-only within a session
    const before = session.entries.length;
    session.record('mediated', 'SELECT * WHERE {}');
    expect(session.entries.length).toBe(before + 1);
  });
});
