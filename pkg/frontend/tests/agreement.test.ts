// Agreement suite: the probability the UI displays must equal what the
// `pqscreen score` command prints, to 1e-6, for 25 scripted inputs. The
// fixtures carry the CLI value and the exact response body the service
// returns for each request; the client is driven against those bytes.

import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

import { describe, expect, it, vi } from 'vitest';

import { ScoringClient, type ScoreResponse } from '../src/api.js';
import {
  buildRequest,
  contributionTotal,
  formatProbability,
  initialState,
  setSeverity,
  type FormState,
} from '../src/form.js';
import { ITEM_CODES } from '../src/model.js';

interface Fixture {
  name: string;
  request: { features: Record<string, number>; age: number; gender: 0 | 1 };
  cli_probability: number;
  response_body: string;
}

const here = dirname(fileURLToPath(import.meta.url));
const FIXTURES: Fixture[] = JSON.parse(
  readFileSync(join(here, 'fixtures', 'scoring_cases.json'), 'utf-8'),
);

function stateFor(fixture: Fixture): FormState {
  let state = initialState('http://svc:8471');
  for (const code of ITEM_CODES) {
    state = setSeverity(state, code, fixture.request.features[code]);
  }
  return { ...state, age: fixture.request.age, gender: fixture.request.gender };
}

describe('UI / CLI agreement on 25 scripted inputs', () => {
  it('has the full scripted set', () => {
    expect(FIXTURES).toHaveLength(25);
  });

  it.each(FIXTURES.map((f) => [f.name, f] as const))(
    'case %s agrees with the CLI to 1e-6',
    async (_name, fixture) => {
      const fetchMock = vi.fn(async (_url: string, init: RequestInit) => {
        // the UI must send exactly the scripted request
        expect(JSON.parse(init.body as string)).toEqual(fixture.request);
        return new Response(fixture.response_body, {
          status: 200,
          headers: { 'Content-Type': 'application/json' },
        });
      });
      const client = new ScoringClient('http://svc:8471', fetchMock as unknown as typeof fetch);
      const response = await client.score(buildRequest(stateFor(fixture)));

      // displayed probability (before display rounding) vs CLI output
      expect(Math.abs(response.probability - fixture.cli_probability)).toBeLessThan(1e-6);
      expect(formatProbability(response.probability)).toBe(
        formatProbability(fixture.cli_probability),
      );

      // contribution bars sum to linear score minus intercept
      const total = contributionTotal(response);
      expect(Math.abs(total - (response.linear_score! - response.intercept!))).toBeLessThan(
        1e-9,
      );
    },
  );

  it('invalid inputs never reach the service', () => {
    const fetchMock = vi.fn();
    const client = new ScoringClient('http://svc:8471', fetchMock as unknown as typeof fetch);

    // missing item
    let state = stateFor(FIXTURES[0]);
    state = setSeverity(state, 'P2_FREZ', null);
    expect(() => buildRequest(state)).toThrow(/P2_FREZ/);

    // out-of-range severity
    let bad = stateFor(FIXTURES[0]);
    bad = setSeverity(bad, 'P1_PAIN', 7);
    expect(() => buildRequest(bad)).toThrow(/P1_PAIN/);

    expect(fetchMock).not.toHaveBeenCalled();
    void client;
  });
});

describe('response parsing of recorded service bytes', () => {
  it('parses every recorded body into a well-formed ScoreResponse', () => {
    for (const fixture of FIXTURES) {
      const parsed = JSON.parse(fixture.response_body) as ScoreResponse;
      expect(parsed.model_id).toBe('paper-eq1');
      expect(parsed.contributions).toHaveLength(22);
      expect(parsed.probability).toBeGreaterThanOrEqual(0);
      expect(parsed.probability).toBeLessThanOrEqual(1);
    }
  });
});
