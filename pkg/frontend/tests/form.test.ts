import { describe, expect, it } from 'vitest';

import type { ScoreResponse } from '../src/api.js';
import {
  buildRequest,
  canSubmit,
  contributionBars,
  contributionTotal,
  formatProbability,
  initialState,
  setSeverity,
  validate,
} from '../src/form.js';
import { ITEM_CODES } from '../src/model.js';

function completeState() {
  let state = initialState('http://localhost:8471');
  for (const code of ITEM_CODES) state = setSeverity(state, code, 0);
  return { ...state, age: 66, gender: 1 as const };
}

describe('form state', () => {
  it('starts unanswered with submit disabled', () => {
    const state = initialState('http://localhost:8471');
    expect(canSubmit(state)).toBe(false);
    const issues = validate(state);
    expect(issues.filter((i) => i.message === 'unanswered')).toHaveLength(20);
    expect(issues.some((i) => i.field === 'age')).toBe(true);
    expect(issues.some((i) => i.field === 'gender')).toBe(true);
  });

  it('enables submit once every field is answered', () => {
    let state = initialState('http://localhost:8471');
    for (const code of ITEM_CODES) {
      expect(canSubmit(state)).toBe(false);
      state = setSeverity(state, code, 2);
    }
    expect(canSubmit(state)).toBe(false); // age and gender still missing
    state = { ...state, age: 59.5 };
    expect(canSubmit(state)).toBe(false);
    state = { ...state, gender: 0 };
    expect(canSubmit(state)).toBe(true);
  });

  it('rejects a negative age with an inline issue', () => {
    const state = { ...completeState(), age: -1 };
    expect(canSubmit(state)).toBe(false);
    const issue = validate(state).find((i) => i.field === 'age');
    expect(issue?.message).toMatch(/between 0 and 130/);
  });

  it('rejects out-of-range and fractional severities', () => {
    for (const bad of [5, -1, 2.5]) {
      const state = setSeverity(completeState(), 'P2_TRMR', bad);
      expect(canSubmit(state)).toBe(false);
      expect(validate(state)[0].field).toBe('P2_TRMR');
    }
  });

  it('refuses to build a request from an incomplete form', () => {
    const state = initialState('http://localhost:8471');
    expect(() => buildRequest(state)).toThrow(/form incomplete/);
  });

  it('builds the full 20-item payload', () => {
    const state = setSeverity(completeState(), 'P2_TRMR', 3);
    const request = buildRequest(state);
    expect(Object.keys(request.features)).toHaveLength(20);
    expect(request.features.P2_TRMR).toBe(3);
    expect(request.age).toBe(66);
    expect(request.gender).toBe(1);
  });

  it('editing one item changes only that item in the payload', () => {
    const before = buildRequest(completeState());
    const after = buildRequest(setSeverity(completeState(), 'P2_HWRT', 4));
    for (const code of ITEM_CODES) {
      expect(after.features[code]).toBe(code === 'P2_HWRT' ? 4 : before.features[code]);
    }
  });

  it('rejects unknown item codes', () => {
    expect(() => setSeverity(initialState(''), 'P9_FAKE', 1)).toThrow(/unknown item/);
  });
});

describe('result shaping', () => {
  const response: ScoreResponse = {
    schema_version: 1,
    model_id: 'paper-eq1',
    probability: 0.6337,
    linear_score: 0.54813,
    intercept: 0.54813,
    contributions: [
      { feature: 'A', value: 1, contribution: 0.5 },
      { feature: 'B', value: 2, contribution: -2.0 },
      { feature: 'C', value: 0, contribution: 0.25 },
    ],
  };

  it('formats probabilities as percentages', () => {
    expect(formatProbability(0.6337)).toBe('63.37%');
    expect(formatProbability(0.999999)).toBe('100.00%');
    expect(formatProbability(0)).toBe('0.00%');
  });

  it('sorts bars by magnitude and scales to the largest', () => {
    const bars = contributionBars(response);
    expect(bars.map((b) => b.feature)).toEqual(['B', 'A', 'C']);
    expect(bars[0].relative).toBe(-1);
    expect(bars[1].relative).toBeCloseTo(0.25, 12);
  });

  it('totals the contributions', () => {
    expect(contributionTotal(response)).toBeCloseTo(-1.25, 12);
  });
});
