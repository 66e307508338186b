// Form state and validation, kept free of DOM concerns so it is
// unit-testable and the submit gate has one source of truth.

import type { ScoreRequest, ScoreResponse } from './api.js';
import { AGE_MAX, AGE_MIN, ITEM_CODES, MAX_SEVERITY } from './model.js';

export interface FormState {
  severities: Record<string, number | null>; // null = unanswered
  age: number | null;
  gender: 0 | 1 | null;
  lastResponse: ScoreResponse | null;
  serviceUrl: string;
}

export interface FieldIssue {
  field: string;
  message: string;
}

export function initialState(serviceUrl: string): FormState {
  const severities: Record<string, number | null> = {};
  for (const code of ITEM_CODES) severities[code] = null;
  return { severities, age: null, gender: null, lastResponse: null, serviceUrl };
}

export function setSeverity(state: FormState, code: string, value: number | null): FormState {
  if (!(code in state.severities)) throw new Error(`unknown item ${code}`);
  return { ...state, severities: { ...state.severities, [code]: value } };
}

/** Issues that block submission; empty list means the form is complete. */
export function validate(state: FormState): FieldIssue[] {
  const issues: FieldIssue[] = [];
  for (const code of ITEM_CODES) {
    const v = state.severities[code];
    if (v === null) {
      issues.push({ field: code, message: 'unanswered' });
    } else if (!Number.isInteger(v) || v < 0 || v > MAX_SEVERITY) {
      issues.push({ field: code, message: `severity must be a whole number 0–${MAX_SEVERITY}` });
    }
  }
  if (state.age === null) {
    issues.push({ field: 'age', message: 'required' });
  } else if (!Number.isFinite(state.age) || state.age < AGE_MIN || state.age > AGE_MAX) {
    issues.push({ field: 'age', message: `age must lie between ${AGE_MIN} and ${AGE_MAX}` });
  }
  if (state.gender === null) {
    issues.push({ field: 'gender', message: 'required' });
  }
  return issues;
}

export function canSubmit(state: FormState): boolean {
  return validate(state).length === 0;
}

/** Build the service payload; throws if the form is incomplete. */
export function buildRequest(state: FormState): ScoreRequest {
  const issues = validate(state);
  if (issues.length > 0) {
    throw new Error(`form incomplete: ${issues.map((i) => i.field).join(', ')}`);
  }
  const features: Record<string, number> = {};
  for (const code of ITEM_CODES) features[code] = state.severities[code] as number;
  return { features, age: state.age as number, gender: state.gender as 0 | 1 };
}

// ---------------------------------------------------------------------------
// Result shaping for display
// ---------------------------------------------------------------------------

export interface ContributionBar {
  feature: string;
  value: number;
  contribution: number;
  /** signed width in [-1, 1] relative to the largest magnitude */
  relative: number;
}

/** Probability rendered as a percentage with two decimals, e.g. "63.37%". */
export function formatProbability(p: number): string {
  return `${(100 * p).toFixed(2)}%`;
}

/** Bars sorted by decreasing magnitude, scaled to the largest one. */
export function contributionBars(response: ScoreResponse): ContributionBar[] {
  const sorted = [...response.contributions].sort(
    (a, b) => Math.abs(b.contribution) - Math.abs(a.contribution),
  );
  const top = Math.abs(sorted[0]?.contribution ?? 0);
  return sorted.map((c) => ({
    feature: c.feature,
    value: c.value,
    contribution: c.contribution,
    relative: top > 0 ? c.contribution / top : 0,
  }));
}

/** Sum of the contribution bars; equals linear score minus intercept. */
export function contributionTotal(response: ScoreResponse): number {
  return response.contributions.reduce((acc, c) => acc + c.contribution, 0);
}
