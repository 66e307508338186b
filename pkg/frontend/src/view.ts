// DOM rendering. The form is built once; the result panel and validation
// hints re-render on every state change.

import type { ScoreResponse } from './api.js';
import {
  contributionBars,
  contributionTotal,
  formatProbability,
  type FormState,
  validate,
} from './form.js';
import { ITEMS, SEVERITY_ANCHORS } from './model.js';

export interface ViewCallbacks {
  onSeverity(code: string, value: number): void;
  onAge(value: number | null): void;
  onGender(value: 0 | 1): void;
  onSubmit(): void;
  onServiceUrl(url: string): void;
}

export function renderQuestionnaire(root: HTMLElement, callbacks: ViewCallbacks): void {
  root.innerHTML = `
    <header>
      <h1>Early-PD screening questionnaire</h1>
      <p class="disclaimer">Research screening aid, not a diagnostic device.
      A positive result should be followed by clinical evaluation by a PD
      specialist.</p>
      <label class="service-url">Scoring service
        <input type="url" id="service-url" size="32" />
      </label>
    </header>
    <form id="pq-form">
      <section id="items"></section>
      <section class="demographics">
        <label>Age (years)
          <input type="number" id="age" min="0" max="130" step="any" />
        </label>
        <fieldset id="gender">
          <legend>Gender <a href="#data-dictionary" title="coding follows the cohort data dictionary">(code)</a></legend>
          <label><input type="radio" name="gender" value="0" /> code 0</label>
          <label><input type="radio" name="gender" value="1" /> code 1</label>
        </fieldset>
      </section>
      <div class="actions">
        <button type="submit" id="submit" disabled>Score</button>
        <span id="form-hint" role="status"></span>
      </div>
    </form>
    <div id="banner" hidden></div>
    <section id="result" hidden></section>
    <footer id="data-dictionary">
      <small>Gender is an opaque binary covariate of the screening model;
      the cohort data dictionary defines which sex the codes map to. Enter
      the code used by your cohort.</small>
    </footer>
  `;

  const itemsBox = root.querySelector('#items') as HTMLElement;
  for (const item of ITEMS) {
    const row = document.createElement('fieldset');
    row.className = 'item';
    row.dataset.code = item.code;
    const legend = document.createElement('legend');
    legend.textContent = `${item.number}. ${item.label}`;
    row.appendChild(legend);
    SEVERITY_ANCHORS.forEach((anchor, severity) => {
      const label = document.createElement('label');
      const input = document.createElement('input');
      input.type = 'radio';
      input.name = item.code;
      input.value = String(severity);
      input.addEventListener('change', () => callbacks.onSeverity(item.code, severity));
      label.appendChild(input);
      label.appendChild(document.createTextNode(`${severity} ${anchor}`));
      row.appendChild(label);
    });
    itemsBox.appendChild(row);
  }

  const age = root.querySelector('#age') as HTMLInputElement;
  age.addEventListener('input', () => {
    callbacks.onAge(age.value === '' ? null : Number(age.value));
  });
  for (const radio of root.querySelectorAll<HTMLInputElement>('#gender input')) {
    radio.addEventListener('change', () => callbacks.onGender(Number(radio.value) as 0 | 1));
  }
  const serviceUrl = root.querySelector('#service-url') as HTMLInputElement;
  serviceUrl.addEventListener('change', () => callbacks.onServiceUrl(serviceUrl.value));
  (root.querySelector('#pq-form') as HTMLFormElement).addEventListener('submit', (e) => {
    e.preventDefault();
    callbacks.onSubmit();
  });
}

export function renderFormState(root: HTMLElement, state: FormState): void {
  const issues = validate(state);
  const submit = root.querySelector('#submit') as HTMLButtonElement;
  submit.disabled = issues.length > 0;
  const hint = root.querySelector('#form-hint') as HTMLElement;
  const unanswered = issues.filter((i) => i.message === 'unanswered').length;
  const invalid = issues.filter((i) => i.message !== 'unanswered' && i.message !== 'required');
  if (issues.length === 0) {
    hint.textContent = '';
  } else if (invalid.length > 0) {
    hint.textContent = `${invalid[0].field}: ${invalid[0].message}`;
  } else {
    hint.textContent = `${unanswered} item(s) unanswered`;
  }
  (root.querySelector('#service-url') as HTMLInputElement).value = state.serviceUrl;

  const ageInput = root.querySelector('#age') as HTMLInputElement;
  const ageIssue = issues.find((i) => i.field === 'age' && i.message !== 'required');
  ageInput.setCustomValidity(ageIssue ? ageIssue.message : '');
  ageInput.classList.toggle('invalid', Boolean(ageIssue));
}

export function renderBanner(root: HTMLElement, message: string | null, retryable = false): void {
  const banner = root.querySelector('#banner') as HTMLElement;
  if (!message) {
    banner.hidden = true;
    banner.textContent = '';
    return;
  }
  banner.hidden = false;
  banner.textContent = retryable ? `${message} — check the service and resubmit.` : message;
  banner.className = retryable ? 'banner retry' : 'banner error';
}

export function renderResult(root: HTMLElement, response: ScoreResponse | null): void {
  const panel = root.querySelector('#result') as HTMLElement;
  if (!response) {
    panel.hidden = true;
    return;
  }
  panel.hidden = false;
  const probability = formatProbability(response.probability);
  const gaugeAngle = Math.round(180 * response.probability);
  const linear =
    response.linear_score === null ? '' : `linear score ${response.linear_score.toFixed(4)}`;
  const total = contributionTotal(response).toFixed(4);
  const bars = contributionBars(response)
    .map((bar) => {
      const side = bar.contribution >= 0 ? 'pos' : 'neg';
      const width = Math.abs(bar.relative) * 50;
      const offset = bar.contribution >= 0 ? 50 : 50 - width;
      return `
        <div class="bar-row" data-feature="${bar.feature}">
          <span class="bar-label">${bar.feature} = ${bar.value}</span>
          <span class="bar-track">
            <span class="bar ${side}" style="left:${offset}%;width:${width}%"></span>
          </span>
          <span class="bar-value">${bar.contribution.toFixed(4)}</span>
        </div>`;
    })
    .join('');
  panel.innerHTML = `
    <h2>PD likelihood</h2>
    <div class="gauge" style="--angle:${gaugeAngle}deg">
      <span id="probability" data-probability="${response.probability}">${probability}</span>
    </div>
    <p id="linear">${linear}</p>
    <h3>Per-item contributions <small>(sum ${total})</small></h3>
    <div id="bars">${bars}</div>
    <p class="model-id">model: ${response.model_id}</p>
  `;
}
