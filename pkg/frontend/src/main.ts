// Entry point: wires the state container, the view, and the API client.

import { ScoringClient, ServiceUnreachableError, ValidationError } from './api.js';
import {
  buildRequest,
  canSubmit,
  initialState,
  setSeverity,
  type FormState,
} from './form.js';
import { renderBanner, renderFormState, renderQuestionnaire, renderResult } from './view.js';

const DEFAULT_SERVICE = 'http://127.0.0.1:8471';

function resolveServiceUrl(): string {
  const fromQuery = new URLSearchParams(window.location.search).get('service');
  return (fromQuery ?? DEFAULT_SERVICE).replace(/\/$/, '');
}

export function bootstrap(root: HTMLElement): void {
  let state: FormState = initialState(resolveServiceUrl());
  let client = new ScoringClient(state.serviceUrl);

  const refresh = () => {
    renderFormState(root, state);
    renderResult(root, state.lastResponse);
  };

  const submit = async () => {
    if (!canSubmit(state)) return;
    renderBanner(root, null);
    try {
      const response = await client.score(buildRequest(state));
      state = { ...state, lastResponse: response };
      refresh();
    } catch (err) {
      if (err instanceof DOMException && err.name === 'AbortError') {
        return; // superseded by a newer submission
      }
      if (err instanceof ValidationError) {
        renderBanner(root, `rejected by the service: ${err.message}`);
      } else if (err instanceof ServiceUnreachableError) {
        renderBanner(root, err.message, true);
      } else {
        renderBanner(root, String(err), true);
      }
    }
  };

  renderQuestionnaire(root, {
    onSeverity(code, value) {
      state = setSeverity(state, code, value);
      refresh();
    },
    onAge(value) {
      state = { ...state, age: value };
      refresh();
    },
    onGender(value) {
      state = { ...state, gender: value };
      refresh();
    },
    onServiceUrl(url) {
      state = { ...state, serviceUrl: url.replace(/\/$/, '') };
      client = new ScoringClient(state.serviceUrl);
      refresh();
    },
    onSubmit() {
      void submit();
    },
  });
  refresh();
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  bootstrap(document.getElementById('app') as HTMLElement);
}
