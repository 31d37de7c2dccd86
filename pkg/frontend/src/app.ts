/**
 * What-if explorer: live scoring with abductive drivers highlighted, and a
 * counterfactual suggestion loop (apply a suggestion, keep editing).
 */

import { ApiClient, ApiError, isAbort } from './api.js';
import { debounce } from './debounce.js';
import { buildForm, type FormController } from './form.js';
import { renderResult, renderSuggestion } from './render.js';
import { applySuggestion } from './state.js';
import type { CounterfactualResult, Schema } from './types.js';
import { toProfileBody } from './types.js';

export interface AppOptions {
  /** Live-score debounce; the default matches interactive typing. */
  debounceMs?: number;
}

export interface AppHandles {
  form: FormController;
  schema: Schema;
  /** Score immediately, bypassing the debounce (tests use this). */
  triggerScore(): Promise<void>;
  /** Resolves after the in-flight request settles (tests await this). */
  whenIdle(): Promise<void>;
}

export async function initApp(
  doc: Document,
  root: HTMLElement,
  api: ApiClient,
  options: AppOptions = {},
): Promise<AppHandles> {
  const schema = await api.getSchema();
  const debounceMs = options.debounceMs ?? 250;

  root.textContent = '';
  const formPane = doc.createElement('section');
  formPane.className = 'pane form-pane';
  const resultPane = doc.createElement('section');
  resultPane.className = 'pane result-pane';
  const result = doc.createElement('div');
  result.dataset.role = 'result';
  const status = doc.createElement('div');
  status.dataset.role = 'status';
  status.className = 'status';
  const suggestion = doc.createElement('div');
  suggestion.dataset.role = 'suggestion-slot';
  const cfButton = doc.createElement('button');
  cfButton.type = 'button';
  cfButton.dataset.role = 'counterfactual-button';
  cfButton.textContent = 'suggest changes';
  resultPane.append(result, status, cfButton, suggestion);

  let pending: Promise<void> = Promise.resolve();

  const debouncedScore = debounce(() => {
    pending = doScore();
  }, debounceMs);
  const form = buildForm(doc, schema, () => debouncedScore());
  formPane.appendChild(form.element);
  root.append(formPane, resultPane);

  function setStatus(text: string): void {
    status.textContent = text;
  }

  async function doScore(): Promise<void> {
    const values = form.read();
    if (values === null) {
      setStatus('fill in all fields to score');
      return;
    }
    form.clearErrors();
    try {
      const response = await api.score(toProfileBody(values));
      renderResult(doc, result, response, schema);
      renderSuggestion(doc, suggestion, response.counterfactual, schema, onApply);
      setStatus('');
    } catch (error) {
      if (isAbort(error)) return;
      if (error instanceof ApiError) {
        form.setErrors(error.errors);
        setStatus(error.errors.length ? 'check the highlighted fields' : error.message);
      } else {
        setStatus('service unavailable');
      }
    }
  }

  function onApply(applied: CounterfactualResult): void {
    const values = form.read();
    if (values === null) return;
    const next = applySuggestion(values, applied);
    form.write(next);
    pending = doScore();
  }

  cfButton.addEventListener('click', () => {
    const values = form.read();
    if (values === null) return;
    pending = (async () => {
      try {
        const cf = await api.counterfactual(toProfileBody(values));
        renderSuggestion(doc, suggestion, cf, schema, onApply);
      } catch (error) {
        if (isAbort(error)) return;
        const detail =
          error instanceof ApiError && error.status === 422
            ? 'not achievable by modifiable factors'
            : 'counterfactual request failed';
        renderSuggestion(
          doc,
          suggestion,
          { status: 'unreachable', detail },
          schema,
          onApply,
        );
      }
    })();
  });

  return {
    form,
    schema,
    triggerScore() {
      pending = doScore();
      return pending;
    },
    async whenIdle() {
      await pending;
    },
  };
}

declare global {
  interface Window {
    frsExplainBooted?: boolean;
  }
}

if (typeof window !== 'undefined' && typeof document !== 'undefined' && !window.frsExplainBooted) {
  const root = document.getElementById('app');
  if (root) {
    window.frsExplainBooted = true;
    void initApp(document, root, new ApiClient());
  }
}
