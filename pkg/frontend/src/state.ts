/** Form state transitions; no risk arithmetic lives here. */

import type { CounterfactualResult, ProfileValues } from './types.js';
import { fromProfileBody } from './types.js';

/**
 * Write a counterfactual witness back into the form: only the features in
 * the change set are copied, everything else keeps the user's values.
 */
export function applySuggestion(
  values: ProfileValues,
  suggestion: CounterfactualResult,
): ProfileValues {
  if (suggestion.status !== 'ok' || !suggestion.witness || !suggestion.changed) {
    return values;
  }
  const witness = fromProfileBody(suggestion.witness);
  const next: ProfileValues = { ...values };
  for (const name of suggestion.changed) {
    const key = name as keyof ProfileValues;
    (next[key] as ProfileValues[typeof key]) = witness[key];
  }
  return next;
}

export function describeChange(
  label: string,
  change: { from: number | boolean | string; to: number | boolean | string },
): string {
  const show = (v: number | boolean | string) =>
    typeof v === 'boolean' ? (v ? 'yes' : 'no') : String(v);
  return `${label}: ${show(change.from)} → ${show(change.to)}`;
}
