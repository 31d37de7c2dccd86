/**
 * Schema-driven form construction: every control, label, hint list and
 * immutability flag comes from /api/schema, never from client-side tables.
 */

import type {
  BinBlock,
  FeatureName,
  ProfileValues,
  Schema,
  SbpBlock,
  SexName,
} from './types.js';

export type FieldKind = 'sex' | 'number' | 'boolean';

export interface FieldSpec {
  name: FeatureName;
  label: string;
  kind: FieldKind;
  immutable: boolean;
  /** Representative in-range values per sex, for input hints. */
  hints: Partial<Record<SexName, number[]>>;
}

function blockFor(schema: Schema, sex: SexName, name: string): BinBlock | SbpBlock | undefined {
  const block = schema.features[sex]?.[name];
  if (!block || 'points_true' in block || 'selects_sbp_column' in block) return undefined;
  return block as BinBlock | SbpBlock;
}

function isBooleanBlock(block: unknown): boolean {
  return (
    typeof block === 'object' &&
    block !== null &&
    ('points_true' in block || 'selects_sbp_column' in block)
  );
}

export function fieldSpecs(schema: Schema): FieldSpec[] {
  const specs: FieldSpec[] = [];
  for (const name of Object.keys(schema.display_names) as FeatureName[]) {
    const label = schema.display_names[name];
    const immutable = schema.immutable.includes(name);
    if (name === 'sex') {
      specs.push({ name, label, kind: 'sex', immutable, hints: {} });
      continue;
    }
    const sample = schema.features[schema.sexes[0]]?.[name];
    if (isBooleanBlock(sample)) {
      specs.push({ name, label, kind: 'boolean', immutable, hints: {} });
      continue;
    }
    const hints: FieldSpec['hints'] = {};
    for (const sex of schema.sexes) {
      const block = blockFor(schema, sex, name);
      if (block) hints[sex] = block.values;
    }
    specs.push({ name, label, kind: 'number', immutable, hints });
  }
  return specs;
}

export interface FormController {
  element: HTMLFormElement;
  /** Current values, or null while any required field is blank/invalid. */
  read(): ProfileValues | null;
  write(values: Partial<ProfileValues>): void;
  setErrors(errors: { field: string; message: string }[]): void;
  clearErrors(): void;
}

export function buildForm(
  doc: Document,
  schema: Schema,
  onChange: () => void,
): FormController {
  const form = doc.createElement('form');
  form.className = 'profile-form';
  form.addEventListener('submit', (event) => event.preventDefault());

  const specs = fieldSpecs(schema);
  const inputs = new Map<FeatureName, HTMLInputElement | HTMLSelectElement>();
  const errorSlots = new Map<string, HTMLElement>();

  for (const spec of specs) {
    const row = doc.createElement('label');
    row.className = 'field' + (spec.immutable ? ' immutable' : '');
    row.dataset.feature = spec.name;

    const caption = doc.createElement('span');
    caption.className = 'field-label';
    caption.textContent = spec.label + (spec.immutable ? ' (not modifiable)' : '');
    row.appendChild(caption);

    let input: HTMLInputElement | HTMLSelectElement;
    if (spec.kind === 'sex') {
      const select = doc.createElement('select');
      for (const sex of schema.sexes) {
        const option = doc.createElement('option');
        option.value = sex;
        option.textContent = sex;
        select.appendChild(option);
      }
      input = select;
    } else if (spec.kind === 'boolean') {
      const box = doc.createElement('input');
      box.type = 'checkbox';
      input = box;
    } else {
      const number = doc.createElement('input');
      number.type = 'number';
      number.required = true;
      const listId = `hints-${spec.name}`;
      number.setAttribute('list', listId);
      const datalist = doc.createElement('datalist');
      datalist.id = listId;
      row.appendChild(datalist);
      input = number;
    }
    input.name = spec.name;
    input.addEventListener('change', onChange);
    input.addEventListener('input', onChange);
    row.appendChild(input);

    const error = doc.createElement('span');
    error.className = 'field-error';
    row.appendChild(error);
    errorSlots.set(spec.name, error);

    inputs.set(spec.name, input);
    form.appendChild(row);
  }

  function refreshHints(): void {
    const sex = (inputs.get('sex') as HTMLSelectElement).value as SexName;
    for (const spec of specs) {
      if (spec.kind !== 'number') continue;
      const datalist = form.querySelector<HTMLDataListElement>(`#hints-${spec.name}`);
      if (!datalist) continue;
      datalist.textContent = '';
      for (const value of spec.hints[sex] ?? []) {
        const option = doc.createElement('option');
        option.value = String(value);
        datalist.appendChild(option);
      }
    }
  }
  (inputs.get('sex') as HTMLSelectElement).addEventListener('change', refreshHints);
  refreshHints();

  function read(): ProfileValues | null {
    const out: Record<string, unknown> = {};
    for (const spec of specs) {
      const input = inputs.get(spec.name)!;
      if (spec.kind === 'sex') {
        out[spec.name] = (input as HTMLSelectElement).value as SexName;
      } else if (spec.kind === 'boolean') {
        out[spec.name] = (input as HTMLInputElement).checked;
      } else {
        const raw = (input as HTMLInputElement).value.trim();
        if (raw === '' || Number.isNaN(Number(raw))) {
          return null;
        }
        out[spec.name] = Number(raw);
      }
    }
    return out as unknown as ProfileValues;
  }

  function write(values: Partial<ProfileValues>): void {
    for (const [name, value] of Object.entries(values)) {
      const input = inputs.get(name as FeatureName);
      if (!input) continue;
      if (typeof value === 'boolean') {
        (input as HTMLInputElement).checked = value;
      } else {
        input.value = String(value);
      }
    }
    refreshHints();
  }

  function clearErrors(): void {
    for (const slot of errorSlots.values()) slot.textContent = '';
  }

  function setErrors(errors: { field: string; message: string }[]): void {
    clearErrors();
    for (const { field, message } of errors) {
      const slot = errorSlots.get(field);
      if (slot) slot.textContent = message;
    }
  }

  return { element: form, read, write, setErrors, clearErrors };
}
