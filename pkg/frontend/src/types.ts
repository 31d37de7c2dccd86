/** Wire types for the scoring service (shapes come from /api/schema). */

export type SexName = 'male' | 'female';

export type FeatureName =
  | 'sex'
  | 'age'
  | 'hdl'
  | 'total_chol'
  | 'sbp'
  | 'treatment'
  | 'smoker'
  | 'diabetic';

export interface BinInfo {
  min: number | null;
  max: number | null;
  points: number;
  label: string;
}

export interface BinBlock {
  bins: BinInfo[];
  values: number[];
}

export interface SbpBlock {
  untreated: BinBlock;
  treated: BinBlock;
  values: number[];
}

export interface BooleanBlock {
  points_true: number;
}

export interface SelectorBlock {
  selects_sbp_column: boolean;
}

export interface Schema {
  sexes: SexName[];
  features: Record<SexName, Record<string, BinBlock | SbpBlock | BooleanBlock | SelectorBlock>>;
  categories: {
    low_max_percent: number;
    high_min_percent: number;
    order: string[];
  };
  immutable: FeatureName[];
  mutable: FeatureName[];
  display_names: Record<FeatureName, string>;
}

/** Form-side values, keyed by feature name. */
export interface ProfileValues {
  sex: SexName;
  age: number;
  hdl: number;
  total_chol: number;
  sbp: number;
  treatment: boolean;
  smoker: boolean;
  diabetic: boolean;
}

/** Profile body as the API expects it. */
export interface ProfileBody {
  sex: SexName;
  age: number;
  hdl: number;
  total_chol: number;
  sbp: number;
  treated_sbp: boolean;
  smoker: boolean;
  diabetic: boolean;
}

export interface Breakdown {
  age: number;
  hdl: number;
  total_chol: number;
  sbp: number;
  smoker: number;
  diabetic: number;
  total: number;
}

export interface CounterfactualResult {
  status: 'ok' | 'already_at_target' | 'unreachable';
  detail?: string;
  target?: string;
  changed?: string[];
  changes?: Record<string, { from: number | boolean | string; to: number | boolean | string }>;
  witness?: ProfileBody;
}

export interface ScoreResponse {
  profile: ProfileBody;
  breakdown: Breakdown;
  risk_percent: number | 'lt1' | 'gt30';
  risk_percent_display: string;
  category: string;
  abductive: FeatureName[];
  counterfactual: CounterfactualResult;
}

export interface FieldError {
  field: string;
  message: string;
}

export function toProfileBody(values: ProfileValues): ProfileBody {
  return {
    sex: values.sex,
    age: values.age,
    hdl: values.hdl,
    total_chol: values.total_chol,
    sbp: values.sbp,
    treated_sbp: values.treatment,
    smoker: values.smoker,
    diabetic: values.diabetic,
  };
}

export function fromProfileBody(body: ProfileBody): ProfileValues {
  return {
    sex: body.sex,
    age: body.age,
    hdl: body.hdl,
    total_chol: body.total_chol,
    sbp: body.sbp,
    treatment: body.treated_sbp,
    smoker: body.smoker,
    diabetic: body.diabetic,
  };
}
