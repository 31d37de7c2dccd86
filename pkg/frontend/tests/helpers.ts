/** Shared test plumbing: fixture loading and an intercepting fake fetch. */

import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

import type { FetchLike } from '../src/api.js';
import type { ProfileBody, Schema, ScoreResponse } from '../src/types.js';

const here = dirname(fileURLToPath(import.meta.url));

export interface Fixtures {
  schema: Schema;
  score_worked: ScoreResponse;
  score_zero: ScoreResponse;
  score_high18: ScoreResponse;
  score_high18_applied: ScoreResponse;
  counterfactual_high18: ScoreResponse['counterfactual'];
  counterfactual_unreachable_status: number;
  counterfactual_unreachable: { detail: string };
}

export function loadFixtures(): Fixtures {
  const raw = readFileSync(join(here, 'fixtures', 'api.json'), 'utf8');
  return JSON.parse(raw) as Fixtures;
}

export interface Intercepted {
  path: string;
  body: unknown;
  response: unknown;
}

export interface FakeServer {
  fetch: FetchLike;
  /** Every request/response pair that crossed the fake wire. */
  log: Intercepted[];
}

function sameProfile(a: ProfileBody, b: ProfileBody): boolean {
  return (
    a.sex === b.sex &&
    a.age === b.age &&
    a.hdl === b.hdl &&
    a.total_chol === b.total_chol &&
    a.sbp === b.sbp &&
    a.treated_sbp === b.treated_sbp &&
    a.smoker === b.smoker &&
    a.diabetic === b.diabetic
  );
}

/**
 * Serves the captured service responses: scoring matches on the profile
 * body, everything else on the path.
 */
export function fakeServer(fixtures: Fixtures): FakeServer {
  const log: Intercepted[] = [];

  const scoreTable: ScoreResponse[] = [
    fixtures.score_worked,
    fixtures.score_zero,
    fixtures.score_high18,
    fixtures.score_high18_applied,
  ];

  const fetchImpl: FetchLike = async (input, init) => {
    const path = input.toString();
    const body = init?.body ? JSON.parse(init.body as string) : undefined;
    const respond = (payload: unknown, status = 200) => {
      log.push({ path, body, response: payload });
      return new Response(JSON.stringify(payload), {
        status,
        headers: { 'Content-Type': 'application/json' },
      });
    };
    if (path.endsWith('/api/schema')) {
      return respond(fixtures.schema);
    }
    if (path.endsWith('/api/score')) {
      const match = scoreTable.find((entry) => sameProfile(entry.profile, body));
      if (match) return respond(match);
      return respond(
        { errors: [{ field: 'profile', message: 'no fixture for this profile' }] },
        400,
      );
    }
    if (path.endsWith('/api/counterfactual')) {
      const profile = body.profile as ProfileBody;
      if (sameProfile(profile, fixtures.score_high18.profile)) {
        return respond(fixtures.counterfactual_high18);
      }
      return respond(fixtures.counterfactual_unreachable, 422);
    }
    return respond({ detail: 'not found' }, 404);
  };

  return { fetch: fetchImpl, log };
}

export function writeProfile(
  form: { write(values: Record<string, unknown>): void },
  profile: ProfileBody,
): void {
  form.write({
    sex: profile.sex,
    age: profile.age,
    hdl: profile.hdl,
    total_chol: profile.total_chol,
    sbp: profile.sbp,
    treatment: profile.treated_sbp,
    smoker: profile.smoker,
    diabetic: profile.diabetic,
  });
}
