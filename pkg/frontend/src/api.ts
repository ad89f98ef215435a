/**
 * Typed client for the mred /v1 HTTP API.
 *
 * Every number the console displays comes out of one of these calls; the UI
 * itself never computes metrics or rankings.  Errors arrive as
 * {code, message} JSON and are rethrown as ApiError.
 */

export type ReviewIn = {
  text: string;
  rating?: number | null;
  confidence?: number | null;
  reviewer_id?: string | null;
};

export type TaggedSentence = {
  text: string;
  label: string;
  confidence: number;
};

export type GenerateRequest = {
  reviews: ReviewIn[];
  engine: string;
  combine: string;
  control?: string[] | null;
  k?: number | null;
};

export type DraftSentence = {
  text: string;
  label: string;
  fallback: boolean;
  span: [number, number];
};

export type GenerateResponse = {
  text: string;
  sentences: DraftSentence[];
  control: string[] | null;
  warnings: string[];
  config_hash: string;
};

export type TransitionResponse = {
  labels: string[];
  counts: number[][];
  probs: number[][];
  config_hash: string;
};

export type StatsResponse = {
  n_submissions: number;
  n_reviews: number;
  n_labeled_sentences: number;
  splits: Record<string, number>;
  categories: unknown;
  config_hash: string;
};

export type HealthResponse = {
  status: string;
  version: string;
  corpus: string;
  n_submissions: number;
  kernel_backend: string;
  config_hash: string;
};

export type EvaluateResponse = {
  r1: number;
  r2: number;
  rl: number;
  structure_sim_sent: number;
  structure_sim_seg: number;
  decision_correct: number;
  n_instances: number;
  n_structured: number;
  config: Record<string, unknown>;
  config_hash: string;
};

export class ApiError extends Error {
  constructor(
    public readonly code: string,
    message: string,
    public readonly status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (
  url: string,
  init?: RequestInit,
) => Promise<Response>;

async function parseOrThrow<T>(resp: Response): Promise<T> {
  if (resp.ok) {
    return (await resp.json()) as T;
  }
  let code = "http_error";
  let message = `${resp.status} ${resp.statusText}`;
  try {
    const body = (await resp.json()) as { code?: string; message?: string };
    if (body.code) code = body.code;
    if (body.message) message = body.message;
  } catch {
    // non-JSON error body; keep the HTTP status text
  }
  throw new ApiError(code, message, resp.status);
}

export class MredClient {
  constructor(
    private readonly base = "",
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private get(path: string): Promise<Response> {
    return this.fetchFn(this.base + path);
  }

  private post(path: string, body: unknown): Promise<Response> {
    return this.fetchFn(this.base + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  async health(): Promise<HealthResponse> {
    return parseOrThrow(await this.get("/v1/health"));
  }

  async stats(): Promise<StatsResponse> {
    return parseOrThrow(await this.get("/v1/corpus/stats"));
  }

  async transition(): Promise<TransitionResponse> {
    return parseOrThrow(await this.get("/v1/corpus/transition"));
  }

  async tag(sentences: string[]): Promise<TaggedSentence[]> {
    return parseOrThrow(await this.post("/v1/tag", sentences));
  }

  async tagText(text: string): Promise<TaggedSentence[]> {
    return parseOrThrow(await this.post("/v1/tag", { text }));
  }

  async generate(request: GenerateRequest): Promise<GenerateResponse> {
    return parseOrThrow(await this.post("/v1/generate", request));
  }

  async evaluate(
    outputs: Record<string, unknown>[],
    references: Record<string, unknown>[],
  ): Promise<EvaluateResponse> {
    return parseOrThrow(await this.post("/v1/evaluate", { outputs, references }));
  }
}
