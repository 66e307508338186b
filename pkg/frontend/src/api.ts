// JSON client for the scoring service (POST /v1/score, GET /v1/model).

export interface ScoreRequest {
  features: Record<string, number>;
  age: number;
  gender: 0 | 1;
}

export interface Contribution {
  feature: string;
  value: number;
  contribution: number;
}

export interface ScoreResponse {
  schema_version: number;
  model_id: string;
  probability: number;
  linear_score: number | null;
  intercept: number | null;
  contributions: Contribution[];
}

export interface FieldError {
  field: string;
  message: string;
}

export interface ModelInfo {
  model_id: string;
  model_type: string;
  feature_names: string[];
}

/** Service rejected the request with a field-level error list. */
export class ValidationError extends Error {
  constructor(public readonly errors: FieldError[]) {
    super(errors.map((e) => `${e.field}: ${e.message}`).join('; '));
    this.name = 'ValidationError';
  }
}

/** Network failure or non-JSON reply; the submission can be retried. */
export class ServiceUnreachableError extends Error {
  constructor(detail: string) {
    super(`scoring service unreachable: ${detail}`);
    this.name = 'ServiceUnreachableError';
  }
}

export class ScoringClient {
  private inFlight: AbortController | null = null;

  constructor(
    public baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  /** POST the request; a newer submission supersedes any in-flight one. */
  async score(request: ScoreRequest): Promise<ScoreResponse> {
    this.inFlight?.abort();
    const controller = new AbortController();
    this.inFlight = controller;
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}/v1/score`, {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify(request),
        signal: controller.signal,
      });
    } catch (err) {
      if (controller.signal.aborted) throw err;
      throw new ServiceUnreachableError(String(err));
    } finally {
      if (this.inFlight === controller) this.inFlight = null;
    }
    let payload: unknown;
    try {
      payload = await response.json();
    } catch (err) {
      throw new ServiceUnreachableError(`invalid JSON reply (${String(err)})`);
    }
    if (!response.ok) {
      const errors = (payload as { errors?: FieldError[] }).errors ?? [
        { field: '', message: `HTTP ${response.status}` },
      ];
      throw new ValidationError(errors);
    }
    return payload as ScoreResponse;
  }

  async modelInfo(): Promise<ModelInfo> {
    try {
      const response = await this.fetchImpl(`${this.baseUrl}/v1/model`);
      if (!response.ok) throw new Error(`HTTP ${response.status}`);
      return (await response.json()) as ModelInfo;
    } catch (err) {
      throw new ServiceUnreachableError(String(err));
    }
  }
}
