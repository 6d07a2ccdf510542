// Thin typed client for the /v1 gateway. Every mutation goes through
// request() so errors surface uniformly as ApiError.

import type {
  AgentActivation,
  ArtifactMeta,
  PostOutcome,
  PromptEdit,
  PromptSet,
  RoomView,
  SnapshotRecord,
  StateDelta,
  ViewParams,
} from './types.js';

export class ApiError extends Error {
  code: string;
  status: number;
  retryable: boolean;

  constructor(status: number, code: string, message: string, retryable: boolean) {
    super(message);
    this.name = 'ApiError';
    this.status = status;
    this.code = code;
    this.retryable = retryable;
  }
}

async function parseError(res: Response): Promise<ApiError> {
  let code = 'http_error';
  let message = `request failed with status ${res.status}`;
  let retryable = res.status >= 500;
  try {
    const body = await res.json();
    if (body && body.error) {
      code = body.error.code ?? code;
      message = body.error.message ?? message;
      retryable = body.error.retryable ?? retryable;
    }
  } catch {
    // non-JSON error body; keep the generic message
  }
  return new ApiError(res.status, code, message, retryable);
}

export class ApiClient {
  private baseUrl: string;

  constructor(baseUrl = '/v1') {
    this.baseUrl = baseUrl.replace(/\/$/, '');
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { 'content-type': 'application/json' };
      init.body = JSON.stringify(body);
    }
    const res = await fetch(`${this.baseUrl}${path}`, init);
    if (!res.ok) {
      throw await parseError(res);
    }
    return (await res.json()) as T;
  }

  join(roomId: string, username: string): Promise<RoomView> {
    return this.request('POST', `/rooms/${roomId}/participants`, { username });
  }

  setReady(roomId: string, username: string, ready: boolean): Promise<RoomView> {
    return this.request('POST', `/rooms/${roomId}/ready`, { username, ready });
  }

  postMessage(roomId: string, username: string, content: string): Promise<PostOutcome> {
    return this.request('POST', `/rooms/${roomId}/messages`, { username, content });
  }

  newRound(roomId: string, username: string, expectedRound: number): Promise<RoomView> {
    return this.request('POST', `/rooms/${roomId}/rounds`,
      { username, expected_round: expectedRound });
  }

  endSession(roomId: string, username: string): Promise<RoomView> {
    return this.request('POST', `/rooms/${roomId}/end`, { username });
  }

  registerExpert(roomId: string, agentRole: string,
                 phase: string): Promise<AgentActivation> {
    return this.request('POST', `/rooms/${roomId}/experts`,
      { agent_role: agentRole, phase });
  }

  queryExpert(roomId: string, agentRole: string): Promise<PostOutcome> {
    return this.request('POST', `/rooms/${roomId}/experts/${agentRole}/query`, {});
  }

  retryFacilitator(roomId: string, roundIndex: number): Promise<PostOutcome> {
    return this.request('POST', `/rooms/${roomId}/facilitator/retry`,
      { round_index: roundIndex });
  }

  getState(roomId: string, sinceSeq: number): Promise<StateDelta> {
    return this.request('GET', `/rooms/${roomId}/state?since_seq=${sinceSeq}`);
  }

  saveSnapshot(roomId: string, username: string, view: ViewParams):
      Promise<{ snapshot: SnapshotRecord; artifact: ArtifactMeta }> {
    return this.request('POST', `/rooms/${roomId}/snapshots`, { username, ...view });
  }

  extractPrompts(roomId: string, username: string): Promise<PromptSet> {
    return this.request('POST', `/rooms/${roomId}/prompt-sets`, { username });
  }

  getPromptSet(promptSetId: string): Promise<PromptSet> {
    return this.request('GET', `/prompt-sets/${promptSetId}`);
  }

  editPromptSet(promptSetId: string, edits: PromptEdit[]): Promise<PromptSet> {
    return this.request('POST', `/prompt-sets/${promptSetId}/edits`, { edits });
  }

  generateImage(roomId: string, promptSetId: string,
                sourceArtifactId?: string): Promise<ArtifactMeta> {
    return this.request('POST', `/rooms/${roomId}/images`, {
      prompt_set_id: promptSetId,
      source_artifact_id: sourceArtifactId ?? null,
    });
  }

  listArtifacts(roomId: string): Promise<{ artifacts: ArtifactMeta[] }> {
    return this.request('GET', `/rooms/${roomId}/artifacts`);
  }

  artifactUrl(artifactId: string): string {
    return `${this.baseUrl}/artifacts/${artifactId}`;
  }

  exportUrl(roomId: string): string {
    return `${this.baseUrl}/rooms/${roomId}/export`;
  }
}
