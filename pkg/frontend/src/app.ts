// Application shell: owns the session state, the polling loop, and the
// screen swap from lobby to workspace. All server interaction goes through
// the ApiClient; all rendering is driven by state updates.

import { ApiClient, ApiError } from './api.js';
import { buildLobby, LobbyScreen } from './lobby.js';
import { StatePoller } from './poll.js';
import {
  SessionState,
  addPending,
  applyDelta,
  dropPending,
  initialState,
  setNotice,
  setPromptSet,
  setView,
} from './state.js';
import type { PostOutcome, StateDelta } from './types.js';
import { buildWorkspace, WorkspaceScreen } from './workspace.js';

export interface AppOptions {
  baseUrl?: string;
  pollIntervalMs?: number;
}

export class App {
  readonly api: ApiClient;
  private root: HTMLElement;
  private pollIntervalMs: number;
  private lobby: LobbyScreen;
  private workspace: WorkspaceScreen | null = null;
  private poller: StatePoller | null = null;
  state: SessionState | null = null;

  constructor(root: HTMLElement, options: AppOptions = {}) {
    this.root = root;
    this.api = new ApiClient(options.baseUrl ?? '/v1');
    this.pollIntervalMs = options.pollIntervalMs ?? 1500;
    this.lobby = buildLobby({
      onJoin: (roomId, username, experts) => void this.join(roomId, username, experts),
      onToggleReady: (ready) => void this.toggleReady(ready),
    });
    this.root.append(this.lobby.root);
  }

  // ---- lobby ----

  private async join(roomId: string, username: string, experts: string[]): Promise<void> {
    if (!roomId || !username) {
      this.lobby.showError('both a name and a room id are needed');
      return;
    }
    try {
      const room = await this.api.join(roomId, username);
      for (const role of experts) {
        await this.api.registerExpert(roomId, role, 'at_creation');
      }
      this.state = initialState(roomId, username);
      this.lobby.showRoster(room, username);
      // The poller's first tick runs immediately and repaints the roster
      // with any experts registered above.
      this.startPolling();
    } catch (err) {
      this.lobby.showError(err instanceof ApiError ? err.message : String(err));
    }
  }

  private async toggleReady(ready: boolean): Promise<void> {
    if (!this.state) {
      return;
    }
    try {
      await this.api.setReady(this.state.roomId, this.state.username, ready);
      await this.poller?.tick();
    } catch (err) {
      this.lobby.showError(err instanceof ApiError ? err.message : String(err));
    }
  }

  // ---- polling ----

  private startPolling(): void {
    if (!this.state || this.poller) {
      return;
    }
    this.poller = new StatePoller(
      this.api,
      this.state.roomId,
      (delta) => this.onDelta(delta),
      (err) => this.onPollError(err),
      this.pollIntervalMs,
    );
    this.poller.start();
  }

  stop(): void {
    this.poller?.stop();
  }

  private onDelta(delta: StateDelta): void {
    if (!this.state) {
      return;
    }
    this.state = applyDelta(this.state, delta);
    if (delta.room.status === 'lobby') {
      this.lobby.showRoster(delta.room, this.state.username);
      return;
    }
    if (!this.workspace) {
      this.enterWorkspace();
    }
    this.workspace!.update(this.state);
  }

  private onPollError(err: unknown): void {
    if (!this.state || !this.workspace) {
      return;
    }
    const message = err instanceof ApiError ? err.message : String(err);
    this.state = setNotice(this.state, `connection trouble: ${message}`);
    this.workspace.update(this.state);
  }

  private refresh(): Promise<void> {
    return this.poller?.tick() ?? Promise.resolve();
  }

  private render(): void {
    if (this.state && this.workspace) {
      this.workspace.update(this.state);
    }
  }

  // ---- workspace ----

  private enterWorkspace(): void {
    if (!this.state) {
      return;
    }
    this.workspace = buildWorkspace(
      {
        onPost: (content) => void this.post(content),
        onViewChange: (patch) => {
          this.state = setView(this.state!, patch);
          this.render();
        },
        onSaveView: () => void this.saveView(),
        onGeneratePrompts: () => void this.generatePrompts(),
        onEditPrompt: (index, text) => void this.editPrompts([{ op: 'edit', index, text }]),
        onRemovePrompt: (index) => void this.editPrompts([{ op: 'remove', index }]),
        onAppendPrompt: (text) => void this.editPrompts([{ op: 'append', text }]),
        onGenerateImage: () => void this.generateImage(),
        onNewRound: () => void this.newRound(),
        onEndSession: () => void this.endSession(),
        onQueryExpert: (role) => void this.queryExpert(role),
        onRetryFacilitator: (round) => void this.retryFacilitator(round),
      },
      (id) => this.api.artifactUrl(id),
      this.api.exportUrl(this.state.roomId),
    );
    this.lobby.root.replaceWith(this.workspace.root);
  }

  private noteOutcome(outcome: PostOutcome): void {
    if (!this.state) {
      return;
    }
    if (outcome.facilitator_error) {
      this.state = setNotice(this.state,
        'The round closed but the synthesis failed; you can retry it.');
    }
  }

  private async post(content: string): Promise<void> {
    if (!this.state) {
      return;
    }
    this.state = addPending(this.state, content);
    const localId = this.state.nextLocalId - 1;
    this.render();
    try {
      const outcome = await this.api.postMessage(
        this.state.roomId, this.state.username, content);
      this.noteOutcome(outcome);
      await this.refresh();
    } catch (err) {
      this.state = dropPending(this.state, localId);
      this.state = setNotice(this.state,
        err instanceof ApiError ? err.message : String(err));
      this.render();
    }
  }

  private async saveView(): Promise<void> {
    if (!this.state) {
      return;
    }
    await this.guarded(async () => {
      await this.api.saveSnapshot(
        this.state!.roomId, this.state!.username, this.state!.view);
    });
  }

  private async generatePrompts(): Promise<void> {
    if (!this.state) {
      return;
    }
    await this.guarded(async () => {
      const ps = await this.api.extractPrompts(this.state!.roomId, this.state!.username);
      this.state = setPromptSet(this.state!, ps);
      if (ps.degraded) {
        this.state = setNotice(this.state,
          'Fewer prompts than usual could be extracted; edit or add your own.');
      }
    });
  }

  private async editPrompts(edits: Parameters<ApiClient['editPromptSet']>[1]): Promise<void> {
    if (!this.state?.promptSet) {
      return;
    }
    await this.guarded(async () => {
      const ps = await this.api.editPromptSet(this.state!.promptSet!.prompt_set_id, edits);
      this.state = setPromptSet(this.state!, ps);
    });
  }

  private async generateImage(): Promise<void> {
    if (!this.state?.promptSet) {
      return;
    }
    await this.guarded(async () => {
      await this.api.generateImage(this.state!.roomId, this.state!.promptSet!.prompt_set_id);
    });
  }

  private async newRound(): Promise<void> {
    if (!this.state?.room) {
      return;
    }
    await this.guarded(async () => {
      await this.api.newRound(
        this.state!.roomId, this.state!.username, this.state!.room!.current_round);
    });
  }

  private async endSession(): Promise<void> {
    if (!this.state) {
      return;
    }
    await this.guarded(async () => {
      await this.api.endSession(this.state!.roomId, this.state!.username);
    });
  }

  private async queryExpert(role: string): Promise<void> {
    if (!this.state) {
      return;
    }
    await this.guarded(async () => {
      await this.api.queryExpert(this.state!.roomId, role);
    });
  }

  private async retryFacilitator(round: number): Promise<void> {
    if (!this.state) {
      return;
    }
    await this.guarded(async () => {
      await this.api.retryFacilitator(this.state!.roomId, round);
      this.state = setNotice(this.state!, null);
    });
  }

  /** Run a server action; surface its error as a notice, then re-poll so
   * the screen reflects whatever actually happened. */
  private async guarded(action: () => Promise<void>): Promise<void> {
    try {
      await action();
      await this.refresh();
      this.render();
    } catch (err) {
      if (!this.state) {
        return;
      }
      this.state = setNotice(this.state,
        err instanceof ApiError ? err.message : String(err));
      this.render();
    }
  }
}
