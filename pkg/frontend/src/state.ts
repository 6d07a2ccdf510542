// Client session state and the pure transitions that advance it. Rendering
// is a function of this state, so replaying the same deltas always produces
// the same transcript. Nothing here touches the network or the DOM.

import type {
  ArtifactMeta,
  ChatMessage,
  PromptSet,
  RoomView,
  StateDelta,
  ViewParams,
} from './types.js';

export interface PendingMessage {
  localId: number;
  content: string;
}

export interface SessionState {
  roomId: string;
  username: string;
  room: RoomView | null;
  messages: ChatMessage[];
  artifacts: ArtifactMeta[];
  lastSeenSeq: number;
  pending: PendingMessage[];
  view: ViewParams;
  promptSet: PromptSet | null;
  notice: string | null;
  nextLocalId: number;
}

export const DEFAULT_VIEW: ViewParams = {
  panorama_id: 'pano_demo_block_0001',
  heading: 135,
  pitch: 0,
  fov: 90,
  latitude: 40.7419,
  longitude: -73.9891,
};

export function initialState(roomId: string, username: string): SessionState {
  return {
    roomId,
    username,
    room: null,
    messages: [],
    artifacts: [],
    lastSeenSeq: 0,
    pending: [],
    view: { ...DEFAULT_VIEW },
    promptSet: null,
    notice: null,
    nextLocalId: 1,
  };
}

/** Merge one polling delta. Messages at or below last_seen_seq are already
 * rendered and get dropped, so each event lands exactly once even if a
 * delta is replayed. The cursor only moves forward. */
export function applyDelta(state: SessionState, delta: StateDelta): SessionState {
  const fresh = delta.messages.filter((m) => m.seq > state.lastSeenSeq);
  const known = new Set(state.artifacts.map((a) => a.artifact_id));
  const newArtifacts = delta.artifacts.filter((a) => !known.has(a.artifact_id));

  let lastSeen = state.lastSeenSeq;
  for (const m of fresh) {
    lastSeen = Math.max(lastSeen, m.seq);
  }
  lastSeen = Math.max(lastSeen, delta.room.latest_seq);

  // A pending echo is reconciled once the server copy of it arrives.
  const pending = state.pending.filter((p) => !fresh.some(
    (m) => m.role === 'user' && m.author === state.username && m.content === p.content));

  return {
    ...state,
    room: delta.room,
    messages: [...state.messages, ...fresh],
    artifacts: [...state.artifacts, ...newArtifacts],
    lastSeenSeq: lastSeen,
    pending,
  };
}

/** Optimistic echo of the local user's message, shown until the server
 * copy arrives in a delta. */
export function addPending(state: SessionState, content: string): SessionState {
  const entry: PendingMessage = { localId: state.nextLocalId, content };
  return {
    ...state,
    pending: [...state.pending, entry],
    nextLocalId: state.nextLocalId + 1,
  };
}

export function dropPending(state: SessionState, localId: number): SessionState {
  return { ...state, pending: state.pending.filter((p) => p.localId !== localId) };
}

export function setView(state: SessionState, view: Partial<ViewParams>): SessionState {
  return { ...state, view: { ...state.view, ...view } };
}

export function setPromptSet(state: SessionState, promptSet: PromptSet | null): SessionState {
  return { ...state, promptSet };
}

export function setNotice(state: SessionState, notice: string | null): SessionState {
  return { ...state, notice };
}

// ---- derived values the renderers need ----

/** Participants who still owe a message this round. */
export function waitingFor(room: RoomView): string[] {
  if (room.status !== 'active') {
    return [];
  }
  const responded = new Set(room.responded_users);
  return room.participants.filter((u) => !responded.has(u));
}

export interface TranscriptEntry {
  kind: 'round_marker' | 'message' | 'pending';
  round?: number;
  message?: ChatMessage;
  pending?: PendingMessage;
}

/** Messages in seq order with round boundary markers inserted, then the
 * unconfirmed optimistic tail. */
export function transcriptEntries(state: SessionState): TranscriptEntry[] {
  const entries: TranscriptEntry[] = [];
  let round = 0;
  for (const m of state.messages) {
    if (m.round_index !== round) {
      round = m.round_index;
      entries.push({ kind: 'round_marker', round });
    }
    entries.push({ kind: 'message', message: m });
  }
  for (const p of state.pending) {
    entries.push({ kind: 'pending', pending: p });
  }
  return entries;
}

/** Gallery badge text: the artifact's place in its lineage. */
export function generationBadge(artifact: ArtifactMeta): string {
  if (artifact.kind === 'source_scene') {
    return 'source';
  }
  return `generation ${artifact.generation_index}`;
}

/** Expert roster entries (facilitator is implicit and not shown as a chip). */
export function expertChips(room: RoomView): string[] {
  return room.agent_roster
    .filter((a) => a.agent_role !== 'facilitator')
    .map((a) => a.agent_role);
}
