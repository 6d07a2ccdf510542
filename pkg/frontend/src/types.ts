// Wire types for the /v1 HTTP API. Field names match the JSON the server
// sends, so responses can be used directly without mapping layers.

export interface AgentActivation {
  agent_role: string;
  activation_round: number;
}

export interface RoomView {
  room_id: string;
  participants: string[];
  readiness: Record<string, boolean>;
  status: 'lobby' | 'active' | 'ended';
  current_round: number;
  responded_users: string[];
  agent_roster: AgentActivation[];
  scene_refs: string[];
  artifact_refs: string[];
  prompt_set_refs: string[];
  max_participants: number;
  created_at: string;
  ended_at: string | null;
  latest_seq: number;
  advanced?: boolean;
}

export interface MessageAttachment {
  kind: 'snapshot' | 'artifact';
  id: string;
  artifact_id?: string;
}

export interface ChatMessage {
  room_id: string;
  seq: number;
  author: string;
  role: 'user' | 'facilitator' | 'designer' | 'planner' | 'system';
  content: string;
  timestamp: string;
  round_index: number;
  attachment?: MessageAttachment | null;
}

export interface PostOutcome {
  stored_message: ChatMessage;
  round_completed: boolean;
  facilitator_reply: ChatMessage | null;
  new_round: number | null;
  facilitator_error: string | null;
}

export interface StateDelta {
  room: RoomView;
  messages: ChatMessage[];
  artifacts: ArtifactMeta[];
}

export interface ViewParams {
  panorama_id: string;
  heading: number;
  pitch: number;
  fov: number;
  latitude: number;
  longitude: number;
}

export interface SnapshotRecord extends ViewParams {
  snapshot_id: string;
  room_id: string;
  image_ref: string;
  saved_round: number;
}

export interface ArtifactMeta {
  artifact_id: string;
  room_id: string;
  kind: 'source_scene' | 'revised_design';
  bytes_ref: string;
  content_hash: string;
  created_round: number;
  generation_index: number;
  source_snapshot: string | null;
  prompt_set: string | null;
  parent_artifact: string | null;
  announce_seq: number;
  created_at: string;
}

export interface PromptItem {
  text: string;
  origin: 'extracted' | 'user_edited' | 'user_added';
  valid: boolean;
}

export interface PromptSet {
  prompt_set_id: string;
  room_id: string;
  source_segment: {
    user_id: string;
    segment_id: string;
    messages: { author: string; role: string; content: string; round_index: number }[];
  };
  items: PromptItem[];
  created_round: number;
  degraded: boolean;
}

export type PromptEdit =
  | { op: 'edit'; index: number; text: string }
  | { op: 'remove'; index: number }
  | { op: 'append'; text: string };

export interface ApiErrorBody {
  error: { code: string; message: string; retryable: boolean };
}
