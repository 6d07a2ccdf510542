// @vitest-environment jsdom
//
// Rendering is a pure function of state: replaying the same recorded deltas
// must reproduce the same transcript markup.

import { describe, expect, it } from 'vitest';

import { applyDelta, addPending, initialState } from '../src/state.js';
import { renderTranscript } from '../src/workspace.js';
import type { ChatMessage, StateDelta } from '../src/types.js';

function msg(seq: number, author: string, role: ChatMessage['role'], content: string,
             round = 1, attachment: ChatMessage['attachment'] = null): ChatMessage {
  return {
    room_id: 'plaza', seq, author, role, content,
    timestamp: '2026-01-01T00:00:00+00:00', round_index: round, attachment,
  };
}

const recorded: StateDelta[] = [
  {
    room: {
      room_id: 'plaza', participants: ['ana', 'ben'],
      readiness: { ana: true, ben: true }, status: 'active', current_round: 1,
      responded_users: ['ana'], agent_roster: [], scene_refs: [], artifact_refs: [],
      prompt_set_refs: [], max_participants: 16,
      created_at: '2026-01-01T00:00:00+00:00', ended_at: null, latest_seq: 2,
    },
    messages: [
      msg(1, 'System', 'system', 'ana saved a street view of the site.', 1,
        { kind: 'snapshot', id: 'plaza-snap-1', artifact_id: 'plaza-art-2' }),
      msg(2, 'ana', 'user', 'More trees along the curb, please.'),
    ],
    artifacts: [],
  },
  {
    room: {
      room_id: 'plaza', participants: ['ana', 'ben'],
      readiness: { ana: true, ben: true }, status: 'active', current_round: 2,
      responded_users: [], agent_roster: [], scene_refs: [], artifact_refs: [],
      prompt_set_refs: [], max_participants: 16,
      created_at: '2026-01-01T00:00:00+00:00', ended_at: null, latest_seq: 4,
    },
    messages: [
      msg(3, 'ben', 'user', 'And wider sidewalks near the corner.'),
      msg(4, 'AI Facilitator', 'facilitator', 'Round summary: trees and sidewalks.', 1),
    ],
    artifacts: [],
  },
];

function replay() {
  return recorded.reduce(applyDelta, initialState('plaza', 'ana'));
}

describe('renderTranscript', () => {
  it('reproduces identical markup when deltas are replayed', () => {
    const a = renderTranscript(replay());
    const b = renderTranscript(replay());
    expect(a.outerHTML).toBe(b.outerHTML);
  });

  it('renders messages in seq order with round markers', () => {
    const list = renderTranscript(replay());
    const labels = Array.from(list.children).map((li) => {
      const elLi = li as HTMLElement;
      if (elLi.classList.contains('round-marker')) {
        return elLi.textContent;
      }
      return `#${elLi.dataset.seq}`;
    });
    expect(labels).toEqual(['Round 1', '#1', '#2', '#3', '#4']);
  });

  it('styles messages by role', () => {
    const list = renderTranscript(replay());
    const roles = Array.from(list.querySelectorAll('.msg')).map((li) => li.className);
    expect(roles).toEqual([
      'msg role-system', 'msg role-user', 'msg role-user', 'msg role-facilitator',
    ]);
  });

  it('marks snapshot announcements with their artifact', () => {
    const list = renderTranscript(replay());
    const attachment = list.querySelector('.attachment') as HTMLElement;
    expect(attachment).not.toBeNull();
    expect(attachment.dataset.artifactId).toBe('plaza-art-2');
  });

  it('renders the optimistic tail with a pending style', () => {
    const state = addPending(replay(), 'benches under the trees');
    const list = renderTranscript(state);
    const last = list.lastElementChild as HTMLElement;
    expect(last.classList.contains('pending')).toBe(true);
    expect(last.textContent).toContain('benches under the trees');
    expect(last.textContent).toContain('ana');
  });
});
