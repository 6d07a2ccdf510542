// Lobby screen: join form, readiness roster, optional expert selection.
// The join form stays on screen (with an inline error) until the join
// succeeds; the roster section then tracks readiness until the room
// activates and the app swaps to the workspace.

import { clear, el } from './dom.js';
import type { RoomView } from './types.js';

export interface LobbyHandlers {
  onJoin: (roomId: string, username: string, experts: string[]) => void;
  onToggleReady: (ready: boolean) => void;
}

export interface LobbyScreen {
  root: HTMLElement;
  showError: (message: string) => void;
  showRoster: (room: RoomView, username: string) => void;
}

export function buildLobby(handlers: LobbyHandlers): LobbyScreen {
  const errorLine = el('p', { className: 'form-error', hidden: true });
  const usernameInput = el('input', {
    name: 'username', placeholder: 'your name', value: '',
  });
  const roomInput = el('input', {
    name: 'room', placeholder: 'room id', value: '',
  });
  const designerBox = el('input', { type: 'checkbox', name: 'designer' });
  const plannerBox = el('input', { type: 'checkbox', name: 'planner' });

  const form = el('form', { id: 'join-form' }, [
    el('label', { text: 'Name ' }, [usernameInput]),
    el('label', { text: 'Room ' }, [roomInput]),
    el('fieldset', { className: 'expert-pick' }, [
      el('legend', { text: 'AI experts' }),
      el('label', {}, [designerBox, ' urban designer']),
      el('label', {}, [plannerBox, ' urban planner']),
    ]),
    el('button', { type: 'submit', text: 'Join session' }),
    errorLine,
  ]);

  const rosterList = el('ul', { className: 'lobby-roster' });
  const readyButton = el('button', { className: 'ready-toggle', text: 'I am ready' });
  const rosterSection = el('div', { className: 'lobby-status', hidden: true }, [
    el('h2', { text: 'Waiting to start' }),
    rosterList,
    readyButton,
  ]);

  const root = el('div', { className: 'lobby' }, [
    el('h1', { text: 'roundtable' }),
    form,
    rosterSection,
  ]);

  let selfReady = false;

  form.addEventListener('submit', (ev) => {
    ev.preventDefault();
    errorLine.hidden = true;
    const experts: string[] = [];
    if (designerBox.checked) experts.push('designer');
    if (plannerBox.checked) experts.push('planner');
    handlers.onJoin(roomInput.value.trim(), usernameInput.value.trim(), experts);
  });

  readyButton.addEventListener('click', () => {
    handlers.onToggleReady(!selfReady);
  });

  return {
    root,
    showError(message: string) {
      errorLine.textContent = message;
      errorLine.hidden = false;
    },
    showRoster(room: RoomView, username: string) {
      form.hidden = true;
      rosterSection.hidden = false;
      selfReady = room.readiness[username] ?? false;
      readyButton.textContent = selfReady ? 'Not ready after all' : 'I am ready';
      clear(rosterList);
      for (const participant of room.participants) {
        const ready = room.readiness[participant];
        rosterList.append(el('li', {
          className: ready ? 'participant ready' : 'participant',
          text: `${participant} ${ready ? '(ready)' : '(not ready)'}`,
        }));
      }
      for (const agent of room.agent_roster) {
        if (agent.agent_role === 'facilitator') continue;
        rosterList.append(el('li', {
          className: 'participant agent-chip',
          text: `AI ${agent.agent_role}`,
        }));
      }
    },
  };
}
